//! HTTP access for the paper-index APIs: a live client, a replay client for
//! recorded fixtures, rate limiting and bounded retries.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("network error for {url}: {message}")]
    Network { url: String, message: String },
    #[error("HTTP {status} for {url}")]
    Status { url: String, status: u16 },
}

pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError>;

    /// POST a JSON body. Used by the summarisation backend client.
    fn post_json(
        &self,
        url: &str,
        body: &str,
        bearer: Option<&str>,
    ) -> Result<HttpResponse, TransportError> {
        let _ = (body, bearer);
        Err(TransportError::Network {
            url: url.to_string(),
            message: "POST not supported by this transport".into(),
        })
    }
}

/// Live client over `reqwest`.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("litsynth/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError::Network {
                url: String::new(),
                message: e.to_string(),
            })?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        let resp = self.client.get(url).send().map_err(|e| TransportError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| TransportError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        Ok(HttpResponse {
            status,
            body: body.to_vec(),
        })
    }

    fn post_json(
        &self,
        url: &str,
        body: &str,
        bearer: Option<&str>,
    ) -> Result<HttpResponse, TransportError> {
        let mut req = self
            .client
            .post(url)
            .header("content-type", "application/json")
            .body(body.to_string());
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| TransportError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| TransportError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        Ok(HttpResponse {
            status,
            body: body.to_vec(),
        })
    }
}

/// One recorded request/response pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedExchange {
    pub url: String,
    pub status: u16,
    pub body: String,
}

/// Serves recorded responses by exact URL; unknown URLs fail as network
/// errors. Counts every call so tests can assert cache hits.
#[derive(Debug, Default)]
pub struct ReplayTransport {
    exchanges: HashMap<String, RecordedExchange>,
    calls: AtomicUsize,
}

impl ReplayTransport {
    pub fn new(exchanges: impl IntoIterator<Item = RecordedExchange>) -> Self {
        Self {
            exchanges: exchanges
                .into_iter()
                .map(|e| (e.url.clone(), e))
                .collect(),
            calls: AtomicUsize::new(0),
        }
    }

    /// Loads a line-delimited file of [`RecordedExchange`] records.
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_jsonl(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let mut out = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            out.push(serde_json::from_str::<RecordedExchange>(line)?);
        }
        Ok(Self::new(out))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for ReplayTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        match self.exchanges.get(url) {
            Some(ex) => Ok(HttpResponse {
                status: ex.status,
                body: ex.body.clone().into_bytes(),
            }),
            None => Err(TransportError::Network {
                url: url.to_string(),
                message: "no recorded response".into(),
            }),
        }
    }
}

/// Transport that refuses every request; used for offline runs.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        Err(TransportError::Network {
            url: url.to_string(),
            message: "offline".into(),
        })
    }
}

/// Token bucket: `capacity` tokens, one token regained every `refill`.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    refill: Duration,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(capacity: u32, refill: Duration) -> Self {
        let capacity = f64::from(capacity.max(1));
        Self {
            capacity,
            refill,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// One request every three seconds.
    pub fn polite() -> Self {
        Self::new(1, Duration::from_secs(3))
    }

    pub fn unlimited() -> Self {
        Self::new(1, Duration::ZERO)
    }

    /// Blocks until a token is available and consumes it.
    pub fn acquire(&self) {
        if self.refill.is_zero() {
            return;
        }
        loop {
            let wait = {
                let mut guard = self.state.lock().unwrap();
                let (tokens, last) = &mut *guard;
                let now = Instant::now();
                let gained = now.duration_since(*last).as_secs_f64() / self.refill.as_secs_f64();
                *tokens = (*tokens + gained).min(self.capacity);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    None
                } else {
                    Some(self.refill.mul_f64(1.0 - *tokens))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn immediate() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::ZERO,
        }
    }
}

fn retryable(status: u16) -> bool {
    status == 429 || status >= 500
}

/// GET with rate limiting and exponential backoff. Client errors other
/// than 429 fail without retrying.
pub fn get_with_retry(
    transport: &dyn Transport,
    limiter: &RateLimiter,
    policy: RetryPolicy,
    url: &str,
) -> Result<HttpResponse, TransportError> {
    let mut delay = policy.base_delay;
    let mut last_err = None;
    for attempt in 0..policy.attempts.max(1) {
        if attempt > 0 && !delay.is_zero() {
            std::thread::sleep(delay);
            delay *= 2;
        }
        limiter.acquire();
        match transport.get(url) {
            Ok(resp) if resp.is_success() => return Ok(resp),
            Ok(resp) => {
                let err = TransportError::Status {
                    url: url.to_string(),
                    status: resp.status,
                };
                if !retryable(resp.status) {
                    return Err(err);
                }
                log::warn!("attempt {} for {url} returned {}", attempt + 1, resp.status);
                last_err = Some(err);
            }
            Err(e) => {
                log::warn!("attempt {} for {url} failed: {e}", attempt + 1);
                last_err = Some(e);
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flaky {
        fail_times: AtomicUsize,
        status: u16,
    }

    impl Transport for Flaky {
        fn get(&self, _url: &str) -> Result<HttpResponse, TransportError> {
            if self.fail_times.load(Ordering::SeqCst) > 0 {
                self.fail_times.fetch_sub(1, Ordering::SeqCst);
                return Ok(HttpResponse {
                    status: self.status,
                    body: vec![],
                });
            }
            Ok(HttpResponse {
                status: 200,
                body: b"ok".to_vec(),
            })
        }
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let t = Flaky {
            fail_times: AtomicUsize::new(2),
            status: 503,
        };
        let r = get_with_retry(&t, &RateLimiter::unlimited(), RetryPolicy::immediate(), "u");
        assert_eq!(r.unwrap().body, b"ok");
    }

    #[test]
    fn gives_up_after_three_attempts() {
        let t = Flaky {
            fail_times: AtomicUsize::new(5),
            status: 500,
        };
        let r = get_with_retry(&t, &RateLimiter::unlimited(), RetryPolicy::immediate(), "u");
        assert!(matches!(r, Err(TransportError::Status { status: 500, .. })));
        assert_eq!(t.fail_times.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn not_found_is_not_retried() {
        let t = Flaky {
            fail_times: AtomicUsize::new(5),
            status: 404,
        };
        let r = get_with_retry(&t, &RateLimiter::unlimited(), RetryPolicy::immediate(), "u");
        assert!(r.is_err());
        assert_eq!(t.fail_times.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn token_bucket_spaces_requests() {
        let limiter = RateLimiter::new(1, Duration::from_millis(40));
        let start = Instant::now();
        for _ in 0..3 {
            limiter.acquire();
        }
        // first token is free, the next two wait one refill each
        assert!(start.elapsed() >= Duration::from_millis(75));
    }
}
