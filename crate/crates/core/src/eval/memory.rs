//! Peak resident-memory sampling for the scaling benchmark (Linux procfs;
//! readings are zero elsewhere).

use std::sync::Arc;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::thread::JoinHandle;
use std::time::Duration;

fn status_field(name: &str) -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with(name))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Current resident set size in bytes.
pub fn current_rss_bytes() -> u64 {
    status_field("VmRSS:").unwrap_or(0)
}

/// Kernel-tracked peak RSS since start or the last [`reset_peak`].
pub fn peak_rss_bytes() -> u64 {
    status_field("VmHWM:").unwrap_or(0)
}

/// Resets the kernel peak-RSS counter to the current RSS. Best effort.
pub fn reset_peak() {
    let _ = std::fs::write("/proc/self/clear_refs", "5");
}

/// Samples RSS on a background thread at a fixed interval and keeps the
/// maximum. The kernel's own high-water mark is folded in on `stop`, so
/// runs shorter than one interval still report their peak.
pub struct MemorySampler {
    stop: Arc<AtomicBool>,
    peak: Arc<AtomicU64>,
    handle: Option<JoinHandle<()>>,
}

impl MemorySampler {
    pub fn start(interval: Duration) -> Self {
        reset_peak();
        let stop = Arc::new(AtomicBool::new(false));
        let peak = Arc::new(AtomicU64::new(current_rss_bytes()));
        let handle = {
            let (stop, peak) = (stop.clone(), peak.clone());
            std::thread::spawn(move || {
                let tick = Duration::from_millis(10).min(interval);
                let mut waited = Duration::ZERO;
                while !stop.load(Ordering::Relaxed) {
                    std::thread::sleep(tick);
                    waited += tick;
                    if waited >= interval {
                        waited = Duration::ZERO;
                        peak.fetch_max(current_rss_bytes(), Ordering::Relaxed);
                    }
                }
            })
        };
        Self {
            stop,
            peak,
            handle: Some(handle),
        }
    }

    /// Stops sampling and returns the peak in bytes.
    pub fn stop(mut self) -> u64 {
        self.finish()
    }

    fn finish(&mut self) -> u64 {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
        self.peak
            .load(Ordering::Relaxed)
            .max(current_rss_bytes())
            .max(peak_rss_bytes())
    }
}

impl Drop for MemorySampler {
    fn drop(&mut self) {
        self.finish();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sees_an_allocation() {
        if current_rss_bytes() == 0 {
            return; // no procfs
        }
        let sampler = MemorySampler::start(Duration::from_millis(20));
        let before = current_rss_bytes();
        let block = vec![1u8; 64 << 20];
        std::hint::black_box(&block);
        std::thread::sleep(Duration::from_millis(60));
        drop(block);
        assert!(sampler.stop() >= before + (32 << 20));
    }
}
