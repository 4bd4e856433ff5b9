use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TopicError;
use super::summarise::Summary;
use super::tfidf::{SparseVec, TfidfIndex, dot};

pub const MAX_ITERATIONS: usize = 300;
pub const TOLERANCE: f64 = 1e-6;
pub const DEFAULT_K_MAX: usize = 10;
/// Independent seedings per k; the lowest objective wins.
pub const RESTARTS: usize = 8;
pub const LABEL_TERMS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    /// Objective after each assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansRun {
    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist_to_centroid(x: &[(usize, f64)], x_sq: f64, c: &[f64], c_sq: f64) -> f64 {
    let cross: f64 = x.iter().map(|&(i, w)| w * c[i]).sum();
    (x_sq - 2.0 * cross + c_sq).max(0.0)
}

fn nearest(x: &[(usize, f64)], x_sq: f64, centroids: &[Vec<f64>], c_sq: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist_to_centroid(x, x_sq, c, c_sq[j]);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn densify(x: &[(usize, f64)], dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for &(i, w) in x {
        v[i] = w;
    }
    v
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
fn seed_centroids(points: &[SparseVec], sq: &[f64], k: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut centroids = vec![densify(&points[chosen[0]], dim)];
    while centroids.len() < k {
        let c_sq: Vec<f64> = centroids.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
        let d: Vec<f64> = points
            .iter()
            .zip(sq)
            .map(|(p, &s)| nearest(p, s, &centroids, &c_sq).1)
            .collect();
        let total: f64 = d.iter().sum();
        let next = if total <= 0.0 {
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        } else {
            let mut r = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &di) in d.iter().enumerate() {
                if r < di {
                    pick = i;
                    break;
                }
                r -= di;
            }
            pick
        };
        chosen.push(next);
        centroids.push(densify(&points[next], dim));
    }
    centroids
}

fn lloyd(points: &[SparseVec], sq: &[f64], mut centroids: Vec<Vec<f64>>, dim: usize) -> KMeansRun {
    let k = centroids.len();
    let mut assignment = vec![0usize; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let c_sq: Vec<f64> = centroids.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
        let mut objective = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, sq[i], &centroids, &c_sq);
            assignment[i] = j;
            objective += d;
        }
        history.push(objective);

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for &(t, w) in p {
                sums[assignment[i]][t] += w;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            if counts[j] == 0 {
                // empty cluster keeps its previous centre
                continue;
            }
            let new: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            let moved: f64 = new.iter().zip(&centroids[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            shift = shift.max(moved.sqrt());
            centroids[j] = new;
        }
        if shift < TOLERANCE {
            break;
        }
    }
    KMeansRun {
        centroids,
        assignment,
        objective_history: history,
        iterations,
    }
}

/// Lloyd's algorithm from k-means++ seeds, `RESTARTS` seedings drawn from
/// one seeded stream; the run with the lowest final objective is kept.
pub fn kmeans(points: &[SparseVec], k: usize, dim: usize, seed: u64) -> KMeansRun {
    assert!(k >= 1 && k <= points.len(), "k out of range");
    let sq: Vec<f64> = points.iter().map(|p| p.iter().map(|(_, w)| w * w).sum()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansRun> = None;
    for _ in 0..RESTARTS {
        let seeds = seed_centroids(points, &sq, k, dim, &mut rng);
        let run = lloyd(points, &sq, seeds, dim);
        if best.as_ref().is_none_or(|b| run.objective() < b.objective() - 1e-12) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

/// Pairwise Euclidean distances between unit vectors.
pub fn distance_matrix(points: &[SparseVec]) -> Vec<Vec<f64>> {
    let n = points.len();
    let sq: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (sq[i] + sq[j] - 2.0 * dot(&points[i], &points[j])).max(0.0).sqrt();
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}

/// Mean silhouette. Points in singleton clusters score 0.
pub fn silhouette(distances: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let n = assignment.len();
    if n == 0 {
        return 0.0;
    }
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignment {
        sizes[a] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += distances[i][j];
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Canonical id to cluster; clusters are numbered by their smallest id.
    pub assignment: BTreeMap<String, usize>,
    pub silhouette: f64,
    /// Mean silhouette for every k tried.
    pub silhouette_by_k: Vec<(usize, f64)>,
    /// Top-weight centroid terms per cluster.
    pub labels: Vec<Vec<String>>,
    pub objective_history: Vec<f64>,
    #[serde(default)]
    pub summaries: BTreeMap<usize, Summary>,
}

impl TopicModel {
    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, c)| **c == cluster)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// All documents in one cluster, for corpora too small to cluster.
    pub fn single(index: &TfidfIndex) -> Self {
        let ids: Vec<&String> = index.doc_vectors.keys().collect();
        let dim = index.dimension();
        let mut centroid = vec![0.0; dim];
        for v in index.doc_vectors.values() {
            for &(i, w) in v {
                centroid[i] += w / ids.len().max(1) as f64;
            }
        }
        let labels = vec![top_terms(&centroid, &index.vectorizer.terms())];
        Self {
            k: 1,
            centroids: vec![centroid],
            assignment: ids.into_iter().map(|id| (id.clone(), 0)).collect(),
            silhouette: 0.0,
            silhouette_by_k: Vec::new(),
            labels,
            objective_history: Vec::new(),
            summaries: BTreeMap::new(),
        }
    }
}

fn top_terms(centroid: &[f64], terms: &[&str]) -> Vec<String> {
    let mut ranked: Vec<(usize, f64)> = centroid
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(terms[a.0].cmp(terms[b.0])));
    ranked
        .into_iter()
        .take(LABEL_TERMS)
        .map(|(i, _)| terms[i].to_string())
        .collect()
}

/// Default candidate range `2..=min(10, D-1)`.
pub fn default_k_range(documents: usize) -> RangeInclusive<usize> {
    2..=DEFAULT_K_MAX.min(documents.saturating_sub(1)).max(2)
}

/// Runs k-means for each k in `k_range` and keeps the k with the highest
/// mean silhouette; ties go to the smaller k.
pub fn cluster_topics(index: &TfidfIndex, k_range: RangeInclusive<usize>, seed: u64) -> Result<TopicModel, TopicError> {
    let ids: Vec<&String> = index.doc_vectors.keys().collect();
    let d = ids.len();
    if d < 3 {
        return Err(TopicError::TooFewDocuments { got: d, need: 3 });
    }
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 || hi > d - 1 || lo > hi {
        return Err(TopicError::KRange { lo, hi, documents: d });
    }
    let points: Vec<SparseVec> = index.doc_vectors.values().cloned().collect();
    let dim = index.dimension();
    let distances = distance_matrix(&points);

    let mut best: Option<(usize, f64, KMeansRun)> = None;
    let mut by_k = Vec::new();
    for k in lo..=hi {
        let run = kmeans(&points, k, dim, seed);
        let s = silhouette(&distances, &run.assignment);
        by_k.push((k, s));
        if best.as_ref().is_none_or(|b| s > b.1 + 1e-12) {
            best = Some((k, s, run));
        }
    }
    let (_, s, run) = best.expect("non-empty k range");

    // renumber clusters by first member in id order
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &run.assignment {
        let next = remap.len();
        remap.entry(c).or_insert(next);
    }
    let mut centroids = vec![Vec::new(); remap.len()];
    for (&old, &new) in &remap {
        centroids[new] = run.centroids[old].clone();
    }
    let terms = index.vectorizer.terms();
    let labels = centroids.iter().map(|c| top_terms(c, &terms)).collect();
    let assignment = ids
        .iter()
        .zip(&run.assignment)
        .map(|(id, c)| ((*id).clone(), remap[c]))
        .collect();
    Ok(TopicModel {
        k: remap.len(),
        centroids,
        assignment,
        silhouette: s,
        silhouette_by_k: by_k,
        labels,
        objective_history: run.objective_history,
        summaries: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::tfidf::build_tfidf;

    fn planted() -> Vec<(String, String)> {
        let lm = ["recurrent", "language", "perplexity", "tokens", "vocabulary", "transformer", "attention", "wikitext"];
        let mu = ["midi", "music", "melody", "piano", "notes", "chords", "rhythm", "symbolic"];
        let mut docs = Vec::new();
        for i in 0..10 {
            let pick = |w: &[&str]| (0..5).map(|j| w[(i + j * 3) % w.len()]).collect::<Vec<_>>().join(" ");
            docs.push((format!("lm{i:02}"), pick(&lm)));
            docs.push((format!("mu{i:02}"), pick(&mu)));
        }
        docs
    }

    #[test]
    fn objective_non_increasing() {
        let idx = build_tfidf(&planted()).unwrap();
        let pts: Vec<SparseVec> = idx.doc_vectors.values().cloned().collect();
        for k in 2..=5 {
            let run = kmeans(&pts, k, idx.dimension(), 42);
            for w in run.objective_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn planted_two_topics() {
        let idx = build_tfidf(&planted()).unwrap();
        let model = cluster_topics(&idx, 2..=5, 42).unwrap();
        assert_eq!(model.k, 2);
        for (id, c) in &model.assignment {
            assert_eq!(*c, usize::from(id.starts_with("mu")), "{id}");
        }
        let again = cluster_topics(&idx, 2..=5, 42).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn too_few_docs() {
        let idx = build_tfidf(&planted()[..2]).unwrap();
        assert!(matches!(cluster_topics(&idx, 2..=2, 1), Err(TopicError::TooFewDocuments { .. })));
    }

    #[test]
    fn silhouette_singletons_zero() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(silhouette(&d, &[0, 1]), 0.0);
    }
}
