//! Bidirectional EEG↔topomap retrieval: Recall@K, Mean Rank and plot-data
//! exports.

use serde::{Deserialize, Serialize};

use crate::align::loss::{dot_matrix, Square};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "eeg_to_topo")]
    EegToTopo,
    #[serde(rename = "topo_to_eeg")]
    TopoToEeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub direction: Direction,
    /// Evaluation pool: a dataset name or `"overall"`.
    pub pool: String,
    pub r1: f64,
    pub r5: f64,
    pub r10: f64,
    pub mean_rank: f64,
    pub n: usize,
}

/// `S[i][j] = â_i · b̂_j` over unit rows.
pub fn similarity_matrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Square> {
    dot_matrix(a, b)
}

/// 1-based rank of the true match `i` in row `i`: descending similarity,
/// ties broken by lower candidate index.
pub fn true_rank(s: &Square, i: usize) -> usize {
    let target = s.get(i, i);
    let mut rank = 1;
    for j in 0..s.n {
        let v = s.get(i, j);
        if v > target || (v == target && j < i) {
            rank += 1;
        }
    }
    rank
}

pub fn recall_at_k(s: &Square, k: usize) -> Result<f64> {
    if k == 0 || k > s.n {
        return Err(Error::Config(format!("k = {k} outside 1..={}", s.n)));
    }
    let hits = (0..s.n).filter(|&i| true_rank(s, i) <= k).count();
    Ok(100.0 * hits as f64 / s.n as f64)
}

pub fn mean_rank(s: &Square) -> f64 {
    if s.n == 0 {
        return f64::NAN;
    }
    (0..s.n).map(|i| true_rank(s, i) as f64).sum::<f64>() / s.n as f64
}

fn recall_capped(s: &Square, k: usize) -> f64 {
    recall_at_k(s, k.min(s.n)).expect("k clamped to pool size")
}

/// Report for one direction over one pool. K values larger than the pool
/// are clamped to the pool size.
pub fn report(s: &Square, direction: Direction, pool: &str) -> Result<RetrievalReport> {
    if s.n == 0 {
        return Err(Error::Config("empty retrieval pool".into()));
    }
    Ok(RetrievalReport {
        direction,
        pool: pool.to_string(),
        r1: recall_capped(s, 1),
        r5: recall_capped(s, 5),
        r10: recall_capped(s, 10),
        mean_rank: mean_rank(s),
        n: s.n,
    })
}

/// Both directions for embeddings of one pool.
pub fn evaluate_pool(z_eeg: &[Vec<f64>], z_vis: &[Vec<f64>], pool: &str) -> Result<[RetrievalReport; 2]> {
    let s = similarity_matrix(z_eeg, z_vis)?;
    Ok([report(&s, Direction::EegToTopo, pool)?, report(&s.transpose(), Direction::TopoToEeg, pool)?])
}

/// Per-dataset pools (sorted by name) followed by the overall pool.
pub fn evaluate_by_dataset(
    z_eeg: &[Vec<f64>],
    z_vis: &[Vec<f64>],
    datasets: &[String],
) -> Result<Vec<RetrievalReport>> {
    if z_eeg.len() != datasets.len() {
        return Err(Error::Shape(format!("{} embeddings for {} dataset tags", z_eeg.len(), datasets.len())));
    }
    let mut names: Vec<&String> = datasets.iter().collect();
    names.sort();
    names.dedup();
    let mut out = Vec::new();
    for name in names {
        let idx: Vec<usize> = (0..datasets.len()).filter(|&i| &datasets[i] == name).collect();
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| z_eeg[i].clone()).collect();
        let b: Vec<Vec<f64>> = idx.iter().map(|&i| z_vis[i].clone()).collect();
        out.extend(evaluate_pool(&a, &b, name)?);
    }
    out.extend(evaluate_pool(z_eeg, z_vis, "overall")?);
    Ok(out)
}

pub fn similarity_csv(s: &Square) -> String {
    let mut out = String::new();
    for i in 0..s.n {
        let row: Vec<String> = (0..s.n).map(|j| format!("{:.6}", s.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Histogram of matched (diagonal) and mismatched (off-diagonal) scores
/// over `[-1, 1]`, as `bin_lo,bin_hi,matched,mismatched` rows.
pub fn score_histogram_csv(s: &Square, bins: usize) -> String {
    let bins = bins.max(1);
    let mut matched = vec![0usize; bins];
    let mut mismatched = vec![0usize; bins];
    let width = 2.0 / bins as f64;
    for i in 0..s.n {
        for j in 0..s.n {
            let b = (((s.get(i, j) + 1.0) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
            if i == j {
                matched[b] += 1;
            } else {
                mismatched[b] += 1;
            }
        }
    }
    let mut out = String::from("bin_lo,bin_hi,matched,mismatched\n");
    for b in 0..bins {
        let lo = -1.0 + b as f64 * width;
        out.push_str(&format!("{:.4},{:.4},{},{}\n", lo, lo + width, matched[b], mismatched[b]));
    }
    out
}
