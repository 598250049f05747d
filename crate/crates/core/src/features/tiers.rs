//! Channel energies and the three-tier K-means grouping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Segment;

pub const KMEANS_RESTARTS: usize = 20;
const MAX_LLOYD_ITERS: usize = 200;

/// Mean squared amplitude per channel, in segment channel order.
pub fn channel_energies(seg: &Segment) -> Vec<(String, f64)> {
    seg.channels
        .iter()
        .zip(&seg.data)
        .map(|(name, row)| {
            let ms = if row.is_empty() {
                0.0
            } else {
                row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64
            };
            (name.clone(), ms)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakChannel {
    pub channel: String,
    pub power: f64,
}

/// Channel lists keep the input (recording) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierAssignment {
    pub highest: PeakChannel,
    pub high: Vec<String>,
    pub medium: Vec<String>,
    pub low: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierLevel {
    High,
    Medium,
    Low,
}

impl TierLevel {
    pub const ALL: [TierLevel; 3] = [TierLevel::High, TierLevel::Medium, TierLevel::Low];

    pub fn name(self) -> &'static str {
        match self {
            TierLevel::High => "high",
            TierLevel::Medium => "medium",
            TierLevel::Low => "low",
        }
    }
}

impl TierAssignment {
    pub fn members(&self, level: TierLevel) -> &[String] {
        match level {
            TierLevel::High => &self.high,
            TierLevel::Medium => &self.medium,
            TierLevel::Low => &self.low,
        }
    }
}

/// Result of a 1-D K-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centroids: Vec<f64>,
    pub sse: f64,
}

fn assign(values: &[f64], centroids: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| {
            let mut best = 0;
            for (j, c) in centroids.iter().enumerate() {
                if (v - c).abs() < (v - centroids[best]).abs() {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn sse(values: &[f64], labels: &[usize], centroids: &[f64]) -> f64 {
    values
        .iter()
        .zip(labels)
        .map(|(v, &l)| (v - centroids[l]).powi(2))
        .sum()
}

fn kmeans_pp_init(values: &[f64], k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut centroids = vec![values[rng.gen_range(0..values.len())]];
    while centroids.len() < k {
        let d2: Vec<f64> = values
            .iter()
            .map(|v| {
                centroids
                    .iter()
                    .map(|c| (v - c).powi(2))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            centroids.push(values[rng.gen_range(0..values.len())]);
            continue;
        }
        let mut target = rng.gen::<f64>() * total;
        let mut pick = values.len() - 1;
        for (i, d) in d2.iter().enumerate() {
            if target < *d {
                pick = i;
                break;
            }
            target -= d;
        }
        centroids.push(values[pick]);
    }
    centroids
}

fn lloyd(values: &[f64], mut centroids: Vec<f64>) -> Clustering {
    let k = centroids.len();
    let mut labels = assign(values, &centroids);
    for _ in 0..MAX_LLOYD_ITERS {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (v, &l) in values.iter().zip(&labels) {
            sums[l] += v;
            counts[l] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            } else {
                // Re-seed an empty cluster at the worst-fitted point.
                let worst = values
                    .iter()
                    .zip(&labels)
                    .enumerate()
                    .max_by(|(_, (a, &la)), (_, (b, &lb))| {
                        (*a - centroids[la])
                            .abs()
                            .total_cmp(&(*b - centroids[lb]).abs())
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                centroids[j] = values[worst];
            }
        }
        let next = assign(values, &centroids);
        if next == labels {
            break;
        }
        labels = next;
    }
    let sse = sse(values, &labels, &centroids);
    Clustering { labels, centroids, sse }
}

/// Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
/// SSE is returned (earliest run wins ties).
pub fn kmeans_1d(values: &[f64], k: usize, restarts: usize, seed: u64) -> Clustering {
    let mut rng = crate::util::rng(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts.max(1) {
        let init = kmeans_pp_init(values, k, &mut rng);
        let run = lloyd(values, init);
        if best.as_ref().map_or(true, |b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

fn peak(energies: &[(String, f64)]) -> PeakChannel {
    let (name, power) = energies
        .iter()
        .fold(&energies[0], |best, e| if e.1 > best.1 { e } else { best });
    PeakChannel {
        channel: name.clone(),
        power: *power,
    }
}

/// Groups channels into high / medium / low energy tiers.
///
/// Fewer than three distinct energies yields [`Error::Degenerate`] whose
/// fallback puts each distinct level in its own tier (high first, then low).
pub fn kmeans_tiers(energies: &[(String, f64)], k: usize, seed: u64) -> Result<TierAssignment> {
    if k != 3 {
        return Err(Error::Config(format!("tiering uses K=3, got {k}")));
    }
    if energies.is_empty() {
        return Err(Error::Config("no channels to tier".into()));
    }
    if energies.iter().any(|(_, e)| !e.is_finite() || *e < 0.0) {
        return Err(Error::Config("channel energies must be finite and non-negative".into()));
    }
    let values: Vec<f64> = energies.iter().map(|(_, e)| *e).collect();
    let mut distinct = values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    if distinct.len() < 3 {
        let top = *distinct.last().unwrap();
        let pick = |pred: &dyn Fn(f64) -> bool| {
            energies
                .iter()
                .filter(|(_, e)| pred(*e))
                .map(|(n, _)| n.clone())
                .collect::<Vec<_>>()
        };
        let fallback = TierAssignment {
            highest: peak(energies),
            high: pick(&|e| e == top),
            medium: Vec::new(),
            low: pick(&|e| e != top),
        };
        return Err(Error::Degenerate {
            msg: format!("{} distinct energy level(s) across {} channels", distinct.len(), energies.len()),
            fallback: Box::new(fallback),
        });
    }

    let clustering = kmeans_1d(&values, k, KMEANS_RESTARTS, seed);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| clustering.centroids[b].total_cmp(&clustering.centroids[a]));
    let mut tiers = vec![Vec::new(); k];
    for ((name, _), &label) in energies.iter().zip(&clustering.labels) {
        let rank = order.iter().position(|&c| c == label).unwrap();
        tiers[rank].push(name.clone());
    }
    let mut it = tiers.into_iter();
    Ok(TierAssignment {
        highest: peak(energies),
        high: it.next().unwrap(),
        medium: it.next().unwrap(),
        low: it.next().unwrap(),
    })
}
