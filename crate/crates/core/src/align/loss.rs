//! Pairwise logits and the sigmoid alignment loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-6;

/// `log σ(x)` without overflow for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// How the summed pair losses are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossNormalization {
    /// `1/B²`: mean over all pairs.
    #[default]
    PerPair,
    /// `1/B`: sum over pairs divided by the batch size.
    PerRow,
}

impl LossNormalization {
    pub fn factor(self, b: usize) -> f64 {
        match self {
            LossNormalization::PerPair => 1.0 / (b * b) as f64,
            LossNormalization::PerRow => 1.0 / b as f64,
        }
    }
}

/// Dense row-major B×B matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Square {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Square {
        let mut t = Square::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn check_normalized(rows: &[Vec<f64>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        let norm = dot(r, r).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Norm(format!("row {i} has norm {norm}")));
        }
    }
    Ok(())
}

/// Plain cosine/dot matrix `C[i][j] = a_i · b_j` for unit rows.
pub fn dot_matrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Square> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} vs {} rows", a.len(), b.len())));
    }
    check_normalized(a)?;
    check_normalized(b)?;
    let n = a.len();
    let mut s = Square::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, dot(&a[i], &b[j]));
        }
    }
    Ok(s)
}

/// `S[i][j] = τ · ẑ_i^eeg · ẑ_j^vis + b`.
pub fn pairwise_logits(z_eeg: &[Vec<f64>], z_vis: &[Vec<f64>], tau: f64, bias: f64) -> Result<Square> {
    let mut s = dot_matrix(z_eeg, z_vis)?;
    for v in &mut s.data {
        *v = tau * *v + bias;
    }
    Ok(s)
}

/// Independent binary cross-entropy over all pairs, labels +1 on the
/// diagonal and −1 elsewhere. Returns the loss and dL/dS.
pub fn sigmoid_align_loss(s: &Square, norm: LossNormalization) -> (f64, Square) {
    let n = s.n;
    let f = norm.factor(n);
    let mut grad = Square::zeros(n);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let y = if i == j { 1.0 } else { -1.0 };
            let x = s.get(i, j);
            total += log_sigmoid(y * x);
            grad.set(i, j, -f * y * sigmoid(-y * x));
        }
    }
    (-f * total, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_zero_logit_is_ln2() {
        let (loss, g) = sigmoid_align_loss(&Square::from_rows(&[vec![0.0]]), LossNormalization::PerPair);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((g.get(0, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_scalar_recomputation() {
        let s = Square::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let (loss, _) = sigmoid_align_loss(&s, LossNormalization::PerPair);
        let ls = |x: f64| (1.0 / (1.0 + (-x).exp())).ln();
        let expected = -0.25 * (ls(2.0) + ls(1.0) + ls(1.0) + ls(2.0));
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 0.220_095).abs() < 1e-6);
    }

    #[test]
    fn loss_decreases_toward_zero_with_diagonal_dominance() {
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let m = k as f64;
            let s = Square::from_rows(&[vec![m, -m], vec![-m, m]]);
            let (loss, _) = sigmoid_align_loss(&s, LossNormalization::PerPair);
            assert!(loss < prev);
            prev = loss;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn stable_at_extreme_logits() {
        assert_eq!(log_sigmoid(1000.0), 0.0);
        assert!((log_sigmoid(-1000.0) + 1000.0).abs() < 1e-9);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(1000.0) == 1.0);
    }

    #[test]
    fn unnormalized_rows_rejected() {
        let a = vec![vec![1.0, 1.0]];
        assert!(matches!(pairwise_logits(&a, &a, 1.0, 0.0), Err(Error::Norm(_))));
    }

    #[test]
    fn orthonormal_identity_pattern_and_zero_tau() {
        let e = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let s = pairwise_logits(&e, &e, 1.0, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let s = pairwise_logits(&e, &e, 0.0, 5.0).unwrap();
        assert!(s.data.iter().all(|&v| v == 5.0));
    }

    #[test]
    fn per_row_normalization() {
        let s = Square::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        let (a, _) = sigmoid_align_loss(&s, LossNormalization::PerPair);
        let (b, _) = sigmoid_align_loss(&s, LossNormalization::PerRow);
        assert!((b - 2.0 * a).abs() < 1e-12);
    }
}
