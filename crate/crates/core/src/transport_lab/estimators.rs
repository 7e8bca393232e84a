use serde::Serialize;

use crate::error::{arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W2Estimate {
    pub estimate: f64,
    /// NaN when there are fewer than `FOLDS` samples.
    pub stderr: f64,
}

const FOLDS: usize = 10;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn w2_squared(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Quantile-coupling W2 between two equal-size samples. The standard error
/// comes from splitting both samples into 10 contiguous folds: the spread of
/// the per-fold squared distances gives the error of the squared estimate,
/// which is mapped to W2 by the delta method and capped at the error of
/// the square root.
pub fn empirical_w2(a: &[f64], b: &[f64]) -> Result<W2Estimate> {
    if a.len() != b.len() {
        return arg(format!("sample sizes differ: {} vs {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return arg("samples are empty");
    }
    let sq = w2_squared(a, b);
    let estimate = sq.sqrt();
    let n = a.len();
    if n < FOLDS {
        return Ok(W2Estimate { estimate, stderr: f64::NAN });
    }
    let fold = |k: usize| (k * n / FOLDS, (k + 1) * n / FOLDS);
    let vals: Vec<f64> = (0..FOLDS)
        .map(|k| {
            let (lo, hi) = fold(k);
            w2_squared(&a[lo..hi], &b[lo..hi])
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / FOLDS as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (FOLDS - 1) as f64;
    let se_sq = (var / FOLDS as f64).sqrt();
    let stderr = if estimate > 0.0 { (se_sq / (2.0 * estimate)).min(se_sq.sqrt()) } else { se_sq.sqrt() };
    Ok(W2Estimate { estimate, stderr })
}

/// sup_x |F_a(x) - F_b(x)| by a merge scan over the sorted samples.
pub fn empirical_kolmogorov(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0_f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}
