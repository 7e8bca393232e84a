use serde::Serialize;

/// Normal quantile used for the Wilson intervals.
pub const WILSON_Z: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub x: f64,
    /// exp(-x/e).
    pub bound: f64,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Lower confidence limit above the bound.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    /// Thresholds x ≤ e, where the tail bound is not claimed.
    pub skipped: Vec<f64>,
}

fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Empirical P(|X| > x) against exp(-x/e) for a sample of a unit-variance
/// second-chaos law.
pub fn tail_probe(values: &[f64], xs: &[f64]) -> TailReport {
    let e = std::f64::consts::E;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &x in xs {
        if !(x > e) {
            skipped.push(x);
            continue;
        }
        let k = values.iter().filter(|v| v.abs() > x).count();
        let (lo, hi) = wilson(k, values.len().max(1), WILSON_Z);
        let bound = (-x / e).exp();
        rows.push(TailRow {
            x,
            bound,
            frequency: k as f64 / values.len().max(1) as f64,
            wilson_lo: lo,
            wilson_hi: hi,
            flagged: lo > bound,
        });
    }
    TailReport { rows, skipped }
}
