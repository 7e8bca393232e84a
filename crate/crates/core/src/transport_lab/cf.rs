use num_complex::Complex64;
use serde::Serialize;

use crate::chaos_model::{ChaosCoefficients, CumulantVector, SamplerId, TargetSpec};
use crate::error::{arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfPoint {
    pub t: Complex64,
    pub phi: Complex64,
    pub phi_prime: Complex64,
}

/// Raw chi-square weights c_k = α_k · scale, so that F = Σ c_k (Z_k² - 1).
fn raw_weights(coeffs: &ChaosCoefficients) -> Result<Vec<f64>> {
    match coeffs.noise().sampler() {
        Some(SamplerId::ChiSquare { scale }) => Ok(coeffs.alphas().iter().map(|a| a * scale).collect()),
        None => Err(Error::UnsupportedSampler(
            "closed-form characteristic function needs chi-square noise".into(),
        )),
    }
}

fn strip_halfwidth(c: &[f64]) -> f64 {
    let m = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        f64::INFINITY
    } else {
        0.5 / m
    }
}

fn phi_of(c: &[f64], t: Complex64) -> Complex64 {
    let i = Complex64::i();
    c.iter()
        .map(|&a| (-i * t * a).exp() / (1.0 - 2.0 * i * t * a).sqrt())
        .product()
}

/// φ'/φ = Σ_k [-i c_k + i c_k / (1 - 2 i t c_k)].
fn log_derivative(c: &[f64], t: Complex64) -> Complex64 {
    let i = Complex64::i();
    c.iter().map(|&a| -i * a + i * a / (1.0 - 2.0 * i * t * a)).sum()
}

/// φ(t) = ∏ e^{-itc}/√(1 - 2itc) on the strip |Im t| < 1/(2 max|c|), where
/// every factor 1 - 2itc has positive real part and the principal root is
/// analytic.
pub fn char_fn(coeffs: &ChaosCoefficients, t: Complex64) -> Result<CfPoint> {
    let c = raw_weights(coeffs)?;
    if !(t.im.abs() < strip_halfwidth(&c)) {
        return Err(Error::Domain(format!("t = {t} lies outside the analyticity strip")));
    }
    let phi = phi_of(&c, t);
    Ok(CfPoint { t, phi, phi_prime: phi * log_derivative(&c, t) })
}

/// Real evaluation grid: logarithmic points plus anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub anchors: Vec<f64>,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid { lo: 1e-2, hi: 1e3, points: 200, anchors: Vec::new() }
    }
}

impl TGrid {
    pub fn anchors_only(anchors: Vec<f64>) -> Self {
        TGrid { lo: 0.0, hi: 0.0, points: 0, anchors }
    }

    pub fn with_anchors(mut self, anchors: impl IntoIterator<Item = f64>) -> Self {
        self.anchors.extend(anchors);
        self
    }

    /// Parses `lo:hi:points[,anchor…]`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split(',');
        let head = parts.next().unwrap_or("");
        let f: Vec<&str> = head.split(':').collect();
        if f.len() != 3 {
            return Err(Error::Parse(format!("t-grid must look like lo:hi:points[,anchor...], got {s}")));
        }
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v} in t-grid")));
        let lo = num(f[0])?;
        let hi = num(f[1])?;
        let points = f[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad point count {} in t-grid", f[2])))?;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::Parse("t-grid needs 0 < lo <= hi".into()));
        }
        let anchors = parts.map(num).collect::<Result<Vec<_>>>()?;
        Ok(TGrid { lo, hi, points, anchors })
    }

    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points + self.anchors.len());
        if self.points == 1 {
            out.push(self.lo);
        } else if self.points > 1 {
            let (a, b) = (self.lo.ln(), self.hi.ln());
            for k in 0..self.points {
                out.push((a + (b - a) * k as f64 / (self.points - 1) as f64).exp());
            }
        }
        out.extend(&self.anchors);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfLowerBound {
    pub value: f64,
    /// Grid point attaining the maximum.
    pub t: f64,
}

/// max over the grid of |φ_n(t) - φ_∞(t)| / |t|, a lower bound on W2.
pub fn cf_lower_bound(coeffs: &ChaosCoefficients, target: &TargetSpec, grid: &[f64]) -> Result<CfLowerBound> {
    if grid.is_empty() {
        return arg("t grid is empty");
    }
    if grid.iter().any(|t| *t == 0.0 || !t.is_finite()) {
        return arg("t grid must be finite and exclude 0");
    }
    if coeffs.noise() != target.noise() {
        return arg("coefficients and target use different noise models");
    }
    let cn = raw_weights(coeffs)?;
    let ci = raw_weights(&target.as_coefficients())?;
    let mut best = CfLowerBound { value: 0.0, t: grid[0] };
    for &t in grid {
        let z = Complex64::new(t, 0.0);
        let v = (phi_of(&cn, z) - phi_of(&ci, z)).norm() / t.abs();
        if v > best.value {
            best = CfLowerBound { value: v, t };
        }
    }
    Ok(best)
}

/// Trapezoid rule for ∫ |φ'_∞/φ_∞ - φ'_n/φ_n|² dθ/2π on z = ρ e^{iθ}.
pub fn logderiv_gap_circle(
    coeffs: &ChaosCoefficients,
    target: &TargetSpec,
    rho: f64,
    n_theta: usize,
) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::Domain(format!("rho must lie in (0, 1/2), got {rho}")));
    }
    if n_theta < 64 {
        return arg(format!("n_theta must be at least 64, got {n_theta}"));
    }
    if coeffs.noise() != target.noise() {
        return arg("coefficients and target use different noise models");
    }
    let cn = raw_weights(coeffs)?;
    let ci = raw_weights(&target.as_coefficients())?;
    if !(rho < strip_halfwidth(&cn) && rho < strip_halfwidth(&ci)) {
        return Err(Error::Domain(format!("circle of radius {rho} leaves the analyticity strip")));
    }
    let mut s = 0.0;
    for k in 0..n_theta {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
        let z = Complex64::from_polar(rho, th);
        s += (log_derivative(&ci, z) - log_derivative(&cn, z)).norm_sqr();
    }
    Ok(s / n_theta as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesGap {
    pub value: f64,
    /// Bound on the omitted terms r > R, assuming |κ_r| ≤ 2^{r-1}(r-1)! for
    /// both laws: Σ_{r>R} (2·2^{r-1})² ρ^{2(r-1)} = 4 (2ρ)^{2R} / (1 - 4ρ²).
    pub tail_bound: f64,
}

/// Σ_{r=2}^{R} |κ_r(F_n) - κ_r(F_∞)|² ρ^{2(r-1)} / ((r-1)!)².
pub fn cumulant_series_gap(
    kappas_n: &CumulantVector,
    kappas_inf: &CumulantVector,
    rho: f64,
    order: usize,
) -> Result<SeriesGap> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::Domain(format!("rho must lie in (0, 1/2), got {rho}")));
    }
    let mut value = 0.0;
    let mut fact = 1.0; // (r-1)!
    for r in 2..=order {
        fact *= (r - 1) as f64;
        let (a, b) = match (kappas_n.get(r), kappas_inf.get(r)) {
            (Some(a), Some(b)) => (a, b),
            _ => return arg(format!("cumulant of order {r} missing")),
        };
        let term = (a - b) / fact * rho.powi(r as i32 - 1);
        value += term * term;
    }
    let tail_bound = 4.0 * (2.0 * rho).powi(2 * order as i32) / (1.0 - 4.0 * rho * rho);
    Ok(SeriesGap { value, tail_bound })
}
