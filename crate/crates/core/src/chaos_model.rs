//! Coefficient sequences, base noise, the Q polynomial and the Δ
//! discrepancy computed from roots or from cumulants.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg::SymMatrix;

/// Largest supported number of target coefficients.
pub const MAX_TARGET_LEN: usize = 8;
/// Minimum pairwise gap between target coefficients.
pub const DISTINCT_TOL: f64 = 1e-9;
/// Unit-sphere tolerance for Σα² under the unit convention.
pub const SPHERE_TOL: f64 = 1e-10;

/// Number of cumulant orders stored by the chi-square constructors.
pub const DEFAULT_NOISE_ORDER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    CenteredChiSquare,
    Custom,
}

/// How to draw W: `scale * (Z² - 1)` with Z standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerId {
    ChiSquare { scale: f64 },
}

/// Law of the i.i.d. noise W_k, described by its cumulants κ_2, κ_3, ….
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseNoise {
    cumulants: Vec<f64>,
    kind: NoiseKind,
    sampler: Option<SamplerId>,
}

fn chi_square_cumulant(r: usize) -> f64 {
    // 2^{r-1} (r-1)!
    let mut v = 2f64.powi(r as i32 - 1);
    for k in 2..r {
        v *= k as f64;
    }
    v
}

impl BaseNoise {
    /// W = Z² - 1: κ_r = 2^{r-1}(r-1)!.
    pub fn centered_chi_square() -> Self {
        BaseNoise {
            cumulants: (2..=DEFAULT_NOISE_ORDER).map(chi_square_cumulant).collect(),
            kind: NoiseKind::CenteredChiSquare,
            sampler: Some(SamplerId::ChiSquare { scale: 1.0 }),
        }
    }

    /// W = (Z² - 1)/√2, the unit-variance version: κ_r = 2^{r/2-1}(r-1)!.
    pub fn standardized_chi_square() -> Self {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        BaseNoise {
            cumulants: (2..=DEFAULT_NOISE_ORDER)
                .map(|r| chi_square_cumulant(r) * scale.powi(r as i32))
                .collect(),
            kind: NoiseKind::Custom,
            sampler: Some(SamplerId::ChiSquare { scale }),
        }
    }

    /// Arbitrary noise given κ_2..κ_R; no sampler attached.
    pub fn custom(cumulants: Vec<f64>) -> Result<Self> {
        let noise = BaseNoise { cumulants, kind: NoiseKind::Custom, sampler: None };
        noise.validate()?;
        Ok(noise)
    }

    fn validate(&self) -> Result<()> {
        match self.cumulants.first() {
            Some(&k2) if k2 > 0.0 && k2.is_finite() => {}
            _ => return arg("noise needs kappa_2 > 0"),
        }
        if self.cumulants.iter().any(|v| !v.is_finite()) {
            return arg("noise cumulants must be finite");
        }
        Ok(())
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn sampler(&self) -> Option<SamplerId> {
        self.sampler
    }

    /// Stored cumulants κ_2..κ_R.
    pub fn cumulants(&self) -> &[f64] {
        &self.cumulants
    }

    /// Highest order available without extrapolation.
    pub fn max_order(&self) -> usize {
        self.cumulants.len() + 1
    }

    /// κ_r(W). Chi-square-backed noises extend past the stored list via the
    /// closed form; custom noises return `None` beyond their data.
    pub fn cumulant(&self, r: usize) -> Option<f64> {
        if r < 2 {
            return None;
        }
        if let Some(v) = self.cumulants.get(r - 2) {
            return Some(*v);
        }
        self.sampler.map(|SamplerId::ChiSquare { scale }| chi_square_cumulant(r) * scale.powi(r as i32))
    }

    pub fn variance(&self) -> f64 {
        self.cumulants[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceConvention {
    /// No constraint on Σα².
    Raw,
    /// Σα² = 1 within 1e-10.
    Unit,
}

fn check_sphere(alphas: &[f64], convention: VarianceConvention) -> Result<()> {
    if convention == VarianceConvention::Unit {
        let s: f64 = alphas.iter().map(|a| a * a).sum();
        if (s - 1.0).abs() > SPHERE_TOL {
            return arg(format!("unit convention requires sum of squares 1, got {s}"));
        }
    }
    Ok(())
}

/// F = Σ α_k W_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosCoefficients {
    alphas: Vec<f64>,
    noise: BaseNoise,
    convention: VarianceConvention,
}

impl ChaosCoefficients {
    pub fn new(alphas: Vec<f64>, noise: BaseNoise, convention: VarianceConvention) -> Result<Self> {
        if alphas.is_empty() {
            return arg("coefficient list is empty");
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return arg("coefficients must be finite");
        }
        check_sphere(&alphas, convention)?;
        Ok(ChaosCoefficients { alphas, noise, convention })
    }

    /// Raw coefficients against W = Z² - 1.
    pub fn chi_square(alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas, BaseNoise::centered_chi_square(), VarianceConvention::Raw)
    }

    /// Unit-sphere coefficients against W = (Z² - 1)/√2 (variance one).
    pub fn chi_square_unit_variance(alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas, BaseNoise::standardized_chi_square(), VarianceConvention::Unit)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn noise(&self) -> &BaseNoise {
        &self.noise
    }

    pub fn convention(&self) -> VarianceConvention {
        self.convention
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.alphas.iter().map(|a| a * a).sum()
    }

    /// Same law viewed as a target (checks distinctness and nonzero entries).
    pub fn to_target(&self) -> Result<TargetSpec> {
        TargetSpec::new(self.alphas.clone(), self.noise.clone(), self.convention)
    }
}

/// Limit law F_∞ = Σ_{i≤q} α_∞,i W_i with distinct nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    alphas: Vec<f64>,
    noise: BaseNoise,
    convention: VarianceConvention,
}

impl TargetSpec {
    pub fn new(alphas: Vec<f64>, noise: BaseNoise, convention: VarianceConvention) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidTarget("target is empty".into()));
        }
        if alphas.len() > MAX_TARGET_LEN {
            return Err(Error::InvalidTarget(format!(
                "q = {} exceeds the supported maximum {MAX_TARGET_LEN}",
                alphas.len()
            )));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a == 0.0) {
            return Err(Error::InvalidTarget("entries must be finite and nonzero".into()));
        }
        for i in 0..alphas.len() {
            for j in 0..i {
                if (alphas[i] - alphas[j]).abs() <= DISTINCT_TOL {
                    return Err(Error::InvalidTarget(format!(
                        "entries {j} and {i} are not distinct"
                    )));
                }
            }
        }
        check_sphere(&alphas, convention).map_err(|e| Error::InvalidTarget(e.to_string()))?;
        let q = alphas.len();
        for r in 2..=2 * q + 2 {
            match noise.cumulant(r) {
                Some(k) if k != 0.0 => {}
                _ => {
                    return Err(Error::InvalidTarget(format!(
                        "noise cumulant of order {r} is missing or zero"
                    )))
                }
            }
        }
        Ok(TargetSpec { alphas, noise, convention })
    }

    pub fn chi_square(alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas, BaseNoise::centered_chi_square(), VarianceConvention::Raw)
    }

    pub fn chi_square_unit(alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas, BaseNoise::centered_chi_square(), VarianceConvention::Unit)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn q(&self) -> usize {
        self.alphas.len()
    }

    pub fn noise(&self) -> &BaseNoise {
        &self.noise
    }

    pub fn convention(&self) -> VarianceConvention {
        self.convention
    }

    pub fn as_coefficients(&self) -> ChaosCoefficients {
        ChaosCoefficients {
            alphas: self.alphas.clone(),
            noise: self.noise.clone(),
            convention: self.convention,
        }
    }
}

/// Q(x) = x² ∏(x - α_∞,i)², stored densely by power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QPolynomial {
    /// thetas[r] is the coefficient of x^r, r = 0..=2q+2 (Θ_0 = Θ_1 = 0).
    thetas: Vec<f64>,
    /// 0 followed by the target coefficients.
    roots: Vec<f64>,
}

impl QPolynomial {
    pub fn degree(&self) -> usize {
        self.thetas.len() - 1
    }

    /// Θ_r for r = 0..=2q+2.
    pub fn coefficients(&self) -> &[f64] {
        &self.thetas
    }

    /// Θ_2..Θ_{2q+2}.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas[2..]
    }

    pub fn theta(&self, r: usize) -> f64 {
        self.thetas.get(r).copied().unwrap_or(0.0)
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Horner evaluation from the expanded coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        self.thetas.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Evaluation as the squared root product.
    pub fn eval_from_roots(&self, x: f64) -> f64 {
        self.roots.iter().map(|r| (x - r) * (x - r)).product()
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Expands P(x) = x ∏(x - α_∞,i) by convolving linear factors, then squares.
pub fn theta_coefficients(target: &TargetSpec) -> QPolynomial {
    let mut p = vec![0.0, 1.0];
    for a in target.alphas() {
        p = convolve(&p, &[-a, 1.0]);
    }
    let thetas = convolve(&p, &p);
    let mut roots = vec![0.0];
    roots.extend_from_slice(target.alphas());
    QPolynomial { thetas, roots }
}

/// κ_2(F)..κ_R(F).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantVector {
    kappas: Vec<f64>,
}

impl CumulantVector {
    pub fn new(kappas: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() {
            return arg("cumulant vector is empty");
        }
        Ok(CumulantVector { kappas })
    }

    pub fn max_order(&self) -> usize {
        self.kappas.len() + 1
    }

    /// κ_r, r ≥ 2.
    pub fn get(&self, r: usize) -> Option<f64> {
        r.checked_sub(2).and_then(|i| self.kappas.get(i).copied())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappas
    }
}

/// κ_r(F) = κ_r(W) Σ α^r for r = 2..=order.
pub fn cumulants_from_coefficients(coeffs: &ChaosCoefficients, order: usize) -> Result<CumulantVector> {
    if order < 2 {
        return arg(format!("cumulant order must be at least 2, got {order}"));
    }
    let mut kappas = Vec::with_capacity(order - 1);
    for r in 2..=order {
        let kw = coeffs
            .noise()
            .cumulant(r)
            .ok_or_else(|| Error::Argument(format!("noise has no cumulant of order {r}")))?;
        let ps: f64 = coeffs.alphas().iter().map(|a| a.powi(r as i32)).sum();
        kappas.push(kw * ps);
    }
    Ok(CumulantVector { kappas })
}

fn check_same_noise(a: &BaseNoise, b: &BaseNoise) -> Result<()> {
    if a != b {
        return arg("coefficients and target use different noise models");
    }
    Ok(())
}

/// Δ = Σ_k Q(α_k).
pub fn delta_via_roots(coeffs: &ChaosCoefficients, target: &TargetSpec) -> Result<f64> {
    check_same_noise(coeffs.noise(), target.noise())?;
    Ok(delta_from_roots_unchecked(coeffs.alphas(), target.alphas()))
}

pub(crate) fn delta_from_roots_unchecked(alphas: &[f64], target: &[f64]) -> f64 {
    alphas
        .iter()
        .map(|&a| {
            let p: f64 = target.iter().map(|t| a - t).product::<f64>() * a;
            p * p
        })
        .sum()
}

/// Δ = Σ_{r=2}^{2q+2} Θ_r κ_r(F) / κ_r(W).
pub fn delta_via_cumulants(kappas: &CumulantVector, noise: &BaseNoise, theta: &QPolynomial) -> Result<f64> {
    let deg = theta.degree();
    let mut s = 0.0;
    for r in 2..=deg {
        let k = kappas
            .get(r)
            .ok_or_else(|| Error::Argument(format!("missing cumulant of order {r}")))?;
        let kw = noise
            .cumulant(r)
            .ok_or_else(|| Error::Argument(format!("noise has no cumulant of order {r}")))?;
        s += theta.theta(r) * k / kw;
    }
    Ok(s)
}

/// Σ_{r=2}^{up_to} |κ_r(F_n) - κ_r(F_∞)|.
pub fn cumulant_gap_sum(coeffs: &ChaosCoefficients, target: &TargetSpec, up_to: usize) -> Result<f64> {
    check_same_noise(coeffs.noise(), target.noise())?;
    if up_to < 2 {
        return Ok(0.0);
    }
    let kn = cumulants_from_coefficients(coeffs, up_to)?;
    let ki = cumulants_from_coefficients(&target.as_coefficients(), up_to)?;
    Ok(kn.as_slice().iter().zip(ki.as_slice()).map(|(a, b)| (a - b).abs()).sum())
}

/// Eigenvalues of a symmetric matrix as raw chi-square coefficients, sorted by
/// decreasing absolute value.
pub fn quadratic_form_coefficients(matrix: &SymMatrix) -> Result<ChaosCoefficients> {
    let mut ev = matrix.eigenvalues()?;
    ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    ChaosCoefficients::chi_square(ev)
}

/// Tr(A^r), r = 2..=order, from the eigenvalues.
pub fn trace_powers(matrix: &SymMatrix, order: usize) -> Result<Vec<f64>> {
    if order < 2 {
        return arg(format!("trace order must be at least 2, got {order}"));
    }
    let ev = matrix.eigenvalues()?;
    Ok(power_sums(&ev, order))
}

/// Σ λ^r, r = 2..=order.
pub fn power_sums(values: &[f64], order: usize) -> Vec<f64> {
    (2..=order).map(|r| values.iter().map(|v| v.powi(r as i32)).sum()).collect()
}

/// Tr(A^r), r = 2..=order, by repeated multiplication (independent route).
pub fn trace_powers_by_multiplication(matrix: &SymMatrix, order: usize) -> Result<Vec<f64>> {
    if order < 2 {
        return arg(format!("trace order must be at least 2, got {order}"));
    }
    let n = matrix.dim();
    let mut out = Vec::new();
    let mut power = SymMatrix::from_row_major(n, matrix.mul(matrix))?;
    out.push((0..n).map(|i| power.get(i, i)).sum());
    for _ in 3..=order {
        // powers of a symmetric matrix stay symmetric up to round-off
        let next = power.mul(matrix);
        let mut sym = next.clone();
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = 0.5 * (next[i * n + j] + next[j * n + i]);
            }
        }
        power = SymMatrix::from_row_major(n, sym)?;
        out.push((0..n).map(|i| power.get(i, i)).sum());
    }
    Ok(out)
}
