//! Variance-gamma laws and their link to two-term chi-square combinations.

use serde::Serialize;

use crate::chaos_model::{cumulants_from_coefficients, delta_via_roots, ChaosCoefficients, TargetSpec};
use crate::error::{arg, Error, Result};
use crate::quadrature::{integrate_graded_left, integrate_uniform, GradedRule};
use crate::special::{bessel_k_scaled, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VGParams {
    pub r: f64,
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl VGParams {
    pub fn new(r: f64, theta: f64, sigma: f64, mu: f64) -> Result<Self> {
        if !(r > 0.0 && sigma > 0.0) || !theta.is_finite() || !mu.is_finite() || !r.is_finite() || !sigma.is_finite() {
            return arg("VG parameters need r > 0, sigma > 0 and finite theta, mu");
        }
        Ok(VGParams { r, theta, sigma, mu })
    }

    /// E(X) = μ + rθ.
    pub fn mean(&self) -> f64 {
        self.mu + self.r * self.theta
    }

    /// Var(X) = r(σ² + 2θ²).
    pub fn variance(&self) -> f64 {
        self.r * (self.sigma * self.sigma + 2.0 * self.theta * self.theta)
    }
}

/// Law of α1(N1² - 1) - α2(N2² - 1) as VG(1, α1-α2, 2√(α1α2), α2-α1).
pub fn vg_from_chi_pair(alpha1: f64, alpha2: f64) -> Result<VGParams> {
    if !(alpha1 > 0.0 && alpha2 > 0.0) {
        return arg("both chi-square weights must be positive");
    }
    VGParams::new(1.0, alpha1 - alpha2, 2.0 * (alpha1 * alpha2).sqrt(), alpha2 - alpha1)
}

/// p(x) = e^{θ(x-μ)/σ²} (|x-μ| / (2√(θ²+σ²)))^{ν} K_ν(√(θ²+σ²)|x-μ|/σ²) / (σ√π Γ(r/2)),
/// ν = (r-1)/2.
pub fn vg_density(p: &VGParams, x: f64) -> Result<f64> {
    density_at_offset(p, x - p.mu)
}

/// The density at μ + dx, so integrators near μ do not lose dx to rounding.
fn density_at_offset(p: &VGParams, dx: f64) -> Result<f64> {
    let nu = 0.5 * (p.r - 1.0);
    let c = (p.theta * p.theta + p.sigma * p.sigma).sqrt();
    let s2 = p.sigma * p.sigma;
    let log_norm = -(p.sigma.ln() + 0.5 * std::f64::consts::PI.ln() + ln_gamma(0.5 * p.r));
    if dx == 0.0 {
        if p.r <= 1.0 {
            return Err(Error::Domain("VG density is singular at x = mu when r <= 1".into()));
        }
        // z^ν K_ν(z) → Γ(ν) 2^{ν-1} as z → 0
        let lim = ln_gamma(nu) + (nu - 1.0) * 2f64.ln() - nu * (2.0 * c * c / s2).ln();
        return Ok((log_norm + lim).exp());
    }
    let z = c * dx.abs() / s2;
    let kz = bessel_k_scaled(nu, z)?;
    let log_p = log_norm + p.theta * dx / s2 + nu * (dx.abs() / (2.0 * c)).ln() + kz.ln() - z;
    Ok(log_p.exp())
}

/// ∫ p over the real line, split at μ and graded toward μ on both sides.
pub fn vg_total_mass(p: &VGParams) -> Result<f64> {
    let c = (p.theta * p.theta + p.sigma * p.sigma).sqrt();
    let s2 = p.sigma * p.sigma;
    // exponential decay rates of the two tails
    let rate_right = (c - p.theta) / s2;
    let rate_left = (c + p.theta) / s2;
    let mut total = 0.0;
    let err = std::cell::RefCell::new(None);
    for (sign, rate) in [(1.0, rate_right), (-1.0, rate_left)] {
        let near = 1.0 / rate;
        let far = (60.0 + p.r * 10.0) / rate;
        let f = |t: f64| match density_at_offset(p, sign * t) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e.to_string());
                0.0
            }
        };
        let rule = GradedRule { order: 20, levels: 30, ratio: 0.25 };
        total += integrate_graded_left(f, 0.0, near, rule);
        total += integrate_uniform(f, near, far, 200, 20);
    }
    match err.into_inner() {
        Some(e) => Err(Error::Stability(e)),
        None => Ok(total),
    }
}

/// √(Δ(F_n) + κ_3(F_n)²/4) against a symmetric two-term target α_∞ = (c, -c).
pub fn gaunt_bound_term(coeffs: &ChaosCoefficients, target: &TargetSpec) -> Result<f64> {
    let t = target.alphas();
    if t.len() != 2 || (t[0] + t[1]).abs() > 1e-12 * t[0].abs() {
        return Err(Error::InvalidTarget("target must be a symmetric pair (c, -c)".into()));
    }
    let delta = delta_via_roots(coeffs, target)?;
    let k3 = cumulants_from_coefficients(coeffs, 3)?.get(3).unwrap();
    Ok((delta + 0.25 * k3 * k3).sqrt())
}
