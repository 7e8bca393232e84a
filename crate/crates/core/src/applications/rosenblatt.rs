//! Generalized Rosenblatt variables Z_{γ1,γ2}: normalizing constant A,
//! the cyclic integrals C_m, cumulants, and the two-atom limit Y_ρ.
//!
//! The two-sided kernel makes junction j (between s_{j-1} and s_j, cyclic
//! with s_0 = s_m) contribute, for a = γ_{σ'_{j-1}} and b = γ_{σ_j} where σ'
//! swaps the labels 1 and 2, and e = a + b + 1,
//!
//! (s_j - s_{j-1})_+^e B(a+1, -e) + (s_{j-1} - s_j)_+^e B(b+1, -e).
//!
//! The exponents sum to E = m(γ1 + γ2 + 1) for every sign pattern σ.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chaos_model::TargetSpec;
use crate::error::{arg, Error, Result};
use crate::quadrature::GradedRule;
use crate::special::beta;
use crate::transport_lab::chunk_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RosenblattParams {
    gamma1: f64,
    gamma2: f64,
    rho: f64,
}

impl RosenblattParams {
    /// γ2 = (γ1 + 1/2)/ρ - 1/2.
    pub fn new(gamma1: f64, rho: f64) -> Result<Self> {
        if !(gamma1 > -1.0 && gamma1 < -0.5) {
            return Err(Error::Domain(format!("gamma1 must lie in (-1, -1/2), got {gamma1}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
        }
        let gamma2 = (gamma1 + 0.5) / rho - 0.5;
        if !(gamma2 > -1.0) {
            return Err(Error::Domain(format!("derived gamma2 = {gamma2} is not above -1")));
        }
        if !(gamma1 + gamma2 > -1.5) {
            return Err(Error::Domain("gamma1 + gamma2 must exceed -3/2".into()));
        }
        Ok(RosenblattParams { gamma1, gamma2, rho })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn gamma(&self, label: usize) -> f64 {
        if label == 0 {
            self.gamma1
        } else {
            self.gamma2
        }
    }
}

/// A(γ1, γ2) = √((s+2)(2s+3)) / √(B(γ1+1,-s-1)B(γ2+1,-s-1) + B(γ1+1,-2γ1-1)B(γ2+1,-2γ2-1)),
/// s = γ1 + γ2.
pub fn rosenblatt_a(p: &RosenblattParams) -> Result<f64> {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let s = g1 + g2;
    let den = beta(g1 + 1.0, -s - 1.0)? * beta(g2 + 1.0, -s - 1.0)?
        + beta(g1 + 1.0, -2.0 * g1 - 1.0)? * beta(g2 + 1.0, -2.0 * g2 - 1.0)?;
    if !(den > 0.0) {
        return Err(Error::Domain("normalization denominator is not positive".into()));
    }
    Ok(((s + 2.0) * (2.0 * s + 3.0)).sqrt() / den.sqrt())
}

/// Closed form of C_2 (a one-dimensional integral of a power of |s_1 - s_2|).
pub fn rosenblatt_c2_closed_form(p: &RosenblattParams) -> Result<f64> {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let s = g1 + g2;
    let num = beta(g1 + 1.0, -s - 1.0)? * beta(g2 + 1.0, -s - 1.0)?
        + beta(g1 + 1.0, -2.0 * g1 - 1.0)? * beta(g2 + 1.0, -2.0 * g2 - 1.0)?;
    Ok(2.0 * num / ((2.0 * s + 3.0) * (s + 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CmScheme {
    /// Uniform Monte Carlo on (0,1)^m; any m in 2..=6.
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact decomposition over orderings plus graded Gauss–Legendre on the
    /// remaining simplex; m ≤ 4.
    Tensor(GradedRule),
}

impl Default for CmScheme {
    fn default() -> Self {
        CmScheme::Tensor(GradedRule::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Junction {
    exponent: f64,
    /// coefficient when s_j > s_{j-1}
    up: f64,
    /// coefficient when s_{j-1} > s_j
    down: f64,
}

fn junctions(p: &RosenblattParams, sigma: &[usize]) -> Result<Vec<Junction>> {
    let m = sigma.len();
    (0..m)
        .map(|j| {
            let prev = sigma[(j + m - 1) % m];
            let a = p.gamma(1 - prev);
            let b = p.gamma(sigma[j]);
            let e = a + b + 1.0;
            Ok(Junction { exponent: e, up: beta(a + 1.0, -e)?, down: beta(b + 1.0, -e)? })
        })
        .collect()
}

fn sign_patterns(m: usize) -> Vec<Vec<usize>> {
    (0..1usize << m).map(|bits| (0..m).map(|j| (bits >> j) & 1).collect()).collect()
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// C_m with an error estimate.
pub fn rosenblatt_cm(p: &RosenblattParams, m: usize, scheme: CmScheme) -> Result<Estimate> {
    if !(2..=6).contains(&m) {
        return arg(format!("m must lie in 2..=6, got {m}"));
    }
    match scheme {
        CmScheme::MonteCarlo { samples, seed } => cm_monte_carlo(p, m, samples, seed),
        CmScheme::Tensor(rule) => {
            if m > 4 {
                return arg("tensor quadrature is limited to m <= 4; use Monte Carlo");
            }
            let fine = cm_tensor(p, m, rule)?;
            let coarse = cm_tensor(p, m, rule.halved())?;
            let floor = 64.0 * f64::EPSILON * fine.1;
            Ok(Estimate { value: fine.0, error: (fine.0 - coarse.0).abs().max(floor) })
        }
    }
}

fn cm_monte_carlo(p: &RosenblattParams, m: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if samples < 2 {
        return arg("Monte Carlo needs at least two samples");
    }
    let patterns: Vec<Vec<Junction>> =
        sign_patterns(m).iter().map(|s| junctions(p, s)).collect::<Result<_>>()?;
    let chunk = crate::transport_lab::CHUNK_SIZE;
    let chunks = samples.div_ceil(chunk);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = chunk.min(samples - c * chunk);
            let mut s = vec![0.0; m];
            let (mut acc, mut acc2) = (0.0, 0.0);
            for _ in 0..len {
                for v in s.iter_mut() {
                    *v = rng.random::<f64>();
                }
                let mut f = 0.0;
                for js in &patterns {
                    let mut prod = 1.0;
                    for (j, jn) in js.iter().enumerate() {
                        let d = s[j] - s[(j + m - 1) % m];
                        prod *= if d > 0.0 { jn.up * d.powf(jn.exponent) } else { jn.down * (-d).powf(jn.exponent) };
                    }
                    f += prod;
                }
                acc += f;
                acc2 += f * f;
            }
            (acc, acc2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(Estimate { value: mean, error: (var / n).sqrt() })
}

/// One ordering: coefficient per sign pattern and, for each pattern, the
/// exponent attached to each interval of consecutive gaps.
struct OrderingTerm {
    /// intervals (first gap, last gap) in the sorted order, deduplicated
    intervals: Vec<(usize, usize)>,
    /// (coefficient, exponent per interval) for each sign pattern
    patterns: Vec<(f64, Vec<f64>)>,
}

fn ordering_terms(p: &RosenblattParams, m: usize) -> Result<Vec<OrderingTerm>> {
    let pats: Vec<Vec<Junction>> = sign_patterns(m).iter().map(|s| junctions(p, s)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rank in permutations(m) {
        let mut intervals: Vec<(usize, usize)> = Vec::new();
        let mut idx = Vec::with_capacity(m);
        for j in 0..m {
            let (r1, r0) = (rank[j], rank[(j + m - 1) % m]);
            let iv = (r1.min(r0), r1.max(r0) - 1);
            let k = match intervals.iter().position(|x| *x == iv) {
                Some(k) => k,
                None => {
                    intervals.push(iv);
                    intervals.len() - 1
                }
            };
            idx.push((k, r1 > r0));
        }
        let patterns = pats
            .iter()
            .map(|js| {
                let mut coef = 1.0;
                let mut exps = vec![0.0; intervals.len()];
                for (jn, &(k, up)) in js.iter().zip(&idx) {
                    coef *= if up { jn.up } else { jn.down };
                    exps[k] += jn.exponent;
                }
                (coef, exps)
            })
            .collect();
        out.push(OrderingTerm { intervals, patterns });
    }
    Ok(out)
}

/// Returns (value, Σ|contributions|) for the round-off floor.
///
/// On an ordering of the points the integrand depends only on the gaps
/// u_k between consecutive sorted points. Writing the gaps as R·v with v on
/// the standard simplex, the span R integrates in closed form:
/// ∫_0^1 (1 - R) R^{m-2+E} dR = 1/((m-1+E)(m+E)). The simplex integral over v
/// is mapped to the unit cube by stick breaking and integrated with the
/// graded rule, which resolves the algebraic singularities on the faces.
fn cm_tensor(p: &RosenblattParams, m: usize, rule: GradedRule) -> Result<(f64, f64)> {
    let e_total = m as f64 * (p.gamma1 + p.gamma2 + 1.0);
    let radial = 1.0 / ((m as f64 - 1.0 + e_total) * (m as f64 + e_total));
    let terms = ordering_terms(p, m)?;
    let d = m - 2;
    let unit = rule.unit_rule();
    let npts = unit.x.len();
    // grid points of the d-cube as index tuples
    let total = npts.pow(d as u32);
    let mut value = 0.0;
    let mut abs_sum = 0.0;
    for t in &terms {
        let (v, a) = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut x = Vec::with_capacity(d);
                let mut y = Vec::with_capacity(d);
                let mut w = 1.0;
                let mut rem = flat;
                for _ in 0..d {
                    let i = rem % npts;
                    rem /= npts;
                    x.push(unit.x[i]);
                    y.push(unit.one_minus_x[i]);
                    w *= unit.w[i];
                }
                // Jacobian of stick breaking: ∏ (1 - x_i)^{d-1-i}
                for (i, yi) in y.iter().enumerate() {
                    w *= yi.powi((d - 1 - i) as i32);
                }
                let logs: Vec<f64> = t.intervals.iter().map(|&(a, b)| interval_sum(&x, &y, a, b).ln()).collect();
                let mut f = 0.0;
                let mut fa = 0.0;
                for (coef, exps) in &t.patterns {
                    let s: f64 = exps.iter().zip(&logs).map(|(e, l)| if *e == 0.0 { 0.0 } else { e * l }).sum();
                    let val = coef * s.exp();
                    f += val;
                    fa += val.abs();
                }
                (w * f, w * fa)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        value += v;
        abs_sum += a;
    }
    Ok((radial * value, radial.abs() * abs_sum))
}

/// Σ_{k=a}^{b} u_k for the stick-breaking gaps u_0..u_d of the cube point x
/// (y = 1 - x): u_k = x_k ∏_{i<k} y_i for k < d and u_d = ∏_{i<d} y_i.
fn interval_sum(x: &[f64], y: &[f64], a: usize, b: usize) -> f64 {
    let d = x.len();
    let lead: f64 = y[..a.min(d)].iter().product();
    if b == d {
        return lead;
    }
    // 1 - ∏_{i=a}^{b} y_i without cancellation
    let mut t = x[b];
    for i in (a..b).rev() {
        t = x[i] + y[i] * t;
    }
    lead * t
}

/// κ_m(Z) = ½ (m-1)! A^m C_m.
pub fn rosenblatt_cumulant(p: &RosenblattParams, m: usize, scheme: CmScheme) -> Result<Estimate> {
    let a = rosenblatt_a(p)?;
    let c = rosenblatt_cm(p, m, scheme)?;
    let f = 0.5 * factorial(m - 1) * a.powi(m as i32);
    Ok(Estimate { value: f * c.value, error: f * c.error })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// (a_ρ, b_ρ) with a_ρ² + b_ρ² = 1.
pub fn y_rho_coefficients(rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let d = (2.0 / (rho + 1.0).powi(2) + 1.0 / (2.0 * rho)).sqrt();
    let (u, v) = (1.0 / (rho + 1.0), 1.0 / (2.0 * rho.sqrt()));
    Ok(((u + v) / d, (u - v) / d))
}

/// Y_ρ = (a_ρ/√2)(Z_1² - 1) + (b_ρ/√2)(Z_2² - 1), variance one.
pub fn y_rho_target(rho: f64) -> Result<TargetSpec> {
    let (a, b) = y_rho_coefficients(rho)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    TargetSpec::chi_square(vec![a * s, b * s])
}

/// κ_m(Y_ρ) = 2^{m/2-1} (a_ρ^m + b_ρ^m) (m-1)!.
pub fn y_rho_cumulant(rho: f64, m: usize) -> Result<f64> {
    let (a, b) = y_rho_coefficients(rho)?;
    Ok(2f64.powf(m as f64 / 2.0 - 1.0) * (a.powi(m as i32) + b.powi(m as i32)) * factorial(m - 1))
}
