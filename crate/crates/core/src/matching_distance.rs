//! The permutation distance d_σ and the constructive constants (δ_x, η, κ,
//! α_x, C_x, C̃_x) that turn √Δ into a certified bound on it.

use serde::Serialize;

use crate::chaos_model::{delta_from_roots_unchecked, ChaosCoefficients, TargetSpec, SPHERE_TOL};
use crate::error::{arg, Error, Result};
use crate::linalg::invert;

/// Finite list of reals on the unit sphere of ℓ² (implicit zero tail).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSphereVector {
    entries: Vec<f64>,
}

impl UnitSphereVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return arg("entries must be finite");
        }
        let s: f64 = entries.iter().map(|v| v * v).sum();
        if (s - 1.0).abs() > SPHERE_TOL {
            return arg(format!("vector is off the unit sphere (sum of squares {s})"));
        }
        Ok(UnitSphereVector { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingResult {
    pub distance: f64,
    /// (index in padded x, index in padded y); indices past the original
    /// lengths refer to padding zeros.
    pub pairing: Vec<(usize, usize)>,
}

/// d_σ on the unit sphere.
pub fn d_sigma(x: &UnitSphereVector, y: &UnitSphereVector) -> MatchingResult {
    matching(x.entries(), y.entries())
}

/// Minimal ℓ² distance over re-indexings of two finite sequences with zero
/// tails. Both are padded to len x + len y, enough zeros for any entry of
/// either list to be matched against a zero, then paired by rank.
pub fn matching(x: &[f64], y: &[f64]) -> MatchingResult {
    let len = x.len() + y.len();
    let sorted = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..len).collect();
        let val = |i: usize| v.get(i).copied().unwrap_or(0.0);
        idx.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
        idx
    };
    let ix = sorted(x);
    let iy = sorted(y);
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let mut sq = 0.0;
    let mut pairing = Vec::with_capacity(len);
    for (&a, &b) in ix.iter().zip(&iy) {
        let d = at(x, a) - at(y, b);
        sq += d * d;
        pairing.push((a, b));
    }
    MatchingResult { distance: sq.sqrt(), pairing }
}

/// min_t G(t), G(t) = ∏(t - x_i)² + Σ_i t² ∏_{j≠i}(t - x_j)².
///
/// Every summand is nonincreasing to the left of min(0, x) and nondecreasing
/// to the right of max(0, x), so a grid over [min - 1, max + 1] at step 1e-3
/// brackets the minimiser; ternary search then refines to 1e-10.
pub fn delta_x_constant(roots: &[f64]) -> f64 {
    let g = |t: f64| {
        let full: f64 = roots.iter().map(|x| (t - x) * (t - x)).product();
        let mut s = full;
        for i in 0..roots.len() {
            let p: f64 = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| (t - x) * (t - x))
                .product();
            s += t * t * p;
        }
        s
    };
    let lo = roots.iter().fold(0.0_f64, |m, v| m.min(*v)) - 1.0;
    let hi = roots.iter().fold(0.0_f64, |m, v| m.max(*v)) + 1.0;
    let step = 1e-3;
    let n = ((hi - lo) / step).ceil() as usize;
    let mut best = (lo, g(lo));
    for i in 1..=n {
        let t = lo + i as f64 * step;
        let v = g(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    while b - a > 1e-10 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) <= g(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    g(0.5 * (a + b)).min(best.1)
}

/// Tolerance for membership in the adherence set.
pub const ADHERENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Adherence {
    pub eta: f64,
    pub kappa: f64,
    /// Nonnegative count vectors n with Σ n_j x_j² = 1 (within tolerance),
    /// in lexicographic order.
    pub set: Vec<Vec<u32>>,
}

impl Adherence {
    /// E = {(1, …, 1)}.
    pub fn is_singleton(&self) -> bool {
        self.set.len() == 1 && self.set[0].iter().all(|&c| c == 1)
    }
}

fn adherence_search(x2: &[f64], cap: f64) -> Adherence {
    struct State<'a> {
        x2: &'a [f64],
        cap: f64,
        counts: Vec<u32>,
        eta: f64,
        kappa: f64,
        set: Vec<Vec<u32>>,
    }
    fn visit(st: &mut State, j: usize, partial: f64) {
        if j == st.x2.len() {
            let dev = (partial.sqrt() - 1.0).abs();
            let ones = st.counts.iter().all(|&c| c == 1);
            let member = (partial - 1.0).abs() <= ADHERENCE_TOL;
            if member {
                st.set.push(st.counts.clone());
            }
            if !ones {
                st.eta = st.eta.min(dev);
            }
            if !member {
                st.kappa = st.kappa.min(dev);
            }
            return;
        }
        let mut c = 0u32;
        loop {
            let s = partial + c as f64 * st.x2[j];
            // vectors with √s - 1 above both incumbents cannot change η or κ
            let worst = st.eta.max(st.kappa);
            let limit = if worst.is_finite() { st.cap.min((1.0 + worst).powi(2) + 1e-9) } else { st.cap };
            if s > limit {
                break;
            }
            st.counts[j] = c;
            visit(st, j + 1, s);
            c += 1;
        }
        st.counts[j] = 0;
    }
    let mut st = State {
        x2,
        cap,
        counts: vec![0; x2.len()],
        eta: f64::INFINITY,
        kappa: f64::INFINITY,
        set: Vec::new(),
    };
    visit(&mut st, 0, 0.0);
    // beyond the cap every vector has |√s - 1| ≥ √cap - 1
    let floor = cap.sqrt() - 1.0;
    Adherence { eta: st.eta.min(floor), kappa: st.kappa.min(floor), set: st.set }
}

/// η, κ and E by enumeration over nonnegative count vectors with
/// Σ n_j x_j² ≤ `search_cap`; re-run at twice the cap and abort if anything
/// changes.
pub fn eta_and_adherence(roots: &[f64], search_cap: f64) -> Result<Adherence> {
    if roots.iter().any(|x| *x == 0.0 || !x.is_finite()) {
        return arg("roots must be finite and nonzero");
    }
    if !(search_cap >= 1.0) {
        return arg(format!("search cap must be at least 1, got {search_cap}"));
    }
    let x2: Vec<f64> = roots.iter().map(|x| x * x).collect();
    let s: f64 = x2.iter().sum();
    if (s - 1.0).abs() > SPHERE_TOL {
        return arg(format!("roots must lie on the unit sphere (sum of squares {s})"));
    }
    let first = adherence_search(&x2, search_cap);
    let second = adherence_search(&x2, 2.0 * search_cap);
    if first != second {
        return Err(Error::Stability(format!(
            "eta/kappa/E changed when the search cap doubled from {search_cap}"
        )));
    }
    Ok(first)
}

/// α_x = min over nonzero k ∈ Z^s of max_j |Σ_i k_i u_i^{2+j}|, j < s.
///
/// Write v = k̃ V with k̃_i = k_i u_i² and V_{ij} = u_i^j. Then
/// k̃ = v V⁻¹ gives |k_i| u_i² ≤ ‖v‖_∞ ‖V⁻¹‖_1 (max column sum), so any k that
/// beats an incumbent value b satisfies ‖k‖_∞ ≤ b ‖V⁻¹‖_1 / min u_i². The
/// incumbent comes from the unit vectors k = e_i. The result is confirmed by
/// a second search with the box doubled.
pub fn alpha_x_constant(roots: &[f64]) -> Result<f64> {
    let mut u: Vec<f64> = Vec::new();
    for &r in roots {
        if r == 0.0 || !r.is_finite() {
            return arg("roots must be finite and nonzero");
        }
        if !u.iter().any(|v| (v - r).abs() <= 1e-12) {
            u.push(r);
        }
    }
    let s = u.len();
    let mut vander = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..s {
            vander[i * s + j] = u[i].powi(j as i32);
        }
    }
    let inv = invert(s, &vander).map_err(|_| Error::Argument("Vandermonde matrix is singular".into()))?;
    let col_norm = (0..s)
        .map(|j| (0..s).map(|i| inv[i * s + j].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let value = |k: &[i64]| {
        (0..s)
            .map(|j| {
                k.iter()
                    .zip(&u)
                    .map(|(&ki, &ui)| ki as f64 * ui.powi(2 + j as i32))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0_f64, f64::max)
    };
    let mut incumbent = f64::INFINITY;
    for i in 0..s {
        let mut k = vec![0i64; s];
        k[i] = 1;
        incumbent = incumbent.min(value(&k));
    }
    let min_u2 = u.iter().map(|v| v * v).fold(f64::INFINITY, f64::min);
    let k_max = ((incumbent * col_norm / min_u2).floor() as i64).max(1);
    if k_max > 10_000 || (2 * k_max + 1) as f64 > 1e8_f64.powf(1.0 / s as f64) * 2.0 {
        return Err(Error::Stability(format!(
            "alpha_x search box {k_max} is too large for exhaustive enumeration"
        )));
    }
    let search = |bound: i64| {
        let mut best = incumbent;
        let mut k = vec![-bound; s];
        loop {
            // sign symmetry: only vectors whose first nonzero entry is positive
            if let Some(first) = k.iter().find(|&&v| v != 0) {
                if *first > 0 {
                    best = best.min(value(&k));
                }
            }
            let mut pos = 0;
            loop {
                if pos == s {
                    return best;
                }
                if k[pos] < bound {
                    k[pos] += 1;
                    break;
                }
                k[pos] = -bound;
                pos += 1;
            }
        }
    };
    let a = search(k_max);
    let b = search(2 * k_max);
    if a != b {
        return Err(Error::Stability("alpha_x changed when the search box doubled".into()));
    }
    if !(a > 0.0) {
        return Err(Error::Stability("alpha_x search returned zero".into()));
    }
    Ok(a)
}

/// Δ_{p,x}(y) = |Σ y_i^p - Σ x_i^p|.
pub fn delta_p_gap(x: &[f64], y: &[f64], p: usize) -> Result<f64> {
    if p < 3 {
        return arg(format!("power must be at least 3, got {p}"));
    }
    let sx: f64 = x.iter().map(|v| v.powi(p as i32)).sum();
    let sy: f64 = y.iter().map(|v| v.powi(p as i32)).sum();
    Ok((sy - sx).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// E = {(1,…,1)}: bound C_x √Δ.
    Independent,
    /// Larger adherence set: bound C̃_x (√Δ + Σ Δ_{r,x}).
    Dependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConstants {
    pub delta_x: f64,
    pub eta: f64,
    pub kappa: f64,
    /// Only computed when the dependent branch needs it.
    pub alpha_x: Option<f64>,
    pub c_x: f64,
    pub c_tilde_x: Option<f64>,
    pub adherence_set: Vec<Vec<u32>>,
    pub branch: BoundBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub search_cap: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { search_cap: 4.0 }
    }
}

/// Constants for a unit-sphere root vector x.
pub fn bound_constants(roots: &[f64], opts: BoundOptions) -> Result<BoundConstants> {
    let q = roots.len() as f64;
    let delta_x = delta_x_constant(roots);
    let adh = eta_and_adherence(roots, opts.search_cap)?;
    let root_term = ((q + 1.0) / delta_x).sqrt();
    if adh.is_singleton() {
        Ok(BoundConstants {
            delta_x,
            eta: adh.eta,
            kappa: adh.kappa,
            alpha_x: None,
            c_x: (1.0 + 2.0 / adh.eta) * root_term,
            c_tilde_x: None,
            adherence_set: adh.set,
            branch: BoundBranch::Independent,
        })
    } else {
        let alpha_x = alpha_x_constant(roots)?;
        let c_x = (1.0 + 2.0 / adh.kappa) * root_term;
        Ok(BoundConstants {
            delta_x,
            eta: adh.eta,
            kappa: adh.kappa,
            alpha_x: Some(alpha_x),
            c_x,
            c_tilde_x: Some(2.0 * (q + 1.0) * c_x * (1.0 + 2.0 / alpha_x)),
            adherence_set: adh.set,
            branch: BoundBranch::Dependent,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedBound {
    /// Bound on d_σ(target, coeffs).
    pub value: f64,
    /// √κ_2(W) · value, a bound on W2 through the synchronous coupling.
    pub w2_value: f64,
    pub delta: f64,
    pub constants: BoundConstants,
}

/// Certified bound on d_σ between unit-sphere coefficients and a unit-sphere
/// target.
pub fn certified_upper_bound(target: &TargetSpec, coeffs: &ChaosCoefficients) -> Result<CertifiedBound> {
    certified_upper_bound_with(target, coeffs, BoundOptions::default())
}

pub fn certified_upper_bound_with(
    target: &TargetSpec,
    coeffs: &ChaosCoefficients,
    opts: BoundOptions,
) -> Result<CertifiedBound> {
    if target.noise() != coeffs.noise() {
        return arg("coefficients and target use different noise models");
    }
    for (name, s) in [("coefficients", coeffs.sum_of_squares()), ("target", sq(target.alphas()))] {
        if (s - 1.0).abs() > SPHERE_TOL {
            return arg(format!("{name} are not on the unit sphere (sum of squares {s})"));
        }
    }
    let x = target.alphas();
    let y = coeffs.alphas();
    let constants = bound_constants(x, opts)?;
    let delta = delta_from_roots_unchecked(y, x);
    let value = match constants.branch {
        BoundBranch::Independent => constants.c_x * delta.sqrt(),
        BoundBranch::Dependent => {
            let mut gaps = 0.0;
            for r in 3..=x.len() + 1 {
                gaps += delta_p_gap(x, y, r)?;
            }
            constants.c_tilde_x.unwrap() * (delta.sqrt() + gaps)
        }
    };
    Ok(CertifiedBound {
        value,
        w2_value: target.noise().variance().sqrt() * value,
        delta,
        constants,
    })
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// Certified bound for raw (off-sphere) inputs. With ĉ, x̂ the normalized
/// vectors and s_c, s_x their norms,
/// d_σ(c, x) ≤ |s_c - s_x| + s_x d_σ(ĉ, x̂) ≤ |s_c - s_x| + s_x · bound(ĉ, x̂).
pub fn certified_upper_bound_scaled(
    target: &TargetSpec,
    coeffs: &ChaosCoefficients,
    opts: BoundOptions,
) -> Result<CertifiedBound> {
    use crate::chaos_model::VarianceConvention::Unit;
    if target.noise() != coeffs.noise() {
        return arg("coefficients and target use different noise models");
    }
    let sx = sq(target.alphas()).sqrt();
    let sc = coeffs.sum_of_squares().sqrt();
    if sc == 0.0 {
        return arg("coefficients are all zero");
    }
    let xt = TargetSpec::new(
        target.alphas().iter().map(|v| v / sx).collect(),
        target.noise().clone(),
        Unit,
    )?;
    let ct = ChaosCoefficients::new(
        coeffs.alphas().iter().map(|v| v / sc).collect(),
        coeffs.noise().clone(),
        Unit,
    )?;
    let inner = certified_upper_bound_with(&xt, &ct, opts)?;
    let value = (sc - sx).abs() + sx * inner.value;
    Ok(CertifiedBound {
        value,
        w2_value: target.noise().variance().sqrt() * value,
        delta: delta_from_roots_unchecked(coeffs.alphas(), target.alphas()),
        constants: inner.constants,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "relation")]
pub enum IndependenceVerdict {
    /// No relation with ‖m‖_∞ ≤ M.
    IndependentUpTo(i64),
    RelationFound(Vec<i64>),
}

/// Exhaustive search for m ≠ 0, ‖m‖_∞ ≤ M, with |Σ m_j s_j| ≤ 1e-9 Σ|m_j| s_j.
/// Shells of increasing ‖m‖_∞ are scanned in lexicographic order with the
/// first nonzero entry positive, so the reported relation is the smallest.
pub fn rational_independence_probe(squares: &[f64], bound: i64) -> Result<IndependenceVerdict> {
    if bound < 1 {
        return arg("probe bound must be at least 1");
    }
    let q = squares.len();
    if q == 0 {
        return arg("no values to probe");
    }
    fn rec(squares: &[f64], shell: i64, m: &mut Vec<i64>, hit: bool) -> bool {
        let j = m.len();
        if j == squares.len() {
            if !hit {
                return false;
            }
            let first = m.iter().find(|v| **v != 0).copied().unwrap_or(0);
            if first <= 0 {
                return false;
            }
            let s: f64 = m.iter().zip(squares).map(|(a, b)| *a as f64 * b).sum();
            let w: f64 = m.iter().zip(squares).map(|(a, b)| (*a as f64).abs() * b.abs()).sum();
            return s.abs() <= 1e-9 * w;
        }
        let last = j + 1 == squares.len();
        for v in -shell..=shell {
            let on_shell = v.abs() == shell;
            if last && !hit && !on_shell {
                continue;
            }
            m.push(v);
            if rec(squares, shell, m, hit || on_shell) {
                return true;
            }
            m.pop();
        }
        false
    }
    for shell in 1..=bound {
        let mut m = Vec::with_capacity(q);
        if rec(squares, shell, &mut m, false) {
            return Ok(IndependenceVerdict::RelationFound(m));
        }
    }
    Ok(IndependenceVerdict::IndependentUpTo(bound))
}
