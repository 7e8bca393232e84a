//! Degenerate U-statistic U_n = (2a/(n(n-1))) Σ_{i<j} Z_i Z_j.
//!
//! nU_n = Zᵀ M Z with M_{ij} = a/(n-1) off the diagonal and 0 on it, so its
//! chaos coefficients are the eigenvalues of M: a once and -a/(n-1) with
//! multiplicity n-1. Against the target a(Z²-1) this gives
//!
//! * κ_2 = 2a²n/(n-1), κ_3 = 8a³n(n-2)/(n-1)²,
//! * κ_4 = 48a⁴((n-1)³+1)/(n-1)³,
//! * Δ = a⁴n²/(n-1)³ (for example Δ = 9/8 at n = 3, a = 1).
//!
//! Discrepancy note: the formulas κ_4 = 48a⁴n(n-2)(n-3)/(n-1)³ and
//! Δ = a⁴n(n-3)/(n-1)³ that circulate for this statistic disagree with the
//! eigenvalue computation above (they already fail at n = 3, where the
//! second would give Δ = 0 although nU_3 is not a(Z²-1) in law). This crate
//! uses the eigenvalue forms; both versions are exposed so the difference
//! stays visible. The decay rate √Δ = O(n^{-1/2}) is the same for both.

use serde::Serialize;

use crate::chaos_model::{ChaosCoefficients, TargetSpec};
use crate::error::{arg, Result};
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UStatSpec {
    n: usize,
    a: f64,
}

impl UStatSpec {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if n < 3 {
            return arg(format!("U-statistic needs n >= 3, got {n}"));
        }
        if a == 0.0 || !a.is_finite() {
            return arg("scale a must be finite and nonzero");
        }
        Ok(UStatSpec { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// The matrix M of nU_n = Zᵀ M Z.
pub fn ustat_matrix(spec: &UStatSpec) -> SymMatrix {
    let off = spec.a / (spec.n - 1) as f64;
    SymMatrix::from_fn(spec.n, |i, j| if i == j { 0.0 } else { off }).expect("symmetric by construction")
}

/// (a, -a/(n-1), …, -a/(n-1)) against W = Z² - 1.
pub fn ustat_coefficients(spec: &UStatSpec) -> ChaosCoefficients {
    let mut alphas = vec![spec.a];
    alphas.extend(std::iter::repeat_n(-spec.a / (spec.n - 1) as f64, spec.n - 1));
    ChaosCoefficients::chi_square(alphas).expect("finite coefficients")
}

/// The limit a(Z² - 1).
pub fn ustat_target(spec: &UStatSpec) -> TargetSpec {
    TargetSpec::chi_square(vec![spec.a]).expect("nonzero scale")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UStatReference {
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    pub delta: f64,
}

pub fn ustat_reference(spec: &UStatSpec) -> UStatReference {
    let n = spec.n as f64;
    let a = spec.a;
    let m = n - 1.0;
    UStatReference {
        kappa2: 2.0 * a * a * n / m,
        kappa3: 8.0 * a.powi(3) * n * (n - 2.0) / (m * m),
        kappa4: 48.0 * a.powi(4) * (m.powi(3) + 1.0) / m.powi(3),
        delta: a.powi(4) * n * n / m.powi(3),
    }
}

/// The circulating (κ_4, Δ) forms discussed in the module note; they do not
/// match the eigenvalue computation and are kept only for comparison.
pub fn ustat_published_forms(spec: &UStatSpec) -> (f64, f64) {
    let n = spec.n as f64;
    let a4 = spec.a.powi(4);
    let m3 = (n - 1.0).powi(3);
    (48.0 * a4 * n * (n - 2.0) * (n - 3.0) / m3, a4 * n * (n - 3.0) / m3)
}
