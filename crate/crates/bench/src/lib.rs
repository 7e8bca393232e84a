//! Deterministic inputs shared by the benchmarks.

use wienerbound::applications::qform::{Basis, KernelSpec};
use wienerbound::{ChaosCoefficients, TargetSpec};

/// n unit-norm coefficients with a slowly decaying profile.
pub fn decaying_coefficients(n: usize) -> ChaosCoefficients {
    let raw: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    ChaosCoefficients::chi_square(raw.iter().map(|v| v / norm).collect()).expect("finite")
}

/// A q = 3 unit-sphere target with rationally independent squares.
pub fn independent_target() -> TargetSpec {
    let raw = [1.0, -std::f64::consts::SQRT_2 / 2.0, std::f64::consts::E / 10.0];
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    TargetSpec::chi_square_unit(raw.iter().map(|v| v / norm).collect()).expect("valid target")
}

pub fn cosine_kernel() -> KernelSpec {
    KernelSpec::new(vec![1.0, -0.5], Basis::Cosine).expect("orthonormal basis")
}
