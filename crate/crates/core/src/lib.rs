//! Bounds on the 2-Wasserstein distance between laws of the form
//! Σ α_k W_k with i.i.d. noise W_k, chiefly second-Wiener-chaos laws
//! Σ α_k (Z_k² - 1).
//!
//! * [`chaos_model`]: coefficients, cumulants, the polynomial Q and the
//!   discrepancy Δ by two independent routes.
//! * [`matching_distance`]: the permutation distance d_σ and the constants
//!   that make C·√Δ a certified bound on it.
//! * [`transport_lab`]: sampling, empirical W2 and Kolmogorov distances,
//!   characteristic functions and lower bounds.
//! * [`applications`]: U-statistics, kernel quadratic forms, Rosenblatt
//!   cumulants, variance-gamma laws and rate sweeps.

// NaN must fail these range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod chaos_model;
mod error;
pub mod io;
pub mod linalg;
pub mod matching_distance;
pub mod quadrature;
pub mod special;
pub mod transport_lab;

pub use chaos_model::{
    cumulant_gap_sum, cumulants_from_coefficients, delta_via_cumulants, delta_via_roots, quadratic_form_coefficients,
    theta_coefficients, trace_powers, BaseNoise, ChaosCoefficients, CumulantVector, NoiseKind, QPolynomial,
    SamplerId, TargetSpec, VarianceConvention,
};
pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use matching_distance::{
    certified_upper_bound, d_sigma, BoundBranch, BoundConstants, CertifiedBound, MatchingResult, UnitSphereVector,
};
pub use transport_lab::{SampleBatch, W2Estimate};
