//! Simulation of chaos laws, one-dimensional transport estimators,
//! closed-form characteristic functions and the lower bounds built on them.

mod cf;
mod estimators;
mod sampling;
mod tail;

pub use cf::{
    cf_lower_bound, char_fn, cumulant_series_gap, logderiv_gap_circle, CfLowerBound, CfPoint, SeriesGap, TGrid,
};
pub use estimators::{empirical_kolmogorov, empirical_w2, W2Estimate};
pub use sampling::{
    chunk_rng, coupled_w2_upper, sample_chaos, sample_coupled, SampleBatch, CHUNK_SIZE, GENERATOR_ID,
};
pub use tail::{tail_probe, TailReport, TailRow, WILSON_Z};
