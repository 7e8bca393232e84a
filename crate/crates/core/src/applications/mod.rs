//! Worked examples: degenerate U-statistics, kernel quadratic forms,
//! generalized Rosenblatt variables, the variance-gamma bridge, and rate
//! sweeps over each family.

pub mod qform;
pub mod rosenblatt;
pub mod sweep;
pub mod ustat;
pub mod vg;
