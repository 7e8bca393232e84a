//! Rate sweeps: evaluate every bound along a family of instances and fit a
//! log-log slope.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::applications::qform::{qform_bound, qform_matrix, tau_n, KernelSpec};
use crate::applications::rosenblatt::{rosenblatt_cumulant, y_rho_cumulant, CmScheme, RosenblattParams};
use crate::applications::ustat::{ustat_coefficients, ustat_target, UStatSpec};
use crate::chaos_model::{delta_via_roots, quadratic_form_coefficients, ChaosCoefficients, TargetSpec};
use crate::error::{arg, Error, Result};
use crate::matching_distance::{certified_upper_bound_scaled, BoundOptions};
use crate::transport_lab::{cf_lower_bound, empirical_w2, sample_coupled, TGrid};

#[derive(Debug, Clone)]
pub enum Family {
    /// nU_n against a(Z² - 1); grid values are n.
    UStat { a: f64 },
    /// Kernel quadratic forms; grid values are n.
    QForm { kernel: KernelSpec },
    /// (√((1-a)/2), √(a/2)) against (1/√2) with a = 1/n; grid values are n.
    LowBound,
    /// Cumulant gap |κ_m(Z) - κ_m(Y_ρ)|; grid values are ε = -γ1 - 1/2.
    Rosenblatt { rho: f64, m: usize, scheme: CmScheme },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::UStat { .. } => "ustat",
            Family::QForm { .. } => "qform",
            Family::LowBound => "lowbound",
            Family::Rosenblatt { .. } => "rosenblatt",
        }
    }

    pub fn default_metric(&self) -> Metric {
        match self {
            Family::UStat { .. } => Metric::SqrtDelta,
            Family::QForm { .. } => Metric::Bracket,
            Family::LowBound => Metric::CfLower,
            Family::Rosenblatt { .. } => Metric::CumulantGap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Delta,
    SqrtDelta,
    CertifiedUpper,
    CfLower,
    W2Hat,
    Bracket,
    TauN,
    CumulantGap,
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct SweepSettings {
    /// Monte Carlo size for the empirical W2 column; 0 skips sampling.
    pub samples: usize,
    pub seed: u64,
    /// Overrides the default grid (anchor t = a^{-1/2} only for LowBound).
    pub t_grid: Option<TGrid>,
    pub bound: BoundOptions,
}


/// One grid point. Columns that do not apply to a family are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub x: f64,
    pub delta: f64,
    pub sqrt_delta: f64,
    pub certified_upper: f64,
    pub cf_lower: f64,
    pub w2_hat: f64,
    pub w2_stderr: f64,
    pub bracket: f64,
    pub tau_n: f64,
    pub kappa_z: f64,
    pub kappa_y: f64,
    pub gap: f64,
    pub gap_error: f64,
}

impl RateRow {
    fn empty(x: f64) -> Self {
        let nan = f64::NAN;
        RateRow {
            x,
            delta: nan,
            sqrt_delta: nan,
            certified_upper: nan,
            cf_lower: nan,
            w2_hat: nan,
            w2_stderr: nan,
            bracket: nan,
            tau_n: nan,
            kappa_z: nan,
            kappa_y: nan,
            gap: nan,
            gap_error: nan,
        }
    }

    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Delta => self.delta,
            Metric::SqrtDelta => self.sqrt_delta,
            Metric::CertifiedUpper => self.certified_upper,
            Metric::CfLower => self.cf_lower,
            Metric::W2Hat => self.w2_hat,
            Metric::Bracket => self.bracket,
            Metric::TauN => self.tau_n,
            Metric::CumulantGap => self.gap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% Student-t interval for the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

/// Least-squares fit of log y on log x over rows where both are finite and
/// positive; at least four are required.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 4 {
        return arg(format!("slope fit needs at least 4 finite positive rows, got {n}"));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return arg("slope fit needs at least two distinct x values");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::Argument(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci_low: slope - t * se, ci_high: slope + t * se, points: n })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub family: &'static str,
    pub metric: Metric,
    pub rows: Vec<RateRow>,
    pub fit: SlopeFit,
}

impl RateTable {
    pub fn fit_metric(&self, metric: Metric) -> Result<SlopeFit> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.x).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.metric(metric)).collect();
        fit_loglog(&xs, &ys)
    }
}

fn grid_n(x: f64) -> Result<usize> {
    if !(x >= 1.0) || x.fract() != 0.0 {
        return arg(format!("grid value {x} is not a positive integer"));
    }
    Ok(x as usize)
}

/// Common pipeline for families with an explicit coefficient sequence.
fn chaos_row(
    x: f64,
    coeffs: &ChaosCoefficients,
    target: &TargetSpec,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<RateRow> {
    let mut row = RateRow::empty(x);
    row.delta = delta_via_roots(coeffs, target)?;
    row.sqrt_delta = row.delta.sqrt();
    row.certified_upper = certified_upper_bound_scaled(target, coeffs, settings.bound)?.w2_value;
    row.cf_lower = cf_lower_bound(coeffs, target, grid)?.value;
    if settings.samples > 0 {
        let (fa, fb) = sample_coupled(coeffs, target, settings.samples, settings.seed)?;
        let est = empirical_w2(&fa.values, &fb.values)?;
        row.w2_hat = est.estimate;
        row.w2_stderr = est.stderr;
    }
    Ok(row)
}

fn point(family: &Family, x: f64, settings: &SweepSettings) -> Result<RateRow> {
    let default_grid = || settings.t_grid.clone().unwrap_or_default().points();
    match family {
        Family::UStat { a } => {
            let spec = UStatSpec::new(grid_n(x)?, *a)?;
            chaos_row(x, &ustat_coefficients(&spec), &ustat_target(&spec), &default_grid(), settings)
        }
        Family::QForm { kernel } => {
            let n = grid_n(x)?;
            let (_, norm) = qform_matrix(kernel, n)?;
            let target = kernel.target()?;
            let coeffs = quadratic_form_coefficients(&norm)?;
            // numerically null eigenvalues only add round-off noise to sampling
            let top = coeffs.alphas()[0].abs();
            let kept: Vec<f64> = coeffs.alphas().iter().copied().filter(|v| v.abs() > 1e-12 * top).collect();
            let coeffs = ChaosCoefficients::chi_square(kept)?;
            let mut row = chaos_row(x, &coeffs, &target, &default_grid(), settings)?;
            row.bracket = qform_bound(&norm, &target)?.bracket;
            row.tau_n = tau_n(&norm);
            Ok(row)
        }
        Family::LowBound => {
            let n = grid_n(x)?;
            let a = 1.0 / n as f64;
            let coeffs = ChaosCoefficients::chi_square(vec![((1.0 - a) / 2.0).sqrt(), (a / 2.0).sqrt()])?;
            let target = TargetSpec::chi_square(vec![std::f64::consts::FRAC_1_SQRT_2])?;
            let grid = match &settings.t_grid {
                Some(g) => g.points(),
                None => TGrid::anchors_only(vec![a.powf(-0.5)]).points(),
            };
            chaos_row(x, &coeffs, &target, &grid, settings)
        }
        Family::Rosenblatt { rho, m, scheme } => {
            if !(x > 0.0 && x < 0.5) {
                return arg(format!("eps = {x} must lie in (0, 1/2)"));
            }
            let p = RosenblattParams::new(-0.5 - x, *rho)?;
            let kz = rosenblatt_cumulant(&p, *m, *scheme)?;
            let ky = y_rho_cumulant(*rho, *m)?;
            let mut row = RateRow::empty(x);
            row.kappa_z = kz.value;
            row.kappa_y = ky;
            row.gap = (kz.value - ky).abs();
            row.gap_error = kz.error;
            Ok(row)
        }
    }
}

/// Evaluates the family on the grid (in parallel) and fits the family's
/// default metric.
pub fn rate_sweep(family: &Family, grid: &[f64], settings: &SweepSettings) -> Result<RateTable> {
    if grid.len() < 4 {
        return arg(format!("a sweep needs at least 4 grid points, got {}", grid.len()));
    }
    let rows = grid
        .par_iter()
        .map(|&x| point(family, x, settings))
        .collect::<Result<Vec<_>>>()?;
    let metric = family.default_metric();
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.metric(metric)).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok(RateTable { family: family.name(), metric, rows, fit })
}
