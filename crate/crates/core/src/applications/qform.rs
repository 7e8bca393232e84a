//! Quadratic forms Q̃_n(Z) = Σ ã_{ij} Z_i Z_j built from a finite-rank kernel
//! K(x, y) = Σ_m λ_m e_m(x) e_m(y) sampled on the grid i/n.

use std::path::Path;

use serde::Serialize;

use crate::chaos_model::{
    power_sums, theta_coefficients, trace_powers, BaseNoise, TargetSpec, VarianceConvention,
};
use crate::error::{arg, Error, Result};
use crate::linalg::SymMatrix;

/// Orthonormal functions on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// e_m(x) = √2 cos(2πmx), Lipschitz (Hölder exponent 1).
    Cosine,
    /// Columns sampled on a uniform grid, linearly interpolated.
    Tabulated { x: Vec<f64>, columns: Vec<Vec<f64>>, holder: f64 },
}

impl Basis {
    /// e_m(x), m starting at 1.
    pub fn eval(&self, m: usize, x: f64) -> f64 {
        match self {
            Basis::Cosine => std::f64::consts::SQRT_2 * (2.0 * std::f64::consts::PI * m as f64 * x).cos(),
            Basis::Tabulated { x: grid, columns, .. } => {
                let col = &columns[m - 1];
                let n = grid.len();
                let (lo, hi) = (grid[0], grid[n - 1]);
                let pos = ((x - lo) / (hi - lo) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
                let i = (pos.floor() as usize).min(n - 2);
                let w = pos - i as f64;
                col[i] * (1.0 - w) + col[i + 1] * w
            }
        }
    }

    pub fn tabulated_len(&self) -> Option<usize> {
        match self {
            Basis::Cosine => None,
            Basis::Tabulated { columns, .. } => Some(columns.len()),
        }
    }

    pub fn holder_exponent(&self) -> f64 {
        match self {
            Basis::Cosine => 1.0,
            Basis::Tabulated { holder, .. } => *holder,
        }
    }

    /// Reads a CSV with header `x,e_1,…,e_q` on a uniform grid.
    pub fn from_csv(path: &Path, holder: f64) -> Result<Basis> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let q = headers.len().saturating_sub(1);
        if q == 0 || headers.get(0).map(str::trim) != Some("x") {
            return Err(Error::Parse("basis CSV header must be x,e_1,...,e_q".into()));
        }
        for (m, h) in headers.iter().skip(1).enumerate() {
            if h.trim() != format!("e_{}", m + 1) {
                return Err(Error::Parse(format!("unexpected basis column {h}")));
            }
        }
        let mut x = Vec::new();
        let mut columns = vec![Vec::new(); q];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let vals = rec
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v}"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != q + 1 {
                return Err(Error::Parse("ragged basis CSV row".into()));
            }
            x.push(vals[0]);
            for m in 0..q {
                columns[m].push(vals[m + 1]);
            }
        }
        if x.len() < 2 {
            return Err(Error::Parse("basis CSV needs at least two rows".into()));
        }
        let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        if !(h > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::Parse("basis grid must be uniform and increasing".into()));
        }
        if !(holder > 0.0 && holder <= 1.0) {
            return arg("Hölder exponent must lie in (0, 1]");
        }
        Ok(Basis::Tabulated { x, columns, holder })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    lambdas: Vec<f64>,
    basis: Basis,
}

impl KernelSpec {
    /// Checks distinct nonzero λ and orthonormality of e_1..e_q to 1e-6
    /// under the 10⁴-point midpoint rule.
    pub fn new(lambdas: Vec<f64>, basis: Basis) -> Result<Self> {
        let q = lambdas.len();
        if q == 0 {
            return arg("kernel needs at least one eigenvalue");
        }
        if let Some(len) = basis.tabulated_len() {
            if len < q {
                return arg(format!("basis has {len} functions, kernel needs {q}"));
            }
        }
        // distinctness and nonzero entries are the target's invariants
        normalized_target(&lambdas)?;
        let pts = 10_000;
        for a in 1..=q {
            for b in a..=q {
                let s: f64 = (0..pts)
                    .map(|i| {
                        let x = (i as f64 + 0.5) / pts as f64;
                        basis.eval(a, x) * basis.eval(b, x)
                    })
                    .sum::<f64>()
                    / pts as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                if (s - want).abs() > 1e-6 {
                    return arg(format!("basis functions {a},{b} are not orthonormal (inner product {s})"));
                }
            }
        }
        Ok(KernelSpec { lambdas, basis })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn q(&self) -> usize {
        self.lambdas.len()
    }

    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        self.lambdas
            .iter()
            .enumerate()
            .map(|(m, l)| l * self.basis.eval(m + 1, x) * self.basis.eval(m + 1, y))
            .sum()
    }

    /// λ̃ = λ / ‖λ‖ as a unit-sphere chi-square target.
    pub fn target(&self) -> Result<TargetSpec> {
        normalized_target(&self.lambdas)
    }
}

fn normalized_target(lambdas: &[f64]) -> Result<TargetSpec> {
    let norm = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidTarget("kernel eigenvalues are all zero".into()));
    }
    TargetSpec::new(
        lambdas.iter().map(|l| l / norm).collect(),
        BaseNoise::centered_chi_square(),
        VarianceConvention::Unit,
    )
}

/// (A_n, Ã_n) with a_{ij} = K(i/n, j/n)/n, i, j = 1..n, and Ã = A/‖A‖_F.
pub fn qform_matrix(kernel: &KernelSpec, n: usize) -> Result<(SymMatrix, SymMatrix)> {
    if n < kernel.q() {
        return arg(format!("n = {n} is below q = {}", kernel.q()));
    }
    let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let vals: Vec<Vec<f64>> = (1..=kernel.q())
        .map(|m| grid.iter().map(|&x| kernel.basis.eval(m, x)).collect())
        .collect();
    let a = SymMatrix::from_fn(n, |i, j| {
        kernel
            .lambdas
            .iter()
            .zip(&vals)
            .map(|(l, e)| l * e[i] * e[j])
            .sum::<f64>()
            / n as f64
    })?;
    let norm = a.frobenius_norm();
    if !(norm > 0.0) {
        return arg("kernel matrix vanishes on the grid");
    }
    let normalized = a.scaled(1.0 / norm);
    Ok((a, normalized))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QFormBound {
    /// √(max(0, inner)) + trace_part; the absolute constant is left out.
    pub bracket: f64,
    /// Σ_{r=2}^{2q+2} Θ_r [Tr(Ã^r) - Σ λ̃^r] before clamping.
    pub inner: f64,
    /// Σ_{r=2}^{q+1} 2^{r-1}(r-1)! |Tr(Ã^r) - Σ λ̃^r|.
    pub trace_part: f64,
    /// Whether `inner` was negative and clamped at 0.
    pub clamped: bool,
}

/// The bracket of the quadratic-form W2 bound, traces from eigenvalues.
pub fn qform_bound(normalized: &SymMatrix, target: &TargetSpec) -> Result<QFormBound> {
    let traces = trace_powers(normalized, 2 * target.q() + 2)?;
    qform_bound_from_traces(&traces, target)
}

/// Same bracket from precomputed Tr(Ã^r), r = 2..=2q+2.
pub fn qform_bound_from_traces(traces: &[f64], target: &TargetSpec) -> Result<QFormBound> {
    let q = target.q();
    if traces.len() < 2 * q + 1 {
        return arg(format!("need traces up to order {}", 2 * q + 2));
    }
    let theta = theta_coefficients(target);
    let limits = power_sums(target.alphas(), 2 * q + 2);
    let diff: Vec<f64> = traces.iter().zip(&limits).map(|(t, l)| t - l).collect();
    let inner: f64 = (2..=2 * q + 2).map(|r| theta.theta(r) * diff[r - 2]).sum();
    let mut trace_part = 0.0;
    let mut c = 1.0; // 2^{r-1}(r-1)!
    for r in 2..=q + 1 {
        c *= 2.0 * (r - 1) as f64;
        trace_part += c * diff[r - 2].abs();
    }
    let clamped = inner < 0.0;
    Ok(QFormBound { bracket: inner.max(0.0).sqrt() + trace_part, inner, trace_part, clamped })
}

/// τ_n = max_i Σ_j ã_{ij}².
pub fn tau_n(normalized: &SymMatrix) -> f64 {
    let n = normalized.dim();
    (0..n)
        .map(|i| (0..n).map(|j| normalized.get(i, j).powi(2)).sum::<f64>())
        .fold(0.0, f64::max)
}
