use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chaos_model::{ChaosCoefficients, SamplerId, TargetSpec};
use crate::error::{arg, Error, Result};
use crate::matching_distance::matching;

/// Draws per RNG stream.
pub const CHUNK_SIZE: usize = 4096;
pub const GENERATOR_ID: &str = "chacha8-streams/ziggurat-normal";

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub generator: &'static str,
}

/// The generator for chunk `chunk`: ChaCha8 keyed by the seed, stream = chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Z_1² + … + Z_m² - m. Small m sums normals directly, larger m uses the
/// gamma-based chi-square sampler.
fn centered_chi_square<R: Rng>(rng: &mut R, m: usize, dist: Option<&ChiSquared<f64>>) -> f64 {
    match dist {
        Some(d) => d.sample(rng) - m as f64,
        None => {
            let mut s = 0.0;
            for _ in 0..m {
                let z: f64 = rng.sample(StandardNormal);
                s += z * z;
            }
            s - m as f64
        }
    }
}

const DIRECT_MAX: usize = 16;

struct Group {
    weights: Vec<f64>,
    multiplicity: usize,
    dist: Option<ChiSquared<f64>>,
}

fn scale_of(coeffs_noise: Option<SamplerId>) -> Result<f64> {
    match coeffs_noise {
        Some(SamplerId::ChiSquare { scale }) => Ok(scale),
        None => Err(Error::UnsupportedSampler("noise has no sampler attached".into())),
    }
}

/// Groups equal weight tuples so W_k sharing a tuple are drawn as one
/// chi-square variable with the summed degrees of freedom.
fn group(rows: Vec<Vec<f64>>) -> Vec<Group> {
    let mut rows: Vec<Vec<f64>> = rows.into_iter().filter(|r| r.iter().any(|v| *v != 0.0)).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut groups: Vec<Group> = Vec::new();
    for r in rows {
        match groups.last_mut() {
            Some(g) if g.weights == r => g.multiplicity += 1,
            _ => groups.push(Group { weights: r, multiplicity: 1, dist: None }),
        }
    }
    for g in &mut groups {
        if g.multiplicity > DIRECT_MAX {
            g.dist = Some(ChiSquared::new(g.multiplicity as f64).expect("positive degrees of freedom"));
        }
    }
    groups
}

/// Draws `n` joint samples; column c of each draw is Σ_g weights[c] · S_g.
fn draw(groups: &[Group], width: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut cols = vec![vec![0.0; len]; width];
            for i in 0..len {
                for g in groups {
                    let s = centered_chi_square(&mut rng, g.multiplicity, g.dist.as_ref());
                    for (col, w) in cols.iter_mut().zip(&g.weights) {
                        col[i] += w * s;
                    }
                }
            }
            cols
        })
        .collect();
    let mut out = vec![Vec::with_capacity(n); width];
    for p in parts {
        for (o, col) in out.iter_mut().zip(p) {
            o.extend(col);
        }
    }
    out
}

/// N i.i.d. draws of Σ α_k W_k.
pub fn sample_chaos(coeffs: &ChaosCoefficients, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return arg("sample size must be at least 1");
    }
    let scale = scale_of(coeffs.noise().sampler())?;
    let groups = group(coeffs.alphas().iter().map(|a| vec![a * scale]).collect());
    let values = draw(&groups, 1, n, seed).pop().unwrap();
    Ok(SampleBatch { values, seed, generator: GENERATOR_ID })
}

/// Draws (F_n, F_∞) on a common probability space: coefficient pairs
/// matched by the d_σ pairing share the same W_k.
pub fn sample_coupled(
    coeffs: &ChaosCoefficients,
    target: &TargetSpec,
    n: usize,
    seed: u64,
) -> Result<(SampleBatch, SampleBatch)> {
    if n == 0 {
        return arg("sample size must be at least 1");
    }
    if coeffs.noise() != target.noise() {
        return arg("coefficients and target use different noise models");
    }
    let scale = scale_of(coeffs.noise().sampler())?;
    let a = coeffs.alphas();
    let b = target.alphas();
    let m = matching(a, b);
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let rows = m
        .pairing
        .iter()
        .map(|&(i, j)| vec![at(a, i) * scale, at(b, j) * scale])
        .collect();
    let mut cols = draw(&group(rows), 2, n, seed);
    let fb = cols.pop().unwrap();
    let fa = cols.pop().unwrap();
    Ok((
        SampleBatch { values: fa, seed, generator: GENERATOR_ID },
        SampleBatch { values: fb, seed, generator: GENERATOR_ID },
    ))
}

/// √(mean (F_n - F_∞)²) under the synchronous coupling; an upper bound on
/// W2 for every realisation of the sample.
pub fn coupled_w2_upper(coeffs: &ChaosCoefficients, target: &TargetSpec, n: usize, seed: u64) -> Result<f64> {
    let (fa, fb) = sample_coupled(coeffs, target, n, seed)?;
    let s: f64 = fa.values.iter().zip(&fb.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((s / n as f64).sqrt())
}
