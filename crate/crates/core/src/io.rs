//! Coefficient and target files.
//!
//! JSON: `{"alphas": [...], "noise": "chi2_centered" | "chi2_standardized" |
//! {"cumulants": [...]}, "convention": "raw" | "unit"}` where `noise` defaults
//! to `chi2_centered` and `convention` to `raw`. Plain text: one number per
//! line, `#` starts a comment, chi-square noise and raw convention implied.

use std::path::Path;

use serde::Deserialize;

use crate::chaos_model::{BaseNoise, ChaosCoefficients, VarianceConvention};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(untagged)]
enum NoiseField {
    Named(String),
    Cumulants { cumulants: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientFile {
    alphas: Vec<f64>,
    noise: Option<NoiseField>,
    convention: Option<VarianceConvention>,
}

fn noise_from(field: Option<NoiseField>) -> Result<BaseNoise> {
    match field {
        None => Ok(BaseNoise::centered_chi_square()),
        Some(NoiseField::Named(s)) => match s.as_str() {
            "chi2_centered" => Ok(BaseNoise::centered_chi_square()),
            "chi2_standardized" => Ok(BaseNoise::standardized_chi_square()),
            other => Err(Error::Parse(format!("unknown noise {other:?}"))),
        },
        Some(NoiseField::Cumulants { cumulants }) => BaseNoise::custom(cumulants),
    }
}

/// Parses either format; JSON is recognised by a leading `{`.
pub fn parse_coefficients(text: &str) -> Result<ChaosCoefficients> {
    if text.trim_start().starts_with('{') {
        let file: CoefficientFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let noise = noise_from(file.noise)?;
        ChaosCoefficients::new(file.alphas, noise, file.convention.unwrap_or(VarianceConvention::Raw))
    } else {
        let mut alphas = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let v = body
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: not a number: {body}", no + 1)))?;
            alphas.push(v);
        }
        ChaosCoefficients::chi_square(alphas)
    }
}

pub fn read_coefficients(path: &Path) -> Result<ChaosCoefficients> {
    let text = std::fs::read_to_string(path)?;
    parse_coefficients(&text)
}
