//! Log-gamma, Beta and the modified Bessel function of the second kind.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9; relative error below 1e-13 on the
/// ranges used here). Negative non-integer arguments go through reflection.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Sign of Γ(x) (x not a non-positive integer).
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// B(a, b) via log-gamma. Arguments may be negative non-integers as long as
/// a + b is too; that extension is what the Rosenblatt integrals need.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    for v in [a, b, a + b] {
        if !v.is_finite() || (v <= 0.0 && v == v.floor()) {
            return Err(Error::Domain(format!("Beta argument {v} at a pole")));
        }
    }
    let sign = gamma_sign(a) * gamma_sign(b) * gamma_sign(a + b);
    Ok(sign * (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

/// Strictly positive-argument log-Beta.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("ln_beta needs positive arguments, got ({a}, {b})")));
    }
    Ok(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// e^z K_ν(z) for z > 0, from K_ν(z) = ∫_0^∞ e^{-z cosh t} cosh(νt) dt.
///
/// Trapezoid rule on the half line; the step is halved until two successive
/// sums agree to `1e-12` relative, which is well past the 1e-8 target since
/// the integrand is analytic in a strip.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k needs z > 0, got {z}")));
    }
    let nu = nu.abs();
    let f = |t: f64| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    // truncation point: the integrand is below 1e-18 of its value at the peak
    let peak = if nu > z { (nu / z).asinh() } else { 0.0 };
    let peak_val = f(peak);
    let mut upper = peak + 1.0;
    while f(upper) > 1e-18 * peak_val {
        upper += 1.0;
    }
    let mut h = 0.25_f64.min(upper / 8.0);
    let trap = |h: f64| {
        let n = (upper / h).ceil() as usize;
        let mut s = 0.5 * f(0.0);
        for i in 1..=n {
            s += f(i as f64 * h);
        }
        s * h
    };
    let mut prev = trap(h);
    for _ in 0..30 {
        h *= 0.5;
        let cur = trap(h);
        if (cur - prev).abs() <= 1e-12 * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Stability(format!("bessel_k({nu}, {z}) did not converge")))
}

pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z)? * (-z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_negative_extension() {
        // B(a, b) = Γ(a)Γ(b)/Γ(a+b) with Γ(-0.5) = -2√π
        let pi = std::f64::consts::PI;
        let expect = (-2.0 * pi.sqrt()) * 1.0 / (pi.sqrt());
        assert!((beta(-0.5, 1.0).unwrap() - expect).abs() < 1e-12);
        assert!(beta(-1.0, 0.5).is_err());
    }

    #[test]
    fn bessel_half_order_closed_form() {
        // K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}
        for z in [0.01, 0.3, 1.0, 7.5, 30.0] {
            let exact = (std::f64::consts::PI / (2.0 * z)).sqrt();
            let got = bessel_k_scaled(0.5, z).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-10, "z={z}");
        }
    }
}
