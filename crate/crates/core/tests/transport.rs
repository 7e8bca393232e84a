use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use wienerbound::chaos_model::cumulants_from_coefficients;
use wienerbound::transport_lab::*;
use wienerbound::{ChaosCoefficients, Error, TargetSpec};

fn normals(n: usize, seed: u64, mu: f64, sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| mu + sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let c2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let c3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    (m, c2, c3)
}

#[test]
fn sampled_moments_match_cumulants() {
    let c = ChaosCoefficients::chi_square(vec![0.6, -0.3, 0.2]).unwrap();
    let k2 = cumulants_from_coefficients(&c, 4).unwrap().get(2).unwrap();
    let n = 400_000;
    let b = sample_chaos(&c, n, 17).unwrap();
    let (m, v, _) = moments(&b.values);
    assert!(m.abs() < 4.0 * (k2 / n as f64).sqrt(), "mean {m}");
    // var of the sample variance ≈ (κ4 + 2κ2²)/N
    let k4 = cumulants_from_coefficients(&c, 4).unwrap().get(4).unwrap();
    let se = ((k4 + 2.0 * k2 * k2) / n as f64).sqrt();
    assert!((v - k2).abs() < 5.0 * se, "var {v} vs {k2}");
}

#[test]
fn third_cumulant_of_unit_chi_square() {
    let c = ChaosCoefficients::chi_square(vec![1.0]).unwrap();
    let n = 2_000_000;
    let b = sample_chaos(&c, n, 3).unwrap();
    let (_, _, k3) = moments(&b.values);
    // Var of the third central moment estimator ≈ (μ6 - μ3² - 6 μ4 μ2 + 9 μ2³)/N.
    // For Z²-1: μ2 = 2, μ3 = 8, μ4 = 60, μ6 = 2040 (central moments).
    let se = ((2040.0 - 64.0 - 6.0 * 60.0 * 2.0 + 9.0 * 8.0) / n as f64).sqrt();
    assert!((k3 - 8.0).abs() < 5.0 * se, "k3 = {k3}, se = {se}");
}

#[test]
fn sampling_is_deterministic_and_chunk_stable() {
    let c = ChaosCoefficients::chi_square(vec![0.5, 0.5, -0.2]).unwrap();
    let a = sample_chaos(&c, 10_000, 42).unwrap();
    let b = sample_chaos(&c, 10_000, 42).unwrap();
    assert_eq!(a, b);
    let short = sample_chaos(&c, 5_000, 42).unwrap();
    assert_eq!(&a.values[..5_000], &short.values[..]);
    let other = sample_chaos(&c, 10_000, 43).unwrap();
    assert_ne!(a.values, other.values);
    assert_eq!(a.generator, GENERATOR_ID);
}

#[test]
fn large_multiplicity_uses_consistent_law() {
    let c = ChaosCoefficients::chi_square(vec![0.1; 40]).unwrap();
    let b = sample_chaos(&c, 200_000, 8).unwrap();
    let (m, v, _) = moments(&b.values);
    let k2 = 40.0 * 2.0 * 0.01;
    assert!(m.abs() < 4.0 * (k2 / 200_000.0f64).sqrt());
    assert!((v - k2).abs() < 0.02 * k2);
}

#[test]
fn custom_noise_is_unsupported() {
    let noise = wienerbound::BaseNoise::custom(vec![1.0, 0.0, 3.0]).unwrap();
    let c = ChaosCoefficients::new(vec![0.5], noise, wienerbound::VarianceConvention::Raw).unwrap();
    assert!(matches!(sample_chaos(&c, 10, 1), Err(Error::UnsupportedSampler(_))));
    assert!(sample_chaos(&ChaosCoefficients::chi_square(vec![1.0]).unwrap(), 0, 1).is_err());
}

#[test]
fn empirical_w2_trivial_cases() {
    let a = normals(1000, 1, 0.0, 1.0);
    assert_eq!(empirical_w2(&a, &a).unwrap().estimate, 0.0);
    let shifted: Vec<f64> = a.iter().map(|x| x + 0.75).collect();
    assert!((empirical_w2(&a, &shifted).unwrap().estimate - 0.75).abs() < 1e-12);
    assert!(empirical_w2(&a, &a[..10]).is_err());
    assert!(empirical_w2(&a[..5], &a[..5]).unwrap().stderr.is_nan());
}

#[test]
fn empirical_w2_gaussian_oracle() {
    let (mu, sigma) = (0.5, 1.5);
    let truth = (mu * mu + (sigma - 1.0f64).powi(2)).sqrt();
    let a = normals(400_000, 11, 0.0, 1.0);
    let b = normals(400_000, 12, mu, sigma);
    let w = empirical_w2(&a, &b).unwrap();
    assert!(w.stderr > 0.0);
    assert!((w.estimate - truth).abs() < 3.0 * w.stderr, "{} vs {truth} ± {}", w.estimate, w.stderr);
}

#[test]
fn coupled_bound_properties() {
    let t = TargetSpec::chi_square(vec![0.5, -0.5]).unwrap();
    assert_eq!(coupled_w2_upper(&t.as_coefficients(), &t, 1000, 1).unwrap(), 0.0);
    let c = ChaosCoefficients::chi_square(vec![0.45, -0.52, 0.1]).unwrap();
    let n = 200_000;
    let up = coupled_w2_upper(&c, &t, n, 5).unwrap();
    let a = sample_chaos(&c, n, 6).unwrap();
    let b = sample_chaos(&t.as_coefficients(), n, 7).unwrap();
    let w = empirical_w2(&a.values, &b.values).unwrap();
    assert!(up >= w.estimate - 3.0 * w.stderr, "{up} < {}", w.estimate);
    // analytic: ‖α_n - α_∞‖ under the aligned pairing times √κ2(W)
    let d = (0.05f64.powi(2) + 0.02f64.powi(2) + 0.1f64.powi(2)).sqrt() * 2f64.sqrt();
    assert!((up - d).abs() < 0.01 * d, "{up} vs {d}");
}

#[test]
fn char_fn_examples() {
    let c = ChaosCoefficients::chi_square(vec![0.3, -0.4, 0.5]).unwrap();
    let p = char_fn(&c, Complex64::new(0.0, 0.0)).unwrap();
    assert!((p.phi - 1.0).norm() < 1e-15);
    assert!(p.phi_prime.norm() < 1e-15);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let standardized = ChaosCoefficients::new(
        vec![h],
        wienerbound::BaseNoise::standardized_chi_square(),
        wienerbound::VarianceConvention::Raw,
    )
    .unwrap();
    let centered = ChaosCoefficients::chi_square(vec![h]).unwrap();
    for t in [0.1, 1.0, 3.0, 50.0] {
        let p = char_fn(&standardized, Complex64::new(t, 0.0)).unwrap();
        assert!((p.phi.norm() - (1.0 + t * t).powf(-0.25)).abs() < 1e-14);
        let p = char_fn(&centered, Complex64::new(t, 0.0)).unwrap();
        assert!((p.phi.norm() - (1.0 + 2.0 * t * t).powf(-0.25)).abs() < 1e-14);
        let q = char_fn(&c, Complex64::new(t, 0.0)).unwrap();
        assert!(q.phi.norm() <= 1.0 + 1e-15);
    }
    // φ' against a central difference
    let z = Complex64::new(0.7, 0.2);
    let e = 1e-6;
    let fd = (char_fn(&c, z + e).unwrap().phi - char_fn(&c, z - e).unwrap().phi) / (2.0 * e);
    assert!((fd - char_fn(&c, z).unwrap().phi_prime).norm() < 1e-8);
    assert!(matches!(char_fn(&c, Complex64::new(0.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn char_fn_matches_empirical() {
    let c = ChaosCoefficients::chi_square(vec![0.6, -0.3]).unwrap();
    let b = sample_chaos(&c, 200_000, 21).unwrap();
    for t in [0.3, 1.0, 2.0] {
        let emp: Complex64 =
            b.values.iter().map(|x| Complex64::new(0.0, t * x).exp()).sum::<Complex64>() / b.values.len() as f64;
        let phi = char_fn(&c, Complex64::new(t, 0.0)).unwrap().phi;
        assert!((emp - phi).norm() < 5.0 / (b.values.len() as f64).sqrt(), "t={t}");
    }
}

#[test]
fn cf_lower_bound_properties() {
    let t = TargetSpec::chi_square(vec![0.5, -0.5]).unwrap();
    let grid = TGrid::default().points();
    assert_eq!(cf_lower_bound(&t.as_coefficients(), &t, &grid).unwrap().value, 0.0);
    assert!(cf_lower_bound(&t.as_coefficients(), &t, &[]).is_err());
    assert!(cf_lower_bound(&t.as_coefficients(), &t, &[0.0]).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..5 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-0.6..0.6)).collect();
        let c = ChaosCoefficients::chi_square(a).unwrap();
        let lb = cf_lower_bound(&c, &t, &grid).unwrap();
        let x = sample_chaos(&c, 100_000, 100 + i).unwrap();
        let y = sample_chaos(&t.as_coefficients(), 100_000, 200 + i).unwrap();
        let w = empirical_w2(&x.values, &y.values).unwrap();
        assert!(lb.value <= w.estimate + 3.0 * w.stderr, "{} > {}", lb.value, w.estimate);
        let up = coupled_w2_upper(&c, &t, 100_000, 300 + i).unwrap();
        assert!(lb.value <= up * (1.0 + 1e-2));
    }
}

#[test]
fn t_grid_parsing() {
    let g = TGrid::parse("0.1:10:3,5").unwrap();
    let p = g.points();
    assert_eq!(p.len(), 4);
    assert!((p[1] - 1.0).abs() < 1e-12 && p[3] == 5.0);
    assert!(TGrid::parse("0:1:3").is_err());
    assert!(TGrid::parse("abc").is_err());
    assert_eq!(TGrid::default().points().len(), 200);
}

fn thale() -> (ChaosCoefficients, TargetSpec) {
    (
        ChaosCoefficients::chi_square(vec![0.5, 0.5]).unwrap(),
        TargetSpec::chi_square(vec![0.5, -0.5]).unwrap(),
    )
}

#[test]
fn link_identity_on_thale_pair() {
    let (c, t) = thale();
    let kn = cumulants_from_coefficients(&c, 40).unwrap();
    let ki = cumulants_from_coefficients(&t.as_coefficients(), 40).unwrap();
    for rho in [0.05, 0.1, 0.2] {
        let lhs = logderiv_gap_circle(&c, &t, rho, 1024).unwrap();
        let rhs = cumulant_series_gap(&kn, &ki, rho, 40).unwrap();
        assert!((lhs - rhs.value).abs() < 1e-6 + rhs.tail_bound, "rho={rho}: {lhs} vs {}", rhs.value);
    }
    assert_eq!(logderiv_gap_circle(&t.as_coefficients(), &t, 0.1, 64).unwrap(), 0.0);
    assert!(logderiv_gap_circle(&c, &t, 0.5, 64).is_err());
    assert!(logderiv_gap_circle(&c, &t, 0.1, 63).is_err());
}

#[test]
fn link_identity_is_monotone_in_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-0.45..0.45)).collect();
        let b: Vec<f64> = (0..2).map(|_| rng.random_range(-0.45..0.45)).collect();
        let c = ChaosCoefficients::chi_square(a).unwrap();
        let Ok(t) = TargetSpec::chi_square(b) else { continue };
        let mut prev = 0.0;
        for k in 1..=9 {
            let v = logderiv_gap_circle(&c, &t, 0.05 * k as f64 * 0.5, 512).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}

#[test]
fn series_gap_single_term() {
    let base = [2.0, 8.0, 48.0, 384.0];
    let ki = wienerbound::CumulantVector::new(base.to_vec()).unwrap();
    assert_eq!(cumulant_series_gap(&ki, &ki, 0.2, 5).unwrap().value, 0.0);
    let g = 0.7;
    let kn = wienerbound::CumulantVector::new(vec![2.0, 8.0 + g, 48.0, 384.0]).unwrap();
    let rho = 0.3;
    let v = cumulant_series_gap(&kn, &ki, rho, 5).unwrap().value;
    assert!((v - g * g * rho.powi(4) / 4.0).abs() < 1e-16);
    assert!(cumulant_series_gap(&kn, &ki, rho, 6).is_err());
}

#[test]
fn kolmogorov_examples() {
    let a = normals(100_000, 1, 0.0, 1.0);
    let b = normals(100_000, 2, 1.0, 1.0);
    let n = Normal::new(0.0, 1.0).unwrap();
    let want = n.cdf(0.5) - n.cdf(-0.5);
    assert!((want - 0.3829).abs() < 1e-4);
    assert!((empirical_kolmogorov(&a, &b) - want).abs() < 0.01);
    assert_eq!(empirical_kolmogorov(&a, &a), 0.0);
    assert_eq!(empirical_kolmogorov(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
}

#[test]
fn tail_probe_report() {
    let t = TargetSpec::chi_square(vec![0.5, -0.5]).unwrap();
    let b = sample_chaos(&t.as_coefficients(), 1_000_000, 77).unwrap();
    let r = tail_probe(&b.values, &[1.0, 2.0, 3.0, 5.0, 8.0]);
    assert_eq!(r.skipped, vec![1.0, 2.0]);
    assert_eq!(r.rows.len(), 3);
    for row in &r.rows {
        assert!(!row.flagged, "x = {}", row.x);
        assert!(row.wilson_lo <= row.frequency && row.frequency <= row.wilson_hi);
        assert!((row.bound - (-row.x / std::f64::consts::E).exp()).abs() < 1e-16);
    }
    // a law with heavier tail than the bound is flagged
    let heavy: Vec<f64> = (0..10_000).map(|i| if i % 2 == 0 { 10.0 } else { 0.0 }).collect();
    assert!(tail_probe(&heavy, &[5.0]).rows[0].flagged);
}
