//! Acceptance criteria. Each test prints one `criterion N ... PASS|FAIL`
//! line with the measured quantities, then asserts the verdict.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wienerbound::applications::qform::{Basis, KernelSpec};
use wienerbound::applications::rosenblatt::{rosenblatt_cumulant, CmScheme, RosenblattParams};
use wienerbound::applications::sweep::{fit_loglog, rate_sweep, Family, Metric, SweepSettings};
use wienerbound::applications::ustat::{ustat_coefficients, ustat_reference, ustat_target, UStatSpec};
use wienerbound::applications::vg::{vg_from_chi_pair, vg_total_mass, VGParams};
use wienerbound::chaos_model::{
    cumulants_from_coefficients, delta_via_cumulants, delta_via_roots, quadratic_form_coefficients,
    theta_coefficients,
};
use wienerbound::matching_distance::{
    certified_upper_bound, d_sigma, rational_independence_probe, BoundBranch, IndependenceVerdict,
    UnitSphereVector,
};
use wienerbound::transport_lab::{
    cf_lower_bound, cumulant_series_gap, empirical_w2, logderiv_gap_circle, sample_chaos, tail_probe, TGrid,
};
use wienerbound::{BaseNoise, ChaosCoefficients, TargetSpec, VarianceConvention};

fn verdict(id: u32, name: &str, pass: bool, elapsed: Duration, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id} [{name}] {tag} ({:.3} s) {detail}", elapsed.as_secs_f64());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn unit_vector(rng: &mut ChaCha8Rng, len: usize, norm: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s * norm).collect()
}

#[test]
fn criterion_01_theta_goldens() {
    let start = Instant::now();
    let a = theta_coefficients(&TargetSpec::chi_square(vec![1.0]).unwrap());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let b = theta_coefficients(&TargetSpec::chi_square(vec![h]).unwrap());
    let elapsed = start.elapsed();
    let close = |got: &[f64], want: &[f64]| got.len() == want.len() && got.iter().zip(want).all(|(x, y)| (x - y).abs() <= 1e-12);
    let ok = close(a.thetas(), &[1.0, -2.0, 1.0])
        && close(b.thetas(), &[0.5, -std::f64::consts::SQRT_2, 1.0])
        && elapsed < Duration::from_millis(1);
    verdict(1, "theta goldens", ok, elapsed, &format!("{:?} {:?}", a.thetas(), b.thetas()));
}

#[test]
fn criterion_02_dual_route_delta() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_cond, mut worst_scaled) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let q = rng.random_range(1..=4);
        let t = loop {
            let v: Vec<f64> = (0..q).map(|_| rng.random_range(-1.5..1.5)).collect();
            if let Ok(t) = TargetSpec::chi_square(v) {
                break t;
            }
        };
        let len = rng.random_range(1..=50);
        let c = ChaosCoefficients::chi_square((0..len).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap();
        let theta = theta_coefficients(&t);
        let k = cumulants_from_coefficients(&c, theta.degree()).unwrap();
        let a = delta_via_roots(&c, &t).unwrap();
        let b = delta_via_cumulants(&k, c.noise(), &theta).unwrap();
        worst = worst.max(rel(b, a));
        // Σ_r |Θ_r| Σ_k |α_k|^r: the size of the terms the cumulant route cancels
        let scale: f64 = (2..=theta.degree())
            .map(|r| theta.theta(r).abs() * c.alphas().iter().map(|x| x.abs().powi(r as i32)).sum::<f64>())
            .sum();
        worst_cond = worst_cond.max(scale / a);
        worst_scaled = worst_scaled.max((b - a).abs() / scale);
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-10 && elapsed < Duration::from_secs(1);
    verdict(
        2,
        "dual-route delta",
        ok,
        elapsed,
        &format!(
            "max relative gap {worst:.3e} over 1000 instances; max condition {worst_cond:.2e}; max gap relative to term size {worst_scaled:.2e}"
        ),
    );
}

#[test]
fn criterion_03_ustat_goldens() {
    let start = Instant::now();
    let mut worst_k23 = 0.0_f64;
    let mut worst_k4d = 0.0_f64;
    for n in 3..=50usize {
        for a in [1.0, -0.6, 2.0] {
            let s = UStatSpec::new(n, a).unwrap();
            let nf = n as f64;
            let k = cumulants_from_coefficients(&ustat_coefficients(&s), 4).unwrap();
            // printed forms, written out here independently of the library
            let k2 = 2.0 * a * a * nf / (nf - 1.0);
            let k3 = 8.0 * a.powi(3) * nf * (nf - 2.0) / (nf - 1.0).powi(2);
            worst_k23 = worst_k23.max(rel(k.get(2).unwrap(), k2)).max(rel(k.get(3).unwrap(), k3));
            // eigenvalue brute force against the reference closed forms
            let eig = quadratic_form_coefficients(&wienerbound::applications::ustat::ustat_matrix(&s)).unwrap();
            let ke = cumulants_from_coefficients(&eig, 4).unwrap();
            let de = delta_via_roots(&eig, &ustat_target(&s)).unwrap();
            let r = ustat_reference(&s);
            worst_k4d = worst_k4d.max(rel(r.kappa4, ke.get(4).unwrap())).max(rel(r.delta, de));
        }
    }
    let doc = include_str!("../src/applications/ustat.rs");
    let note = doc.contains("Discrepancy note")
        && doc.contains("48a⁴n(n-2)(n-3)/(n-1)³")
        && doc.contains("Δ = a⁴n(n-3)/(n-1)³")
        && doc.contains("Δ = a⁴n²/(n-1)³");
    let elapsed = start.elapsed();
    let ok = worst_k23 <= 1e-12 && worst_k4d <= 1e-12 && note;
    verdict(
        3,
        "u-statistic goldens",
        ok,
        elapsed,
        &format!("kappa2/3 rel {worst_k23:.2e}, kappa4/delta rel {worst_k4d:.2e}, note present {note}"),
    );
}

#[test]
fn criterion_04_ustat_rate() {
    let start = Instant::now();
    let grid = [10.0, 32.0, 100.0, 316.0, 1000.0];
    let settings = SweepSettings { samples: 100_000, seed: 7, t_grid: None, bound: Default::default() };
    let table = rate_sweep(&Family::UStat { a: 1.0 }, &grid, &settings).unwrap();
    let sqrt_delta = table.fit_metric(Metric::SqrtDelta).unwrap();
    let w2 = table.fit_metric(Metric::W2Hat).unwrap();
    let elapsed = start.elapsed();
    let ok_a = (sqrt_delta.slope + 0.5).abs() <= 0.02;
    let ok_b = (w2.slope + 0.5).abs() <= 0.15;
    let ok = ok_a && ok_b && elapsed < Duration::from_secs(120);
    verdict(
        4,
        "u-statistic rate",
        ok,
        elapsed,
        &format!(
            "sqrt(delta) slope {:.4} (window -0.5 +- 0.02: {}), empirical W2 slope {:.4} (window -0.5 +- 0.15: {})",
            sqrt_delta.slope,
            if ok_a { "in" } else { "out" },
            w2.slope,
            if ok_b { "in" } else { "out" }
        ),
    );
}

#[test]
fn criterion_05_link_identity() {
    let start = Instant::now();
    let mut pairs = vec![(
        ChaosCoefficients::chi_square(vec![0.5, 0.5]).unwrap(),
        TargetSpec::chi_square(vec![0.5, -0.5]).unwrap(),
    )];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while pairs.len() < 21 {
        let len = rng.random_range(1..=6);
        let c = ChaosCoefficients::chi_square(unit_vector(&mut rng, len, 1.0)).unwrap();
        let q = rng.random_range(1..=3);
        if let Ok(t) = TargetSpec::chi_square(unit_vector(&mut rng, q, 1.0)) {
            pairs.push((c, t));
        }
    }
    let mut worst_excess = f64::NEG_INFINITY;
    for (c, t) in &pairs {
        let kn = cumulants_from_coefficients(c, 40).unwrap();
        let ki = cumulants_from_coefficients(&t.as_coefficients(), 40).unwrap();
        for rho in [0.05, 0.1, 0.2] {
            let lhs = logderiv_gap_circle(c, t, rho, 512).unwrap();
            let rhs = cumulant_series_gap(&kn, &ki, rho, 40).unwrap();
            worst_excess = worst_excess.max((lhs - rhs.value).abs() - (1e-6 + rhs.tail_bound));
        }
    }
    let elapsed = start.elapsed();
    let ok = worst_excess <= 0.0 && elapsed < Duration::from_secs(5);
    verdict(5, "link identity", ok, elapsed, &format!("max (|gap| - allowance) = {worst_excess:.3e} over 21 pairs"));
}

#[test]
fn criterion_06_sandwich() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = TGrid::default().points();
    let n = 100_000;
    let (mut count, mut violations) = (0, 0);
    let mut seed = 0;
    while count < 50 {
        let q = rng.random_range(1..=3);
        let x = unit_vector(&mut rng, q, 1.0);
        let Ok(t) = TargetSpec::chi_square_unit(x.clone()) else { continue };
        let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
        if !matches!(rational_independence_probe(&squares, 50).unwrap(), IndependenceVerdict::IndependentUpTo(_)) {
            continue;
        }
        // a perturbation of the target so the bounds are informative
        let len = rng.random_range(q..=q + 3);
        let mut y: Vec<f64> = (0..len).map(|i| x.get(i).copied().unwrap_or(0.0) + 0.15 * rng.random_range(-1.0..1.0)).collect();
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= s);
        let c = ChaosCoefficients::new(y, BaseNoise::centered_chi_square(), VarianceConvention::Unit).unwrap();
        let upper = certified_upper_bound(&t, &c).unwrap().w2_value;
        let lower = cf_lower_bound(&c, &t, &grid).unwrap().value;
        seed += 2;
        let a = sample_chaos(&c, n, seed).unwrap();
        let b = sample_chaos(&t.as_coefficients(), n, seed + 1).unwrap();
        let w = empirical_w2(&a.values, &b.values).unwrap();
        if lower > w.estimate + 3.0 * w.stderr || w.estimate > upper + 3.0 * w.stderr {
            violations += 1;
        }
        count += 1;
    }
    let elapsed = start.elapsed();
    let ok = violations == 0 && elapsed < Duration::from_secs(300);
    verdict(6, "sandwich", ok, elapsed, &format!("{violations} violations over {count} instances"));
}

#[test]
fn criterion_07_lower_bound_scaling() {
    let start = Instant::now();
    let grid: Vec<f64> = (0..7).map(|k| (10f64.powf(2.0 + 0.5 * k as f64)).round()).collect();
    let settings = SweepSettings { samples: 0, seed: 0, t_grid: None, bound: Default::default() };
    let table = rate_sweep(&Family::LowBound, &grid, &settings).unwrap();
    let elapsed = start.elapsed();
    let ok = (table.fit.slope + 0.75).abs() <= 0.10;
    verdict(
        7,
        "lower-bound scaling",
        ok,
        elapsed,
        &format!("anchored cf lower bound slope {:.4} vs a_n = 1/n", table.fit.slope),
    );
}

fn brute_force(x: &[f64], y: &[f64]) -> f64 {
    let len = x.len() + y.len();
    let pad = |v: &[f64]| {
        let mut p = v.to_vec();
        p.resize(len, 0.0);
        p
    };
    let (x, y) = (pad(x), pad(y));
    fn rec(i: usize, x: &[f64], y: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
        if i == x.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..y.len() {
            if !used[j] {
                used[j] = true;
                rec(i + 1, x, y, used, acc + (x[i] - y[j]).powi(2), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, &x, &y, &mut vec![false; len], 0.0, &mut best);
    best.sqrt()
}

#[test]
fn criterion_08_d_sigma_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let lx = rng.random_range(1..=6);
        let ly = rng.random_range(1..=7 - lx);
        let x = unit_vector(&mut rng, lx, 1.0);
        let y = unit_vector(&mut rng, ly, 1.0);
        let d = d_sigma(&UnitSphereVector::new(x.clone()).unwrap(), &UnitSphereVector::new(y.clone()).unwrap());
        worst = worst.max((d.distance - brute_force(&x, &y)).abs());
    }
    let elapsed = start.elapsed();
    verdict(8, "d_sigma oracle", worst <= 1e-12, elapsed, &format!("max |sorted - brute force| = {worst:.2e} over 500 pairs"));
}

#[test]
fn criterion_09_hilbert_bound() {
    let start = Instant::now();
    let sq = |s: &[f64]| -> Vec<f64> {
        let rest = 1.0 - s.iter().sum::<f64>();
        s.iter().chain(std::iter::once(&rest)).enumerate().map(|(i, v)| if i % 2 == 0 { v.sqrt() } else { -v.sqrt() }).collect()
    };
    let targets: Vec<Vec<f64>> = vec![
        vec![1.0],
        sq(&[std::f64::consts::FRAC_1_SQRT_2]),
        sq(&[1.0 / std::f64::consts::PI]),
        sq(&[2f64.sqrt() / 4.0, 3f64.sqrt() / 6.0]),
        sq(&[2f64.sqrt() / 8.0, 3f64.sqrt() / 8.0, 5f64.sqrt() / 8.0]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    let mut independent = true;
    let mut c_x = Vec::new();
    for x in &targets {
        let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
        independent &= matches!(rational_independence_probe(&squares, 50).unwrap(), IndependenceVerdict::IndependentUpTo(_));
        let t = TargetSpec::chi_square_unit(x.clone()).unwrap();
        for k in 0..1000 {
            let len = rng.random_range(1..=7);
            let y = unit_vector(&mut rng, len, 1.0);
            let c = ChaosCoefficients::new(y.clone(), BaseNoise::centered_chi_square(), VarianceConvention::Unit).unwrap();
            let b = certified_upper_bound(&t, &c).unwrap();
            independent &= b.constants.branch == BoundBranch::Independent;
            if k == 0 {
                c_x.push(b.constants.c_x);
            }
            let d = d_sigma(&UnitSphereVector::new(x.clone()).unwrap(), &UnitSphereVector::new(y).unwrap()).distance;
            if d > b.constants.c_x * b.delta.sqrt() * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = violations == 0 && independent;
    verdict(9, "hilbert bound", ok, elapsed, &format!("{violations} violations over 5000 draws, C_x = {c_x:.4?}"));
}

#[test]
fn criterion_10_quadratic_form_rate() {
    let start = Instant::now();
    let kernel = KernelSpec::new(vec![1.0, -0.5], Basis::Cosine).unwrap();
    let grid = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
    let settings = SweepSettings { samples: 0, seed: 0, t_grid: None, bound: Default::default() };
    let rows = rate_sweep(&Family::QForm { kernel }, &grid, &settings).unwrap().rows;
    let brackets: Vec<f64> = rows.iter().map(|r| r.bracket).collect();
    let fit = fit_loglog(&grid, &brackets);
    let ok_slope = matches!(&fit, Ok(f) if (f.slope + 0.5).abs() <= 0.15);
    let n_tau: Vec<f64> = rows.iter().map(|r| r.x * r.tau_n).collect();
    let tau_fit = fit_loglog(&grid, &n_tau).unwrap();
    let ok_tau = tau_fit.slope.abs() <= 0.1 && n_tau.iter().all(|v| v.is_finite());
    let elapsed = start.elapsed();
    let slope = match &fit {
        Ok(f) => format!("{:.4}", f.slope),
        Err(e) => format!("unavailable ({e})"),
    };
    verdict(
        10,
        "quadratic-form rate",
        ok_slope && ok_tau,
        elapsed,
        &format!(
            "bracket [{}], slope {slope} (window -0.5 +- 0.15: {}); n*tau_n {n_tau:.4?} bounded: {ok_tau}",
            brackets.iter().map(|b| format!("{b:.3e}")).collect::<Vec<_>>().join(", "),
            if ok_slope { "in" } else { "out" }
        ),
    );
}

#[test]
fn criterion_11_rosenblatt() {
    let start = Instant::now();
    let mut norm_ok = true;
    let mut norm_detail = Vec::new();
    for g in [-0.51, -0.55, -0.6] {
        for rho in [0.3, 0.7] {
            let p = RosenblattParams::new(g, rho).unwrap();
            let k2 = rosenblatt_cumulant(&p, 2, CmScheme::default()).unwrap();
            let dev = (k2.value - 1.0).abs();
            norm_ok &= dev <= 3.0 * k2.error;
            norm_detail.push(format!("{dev:.1e}<=3*{:.1e}", k2.error));
        }
    }
    let eps: Vec<f64> = (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect();
    let settings = SweepSettings { samples: 0, seed: 0, t_grid: None, bound: Default::default() };
    let mut slopes = Vec::new();
    for rho in [0.3, 0.7] {
        let t = rate_sweep(&Family::Rosenblatt { rho, m: 3, scheme: CmScheme::default() }, &eps, &settings).unwrap();
        slopes.push(t.fit.slope);
    }
    let slope_ok = slopes.iter().all(|s| (s - 1.0).abs() <= 0.2);
    let elapsed = start.elapsed();
    let ok = norm_ok && slope_ok && elapsed < Duration::from_secs(600);
    verdict(
        11,
        "rosenblatt",
        ok,
        elapsed,
        &format!(
            "normalization {} [{}]; m=3 gap slopes {slopes:.4?} (window 1.0 +- 0.2: {})",
            if norm_ok { "ok" } else { "off" },
            norm_detail.join(", "),
            if slope_ok { "in" } else { "out" }
        ),
    );
}

#[test]
fn criterion_12_vg_bridge() {
    let start = Instant::now();
    let p = vg_from_chi_pair(0.5, 0.5).unwrap();
    let same = p == VGParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
    let mass = vg_total_mass(&p).unwrap();
    let n = 1_000_000;
    let c = ChaosCoefficients::chi_square(vec![0.5, -0.5]).unwrap();
    let v = sample_chaos(&c, n, 12).unwrap().values;
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let k = cumulants_from_coefficients(&c, 4).unwrap();
    let (k2, k4) = (k.get(2).unwrap(), k.get(4).unwrap());
    let mean_ok = (mean - p.mean()).abs() < 5.0 * (k2 / n as f64).sqrt();
    let var_ok = (var - p.variance()).abs() < 5.0 * ((k4 + 2.0 * k2 * k2) / n as f64).sqrt();
    let elapsed = start.elapsed();
    let ok = same && (mass - 1.0).abs() <= 1e-6 && mean_ok && var_ok;
    verdict(
        12,
        "variance-gamma bridge",
        ok,
        elapsed,
        &format!("params {p:?}, mass {mass:.9}, sample mean {mean:.5} vs {}, variance {var:.5} vs {}", p.mean(), p.variance()),
    );
}

#[test]
fn criterion_13_tail_bound() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut flagged = 0;
    let mut worst = 0.0_f64;
    for i in 0..10 {
        // 2 Σ α² = 1 makes the law unit-variance
        let len = rng.random_range(1..=6);
        let alphas = unit_vector(&mut rng, len, std::f64::consts::FRAC_1_SQRT_2);
        let c = ChaosCoefficients::chi_square(alphas).unwrap();
        let b = sample_chaos(&c, 1_000_000, 1000 + i).unwrap();
        let r = tail_probe(&b.values, &[3.0, 4.0, 5.0]);
        flagged += r.rows.iter().filter(|row| row.flagged).count();
        worst = r.rows.iter().fold(worst, |m, row| m.max(row.frequency / row.bound));
    }
    let elapsed = start.elapsed();
    verdict(
        13,
        "tail bound",
        flagged == 0,
        elapsed,
        &format!("{flagged} flagged thresholds, max frequency/bound ratio {worst:.3}"),
    );
}
