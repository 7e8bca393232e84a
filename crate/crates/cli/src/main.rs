//! Command-line front end for the wienerbound library.

// NaN must fail these range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wienerbound::applications::qform::{Basis, KernelSpec};
use wienerbound::applications::rosenblatt::{
    rosenblatt_a, rosenblatt_cm, rosenblatt_cumulant, y_rho_cumulant, CmScheme, RosenblattParams,
};
use wienerbound::applications::sweep::{rate_sweep, Family, RateTable, SweepSettings};
use wienerbound::applications::vg::{gaunt_bound_term, vg_density, vg_from_chi_pair, vg_total_mass};
use wienerbound::chaos_model::{cumulants_from_coefficients, delta_via_cumulants, delta_via_roots, theta_coefficients};
use wienerbound::io::read_coefficients;
use wienerbound::matching_distance::{
    bound_constants, certified_upper_bound_scaled, certified_upper_bound_with, matching, BoundOptions,
};
use wienerbound::transport_lab::{
    cf_lower_bound, cumulant_series_gap, empirical_w2, logderiv_gap_circle, sample_coupled, TGrid,
};
use wienerbound::{ChaosCoefficients, Error, TargetSpec, VarianceConvention};

#[derive(Parser)]
#[command(name = "wienerbound", version, about = "Bounds and diagnostics for second-chaos limit theorems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: logical processors).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Θ coefficients of Q(x) = x² ∏ (x - α_∞)².
    Theta(TargetArgs),
    /// Δ(F_n) by the roots route, the cumulant route, or both.
    Delta {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// Matching distance d_σ and the optimal pairing.
    Dsigma(PairArgs),
    /// Constructive bound constants of a unit-sphere target.
    Constants {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 4.0)]
        search_cap: f64,
    },
    /// The W2 sandwich: CF lower bound, empirical and coupled estimates, certified upper bound.
    W2(W2Args),
    /// Rate sweep over a family of instances.
    Sweep(SweepArgs),
    /// Rosenblatt cumulants against the Y_ρ limit.
    Rosenblatt(RosenblattArgs),
    /// Variance-gamma parameters of a two-term chi-square combination.
    Vg(VgArgs),
}

#[derive(Args)]
struct TargetArgs {
    /// Target coefficients, comma separated (raw chi-square convention).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "target")]
    alphas: Option<Vec<f64>>,
    /// Target coefficient file.
    #[arg(long)]
    target: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Coefficient file for F_n.
    #[arg(long)]
    coeffs: PathBuf,
    /// Coefficient file for the target F_∞.
    #[arg(long)]
    target: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Roots,
    Cumulants,
    Both,
}

#[derive(Args)]
struct W2Args {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// lo:hi:points[,anchor...]
    #[arg(long)]
    t_grid: Option<String>,
    /// Radius for the log-derivative identity check.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    search_cap: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Ustat,
    Qform,
    Lowbound,
    Rosenblatt,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Grid of n values (ustat, qform, lowbound).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<f64>>,
    /// U-statistic scale.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    /// Kernel eigenvalues, comma separated (qform).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    kernel: Option<Vec<f64>>,
    /// Tabulated basis CSV with header x,e_1,...,e_q (qform; default √2 cos 2πmx).
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Hölder exponent of the tabulated basis.
    #[arg(long, default_value_t = 1.0)]
    holder: f64,
    /// Grid of γ1 values (rosenblatt).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma1: Option<Vec<f64>>,
    #[arg(long)]
    rho_param: Option<f64>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    search_cap: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeName {
    Tensor,
    Mc,
}

#[derive(Args)]
struct RosenblattArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma1: f64,
    #[arg(long)]
    rho_param: f64,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, value_enum, default_value_t = SchemeName::Tensor)]
    scheme: SchemeName,
    /// Monte Carlo size for --scheme mc.
    #[arg(long, default_value_t = 10_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VgArgs {
    /// The positive weights (α1, α2) of α1(N1² - 1) - α2(N2² - 1).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    alphas: Vec<f64>,
    /// Points at which to evaluate the density.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Coefficient file compared against the symmetric pair target.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

/// Shortest round-trip decimal; exponent form outside [1e-5, 1e16).
fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

struct ShortFloats;

impl serde_json::ser::Formatter for ShortFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
}

fn to_json(v: &Value) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ShortFloats);
    serde::Serialize::serialize(v, &mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

fn load(path: &Path) -> anyhow::Result<ChaosCoefficients> {
    read_coefficients(path).with_context(|| format!("reading {}", path.display()))
}

fn load_target(path: &Path) -> anyhow::Result<TargetSpec> {
    Ok(load(path)?.to_target()?)
}

fn target_from(args: &TargetArgs) -> anyhow::Result<TargetSpec> {
    match (&args.alphas, &args.target) {
        (Some(a), None) => Ok(TargetSpec::chi_square(a.clone())?),
        (None, Some(p)) => load_target(p),
        _ => bail!(Error::Argument("give exactly one of --alphas or --target".into())),
    }
}

fn certified(target: &TargetSpec, coeffs: &ChaosCoefficients, opts: BoundOptions) -> anyhow::Result<Value> {
    let both_unit =
        target.convention() == VarianceConvention::Unit && coeffs.convention() == VarianceConvention::Unit;
    let b = if both_unit {
        certified_upper_bound_with(target, coeffs, opts)?
    } else {
        certified_upper_bound_scaled(target, coeffs, opts)?
    };
    Ok(serde_json::to_value(b)?)
}

fn cmd_w2(a: &W2Args) -> anyhow::Result<Value> {
    let c = load(&a.pair.coeffs)?;
    let t = load_target(&a.pair.target)?;
    let grid = match &a.t_grid {
        Some(s) => TGrid::parse(s)?,
        None => TGrid::default(),
    }
    .points();
    let delta = delta_via_roots(&c, &t)?;
    let lower = cf_lower_bound(&c, &t, &grid)?;
    let (fa, fb) = sample_coupled(&c, &t, a.samples, a.seed)?;
    let w = empirical_w2(&fa.values, &fb.values)?;
    let coupled = (fa.values.iter().zip(&fb.values).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
        / a.samples as f64)
        .sqrt();
    let cert = certified(&t, &c, BoundOptions { search_cap: a.search_cap })?;
    let mut out = json!({
        "delta": delta,
        "sqrt_delta": delta.sqrt(),
        "cf_lower": lower.value,
        "cf_lower_t": lower.t,
        "w2_hat": w.estimate,
        "w2_stderr": w.stderr,
        "coupled_upper": coupled,
        "certified_upper": cert["w2_value"].clone(),
        "certified": cert,
        "samples": a.samples,
        "seed": a.seed,
        "generator": fa.generator,
    });
    if let Some(rho) = a.rho {
        let order = 40;
        let kn = cumulants_from_coefficients(&c, order)?;
        let ki = cumulants_from_coefficients(&t.as_coefficients(), order)?;
        let series = cumulant_series_gap(&kn, &ki, rho, order)?;
        out["link"] = json!({
            "rho": rho,
            "circle": logderiv_gap_circle(&c, &t, rho, 512)?,
            "series": series.value,
            "series_tail_bound": series.tail_bound,
        });
    }
    Ok(out)
}

fn csv_line(fields: &[f64]) -> String {
    fields.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn sweep_csv(table: &RateTable, rho: Option<f64>) -> String {
    let mut s = String::new();
    if table.family == "rosenblatt" {
        let rho = rho.unwrap_or(f64::NAN);
        s.push_str("eps,gamma1,gamma2,kappa_z,kappa_y,gap,gap_error\n");
        for r in &table.rows {
            let g1 = -0.5 - r.x;
            let g2 = (g1 + 0.5) / rho - 0.5;
            s.push_str(&csv_line(&[r.x, g1, g2, r.kappa_z, r.kappa_y, r.gap, r.gap_error]));
            s.push('\n');
        }
    } else {
        let qform = table.family == "qform";
        s.push_str("n,delta,sqrt_delta,certified_upper,cf_lower,w2_hat,w2_stderr");
        s.push_str(if qform { ",bracket,tau_n\n" } else { "\n" });
        for r in &table.rows {
            let mut f = vec![r.x, r.delta, r.sqrt_delta, r.certified_upper, r.cf_lower, r.w2_hat, r.w2_stderr];
            if qform {
                f.extend([r.bracket, r.tau_n]);
            }
            s.push_str(&csv_line(&f));
            s.push('\n');
        }
    }
    let metric = serde_json::to_value(table.metric).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let f = &table.fit;
    s.push_str(&format!(
        "# fit metric={metric} slope={} intercept={} ci_low={} ci_high={} points={}\n",
        fmt_f64(f.slope),
        fmt_f64(f.intercept),
        fmt_f64(f.ci_low),
        fmt_f64(f.ci_high),
        f.points
    ));
    s
}

fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<(RateTable, Option<f64>)> {
    let need_n = || {
        a.n.clone().ok_or_else(|| Error::Argument("this family needs --n".into()))
    };
    let (family, grid) = match a.family {
        FamilyName::Ustat => (Family::UStat { a: a.a }, need_n()?),
        FamilyName::Lowbound => (Family::LowBound, need_n()?),
        FamilyName::Qform => {
            let lambdas = a.kernel.clone().ok_or_else(|| Error::Argument("qform needs --kernel".into()))?;
            let basis = match &a.basis {
                Some(p) => Basis::from_csv(p, a.holder)?,
                None => Basis::Cosine,
            };
            (Family::QForm { kernel: KernelSpec::new(lambdas, basis)? }, need_n()?)
        }
        FamilyName::Rosenblatt => {
            let rho = a.rho_param.ok_or_else(|| Error::Argument("rosenblatt needs --rho-param".into()))?;
            let g = a.gamma1.clone().ok_or_else(|| Error::Argument("rosenblatt needs --gamma1".into()))?;
            let eps = g.iter().map(|g| -g - 0.5).collect();
            (Family::Rosenblatt { rho, m: a.m, scheme: CmScheme::default() }, eps)
        }
    };
    let settings = SweepSettings {
        samples: a.samples,
        seed: a.seed,
        t_grid: a.t_grid.as_deref().map(TGrid::parse).transpose()?,
        bound: BoundOptions { search_cap: a.search_cap },
    };
    Ok((rate_sweep(&family, &grid, &settings)?, a.rho_param))
}

fn cmd_rosenblatt(a: &RosenblattArgs) -> anyhow::Result<Value> {
    let p = RosenblattParams::new(a.gamma1, a.rho_param)?;
    let scheme = match a.scheme {
        SchemeName::Tensor => CmScheme::default(),
        SchemeName::Mc => CmScheme::MonteCarlo { samples: a.samples, seed: a.seed },
    };
    let cm = rosenblatt_cm(&p, a.m, scheme)?;
    let kz = rosenblatt_cumulant(&p, a.m, scheme)?;
    let ky = y_rho_cumulant(a.rho_param, a.m)?;
    Ok(json!({
        "gamma1": p.gamma1(),
        "gamma2": p.gamma2(),
        "rho": p.rho(),
        "m": a.m,
        "a": rosenblatt_a(&p)?,
        "cm": cm,
        "kappa_z": kz,
        "kappa_y": ky,
        "gap": (kz.value - ky).abs(),
    }))
}

fn cmd_vg(a: &VgArgs) -> anyhow::Result<Value> {
    let [a1, a2] = a.alphas[..] else {
        bail!(Error::Argument("--alphas needs exactly two weights".into()));
    };
    let p = vg_from_chi_pair(a1, a2)?;
    let mut out = json!({
        "r": p.r,
        "theta": p.theta,
        "sigma": p.sigma,
        "mu": p.mu,
        "mean": p.mean(),
        "variance": p.variance(),
        "total_mass": vg_total_mass(&p)?,
    });
    if let Some(xs) = &a.x {
        let dens = xs.iter().map(|&x| vg_density(&p, x)).collect::<Result<Vec<_>, _>>()?;
        out["density"] = json!(xs.iter().zip(dens).map(|(x, d)| json!({"x": x, "p": d})).collect::<Vec<_>>());
    }
    if let Some(path) = &a.coeffs {
        let c = load(path)?;
        let t = TargetSpec::chi_square(vec![a1, -a2])?;
        out["gaunt_term"] = json!(gaunt_bound_term(&c, &t)?);
    }
    Ok(out)
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Sweep(_)) {
        bail!(Error::Argument("csv output is only available for sweep".into()));
    }
    let value = match &cli.command {
        Command::Theta(t) => json!({ "theta": theta_coefficients(&target_from(t)?).thetas() }),
        Command::Delta { pair, route } => {
            let c = load(&pair.coeffs)?;
            let t = load_target(&pair.target)?;
            let mut out = json!({});
            if matches!(route, Route::Roots | Route::Both) {
                out["roots"] = json!(delta_via_roots(&c, &t)?);
            }
            if matches!(route, Route::Cumulants | Route::Both) {
                if c.noise() != t.noise() {
                    bail!(Error::Argument("coefficients and target use different noise models".into()));
                }
                let theta = theta_coefficients(&t);
                let k = cumulants_from_coefficients(&c, theta.degree())?;
                out["cumulants"] = json!(delta_via_cumulants(&k, c.noise(), &theta)?);
            }
            out
        }
        Command::Dsigma(pair) => {
            let c = load(&pair.coeffs)?;
            let t = load(&pair.target)?;
            serde_json::to_value(matching(c.alphas(), t.alphas()))?
        }
        Command::Constants { target, search_cap } => {
            let t = target_from(target)?;
            serde_json::to_value(bound_constants(t.alphas(), BoundOptions { search_cap: *search_cap })?)?
        }
        Command::W2(a) => cmd_w2(a)?,
        Command::Sweep(a) => {
            let (table, rho) = cmd_sweep(a)?;
            return Ok(match cli.format {
                Format::Csv => sweep_csv(&table, rho),
                Format::Json => to_json(&serde_json::to_value(&table)?)?,
            });
        }
        Command::Rosenblatt(a) => cmd_rosenblatt(a)?,
        Command::Vg(a) => cmd_vg(a)?,
    };
    to_json(&value)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Stability(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("wienerbound: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wienerbound: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}
