//! Command-line front end: operator inspection, IVP solves, singular
//! solutions, bifurcation sweeps, intersection counts, phase-plane orbits,
//! and a self-check suite. Exit codes: 0 success, 2 configuration error,
//! 3 numeric failure, 4 invariant failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gelfand::bifurcation::{detect_oscillation, geometric_grid, lambda_sharp, sweep};
use gelfand::nonlinearity::{
    default_diagnostic_grid, diagnose_assumptions, Family, NonlinearitySpec,
};
use gelfand::params::{OperatorParams, RegimeTag};
use gelfand::phase::{
    classify_fixed_point, count_intersections, integrate_orbit, orbit_from_solution,
    FixedPointClass, SolutionRef,
};
use gelfand::singular::{
    asymptotic_z, exact_singular, exact_singular_residual, i_fun, numeric_singular,
};
use gelfand::solver::{lambda_of_rho, pohozaev_residual, solve_ivp};

#[derive(Parser)]
#[command(
    name = "gelfand",
    about = "Radial quasilinear Gelfand-type problems: shooting, singular solutions, \
             bifurcation diagrams, phase-plane analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print operator exponents, λ* (identity nonlinearity), and the regime.
    Params(CommonArgs),
    /// Solve the initial-value problem u(0) = ρ, u'(0) = 0 and export it.
    Solve(SolveArgs),
    /// Exact or asymptotic-seeded singular solution; prints λ*.
    Singular(SingularArgs),
    /// Sweep the bifurcation diagram ρ ↦ λ(ρ).
    Bifurcate(BifurcateArgs),
    /// Count regular–singular intersection points on an r-interval.
    Intersect(IntersectArgs),
    /// Integrate the autonomous phase-plane system.
    Phase(PhaseArgs),
    /// Run the built-in invariant suite; nonzero exit on any failure.
    Check(CheckArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// k-Hessian operator: dimension d and order k.
    #[arg(long, num_args = 2, value_names = ["D", "K"])]
    khessian: Option<Vec<u32>>,
    /// p-Laplacian operator: dimension d and exponent p.
    #[arg(long, num_args = 2, value_names = ["D", "P"])]
    plaplacian: Option<Vec<f64>>,
    /// Raw exponent triple α β γ.
    #[arg(long, num_args = 3, value_names = ["ALPHA", "BETA", "GAMMA"])]
    raw: Option<Vec<f64>>,
    /// Nonlinearity: identity | power:P | iterexp:N,P | perturbed:DELTA,C0.
    #[arg(long = "f")]
    nonlinearity: Option<String>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file for machine-readable results (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Initial value u(0) = ρ.
    #[arg(long)]
    rho: Option<f64>,
    /// Largest radius to integrate to.
    #[arg(long = "r-max")]
    r_max: Option<f64>,
}

#[derive(Args)]
struct SingularArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seed radius for the asymptotic-seeded construction.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    /// Export the asymptotic exponent table r, Z, u_approx instead of samples.
    #[arg(long)]
    asymptotic: bool,
}

#[derive(Args)]
struct BifurcateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// ρ grid as LO:HI:N.
    #[arg(long)]
    rho: Option<String>,
    /// Geometric instead of uniform spacing.
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct IntersectArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "r-lo")]
    r_lo: Option<f64>,
    /// Defaults to the zero radius R(0, ρ).
    #[arg(long = "r-hi")]
    r_hi: Option<f64>,
}

#[derive(Args)]
struct PhaseArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Map the regular solution with this ρ onto the phase plane instead.
    #[arg(long = "from-rho")]
    from_rho: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
}

/// JSON config mirroring the flags; flags override file values.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    operator: Option<OperatorParams>,
    nonlinearity: Option<NonlinearitySpec>,
    tol: Option<f64>,
    rho: Option<f64>,
    rho_range: Option<RhoRange>,
    r_max: Option<f64>,
    r_lo: Option<f64>,
    r_hi: Option<f64>,
    r0: Option<f64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    x0: Option<f64>,
    y0: Option<f64>,
    t0: Option<f64>,
    t1: Option<f64>,
    log: Option<bool>,
}

#[derive(Deserialize)]
struct RhoRange {
    lo: f64,
    hi: f64,
    n: usize,
    #[serde(default)]
    log: bool,
}

enum CliError {
    Config(String),
    Numeric(String),
    Invariant(String),
}

impl From<gelfand::Error> for CliError {
    fn from(e: gelfand::Error) -> Self {
        match e {
            gelfand::Error::Domain(m) => CliError::Config(format!("domain error: {m}")),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GELFAND_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Params(args) => cmd_params(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Singular(args) => cmd_singular(&args),
        Command::Bifurcate(args) => cmd_bifurcate(&args),
        Command::Intersect(args) => cmd_intersect(&args),
        Command::Phase(args) => cmd_phase(&args),
        Command::Check(args) => cmd_check(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(4)
        }
    }
}

struct Resolved {
    params: OperatorParams,
    nl: NonlinearitySpec,
    tol: f64,
    out: Option<PathBuf>,
    format: OutputFormat,
    config: RunConfig,
}

fn resolve(common: &CommonArgs) -> CliResult<Resolved> {
    let config: RunConfig = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let chosen = [
        common.khessian.is_some(),
        common.plaplacian.is_some(),
        common.raw.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if chosen > 1 {
        return Err(CliError::Config(
            "choose exactly one of --khessian, --plaplacian, --raw".into(),
        ));
    }
    let params = if let Some(dk) = &common.khessian {
        OperatorParams::khessian(dk[0], dk[1]).map_err(to_config)?
    } else if let Some(dp) = &common.plaplacian {
        OperatorParams::plaplacian(dp[0] as u32, dp[1]).map_err(to_config)?
    } else if let Some(abg) = &common.raw {
        OperatorParams::raw(abg[0], abg[1], abg[2]).map_err(to_config)?
    } else if let Some(p) = config.operator {
        p
    } else {
        return Err(CliError::Config(
            "no operator given (--khessian/--plaplacian/--raw or config)".into(),
        ));
    };
    let nl = match &common.nonlinearity {
        Some(text) => parse_family(text)?,
        None => config.nonlinearity.unwrap_or_else(NonlinearitySpec::identity),
    };
    let tol = common.tol.or(config.tol).unwrap_or(1e-10);
    let out = common.out.clone().or_else(|| config.out.clone());
    let format = common.format.or(config.format).unwrap_or(OutputFormat::Csv);
    Ok(Resolved { params, nl, tol, out, format, config })
}

fn to_config(e: gelfand::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn parse_family(text: &str) -> CliResult<NonlinearitySpec> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (text, None),
    };
    let parts: Vec<&str> = rest.map(|r| r.split(',').collect()).unwrap_or_default();
    let family = match (name, parts.as_slice()) {
        ("identity", []) => Family::Identity,
        ("power", [p]) => Family::Power { p: parse_num(p)? },
        ("iterexp", [n, p]) => Family::IterExp {
            n: parse_num(n)? as u32,
            p: parse_num(p)?,
        },
        ("perturbed", [delta, c0]) => Family::Perturbed {
            delta: parse_num(delta)?,
            c0: parse_num(c0)?,
        },
        _ => {
            return Err(CliError::Config(format!(
                "bad nonlinearity '{text}'; expected identity | power:P | iterexp:N,P | perturbed:DELTA,C0"
            )))
        }
    };
    NonlinearitySpec::new(family).map_err(to_config)
}

fn parse_num(s: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse number '{s}'")))
}

fn parse_range(text: &str, log: bool) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("bad range '{text}'; expected LO:HI:N")));
    }
    let lo = parse_num(parts[0])?;
    let hi = parse_num(parts[1])?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("bad point count '{}'", parts[2])))?;
    if n == 0 || !(lo < hi) {
        return Err(CliError::Config(format!("empty range '{text}'")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if log {
        if lo <= 0.0 {
            return Err(CliError::Config("geometric range needs LO > 0".into()));
        }
        Ok(geometric_grid(lo, hi, n))
    } else {
        Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
    }
}

fn write_out(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Round to 6 significant digits for human-readable summaries.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = (5 - x.abs().log10().floor() as i32).clamp(0, 17) as usize;
    format!("{x:.digits$}")
}

fn cmd_params(common: &CommonArgs) -> CliResult<()> {
    let r = resolve(common)?;
    let p = r.params;
    let regime = p.classify_regime();
    let (class, eig) = classify_fixed_point(&p);
    println!("alpha = {}, beta = {}, gamma = {}", p.alpha, p.beta, p.gamma);
    println!(
        "theta = {}, alpha_hat = {}, theta_hat = {}, delta = {}",
        p.theta(),
        p.alpha_hat(),
        p.theta_hat(),
        p.delta()
    );
    println!("lambda_star (identity nonlinearity) = {}", p.lambda_star_exact());
    println!(
        "regime = {} (delta = {}, focus threshold = {}, node threshold = {})",
        regime.tag, regime.delta, regime.focus_threshold, regime.node_threshold
    );
    println!(
        "fixed point = {class}, eigenvalues = {:.6} ± {:.6}i",
        eig[1].re,
        eig[1].im.abs()
    );
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let r = resolve(&args.common)?;
    let rho = args
        .rho
        .or(r.config.rho)
        .ok_or_else(|| CliError::Config("solve needs --rho".into()))?;
    let r_max = args.r_max.or(r.config.r_max).unwrap_or(2.0);
    let traj = solve_ivp(&r.params, &r.nl, rho, r_max, r.tol)?;
    let content = match r.format {
        OutputFormat::Json => traj.to_json(),
        _ => traj.to_csv(),
    };
    write_out(&r.out, &content)?;
    eprintln!(
        "solved rho={} to r={} ({} samples){}",
        rho,
        sig6(traj.r_max),
        traj.samples.len(),
        match traj.r_zero() {
            Some(rz) => format!(
                ", zero radius R(0,rho) = {}, lambda = {}",
                sig6(rz),
                sig6(rz.powf(r.params.theta()))
            ),
            None => String::new(),
        }
    );
    Ok(())
}

fn cmd_singular(args: &SingularArgs) -> CliResult<()> {
    let r = resolve(&args.common)?;
    let r_max = args.r_max.or(r.config.r_max).unwrap_or(100.0);
    let sing = if r.nl.is_identity() && args.r0.is_none() && r.config.r0.is_none() {
        exact_singular(&r.params)
    } else {
        let r0 = args.r0.or(r.config.r0).unwrap_or_else(|| {
            let t0 = (60.0 / r.params.theta()).max(12.0);
            (r.params.kappa0().ln() - t0).exp()
        });
        numeric_singular(&r.params, &r.nl, r0, r_max, r.tol)?
    };
    let grid = geometric_grid(1e-6, sing.r_zero().min(r_max).max(2e-6), 400);
    let content = if args.asymptotic {
        let mut csv = String::from("r,Z,u_approx\n");
        for &rr in &grid {
            if let Ok((z, u)) = asymptotic_z(&r.params, &r.nl, sing.lambda_star, rr) {
                csv.push_str(&format!("{rr:.16e},{z:.16e},{u:.16e}\n"));
            }
        }
        csv
    } else {
        let mut csv = String::from("r,u,uprime\n");
        for &rr in &grid {
            let u = sing.eval_canonical(rr)?;
            let up = sing.eval_canonical_uprime(rr)?;
            csv.push_str(&format!("{rr:.16e},{u:.16e},{up:.16e}\n"));
        }
        csv
    };
    write_out(&r.out, &content)?;
    eprintln!(
        "lambda_star = {} ({:?}){}",
        sig6(sing.lambda_star),
        sing.kind,
        match sing.remainder_order_estimate {
            Some(q) => format!(", remainder order estimate = {}", sig6(q)),
            None => String::new(),
        }
    );
    Ok(())
}

fn cmd_bifurcate(args: &BifurcateArgs) -> CliResult<()> {
    let r = resolve(&args.common)?;
    let log = args.log
        || r.config.log.unwrap_or(false)
        || r.config.rho_range.as_ref().is_some_and(|g| g.log);
    let grid = match (&args.rho, &r.config.rho_range) {
        (Some(text), _) => parse_range(text, log)?,
        (None, Some(rr)) => parse_range(&format!("{}:{}:{}", rr.lo, rr.hi, rr.n), log || rr.log)?,
        (None, None) => geometric_grid(0.1, 30.0, 256),
    };
    let curve = sweep(&r.params, &r.nl, &grid, r.tol)?;
    let content = match r.format {
        OutputFormat::Json => {
            let mut json = curve.summary_json();
            json.push('\n');
            json
        }
        OutputFormat::Gnuplot => curve.to_gnuplot(),
        OutputFormat::Csv => curve.to_csv(),
    };
    write_out(&r.out, &content)?;
    let (changes, _) = detect_oscillation(&curve);
    eprintln!(
        "lambda_star = {}, sign changes = {changes}, lambda_sharp ≈ {}{}",
        sig6(curve.lambda_star),
        sig6(lambda_sharp(&curve)),
        if curve.failures.is_empty() {
            String::new()
        } else {
            format!(", {} failed points", curve.failures.len())
        }
    );
    Ok(())
}

fn cmd_intersect(args: &IntersectArgs) -> CliResult<()> {
    let r = resolve(&args.common)?;
    if !r.nl.is_identity() {
        return Err(CliError::Config(
            "intersection counting is exact only for --f identity".into(),
        ));
    }
    let rho = args
        .rho
        .or(r.config.rho)
        .ok_or_else(|| CliError::Config("intersect needs --rho".into()))?;
    let r_lo = args.r_lo.or(r.config.r_lo).unwrap_or(1e-6);
    let sing = exact_singular(&r.params);
    let lam = lambda_of_rho(&r.params, &r.nl, rho, r.tol)?;
    let default_hi = lam.powf(1.0 / r.params.theta());
    let r_hi = args.r_hi.or(r.config.r_hi).unwrap_or(default_hi);
    let traj = solve_ivp(&r.params, &r.nl, rho, r_hi * 1.05, r.tol)?;
    let report = count_intersections(&traj, &sing, r_lo, r_hi)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serialization");
    json.push('\n');
    write_out(&r.out, &json)?;
    eprintln!("count={} stable={}", report.count, report.stable);
    Ok(())
}

fn cmd_phase(args: &PhaseArgs) -> CliResult<()> {
    let r = resolve(&args.common)?;
    let orbit = if let Some(rho) = args.from_rho.or(r.config.rho) {
        let traj = solve_ivp(&r.params, &r.nl, rho, 5.0, r.tol)?;
        orbit_from_solution(SolutionRef::Regular(&traj), &r.params)?
    } else {
        let x0 = args.x0.or(r.config.x0).unwrap_or(1e-6);
        let y0 = args.y0.or(r.config.y0).unwrap_or(0.0);
        let t0 = args.t0.or(r.config.t0).unwrap_or(0.0);
        let t1 = args.t1.or(r.config.t1).unwrap_or(-20.0);
        integrate_orbit(&r.params, x0, y0, (t0, t1), r.tol)?
    };
    write_out(&r.out, &orbit.to_csv())?;
    eprintln!(
        "classification = {}, eigenvalues = {:.6} ± {:.6}i, {} samples{}",
        orbit.classification,
        orbit.eigenvalues[1].re,
        orbit.eigenvalues[1].im.abs(),
        orbit.samples.len(),
        if orbit.hit_domain_boundary {
            ", stopped at domain boundary"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> CliResult<()> {
    // The check matrix is fixed; operator flags are accepted but unused.
    let _ = resolve(&args.common);
    let mut failures: Vec<String> = Vec::new();
    let run = |name: &str, ok: bool, detail: String, failures: &mut Vec<String>| {
        println!("{}: {name} — {detail}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures.push(name.to_string());
        }
    };

    // Exact λ* recovery across a (d, k) grid.
    let mut ok = true;
    for k in 1..=3u32 {
        for d in (2 * k + 1)..(2 * k + 8) {
            let p = OperatorParams::khessian(d, k).unwrap();
            let expect = f64::from(2 * k).powi(k as i32) * f64::from(d - 2 * k);
            ok &= p.lambda_star_exact() == expect;
        }
    }
    run(
        "exact lambda_star formula",
        ok,
        "θ^(β+1)(α−β−1) against (2k)^k(d−2k)".into(),
        &mut failures,
    );

    // Exact singular residuals.
    let mut worst = 0.0_f64;
    for (d, k) in [(3, 1), (5, 2), (7, 3)] {
        let p = OperatorParams::khessian(d, k).unwrap();
        for i in 0..60 {
            let rr = 10f64.powf(-8.0 + 8.0 * i as f64 / 59.0);
            worst = worst.max(exact_singular_residual(&p, rr));
        }
    }
    run(
        "exact singular residual",
        worst <= 1e-12,
        format!("max relative residual {worst:.2e} (bound 1e-12)"),
        &mut failures,
    );

    // I(u) ≡ β+1 for the identity.
    let nl = NonlinearitySpec::identity();
    let mut worst = 0.0_f64;
    for (d, k) in [(3u32, 1u32), (5, 2), (7, 3)] {
        let p = OperatorParams::khessian(d, k).unwrap();
        for u in [0.0, 10.0, 30.0, 50.0] {
            match i_fun(&nl, &p, u) {
                Ok(v) => worst = worst.max((v - (p.beta + 1.0)).abs()),
                Err(e) => {
                    worst = f64::INFINITY;
                    eprintln!("I(u) failed: {e}");
                }
            }
        }
    }
    run(
        "tail-integral identity I(u) = β+1",
        worst <= 1e-8,
        format!("max deviation {worst:.2e} (bound 1e-8)"),
        &mut failures,
    );

    // Regime vs eigenvalue consistency.
    let mut ok = true;
    for k in 1..=3u32 {
        for d in (2 * k + 1)..(2 * k + 14) {
            let p = OperatorParams::khessian(d, k).unwrap();
            let focus = classify_fixed_point(&p).0 == FixedPointClass::UnstableFocus;
            let osc = p.classify_regime().tag == RegimeTag::Oscillatory;
            ok &= focus == osc;
        }
    }
    run(
        "regime/eigenvalue consistency",
        ok,
        "focus ⟺ oscillatory over the (d, k) grid".into(),
        &mut failures,
    );

    // Pohozaev residuals on two trajectories.
    let tol = 1e-9;
    let mut worst = 0.0_f64;
    for (d, k, rho) in [(3u32, 1u32, 1.5), (5, 2, 2.0)] {
        let p = OperatorParams::khessian(d, k).unwrap();
        match solve_ivp(&p, &nl, rho, 5.0, tol) {
            Ok(traj) => {
                let r0 = traj.r_zero().unwrap_or(1.0);
                for a in [0.0, 0.1] {
                    match pohozaev_residual(&traj, a, 0.2 * r0, 0.9 * r0) {
                        Ok(res) => worst = worst.max(res),
                        Err(e) => {
                            worst = f64::INFINITY;
                            eprintln!("pohozaev failed: {e}");
                        }
                    }
                }
            }
            Err(e) => {
                worst = f64::INFINITY;
                eprintln!("solve failed: {e}");
            }
        }
    }
    run(
        "Pohozaev residual",
        worst <= 10.0 * tol,
        format!("max residual {worst:.2e} (bound {:.0e})", 10.0 * tol),
        &mut failures,
    );

    // Numeric singular recovers the exact λ*.
    let p = OperatorParams::khessian(3, 1).unwrap();
    let recovered = numeric_singular(&p, &nl, 1e-6, 10.0, 1e-10)
        .map(|s| s.lambda_star)
        .unwrap_or(f64::NAN);
    run(
        "numeric singular lambda_star",
        (recovered - 2.0).abs() <= 1e-4,
        format!("recovered {recovered:.8} against 2 (bound 1e-4)"),
        &mut failures,
    );

    // Nonlinearity diagnostics pass for the shipped families.
    let mut ok = true;
    for family in [
        Family::Identity,
        Family::Power { p: 2.0 },
        Family::IterExp { n: 1, p: 1.0 },
    ] {
        let spec = NonlinearitySpec::new(family).unwrap();
        let grid = default_diagnostic_grid(&spec, 64);
        match diagnose_assumptions(&spec, &grid) {
            Ok(report) => ok &= report.all_pass(),
            Err(e) => {
                ok = false;
                eprintln!("diagnostics failed: {e}");
            }
        }
    }
    run(
        "nonlinearity decay diagnostics",
        ok,
        "identity, power:2, iterexp:1,1".into(),
        &mut failures,
    );

    if failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "{} check(s) failed: {}",
            failures.len(),
            failures.join(", ")
        )))
    }
}
