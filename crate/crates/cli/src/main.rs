//! `hypwill`: experiment runner for the weighted elastic flow and the
//! hyperbolic elastica toolkit.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure, 4 acceptance failure.

mod config;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypwill::acceptance::{self, AcceptanceConfig, CriterionReport};
use hypwill::elastica::{self, ElasticaParams};
use hypwill::ellip::{self, Modulus};
use hypwill::flow::{self, RunManifest, Scheme, TimeStep, Verdict, WeightFunction};
use hypwill::{geomcheck, hyp2, io};
use serde::Serialize;

use config::{ExperimentConfig, ScenarioConfig};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "config", message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        CliError { code: 3, kind: "numerical", message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<hypwill::Error> for CliError {
    fn from(e: hypwill::Error) -> Self {
        use hypwill::Error::*;
        match e {
            Parameter(_) | Domain(_) | Io(_) => CliError::config(e.to_string()),
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "hypwill", version, about = "Willmore flow of surfaces of revolution via hyperbolic elastic flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow from a scenario datum; writes trajectory.csv, initial.csv,
    /// final.csv and manifest.json into the output directory and prints the
    /// manifest.
    Flow(FlowArgs),
    /// Parametrize one canonical elastica and report its residuals.
    Elastica(ElasticaArgs),
    /// Solve the figure-eight condition for a constraint parameter.
    Fig8(Fig8Args),
    /// Build a scenario curve and print its summary.
    Scenario(ScenarioArgs),
    /// Self-intersection report of a curve CSV (header `param,x,y`).
    Check(CheckArgs),
    /// Evaluate an elliptic integral or Jacobi function.
    SpecialEval(SpecialArgs),
    /// Run the acceptance criteria and print a pass/fail table.
    Acceptance(AcceptanceArgs),
}

#[derive(Args, Default)]
struct ScenarioFlags {
    /// catenary, geodesic, perturbed-geodesic, clifford-segment, clifford, fig8 or singular
    #[arg(long)]
    scenario: Option<String>,
    /// Catenary scale or perturbation amplitude.
    #[arg(long)]
    eps: Option<f64>,
    /// Catenary half-width.
    #[arg(long)]
    a: Option<f64>,
    /// Constraint parameter of the figure-eight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Center abscissa of a Clifford circle or geodesic.
    #[arg(long)]
    x: Option<f64>,
    /// Cap-circle parameter of the singular datum.
    #[arg(long)]
    h: Option<f64>,
    /// Number of nodes.
    #[arg(long)]
    n: Option<usize>,
    /// Amplitude of a seeded random perturbation of the datum.
    #[arg(long)]
    noise: Option<f64>,
    /// Random seed for perturbations (default 1).
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let sc: &mut ScenarioConfig = &mut cfg.scenario;
        if let Some(s) = &self.scenario {
            sc.name = s.clone();
        }
        sc.eps = self.eps.or(sc.eps);
        sc.a = self.a.or(sc.a);
        sc.lambda = self.lambda.or(sc.lambda);
        sc.x = self.x.or(sc.x);
        sc.h = self.h.or(sc.h);
        sc.n = self.n.or(sc.n);
        sc.noise = self.noise.unwrap_or(sc.noise);
        cfg.seed = self.seed.or(cfg.seed);
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightKind {
    Willmore,
    Elastic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    SemiImplicit,
    LinearlyImplicit,
}

#[derive(Args)]
struct FlowArgs {
    /// TOML experiment file with [scenario], [flow] and [output] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Start from a curve CSV instead of a scenario.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory (default hypwill-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Fixed time step (default: 0.1·h⁴·min|1/a|, recomputed every step).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Resample the datum to this many nodes.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_enum)]
    weight: Option<WeightKind>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeKind>,
    /// Record every k-th state in the trajectory.
    #[arg(long)]
    record_every: Option<usize>,
    /// Write every k-th recorded state as a curve CSV.
    #[arg(long)]
    snapshot_every: Option<usize>,
}

#[derive(Args)]
struct ElasticaArgs {
    /// Signed curvature maximum κ₀.
    #[arg(long, allow_hyphen_values = true)]
    kappa0: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Height of the base point.
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    /// Arc-length window; defaults to two periods (or ±3 without a period).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 800)]
    n: usize,
    /// Write the sampled curve as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig8Args {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 801)]
    n: usize,
    /// Write the segment as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Write the curve as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Near-touch tolerance in Euclidean distance.
    #[arg(long, default_value_t = geomcheck::DEFAULT_TOL)]
    tol: f64,
    /// Print the energy-criterion verdict instead of the intersection report.
    #[arg(long)]
    liyau: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecialFn {
    /// Complete first kind K(p).
    K,
    /// Complete second kind E(p).
    E,
    /// Complete third kind Π(α², p).
    Pi,
    /// Incomplete first kind F(φ, p).
    F,
    /// Incomplete second kind E(φ, p).
    EInc,
    /// Incomplete third kind Π(φ, α², p).
    PiInc,
    Am,
    Sn,
    Cn,
    Dn,
}

#[derive(Args)]
struct SpecialArgs {
    #[arg(long = "fn", value_enum)]
    function: SpecialFn,
    /// Modulus p ∈ [0, 1].
    #[arg(long)]
    p: f64,
    /// Amplitude φ or argument x.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Characteristic α² of the third kind.
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
}

#[derive(Args)]
struct AcceptanceArgs {
    #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
    seed: u64,
    /// Write one CSV per criterion and summary.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    emit(&serde_json::to_string_pretty(v).map_err(|e| CliError::numerical(e.to_string()))?)
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn cmd_flow(args: FlowArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    args.scenario.apply(&mut cfg);
    let f = &mut cfg.flow;
    if let Some(v) = args.max_steps {
        f.max_steps = v;
    }
    if let Some(v) = args.t_max {
        f.t_max = v;
    }
    if let Some(dt) = args.dt {
        f.time_step = TimeStep::Fixed { dt };
    }
    if let Some(v) = args.grad_tol {
        f.grad_tol = v;
    }
    if let Some(v) = args.resolution {
        f.resolution = v;
    }
    if let Some(w) = args.weight {
        f.weight = match w {
            WeightKind::Willmore => WeightFunction::Willmore,
            WeightKind::Elastic => WeightFunction::Elastic,
        };
    }
    if let Some(s) = args.scheme {
        f.scheme = match s {
            SchemeKind::SemiImplicit => Scheme::SemiImplicit,
            SchemeKind::LinearlyImplicit => Scheme::LinearlyImplicit,
        };
    }
    if let Some(v) = args.record_every {
        f.record_every = v;
    }
    if let Some(v) = args.out {
        cfg.output.dir = v;
    }
    if let Some(v) = args.snapshot_every {
        cfg.output.snapshot_every = v;
    }
    cfg.flow.validate().map_err(|e| CliError::config(e.to_string()))?;

    let u0 = match &args.input {
        Some(path) => io::load_curve_csv(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
        None => config::build_scenario(&cfg.scenario, cfg.seed())?.0,
    };
    let outcome = flow::run(&u0, &cfg.flow)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    flow::write_trajectory_csv(&outcome.trajectory, fs::File::create(dir.join("trajectory.csv"))?)?;
    io::save_curve_csv(&outcome.trajectory[0].curve, &dir.join("initial.csv"))?;
    io::save_curve_csv(&outcome.final_state.curve, &dir.join("final.csv"))?;
    if cfg.output.snapshot_every > 0 {
        for (k, s) in outcome.trajectory.iter().enumerate().step_by(cfg.output.snapshot_every) {
            io::save_curve_csv(&s.curve, &dir.join(format!("snapshot_{k:05}.csv")))?;
        }
    }
    let manifest = RunManifest::new(&cfg.flow, &outcome);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::numerical(e.to_string()))?;
    fs::write(dir.join("manifest.json"), format!("{text}\n"))?;
    emit(&text)?;
    if let Verdict::StepFailure { message } = &outcome.verdict {
        return Err(CliError::numerical(message.clone()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ElasticaOutput {
    params: ElasticaParams,
    window: [f64; 2],
    nodes: usize,
    speed_defect: f64,
    first_integral_spread: f64,
    ode_residual: f64,
    elastic_energy: f64,
    hyperbolic_length: f64,
}

fn cmd_elastica(args: ElasticaArgs) -> Result<(), CliError> {
    let p = ElasticaParams::new(args.kappa0, args.lambda, args.y)?;
    let h = p.half_period();
    let (lo, hi) = if h.is_finite() { (p.s_star - 2.0 * h, p.s_star + 2.0 * h) } else { (p.s_star - 3.0, p.s_star + 3.0) };
    let (lo, hi) = (args.from.unwrap_or(lo), args.to.unwrap_or(hi));
    if !(hi > lo) {
        return Err(CliError::config(format!("empty window [{lo}, {hi}]")));
    }
    let curve = elastica::parametrize(&p, lo, hi, args.n)?;
    let m = 4 * args.n;
    let s: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let out = ElasticaOutput {
        params: p,
        window: [lo, hi],
        nodes: curve.len(),
        speed_defect: elastica::speed_defect(&p, &s)?,
        first_integral_spread: elastica::first_integral_residual(&curve, args.lambda)?,
        ode_residual: flow::elastica_residual(&curve, args.lambda)?,
        elastic_energy: hyp2::elastic_energy(&curve)?,
        hyperbolic_length: hyp2::hyperbolic_length(&curve)?,
    };
    if let Some(path) = &args.out {
        io::save_curve_csv(&curve, path)?;
    }
    print_json(&out)
}

#[derive(Serialize)]
struct Fig8Output {
    lambda: f64,
    p: f64,
    r: f64,
    kappa0_sq: f64,
    condition_residual: f64,
    segment_energy: f64,
    half_period: f64,
    end_tangent: [f64; 2],
    angle_to_vertical: f64,
    closure_gap: f64,
}

fn cmd_fig8(args: Fig8Args) -> Result<(), CliError> {
    let p = elastica::figure_eight_solve(args.lambda)?;
    let t = elastica::figure_eight_tangent(&p)?;
    let k = p.half_period();
    let ends = elastica::evaluate(&p, &[-k, k])?;
    let out = Fig8Output {
        lambda: args.lambda,
        p: p.p,
        r: p.r,
        kappa0_sq: p.kappa0_sq,
        condition_residual: elastica::figure_eight_condition(p.p, args.lambda)?,
        segment_energy: elastica::figure_eight_segment_energy(&p),
        half_period: k,
        end_tangent: [t.tangent.vx, t.tangent.vy],
        angle_to_vertical: t.angle_to_vertical,
        closure_gap: (ends[0].0 - ends[1].0).hypot(ends[0].1 - ends[1].1),
    };
    if let Some(path) = &args.out {
        io::save_curve_csv(&elastica::figure_eight_segment(&p, args.n)?, path)?;
    }
    print_json(&out)
}

fn cmd_scenario(args: ScenarioArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    args.scenario.apply(&mut cfg);
    let (curve, exact) = config::build_scenario(&cfg.scenario, cfg.seed())?;
    if let Some(path) = &args.out {
        io::save_curve_csv(&curve, path)?;
    }
    print_json(&config::summarize(&cfg.scenario.name, &curve, exact)?)
}

fn cmd_check(args: CheckArgs) -> Result<(), CliError> {
    let curve = io::load_curve_csv(&args.input)
        .map_err(|e| CliError::config(format!("{}: {e}", args.input.display())))?;
    if args.liyau {
        print_json(&geomcheck::liyau_check(&curve)?)
    } else {
        print_json(&geomcheck::self_intersections(&curve, args.tol)?)
    }
}

#[derive(Serialize)]
struct SpecialOutput {
    function: &'static str,
    p: f64,
    x: Option<f64>,
    alpha2: Option<f64>,
    value: f64,
}

fn cmd_special(args: SpecialArgs) -> Result<(), CliError> {
    let m = Modulus::new(args.p)?;
    let x = || args.x.ok_or_else(|| CliError::config("this function needs --x"));
    let a2 = || args.alpha2.ok_or_else(|| CliError::config("this function needs --alpha2"));
    let (name, value) = match args.function {
        SpecialFn::K => ("K", ellip::complete_k(m)),
        SpecialFn::E => ("E", ellip::complete_e(m)),
        SpecialFn::Pi => ("Pi", ellip::complete_pi(a2()?, m)?),
        SpecialFn::F => ("F", ellip::ellint_f(x()?, m)),
        SpecialFn::EInc => ("E_inc", ellip::ellint_e(x()?, m)),
        SpecialFn::PiInc => ("Pi_inc", ellip::ellint_pi(x()?, a2()?, m)?),
        SpecialFn::Am => ("am", ellip::jacobi_am(x()?, m)),
        SpecialFn::Sn => ("sn", ellip::jacobi_sn_cn_dn(x()?, m).0),
        SpecialFn::Cn => ("cn", ellip::jacobi_sn_cn_dn(x()?, m).1),
        SpecialFn::Dn => ("dn", ellip::jacobi_sn_cn_dn(x()?, m).2),
    };
    print_json(&SpecialOutput { function: name, p: args.p, x: args.x, alpha2: args.alpha2, value })
}

fn cmd_acceptance(args: AcceptanceArgs) -> Result<(), CliError> {
    let cfg = AcceptanceConfig { seed: args.seed };
    let reports: Vec<CriterionReport> = acceptance::run_all(&cfg, |r| {
        let _ = emit(&r.line());
    });
    let failed = reports.iter().filter(|r| !r.passed).count();
    emit(&format!("{} of {} criteria passed", reports.len() - failed, reports.len()))?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        for r in &reports {
            fs::write(dir.join(format!("criterion_{:02}_{}.csv", r.id, r.name)), &r.csv)?;
        }
        let text = serde_json::to_string_pretty(&reports).map_err(|e| CliError::numerical(e.to_string()))?;
        fs::write(dir.join("summary.json"), format!("{text}\n"))?;
    }
    if failed > 0 {
        return Err(CliError { code: 4, kind: "acceptance", message: format!("{failed} criteria failed") });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Flow(a) => cmd_flow(a),
        Command::Elastica(a) => cmd_elastica(a),
        Command::Fig8(a) => cmd_fig8(a),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Check(a) => cmd_check(a),
        Command::SpecialEval(a) => cmd_special(a),
        Command::Acceptance(a) => cmd_acceptance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind, "message": e.message });
            eprintln!("{body}");
            ExitCode::from(e.code)
        }
    }
}
