//! `bivar`: generate, observe, restore and benchmark polarized bivariate
//! signals. Every run writes `manifest.json` next to its outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bivar::experiments::{
    aggregate, grid_search, run_campaign, runtime_table, write_best_csv, write_records_csv, write_runtime_csv,
    write_summary_csv, CampaignOptions, ExperimentPlan,
};
use bivar::forward::{simulate, ObservationBundle};
use bivar::io::{create_csv, write_json};
use bivar::signal::{generate_signal, r_snr, read_signal_csv, write_signal_csv, write_track_csv, GeneratorConfig};
use bivar::solver::{solve, write_trace_csv, Configuration, Problem, SolverConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "bivar", version, about = "Restoration of polarized bivariate signals")]
struct Cli {
    /// Repeat for per-iteration progress on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a signal and its ellipse parameter track.
    Generate(GenerateArgs),
    /// Observe a signal through whitened noisy channels.
    Observe(ObserveArgs),
    /// Restore a signal from an observation bundle.
    Solve(SolveArgs),
    /// Grid search of the lambdas for one configuration and cell of a plan.
    Grid(GridArgs),
    /// Run a full campaign: tuning, evaluation and summaries.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Record length (at least 64).
    #[arg(long, env = "BIVAR_N", value_parser = clap::value_parser!(u64).range(64..))]
    n: u64,
    #[arg(long, env = "BIVAR_SEED", default_value_t = 0)]
    seed: u64,
    /// Frequency band in cycles over the record.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [25.0, 35.0])]
    band: Vec<f64>,
    #[arg(long, env = "BIVAR_OUT")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ObserveArgs {
    /// Signal CSV (`n,u,v`).
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, env = "BIVAR_SIGMA")]
    sigma: f64,
    #[arg(long, env = "BIVAR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    #[arg(long, env = "BIVAR_OUT")]
    out: PathBuf,
}

/// Solver settings given on the command line; they take precedence over the
/// config file.
#[derive(Args, Debug, Default)]
struct SolverOverrides {
    #[arg(long, env = "BIVAR_LAMBDA1")]
    lambda1: Option<f64>,
    #[arg(long, env = "BIVAR_LAMBDA2")]
    lambda2: Option<f64>,
    #[arg(long, env = "BIVAR_RHO")]
    rho: Option<f64>,
    #[arg(long, env = "BIVAR_MAX_ITERS")]
    max_iters: Option<usize>,
    #[arg(long, env = "BIVAR_PRIMAL_TOL")]
    primal_tol: Option<f64>,
    #[arg(long, env = "BIVAR_DUAL_TOL")]
    dual_tol: Option<f64>,
}

impl SolverOverrides {
    fn apply(&self, cfg: &mut SolverConfig) {
        let set = |field: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut cfg.lambda1, self.lambda1);
        set(&mut cfg.lambda2, self.lambda2);
        set(&mut cfg.rho, self.rho);
        set(&mut cfg.primal_tol, self.primal_tol);
        set(&mut cfg.dual_tol, self.dual_tol);
        if let Some(v) = self.max_iters {
            cfg.max_outer_iters = v;
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Observation bundle directory.
    #[arg(long)]
    bundle: PathBuf,
    /// Solver config JSON; missing keys take their defaults.
    #[arg(long, env = "BIVAR_CONFIG")]
    config: Option<PathBuf>,
    /// Ground-truth signal CSV, for scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Seed of the initial iterate (default: the config's).
    #[arg(long, env = "BIVAR_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverOverrides,
    #[arg(long, env = "BIVAR_OUT")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Plan JSON (default plan when absent).
    #[arg(long, env = "BIVAR_PLAN")]
    plan: Option<PathBuf>,
    /// MLE, TS, COS or TACOS.
    #[arg(long, default_value = "TACOS")]
    configuration: Configuration,
    /// Record length (default: the plan's first).
    #[arg(long, env = "BIVAR_N", value_parser = clap::value_parser!(u64).range(64..))]
    n: Option<u64>,
    /// Noise scale (default: the plan's first).
    #[arg(long, env = "BIVAR_SIGMA")]
    sigma: Option<f64>,
    /// Base seed (default: the plan's).
    #[arg(long, env = "BIVAR_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "BIVAR_OUT")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Plan JSON (default plan when absent).
    #[arg(long, env = "BIVAR_PLAN")]
    plan: Option<PathBuf>,
    /// Base seed (default: the plan's).
    #[arg(long, env = "BIVAR_SEED")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "BIVAR_PARALLEL", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
    #[arg(long, env = "BIVAR_OUT")]
    out: PathBuf,
}

fn manifest(command: &str, parameters: Value, outputs: &[&str], results: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
        "outputs": outputs,
        "results": results,
    })
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn load_plan(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentPlan> {
    let mut plan = match path {
        Some(p) => ExperimentPlan::load(p).with_context(|| format!("reading plan {}", p.display()))?,
        None => ExperimentPlan::default(),
    };
    if let Some(s) = seed {
        plan.base_seed = s;
    }
    plan.validate()?;
    Ok(plan)
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let n = args.n as usize;
    let band = (args.band[0] / n as f64, args.band[1] / n as f64);
    let config = GeneratorConfig { band, ..GeneratorConfig::new(n, args.seed) };
    let (signal, track) = generate_signal(&config)?;
    prepare(&args.out)?;
    write_signal_csv(&args.out.join("signal.csv"), &signal)?;
    write_track_csv(&args.out.join("track.csv"), &track)?;
    let params = json!({ "n": n, "seed": args.seed, "band_cycles": args.band, "smoothing_samples": n as f64 / 20.0 });
    write_json(
        &args.out.join("manifest.json"),
        &manifest("generate", params, &["signal.csv", "track.csv"], json!({})),
    )?;
    Ok(())
}

fn observe(args: &ObserveArgs) -> Result<()> {
    let signal = read_signal_csv(&args.signal)?;
    let sim = simulate(&signal, args.sigma, args.channels, args.seed)?;
    prepare(&args.out)?;
    sim.bundle.write(&args.out)?;
    let clamped: usize = sim.clamped.iter().sum();
    if clamped > 0 {
        eprintln!("warning: noise spectrum clamped in {clamped} bin(s)");
    }
    let files: Vec<String> = (0..args.channels).map(ObservationBundle::channel_file).collect();
    let mut outputs = vec!["channels.json"];
    outputs.extend(files.iter().map(String::as_str));
    let params = json!({
        "signal": args.signal,
        "n": signal.len(),
        "sigma": args.sigma,
        "seed": args.seed,
        "channels": args.channels,
    });
    write_json(
        &args.out.join("manifest.json"),
        &manifest("observe", params, &outputs, json!({ "clamped_bins": sim.clamped })),
    )?;
    Ok(())
}

fn solve_cmd(args: &SolveArgs, verbose: u8) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => {
            bivar::io::read_json::<SolverConfig>(p).with_context(|| format!("reading config {}", p.display()))?
        }
        None => SolverConfig::default(),
    };
    args.solver.apply(&mut cfg);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let bundle = ObservationBundle::read(&args.bundle)?;
    let problem = Problem::from_bundle(&bundle)?;
    let truth = args.truth.as_deref().map(read_signal_csv).transpose()?;
    if let Some(t) = &truth {
        if t.len() != problem.len() {
            bail!("truth has {} samples, bundle has {}", t.len(), problem.len());
        }
    }

    let start = Instant::now();
    let sol = solve(&problem, &cfg)?;
    let runtime_s = start.elapsed().as_secs_f64();
    if verbose > 0 {
        for r in &sol.trace {
            eprintln!(
                "iter {:>4}  objective {:.6e}  primal {:.3e}  dual {:.3e}  cg {}",
                r.iter, r.objective, r.primal_err, r.dual_err, r.cg_iters
            );
        }
    }
    if !sol.converged {
        eprintln!(
            "warning: not converged after {} iterations (primal {:.3e}, dual {:.3e})",
            sol.state.iteration, sol.state.primal_error, sol.state.dual_error
        );
    }
    let score = truth.as_ref().map(|t| r_snr(t, &sol.signal)).transpose()?;

    prepare(&args.out)?;
    write_signal_csv(&args.out.join("restored.csv"), &sol.signal)?;
    write_trace_csv(&args.out.join("trace.csv"), &sol.trace)?;
    let params = json!({
        "bundle": args.bundle,
        "config": args.config,
        "truth": args.truth,
        "configuration": cfg.configuration(),
        "solver": cfg,
        "bundle_seed": bundle.manifest.seed,
        "bundle_sigma": bundle.manifest.sigma,
    });
    let results = json!({
        "converged": sol.converged,
        "outer_iters": sol.state.iteration,
        "total_cg_iters": sol.total_cg_iterations,
        "primal_error": finite_or_null(sol.state.primal_error),
        "dual_error": finite_or_null(sol.state.dual_error),
        "r_snr_db": score,
        "runtime_s": runtime_s,
    });
    write_json(&args.out.join("manifest.json"), &manifest("solve", params, &["restored.csv", "trace.csv"], results))?;
    Ok(())
}

/// JSON has no infinities; the direct route reports none for the ADMM errors.
fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn grid(args: &GridArgs) -> Result<()> {
    let plan = load_plan(args.plan.as_deref(), args.seed)?;
    let n = args.n.map_or(plan.n_values[0], |n| n as usize);
    let sigma = args.sigma.unwrap_or(plan.sigma_values[0]);
    let probe = ExperimentPlan { n_values: vec![n], sigma_values: vec![sigma], ..plan.clone() };
    probe.validate()?;
    let result = grid_search(&plan, args.configuration, n, sigma)?;
    prepare(&args.out)?;
    let path = args.out.join("grid.csv");
    let mut w = create_csv(&path)?;
    w.write_record(["config", "n", "sigma", "lambda1", "lambda2", "mean_r_snr_db", "count"])?;
    for p in &result.table {
        w.serialize((args.configuration, n, sigma, p.lambda1, p.lambda2, p.mean_r_snr_db, p.count))?;
    }
    w.flush().with_context(|| path.display().to_string())?;
    let params =
        json!({ "plan": plan, "plan_file": args.plan, "configuration": args.configuration, "n": n, "sigma": sigma });
    let results = json!({ "best": { "lambda1": result.best.lambda1, "lambda2": result.best.lambda2,
        "mean_r_snr_db": result.best.mean_r_snr_db, "count": result.best.count } });
    write_json(&args.out.join("manifest.json"), &manifest("grid", params, &["grid.csv"], results))?;
    eprintln!(
        "best {} at lambda1 = {}, lambda2 = {}: {:.3} dB",
        args.configuration, result.best.lambda1, result.best.lambda2, result.best.mean_r_snr_db
    );
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let plan = load_plan(args.plan.as_deref(), args.seed)?;
    let threads = args.parallel as usize;
    prepare(&args.out)?;
    let start = Instant::now();
    let campaign = run_campaign(&plan, &CampaignOptions { threads })?;
    let runtime_s = start.elapsed().as_secs_f64();
    let out = &args.out;
    write_records_csv(&out.join("results.csv"), &campaign.records)?;
    write_records_csv(&out.join("tuning.csv"), &campaign.tuning)?;
    write_summary_csv(&out.join("summary.csv"), &aggregate(&campaign.records))?;
    write_runtime_csv(&out.join("runtime.csv"), &runtime_table(&campaign.records))?;
    write_best_csv(&out.join("best.csv"), &campaign.grids)?;
    let unconverged = campaign.records.iter().filter(|r| !r.converged).count();
    if !campaign.failures.is_empty() {
        eprintln!("warning: {} run(s) failed; see manifest.json", campaign.failures.len());
    }
    let params = json!({ "plan": plan, "plan_file": args.plan, "parallel": threads });
    let results = json!({
        "evaluation_runs": campaign.records.len(),
        "tuning_runs": campaign.tuning.len(),
        "unconverged_runs": unconverged,
        "failures": campaign.failures,
        "runtime_s": runtime_s,
    });
    let outputs = ["results.csv", "tuning.csv", "summary.csv", "runtime.csv", "best.csv"];
    write_json(&out.join("manifest.json"), &manifest("bench", params, &outputs, results))?;
    Ok(())
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Observe(a) => observe(a),
        Command::Solve(a) => solve_cmd(a, cli.verbose),
        Command::Grid(a) => grid(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}
