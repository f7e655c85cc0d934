//! Command line tool for nonparametric estimation in the uniform
//! deconvolution model: reproducible sampling, censoring transforms,
//! maximum likelihood fits with optimality certificates, smooth-functional
//! estimates, and the Monte Carlo variance-curve experiments.
//!
//! Every command writes its outputs plus a JSON manifest capturing the
//! resolved configuration, seed, library version, and output digests;
//! re-running a command with the same configuration reproduces the outputs
//! bit-exactly. Exit codes: 0 ok, 1 usage, 2 data, 3 numerical.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use unidecon::censor::{compute_m_n, to_current_status, to_interval_censoring, CensorError};
use unidecon::dist::{sample_fixed, sample_mixed, ModelKind};
use unidecon::io;
use unidecon::mc::{
    an_bn_diagnostics, simulate_variance_curve, NoiseModel, SimConfig,
};
use unidecon::mle::{
    cusum_pava_mle, icm_solve_fixed, icm_solve_mixed, loglik_fixed, loglik_mixed, IcmConfig,
    IcmSolution, MleError,
};
use unidecon::smoothfn::{
    asymp_variance_kernel, kernel_cdf_estimate, kernel_density_estimate, mean_estimate,
    plugin_variance_mean, smooth_variance_mean, KernelSpec, SmoothTarget,
};
use unidecon::{DistributionModel, ObservationSet, SeedSpec, StepDistribution};

use manifest::RunManifest;

const SEED_ENV: &str = "UNIDECON_SEED";

#[derive(Parser)]
#[command(
    name = "unidecon",
    version,
    about = "Nonparametric maximum likelihood for uniform deconvolution",
    long_about = "Estimation of a distribution observed through additive uniform noise:\n\
                  sampling, interval-censoring transforms, isotonic and iterative convex\n\
                  minorant solvers, smooth functionals, and Monte Carlo variance curves.\n\
                  Distribution specs: truncexp:0:UPPER, uniform:LO:HI, degenerate:AT.\n\
                  The UNIDECON_SEED environment variable supplies a default master seed."
)]
struct Cli {
    /// Cap the worker thread count (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a reproducible sample from the fixed or mixed model.
    Sample(SampleArgs),
    /// Rewrite a fixed-model sample as interval censoring data.
    Transform(TransformArgs),
    /// Fit the nonparametric maximum likelihood estimator.
    Estimate(EstimateArgs),
    /// Smooth-functional estimates with plug-in and theoretical variances.
    Functionals(FunctionalsArgs),
    /// Monte Carlo variance curves against the two theory curves.
    Simulate(SimulateArgs),
    /// Log-log rate diagnostics of the local expansion terms.
    DiagnoseRates(DiagnoseRatesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelFlag {
    Fixed,
    Mixed,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "fixed")]
    model: ModelFlag,
    /// Hidden-variable distribution, e.g. truncexp:0:2.
    #[arg(long)]
    f0: String,
    /// Exposure-length distribution (mixed model only), e.g. uniform:0.5:1.5.
    #[arg(long)]
    fe: Option<String>,
    #[arg(long)]
    n: usize,
    /// Master seed; defaults to UNIDECON_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index within the master seed.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformMode {
    /// Current status: (y, delta) pairs.
    Cs,
    /// Interval censoring case m: (y1, bucket) pairs.
    Icm,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: TransformMode,
    /// Number of inspection times for --mode icm; default fits the data.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Force the one-step current-status solver on fixed-model data.
    #[arg(long)]
    force_cs: bool,
    /// Exit 0 even when the certificate is not satisfied.
    #[arg(long)]
    allow_unconverged: bool,
    #[arg(long, default_value_t = 1e-8)]
    fenchel_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionalFlag {
    Mean,
}

#[derive(Args)]
struct FunctionalsArgs {
    /// Sample CSV to fit the estimator on.
    #[arg(long)]
    input: PathBuf,
    /// Global functional to estimate (currently the mean).
    #[arg(long, value_enum, conflicts_with_all = ["density", "cdf"])]
    functional: Option<FunctionalFlag>,
    /// Kernel density estimate at T with bandwidth H.
    #[arg(long, num_args = 2, value_names = ["T", "H"], conflicts_with = "cdf")]
    density: Option<Vec<f64>>,
    /// Kernel-smoothed distribution estimate at T with bandwidth H.
    #[arg(long, num_args = 2, value_names = ["T", "H"])]
    cdf: Option<Vec<f64>>,
    /// True hidden distribution for the theoretical variance column.
    #[arg(long)]
    f0: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// key=value config file (model, f0, fe, n, replications, grid,
    /// master_seed, fenchel_tolerance, max_iterations).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelFlag>,
    #[arg(long)]
    f0: Option<String>,
    #[arg(long)]
    fe: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    /// Evaluation grid START:STEP:END (inclusive).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseRatesArgs {
    #[arg(long)]
    f0: String,
    /// Comma-separated sample sizes.
    #[arg(long)]
    n_values: String,
    #[arg(long)]
    t0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_offset: f64,
    #[arg(long)]
    replications: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        // Results are independent of the pool size; this only caps workers.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let started = Instant::now();
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args, started),
        Command::Transform(args) => cmd_transform(args, started),
        Command::Estimate(args) => cmd_estimate(args, started),
        Command::Functionals(args) => cmd_functionals(args, started),
        Command::Simulate(args) => cmd_simulate(args, started),
        Command::DiagnoseRates(args) => cmd_diagnose_rates(args, started),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn parse_model(spec: &str) -> Result<DistributionModel, CliError> {
    DistributionModel::parse_spec(spec).map_err(|e| CliError::Usage(e.to_string()))
}

fn master_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be a u64, got `{raw}`"))),
        Err(_) => Ok(0),
    }
}

fn read_sample(path: &Path) -> Result<ObservationSet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    io::parse_sample(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_sample(args: SampleArgs, started: Instant) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let f0 = parse_model(&args.f0)?;
    let seed = master_seed(args.seed)?;
    let spec = SeedSpec::new(seed, args.stream);
    let obs = match args.model {
        ModelFlag::Fixed => {
            if args.fe.is_some() {
                return Err(CliError::Usage("--fe only applies to --model mixed".to_string()));
            }
            sample_fixed(&f0, args.n, spec).map_err(|e| CliError::Numerical(e.to_string()))?
        }
        ModelFlag::Mixed => {
            let fe_spec = args
                .fe
                .as_deref()
                .ok_or_else(|| CliError::Usage("--model mixed requires --fe".to_string()))?;
            let fe = parse_model(fe_spec)?;
            sample_mixed(&f0, &fe, args.n, spec)
                .map_err(|e| CliError::Numerical(e.to_string()))?
        }
    };
    write_output(&args.out, &io::write_sample(&obs))?;
    RunManifest::new("sample", started)
        .config(json!({
            "model": match args.model { ModelFlag::Fixed => "fixed", ModelFlag::Mixed => "mixed" },
            "f0": f0.spec_string(),
            "fe": args.fe,
            "n": args.n,
            "stream": args.stream,
        }))
        .seed(seed)
        .write(&args.out)
}

fn cmd_transform(args: TransformArgs, started: Instant) -> Result<(), CliError> {
    let obs = read_sample(&args.input)?;
    if obs.kind() != ModelKind::Fixed {
        return Err(CliError::Usage(
            "censoring transforms are defined for fixed-model samples".to_string(),
        ));
    }
    let (contents, resolved_m) = match args.mode {
        TransformMode::Cs => {
            let data = to_current_status(&obs).map_err(|e| CliError::Data(e.to_string()))?;
            if data.inconsistent_count() > 0 {
                eprintln!(
                    "warning: {} observation(s) above 2 are inconsistent with unit-support data",
                    data.inconsistent_count()
                );
            }
            (io::write_current_status(&data), None)
        }
        TransformMode::Icm => {
            let needed = obs
                .s_values()
                .iter()
                .fold(0.0f64, |a, &b| a.max(b))
                .ceil() as usize;
            let m = args.m.unwrap_or(needed.saturating_sub(1).max(1));
            let data = to_interval_censoring(&obs, m).map_err(|e| match e {
                CensorError::BucketCountTooSmall { .. } => CliError::Usage(e.to_string()),
                other => CliError::Data(other.to_string()),
            })?;
            (io::write_interval_censored(&data), Some(m))
        }
    };
    write_output(&args.out, &contents)?;
    RunManifest::new("transform", started)
        .config(json!({
            "input": args.input.display().to_string(),
            "mode": match args.mode { TransformMode::Cs => "cs", TransformMode::Icm => "icm" },
            "m": resolved_m,
        }))
        .write(&args.out)
}

/// The fitted estimator plus solver diagnostics for the JSONL record.
struct FitOutcome {
    distribution: StepDistribution,
    solver: &'static str,
    converged: bool,
    diagnostics: serde_json::Value,
}

fn fit_sample(
    obs: &ObservationSet,
    cfg: &IcmConfig,
    force_cs: bool,
) -> Result<FitOutcome, CliError> {
    let from_icm = |sol: IcmSolution, loglik: f64| FitOutcome {
        converged: sol.converged,
        diagnostics: json!({
            "solver": "icm",
            "iterations": sol.iterations,
            "fenchel_max_tail": sol.fenchel.max_tail_sum,
            "fenchel_inner": sol.fenchel.inner_product,
            "fenchel_satisfied": sol.fenchel.satisfied,
            "loglik": loglik,
            "converged": sol.converged,
        }),
        solver: "icm",
        distribution: sol.distribution,
    };
    match obs.kind() {
        ModelKind::Mixed => {
            if force_cs {
                return Err(CliError::Usage(
                    "--force-cs applies to fixed-model samples".to_string(),
                ));
            }
            let sol =
                icm_solve_mixed(obs, cfg).map_err(|e| CliError::Numerical(e.to_string()))?;
            let ll = loglik_mixed(&sol.distribution, obs);
            Ok(from_icm(sol, ll))
        }
        ModelKind::Fixed => {
            let use_pava = force_cs || compute_m_n(obs).is_err();
            if use_pava {
                let data =
                    to_current_status(obs).map_err(|e| CliError::Data(e.to_string()))?;
                if data.inconsistent_count() > 0 {
                    eprintln!(
                        "warning: {} observation(s) above 2; the one-step solver assumes unit-support data",
                        data.inconsistent_count()
                    );
                }
                let est = cusum_pava_mle(&data).map_err(|e| CliError::Numerical(e.to_string()))?;
                let ll = loglik_fixed(&est, obs);
                Ok(FitOutcome {
                    converged: true,
                    diagnostics: json!({
                        "solver": "pava",
                        "iterations": 0,
                        "loglik": ll,
                        "converged": true,
                    }),
                    solver: "pava",
                    distribution: est,
                })
            } else {
                let sol = icm_solve_fixed(obs, cfg).map_err(|e| match e {
                    MleError::Censor(censor) => CliError::Data(censor.to_string()),
                    other => CliError::Numerical(other.to_string()),
                })?;
                let ll = loglik_fixed(&sol.distribution, obs);
                Ok(from_icm(sol, ll))
            }
        }
    }
}

fn cmd_estimate(args: EstimateArgs, started: Instant) -> Result<(), CliError> {
    let obs = read_sample(&args.input)?;
    let cfg = IcmConfig {
        fenchel_tolerance: args.fenchel_tol,
        max_iterations: args.max_iterations,
        ..IcmConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let fit = fit_sample(&obs, &cfg, args.force_cs)?;
    write_output(&args.out, &io::write_step(&fit.distribution))?;
    let diag_path = args.out.with_extension("diagnostics.jsonl");
    write_output(&diag_path, &format!("{}\n", fit.diagnostics))?;
    RunManifest::new("estimate", started)
        .config(json!({
            "input": args.input.display().to_string(),
            "solver": fit.solver,
            "force_cs": args.force_cs,
            "fenchel_tol": args.fenchel_tol,
            "max_iterations": args.max_iterations,
        }))
        .extra_output(&diag_path)
        .write(&args.out)?;
    if fit.converged || args.allow_unconverged {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "estimator did not satisfy the optimality certificate; rerun with --allow-unconverged to keep it".to_string(),
        ))
    }
}

fn cmd_functionals(args: FunctionalsArgs, started: Instant) -> Result<(), CliError> {
    let obs = read_sample(&args.input)?;
    let f0 = args.f0.as_deref().map(parse_model).transpose()?;
    let fit = fit_sample(&obs, &IcmConfig::default(), false)?;
    if !fit.converged {
        return Err(CliError::Numerical(
            "estimator did not converge; functionals would be unreliable".to_string(),
        ));
    }
    let est = &fit.distribution;
    let (label, row) = if args.functional == Some(FunctionalFlag::Mean) {
        let estimate = mean_estimate(est);
        if estimate.renormalized {
            eprintln!(
                "warning: estimator total mass {} below 1; mean computed on normalized masses",
                estimate.total_mass
            );
        }
        let theory = match &f0 {
            Some(f0) => {
                smooth_variance_mean(f0).map_err(|e| CliError::Numerical(e.to_string()))?
            }
            None => f64::NAN,
        };
        ("mean", (estimate.value, plugin_variance_mean(est), theory))
    } else if let Some(th) = &args.density {
        let (t, h) = (th[0], th[1]);
        let k = KernelSpec::triweight(h).map_err(|e| CliError::Usage(e.to_string()))?;
        let plug = est.evaluate(t) * (1.0 - est.evaluate(t)) * unidecon::smoothfn::kernel_constants(&k).1;
        let theory = match &f0 {
            Some(f0) => asymp_variance_kernel(f0, t, SmoothTarget::Density, &k),
            None => f64::NAN,
        };
        ("density", (kernel_density_estimate(est, &k, t), plug, theory))
    } else if let Some(th) = &args.cdf {
        let (t, h) = (th[0], th[1]);
        let k = KernelSpec::triweight(h).map_err(|e| CliError::Usage(e.to_string()))?;
        let plug = est.evaluate(t) * (1.0 - est.evaluate(t)) * unidecon::smoothfn::kernel_constants(&k).0;
        let theory = match &f0 {
            Some(f0) => asymp_variance_kernel(f0, t, SmoothTarget::Cdf, &k),
            None => f64::NAN,
        };
        ("cdf", (kernel_cdf_estimate(est, &k, t), plug, theory))
    } else {
        return Err(CliError::Usage(
            "choose one of --functional mean, --density T H, --cdf T H".to_string(),
        ));
    };
    let mut out = String::from("functional,estimate,plugin_variance,theory_variance\n");
    out.push_str(&format!(
        "{},{},{},{}\n",
        label,
        io::fmt_float(row.0),
        io::fmt_float(row.1),
        io::fmt_float(row.2)
    ));
    write_output(&args.out, &out)?;
    RunManifest::new("functionals", started)
        .config(json!({
            "input": args.input.display().to_string(),
            "functional": label,
            "density": args.density,
            "cdf": args.cdf,
            "f0": args.f0,
        }))
        .write(&args.out)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, step, end] = parts.as_slice() else {
        return Err(CliError::Usage(format!("grid must be START:STEP:END, got `{spec}`")));
    };
    let bad = |what: &str| CliError::Usage(format!("bad grid {what} in `{spec}`"));
    let start: f64 = start.parse().map_err(|_| bad("start"))?;
    let step: f64 = step.parse().map_err(|_| bad("step"))?;
    let end: f64 = end.parse().map_err(|_| bad("end"))?;
    // The negated comparison also rejects a NaN step.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(step > 0.0) || end < start {
        return Err(bad("range"));
    }
    let count = ((end - start) / step).round() as usize;
    Ok((0..=count).map(|i| start + step * i as f64).filter(|&t| t <= end + 1e-12).collect())
}

#[derive(Default)]
struct SimOverrides {
    model: Option<String>,
    f0: Option<String>,
    fe: Option<String>,
    n: Option<usize>,
    replications: Option<usize>,
    grid: Option<String>,
    master_seed: Option<u64>,
    fenchel_tolerance: Option<f64>,
    max_iterations: Option<usize>,
}

fn parse_sim_config_file(path: &Path) -> Result<SimOverrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = SimOverrides::default();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Data(format!("{}:{}: expected key=value", path.display(), idx + 1))
        })?;
        let value = value.trim().to_string();
        let parse_err = |what: &str| {
            CliError::Data(format!("{}:{}: bad {what} `{value}`", path.display(), idx + 1))
        };
        match key.trim() {
            "model" => out.model = Some(value),
            "f0" => out.f0 = Some(value),
            "fe" => out.fe = Some(value),
            "n" => out.n = Some(value.parse().map_err(|_| parse_err("n"))?),
            "replications" => {
                out.replications = Some(value.parse().map_err(|_| parse_err("replications"))?)
            }
            "grid" => out.grid = Some(value),
            "master_seed" => {
                out.master_seed = Some(value.parse().map_err(|_| parse_err("master_seed"))?)
            }
            "fenchel_tolerance" => {
                out.fenchel_tolerance =
                    Some(value.parse().map_err(|_| parse_err("fenchel_tolerance"))?)
            }
            "max_iterations" => {
                out.max_iterations =
                    Some(value.parse().map_err(|_| parse_err("max_iterations"))?)
            }
            other => {
                return Err(CliError::Data(format!(
                    "{}:{}: unknown key `{other}`",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    Ok(out)
}

fn cmd_simulate(args: SimulateArgs, started: Instant) -> Result<(), CliError> {
    // Precedence: flags override file values override built-in defaults.
    let file = match &args.config {
        Some(path) => parse_sim_config_file(path)?,
        None => SimOverrides::default(),
    };
    let model = args
        .model
        .map(|m| match m {
            ModelFlag::Fixed => "fixed".to_string(),
            ModelFlag::Mixed => "mixed".to_string(),
        })
        .or(file.model)
        .unwrap_or_else(|| "fixed".to_string());
    let f0_spec = args.f0.or(file.f0).unwrap_or_else(|| "truncexp:0:2".to_string());
    let fe_spec = args.fe.or(file.fe);
    let n = args.n.or(file.n).unwrap_or(1000);
    let replications = args.replications.or(file.replications).unwrap_or(1000);
    let grid_spec = args.grid.or(file.grid).unwrap_or_else(|| "0.1:0.1:1.9".to_string());
    let seed = master_seed(args.seed.or(file.master_seed))?;
    let f0 = parse_model(&f0_spec)?;
    let noise = match model.as_str() {
        "fixed" => {
            if fe_spec.is_some() {
                return Err(CliError::Usage("fe is only used by the mixed model".to_string()));
            }
            NoiseModel::Fixed
        }
        "mixed" => {
            let fe_spec = fe_spec
                .as_deref()
                .ok_or_else(|| CliError::Usage("mixed model requires fe".to_string()))?;
            NoiseModel::Mixed(parse_model(fe_spec)?)
        }
        other => return Err(CliError::Usage(format!("unknown model `{other}`"))),
    };
    let solver = IcmConfig {
        fenchel_tolerance: file.fenchel_tolerance.unwrap_or(1e-8),
        max_iterations: file.max_iterations.unwrap_or(500),
        ..IcmConfig::default()
    };
    let cfg = SimConfig {
        noise,
        f0,
        n,
        replications,
        grid: parse_grid(&grid_spec)?,
        master_seed: seed,
        solver,
    };
    let curve = simulate_variance_curve(&cfg).map_err(|e| CliError::Numerical(e.to_string()))?;
    if curve.flagged {
        eprintln!(
            "warning: {} of {} replications failed to converge (above the 1% threshold)",
            curve.failures, cfg.replications
        );
    }
    write_output(&args.out, &io::write_variance_curve(&curve))?;
    RunManifest::new("simulate", started)
        .config(json!({
            "model": model,
            "f0": f0_spec,
            "fe": fe_spec,
            "n": n,
            "replications": replications,
            "grid": grid_spec,
            "failures": curve.failures,
            "fenchel_tolerance": cfg.solver.fenchel_tolerance,
            "max_iterations": cfg.solver.max_iterations,
        }))
        .seed(seed)
        .write(&args.out)
}

fn cmd_diagnose_rates(args: DiagnoseRatesArgs, started: Instant) -> Result<(), CliError> {
    let f0 = parse_model(&args.f0)?;
    let n_values: Vec<usize> = args
        .n_values
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad sample size `{part}`")))
        })
        .collect::<Result<_, _>>()?;
    let seed = master_seed(args.seed)?;
    let diag = an_bn_diagnostics(&f0, &n_values, args.t0, args.t_offset, args.replications, seed)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_output(&args.out, &io::write_rate_diagnostics(&diag))?;
    RunManifest::new("diagnose-rates", started)
        .config(json!({
            "f0": args.f0,
            "n_values": n_values,
            "t0": args.t0,
            "t_offset": args.t_offset,
            "replications": args.replications,
            "fitted_slope_an": diag.fitted_slope_an,
            "fitted_slope_bn": diag.fitted_slope_bn,
            "skipped": diag.skipped,
        }))
        .seed(seed)
        .write(&args.out)
}
