use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chambolle_pock::solver::{validate_params, ParamStatus, SolverParams};
use chambolle_pock_harness::config::ParamsConfig;
use chambolle_pock_harness::experiment::{build_problem, certify_iterates, execute, resolve_params, write_outputs};
use chambolle_pock_harness::plotdata::emit_plotdata;
use chambolle_pock_harness::rate::{fit_rate, read_series};
use chambolle_pock_harness::sweep::{run_sweep, sweep_exit_code, write_sweep, CellOutcome};
use chambolle_pock_harness::trajectory::read_iterates;
use chambolle_pock_harness::{ExperimentConfig, HarnessError, Outcome, Overrides, Result, RunResult};
use clap::{Args, Parser, Subcommand};

/// Certified Chambolle-Pock experiments.
///
/// Exit codes: 0 all asserted certificates pass (or the run is observational),
/// 1 a certificate failed, 2 usage or config error.
#[derive(Parser)]
#[command(name = "cpock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and certify every iteration.
    Solve(RunArgs),
    /// Run every (theta, safety) cell of the [sweep] grid.
    Sweep(RunArgs),
    /// Recompute certificates for iterates stored in a CSV file.
    Certify {
        #[command(flatten)]
        run: RunArgs,
        /// Iterates CSV with columns k, x0.., y0.. (as written by `solve`).
        #[arg(long)]
        iterates: PathBuf,
    },
    /// Fit the decay rate of a certificate column on log-log axes.
    Rate {
        /// Certificate CSV written by `solve`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "ergodic_gap")]
        column: String,
        #[arg(long, default_value_t = 50)]
        kmin: usize,
        /// Defaults to the last row.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Write two-column data files and a gnuplot script for a certificate CSV.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify step sizes against the admissible region.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Operator norm bound, used when no config is given.
        #[arg(long)]
        norm: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    iters: Option<usize>,
    /// Problem generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run invalid params anyway; certificates become observational.
    #[arg(long)]
    override_invalid: bool,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            theta: self.params.theta,
            tau: self.params.tau,
            sigma: self.params.sigma,
            safety: self.params.safety,
            ratio: self.params.ratio,
            iters: self.iters,
            seed: self.seed,
            out: self.out.clone(),
            override_invalid: self.override_invalid,
        })?;
        Ok(cfg)
    }
}

fn report(result: &RunResult) -> i32 {
    let s = &result.summary;
    let c = &s.certificates;
    println!(
        "{} theta={} product={} status={} iterations={} outcome={:?}",
        s.problem,
        s.params.theta,
        s.status.product,
        s.status.class.as_str(),
        s.iterations,
        s.outcome
    );
    println!(
        "descent {}/{}  lower bound {}/{}  ergodic rate {}/{}",
        c.descent.pass,
        c.descent.pass + c.descent.fail,
        c.lower_bound.pass,
        c.lower_bound.pass + c.lower_bound.fail,
        c.ergodic_rate.pass,
        c.ergodic_rate.pass + c.ergodic_rate.fail
    );
    if s.outcome == Outcome::Fail {
        if let Some((k, check)) = &c.first_failure {
            eprintln!("certificate failure: {check} at k = {k}");
        }
    }
    s.outcome.exit_code()
}

fn solve(args: &RunArgs) -> Result<i32> {
    let cfg = args.load()?;
    let prep = build_problem(&cfg.problem, &cfg.run)?;
    let result = execute(&prep, &cfg, cfg.output.iterates)?;
    write_outputs(&cfg.output.dir, &cfg, &result)?;
    Ok(report(&result))
}

fn sweep(args: &RunArgs) -> Result<i32> {
    let cfg = args.load()?;
    let prep = build_problem(&cfg.problem, &cfg.run)?;
    let rows = run_sweep(&prep, &cfg)?;
    write_sweep(&cfg.output.dir, &rows)?;
    for r in &rows {
        let status = r.status.map_or("-", |s| s.as_str());
        println!("theta={} safety={} status={status} outcome={:?}", r.theta, r.safety, r.outcome);
        if let Some(e) = &r.error {
            eprintln!("  theta={} safety={}: {e}", r.theta, r.safety);
        }
        if r.outcome == CellOutcome::Fail {
            if let Some(f) = &r.first_failure {
                eprintln!("  certificate failure: {f}");
            }
        }
    }
    Ok(sweep_exit_code(&rows))
}

fn certify(args: &RunArgs, iterates: &Path) -> Result<i32> {
    let cfg = args.load()?;
    let prep = build_problem(&cfg.problem, &cfg.run)?;
    let z = read_iterates(iterates, prep.problem.primal_dim(), prep.problem.dual_dim())?;
    let result = certify_iterates(&prep, &cfg, &z)?;
    write_outputs(&cfg.output.dir, &cfg, &result)?;
    Ok(report(&result))
}

fn validate(config: &Option<PathBuf>, norm: Option<f64>, p: &ParamArgs) -> Result<i32> {
    let (mut params_cfg, norm) = match (config, norm) {
        (Some(path), None) => {
            let cfg = ExperimentConfig::load(path)?;
            let prep = build_problem(&cfg.problem, &cfg.run)?;
            (cfg.params, prep.problem.operator.norm_bound())
        }
        (None, Some(n)) => (ParamsConfig::default(), n),
        _ => return Err(HarnessError::Usage("give exactly one of --config and --norm".into())),
    };
    params_cfg.apply(&Overrides {
        theta: p.theta,
        tau: p.tau,
        sigma: p.sigma,
        safety: p.safety,
        ratio: p.ratio,
        ..Overrides::default()
    });
    let params = resolve_params(&params_cfg, norm)?;
    let status = validate_params(&params);
    #[derive(serde::Serialize)]
    struct Report<'a> {
        params: &'a SolverParams,
        status: &'a ParamStatus,
    }
    println!("{}", serde_json::to_string_pretty(&Report { params: &params, status: &status })?);
    Ok(if status.is_valid() { 0 } else { 1 })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Certify { run, iterates } => certify(&run, &iterates),
        Command::Rate { input, column, kmin, kmax } => {
            let series = read_series(&input, &column)?;
            let kmax = kmax.unwrap_or_else(|| series.iter().map(|p| p.0).max().unwrap_or(0));
            let fit = fit_rate(&series, (kmin, kmax))?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(0)
        }
        Command::Plotdata { input, out } => {
            for path in emit_plotdata(&input, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Validate { config, norm, params } => validate(&config, norm, &params),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
