//! Building problems from configs, running them, and summarizing certificates.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chambolle_pock::certificates::{
    CertificateLog, CertificateMode, CertificateRow, CertificateSummary, Certifier, Eta, KktPoint,
};
use chambolle_pock::hilbert::{DenseMatrix, LinearOperator, PPoint, Vector};
use chambolle_pock::problems::{
    kkt_by_long_run, make_lasso, make_tv1d, piecewise_constant_signal, random_matrix, random_point,
    random_quadratic, Problem,
};
use chambolle_pock::prox::ProxFn;
use chambolle_pock::solver::{
    run_with_observer, validate_params, ParamClass, ParamStatus, RunOptions, SolverParams, StopReason, Storage,
    StoppingRule,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, FunctionConfig, ParamsConfig, ProblemConfig, RunConfig, StartPoint};
use crate::error::{HarnessError, Result};
use crate::rate::{fit_rate, RateFit};
use crate::trajectory::{write_certificates, write_iterates};

/// A problem together with the KKT point its certificates are measured against.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub problem: Problem,
    pub kkt: KktPoint,
    /// `closed_form` or `long_run`.
    pub kkt_source: &'static str,
}

fn function(fc: &FunctionConfig, dim: usize) -> Result<ProxFn> {
    let center = fc.center.clone().map(Vector::new);
    Ok(ProxFn::from_key(&fc.kind, fc.lambda, center, dim)?)
}

fn long_run(problem: Problem, run: &RunConfig) -> Result<Prepared> {
    let params = SolverParams::at_safety(1.0, problem.operator.norm_bound(), 0.99, 1.0)?;
    let kkt = kkt_by_long_run(&problem, &params, run.kkt_iters)?;
    Ok(Prepared {
        problem,
        kkt,
        kkt_source: "long_run",
    })
}

pub fn build_problem(cfg: &ProblemConfig, run: &RunConfig) -> Result<Prepared> {
    match cfg {
        ProblemConfig::Quadratic { rows, cols, seed } => {
            let problem = random_quadratic(*rows, *cols, *seed)?;
            let kkt = problem.kkt.clone().expect("quadratic problems carry a closed-form KKT point");
            Ok(Prepared {
                problem,
                kkt,
                kkt_source: "closed_form",
            })
        }
        ProblemConfig::Lasso { rows, cols, seed, lambda } => {
            let a = LinearOperator::dense(random_matrix(*rows, *cols, *seed)?);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let b = chambolle_pock::problems::random_vector(*rows, &mut rng);
            let problem = make_lasso(a, b, *lambda)?.with_metadata("seed", seed);
            long_run(problem, run)
        }
        ProblemConfig::Tv1d { n, pieces, noise, seed, lambda } => {
            let signal = piecewise_constant_signal(*n, *pieces, *noise, *seed);
            let problem = make_tv1d(signal, *lambda)?.with_metadata("seed", seed);
            long_run(problem, run)
        }
        ProblemConfig::Custom { matrix, f, g } => {
            let text = fs::read_to_string(matrix).map_err(|e| HarnessError::io(matrix, e))?;
            let m = DenseMatrix::parse_text(&text)?;
            let op = LinearOperator::dense(m);
            let f = function(f, op.cols())?;
            let g = function(g, op.rows())?;
            let problem = Problem::new("custom", f, g, op)?.with_metadata("matrix", matrix.display());
            long_run(problem, run)
        }
    }
}

/// Step sizes from explicit `tau`/`sigma` or from `safety` and `ratio`.
pub fn resolve_params(p: &ParamsConfig, norm: f64) -> Result<SolverParams> {
    match (p.tau, p.sigma) {
        (Some(tau), Some(sigma)) => Ok(SolverParams::new(tau, sigma, p.theta, norm)?),
        (None, None) => Ok(SolverParams::at_safety(p.theta, norm, p.safety, p.ratio)?),
        _ => Err(HarnessError::Config("tau and sigma must be given together".into())),
    }
}

fn check_allowed(status: &ParamStatus, override_invalid: bool) -> Result<()> {
    if status.class == ParamClass::Invalid && !override_invalid {
        let bound = status.bound_rhs.map_or("undefined".to_string(), |b| b.to_string());
        return Err(HarnessError::Config(format!(
            "params are invalid: tau sigma |L|^2 = {} against bound {bound}; pass --override-invalid to run anyway",
            status.product
        )));
    }
    Ok(())
}

pub fn start_point(run: &RunConfig, problem: &Problem) -> PPoint {
    match run.start {
        StartPoint::Zeros => PPoint::zeros(problem.primal_dim(), problem.dual_dim()),
        StartPoint::Random => random_point(problem.primal_dim(), problem.dual_dim(), run.start_seed, run.start_scale),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Invalid params run under override: nothing is asserted.
    Observational,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Fail => 1,
            Outcome::Pass | Outcome::Observational => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub metadata: BTreeMap<String, String>,
    pub primal_dim: usize,
    pub dual_dim: usize,
    pub operator_norm: f64,
    pub kkt_source: String,
    pub kkt_residual: f64,
    pub params: SolverParams,
    pub status: ParamStatus,
    pub mode: CertificateMode,
    pub outcome: Outcome,
    pub iterations: usize,
    pub stop_reason: Option<StopReason>,
    pub final_fixed_point_residual: Option<f64>,
    pub tol: f64,
    pub eta: Eta,
    pub v0: Option<f64>,
    pub final_gap: Option<f64>,
    pub final_ergodic_gap: Option<f64>,
    pub final_dist_to_star: Option<f64>,
    pub certificates: CertificateSummary,
    /// Fit of the ergodic gap over `[rate_kmin, last k]`; absent with too few positive points.
    pub ergodic_rate: Option<RateFit>,
}

/// Result of one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub log: CertificateLog,
    pub summary: Summary,
    /// Every iterate, when requested.
    pub iterates: Option<Vec<PPoint>>,
}

struct RunInfo {
    iterations: usize,
    stop_reason: Option<StopReason>,
    final_residual: Option<f64>,
}

pub fn ergodic_series(rows: &[CertificateRow]) -> Vec<(usize, f64)> {
    rows.iter().filter_map(|r| r.ergodic_gap.map(|e| (r.k, e))).collect()
}

fn summarize(prep: &Prepared, params: &SolverParams, log: &CertificateLog, info: RunInfo, kmin: usize) -> Summary {
    let certificates = log.summary();
    let outcome = match log.mode {
        CertificateMode::Observational => Outcome::Observational,
        CertificateMode::Asserted if certificates.failures() == 0 => Outcome::Pass,
        CertificateMode::Asserted => Outcome::Fail,
    };
    let last = log.rows.last();
    let kmax = last.map_or(0, |r| r.k);
    let p = &prep.problem;
    Summary {
        problem: p.name.clone(),
        metadata: p.metadata.clone(),
        primal_dim: p.primal_dim(),
        dual_dim: p.dual_dim(),
        operator_norm: p.operator.norm_bound(),
        kkt_source: prep.kkt_source.to_string(),
        kkt_residual: prep.kkt.residual,
        params: *params,
        status: validate_params(params),
        mode: log.mode,
        outcome,
        iterations: info.iterations,
        stop_reason: info.stop_reason,
        final_fixed_point_residual: info.final_residual,
        tol: log.tol,
        eta: log.eta,
        v0: log.v0(),
        final_gap: last.map(|r| r.gap),
        final_ergodic_gap: last.and_then(|r| r.ergodic_gap),
        final_dist_to_star: last.map(|r| r.dist_to_star),
        certificates,
        ergodic_rate: fit_rate(&ergodic_series(&log.rows), (kmin, kmax)).ok(),
    }
}

/// Runs the solver and certifies every step as it is produced.
pub fn execute(prep: &Prepared, cfg: &ExperimentConfig, keep_iterates: bool) -> Result<RunResult> {
    let params = resolve_params(&cfg.params, prep.problem.operator.norm_bound())?;
    let status = validate_params(&params);
    check_allowed(&status, cfg.params.override_invalid)?;
    let mut opts = RunOptions::fixed(cfg.run.iters);
    if let Some(tol) = cfg.run.stop_tol {
        opts.stop = StoppingRule::FixedPointResidual { tol };
    }
    opts.storage = Storage::Window;
    opts.override_invalid = cfg.params.override_invalid;

    let mut certifier = Certifier::new(&prep.problem, &prep.kkt, params, cfg.run.tol)?;
    let mut kept = keep_iterates.then(Vec::new);
    let mut failure = None;
    let z0 = start_point(&cfg.run, &prep.problem);
    let traj = run_with_observer(&prep.problem, &params, &z0, &opts, |_, z| {
        if let Some(v) = kept.as_mut() {
            v.push(z.clone());
        }
        if failure.is_none() {
            if let Err(e) = certifier.push(z) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let log = certifier.finish();
    let info = RunInfo {
        iterations: traj.iterations,
        stop_reason: Some(traj.stop_reason),
        final_residual: Some(traj.final_residual),
    };
    let summary = summarize(prep, &params, &log, info, cfg.run.rate_kmin);
    Ok(RunResult {
        log,
        summary,
        iterates: kept,
    })
}

/// Certifies externally supplied iterates `z^0, z^1, ...` under the config's params.
pub fn certify_iterates(prep: &Prepared, cfg: &ExperimentConfig, iterates: &[PPoint]) -> Result<RunResult> {
    let params = resolve_params(&cfg.params, prep.problem.operator.norm_bound())?;
    check_allowed(&validate_params(&params), cfg.params.override_invalid)?;
    if iterates.len() < 2 {
        return Err(HarnessError::Usage("need at least two iterates".into()));
    }
    let mut certifier = Certifier::new(&prep.problem, &prep.kkt, params, cfg.run.tol)?;
    for z in iterates {
        certifier.push(z)?;
    }
    let log = certifier.finish();
    let info = RunInfo {
        iterations: iterates.len() - 1,
        stop_reason: None,
        final_residual: None,
    };
    let summary = summarize(prep, &params, &log, info, cfg.run.rate_kmin);
    Ok(RunResult {
        log,
        summary,
        iterates: None,
    })
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

/// Writes `certificates.csv`, `summary.json`, `config.toml` and, when
/// available, `iterates.csv` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_certificates(&dir.join("certificates.csv"), &result.log.rows)?;
    let json = dir.join("summary.json");
    fs::write(&json, summary_json(&result.summary)?).map_err(|e| HarnessError::io(&json, e))?;
    let toml = dir.join("config.toml");
    fs::write(&toml, cfg.to_toml()).map_err(|e| HarnessError::io(&toml, e))?;
    if let Some(z) = &result.iterates {
        write_iterates(&dir.join("iterates.csv"), z)?;
    }
    Ok(())
}

/// Pass flags recomputed from persisted rows.
pub fn recompute_summary(rows: Vec<CertificateRow>, mode: CertificateMode, tol: f64) -> CertificateSummary {
    let eta = rows.first().map_or(Eta { plus: 0.0, minus: 0.0 }, |r| Eta {
        plus: r.eta_plus,
        minus: r.eta_minus,
    });
    CertificateLog { rows, mode, eta, tol }.summary()
}
