//! Experiment configuration, read from TOML.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `f = 1/2|x - a|^2`, `g* = 1/2|y - b|^2` with Gaussian `L`, `a`, `b`.
    Quadratic { rows: usize, cols: usize, seed: u64 },
    /// Lasso with Gaussian `A` and `b`.
    Lasso { rows: usize, cols: usize, seed: u64, lambda: f64 },
    /// TV denoising of a noisy piecewise-constant signal.
    Tv1d {
        n: usize,
        #[serde(default = "default_pieces")]
        pieces: usize,
        #[serde(default = "default_noise")]
        noise: f64,
        seed: u64,
        lambda: f64,
    },
    /// User-supplied matrix file and prox functions.
    Custom { matrix: PathBuf, f: FunctionConfig, g: FunctionConfig },
}

impl ProblemConfig {
    pub fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            ProblemConfig::Quadratic { seed, .. }
            | ProblemConfig::Lasso { seed, .. }
            | ProblemConfig::Tv1d { seed, .. } => Some(seed),
            ProblemConfig::Custom { .. } => None,
        }
    }
}

/// A registry entry of the prox library, e.g. `{ kind = "l1", lambda = 0.5 }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// `tau sigma |L|^2 = safety * bound`. Ignored when `tau` and `sigma` are set.
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// `tau / sigma`.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub override_invalid: bool,
}

impl ParamsConfig {
    /// Applies the parameter part of `o`. Setting `safety` drops explicit steps.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.theta {
            self.theta = v;
        }
        if let Some(v) = o.safety {
            self.safety = v;
            self.tau = None;
            self.sigma = None;
        }
        if let Some(v) = o.ratio {
            self.ratio = v;
        }
        if o.tau.is_some() || o.sigma.is_some() {
            self.tau = o.tau.or(self.tau);
            self.sigma = o.sigma.or(self.sigma);
        }
        self.override_invalid |= o.override_invalid;
    }
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            theta: default_theta(),
            safety: default_safety(),
            ratio: default_ratio(),
            tau: None,
            sigma: None,
            override_invalid: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    #[default]
    Zeros,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_iters")]
    pub iters: usize,
    /// Relative certificate tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Stop early once the fixed-point residual drops below this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    #[serde(default)]
    pub start: StartPoint,
    #[serde(default)]
    pub start_seed: u64,
    #[serde(default = "default_scale")]
    pub start_scale: f64,
    /// Steps of the long-run KKT oracle for problems without a closed form.
    #[serde(default = "default_kkt_iters")]
    pub kkt_iters: usize,
    /// Window start for the ergodic rate fit.
    #[serde(default = "default_rate_kmin")]
    pub rate_kmin: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            iters: default_iters(),
            tol: default_tol(),
            stop_tol: None,
            start: StartPoint::Zeros,
            start_seed: 0,
            start_scale: default_scale(),
            kkt_iters: default_kkt_iters(),
            rate_kmin: default_rate_kmin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub thetas: Vec<f64>,
    pub safeties: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Also write `iterates.csv`.
    #[serde(default = "default_true")]
    pub iterates: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            iterates: true,
        }
    }
}

fn default_pieces() -> usize {
    4
}
fn default_noise() -> f64 {
    0.1
}
fn default_theta() -> f64 {
    1.0
}
fn default_safety() -> f64 {
    0.9
}
fn default_ratio() -> f64 {
    1.0
}
fn default_iters() -> usize {
    2000
}
fn default_tol() -> f64 {
    chambolle_pock::certificates::DEFAULT_CERTIFICATE_TOL
}
fn default_scale() -> f64 {
    1.0
}
fn default_kkt_iters() -> usize {
    100_000
}
fn default_rate_kmin() -> usize {
    50
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub safety: Option<f64>,
    pub ratio: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub override_invalid: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let ProblemConfig::Custom { matrix, .. } = &mut cfg.problem {
            if matrix.is_relative() {
                if let Some(dir) = path.parent() {
                    *matrix = dir.join(&*matrix);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        self.params.apply(o);
        if let Some(v) = o.iters {
            self.run.iters = v;
        }
        if let Some(v) = o.seed {
            match self.problem.seed_mut() {
                Some(seed) => *seed = v,
                None => return Err(HarnessError::Usage("--seed does not apply to custom problems".into())),
            }
        }
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}
