//! Streaming certificate evaluation along a run.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::lyapunov::{descent_terms, lyapunov_with_gap};
use super::{duality_gap, eta_coefficients, finite, Eta, KktPoint};
use crate::error::{Error, Result};
use crate::hilbert::{p_quadratic_form, PPoint};
use crate::problems::Problem;
use crate::solver::{validate_params, ParamClass, SolverParams, Trajectory};

/// Default tolerance for the pass flags, relative to `1 + |dominant term|`.
pub const DEFAULT_CERTIFICATE_TOL: f64 = 1e-9;

/// Certificates of row `k`, computed from `z^k` and the iterates after it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub k: usize,
    /// `V(k)`.
    pub lyapunov: f64,
    /// `D(z^{k+1})`.
    pub gap: f64,
    /// `D(xbar^k, ybar^k)`; absent at `k = 0`.
    pub ergodic_gap: Option<f64>,
    /// Descent residual; absent until `z^{k+2}` is known.
    pub descent_residual: Option<f64>,
    pub lower_bound_residual: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// `|z^k - z*|`.
    pub dist_to_star: f64,
    /// `sum_{i=1}^{k+1} D(z^i)`.
    pub sum_gap: f64,
}

/// Per-row pass flags. `None` means the check does not apply to the row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub descent: Option<bool>,
    pub lower_bound: bool,
    pub gap_nonneg: bool,
    /// `D(xbar^k) <= (1/k) sum_{i<=k} D(z^i)`.
    pub jensen: Option<bool>,
    /// `D(xbar^k) <= V(0) / k`.
    pub ergodic_rate: Option<bool>,
    /// `sum_{i<=k+1} D(z^i) <= V(0)`.
    pub sum_bound: bool,
    /// `V(k) <= V(k-1)`.
    pub monotone: Option<bool>,
}

impl Flags {
    /// Name of the first failing check, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        let checks = [
            ("descent", self.descent),
            ("lower_bound", Some(self.lower_bound)),
            ("gap_nonneg", Some(self.gap_nonneg)),
            ("jensen", self.jensen),
            ("ergodic_rate", self.ergodic_rate),
            ("sum_bound", Some(self.sum_bound)),
            ("monotone", self.monotone),
        ];
        checks.into_iter().find(|(_, v)| *v == Some(false)).map(|(name, _)| name)
    }
}

fn within(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * (1.0 + rhs.abs())
}

/// Flags of `row` given the previous row and `V(0)`.
///
/// The flags depend only on logged values, so a CSV round-trip reproduces them.
pub fn evaluate_flags(row: &CertificateRow, prev: Option<&CertificateRow>, v0: f64, tol: f64) -> Flags {
    let v = row.lyapunov;
    let scale = 1.0 + v.abs();
    let k = row.k as f64;
    Flags {
        descent: row.descent_residual.map(|r| r <= tol * scale),
        lower_bound: row.lower_bound_residual <= tol * scale,
        gap_nonneg: row.gap >= -tol * (1.0 + row.sum_gap.abs()),
        jensen: match (row.ergodic_gap, prev) {
            (Some(e), Some(p)) => Some(within(e, p.sum_gap / k, tol)),
            _ => None,
        },
        ergodic_rate: row.ergodic_gap.map(|e| e <= v0 / k * (1.0 + tol) + tol),
        sum_bound: within(row.sum_gap, v0, tol),
        monotone: prev.map(|p| within(v, p.lyapunov, tol)),
    }
}

/// Whether flags are asserted or only recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Asserted,
    /// Parameters outside the valid region: inequalities are not guaranteed.
    Observational,
}

/// Pass/fail/not-applicable counts for one check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub pass: usize,
    pub fail: usize,
}

impl CheckCounts {
    fn record(&mut self, flag: Option<bool>) {
        match flag {
            Some(true) => self.pass += 1,
            Some(false) => self.fail += 1,
            None => {}
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub descent: CheckCounts,
    pub lower_bound: CheckCounts,
    pub gap_nonneg: CheckCounts,
    pub jensen: CheckCounts,
    pub ergodic_rate: CheckCounts,
    pub sum_bound: CheckCounts,
    pub monotone: CheckCounts,
    pub max_descent_residual: Option<f64>,
    pub max_lower_bound_residual: Option<f64>,
    /// First `(k, check)` that failed.
    pub first_failure: Option<(usize, String)>,
}

impl CertificateSummary {
    pub fn failures(&self) -> usize {
        [
            self.descent,
            self.lower_bound,
            self.gap_nonneg,
            self.jensen,
            self.ergodic_rate,
            self.sum_bound,
            self.monotone,
        ]
        .iter()
        .map(|c| c.fail)
        .sum()
    }
}

/// All certificate rows of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateLog {
    pub rows: Vec<CertificateRow>,
    pub mode: CertificateMode,
    pub eta: Eta,
    pub tol: f64,
}

impl CertificateLog {
    /// `V(0)`, or `None` for an empty log.
    pub fn v0(&self) -> Option<f64> {
        self.rows.first().map(|r| r.lyapunov)
    }

    pub fn flags(&self) -> Vec<Flags> {
        let Some(v0) = self.v0() else { return Vec::new() };
        let mut prev = None;
        self.rows
            .iter()
            .map(|row| {
                let f = evaluate_flags(row, prev, v0, self.tol);
                prev = Some(row);
                f
            })
            .collect()
    }

    pub fn summary(&self) -> CertificateSummary {
        let mut s = CertificateSummary::default();
        for (row, f) in self.rows.iter().zip(self.flags()) {
            s.descent.record(f.descent);
            s.lower_bound.record(Some(f.lower_bound));
            s.gap_nonneg.record(Some(f.gap_nonneg));
            s.jensen.record(f.jensen);
            s.ergodic_rate.record(f.ergodic_rate);
            s.sum_bound.record(Some(f.sum_bound));
            s.monotone.record(f.monotone);
            if let Some(r) = row.descent_residual {
                s.max_descent_residual = Some(s.max_descent_residual.map_or(r, |m: f64| m.max(r)));
            }
            let r = row.lower_bound_residual;
            s.max_lower_bound_residual = Some(s.max_lower_bound_residual.map_or(r, |m: f64| m.max(r)));
            if s.first_failure.is_none() {
                if let Some(name) = f.first_failure() {
                    s.first_failure = Some((row.k, name.to_string()));
                }
            }
        }
        s
    }

    /// `true` when nothing failed. Observational logs are never "passing" in
    /// the asserted sense, so callers should check [`CertificateLog::mode`] too.
    pub fn all_pass(&self) -> bool {
        self.summary().failures() == 0
    }
}

/// Consumes iterates `z^0, z^1, ...` one at a time and emits certificate rows.
///
/// Row `k` is complete once `z^{k+1}` arrives, except for its descent
/// residual which waits for `z^{k+2}`. Only the last three iterates and the
/// running ergodic sum are kept.
pub struct Certifier<'a> {
    problem: &'a Problem,
    kkt: &'a KktPoint,
    params: SolverParams,
    eta: Eta,
    tol: f64,
    mode: CertificateMode,
    window: VecDeque<PPoint>,
    ergodic_sum: Option<PPoint>,
    sum_gap: f64,
    rows: Vec<CertificateRow>,
    pushed: usize,
}

impl<'a> Certifier<'a> {
    pub fn new(problem: &'a Problem, kkt: &'a KktPoint, params: SolverParams, tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be nonnegative, got {tol}")));
        }
        kkt.star.check_dims(problem.primal_dim(), problem.dual_dim())?;
        let mode = match validate_params(&params).class {
            ParamClass::Invalid => CertificateMode::Observational,
            _ => CertificateMode::Asserted,
        };
        Ok(Certifier {
            problem,
            kkt,
            params,
            eta: eta_coefficients(&params)?,
            tol,
            mode,
            window: VecDeque::with_capacity(3),
            ergodic_sum: None,
            sum_gap: 0.0,
            rows: Vec::new(),
            pushed: 0,
        })
    }

    pub fn mode(&self) -> CertificateMode {
        self.mode
    }

    pub fn rows(&self) -> &[CertificateRow] {
        &self.rows
    }

    /// Feeds the next iterate.
    pub fn push(&mut self, z: &PPoint) -> Result<()> {
        z.check_dims(self.problem.primal_dim(), self.problem.dual_dim())?;
        let j = self.pushed;
        if j == 0 {
            self.window.push_back(z.clone());
            self.pushed = 1;
            return Ok(());
        }
        // Row k = j - 1 needs z^k and z^{k+1} = z.
        let k = j - 1;
        let (problem, kkt, params) = (self.problem, self.kkt, &self.params);
        let zk = self.window.back().expect("window holds z^k").clone();
        let gap_ext = duality_gap(z, kkt, problem)?;
        let gap = finite(gap_ext.to_f64(), "duality gap", k)?;
        let v = finite(lyapunov_with_gap(&zk, z, gap_ext, kkt, problem, params)?, "lyapunov", k)?;
        let dist_next = p_quadratic_form(&(z - &kkt.star), &problem.operator, params)?;
        let lower = finite(0.5 * dist_next - v, "lower bound residual", k)?;

        let ergodic_gap = match &self.ergodic_sum {
            Some(sum) => {
                let avg = sum * (1.0 / k as f64);
                Some(finite(duality_gap(&avg, kkt, problem)?.to_f64(), "ergodic gap", k)?)
            }
            None => None,
        };
        self.ergodic_sum = Some(match self.ergodic_sum.take() {
            Some(sum) => &sum + z,
            None => z.clone(),
        });

        // The new V(k) completes the descent residual of row k - 1.
        if k >= 1 {
            let prev = self.rows.last_mut().expect("row k - 1 exists");
            let zprev = &self.window[self.window.len() - 2];
            let terms = descent_terms(zprev, &zk, z, &self.eta, problem, params)?;
            let r = v - (prev.lyapunov - prev.gap - terms);
            prev.descent_residual = Some(finite(r, "descent residual", k - 1)?);
        }

        self.sum_gap += gap;
        self.rows.push(CertificateRow {
            k,
            lyapunov: v,
            gap,
            ergodic_gap,
            descent_residual: None,
            lower_bound_residual: lower,
            eta_plus: self.eta.plus,
            eta_minus: self.eta.minus,
            dist_to_star: (&zk - &kkt.star).norm(),
            sum_gap: self.sum_gap,
        });

        if self.window.len() == 3 {
            self.window.pop_front();
        }
        self.window.push_back(z.clone());
        self.pushed += 1;
        Ok(())
    }

    pub fn finish(self) -> CertificateLog {
        CertificateLog {
            rows: self.rows,
            mode: self.mode,
            eta: self.eta,
            tol: self.tol,
        }
    }
}

/// Certificates for a trajectory stored with [`crate::solver::Storage::Full`].
pub fn certify_trajectory(traj: &Trajectory, kkt: &KktPoint, problem: &Problem, tol: f64) -> Result<CertificateLog> {
    if traj.first_index() != 0 {
        return Err(Error::InvalidArgument(
            "certificates need the full trajectory (Storage::Full)".into(),
        ));
    }
    let mut c = Certifier::new(problem, kkt, traj.params, tol)?;
    for z in traj.iterates() {
        c.push(z)?;
    }
    Ok(c.finish())
}
