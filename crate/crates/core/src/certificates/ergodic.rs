use serde::{Deserialize, Serialize};

use super::{duality_gap, finite, lyapunov, KktPoint};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::Trajectory;

/// The summation chain at one `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEntry {
    pub k: usize,
    /// `D(xbar^k, ybar^k)`.
    pub ergodic_gap: f64,
    /// `(1/k) sum_{i=1}^k D(z^i)`.
    pub mean_gap: f64,
    /// `sum_{i=1}^k D(z^i)`.
    pub sum_gap: f64,
    pub jensen_ok: bool,
    pub sum_ok: bool,
    pub rate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub v0: f64,
    pub tol: f64,
    pub entries: Vec<ErgodicEntry>,
}

impl ErgodicReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.jensen_ok && e.sum_ok && e.rate_ok)
    }
}

/// Checks `D(xbar^k) <= (1/k) sum D(z^i)`, `sum_{i<=k} D(z^i) <= V(0)` and
/// `D(xbar^k) <= V(0) / k` for every `k` of a fully stored trajectory.
pub fn ergodic_bound_check(traj: &Trajectory, kkt: &KktPoint, problem: &Problem, tol: f64) -> Result<ErgodicReport> {
    let z = traj.iterates();
    if traj.first_index() != 0 || z.len() < 2 {
        return Err(Error::InvalidArgument(
            "ergodic check needs a full trajectory with at least one step".into(),
        ));
    }
    let v0 = lyapunov(&z[0], &z[1], kkt, problem, &traj.params)?;
    let mut sum = 0.0;
    let mut entries = Vec::with_capacity(z.len() - 1);
    for k in 1..z.len() {
        sum += finite(duality_gap(&z[k], kkt, problem)?.to_f64(), "duality gap", k)?;
        let avg = traj.ergodic(k).expect("full storage keeps every average");
        let e = finite(duality_gap(avg, kkt, problem)?.to_f64(), "ergodic gap", k)?;
        let mean = sum / k as f64;
        let rate = v0 / k as f64;
        entries.push(ErgodicEntry {
            k,
            ergodic_gap: e,
            mean_gap: mean,
            sum_gap: sum,
            jensen_ok: e <= mean + tol * (1.0 + mean.abs()),
            sum_ok: sum <= v0 + tol * (1.0 + v0.abs()),
            rate_ok: e <= rate * (1.0 + tol) + tol,
        });
    }
    Ok(ErgodicReport { v0, tol, entries })
}
