use serde::{Deserialize, Serialize};

use super::params::{validate_params, ParamClass, ParamStatus, SolverParams};
use crate::error::{Error, Result};
use crate::hilbert::PPoint;
use crate::problems::Problem;

/// One Chambolle-Pock step from `z = (x^k, y^k)` to `(x^{k+1}, y^{k+1})`.
pub fn step(problem: &Problem, z: &PPoint, params: &SolverParams) -> Result<PPoint> {
    let op = &problem.operator;
    let (tau, sigma, theta) = (params.tau, params.sigma, params.theta);
    let x_next = problem.f.prox(&z.x.axpy(-tau, &op.apply_adjoint(&z.y)?), tau)?;
    let extrapolated = x_next.axpy(theta, &(&x_next - &z.x));
    let y_next = problem.dual_prox(&z.y.axpy(sigma, &op.apply(&extrapolated)?), sigma)?;
    Ok(PPoint::new(x_next, y_next))
}

/// When to stop before `max_iters`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StoppingRule {
    /// Always run `max_iters` steps.
    MaxIters,
    /// Stop once `max(|x+ - x| / tau, |y+ - y| / sigma) <= tol`.
    FixedPointResidual { tol: f64 },
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule::FixedPointResidual { tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Storage {
    /// Keep every iterate and every ergodic average.
    #[default]
    Full,
    /// Keep the last three iterates and the latest ergodic average.
    Window,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_iters: usize,
    pub stop: StoppingRule,
    pub storage: Storage,
    /// Permit runs whose params are [`ParamClass::Invalid`].
    pub override_invalid: bool,
}

impl RunOptions {
    pub fn new(max_iters: usize) -> Self {
        RunOptions {
            max_iters,
            stop: StoppingRule::default(),
            storage: Storage::Full,
            override_invalid: false,
        }
    }

    /// Exactly `max_iters` steps, no early stop.
    pub fn fixed(max_iters: usize) -> Self {
        RunOptions {
            stop: StoppingRule::MaxIters,
            ..RunOptions::new(max_iters)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    Converged,
}

/// Iterates `z^0, ..., z^K` of one run with their running averages.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    iterates: Vec<PPoint>,
    ergodic: Vec<PPoint>,
    first_index: usize,
    pub params: SolverParams,
    pub status: ParamStatus,
    /// `true` when the run used [`RunOptions::override_invalid`] on invalid params.
    pub observational: bool,
    /// Number of steps taken, `K`.
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Fixed-point residual of the last step.
    pub final_residual: f64,
}

impl Trajectory {
    /// Stored iterates, oldest first. In [`Storage::Full`] mode index `k` is `z^k`.
    pub fn iterates(&self) -> &[PPoint] {
        &self.iterates
    }

    /// `z^k`, if still stored.
    pub fn iterate(&self, k: usize) -> Option<&PPoint> {
        k.checked_sub(self.first_index).and_then(|i| self.iterates.get(i))
    }

    pub fn last(&self) -> &PPoint {
        self.iterates.last().expect("trajectory holds z^0")
    }

    /// `(xbar^k, ybar^k) = (1/k) sum_{i=1}^k z^i` for `k >= 1`, if stored.
    pub fn ergodic(&self, k: usize) -> Option<&PPoint> {
        if k == 0 {
            return None;
        }
        let first = self.iterations + 1 - self.ergodic.len();
        k.checked_sub(first).and_then(|i| self.ergodic.get(i))
    }

    /// All stored ergodic averages; in full mode entry `i` is `k = i + 1`.
    pub fn ergodic_averages(&self) -> &[PPoint] {
        &self.ergodic
    }

    /// Index of the first stored iterate.
    pub fn first_index(&self) -> usize {
        self.first_index
    }
}

/// Runs the iteration from `z0`. See [`run_with_observer`].
pub fn run(problem: &Problem, params: &SolverParams, z0: &PPoint, opts: &RunOptions) -> Result<Trajectory> {
    run_with_observer(problem, params, z0, opts, |_, _| {})
}

/// Runs the iteration, handing every iterate `z^k` (including `z^0`) to `observer`.
///
/// Fails with [`Error::InvalidParams`] on invalid params unless overridden and with
/// [`Error::NonFiniteIterate`] if an iterate stops being finite.
pub fn run_with_observer(
    problem: &Problem,
    params: &SolverParams,
    z0: &PPoint,
    opts: &RunOptions,
    mut observer: impl FnMut(usize, &PPoint),
) -> Result<Trajectory> {
    let op = &problem.operator;
    z0.check_dims(op.cols(), op.rows())?;
    if !z0.is_finite() {
        return Err(Error::NonFiniteIterate { iteration: 0 });
    }
    let status = validate_params(params);
    let observational = status.class == ParamClass::Invalid;
    if observational && !opts.override_invalid {
        return Err(Error::InvalidParams {
            product: status.product,
            bound: status.bound_rhs.unwrap_or(f64::NAN),
        });
    }

    let mut iterates = vec![z0.clone()];
    let mut ergodic = Vec::new();
    let mut first_index = 0usize;
    let mut sum = PPoint::zeros(op.cols(), op.rows());
    let mut current = z0.clone();
    let mut stop_reason = StopReason::MaxIters;
    let mut final_residual = f64::NAN;
    let mut iterations = 0;
    observer(0, &current);

    for k in 0..opts.max_iters {
        let next = step(problem, &current, params)?;
        if !next.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k + 1 });
        }
        iterations = k + 1;
        observer(iterations, &next);

        let residual = (&next.x - &current.x).norm() / params.tau;
        let residual = residual.max((&next.y - &current.y).norm() / params.sigma);
        final_residual = residual;

        sum = &sum + &next;
        let avg = &sum * (1.0 / iterations as f64);
        match opts.storage {
            Storage::Full => ergodic.push(avg),
            Storage::Window => ergodic = vec![avg],
        }
        iterates.push(next.clone());
        if opts.storage == Storage::Window && iterates.len() > 3 {
            iterates.remove(0);
            first_index += 1;
        }
        current = next;

        if let StoppingRule::FixedPointResidual { tol } = opts.stop {
            if residual <= tol {
                stop_reason = StopReason::Converged;
                break;
            }
        }
    }

    Ok(Trajectory {
        iterates,
        ergodic,
        first_index,
        params: *params,
        status,
        observational,
        iterations,
        stop_reason,
        final_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Vector;

    fn mean(points: &[PPoint]) -> Option<PPoint> {
        let first = points.first()?;
        let mut x = Vector::zeros(first.x.len());
        let mut y = Vector::zeros(first.y.len());
        for p in points {
            x = &x + &p.x;
            y = &y + &p.y;
        }
        let n = points.len() as f64;
        Some(PPoint::new(x.scale(1.0 / n), y.scale(1.0 / n)))
    }
    use crate::hilbert::LinearOperator;
    use crate::problems::make_quadratic;

    fn scalar_problem() -> Problem {
        make_quadratic(LinearOperator::identity(1).unwrap(), Vector::from([1.0]), Vector::from([0.0])).unwrap()
    }

    #[test]
    fn hand_computed_first_step() {
        let problem = scalar_problem();
        let params = SolverParams::new(0.5, 0.5, 1.0, 1.0).unwrap();
        let z1 = step(&problem, &PPoint::zeros(1, 1), &params).unwrap();
        assert!((z1.x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((z1.y[0] - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn kkt_point_is_fixed() {
        let problem = scalar_problem();
        let star = problem.kkt.as_ref().unwrap().star.clone();
        for theta in [0.1, 0.5, 1.0] {
            let params = SolverParams::at_safety(theta, 1.0, 0.9, 1.0).unwrap();
            let next = step(&problem, &star, &params).unwrap();
            assert!((&next - &star).norm() <= 1e-15);
        }
    }

    #[test]
    fn constant_trajectory_from_kkt_point() {
        let problem = scalar_problem();
        let star = problem.kkt.as_ref().unwrap().star.clone();
        let params = SolverParams::at_safety(0.3, 1.0, 0.9, 1.0).unwrap();
        let traj = run(&problem, &params, &star, &RunOptions::fixed(20)).unwrap();
        assert!(traj.iterates().iter().all(|z| (z - &star).norm() <= 1e-15));
    }

    #[test]
    fn invalid_params_rejected_without_override() {
        let problem = scalar_problem();
        let params = SolverParams::at_safety(0.5, 1.0, 1.5, 1.0).unwrap();
        let err = run(&problem, &params, &PPoint::zeros(1, 1), &RunOptions::fixed(5)).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { .. }));
        let mut opts = RunOptions::fixed(5);
        opts.override_invalid = true;
        let traj = run(&problem, &params, &PPoint::zeros(1, 1), &opts).unwrap();
        assert!(traj.observational);
    }

    #[test]
    fn nan_start_is_reported() {
        let problem = scalar_problem();
        let params = SolverParams::at_safety(1.0, 1.0, 0.9, 1.0).unwrap();
        let z0 = PPoint::new(Vector::from([f64::NAN]), Vector::from([0.0]));
        assert!(matches!(
            run(&problem, &params, &z0, &RunOptions::fixed(5)),
            Err(Error::NonFiniteIterate { iteration: 0 })
        ));
    }

    #[test]
    fn window_storage_matches_full_tail() {
        let problem = scalar_problem();
        let params = SolverParams::at_safety(0.5, 1.0, 0.9, 1.0).unwrap();
        let z0 = PPoint::new(Vector::from([3.0]), Vector::from([-2.0]));
        let full = run(&problem, &params, &z0, &RunOptions::fixed(50)).unwrap();
        let mut opts = RunOptions::fixed(50);
        opts.storage = Storage::Window;
        let win = run(&problem, &params, &z0, &opts).unwrap();
        assert_eq!(win.iterates().len(), 3);
        assert_eq!(win.first_index(), 48);
        for k in 48..=50 {
            assert_eq!(win.iterate(k), full.iterate(k));
        }
        assert_eq!(win.ergodic(50), full.ergodic(50));
        assert_eq!(win.ergodic(49), None);
    }

    #[test]
    fn ergodic_matches_recomputed_mean() {
        let problem = scalar_problem();
        let params = SolverParams::at_safety(0.25, 1.0, 0.99, 1.0).unwrap();
        let z0 = PPoint::new(Vector::from([5.0]), Vector::from([1.0]));
        let traj = run(&problem, &params, &z0, &RunOptions::fixed(200)).unwrap();
        for k in 1..=200 {
            let m = mean(&traj.iterates()[1..=k]).unwrap();
            let avg = traj.ergodic(k).unwrap();
            assert!((&m - avg).norm() <= 1e-12 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn stops_on_fixed_point_residual() {
        let problem = scalar_problem();
        let params = SolverParams::at_safety(1.0, 1.0, 0.9, 1.0).unwrap();
        let traj = run(&problem, &params, &PPoint::zeros(1, 1), &RunOptions::new(10_000)).unwrap();
        assert_eq!(traj.stop_reason, StopReason::Converged);
        assert!(traj.final_residual <= 1e-10);
        assert!(traj.iterations < 10_000);
    }
}
