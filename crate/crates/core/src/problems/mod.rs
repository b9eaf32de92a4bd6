//! Test-problem generators for `min_x f(x) + g(Lx)`.
//!
//! All generated `f` and `g` are proper, convex, and lower semicontinuous:
//! they are finite convex quadratics, scaled l1 norms, or indicators of
//! closed convex sets. Operators are bounded with a certified norm bound.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::certificates::KktPoint;
use crate::error::{check_dim, Error, Result};
use crate::hilbert::{DenseMatrix, LinearOperator, PPoint, Vector};
use crate::prox::{prox_conjugate, ExtReal, ProxFn};
use crate::solver::{run, validate_params, ParamClass, RunOptions, SolverParams, StoppingRule};

/// KKT residual above which an attached KKT point is rejected.
pub const KKT_ATTACH_TOL: f64 = 1e-8;
/// Residual above which the long-run oracle is rejected.
pub const LONG_RUN_TOL: f64 = 1e-6;

/// How the dual step obtains `prox_{sigma g*}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConjugateProx {
    /// Moreau identity applied to the prox of `g`.
    #[default]
    Moreau,
    /// Closed-form prox of `g*` directly.
    Direct,
}

/// A saddle-point problem `min_x max_y f(x) + <Lx, y> - g*(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub f: ProxFn,
    pub g: ProxFn,
    /// Closed-form `g*`, used to evaluate the duality gap.
    pub g_conj: ProxFn,
    pub conjugate_prox: ConjugateProx,
    pub operator: LinearOperator,
    pub kkt: Option<KktPoint>,
    pub metadata: BTreeMap<String, String>,
}

fn check_fn_dim(context: &'static str, f: &ProxFn, dim: usize) -> Result<()> {
    if let ProxFn::Quadratic { center, .. } = f {
        check_dim(context, dim, center.len())?;
    }
    Ok(())
}

impl Problem {
    pub fn new(name: impl Into<String>, f: ProxFn, g: ProxFn, operator: LinearOperator) -> Result<Self> {
        check_fn_dim("f dimension", &f, operator.cols())?;
        check_fn_dim("g dimension", &g, operator.rows())?;
        Ok(Problem {
            name: name.into(),
            g_conj: g.conjugate(),
            f,
            g,
            conjugate_prox: ConjugateProx::Moreau,
            operator,
            kkt: None,
            metadata: BTreeMap::new(),
        })
    }

    /// Use the closed-form prox of `g*` instead of the Moreau identity.
    pub fn with_direct_conjugate_prox(mut self) -> Self {
        self.conjugate_prox = ConjugateProx::Direct;
        self
    }

    pub fn with_metadata(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Attaches `star` as the problem's KKT point after checking its residual.
    pub fn with_kkt(mut self, star: PPoint) -> Result<Self> {
        let kkt = KktPoint::new(&self, star)?;
        if kkt.residual > KKT_ATTACH_TOL {
            return Err(Error::OracleRejected {
                residual: kkt.residual,
                limit: KKT_ATTACH_TOL,
            });
        }
        self.kkt = Some(kkt);
        Ok(self)
    }

    pub fn primal_dim(&self) -> usize {
        self.operator.cols()
    }

    pub fn dual_dim(&self) -> usize {
        self.operator.rows()
    }

    /// `prox_{sigma g*}(y)`.
    pub fn dual_prox(&self, y: &Vector, sigma: f64) -> Result<Vector> {
        match self.conjugate_prox {
            ConjugateProx::Moreau => prox_conjugate(&self.g, y, sigma),
            ConjugateProx::Direct => self.g_conj.prox(y, sigma),
        }
    }

    pub fn f_value(&self, x: &Vector) -> Result<ExtReal> {
        self.f.evaluate(x)
    }

    pub fn gstar_value(&self, y: &Vector) -> Result<ExtReal> {
        self.g_conj.evaluate(y)
    }

    /// Primal objective `f(x) + g(Lx)`.
    pub fn primal_objective(&self, x: &Vector) -> Result<ExtReal> {
        Ok(self.f.evaluate(x)? + self.g.evaluate(&self.operator.apply(x)?)?)
    }
}

/// KKT residual of `z`: `max(|x - prox_f(x - L*y)|, |y - prox_{g*}(y + Lx)|)`.
///
/// By the prox characterization this vanishes exactly when
/// `-L*y in df(x)` and `Lx in dg*(y)`.
pub fn kkt_residual(problem: &Problem, z: &PPoint) -> Result<f64> {
    let op = &problem.operator;
    z.check_dims(op.cols(), op.rows())?;
    let px = problem.f.prox(&z.x.axpy(-1.0, &op.apply_adjoint(&z.y)?), 1.0)?;
    let py = problem.dual_prox(&z.y.axpy(1.0, &op.apply(&z.x)?), 1.0)?;
    Ok((&z.x - &px).norm().max((&z.y - &py).norm()))
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

/// `f(x) = 1/2 |x - a|^2`, `g*(y) = 1/2 |y - b|^2`.
///
/// Both are strongly convex, so the KKT point is unique and solves
/// `(I + L^T L) x* = a - L^T b`, `y* = L x* + b`.
pub fn make_quadratic(operator: LinearOperator, a: Vector, b: Vector) -> Result<Problem> {
    check_dim("quadratic a", operator.cols(), a.len())?;
    check_dim("quadratic b", operator.rows(), b.len())?;
    let l = to_nalgebra(&operator.to_dense());
    let n = operator.cols();
    let system = DMatrix::<f64>::identity(n, n) + l.transpose() * &l;
    let rhs = DVector::from_column_slice(a.as_slice()) - l.transpose() * DVector::from_column_slice(b.as_slice());
    let x_star = system
        .cholesky()
        .expect("I + L^T L is positive definite")
        .solve(&rhs);
    let x_star = Vector::new(x_star.iter().copied().collect());
    let y_star = &operator.apply(&x_star)? + &b;

    let f = ProxFn::half_squared_distance(a);
    let g = ProxFn::half_squared_distance(b).conjugate();
    Problem::new("quadratic", f, g, operator)?.with_kkt(PPoint::new(x_star, y_star))
}

/// `f = lambda |.|_1`, `g = 1/2 |. - b|^2`, `L = A`: the lasso
/// `min_x lambda |x|_1 + 1/2 |Ax - b|^2`. No closed-form KKT point.
pub fn make_lasso(a: LinearOperator, b: Vector, lambda: f64) -> Result<Problem> {
    check_dim("lasso b", a.rows(), b.len())?;
    let f = ProxFn::l1(lambda)?;
    let g = ProxFn::half_squared_distance(b);
    Ok(Problem::new("lasso", f, g, a)?.with_metadata("lambda", lambda))
}

/// 1-D total-variation denoising `min_x 1/2 |x - s|^2 + lambda |Dx|_1`
/// with forward differences `D` and the analytic bound `|D| <= 2`.
pub fn make_tv1d(signal: Vector, lambda: f64) -> Result<Problem> {
    if signal.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "tv1d needs a signal of length >= 2, got {}",
            signal.len()
        )));
    }
    let op = LinearOperator::forward_difference(signal.len())?;
    let f = ProxFn::half_squared_distance(signal);
    let g = ProxFn::l1(lambda)?;
    Ok(Problem::new("tv1d", f, g, op)?.with_metadata("lambda", lambda))
}

/// Approximates a KKT point by running the solver for `iters` steps from the
/// origin. Justified by convergence of the iterates under strict step sizes.
///
/// The measured KKT residual is attached; above [`LONG_RUN_TOL`] the
/// oracle is rejected.
pub fn kkt_by_long_run(problem: &Problem, params: &SolverParams, iters: usize) -> Result<KktPoint> {
    let status = validate_params(params);
    if status.class != ParamClass::StrictlyValid {
        return Err(Error::InvalidArgument(format!(
            "long-run oracle needs strictly valid params, got {}",
            status.class.as_str()
        )));
    }
    let mut opts = RunOptions::new(iters);
    opts.stop = StoppingRule::FixedPointResidual { tol: 0.0 };
    opts.storage = crate::solver::Storage::Window;
    let z0 = PPoint::zeros(problem.primal_dim(), problem.dual_dim());
    let traj = run(problem, params, &z0, &opts)?;
    let kkt = KktPoint::new(problem, traj.last().clone())?;
    if kkt.residual > LONG_RUN_TOL {
        return Err(Error::OracleRejected {
            residual: kkt.residual,
            limit: LONG_RUN_TOL,
        });
    }
    Ok(kkt)
}

/// Gaussian `rows x cols` matrix from a seeded generator.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
    DenseMatrix::new(rows, cols, data)
}

pub fn random_vector(dim: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(dim, |_| StandardNormal.sample(rng))
}

/// Random start point with Gaussian entries scaled by `scale`.
pub fn random_point(primal_dim: usize, dual_dim: usize, seed: u64, scale: f64) -> PPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_vector(primal_dim, &mut rng).scale(scale);
    let y = random_vector(dual_dim, &mut rng).scale(scale);
    PPoint::new(x, y)
}

/// Quadratic problem with Gaussian `L` (`rows x cols`), `a`, and `b`.
pub fn random_quadratic(rows: usize, cols: usize, seed: u64) -> Result<Problem> {
    let l = random_matrix(rows, cols, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let a = random_vector(cols, &mut rng);
    let b = random_vector(rows, &mut rng);
    Ok(make_quadratic(LinearOperator::dense(l), a, b)?
        .with_metadata("seed", seed)
        .with_metadata("rows", rows)
        .with_metadata("cols", cols))
}

/// Piecewise-constant signal of length `n` with `pieces` random levels in
/// `[-2, 2]` plus Gaussian noise of standard deviation `noise`.
pub fn piecewise_constant_signal(n: usize, pieces: usize, noise: f64, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = pieces.clamp(1, n.max(1));
    let levels: Vec<f64> = (0..pieces).map(|_| rng.random_range(-2.0..2.0)).collect();
    Vector::from_fn(n, |i| {
        let level = levels[i * pieces / n];
        let eps: f64 = StandardNormal.sample(&mut rng);
        level + noise * eps
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_quadratic_kkt() {
        let p = make_quadratic(LinearOperator::identity(1).unwrap(), Vector::from([1.0]), Vector::from([0.0])).unwrap();
        let kkt = p.kkt.unwrap();
        assert!((kkt.star.x[0] - 0.5).abs() < 1e-15);
        assert!((kkt.star.y[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoupled_quadratic() {
        let op = LinearOperator::dense(DenseMatrix::zeros(2, 3).unwrap());
        let a = Vector::from([1.0, -2.0, 3.0]);
        let b = Vector::from([0.5, 4.0]);
        let p = make_quadratic(op, a.clone(), b.clone()).unwrap();
        let kkt = p.kkt.unwrap();
        assert_eq!(kkt.star.x, a);
        assert_eq!(kkt.star.y, b);
    }

    #[test]
    fn random_quadratic_residual() {
        let p = random_quadratic(6, 4, 11).unwrap();
        let kkt = p.kkt.as_ref().unwrap();
        assert!(kkt_residual(&p, &kkt.star).unwrap() <= 1e-10);
        assert_eq!(p.metadata["seed"], "11");
    }

    #[test]
    fn quadratic_conjugate_is_shifted_square() {
        let b = Vector::from([1.0, -1.0]);
        let p = make_quadratic(LinearOperator::identity(2).unwrap(), Vector::zeros(2), b.clone()).unwrap();
        let y = Vector::from([0.25, 3.0]);
        let expected = 0.5 * (&y - &b).norm_squared();
        assert!((p.gstar_value(&y).unwrap().to_f64() - expected).abs() < 1e-14);
    }

    #[test]
    fn direct_and_moreau_dual_prox_agree() {
        let p = random_quadratic(4, 3, 5).unwrap();
        let direct = p.clone().with_direct_conjugate_prox();
        let y = Vector::from([0.3, -1.0, 2.0, 0.1]);
        let a = p.dual_prox(&y, 0.7).unwrap();
        let b = direct.dual_prox(&y, 0.7).unwrap();
        assert!((&a - &b).norm() < 1e-14);
    }

    #[test]
    fn dimension_checks() {
        let op = LinearOperator::identity(2).unwrap();
        assert!(make_quadratic(op.clone(), Vector::zeros(3), Vector::zeros(2)).is_err());
        assert!(make_lasso(op, Vector::zeros(3), 1.0).is_err());
        assert!(make_tv1d(Vector::from([1.0]), 1.0).is_err());
        assert!(make_tv1d(Vector::from([1.0, 2.0]), -1.0).is_err());
    }

    #[test]
    fn tv1d_uses_analytic_norm_bound() {
        let p = make_tv1d(Vector::from([0.0, 1.0, 1.0]), 0.5).unwrap();
        assert_eq!(p.operator.norm_bound(), 2.0);
        assert_eq!(p.dual_dim(), 2);
    }

    #[test]
    fn wrong_kkt_rejected() {
        let p = make_lasso(LinearOperator::identity(1).unwrap(), Vector::from([1.0]), 0.1).unwrap();
        let err = p.with_kkt(PPoint::zeros(1, 1)).unwrap_err();
        assert!(matches!(err, Error::OracleRejected { .. }));
    }

    #[test]
    fn long_run_requires_strict_params() {
        let p = make_tv1d(Vector::from([0.0, 1.0]), 0.1).unwrap();
        let boundary = SolverParams::at_safety(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!(kkt_by_long_run(&p, &boundary, 100).is_err());
    }

    #[test]
    fn long_run_rejects_unconverged() {
        let p = random_quadratic(5, 5, 1).unwrap();
        let params = SolverParams::at_safety(1.0, p.operator.norm_bound(), 0.9, 1.0).unwrap();
        assert!(matches!(
            kkt_by_long_run(&p, &params, 1),
            Err(Error::OracleRejected { .. })
        ));
    }
}
