use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{LinearOperator, Vector};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Result of a power iteration on `L*L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    /// Estimated largest singular value.
    pub value: f64,
    pub iterations: usize,
    /// `false` when `max_iters` ran out before the relative change fell below `tol`.
    pub converged: bool,
}

/// Estimates `|L|` by power iteration on `L*L`.
///
/// The start vector is pseudo-random with a seed derived from the operator
/// shape, so the estimate is reproducible. Non-convergence is reported in the
/// returned [`NormEstimate`] and logged at warn level.
pub fn estimate_norm(op: &LinearOperator, tol: f64, max_iters: usize) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let seed = ((op.rows() as u64) << 32) ^ (op.cols() as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vector::from_fn(op.cols(), |_| StandardNormal.sample(&mut rng));
    let n0 = v.norm();
    v = v.scale(1.0 / n0);

    let mut lambda = 0.0_f64;
    for it in 1..=max_iters {
        let w = op.apply_adjoint(&op.apply(&v)?)?;
        // Rayleigh quotient of L*L at the unit vector v.
        let next = v.dot_unchecked(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        v = w.scale(1.0 / wn);
        if (next - lambda).abs() <= tol * next.abs() {
            return Ok(NormEstimate {
                value: next.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            });
        }
        lambda = next;
    }
    log::warn!(
        "power iteration on a {}x{} operator did not reach tol {tol:e} in {max_iters} iterations",
        op.rows(),
        op.cols()
    );
    Ok(NormEstimate {
        value: lambda.max(0.0).sqrt(),
        iterations: max_iters,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DenseMatrix;

    #[test]
    fn diagonal_norm() {
        let op = LinearOperator::dense(DenseMatrix::diagonal(&[3.0, 1.0]).unwrap());
        let est = op.estimate_norm();
        assert!(est.converged);
        assert!((est.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_operator() {
        let op = LinearOperator::dense(DenseMatrix::zeros(3, 2).unwrap());
        assert_eq!(op.estimate_norm().value, 0.0);
        assert_eq!(op.norm_bound(), 0.0);
    }

    #[test]
    fn nonconvergence_is_flagged() {
        // A 0.999 singular-value ratio cannot settle to 1e-14 in two steps.
        let op = LinearOperator::dense(DenseMatrix::diagonal(&[1.0, 0.999, 0.5]).unwrap());
        let est = estimate_norm(&op, 1e-14, 2).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 2);
    }

    #[test]
    fn rejects_nonpositive_tol() {
        let op = LinearOperator::identity(2).unwrap();
        assert!(estimate_norm(&op, 0.0, 10).is_err());
    }

    #[test]
    fn deterministic() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]]).unwrap();
        let op = LinearOperator::dense(m);
        assert_eq!(op.estimate_norm(), op.estimate_norm());
    }
}
