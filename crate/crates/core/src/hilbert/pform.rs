use super::{LinearOperator, PPoint};
use crate::error::{check_dim, Result};
use crate::solver::SolverParams;

/// Bilinear form `<z1, P z2>` of the block operator
/// `P = [[I/tau, -(1+theta)/2 L*], [-(1+theta)/2 L, I/sigma]]`.
pub fn p_inner(z1: &PPoint, z2: &PPoint, op: &LinearOperator, params: &SolverParams) -> Result<f64> {
    for z in [z1, z2] {
        z.check_dims(op.cols(), op.rows())?;
    }
    let c = 0.5 * (1.0 + params.theta);
    let lx1 = op.apply(&z1.x)?;
    let lx2 = op.apply(&z2.x)?;
    Ok(z1.x.dot_unchecked(&z2.x) / params.tau + z1.y.dot_unchecked(&z2.y) / params.sigma
        - c * (lx1.dot_unchecked(&z2.y) + lx2.dot_unchecked(&z1.y)))
}

/// `|z|_P^2 = |x|^2/tau + |y|^2/sigma - (1+theta) <Lx, y>`.
///
/// Nonnegative whenever the non-strict step condition holds; a norm under
/// the strict one.
pub fn p_quadratic_form(z: &PPoint, op: &LinearOperator, params: &SolverParams) -> Result<f64> {
    check_dim("P-form primal", op.cols(), z.x.len())?;
    check_dim("P-form dual", op.rows(), z.y.len())?;
    let lx = op.apply(&z.x)?;
    Ok(z.x.norm_squared() / params.tau + z.y.norm_squared() / params.sigma
        - (1.0 + params.theta) * lx.dot_unchecked(&z.y))
}

/// Constants `(c_minus, c_plus)` with
/// `c_minus |z|^2 <= |z|_P^2 <= c_plus |z|^2`, obtained from Cauchy-Schwarz
/// and Young's inequality with the certified norm `params.operator_norm`.
pub fn p_form_sandwich(params: &SolverParams) -> (f64, f64) {
    let coupling = 0.5 * (params.tau * params.sigma).sqrt() * (1.0 + params.theta) * params.operator_norm;
    let lo = (1.0 / params.tau).min(1.0 / params.sigma);
    let hi = (1.0 / params.tau).max(1.0 / params.sigma);
    ((1.0 - coupling) * lo, (1.0 + coupling) * hi)
}
