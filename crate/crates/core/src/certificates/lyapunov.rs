use serde::{Deserialize, Serialize};

use super::KktPoint;
use crate::error::{Error, Result};
use crate::hilbert::{p_quadratic_form, PPoint, Vector};
use crate::problems::Problem;
use crate::prox::ExtReal;
use crate::solver::{bound_denominator, SolverParams};

/// Duality gap `D(x, y) = L(x, y*) - L(x*, y)` of the Lagrangian
/// `L(x, y) = f(x) + <y, Lx> - g*(y)`.
///
/// Evaluated as the sum of the two nonnegative Bregman-type pieces
/// `f(x) - f(x*) + <L*y*, x - x*>` and `g*(y) - g*(y*) - <Lx*, y - y*>`.
pub fn duality_gap(z: &PPoint, kkt: &KktPoint, problem: &Problem) -> Result<ExtReal> {
    z.check_dims(problem.primal_dim(), problem.dual_dim())?;
    let (Some(fx), Some(gy)) = (
        problem.f_value(&z.x)?.finite(),
        problem.gstar_value(&z.y)?.finite(),
    ) else {
        return Ok(ExtReal::PlusInfinity);
    };
    let dx = &z.x - &kkt.star.x;
    let dy = &z.y - &kkt.star.y;
    let primal = fx - kkt.f_star + kkt.adj_ystar().dot_unchecked(&dx);
    let dual = gy - kkt.gstar_star - kkt.l_xstar().dot_unchecked(&dy);
    Ok(ExtReal::Finite(primal + dual))
}

/// Cross term `<y^k - y*, L(x^{k+1} - x^k)> - <L(x^k - x*), y^{k+1} - y^k>`.
fn cross_term(zk: &PPoint, zk1: &PPoint, kkt: &KktPoint, problem: &Problem) -> Result<f64> {
    let op = &problem.operator;
    let a = (&zk.y - &kkt.star.y).dot(&op.apply(&(&zk1.x - &zk.x))?)?;
    let b = op.apply(&(&zk.x - &kkt.star.x))?.dot(&(&zk1.y - &zk.y))?;
    Ok(a - b)
}

/// `V(k)` from `z^k`, `z^{k+1}` and a precomputed `D(z^{k+1})`.
pub(crate) fn lyapunov_with_gap(
    zk: &PPoint,
    zk1: &PPoint,
    gap_next: ExtReal,
    kkt: &KktPoint,
    problem: &Problem,
    params: &SolverParams,
) -> Result<f64> {
    let op = &problem.operator;
    let dist = p_quadratic_form(&(zk - &kkt.star), op, params)?;
    let inc = p_quadratic_form(&(zk1 - zk), op, params)?;
    let w = 0.5 * (1.0 - params.theta);
    let mut v = 0.5 * dist - 0.25 * inc;
    if w != 0.0 {
        let gap = gap_next.finite().ok_or(Error::NonFiniteCertificate {
            quantity: "duality gap",
            k: 0,
        })?;
        v -= w * gap + w * cross_term(zk, zk1, kkt, problem)?;
    }
    Ok(v)
}

/// Lyapunov function
/// `V(k) = 1/2 |z^k - z*|_P^2 - 1/4 |z^{k+1} - z^k|_P^2 - (1-theta)/2 D(z^{k+1})
///        - (1-theta)/2 (<y^k - y*, L(x^{k+1} - x^k)> - <L(x^k - x*), y^{k+1} - y^k>)`.
///
/// Iterates of the method lie in `dom f x dom g*`, so a non-finite value is
/// reported as [`Error::NonFiniteCertificate`].
pub fn lyapunov(zk: &PPoint, zk1: &PPoint, kkt: &KktPoint, problem: &Problem, params: &SolverParams) -> Result<f64> {
    let gap = duality_gap(zk1, kkt, problem)?;
    let v = lyapunov_with_gap(zk, zk1, gap, kkt, problem, params)?;
    super::finite(v, "lyapunov", 0)
}

/// Weights `eta_+` and `eta_-` of the squared increment combinations in the
/// descent inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub plus: f64,
    pub minus: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {theta}")))
    }
}

/// `eta_pm = [4 theta (2 - theta) - tau sigma |L|^2 (1 - 2 theta + 9 theta^2 - 4 theta^3)]
///          / [8 (1 pm sqrt(tau sigma) |L| theta (1 - theta))]`.
pub fn eta_coefficients(params: &SolverParams) -> Result<Eta> {
    let theta = params.theta;
    check_theta(theta)?;
    let numerator = 4.0 * theta * (2.0 - theta) - params.product() * bound_denominator(theta);
    let s = (params.tau * params.sigma).sqrt() * params.operator_norm * theta * (1.0 - theta);
    let (d_plus, d_minus) = (8.0 * (1.0 + s), 8.0 * (1.0 - s));
    for d in [d_plus, d_minus] {
        if !(d > 0.0) {
            return Err(Error::EtaDenominator { denominator: d });
        }
    }
    Ok(Eta {
        plus: numerator / d_plus,
        minus: numerator / d_minus,
    })
}

/// The same coefficients assembled as `gamma_pm - beta_pm^2 / alpha_pm` from the
/// square-completion constants
/// `alpha_pm = (1 pm s theta (1 - theta)) / 2`,
/// `beta_pm = (2 (1 - theta) pm (1 + theta) s) / 4`,
/// `gamma_pm = (1 pm s (1 - theta)) / 2`, with `s = sqrt(tau sigma) |L|`.
pub fn eta_from_square_completion(params: &SolverParams) -> Result<Eta> {
    let theta = params.theta;
    check_theta(theta)?;
    let s = (params.tau * params.sigma).sqrt() * params.operator_norm;
    let block = |sign: f64| {
        let alpha = 0.5 * (1.0 + sign * s * theta * (1.0 - theta));
        let beta = 0.25 * (2.0 * (1.0 - theta) + sign * (1.0 + theta) * s);
        let gamma = 0.5 * (1.0 + sign * s * (1.0 - theta));
        if alpha > 0.0 {
            Ok(gamma - beta * beta / alpha)
        } else {
            Err(Error::EtaDenominator { denominator: 16.0 * alpha })
        }
    };
    Ok(Eta {
        plus: block(1.0)?,
        minus: block(-1.0)?,
    })
}

/// `K dx` with `K = L / |L|` (zero when the bound is zero), using the
/// certified bound as `|L|`.
fn k_apply(dx: &Vector, problem: &Problem, params: &SolverParams) -> Result<Vector> {
    let kdx = problem.operator.apply(dx)?;
    Ok(if params.operator_norm > 0.0 {
        kdx.scale(1.0 / params.operator_norm)
    } else {
        Vector::zeros(kdx.len())
    })
}

/// `|dx|^2 - |K dx|^2`, nonnegative since `|K| <= 1`.
pub fn k_term(dx: &Vector, problem: &Problem, params: &SolverParams) -> Result<f64> {
    Ok(dx.norm_squared() - k_apply(dx, problem, params)?.norm_squared())
}

/// Everything subtracted from `V(k) - D(z^{k+1})` on the right of the descent inequality.
pub(crate) fn descent_terms(
    zk: &PPoint,
    zk1: &PPoint,
    zk2: &PPoint,
    eta: &Eta,
    problem: &Problem,
    params: &SolverParams,
) -> Result<f64> {
    let dx = &zk2.x - &zk1.x;
    let dy = &zk1.y - &zk.y;
    let kdx = k_apply(&dx, problem, params)?.scale(1.0 / params.tau.sqrt());
    let dy = dy.scale(1.0 / params.sigma.sqrt());
    let k_part = params.theta / (4.0 * params.tau) * k_term(&dx, problem, params)?;
    let plus = (&kdx + &dy).norm_squared();
    let minus = (&kdx - &dy).norm_squared();
    Ok(k_part + 0.25 * eta.plus * plus + 0.25 * eta.minus * minus)
}

/// `V(k+1) - [V(k) - D(z^{k+1}) - (theta/4tau)(|dx|^2 - |K dx|^2) - (eta_+/4)|K dx/sqrt(tau) + dy/sqrt(sigma)|^2 - (eta_-/4)|K dx/sqrt(tau) - dy/sqrt(sigma)|^2]`
///
/// with `dx = x^{k+2} - x^{k+1}` and `dy = y^{k+1} - y^k`. Nonpositive when the
/// descent inequality holds.
pub fn descent_residual(
    zk: &PPoint,
    zk1: &PPoint,
    zk2: &PPoint,
    kkt: &KktPoint,
    problem: &Problem,
    params: &SolverParams,
) -> Result<f64> {
    let eta = eta_coefficients(params)?;
    let gap1 = duality_gap(zk1, kkt, problem)?;
    let gap2 = duality_gap(zk2, kkt, problem)?;
    let v_k = lyapunov_with_gap(zk, zk1, gap1, kkt, problem, params)?;
    let v_k1 = lyapunov_with_gap(zk1, zk2, gap2, kkt, problem, params)?;
    let d1 = gap1.finite().ok_or(Error::NonFiniteCertificate {
        quantity: "duality gap",
        k: 0,
    })?;
    let terms = descent_terms(zk, zk1, zk2, &eta, problem, params)?;
    super::finite(v_k1 - (v_k - d1 - terms), "descent residual", 0)
}

/// `1/2 |z^{k+1} - z*|_P^2 - V(k)`; nonpositive when the lower bound holds.
pub fn lower_bound_residual(
    zk: &PPoint,
    zk1: &PPoint,
    kkt: &KktPoint,
    problem: &Problem,
    params: &SolverParams,
) -> Result<f64> {
    let v = lyapunov(zk, zk1, kkt, problem, params)?;
    let dist = p_quadratic_form(&(zk1 - &kkt.star), &problem.operator, params)?;
    super::finite(0.5 * dist - v, "lower bound residual", 0)
}
