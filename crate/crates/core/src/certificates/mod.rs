//! Numerical evaluation of the Lyapunov analysis of the iteration: the
//! duality gap, the Lyapunov function `V(k)`, the `eta` coefficients, the
//! one-step descent inequality, the lower bound `V(k) >= 1/2 |z^{k+1} - z*|_P^2`,
//! and the ergodic summation bounds.
//!
//! Every check returns a residual (`lhs - rhs`, nonpositive when the
//! inequality holds). Pass/fail flags compare residuals against a tolerance
//! relative to `1 + |dominant term|`; see [`monitor::evaluate_flags`].

mod ergodic;
mod lyapunov;
pub mod monitor;

pub use ergodic::{ergodic_bound_check, ErgodicEntry, ErgodicReport};
pub use lyapunov::{
    descent_residual, duality_gap, eta_coefficients, eta_from_square_completion, k_term, lower_bound_residual,
    lyapunov, Eta,
};
pub use monitor::{
    certify_trajectory, evaluate_flags, CertificateLog, CertificateMode, CertificateRow, CertificateSummary,
    Certifier, CheckCounts, Flags, DEFAULT_CERTIFICATE_TOL,
};

use crate::error::{Error, Result};
use crate::hilbert::{PPoint, Vector};
use crate::problems::{kkt_residual, Problem};

/// A KKT point `(x*, y*)` with the quantities the gap function reuses.
#[derive(Clone, Debug, PartialEq)]
pub struct KktPoint {
    pub star: PPoint,
    /// `f(x*)`.
    pub f_star: f64,
    /// `g*(y*)`.
    pub gstar_star: f64,
    /// Measured KKT residual, see [`kkt_residual`].
    pub residual: f64,
    l_xstar: Vector,
    adj_ystar: Vector,
}

impl KktPoint {
    /// Evaluates and caches `f(x*)`, `g*(y*)`, `L x*`, `L* y*` and the residual.
    pub fn new(problem: &Problem, star: PPoint) -> Result<Self> {
        let f_star = problem.f_value(&star.x)?.finite().ok_or_else(|| {
            Error::InvalidArgument("KKT candidate lies outside dom f".into())
        })?;
        let gstar_star = problem.gstar_value(&star.y)?.finite().ok_or_else(|| {
            Error::InvalidArgument("KKT candidate lies outside dom g*".into())
        })?;
        let residual = kkt_residual(problem, &star)?;
        Ok(KktPoint {
            l_xstar: problem.operator.apply(&star.x)?,
            adj_ystar: problem.operator.apply_adjoint(&star.y)?,
            star,
            f_star,
            gstar_star,
            residual,
        })
    }

    pub fn l_xstar(&self) -> &Vector {
        &self.l_xstar
    }

    pub fn adj_ystar(&self) -> &Vector {
        &self.adj_ystar
    }
}

pub(crate) fn finite(value: f64, quantity: &'static str, k: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteCertificate { quantity, k })
    }
}
