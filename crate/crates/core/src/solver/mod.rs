//! The Chambolle-Pock iteration
//!
//! ```text
//! x+ = prox_{tau f}(x - tau L* y)
//! y+ = prox_{sigma g*}(y + sigma L (x+ + theta (x+ - x)))
//! ```
//!
//! together with step-size validation and ergodic averaging.

mod iteration;
mod params;

pub use iteration::{run, run_with_observer, step, RunOptions, StopReason, StoppingRule, Storage, Trajectory};
pub use params::{
    bound_denominator, bound_rhs, denominator_identity_residual, steps_for_product, suggest_steps,
    validate_params, ParamClass, ParamStatus, SolverParams, EQUALITY_TOL,
};
