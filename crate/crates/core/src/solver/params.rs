use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for classifying `tau sigma |L|^2` as sitting exactly on
/// the step-size boundary.
pub const EQUALITY_TOL: f64 = 1e-12;

/// Step sizes, relaxation parameter, and the certified bound on `|L|` they
/// are validated against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub operator_norm: f64,
}

impl SolverParams {
    pub fn new(tau: f64, sigma: f64, theta: f64, operator_norm: f64) -> Result<Self> {
        for (name, v) in [("tau", tau), ("sigma", sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
        }
        if !(operator_norm >= 0.0 && operator_norm.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "operator norm must be finite and nonnegative, got {operator_norm}"
            )));
        }
        Ok(SolverParams {
            tau,
            sigma,
            theta,
            operator_norm,
        })
    }

    /// Params with `tau sigma |L|^2 = safety * bound_rhs(theta)` and `tau / sigma = ratio`.
    /// Unlike [`suggest_steps`], `safety` may be `>= 1` (boundary or invalid runs).
    pub fn at_safety(theta: f64, operator_norm: f64, safety: f64, ratio: f64) -> Result<Self> {
        let rhs = bound_rhs(theta)?;
        let (tau, sigma) = steps_for_product(operator_norm, safety * rhs, ratio)?;
        SolverParams::new(tau, sigma, theta, operator_norm)
    }

    /// `tau sigma |L|^2`.
    pub fn product(&self) -> f64 {
        self.tau * self.sigma * self.operator_norm * self.operator_norm
    }
}

/// Denominator `1 - 2 theta + 9 theta^2 - 4 theta^3` of the step-size bound.
pub fn bound_denominator(theta: f64) -> f64 {
    1.0 - 2.0 * theta + 9.0 * theta * theta - 4.0 * theta * theta * theta
}

/// Right-hand side `4 theta (2 - theta) / (1 - 2 theta + 9 theta^2 - 4 theta^3)`
/// of the step-size condition, defined for `0 < theta <= 1`.
pub fn bound_rhs(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    Ok(4.0 * theta * (2.0 - theta) / bound_denominator(theta))
}

/// `|(1 - 2t + 9t^2 - 4t^3) - ((1 - t)^2 + 4t^2 (2 - t))|`.
pub fn denominator_identity_residual(theta: f64) -> f64 {
    let sum_of_squares = (1.0 - theta).powi(2) + 4.0 * theta * theta * (2.0 - theta);
    (bound_denominator(theta) - sum_of_squares).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamClass {
    /// Strict condition: iterates converge to a KKT point.
    StrictlyValid,
    /// On the boundary: ergodic gap rate only.
    ErgodicOnly,
    Invalid,
}

impl ParamClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamClass::StrictlyValid => "strictly_valid",
            ParamClass::ErgodicOnly => "ergodic_only",
            ParamClass::Invalid => "invalid",
        }
    }
}

/// Outcome of [`validate_params`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamStatus {
    pub class: ParamClass,
    /// `None` when theta lies outside `(0, 1]`.
    pub bound_rhs: Option<f64>,
    /// `tau sigma |L|^2`.
    pub product: f64,
    /// `bound_rhs - product`.
    pub margin: Option<f64>,
    /// `tau sigma |L|^2 (1 + theta)^2`, required to be `<= 4` (strictly under the strict condition).
    pub secondary_product: f64,
    pub secondary_holds: bool,
}

impl ParamStatus {
    pub fn is_valid(&self) -> bool {
        self.class != ParamClass::Invalid
    }
}

pub fn validate_params(p: &SolverParams) -> ParamStatus {
    let product = p.product();
    let secondary_product = product * (1.0 + p.theta).powi(2);
    let rhs = bound_rhs(p.theta).ok();
    let class = match rhs {
        None => ParamClass::Invalid,
        Some(rhs) if (product - rhs).abs() <= EQUALITY_TOL * rhs => ParamClass::ErgodicOnly,
        Some(rhs) if product < rhs => ParamClass::StrictlyValid,
        Some(_) => ParamClass::Invalid,
    };
    let secondary_holds = match class {
        ParamClass::StrictlyValid => secondary_product < 4.0,
        _ => secondary_product <= 4.0 * (1.0 + EQUALITY_TOL),
    };
    ParamStatus {
        class,
        bound_rhs: rhs,
        product,
        margin: rhs.map(|r| r - product),
        secondary_product,
        secondary_holds,
    }
}

/// Splits a target `tau sigma |L|^2 = product` into `(tau, sigma)` with `tau / sigma = ratio`.
pub fn steps_for_product(operator_norm: f64, product: f64, ratio: f64) -> Result<(f64, f64)> {
    if !(operator_norm > 0.0 && operator_norm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "operator norm must be positive, got {operator_norm}"
        )));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratio must be positive, got {ratio}")));
    }
    if !(product > 0.0 && product.is_finite()) {
        return Err(Error::InvalidArgument(format!("product must be positive, got {product}")));
    }
    let sigma = (product / ratio).sqrt() / operator_norm;
    Ok((ratio * sigma, sigma))
}

/// Step sizes strictly inside the admissible region:
/// `tau sigma |L|^2 = safety * bound_rhs(theta)` with `tau / sigma = ratio`.
pub fn suggest_steps(theta: f64, operator_norm: f64, safety: f64, ratio: f64) -> Result<(f64, f64)> {
    let rhs = bound_rhs(theta)?;
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!("safety must lie in (0, 1), got {safety}")));
    }
    steps_for_product(operator_norm, safety * rhs, ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_rhs_values() {
        assert_eq!(bound_rhs(1.0).unwrap(), 1.0);
        assert!((bound_rhs(0.5).unwrap() - 12.0 / 7.0).abs() < 1e-15);
        assert!(bound_rhs(1e-12).unwrap() < 1e-11);
        assert!(bound_rhs(0.0).is_err());
        assert!(bound_rhs(1.5).is_err());
        assert!(bound_rhs(-0.1).is_err());
    }

    #[test]
    fn denominator_identity_examples() {
        assert_eq!(bound_denominator(0.5), 1.75);
        assert_eq!(bound_denominator(0.0), 1.0);
        assert_eq!(bound_denominator(1.0), 4.0);
        for t in [0.0, 0.5, 1.0] {
            assert!(denominator_identity_residual(t) <= 1e-12);
        }
    }

    #[test]
    fn classification_examples() {
        let s = validate_params(&SolverParams::new(0.9, 0.9, 1.0, 1.0).unwrap());
        assert_eq!(s.class, ParamClass::StrictlyValid);
        assert!((s.product - 0.81).abs() < 1e-15);

        let s = validate_params(&SolverParams::new(1.0, 1.0, 1.0, 1.0).unwrap());
        assert_eq!(s.class, ParamClass::ErgodicOnly);
        assert!(s.secondary_holds);

        let s = validate_params(&SolverParams::new(1.0, 1.0, 0.5, 1.4).unwrap());
        assert_eq!(s.class, ParamClass::Invalid);
        assert!((s.product - 1.96).abs() < 1e-12);

        let s = validate_params(&SolverParams::new(0.1, 0.1, 0.0, 1.0).unwrap());
        assert_eq!(s.class, ParamClass::Invalid);
        assert_eq!(s.bound_rhs, None);
    }

    #[test]
    fn suggest_steps_examples() {
        let (tau, sigma) = suggest_steps(1.0, 1.0, 0.99, 1.0).unwrap();
        assert!((tau - 0.99f64.sqrt()).abs() < 1e-15);
        assert!((sigma - 0.99f64.sqrt()).abs() < 1e-15);

        let (tau, sigma) = suggest_steps(0.25, 2.0, 0.9, 1.0).unwrap();
        let expected = (0.9 * bound_rhs(0.25).unwrap()).sqrt() / 2.0;
        assert!((tau - expected).abs() < 1e-15 && (sigma - expected).abs() < 1e-15);

        let (t1, s1) = suggest_steps(0.6, 1.3, 0.8, 1.0).unwrap();
        let (t4, s4) = suggest_steps(0.6, 1.3, 0.8, 4.0).unwrap();
        assert!((t4 / s4 - 4.0).abs() < 1e-12);
        assert!((t1 * s1 - t4 * s4).abs() < 1e-14);
        let p = SolverParams::new(t4, s4, 0.6, 1.3).unwrap();
        assert_eq!(validate_params(&p).class, ParamClass::StrictlyValid);
    }

    #[test]
    fn suggest_steps_errors() {
        assert!(suggest_steps(0.0, 1.0, 0.5, 1.0).is_err());
        assert!(suggest_steps(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(suggest_steps(0.5, 0.0, 0.5, 1.0).is_err());
        assert!(suggest_steps(0.5, 1.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn boundary_params_are_ergodic_only() {
        for theta in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let p = SolverParams::at_safety(theta, 1.7, 1.0, 2.0).unwrap();
            assert_eq!(validate_params(&p).class, ParamClass::ErgodicOnly, "theta {theta}");
        }
    }

    #[test]
    fn params_reject_nonpositive_steps() {
        assert!(SolverParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SolverParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(SolverParams::new(1.0, 1.0, 1.0, -1.0).is_err());
    }
}
