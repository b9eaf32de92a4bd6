//! Proximal operators of the convex functions used by the shipped problem
//! families.
//!
//! Every [`ProxFn`] has a closed-form prox and a closed-form conjugate that is
//! again a [`ProxFn`], so `g*` can be evaluated inside the duality gap while
//! its prox is obtained through the Moreau identity.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hilbert::Vector;

/// Slack on indicator membership. Averages of feasible points can leave a
/// box or orthant by a rounding error.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Value of an extended-real-valued function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(v) if v.is_finite())
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PlusInfinity => None,
        }
    }

    /// `f64` view with `+inf` for [`ExtReal::PlusInfinity`].
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PlusInfinity,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInfinity => f.write_str("+inf"),
        }
    }
}

/// Proper convex lower semicontinuous function with a closed-form prox.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxFn {
    /// `f = 0`.
    Zero,
    /// `f(x) = lambda |x|_1`.
    L1 { lambda: f64 },
    /// `f(x) = 1/2 |x - center|^2 + offset`.
    Quadratic { center: Vector, offset: f64 },
    /// Indicator of `{x : x >= 0}`.
    NonnegIndicator,
    /// Indicator of `{x : x <= 0}`.
    NonposIndicator,
    /// Indicator of `{x : |x|_inf <= radius}`.
    LinfBall { radius: f64 },
    /// Indicator of the origin.
    OriginIndicator,
}

impl ProxFn {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(ProxFn::L1 { lambda })
    }

    /// `1/2 |x - center|^2`.
    pub fn half_squared_distance(center: Vector) -> Self {
        ProxFn::Quadratic { center, offset: 0.0 }
    }

    pub fn linf_ball(radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {radius}")));
        }
        Ok(ProxFn::LinfBall { radius })
    }

    /// Registry key used by problem files.
    pub fn key(&self) -> &'static str {
        match self {
            ProxFn::Zero => "zero",
            ProxFn::L1 { .. } => "l1",
            ProxFn::Quadratic { .. } => "quadratic",
            ProxFn::NonnegIndicator => "nonneg",
            ProxFn::NonposIndicator => "nonpos",
            ProxFn::LinfBall { .. } => "linf_ball",
            ProxFn::OriginIndicator => "origin",
        }
    }

    /// Looks up a function by registry key. `lambda` parameterizes `l1` and
    /// `linf_ball`; `center` parameterizes `quadratic` (origin if absent).
    pub fn from_key(key: &str, lambda: Option<f64>, center: Option<Vector>, dim: usize) -> Result<Self> {
        let need_lambda = || {
            lambda.ok_or_else(|| Error::InvalidArgument(format!("prox `{key}` needs a lambda")))
        };
        match key {
            "zero" => Ok(ProxFn::Zero),
            "l1" => ProxFn::l1(need_lambda()?),
            "quadratic" => {
                let c = center.unwrap_or_else(|| Vector::zeros(dim));
                check_dim("quadratic center", dim, c.len())?;
                Ok(ProxFn::half_squared_distance(c))
            }
            "nonneg" => Ok(ProxFn::NonnegIndicator),
            "nonpos" => Ok(ProxFn::NonposIndicator),
            "linf_ball" => ProxFn::linf_ball(need_lambda()?),
            "origin" => Ok(ProxFn::OriginIndicator),
            other => Err(Error::InvalidArgument(format!("unknown prox function `{other}`"))),
        }
    }

    pub fn domain_description(&self) -> String {
        match self {
            ProxFn::Zero | ProxFn::L1 { .. } | ProxFn::Quadratic { .. } => "all of R^n".into(),
            ProxFn::NonnegIndicator => "nonnegative orthant".into(),
            ProxFn::NonposIndicator => "nonpositive orthant".into(),
            ProxFn::LinfBall { radius } => format!("|x|_inf <= {radius}"),
            ProxFn::OriginIndicator => "{0}".into(),
        }
    }

    fn check_center(&self, x: &Vector) -> Result<()> {
        if let ProxFn::Quadratic { center, .. } = self {
            check_dim("quadratic argument", center.len(), x.len())?;
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Vector) -> Result<ExtReal> {
        self.check_center(x)?;
        let indicator = |inside: bool| {
            if inside {
                ExtReal::Finite(0.0)
            } else {
                ExtReal::PlusInfinity
            }
        };
        Ok(match self {
            ProxFn::Zero => ExtReal::Finite(0.0),
            ProxFn::L1 { lambda } => ExtReal::Finite(lambda * x.norm_l1()),
            ProxFn::Quadratic { center, offset } => {
                ExtReal::Finite(0.5 * (x - center).norm_squared() + offset)
            }
            ProxFn::NonnegIndicator => indicator(x.iter().all(|&v| v >= -FEASIBILITY_TOL)),
            ProxFn::NonposIndicator => indicator(x.iter().all(|&v| v <= FEASIBILITY_TOL)),
            ProxFn::LinfBall { radius } => {
                let slack = FEASIBILITY_TOL * radius.max(1.0);
                indicator(x.norm_inf() <= radius + slack)
            }
            ProxFn::OriginIndicator => indicator(x.norm_inf() <= FEASIBILITY_TOL),
        })
    }

    /// `prox_{gamma f}(x) = argmin_z f(z) + |x - z|^2 / (2 gamma)`.
    pub fn prox(&self, x: &Vector, gamma: f64) -> Result<Vector> {
        check_step(gamma)?;
        self.check_center(x)?;
        Ok(match self {
            ProxFn::Zero => x.clone(),
            ProxFn::L1 { lambda } => soft_threshold(x, gamma * lambda),
            ProxFn::Quadratic { center, .. } => quadratic_prox(x, gamma, center),
            ProxFn::NonnegIndicator => x.map(|v| v.max(0.0)),
            ProxFn::NonposIndicator => x.map(|v| v.min(0.0)),
            ProxFn::LinfBall { radius } => x.map(|v| v.clamp(-radius, *radius)),
            ProxFn::OriginIndicator => Vector::zeros(x.len()),
        })
    }

    /// Convex conjugate `f*(u) = sup_x <u, x> - f(x)`, in closed form.
    pub fn conjugate(&self) -> ProxFn {
        match self {
            ProxFn::Zero => ProxFn::OriginIndicator,
            ProxFn::OriginIndicator => ProxFn::Zero,
            ProxFn::L1 { lambda } => ProxFn::LinfBall { radius: *lambda },
            ProxFn::LinfBall { radius } => ProxFn::L1 { lambda: *radius },
            ProxFn::NonnegIndicator => ProxFn::NonposIndicator,
            ProxFn::NonposIndicator => ProxFn::NonnegIndicator,
            // 1/2|x-c|^2 + o  has conjugate  1/2|u+c|^2 - 1/2|c|^2 - o.
            ProxFn::Quadratic { center, offset } => ProxFn::Quadratic {
                center: -center,
                offset: -0.5 * center.norm_squared() - offset,
            },
        }
    }

    /// Decides `u in df(p)` up to `tol` (scaled by `1 + |u_i|` componentwise).
    pub fn subdifferential_contains(&self, p: &Vector, u: &Vector, tol: f64) -> bool {
        if p.len() != u.len() || self.check_center(p).is_err() {
            return false;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        let pairs = || p.iter().copied().zip(u.iter().copied());
        match self {
            ProxFn::Zero => u.iter().all(|&ui| close(ui, 0.0)),
            ProxFn::L1 { lambda } => pairs().all(|(pi, ui)| {
                if pi > 0.0 {
                    close(ui, *lambda)
                } else if pi < 0.0 {
                    close(ui, -lambda)
                } else {
                    ui.abs() <= lambda + tol * (1.0 + lambda)
                }
            }),
            ProxFn::Quadratic { center, .. } => {
                pairs().zip(center.iter()).all(|((pi, ui), ci)| close(ui, pi - ci))
            }
            ProxFn::NonnegIndicator => pairs().all(|(pi, ui)| {
                pi >= -tol && ui <= tol * (1.0 + pi.abs()) && (pi.abs() <= tol || close(ui, 0.0))
            }),
            ProxFn::NonposIndicator => pairs().all(|(pi, ui)| {
                pi <= tol && ui >= -tol * (1.0 + pi.abs()) && (pi.abs() <= tol || close(ui, 0.0))
            }),
            ProxFn::LinfBall { radius } => pairs().all(|(pi, ui)| {
                let slack = tol * (1.0 + radius);
                if pi.abs() > radius + slack {
                    false
                } else if *radius == 0.0 {
                    true
                } else if pi >= radius - slack {
                    ui >= -tol
                } else if pi <= -radius + slack {
                    ui <= tol
                } else {
                    close(ui, 0.0)
                }
            }),
            ProxFn::OriginIndicator => p.norm_inf() <= tol,
        }
    }
}

fn check_step(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("prox step must be positive, got {gamma}")))
    }
}

fn soft_threshold(x: &Vector, t: f64) -> Vector {
    x.map(|v| v.signum() * (v.abs() - t).max(0.0))
}

fn quadratic_prox(x: &Vector, gamma: f64, center: &Vector) -> Vector {
    x.zip_map(center, |xi, ci| (xi + gamma * ci) / (1.0 + gamma))
}

/// Componentwise soft-thresholding at `gamma * lambda`: the prox of `lambda |.|_1`.
pub fn prox_l1(x: &Vector, gamma: f64, lambda: f64) -> Result<Vector> {
    check_step(gamma)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(soft_threshold(x, gamma * lambda))
}

/// Prox of `1/2 |. - a|^2`: `(x + gamma a) / (1 + gamma)`.
pub fn prox_quadratic(x: &Vector, gamma: f64, a: &Vector) -> Result<Vector> {
    check_step(gamma)?;
    check_dim("quadratic prox", a.len(), x.len())?;
    Ok(quadratic_prox(x, gamma, a))
}

/// Projection onto the nonnegative orthant. The step is irrelevant to a
/// projection and is ignored.
pub fn prox_indicator_nonneg(x: &Vector, _gamma: f64) -> Vector {
    x.map(|v| v.max(0.0))
}

/// `prox_{sigma g*}(y) = y - sigma prox_{g/sigma}(y / sigma)` (Moreau identity).
pub fn prox_conjugate(g: &ProxFn, y: &Vector, sigma: f64) -> Result<Vector> {
    check_step(sigma)?;
    let inner = g.prox(&y.scale(1.0 / sigma), 1.0 / sigma)?;
    Ok(y.axpy(-sigma, &inner))
}

/// Checks the prox characterization `(x - p) / gamma in df(p)` at
/// `p = prox_{gamma f}(x)` with a caller-supplied subgradient test.
/// Returns `false` on violation or on a failed prox evaluation.
pub fn check_prox_inclusion(
    f: &ProxFn,
    x: &Vector,
    gamma: f64,
    subgrad_test: impl Fn(&Vector, &Vector) -> bool,
) -> bool {
    match f.prox(x, gamma) {
        Ok(p) => {
            let u = (x - &p).scale(1.0 / gamma);
            subgrad_test(&p, &u)
        }
        Err(_) => false,
    }
}
