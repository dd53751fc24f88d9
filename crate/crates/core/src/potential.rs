//! Double-well potentials, their derivatives and the AVF line integral.
//!
//! Two potentials drive the Allen-Cahn nonlinearity `f = F'`:
//!
//! - quartic: `F(u) = (u^2 - 1)^2 / 4`, `f(u) = u^3 - u`;
//! - logarithmic: `F(u) = (theta [(1+u) ln(1+u) + (1-u) ln(1-u)]
//!   - theta_c u^2) / 2`, `f(u) = (theta/2) ln((1+u)/(1-u)) - theta_c u`,
//!   defined for `|u| < 1`.
//!
//! The implicit time integrator needs the line integral
//! `int_0^1 f(tau b + (1 - tau) a) dtau` between two states of one
//! quadrature point. For the quartic potential this integral has the
//! polynomial closed form `(a^2 + b^2 - 2)(a + b) / 4`, which equals
//! `(F(b) - F(a)) / (b - a)` without cancellation and makes the discrete
//! energy identity hold to machine precision. The logarithmic integrand
//! is smooth along any segment inside (-1, 1) and is integrated with
//! 4-point Gauss-Legendre.

use crate::error::Error;
use crate::Result;

/// Clamp half-width for logarithmic evaluations, `|u| <= 1 - DELTA`.
pub const LOG_CLAMP_DELTA: f64 = 1e-8;

/// Gauss-Legendre nodes/weights on [0, 1] for the logarithmic tau
/// integral (values from `quadrature::gauss_legendre_01(4)`).
const TAU_NODES: [f64; 4] = [
    0.069431844202973712,
    0.330009478207571868,
    0.669990521792428132,
    0.930568155797026288,
];
const TAU_WEIGHTS: [f64; 4] = [
    0.173927422568726929,
    0.326072577431273071,
    0.326072577431273071,
    0.173927422568726929,
];

/// Double-well potential choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Quartic,
    /// Logarithmic potential with temperature `theta` and transition
    /// temperature `theta_c`.
    Logarithmic { theta: f64, theta_c: f64 },
}

/// What to do when a logarithmic argument falls outside (-1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClampPolicy {
    /// Clamp to `[-1 + delta, 1 - delta]` before evaluating.
    #[default]
    Clamp,
    /// Return [`Error::NonlinearDomain`].
    Reject,
}

impl Potential {
    pub fn logarithmic(theta: f64, theta_c: f64) -> Result<Self> {
        if theta > 0.0 && theta_c > 0.0 {
            Ok(Self::Logarithmic { theta, theta_c })
        } else {
            Err(Error::InvalidPotential { theta, theta_c })
        }
    }

    /// Potential value `F(u)`.
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Self::Quartic => {
                let s = u * u - 1.0;
                0.25 * s * s
            }
            Self::Logarithmic { theta, theta_c } => {
                let u = clamp_log(u);
                0.5 * (theta * ((1.0 + u) * (1.0 + u).ln() + (1.0 - u) * (1.0 - u).ln())
                    - theta_c * u * u)
            }
        }
    }

    /// Derivative `f(u) = F'(u)`.
    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Self::Quartic => u * u * u - u,
            Self::Logarithmic { theta, theta_c } => {
                let u = clamp_log(u);
                0.5 * theta * ((1.0 + u) / (1.0 - u)).ln() - theta_c * u
            }
        }
    }

    /// Second derivative `f'(u)`, used by Newton Jacobians.
    pub fn second_derivative(&self, u: f64) -> f64 {
        match *self {
            Self::Quartic => 3.0 * u * u - 1.0,
            Self::Logarithmic { theta, theta_c } => {
                let u = clamp_log(u);
                theta / (1.0 - u * u) - theta_c
            }
        }
    }

    /// AVF line integral `int_0^1 f(tau b + (1 - tau) a) dtau`.
    pub fn avf_line_integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            // (F(b) - F(a)) / (b - a) in closed polynomial form; also
            // correct at a == b where it reduces to f(a).
            Self::Quartic => 0.25 * (a * a + b * b - 2.0) * (a + b),
            Self::Logarithmic { .. } => {
                let mut acc = 0.0;
                for (t, w) in TAU_NODES.iter().zip(&TAU_WEIGHTS) {
                    acc += w * self.derivative(t * b + (1.0 - t) * a);
                }
                acc
            }
        }
    }

    /// Derivative of [`Self::avf_line_integral`] with respect to `b`.
    pub fn avf_line_integral_db(&self, a: f64, b: f64) -> f64 {
        match *self {
            Self::Quartic => 0.25 * (a * a + 2.0 * a * b + 3.0 * b * b - 2.0),
            Self::Logarithmic { .. } => {
                let mut acc = 0.0;
                for (t, w) in TAU_NODES.iter().zip(&TAU_WEIGHTS) {
                    acc += w * t * self.second_derivative(t * b + (1.0 - t) * a);
                }
                acc
            }
        }
    }

    /// Check `u` against the potential's domain under the given policy.
    /// Only the logarithmic potential is restricted.
    pub fn check_domain(&self, u: f64, policy: ClampPolicy, element: usize) -> Result<()> {
        match self {
            Self::Quartic => Ok(()),
            Self::Logarithmic { .. } => {
                if policy == ClampPolicy::Reject && u.abs() > 1.0 - LOG_CLAMP_DELTA {
                    Err(Error::NonlinearDomain { value: u, element })
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn clamp_log(u: f64) -> f64 {
    u.clamp(-1.0 + LOG_CLAMP_DELTA, 1.0 - LOG_CLAMP_DELTA)
}
