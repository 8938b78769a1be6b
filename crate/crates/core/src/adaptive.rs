//! The adaptive controller
//!
//! ```text
//! u_ε(z, t) = g(|u0(z)|) u0(z) + k sgn(u0(z)) φ̂_ε(t, V1(z))
//! φ̂_ε(t, x) = min(t, F_ε(x))  if 0 <= x < ε,   t  otherwise
//! F_ε(x)    = ε / (ε - x)
//! ```
//!
//! The gain ramps with time until the barrier `F_ε(V1)` caps it; the
//! controller never reads the uncertainty bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{sgn, Stabilizer};
use crate::error::ConfigError;

/// Increasing, C¹, positive gain function `g : R+ → R+*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainFunction {
    /// `g ≡ value`; bounded, so only valid with a bounded `u0`.
    Constant { value: f64 },
    /// `g(x) = 1 + ln(1 + x)`.
    Logarithmic,
    /// `g(x) = offset + slope·x`.
    Affine { offset: f64, slope: f64 },
}

impl GainFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Logarithmic => 1.0 + x.ln_1p(),
            Self::Affine { offset, slope } => offset + slope * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::Logarithmic => 1.0 / (1.0 + x),
            Self::Affine { slope, .. } => slope,
        }
    }

    /// `sup_{x >= 0} g(x)`; infinite for the growing families.
    pub fn supremum(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Logarithmic => f64::INFINITY,
            Self::Affine { offset, slope } => {
                if slope > 0.0 {
                    f64::INFINITY
                } else {
                    offset
                }
            }
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.supremum().is_infinite()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            Self::Constant { value } if !(value > 0.0) || !value.is_finite() => Err(
                ConfigError::InvalidGain(format!("constant value must be positive (got {value})")),
            ),
            Self::Affine { offset, slope }
                if !(offset > 0.0)
                    || !(slope >= 0.0)
                    || !offset.is_finite()
                    || !slope.is_finite() =>
            {
                Err(ConfigError::InvalidGain(format!(
                    "affine gain needs offset > 0 and slope >= 0 (got {offset}, {slope})"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    epsilon: f64,
    k: f64,
    gain: GainFunction,
}

impl AdaptiveConfig {
    pub fn new(epsilon: f64, k: f64, gain: GainFunction) -> Result<Self, ConfigError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(ConfigError::NonPositive {
                name: "epsilon",
                value: epsilon,
            });
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(ConfigError::NonPositive {
                name: "k",
                value: k,
            });
        }
        gain.validate()?;
        Ok(Self { epsilon, k, gain })
    }

    /// Rejects a bounded `g` paired with an unbounded `u0`.
    pub fn check_compatible(&self, stab: &Stabilizer) -> Result<(), ConfigError> {
        if !stab.is_bounded() && !self.gain.is_unbounded() {
            return Err(ConfigError::BoundedGainForUnboundedStabilizer);
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gain(&self) -> GainFunction {
        self.gain
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BarrierError {
    #[error("F_eps is only defined on [0, eps): x = {x} >= eps = {epsilon}")]
    OutsideNeighborhood { x: f64, epsilon: f64 },
    #[error("F_eps argument must be nonnegative (got {0})")]
    Negative(f64),
}

/// Barrier `F_ε(x) = ε/(ε - x)` on `[0, ε)`.
pub fn f_eps(x: f64, epsilon: f64) -> Result<f64, BarrierError> {
    if x < 0.0 {
        return Err(BarrierError::Negative(x));
    }
    if x >= epsilon {
        return Err(BarrierError::OutsideNeighborhood { x, epsilon });
    }
    Ok(epsilon / (epsilon - x))
}

/// Adaptive function `φ̂_ε(t, x)`.
pub fn phi_hat(t: f64, x: f64, cfg: &AdaptiveConfig) -> f64 {
    debug_assert!(t >= 0.0 && x >= 0.0);
    match f_eps(x, cfg.epsilon) {
        Ok(barrier) => t.min(barrier),
        Err(_) => t,
    }
}

pub fn gain_g(x: f64, cfg: &AdaptiveConfig) -> f64 {
    cfg.gain.eval(x)
}

/// The applied input together with the adaptive gain that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    pub phi_hat: f64,
    pub u0: f64,
    pub v1: f64,
}

/// `u_ε(z, t)` with the selection `sgn(0) = 0`.
pub fn control_u(z: &[f64], t: f64, stab: &Stabilizer, cfg: &AdaptiveConfig) -> ControlOutput {
    let nominal = stab.evaluate(z);
    compose_control(nominal.u0, nominal.v1, t, cfg)
}

pub(crate) fn compose_control(u0: f64, v1: f64, t: f64, cfg: &AdaptiveConfig) -> ControlOutput {
    let ph = phi_hat(t, v1, cfg);
    let u = gain_g(u0.abs(), cfg) * u0 + cfg.k * sgn(u0) * ph;
    ControlOutput {
        u,
        phi_hat: ph,
        u0,
        v1,
    }
}

/// First-order controller `u = -(1 + φ̂_ε(t, |z_1|)) sgn(z_1)`.
pub fn first_order_controller(z1: f64, t: f64, cfg: &AdaptiveConfig) -> f64 {
    -(1.0 + phi_hat(t, z1.abs(), cfg)) * sgn(z1)
}
