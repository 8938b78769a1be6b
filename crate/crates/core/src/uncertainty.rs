//! Time-varying uncertainties `φ(t)` and `γ(t)` of the perturbed chain
//! `ż_r = φ(t) + γ(t) u`, with declared bounds `|φ| <= φ̄`, `γ_m <= γ <= γ_M`.
//!
//! The bounds are metadata for the analysis; the controller never reads them.

use serde::{Deserialize, Serialize};

use crate::chain::sgn;
use crate::error::{BoundViolation, ConfigError};

/// Relative slack on the declared bounds, absorbing rounding in sums of terms.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalTerm {
    Constant {
        value: f64,
    },
    /// `amplitude·sin(omega·t)`
    Sine {
        amplitude: f64,
        omega: f64,
    },
    /// `amplitude·sgn(cos(omega·t))`
    SignCos {
        amplitude: f64,
        omega: f64,
    },
    /// `amplitude·sgn(sin(omega·t))`
    SignSin {
        amplitude: f64,
        omega: f64,
    },
}

impl SignalTerm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
            Self::SignCos { amplitude, omega } => amplitude * sgn((omega * t).cos()),
            Self::SignSin { amplitude, omega } => amplitude * sgn((omega * t).sin()),
        }
    }
}

/// Sum of terms; the empty sum is the zero signal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal(pub Vec<SignalTerm>);

impl Signal {
    pub fn constant(value: f64) -> Self {
        Self(vec![SignalTerm::Constant { value }])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().map(|term| term.eval(t)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyModel {
    phi: Signal,
    gamma: Signal,
    phi_bar: f64,
    gamma_min: f64,
    gamma_max: f64,
}

impl UncertaintyModel {
    pub fn new(
        phi: Signal,
        gamma: Signal,
        phi_bar: f64,
        gamma_min: f64,
        gamma_max: f64,
    ) -> Result<Self, ConfigError> {
        if !(phi_bar > 0.0) || !phi_bar.is_finite() {
            return Err(ConfigError::NonPositive {
                name: "phi_bar",
                value: phi_bar,
            });
        }
        if !(gamma_min > 0.0) || !(gamma_min <= gamma_max) || !gamma_max.is_finite() {
            return Err(ConfigError::InvalidGammaBounds {
                gamma_min,
                gamma_max,
            });
        }
        Ok(Self {
            phi,
            gamma,
            phi_bar,
            gamma_min,
            gamma_max,
        })
    }

    /// `φ = 5 sgn(cos t) - 10 sin 2t`, `γ = 3 + 2 sgn(sin 3t)`, declared
    /// `φ̄ = 15`, `γ ∈ [1, 5]`.
    pub fn benchmark() -> Self {
        Self::new(
            Signal(vec![
                SignalTerm::SignCos {
                    amplitude: 5.0,
                    omega: 1.0,
                },
                SignalTerm::Sine {
                    amplitude: -10.0,
                    omega: 2.0,
                },
            ]),
            Signal(vec![
                SignalTerm::Constant { value: 3.0 },
                SignalTerm::SignSin {
                    amplitude: 2.0,
                    omega: 3.0,
                },
            ]),
            15.0,
            1.0,
            5.0,
        )
        .expect("benchmark bounds are consistent")
    }

    /// Unperturbed chain: `φ ≡ 0`, `γ ≡ 1`, with `φ̄ = phi_bar` declared.
    pub fn nominal(phi_bar: f64) -> Result<Self, ConfigError> {
        Self::new(Signal::default(), Signal::constant(1.0), phi_bar, 1.0, 1.0)
    }

    pub fn phi_signal(&self) -> &Signal {
        &self.phi
    }

    pub fn gamma_signal(&self) -> &Signal {
        &self.gamma
    }

    pub fn phi_bar(&self) -> f64 {
        self.phi_bar
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn eval_phi(&self, t: f64) -> Result<f64, BoundViolation> {
        let value = self.phi.eval(t);
        let slack = BOUND_SLACK * self.phi_bar;
        if value.abs() > self.phi_bar + slack || !value.is_finite() {
            return Err(BoundViolation {
                signal: "phi",
                time: t,
                value,
                lower: -self.phi_bar,
                upper: self.phi_bar,
            });
        }
        Ok(value)
    }

    pub fn eval_gamma(&self, t: f64) -> Result<f64, BoundViolation> {
        let value = self.gamma.eval(t);
        let slack = BOUND_SLACK * self.gamma_max;
        if value < self.gamma_min - slack || value > self.gamma_max + slack || !value.is_finite() {
            return Err(BoundViolation {
                signal: "gamma",
                time: t,
                value,
                lower: self.gamma_min,
                upper: self.gamma_max,
            });
        }
        Ok(value)
    }
}
