//! Adaptive higher-order sliding-mode (AHOSM) control of a perturbed chain
//! of integrators
//!
//! ```text
//! ż_i = z_{i+1}  (i < r),     ż_r = φ(t) + γ(t) u,     |φ| <= φ̄,  0 < γ_m <= γ <= γ_M
//! ```
//!
//! where the bounds exist but are unknown to the controller. The crate
//! provides Hong's homogeneous stabilizer and its Lyapunov function
//! ([`chain`]), the adaptive law ([`adaptive`]), the uncertainty signals
//! ([`uncertainty`]), a fixed-step closed-loop simulator ([`simulator`]) and
//! the bound calculators and property checks of [`analysis`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod analysis;
pub mod chain;
pub mod error;
pub mod quadrature;
pub mod simulator;
pub mod uncertainty;

pub use adaptive::{AdaptiveConfig, GainFunction};
pub use chain::{ChainConfig, Stabilizer, StateVector};
pub use error::{AnalysisError, BoundViolation, ConfigError, SimulationError};
pub use simulator::{simulate, Method, SimulationSpec, Trajectory};
pub use uncertainty::{Signal, SignalTerm, UncertaintyModel};
