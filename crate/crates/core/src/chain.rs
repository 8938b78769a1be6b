//! Homogeneity machinery for the integrator chain `ż = J_r z + u e_r`.
//!
//! A chain of length `r` carries weights `p_i = p + (i-1)κ` for `i = 1..r+2`
//! with `κ < 0` and `p + (r+1)κ ∈ [0, 1)`. The dilation
//! `δ_λ(z) = (λ^{p_1} z_1, …, λ^{p_r} z_r)` acts on states, Hong's recursive
//! feedback `u0` is homogeneous of degree `p_{r+1}`, and the Lyapunov function
//!
//! ```text
//! V1(z) = Σ_j ∫_{v_{j-1}}^{z_j} ⌊s⌉^{β_{j-1}} - ⌊v_{j-1}⌉^{β_{j-1}} ds
//! ```
//!
//! is evaluated in closed form.
//!
//! Exponent convention: `β_0 = p_2/p_1` and `(β_i + 1) p_{i+1} = (β_0 + 1) p_1`,
//! which makes every term of `V1` homogeneous of degree `(β_0 + 1) p_1`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Sign with the selection `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `⌊x⌉^a = |x|^a sgn(x)`, with `⌊0⌉^a = 0` for every `a >= 0`.
#[inline]
pub fn signed_power(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        sgn(x) * x.abs().powf(a)
    }
}

/// Finite state of a chain of integrators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(z: Vec<f64>) -> Result<Self, ConfigError> {
        if let Some((index, &value)) = z.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ConfigError::NonFiniteState {
                index: index + 1,
                value,
            });
        }
        Ok(Self(z))
    }

    pub fn zeros(r: usize) -> Self {
        Self(vec![0.0; r])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Max-norm.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = ConfigError;

    fn try_from(z: Vec<f64>) -> Result<Self, ConfigError> {
        Self::new(z)
    }
}

impl From<StateVector> for Vec<f64> {
    fn from(z: StateVector) -> Self {
        z.0
    }
}

/// Parameters of Hong's homogeneous stabilizer for a chain of length `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    r: usize,
    p: f64,
    kappa: f64,
    weights: Vec<f64>,
    gains: Vec<f64>,
    betas: Vec<f64>,
    alphas: Vec<f64>,
}

impl ChainConfig {
    /// Builds a configuration, deriving weights, `α_i = p_{i+1}/p_i` and the
    /// default `β` exponents.
    pub fn new(r: usize, p: f64, kappa: f64, gains: Vec<f64>) -> Result<Self, ConfigError> {
        if r == 0 {
            return Err(ConfigError::EmptyChain);
        }
        if !(p > 0.0) {
            return Err(ConfigError::NonPositiveBaseWeight(p));
        }
        if !(kappa < 0.0) {
            return Err(ConfigError::NonNegativeKappa(kappa));
        }
        let last = p + (r as f64 + 1.0) * kappa;
        if !(0.0..1.0).contains(&last) {
            return Err(ConfigError::LastWeightOutOfRange(last));
        }
        if gains.len() != r {
            return Err(ConfigError::LengthMismatch {
                what: "gains",
                expected: r,
                got: gains.len(),
            });
        }
        if let Some((i, &value)) = gains.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
            return Err(ConfigError::NonPositiveGain {
                index: i + 1,
                value,
            });
        }

        let weights: Vec<f64> = (0..r + 2).map(|i| p + i as f64 * kappa).collect();
        let alphas: Vec<f64> = (0..r).map(|i| weights[i + 1] / weights[i]).collect();
        let beta0 = weights[1] / weights[0];
        let degree = (beta0 + 1.0) * weights[0];
        let betas: Vec<f64> = (0..r)
            .map(|i| {
                if i == 0 {
                    beta0
                } else {
                    degree / weights[i] - 1.0
                }
            })
            .collect();

        let cfg = Self {
            r,
            p,
            kappa,
            weights,
            gains,
            betas,
            alphas,
        };
        cfg.check_exponents()?;
        Ok(cfg)
    }

    /// Replaces the `β` exponents. Used to study non-default conventions and
    /// to build deliberately broken configurations for mutation tests.
    pub fn with_betas(mut self, betas: Vec<f64>) -> Result<Self, ConfigError> {
        if betas.len() != self.r {
            return Err(ConfigError::LengthMismatch {
                what: "betas",
                expected: self.r,
                got: betas.len(),
            });
        }
        self.betas = betas;
        self.check_exponents()?;
        Ok(self)
    }

    fn check_exponents(&self) -> Result<(), ConfigError> {
        for i in 0..self.r {
            if !(self.betas[i] > 0.0) {
                return Err(ConfigError::NonPositiveExponent {
                    name: format!("beta_{i}"),
                    value: self.betas[i],
                });
            }
            let e = self.alphas[i] / self.betas[i];
            if !(e > 0.0) {
                return Err(ConfigError::NonPositiveExponent {
                    name: format!("alpha_{}/beta_{i}", i + 1),
                    value: e,
                });
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn base_weight(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `p_1..p_{r+2}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// `β_0..β_{r-1}`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `α_1..α_r`.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `p_{r+2}`, the exponent of the no-blow-up inequality.
    pub fn last_weight(&self) -> f64 {
        self.weights[self.r + 1]
    }

    /// Homogeneity degree of `u0`, `p_{r+1} = p + rκ`.
    pub fn u0_degree(&self) -> f64 {
        self.weights[self.r]
    }
}

/// `δ_λ(z)` with the dilation weights `weights[0..z.len()]`.
pub fn dilate(z: &[f64], lambda: f64, weights: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(weights)
        .map(|(zi, pi)| lambda.powf(*pi) * zi)
        .collect()
}

/// Applies the chain's dilation to a state.
pub fn apply_dilation(z: &StateVector, lambda: f64, cfg: &ChainConfig) -> StateVector {
    debug_assert!(lambda > 0.0);
    StateVector(dilate(z, lambda, &cfg.weights))
}

/// Hong's recursion `v_0 = 0`,
/// `v_{i+1} = -l_{i+1} ⌊⌊z_{i+1}⌉^{β_i} - ⌊v_i⌉^{β_i}⌉^{α_{i+1}/β_i}`.
///
/// Returns `v_0..v_r`; `v_r` is the feedback `u0`.
pub fn hong_v_sequence(z: &[f64], cfg: &ChainConfig) -> Vec<f64> {
    debug_assert_eq!(z.len(), cfg.r);
    let mut v = Vec::with_capacity(cfg.r + 1);
    v.push(0.0);
    for i in 0..cfg.r {
        let beta = cfg.betas[i];
        let inner = signed_power(z[i], beta) - signed_power(v[i], beta);
        v.push(-cfg.gains[i] * signed_power(inner, cfg.alphas[i] / beta));
    }
    v
}

pub fn hong_u0(z: &[f64], cfg: &ChainConfig) -> f64 {
    hong_v_sequence(z, cfg)[cfg.r]
}

/// `∫_v^z ⌊s⌉^β - ⌊v⌉^β ds` in closed form.
pub fn lyapunov_term(z: f64, v: f64, beta: f64) -> f64 {
    let b1 = beta + 1.0;
    (z.abs().powf(b1) - v.abs().powf(b1)) / b1 - signed_power(v, beta) * (z - v)
}

fn v1_from_sequence(z: &[f64], v: &[f64], cfg: &ChainConfig) -> f64 {
    let sum: f64 = (0..cfg.r)
        .map(|j| lyapunov_term(z[j], v[j], cfg.betas[j]))
        .sum();
    // each term is a nonnegative integral; clamp rounding residue at the origin
    sum.max(0.0)
}

pub fn lyapunov_v1(z: &[f64], cfg: &ChainConfig) -> f64 {
    let v = hong_v_sequence(z, cfg);
    v1_from_sequence(z, &v, cfg)
}

/// `∂V1/∂z_r = ⌊z_r⌉^{β_{r-1}} - ⌊v_{r-1}⌉^{β_{r-1}}`; only the last term of
/// `V1` depends on `z_r`.
pub fn lyapunov_v1_partial_r(z: &[f64], cfg: &ChainConfig) -> f64 {
    let v = hong_v_sequence(z, cfg);
    partial_r_from_sequence(z, &v, cfg)
}

fn partial_r_from_sequence(z: &[f64], v: &[f64], cfg: &ChainConfig) -> f64 {
    let r = cfg.r;
    let beta = cfg.betas[r - 1];
    signed_power(z[r - 1], beta) - signed_power(v[r - 1], beta)
}

/// Central-difference gradient of an arbitrary scalar function.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, z: &[f64], h: f64) -> Vec<f64> {
    let mut probe = z.to_vec();
    (0..z.len())
        .map(|i| {
            probe[i] = z[i] + h;
            let up = f(&probe);
            probe[i] = z[i] - h;
            let down = f(&probe);
            probe[i] = z[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn lyapunov_v1_gradient_fd(z: &[f64], cfg: &ChainConfig, h: f64) -> Vec<f64> {
    debug_assert!(h > 0.0);
    central_gradient(|x| lyapunov_v1(x, cfg), z, h)
}

/// Nominal field `J_r z + u e_r` for a given scalar input.
pub fn chain_field(z: &[f64], u: f64) -> Vec<f64> {
    let r = z.len();
    let mut f = Vec::with_capacity(r);
    f.extend_from_slice(&z[1..]);
    f.push(u);
    f
}

/// The homogeneous stabilizer `u0` together with its Lyapunov function `V1`.
///
/// `Hong` is the arbitrary-order family; `Sign` is the first-order controller
/// `u0 = -sgn(z_1)` with `V1 = |z_1|`, which is bounded and has weights
/// `p_1 = 1`, `κ = -1` (outside the chain constraint, handled analytically).
#[derive(Debug, Clone, PartialEq)]
pub enum Stabilizer {
    Hong(ChainConfig),
    Sign,
}

/// `u0(z)` and `V1(z)` from one pass of the recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalEval {
    pub u0: f64,
    pub v1: f64,
    pub partial_r: f64,
}

const SIGN_WEIGHTS: [f64; 3] = [1.0, 0.0, -1.0];

impl Stabilizer {
    pub fn order(&self) -> usize {
        match self {
            Self::Hong(cfg) => cfg.r,
            Self::Sign => 1,
        }
    }

    /// `p_1..p_{r+2}`.
    pub fn weights(&self) -> &[f64] {
        match self {
            Self::Hong(cfg) => &cfg.weights,
            Self::Sign => &SIGN_WEIGHTS,
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            Self::Hong(cfg) => cfg.kappa,
            Self::Sign => -1.0,
        }
    }

    pub fn u0_degree(&self) -> f64 {
        self.weights()[self.order()]
    }

    /// `p_{r+2}`.
    pub fn last_weight(&self) -> f64 {
        self.weights()[self.order() + 1]
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Self::Sign)
    }

    pub fn check_dimension(&self, z: &[f64]) -> Result<(), ConfigError> {
        if z.len() != self.order() {
            return Err(ConfigError::DimensionMismatch {
                expected: self.order(),
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, z: &[f64]) -> NominalEval {
        match self {
            Self::Hong(cfg) => {
                let v = hong_v_sequence(z, cfg);
                NominalEval {
                    u0: v[cfg.r],
                    v1: v1_from_sequence(z, &v, cfg),
                    partial_r: partial_r_from_sequence(z, &v, cfg),
                }
            }
            Self::Sign => NominalEval {
                u0: -sgn(z[0]),
                v1: z[0].abs(),
                partial_r: sgn(z[0]),
            },
        }
    }

    pub fn u0(&self, z: &[f64]) -> f64 {
        match self {
            Self::Hong(cfg) => hong_u0(z, cfg),
            Self::Sign => -sgn(z[0]),
        }
    }

    pub fn v1(&self, z: &[f64]) -> f64 {
        match self {
            Self::Hong(cfg) => lyapunov_v1(z, cfg),
            Self::Sign => z[0].abs(),
        }
    }

    pub fn v1_partial_r(&self, z: &[f64]) -> f64 {
        match self {
            Self::Hong(cfg) => lyapunov_v1_partial_r(z, cfg),
            Self::Sign => sgn(z[0]),
        }
    }

    pub fn dilate(&self, z: &[f64], lambda: f64) -> Vec<f64> {
        dilate(z, lambda, self.weights())
    }

    /// `J_r z + u0(z) e_r`.
    pub fn nominal_field(&self, z: &[f64]) -> Vec<f64> {
        chain_field(z, self.u0(z))
    }

    /// Time derivative of `V1` along the nominal field, with a central
    /// difference gradient of step `h`.
    pub fn nominal_v1_derivative(&self, z: &[f64], h: f64) -> f64 {
        let grad = central_gradient(|x| self.v1(x), z, h);
        grad.iter()
            .zip(self.nominal_field(z))
            .map(|(g, f)| g * f)
            .sum()
    }
}
