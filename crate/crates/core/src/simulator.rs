//! Fixed-step simulation of the closed loop
//! `ż_i = z_{i+1} (i < r)`, `ż_r = φ(t) + γ(t) u`.
//!
//! The right-hand side is discontinuous, so no event location is attempted:
//! the control is sampled once per step at the left endpoint and held
//! (digital sample-and-hold), and the resulting chattering band is measured
//! rather than removed.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::adaptive::{compose_control, AdaptiveConfig};
use crate::chain::{chain_field, Stabilizer, StateVector};
use crate::error::{ConfigError, SimulationError};
use crate::uncertainty::UncertaintyModel;

pub const DEFAULT_BLOWUP_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub stabilizer: Stabilizer,
    /// `None` applies the nominal feedback `u = u0(z)` alone.
    pub adaptive: Option<AdaptiveConfig>,
    pub uncertainty: UncertaintyModel,
    pub z0: StateVector,
    pub dt: f64,
    pub t_final: f64,
    pub method: Method,
    pub record_stride: usize,
    pub blowup_guard: f64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.stabilizer.check_dimension(&self.z0)?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ConfigError::NonPositive {
                name: "dt",
                value: self.dt,
            });
        }
        if !(self.t_final > self.dt) || !self.t_final.is_finite() {
            return Err(ConfigError::NonPositive {
                name: "t_final - dt",
                value: self.t_final - self.dt,
            });
        }
        if self.record_stride == 0 {
            return Err(ConfigError::NonPositive {
                name: "record_stride",
                value: 0.0,
            });
        }
        if !(self.blowup_guard > 0.0) {
            return Err(ConfigError::NonPositive {
                name: "blowup_guard",
                value: self.blowup_guard,
            });
        }
        if let Some(adaptive) = &self.adaptive {
            adaptive.check_compatible(&self.stabilizer)?;
        }
        Ok(())
    }

    /// Number of integration steps, `round(t_final / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Recorded closed-loop samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Input applied over the step starting at each sample.
    pub controls: Vec<f64>,
    pub adaptive_gains: Vec<f64>,
    pub lyapunov: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            controls: Vec::with_capacity(n),
            adaptive_gains: Vec::with_capacity(n),
            lyapunov: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn order(&self) -> usize {
        self.states.first().map_or(0, |z| z.len())
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    fn indices_from(&self, after: f64) -> impl Iterator<Item = usize> + '_ {
        let start = self.times.partition_point(|&t| t < after);
        start..self.len()
    }

    /// Largest `φ̂_ε` recorded at `t >= after`.
    pub fn max_adaptive_gain_after(&self, after: f64) -> f64 {
        self.indices_from(after)
            .map(|i| self.adaptive_gains[i])
            .fold(0.0, f64::max)
    }

    pub fn max_abs_control_after(&self, after: f64) -> f64 {
        self.indices_from(after)
            .map(|i| self.controls[i].abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|z_i|` over all coordinates at `t >= after`.
    pub fn max_abs_state_after(&self, after: f64) -> f64 {
        self.indices_from(after)
            .map(|i| self.states[i].max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest recorded `|ż|` estimate (max-norm of consecutive differences).
    pub fn max_state_rate(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.states.windows(2))
            .map(|(t, z)| {
                let h = t[1] - t[0];
                z[1].iter()
                    .zip(z[0].iter())
                    .fold(0.0_f64, |acc, (b, a)| acc.max((b - a).abs() / h))
            })
            .fold(0.0, f64::max)
    }

    /// Writes `t,z1,…,zr,u,phi_hat,V1` rows, plus `LLV1 = ln(1 + V1)` when
    /// requested. Numbers carry 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W, with_llv1: bool) -> io::Result<()> {
        let r = self.order();
        let mut header = String::from("t");
        for i in 1..=r {
            header.push_str(&format!(",z{i}"));
        }
        header.push_str(",u,phi_hat,V1");
        if with_llv1 {
            header.push_str(",LLV1");
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            line.push_str(&format_significant(self.times[i]));
            for z in self.states[i].iter() {
                line.push(',');
                line.push_str(&format_significant(*z));
            }
            for v in [self.controls[i], self.adaptive_gains[i], self.lyapunov[i]] {
                line.push(',');
                line.push_str(&format_significant(v));
            }
            if with_llv1 {
                line.push(',');
                line.push_str(&format_significant(self.lyapunov[i].ln_1p()));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// `%.12g`-style formatting: fixed notation for decimal exponents in
/// `[-5, 12)`, scientific otherwise, trailing zeros trimmed.
pub fn format_significant(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn derivative(
    z: &[f64],
    t: f64,
    u: f64,
    model: &UncertaintyModel,
) -> Result<Vec<f64>, SimulationError> {
    let phi = model.eval_phi(t)?;
    let gamma = model.eval_gamma(t)?;
    Ok(chain_field(z, phi + gamma * u))
}

fn axpy(z: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn step(
    z: &[f64],
    t: f64,
    dt: f64,
    u: f64,
    method: Method,
    model: &UncertaintyModel,
) -> Result<Vec<f64>, SimulationError> {
    match method {
        Method::Euler => Ok(axpy(z, dt, &derivative(z, t, u, model)?)),
        Method::Rk4 => {
            let k1 = derivative(z, t, u, model)?;
            let k2 = derivative(&axpy(z, 0.5 * dt, &k1), t + 0.5 * dt, u, model)?;
            let k3 = derivative(&axpy(z, 0.5 * dt, &k2), t + 0.5 * dt, u, model)?;
            let k4 = derivative(&axpy(z, dt, &k3), t + dt, u, model)?;
            Ok(z.iter()
                .enumerate()
                .map(|(i, zi)| zi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        }
    }
}

/// Integrates the closed loop from `t = 0` to `t_final`, recording every
/// `record_stride`-th step (step 0 included).
pub fn simulate(spec: &SimulationSpec) -> Result<Trajectory, SimulationError> {
    spec.validate()?;
    let steps = spec.steps();
    let mut traj = Trajectory::with_capacity(steps / spec.record_stride + 1);
    let mut z: Vec<f64> = spec.z0.to_vec();

    for n in 0..=steps {
        let t = n as f64 * spec.dt;
        let nominal = spec.stabilizer.evaluate(&z);
        let (u, phi_hat) = match &spec.adaptive {
            Some(adaptive) => {
                let out = compose_control(nominal.u0, nominal.v1, t, adaptive);
                (out.u, out.phi_hat)
            }
            None => (nominal.u0, 0.0),
        };
        if n % spec.record_stride == 0 {
            traj.times.push(t);
            traj.states.push(StateVector::new(z.clone())?);
            traj.controls.push(u);
            traj.adaptive_gains.push(phi_hat);
            traj.lyapunov.push(nominal.v1);
        }
        if n == steps {
            break;
        }
        let next = step(&z, t, spec.dt, u, spec.method, &spec.uncertainty)?;
        let t_next = (n + 1) as f64 * spec.dt;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SimulationError::NonFinite {
                time: t_next,
                state: z,
            });
        }
        let norm = next.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if norm > spec.blowup_guard {
            return Err(SimulationError::BlowUp {
                time: t_next,
                norm,
                guard: spec.blowup_guard,
                state: next,
            });
        }
        z = next;
    }
    Ok(traj)
}

/// Smallest recorded time `T` with `V1 <= threshold + band` at every recorded
/// `t >= T`; `None` when the last sample is still outside.
pub fn enter_and_stay_time(traj: &Trajectory, threshold: f64, band: f64) -> Option<f64> {
    let limit = threshold + band;
    match traj.lyapunov.iter().rposition(|&v| v > limit) {
        None => traj.times.first().copied(),
        Some(i) if i + 1 < traj.len() => Some(traj.times[i + 1]),
        Some(_) => None,
    }
}

/// Largest recorded `V1` at `t >= after`.
pub fn residual_band(traj: &Trajectory, after: f64) -> f64 {
    traj.indices_from(after)
        .map(|i| traj.lyapunov[i])
        .fold(0.0, f64::max)
}

/// `10·dt·max|ż|`, the chattering allowance for one sample-and-hold step.
pub fn discretization_band(traj: &Trajectory, dt: f64) -> f64 {
    10.0 * dt * traj.max_state_rate()
}

/// A recorded interval where `V1` was at or above a level but not decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecreaseViolation {
    pub time: f64,
    pub v1: f64,
    pub slope: f64,
}

/// Checks that for `t > after`, whenever `V1 >= level` the forward
/// finite-difference slope of `V1` is negative.
pub fn decrease_violations(traj: &Trajectory, after: f64, level: f64) -> Vec<DecreaseViolation> {
    traj.times
        .windows(2)
        .zip(traj.lyapunov.windows(2))
        .filter(|(t, v)| t[0] > after && v[0] >= level)
        .filter_map(|(t, v)| {
            let slope = (v[1] - v[0]) / (t[1] - t[0]);
            (slope >= 0.0).then_some(DecreaseViolation {
                time: t[0],
                v1: v[0],
                slope,
            })
        })
        .collect()
}
