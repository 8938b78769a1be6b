//! Theoretical quantities of the adaptive loop and the property battery that
//! checks the stabilizer numerically.

pub mod bounds;
pub mod sampling;
pub mod verify;

use serde::Serialize;

use crate::adaptive::AdaptiveConfig;
use crate::chain::Stabilizer;
use crate::error::AnalysisError;
use crate::uncertainty::UncertaintyModel;

pub use bounds::{
    bound_time, compute_h_m, compute_phi_bar_cap, compute_u_asymptotic_bound, compute_v1_bar,
    default_h_m, TimeBoundConstants,
};
pub use sampling::{
    compute_u0_levelset_max, estimate_c1, estimate_c_alpha, measure_v1_degree, sample_level_set,
    DecayEstimate, GrowthEstimate, SampledExtreme,
};
pub use verify::{verify_chain, PropertyResult, VerificationReport};

/// Relative accuracy of level-set projections.
pub const LEVEL_SET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
        }
    }
}

/// Every computed bound for one scenario. Constants that could not be
/// estimated are `None`, with the reason in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub h_m: f64,
    pub phi_bar_cap: f64,
    pub v1_bar: f64,
    pub limsup_v1: f64,
    /// Sampled `U0(V̄1)`; absent when `Φ̄ <= 1`.
    pub u0_level_max: Option<f64>,
    pub u_bound: f64,
    pub c_est: Option<f64>,
    pub alpha_val: f64,
    pub c1_est: f64,
    /// Exponent `q` paired with `C1`.
    pub c1_exponent: f64,
    /// `p_{r+2}`, the exponent written in the no-blow-up inequality.
    pub last_weight: f64,
    pub v1_z0: f64,
    pub t_bound: Option<f64>,
    pub v1_degree: f64,
    pub samples: usize,
    pub seed: u64,
    pub level_set_tolerance: f64,
    pub gradient_step: f64,
    pub notes: Vec<String>,
}

impl BoundsReport {
    pub fn time_constants(&self) -> Result<TimeBoundConstants, AnalysisError> {
        Ok(TimeBoundConstants {
            phi_bar_cap: self.phi_bar_cap,
            c: self.c_est.ok_or(AnalysisError::MissingConstant("c"))?,
            alpha: self.alpha_val,
            c1: self.c1_est,
            growth_exponent: self.c1_exponent,
        })
    }

    /// Convergence-time bound for an initial `V1` value.
    pub fn bound_t_for_v1(&self, v1_z0: f64) -> Result<f64, AnalysisError> {
        bound_time(v1_z0, &self.time_constants()?)
    }
}

/// Bound on the enter-and-stay time from `z0`.
pub fn bound_t_z0(
    z0: &[f64],
    stab: &Stabilizer,
    report: &BoundsReport,
) -> Result<f64, AnalysisError> {
    report.bound_t_for_v1(stab.v1(z0))
}

/// Computes the full report for a stabilizer, adaptive law, declared
/// uncertainty bounds and initial state.
pub fn bounds_report(
    stab: &Stabilizer,
    adaptive: &AdaptiveConfig,
    model: &UncertaintyModel,
    z0: &[f64],
    opts: SamplingOptions,
) -> Result<BoundsReport, AnalysisError> {
    stab.check_dimension(z0)?;
    let mut notes = Vec::new();
    let gain = adaptive.gain();
    let h_m = default_h_m(model.gamma_min(), &gain)?;
    let phi_bar_cap = compute_phi_bar_cap(adaptive.k(), model.gamma_min(), model.phi_bar(), h_m)?;
    let (v1_bar, limsup_v1) = compute_v1_bar(adaptive.epsilon(), phi_bar_cap);

    let u0_level_max = if phi_bar_cap > 1.0 {
        Some(compute_u0_levelset_max(stab, v1_bar, opts.samples, opts.seed)?.value)
    } else {
        None
    };
    let u_bound = compute_u_asymptotic_bound(
        phi_bar_cap,
        u0_level_max.unwrap_or(0.0),
        &gain,
        adaptive.k(),
    );

    let v1_degree = measure_v1_degree(stab)?;
    let alpha_val = (v1_degree + stab.kappa()) / v1_degree;
    let c_est = match estimate_c_alpha(stab, opts.samples, opts.seed) {
        Ok(decay) => Some(decay.c),
        Err(err @ AnalysisError::NonDecreasing { .. }) => {
            notes.push(format!("c not estimated: {err}"));
            None
        }
        Err(err) => return Err(err),
    };
    let growth = estimate_c1(
        stab,
        adaptive.k(),
        model.gamma_min(),
        phi_bar_cap,
        opts.samples,
        opts.seed,
    )?;

    let v1_z0 = stab.v1(z0);
    let mut report = BoundsReport {
        h_m,
        phi_bar_cap,
        v1_bar,
        limsup_v1,
        u0_level_max,
        u_bound,
        c_est,
        alpha_val,
        c1_est: growth.c1,
        c1_exponent: growth.exponent,
        last_weight: stab.last_weight(),
        v1_z0,
        t_bound: None,
        v1_degree,
        samples: opts.samples,
        seed: opts.seed,
        level_set_tolerance: LEVEL_SET_TOLERANCE,
        gradient_step: sampling::GRADIENT_STEP,
        notes,
    };
    if report.c_est.is_some() {
        report.t_bound = Some(report.bound_t_for_v1(v1_z0)?);
    } else {
        report
            .notes
            .push("convergence-time bound unavailable without c".to_string());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::GainFunction;
    use crate::chain::ChainConfig;
    use approx::assert_relative_eq;

    fn opts() -> SamplingOptions {
        SamplingOptions {
            samples: 2_000,
            seed: 1,
        }
    }

    #[test]
    fn order1_report() {
        let adaptive =
            AdaptiveConfig::new(0.1, 1.0, GainFunction::Constant { value: 1.0 }).unwrap();
        let r = bounds_report(
            &Stabilizer::Sign,
            &adaptive,
            &UncertaintyModel::benchmark(),
            &[5.0],
            opts(),
        )
        .unwrap();
        assert_eq!(r.h_m, 0.0);
        assert_eq!(r.phi_bar_cap, 15.0);
        assert_relative_eq!(r.v1_bar, 0.1 * 14.0 / 15.0, max_relative = 1e-14);
        assert_eq!(r.u0_level_max, Some(1.0));
        assert_eq!(r.u_bound, 16.0);
        assert_eq!(r.alpha_val, 0.0);
        assert_relative_eq!(r.c_est.unwrap(), 1.0, max_relative = 1e-8);
        assert_eq!(r.c1_est, 15.0);
        assert_eq!(r.c1_exponent, 0.0);
        // 15 + (5 + 15·15) / 1
        assert_relative_eq!(r.t_bound.unwrap(), 245.0, max_relative = 1e-8);
        assert!(r.notes.is_empty());
    }

    #[test]
    fn small_cap_branch() {
        let adaptive =
            AdaptiveConfig::new(0.1, 1.0, GainFunction::Constant { value: 1.0 }).unwrap();
        let model = UncertaintyModel::nominal(0.5).unwrap();
        let r = bounds_report(&Stabilizer::Sign, &adaptive, &model, &[1.0], opts()).unwrap();
        assert_eq!(r.phi_bar_cap, 0.5);
        assert_eq!(r.limsup_v1, 0.0);
        assert_eq!(r.u_bound, 1.0);
        assert_eq!(r.u0_level_max, None);
    }

    #[test]
    fn order3_report_lacks_c() {
        let stab = Stabilizer::Hong(ChainConfig::new(3, 1.0, -0.25, vec![1.0, 2.0, 5.0]).unwrap());
        let adaptive = AdaptiveConfig::new(0.01, 1.0, GainFunction::Logarithmic).unwrap();
        let r = bounds_report(
            &stab,
            &adaptive,
            &UncertaintyModel::benchmark(),
            &[1.0, 0.0, 0.0],
            opts(),
        )
        .unwrap();
        assert_eq!(r.phi_bar_cap, 15.0);
        assert_relative_eq!(r.v1_degree, 1.75, max_relative = 1e-12);
        assert_relative_eq!(r.alpha_val, 1.5 / 1.75, max_relative = 1e-12);
        assert_relative_eq!(r.c1_exponent, 1.25 / 1.75, max_relative = 1e-12);
        assert_eq!(r.last_weight, 0.0);
        assert!(r.u_bound.is_finite() && r.c1_est.is_finite() && r.c1_est > 0.0);
        assert_eq!(r.c_est, None);
        assert_eq!(r.t_bound, None);
        assert_eq!(r.notes.len(), 2);
    }

    #[test]
    fn unbounded_h_m_is_an_error() {
        let adaptive =
            AdaptiveConfig::new(0.1, 1.0, GainFunction::Constant { value: 1.0 }).unwrap();
        let model = UncertaintyModel::new(
            crate::uncertainty::Signal::default(),
            crate::uncertainty::Signal::constant(0.5),
            1.0,
            0.5,
            0.5,
        )
        .unwrap();
        assert!(matches!(
            bounds_report(&Stabilizer::Sign, &adaptive, &model, &[1.0], opts()),
            Err(AnalysisError::UnboundedHm { .. })
        ));
    }
}
