//! Closed-form bounds of the adaptive loop.
//!
//! ```text
//! h_m  = min(0, min_{x>=0} (γ_m g(x) - 1) x)
//! Φ̄    = (φ̄ - h_m) / (k γ_m)
//! V̄1   = ε (1 - 1/Φ̄),          limsup V1 <= max(0, V̄1)
//! limsup |u| <= U0(V̄1) g(U0(V̄1)) + k Φ̄   (or 1 when Φ̄ <= 1)
//! T(z0) <= Φ̄ + (V1(z0)^{1-q} + (1-q) C1 Φ̄)^{(1-α)/(1-q)} / (c (1-α))
//! ```

use crate::adaptive::GainFunction;
use crate::error::AnalysisError;

const DEFAULT_HM_GRID: usize = 10_000;
const MAX_HM_RANGE: f64 = 1e12;

/// `h_m` for a gain function and lower input-gain bound.
///
/// The range `[0, x_max]` is doubled until `γ_m g(x_max) > 1` and the
/// product `(γ_m g - 1) x` is increasing there; the grid minimum is then
/// refined by bisection on the derivative. A bounded `g` with
/// `γ_m sup g < 1` yields [`AnalysisError::UnboundedHm`].
pub fn compute_h_m(
    gamma_m: f64,
    gain: &GainFunction,
    x_max: f64,
    grid: usize,
) -> Result<f64, AnalysisError> {
    let objective = |x: f64| (gamma_m * gain.eval(x) - 1.0) * x;
    let slope = |x: f64| gamma_m * gain.eval(x) - 1.0 + gamma_m * gain.derivative(x) * x;

    let sup = gamma_m * gain.supremum();
    if sup < 1.0 {
        return Err(AnalysisError::UnboundedHm { sup });
    }
    if !gain.is_unbounded() {
        // constant-like g: the product is linear with slope γ_m g - 1 >= 0
        return Ok(0.0);
    }
    if gamma_m * gain.eval(0.0) >= 1.0 {
        // the product is nonnegative on R+
        return Ok(0.0);
    }

    let mut x_max = x_max.max(f64::MIN_POSITIVE);
    while !(gamma_m * gain.eval(x_max) > 1.0 && slope(x_max) > 0.0) {
        x_max *= 2.0;
        if x_max > MAX_HM_RANGE {
            return Err(AnalysisError::HmGridTooShort { x_max });
        }
    }

    let grid = grid.max(2);
    let h = x_max / grid as f64;
    let (best, _) =
        (0..=grid)
            .map(|i| (i, objective(i as f64 * h)))
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );

    // derivative changes sign on [x_{i-1}, x_{i+1}] around a grid minimum
    let mut lo = best.saturating_sub(1) as f64 * h;
    let mut hi = (best + 1).min(grid) as f64 * h;
    let mut refined = objective(best as f64 * h);
    if slope(lo) < 0.0 && slope(hi) > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        refined = refined.min(objective(0.5 * (lo + hi)));
    }
    Ok(refined.min(0.0))
}

/// [`compute_h_m`] with the default grid and starting range.
pub fn default_h_m(gamma_m: f64, gain: &GainFunction) -> Result<f64, AnalysisError> {
    compute_h_m(gamma_m, gain, 1.0, DEFAULT_HM_GRID)
}

/// `Φ̄ = (φ̄ - h_m)/(k γ_m)`.
pub fn compute_phi_bar_cap(
    k: f64,
    gamma_m: f64,
    phi_bar: f64,
    h_m: f64,
) -> Result<f64, AnalysisError> {
    if !h_m.is_finite() || h_m > 0.0 {
        return Err(AnalysisError::InvalidHm(h_m));
    }
    Ok((phi_bar - h_m) / (k * gamma_m))
}

/// `(V̄1, max(0, V̄1))` with `V̄1 = ε(1 - 1/Φ̄)`.
pub fn compute_v1_bar(epsilon: f64, phi_bar_cap: f64) -> (f64, f64) {
    let v1_bar = epsilon * (1.0 - 1.0 / phi_bar_cap);
    (v1_bar, v1_bar.max(0.0))
}

/// Asymptotic bound on `|u_ε|`: 1 when `Φ̄ <= 1`, otherwise
/// `U0 g(U0) + k Φ̄` with `U0 = U0(V̄1)`.
pub fn compute_u_asymptotic_bound(
    phi_bar_cap: f64,
    u0_level_max: f64,
    gain: &GainFunction,
    k: f64,
) -> f64 {
    if phi_bar_cap <= 1.0 {
        1.0
    } else {
        u0_level_max * gain.eval(u0_level_max) + k * phi_bar_cap
    }
}

/// Constants entering the convergence-time bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBoundConstants {
    pub phi_bar_cap: f64,
    pub c: f64,
    pub alpha: f64,
    pub c1: f64,
    /// Exponent paired with `C1` in `dV1/dt <= -c V1^α + C1 V1^q`.
    pub growth_exponent: f64,
}

/// Right-hand side of the enter-and-stay time bound for `V1(z0)`.
pub fn bound_time(v1_z0: f64, k: &TimeBoundConstants) -> Result<f64, AnalysisError> {
    if !(0.0..1.0).contains(&k.alpha) {
        return Err(AnalysisError::ExponentOutOfRange {
            name: "alpha",
            value: k.alpha,
        });
    }
    if !(0.0..1.0).contains(&k.growth_exponent) {
        return Err(AnalysisError::ExponentOutOfRange {
            name: "q",
            value: k.growth_exponent,
        });
    }
    let q = k.growth_exponent;
    let grown = v1_z0.powf(1.0 - q) + (1.0 - q) * k.c1 * k.phi_bar_cap;
    Ok(k.phi_bar_cap + grown.powf((1.0 - k.alpha) / (1.0 - q)) / (k.c * (1.0 - k.alpha)))
}
