//! Level-set sampling of homogeneous quantities.
//!
//! Random directions are projected onto `{V1 = level}` with the dilation
//! `δ_λ`, `λ = (level / V1(z))^{1/m}`, where `m` is the measured homogeneity
//! degree of `V1`. Extremes of homogeneous quantities over one level set then
//! determine them everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chain::{Stabilizer, StateVector};
use crate::error::AnalysisError;

/// Finite-difference step used for gradients on `{V1 = 1}`.
pub const GRADIENT_STEP: f64 = 1e-7;

/// Reference points for the degree measurement, as `(state, λ)` pairs.
fn degree_probes(r: usize) -> Vec<(Vec<f64>, f64)> {
    let mut first = vec![0.0; r];
    first[0] = 1.0;
    let ones = vec![1.0; r];
    let alternating: Vec<f64> = (0..r)
        .map(|i| if i % 2 == 0 { 0.7 } else { -1.3 })
        .collect();
    vec![(first, 2.0), (ones, 10.0), (alternating, 0.3)]
}

/// Homogeneity degree `m` of `V1`, measured as
/// `ln(V1(δ_λ z)/V1(z)) / ln λ` at fixed reference points.
pub fn measure_v1_degree(stab: &Stabilizer) -> Result<f64, AnalysisError> {
    let values: Vec<f64> = degree_probes(stab.order())
        .into_iter()
        .map(|(z, lambda)| (stab.v1(&stab.dilate(&z, lambda)) / stab.v1(&z)).ln() / lambda.ln())
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max((v - mean).abs()));
    if spread > 1e-9 * mean.abs() || !mean.is_finite() || mean <= 0.0 {
        return Err(AnalysisError::InconsistentDegree { spread });
    }
    Ok(mean)
}

/// Projects `z` onto `{V1 = level}` along its dilation orbit.
pub fn project_to_level(stab: &Stabilizer, z: &[f64], level: f64, degree: f64) -> Vec<f64> {
    let mut current = z.to_vec();
    // a second pass absorbs rounding in the measured degree
    for _ in 0..3 {
        let v = stab.v1(&current);
        if v == level {
            break;
        }
        let lambda = (level / v).powf(1.0 / degree);
        current = stab.dilate(&current, lambda);
        if ((stab.v1(&current) - level) / level).abs() <= 1e-13 {
            break;
        }
    }
    current
}

/// Random standard-normal directions, deterministic in `seed`.
pub fn random_states(r: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..r).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// `n` states on `{V1 = level}`.
pub fn sample_level_set(
    stab: &Stabilizer,
    level: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<StateVector>, AnalysisError> {
    let degree = measure_v1_degree(stab)?;
    Ok(sample_level_set_with_degree(stab, level, n, seed, degree))
}

pub fn sample_level_set_with_degree(
    stab: &Stabilizer,
    level: f64,
    n: usize,
    seed: u64,
    degree: f64,
) -> Vec<StateVector> {
    random_states(stab.order(), n, seed)
        .into_iter()
        .filter(|z| stab.v1(z) > 0.0)
        .map(|z| {
            StateVector::new(project_to_level(stab, &z, level, degree))
                .expect("dilation of a finite state is finite")
        })
        .collect()
}

/// Sampled extreme with the index of the sample that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledExtreme {
    pub value: f64,
    pub index: usize,
    pub samples: usize,
}

fn argmax(values: impl Iterator<Item = f64>) -> SampledExtreme {
    let mut best = SampledExtreme {
        value: f64::NEG_INFINITY,
        index: 0,
        samples: 0,
    };
    for (i, v) in values.enumerate() {
        if v > best.value {
            best.value = v;
            best.index = i;
        }
        best.samples = i + 1;
    }
    best
}

/// Sampling estimate (a lower bound) of `U0(ξ) = max_{V1(z) <= ξ} |u0(z)|`,
/// taken on the boundary `{V1 = ξ}`.
pub fn compute_u0_levelset_max(
    stab: &Stabilizer,
    xi: f64,
    n: usize,
    seed: u64,
) -> Result<SampledExtreme, AnalysisError> {
    let states = sample_level_set(stab, xi, n, seed)?;
    Ok(argmax(states.iter().map(|z| stab.u0(z).abs())))
}

/// `c` and `α` of `dV1/dt <= -c V1^α` along the nominal field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimate {
    pub c: f64,
    pub alpha: f64,
    /// Sample index attaining `c`.
    pub argmin: usize,
    pub samples: usize,
}

/// `α = (m + κ)/m` from degree arithmetic and `c` as the sampled minimum of
/// `-dV1/dt` over `{V1 = 1}`.
pub fn estimate_c_alpha(
    stab: &Stabilizer,
    n: usize,
    seed: u64,
) -> Result<DecayEstimate, AnalysisError> {
    let degree = measure_v1_degree(stab)?;
    let alpha = (degree + stab.kappa()) / degree;
    if !(0.0..1.0).contains(&alpha) {
        return Err(AnalysisError::ExponentOutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    let states = sample_level_set_with_degree(stab, 1.0, n, seed, degree);
    let mut c = f64::INFINITY;
    let mut argmin = 0;
    for (index, z) in states.iter().enumerate() {
        let derivative = stab.nominal_v1_derivative(z, GRADIENT_STEP);
        if derivative >= 0.0 {
            return Err(AnalysisError::NonDecreasing {
                index,
                state: z.to_vec(),
                derivative,
            });
        }
        if -derivative < c {
            c = -derivative;
            argmin = index;
        }
    }
    Ok(DecayEstimate {
        c,
        alpha,
        argmin,
        samples: states.len(),
    })
}

/// `C1` and `q` of the growth bound `k γ_m |∂_r V1| Φ̄ <= C1 V1^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    pub c1: f64,
    /// `q = (m - p_r)/m`, the degree of `|∂_r V1|` normalised by `m`.
    pub exponent: f64,
    pub argmax: usize,
    pub samples: usize,
}

pub fn estimate_c1(
    stab: &Stabilizer,
    k: f64,
    gamma_m: f64,
    phi_bar_cap: f64,
    n: usize,
    seed: u64,
) -> Result<GrowthEstimate, AnalysisError> {
    let degree = measure_v1_degree(stab)?;
    let p_r = stab.weights()[stab.order() - 1];
    let exponent = (degree - p_r) / degree;
    if !(0.0..1.0).contains(&exponent) {
        return Err(AnalysisError::ExponentOutOfRange {
            name: "q",
            value: exponent,
        });
    }
    let states = sample_level_set_with_degree(stab, 1.0, n, seed, degree);
    let best = argmax(states.iter().map(|z| {
        k * gamma_m * stab.v1_partial_r(z).abs() * phi_bar_cap / stab.v1(z).powf(exponent)
    }));
    Ok(GrowthEstimate {
        c1: best.value.max(0.0),
        exponent,
        argmax: best.index,
        samples: best.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainConfig;
    use approx::assert_relative_eq;

    fn order3() -> Stabilizer {
        Stabilizer::Hong(ChainConfig::new(3, 1.0, -0.25, vec![1.0, 2.0, 5.0]).unwrap())
    }

    fn order2() -> Stabilizer {
        Stabilizer::Hong(ChainConfig::new(2, 1.0, -1.0 / 3.0, vec![1.0, 2.0]).unwrap())
    }

    #[test]
    fn degree_of_benchmark_configs() {
        assert_relative_eq!(
            measure_v1_degree(&order3()).unwrap(),
            1.75,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            measure_v1_degree(&Stabilizer::Sign).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn level_set_samples_hit_the_level() {
        let s = order3();
        for level in [0.01, 1.0, 100.0] {
            for z in sample_level_set(&s, level, 200, 3).unwrap() {
                assert!((s.v1(&z) - level).abs() <= 1e-9 * level);
            }
        }
    }

    #[test]
    fn projecting_a_point_on_the_level_is_identity() {
        let s = order3();
        let z = sample_level_set(&s, 2.0, 1, 9).unwrap().remove(0);
        let again = project_to_level(&s, &z, 2.0, 1.75);
        for (a, b) in again.iter().zip(z.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn u0_levelset_scaling() {
        let s = order3();
        let small = compute_u0_levelset_max(&s, 0.5, 10_000, 1).unwrap();
        let large = compute_u0_levelset_max(&s, 8.0, 10_000, 1).unwrap();
        let expected = 16f64.powf(0.25 / 1.75);
        assert_relative_eq!(large.value / small.value, expected, max_relative = 0.01);
    }

    #[test]
    fn u0_levelset_of_sign_controller() {
        assert_eq!(
            compute_u0_levelset_max(&Stabilizer::Sign, 0.3, 50, 2)
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn more_samples_never_lower_u0_max() {
        let s = order3();
        let a = compute_u0_levelset_max(&s, 1.0, 500, 4).unwrap();
        let b = compute_u0_levelset_max(&s, 1.0, 1000, 4).unwrap();
        assert!(b.value >= a.value);
    }

    #[test]
    fn c_alpha_sign_controller() {
        let d = estimate_c_alpha(&Stabilizer::Sign, 100, 0).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert_relative_eq!(d.c, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn c_alpha_order2_is_stable_under_more_samples() {
        let a = estimate_c_alpha(&order2(), 5_000, 11).unwrap();
        let b = estimate_c_alpha(&order2(), 10_000, 11).unwrap();
        assert_relative_eq!(
            a.alpha,
            (5.0 / 3.0 - 1.0 / 3.0) / (5.0 / 3.0),
            max_relative = 1e-9
        );
        assert!(a.c > 0.0);
        assert!((a.c - b.c).abs() <= 0.1 * b.c);
    }

    #[test]
    fn c_alpha_order3_alpha_and_rejection() {
        // the benchmark gains leave part of {V1 = 1} with dV1/dt > 0
        match estimate_c_alpha(&order3(), 10_000, 5) {
            Err(AnalysisError::NonDecreasing { derivative, .. }) => assert!(derivative >= 0.0),
            other => panic!("expected a non-decreasing sample, got {other:?}"),
        }
    }

    #[test]
    fn c1_sign_controller() {
        let g = estimate_c1(&Stabilizer::Sign, 1.0, 1.0, 15.0, 10, 0).unwrap();
        assert_eq!(g.exponent, 0.0);
        assert_eq!(g.c1, 15.0);
    }

    #[test]
    fn c1_ratio_is_homogeneous() {
        let s = order3();
        let degree = measure_v1_degree(&s).unwrap();
        let q = (degree - 0.5) / degree;
        let ratio_max = |level: f64| {
            sample_level_set(&s, level, 2000, 8)
                .unwrap()
                .iter()
                .map(|z| s.v1_partial_r(z).abs() * 15.0 / s.v1(z).powf(q))
                .fold(0.0, f64::max)
        };
        let base = ratio_max(1.0);
        for level in [0.01, 100.0] {
            assert_relative_eq!(ratio_max(level), base, max_relative = 0.01);
        }
        let g = estimate_c1(&s, 1.0, 1.0, 15.0, 2000, 8).unwrap();
        assert_relative_eq!(g.exponent, q);
        assert_relative_eq!(g.c1, base, max_relative = 1e-9);
        let more = estimate_c1(&s, 1.0, 1.0, 15.0, 4000, 8).unwrap();
        assert!(more.c1 >= g.c1);
    }
}
