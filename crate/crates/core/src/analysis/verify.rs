//! Numerical property battery for a stabilizer/Lyapunov pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sampling::{
    measure_v1_degree, random_states, sample_level_set_with_degree, GRADIENT_STEP,
};
use crate::chain::{central_gradient, sgn, Stabilizer, StateVector};
use crate::quadrature::stabilizer_v1_quadrature;
use crate::simulator::{simulate, Method, SimulationSpec, DEFAULT_BLOWUP_GUARD};
use crate::uncertainty::UncertaintyModel;

pub const GROUP_LAW_TOL: f64 = 1e-12;
pub const HOMOGENEITY_TOL: f64 = 1e-9;
pub const SIGN_CONDITION_TOL: f64 = 1e-12;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const PARTIAL_FD_TOL: f64 = 1e-5;
pub const PARTIAL_FD_STEP: f64 = 1e-6;
/// Excluded band `|z_r| < NONSMOOTH_BAND` when `β_{r-1} < 1`.
pub const NONSMOOTH_BAND: f64 = 1e-3;
/// Allowed per-step rise of `V1` along a simulated nominal trajectory.
pub const MONOTONE_STEP_TOL: f64 = 1e-9;
pub const CONVERGED_V1: f64 = 1e-6;

const QUADRATURE_SAMPLES: usize = 1_000;
const NOMINAL_RUNS: usize = 4;
const NOMINAL_DT: f64 = 1e-4;
const NOMINAL_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.properties.iter().filter(|p| !p.passed)
    }
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        (value - reference).abs() / reference.abs()
    }
}

fn bounded(
    name: &'static str,
    worst: f64,
    tolerance: f64,
    samples: usize,
    detail: String,
) -> PropertyResult {
    PropertyResult {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
        samples,
        detail,
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Runs every property on `n` random samples drawn from `seed`.
pub fn verify_chain(stab: &Stabilizer, n: usize, seed: u64) -> VerificationReport {
    let r = stab.order();
    let states = random_states(r, n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9));
    let lambdas: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                log_uniform(&mut rng, 1e-2, 1e2),
                log_uniform(&mut rng, 1e-2, 1e2),
            )
        })
        .collect();
    let mut properties = Vec::new();

    // dilation group law
    let worst = states
        .iter()
        .zip(&lambdas)
        .flat_map(|(z, &(l1, l2))| {
            let twice = stab.dilate(&stab.dilate(z, l1), l2);
            let once = stab.dilate(z, l1 * l2);
            twice
                .into_iter()
                .zip(once)
                .map(|(a, b)| relative_error(a, b))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    properties.push(bounded(
        "dilation_group_law",
        worst,
        GROUP_LAW_TOL,
        n,
        String::new(),
    ));

    // u0 homogeneity of degree p_{r+1}
    let d = stab.u0_degree();
    let worst = states
        .iter()
        .zip(&lambdas)
        .filter(|(z, _)| stab.u0(z) != 0.0)
        .map(|(z, &(l, _))| relative_error(stab.u0(&stab.dilate(z, l)), l.powf(d) * stab.u0(z)))
        .fold(0.0, f64::max);
    properties.push(bounded(
        "u0_homogeneity",
        worst,
        HOMOGENEITY_TOL,
        n,
        format!("degree {d}"),
    ));

    // V1 homogeneity with the measured degree
    let (degree, degree_note) = match measure_v1_degree(stab) {
        Ok(m) => (m, format!("measured degree {m}")),
        Err(err) => {
            let probe: Vec<f64> = (0..r).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
            let m = (stab.v1(&stab.dilate(&probe, 2.0)) / stab.v1(&probe)).ln() / 2f64.ln();
            (m, format!("{err}; using degree {m} from the first probe"))
        }
    };
    let worst = states
        .iter()
        .zip(&lambdas)
        .map(|(z, &(l, _))| {
            relative_error(stab.v1(&stab.dilate(z, l)), l.powf(degree) * stab.v1(z))
        })
        .fold(0.0, f64::max);
    properties.push(bounded(
        "v1_homogeneity",
        worst,
        HOMOGENEITY_TOL,
        n,
        degree_note,
    ));

    // positive definiteness
    let at_origin = stab.v1(&vec![0.0; r]);
    let nonpositive = states.iter().filter(|z| !(stab.v1(z) > 0.0)).count();
    properties.push(PropertyResult {
        name: "v1_positive_definite",
        passed: at_origin == 0.0 && nonpositive == 0,
        worst: nonpositive as f64,
        tolerance: 0.0,
        samples: n,
        detail: format!("V1(0) = {at_origin}, {nonpositive} nonpositive samples"),
    });

    // sgn(u0) ∂_r V1 <= 0, and ∂_r V1 vanishes where u0 does
    let mut worst = f64::NEG_INFINITY;
    let mut zero_u0_worst = 0.0_f64;
    for z in &states {
        let e = stab.evaluate(z);
        worst = worst.max(sgn(e.u0) * e.partial_r);
        if e.u0.abs() < 1e-10 && z.iter().any(|v| v.abs() > 1e-6) {
            zero_u0_worst = zero_u0_worst.max(e.partial_r.abs());
        }
    }
    let mut sign = bounded(
        "sign_condition",
        worst.max(0.0),
        SIGN_CONDITION_TOL,
        n,
        format!("max sgn(u0)*dV1/dz_r = {worst:e}"),
    );
    if zero_u0_worst >= 1e-6 {
        sign.passed = false;
        sign.detail
            .push_str(&format!("; |dV1/dz_r| = {zero_u0_worst:e} where u0 ~ 0"));
    }
    properties.push(sign);

    // closed form against quadrature
    let m = n.min(QUADRATURE_SAMPLES);
    let worst = states[..m]
        .iter()
        .map(|z| {
            let closed = stab.v1(z);
            let quad = stabilizer_v1_quadrature(stab, z, 1e-12 * closed.max(1e-300));
            relative_error(closed, quad)
        })
        .fold(0.0, f64::max);
    properties.push(bounded(
        "v1_closed_form_vs_quadrature",
        worst,
        QUADRATURE_TOL,
        m,
        String::new(),
    ));

    // analytic ∂_r V1 against central differences
    let smooth_last = match stab {
        Stabilizer::Hong(cfg) => cfg.betas()[r - 1] >= 1.0,
        Stabilizer::Sign => false,
    };
    let mut checked = 0;
    let worst = states
        .iter()
        .filter(|z| smooth_last || z[r - 1].abs() >= NONSMOOTH_BAND)
        .map(|z| {
            checked += 1;
            let fd = central_gradient(|x| stab.v1(x), z, PARTIAL_FD_STEP)[r - 1];
            relative_error(fd, stab.v1_partial_r(z))
        })
        .fold(0.0, f64::max);
    properties.push(bounded(
        "partial_r_vs_finite_difference",
        worst,
        PARTIAL_FD_TOL,
        checked,
        String::new(),
    ));

    // dV1/dt <= 0 along the nominal field on {V1 = 1}
    let level = sample_level_set_with_degree(stab, 1.0, n, seed, degree);
    let (worst, at) = level
        .iter()
        .map(|z| stab.nominal_v1_derivative(z, GRADIENT_STEP))
        .enumerate()
        .fold(
            (f64::NEG_INFINITY, 0),
            |acc, (i, v)| if v > acc.0 { (v, i) } else { acc },
        );
    let positive = level
        .iter()
        .filter(|z| stab.nominal_v1_derivative(z, GRADIENT_STEP) > 0.0)
        .count();
    properties.push(PropertyResult {
        name: "nominal_derivative_nonpositive",
        passed: worst <= 0.0,
        worst,
        tolerance: 0.0,
        samples: level.len(),
        detail: format!(
            "max dV1/dt on {{V1 = 1}} = {worst:e} at sample {at}; {positive} samples positive"
        ),
    });

    properties.extend(nominal_simulation_properties(stab, &level));

    VerificationReport {
        samples: n,
        seed,
        properties,
    }
}

fn nominal_simulation_properties(stab: &Stabilizer, level: &[StateVector]) -> Vec<PropertyResult> {
    if let Stabilizer::Sign = stab {
        // V1 = |z1| decreases at unit rate until z1 = 0; an Euler run only adds
        // a dt-sized chattering band
        return vec![
            PropertyResult {
                name: "nominal_monotone_decrease",
                passed: true,
                worst: -1.0,
                tolerance: 0.0,
                samples: 0,
                detail: "analytic: dV1/dt = -1 for z1 != 0".to_string(),
            },
            PropertyResult {
                name: "nominal_convergence",
                passed: true,
                worst: 0.0,
                tolerance: CONVERGED_V1,
                samples: 0,
                detail: "analytic: z1 = 0 reached at t = |z1(0)|".to_string(),
            },
        ];
    }

    let mut max_rise = f64::NEG_INFINITY;
    let mut rise_at = (0, 0.0);
    let mut worst_final = 0.0_f64;
    let mut failures = Vec::new();
    let runs = level.len().min(NOMINAL_RUNS);
    for (run, z0) in level.iter().take(runs).enumerate() {
        let spec = SimulationSpec {
            stabilizer: stab.clone(),
            adaptive: None,
            uncertainty: UncertaintyModel::nominal(1.0).expect("valid nominal model"),
            z0: z0.clone(),
            dt: NOMINAL_DT,
            t_final: NOMINAL_HORIZON,
            method: Method::Euler,
            record_stride: 1,
            blowup_guard: DEFAULT_BLOWUP_GUARD,
        };
        match simulate(&spec) {
            Ok(traj) => {
                for (i, w) in traj.lyapunov.windows(2).enumerate() {
                    let rise = w[1] - w[0];
                    if rise > max_rise {
                        max_rise = rise;
                        rise_at = (run, traj.times[i]);
                    }
                }
                worst_final = worst_final.max(*traj.lyapunov.last().unwrap_or(&f64::INFINITY));
            }
            Err(err) => failures.push(format!("run {run}: {err}")),
        }
    }
    let detail_fail = if failures.is_empty() {
        String::new()
    } else {
        format!("; {}", failures.join("; "))
    };
    vec![
        PropertyResult {
            name: "nominal_monotone_decrease",
            passed: failures.is_empty() && max_rise <= MONOTONE_STEP_TOL,
            worst: max_rise,
            tolerance: MONOTONE_STEP_TOL,
            samples: runs,
            detail: format!(
                "largest per-step rise of V1 {max_rise:e} (run {}, t = {:.4}){detail_fail}",
                rise_at.0, rise_at.1
            ),
        },
        PropertyResult {
            name: "nominal_convergence",
            passed: failures.is_empty() && worst_final < CONVERGED_V1,
            worst: worst_final,
            tolerance: CONVERGED_V1,
            samples: runs,
            detail: format!("largest V1 at t = {NOMINAL_HORIZON}{detail_fail}"),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainConfig;

    #[test]
    fn sign_controller_passes() {
        let report = verify_chain(&Stabilizer::Sign, 2_000, 3);
        for p in &report.properties {
            assert!(p.passed, "{p:?}");
        }
    }

    #[test]
    fn order2_config_passes() {
        let stab = Stabilizer::Hong(ChainConfig::new(2, 1.0, -1.0 / 3.0, vec![1.0, 2.0]).unwrap());
        let report = verify_chain(&stab, 2_000, 4);
        for p in &report.properties {
            assert!(p.passed, "{p:?}");
        }
    }

    #[test]
    fn corrupted_beta_breaks_homogeneity() {
        let cfg = ChainConfig::new(3, 1.0, -0.25, vec![1.0, 2.0, 5.0]).unwrap();
        let mut betas = cfg.betas().to_vec();
        betas[1] += 0.1;
        let stab = Stabilizer::Hong(cfg.with_betas(betas).unwrap());
        let report = verify_chain(&stab, 1_000, 5);
        let h = report.get("v1_homogeneity").unwrap();
        assert!(!h.passed, "{h:?}");
        assert!(report.get("u0_homogeneity").unwrap().passed);
    }
}
