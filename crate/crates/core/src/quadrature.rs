//! Adaptive Simpson quadrature, used as an independent check on the closed
//! form of `V1`.

use crate::chain::{hong_v_sequence, signed_power, ChainConfig, Stabilizer};

const MAX_DEPTH: u32 = 60;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (oriented: `a > b` gives the negated
/// integral).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Integral with a known kink at `s = 0` split out.
fn integrate_split_at_zero(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a < 0.0 && b > 0.0 || a > 0.0 && b < 0.0 {
        integrate(&f, a, 0.0, 0.5 * tol) + integrate(&f, 0.0, b, 0.5 * tol)
    } else {
        integrate(f, a, b, tol)
    }
}

/// `V1` by numerical quadrature of each integrand
/// `s ↦ ⌊s⌉^{β_{j-1}} - ⌊v_{j-1}⌉^{β_{j-1}}` over `[v_{j-1}, z_j]`.
pub fn lyapunov_v1_quadrature(z: &[f64], cfg: &ChainConfig, tol: f64) -> f64 {
    let v = hong_v_sequence(z, cfg);
    (0..cfg.order())
        .map(|j| {
            let beta = cfg.betas()[j];
            let offset = signed_power(v[j], beta);
            integrate_split_at_zero(|s| signed_power(s, beta) - offset, v[j], z[j], tol)
        })
        .sum()
}

/// Quadrature oracle for either stabilizer; the sign controller's `V1 = |z_1|`
/// is `∫_0^{z_1} sgn(s) ds`.
pub fn stabilizer_v1_quadrature(stab: &Stabilizer, z: &[f64], tol: f64) -> f64 {
    match stab {
        Stabilizer::Hong(cfg) => lyapunov_v1_quadrature(z, cfg, tol),
        Stabilizer::Sign => integrate_split_at_zero(crate::chain::sgn, 0.0, z[0], tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_and_oriented() {
        assert_relative_eq!(integrate(|x| x * x, 0.0, 3.0, 1e-12), 9.0, epsilon = 1e-12);
        assert_relative_eq!(integrate(|x| x * x, 3.0, 0.0, 1e-12), -9.0, epsilon = 1e-12);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-12), 0.0);
    }

    #[test]
    fn singular_derivative_at_endpoint() {
        // ∫_0^1 s^0.25 ds = 0.8
        let v = integrate(|s: f64| s.powf(0.25), 0.0, 1.0, 1e-13);
        assert_relative_eq!(v, 0.8, max_relative = 1e-10);
    }

    #[test]
    fn single_term_example() {
        // ∫_1^3 s - 1 ds = 2
        let v = integrate_split_at_zero(|s| signed_power(s, 1.0) - 1.0, 1.0, 3.0, 1e-13);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sign_oracle() {
        assert_relative_eq!(
            stabilizer_v1_quadrature(&Stabilizer::Sign, &[-2.5], 1e-12),
            2.5,
            epsilon = 1e-10
        );
    }
}
