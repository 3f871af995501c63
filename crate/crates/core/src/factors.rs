//! The universal factors `k̃_{q,p}` and `k_{q,p}` and the Beta-family special
//! functions behind them.

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::types::Exponents;

/// Below this value of `r = q/p - 1` the diagonal closed form is used for
/// `k_{q,p}`.
pub const DIAGONAL_R_THRESHOLD: f64 = 1e-9;

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorPair {
    pub tilde_k: f64,
    pub k: f64,
    pub exponents: Exponents,
}

impl FactorPair {
    pub fn new(e: &Exponents) -> Self {
        Self {
            tilde_k: tilde_k(e),
            k: k(e),
            exponents: *e,
        }
    }
}

/// The classical factor `(1 + q/p*)^{1/q} (1 + p*/q)^{1/p*}`.
pub fn tilde_k(e: &Exponents) -> f64 {
    (1.0 + e.q / e.p_star).powf(1.0 / e.q) * (1.0 + e.p_star / e.q).powf(1.0 / e.p_star)
}

/// The improved factor `(r / B(1/r, (q-1)/r))^{1/p - 1/q}`.
///
/// Evaluated in log space: `B(1/r, ·)` underflows long before `r` reaches
/// the diagonal threshold, but `(1/p - 1/q) = r/q` tames the logarithm.
pub fn k(e: &Exponents) -> f64 {
    if e.r < DIAGONAL_R_THRESHOLD {
        return diagonal_factor(e.p);
    }
    let r = e.r;
    let log_b = ln_beta_unchecked(1.0 / r, (e.q - 1.0) / r);
    ((r / e.q) * (r.ln() - log_b)).exp()
}

/// `p^{1/p} (p*)^{1/p*}`, the common value of both factors at `p = q`.
pub fn diagonal_factor(p: f64) -> f64 {
    let p_star = p / (p - 1.0);
    p.powf(1.0 / p) * p_star.powf(1.0 / p_star)
}

/// Complete Beta function `∫₀¹ x^{a-1} (1-x)^{b-1} dx`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_shape(a, b)?;
    Ok(ln_beta_unchecked(a, b))
}

fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

fn check_shape(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(HardyError::Domain(format!(
            "Beta parameters must be positive and finite, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Unnormalized incomplete Beta function `∫₀ˣ s^{a-1} (1-s)^{b-1} ds`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(HardyError::Domain(format!(
            "incomplete Beta argument x = {x} outside [0, 1]"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let full = beta(a, b)?;
    if x == 1.0 {
        return Ok(full);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(full - front_times_cf(b, a, 1.0 - x)?)
    } else {
        front_times_cf(a, b, x)
    }
}

/// Regularized incomplete Beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    let full = beta(a, b)?;
    Ok((incomplete_beta(a, b, x)? / full).clamp(0.0, 1.0))
}

/// `x^a (1-x)^b / a · CF(a, b, x)`: the unnormalized incomplete Beta on the
/// side of the switch point where the continued fraction converges fast.
fn front_times_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let log_front = a * x.ln() + b * (-x).ln_1p();
    Ok(log_front.exp() * continued_fraction(a, b, x)? / a)
}

/// Modified Lentz evaluation of the standard incomplete-Beta continued
/// fraction.
fn continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(HardyError::Diverged(format!(
        "incomplete Beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::validate_exponents;
    use approx::assert_relative_eq;

    fn ex(p: f64, q: f64) -> Exponents {
        validate_exponents(p, q).unwrap()
    }

    #[test]
    fn tilde_k_values() {
        assert_relative_eq!(tilde_k(&ex(2.0, 2.0)), 2.0, max_relative = 1e-15);
        let want = 3f64.powf(0.25) * 1.5f64.sqrt();
        assert_relative_eq!(tilde_k(&ex(2.0, 4.0)), want, max_relative = 1e-14);
        assert!((want - 1.61185).abs() < 1e-5);
        let want = 3f64.powf(1.0 / 3.0) * 1.5f64.powf(2.0 / 3.0);
        assert_relative_eq!(tilde_k(&ex(3.0, 3.0)), want, max_relative = 1e-14);
        assert!((want - 1.88988).abs() < 1e-5);
    }

    #[test]
    fn k_diagonal_is_two() {
        assert!((k(&ex(2.0, 2.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k_two_four() {
        assert_relative_eq!(k(&ex(2.0, 4.0)), 3f64.powf(0.25), max_relative = 1e-12);
    }

    #[test]
    fn k_near_diagonal() {
        assert!((k(&ex(2.0, 2.0 + 1e-6)) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn k_continuous_across_seam() {
        for p in [1.3, 2.0, 4.5] {
            let at = k(&ex(p, p));
            let mut last = f64::INFINITY;
            for j in 2..=8 {
                let eps = 10f64.powi(-j);
                let gap = (k(&ex(p, p + eps)) - at).abs();
                assert!(gap <= last + 1e-12, "p={p} eps={eps}");
                last = gap;
            }
            assert!(last < 1e-6);
        }
    }

    #[test]
    fn beta_closed_forms() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta(1.0, 3.0).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            beta(0.5, 0.5).unwrap(),
            std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
    }

    #[test]
    fn incomplete_beta_edges() {
        assert_eq!(incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            incomplete_beta(2.0, 3.0, 1.0).unwrap(),
            beta(2.0, 3.0).unwrap(),
            max_relative = 1e-15
        );
        // ∫₀^{1/2} s (1-s)² ds = 11/192
        assert_relative_eq!(
            incomplete_beta(2.0, 3.0, 0.5).unwrap(),
            11.0 / 192.0,
            max_relative = 1e-12
        );
        assert!(incomplete_beta(2.0, 3.0, 1.5).is_err());
        assert!(incomplete_beta(2.0, 3.0, -0.1).is_err());
    }

    #[test]
    fn incomplete_beta_reflection() {
        for &(a, b) in &[(0.3, 7.0), (2.0, 3.0), (15.0, 0.8), (40.0, 60.0)] {
            let full = beta(a, b).unwrap();
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let s = incomplete_beta(a, b, x).unwrap() + incomplete_beta(b, a, 1.0 - x).unwrap();
                assert_relative_eq!(s, full, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn factor_pair_ordering() {
        let f = FactorPair::new(&ex(1.7, 3.2));
        assert!(f.k <= f.tilde_k);
        assert!(f.k > 1.0);
    }
}
