//! Complete elliptic integrals in the **parameter** convention:
//!
//! ```text
//! K(m) = ∫₀^{π/2} dθ / sqrt(1 - m sin²θ),    E(m) = ∫₀^{π/2} sqrt(1 - m sin²θ) dθ
//! ```
//!
//! so `m` is the squared modulus. Landen-type formulas are sensitive to this
//! choice: `K(4z/(1+z)²) = (1+z) K(z²)` holds in this convention.
//!
//! `K` uses the arithmetic-geometric mean, `K(m) = π / (2 AGM(1, sqrt(1-m)))`.
//! `E` uses the modified AGM of Adlaj (2012), `E(m) = (π/2) MAGM(1, 1-m) / AGM(1, sqrt(1-m))`,
//! which avoids the cancelling sum of the classical Gauss–Legendre scheme.
//! The `_complement` variants take `1 - m` directly and keep full relative
//! accuracy as `m → 1`.
//!
//! For `m > 1` the defining integrands turn complex beyond `θ* = arcsin(1/sqrt(m))`.
//! [`elliptic_k_re`] and [`elliptic_e_re`] return the real part, which is the
//! integral truncated to `[0, θ*]`. Both use the reciprocal-modulus
//! transformation, except `E` for `m > 2`, where it cancels and the truncated
//! integral is evaluated by tanh-sinh quadrature.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{double_exponential_offsets, Node, QuadSpec};

const MAX_AGM_STEPS: usize = 64;

/// `K(m)` and `E(m)` evaluated together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticPair {
    pub k_value: f64,
    pub e_value: f64,
}

impl EllipticPair {
    pub fn at(m: f64) -> Result<Self> {
        check_k_domain(m)?;
        Self::at_complement(1.0 - m)
    }

    pub fn at_complement(mc: f64) -> Result<Self> {
        Ok(EllipticPair {
            k_value: elliptic_k_complement(mc)?,
            e_value: elliptic_e_complement(mc)?,
        })
    }
}

fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Modified AGM: `x' = (x+y)/2`, `y' = z + sqrt((x-z)(y-z))`, `z' = z - sqrt((x-z)(y-z))`.
/// Rounding makes the iteration drift once `x ≈ y`, so it stops at the first
/// step that fails to shrink `|x - y|`.
fn magm(x0: f64, y0: f64) -> f64 {
    let (mut x, mut y, mut z) = (x0, y0, 0.0f64);
    for _ in 0..MAX_AGM_STEPS {
        let gap = (x - y).abs();
        if gap <= f64::EPSILON * x {
            break;
        }
        let next_x = 0.5 * (x + y);
        let root = ((x - z) * (y - z)).sqrt();
        let next_y = z + root;
        if (next_x - next_y).abs() >= gap {
            break;
        }
        x = next_x;
        y = next_y;
        z -= root;
    }
    0.5 * (x + y)
}

fn check_k_domain(m: f64) -> Result<()> {
    if m.is_nan() || m == f64::NEG_INFINITY {
        return Err(Error::domain("elliptic_k", format!("m = {m}")));
    }
    if m >= 1.0 {
        return Err(Error::domain(
            "elliptic_k",
            format!("m = {m}: K diverges at m = 1 and is complex beyond"),
        ));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind, `m < 1`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    check_k_domain(m)?;
    elliptic_k_complement(1.0 - m)
}

/// `K` as a function of the complementary parameter `mc = 1 - m > 0`.
pub fn elliptic_k_complement(mc: f64) -> Result<f64> {
    if !(mc > 0.0) || mc.is_infinite() {
        return Err(Error::domain(
            "elliptic_k",
            format!("complementary parameter {mc} must be positive and finite"),
        ));
    }
    Ok(FRAC_PI_2 / agm(1.0, mc.sqrt()))
}

/// Complete elliptic integral of the second kind, `m <= 1`.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if m.is_nan() || m == f64::NEG_INFINITY || m > 1.0 {
        return Err(Error::domain("elliptic_e", format!("m = {m} outside (-inf, 1]")));
    }
    elliptic_e_complement(1.0 - m)
}

/// `E` as a function of the complementary parameter `mc = 1 - m >= 0`.
pub fn elliptic_e_complement(mc: f64) -> Result<f64> {
    if !(mc >= 0.0) || mc.is_infinite() {
        return Err(Error::domain(
            "elliptic_e",
            format!("complementary parameter {mc} must be non-negative and finite"),
        ));
    }
    if mc == 0.0 {
        return Ok(1.0);
    }
    Ok(FRAC_PI_2 * magm(1.0, mc) / agm(1.0, mc.sqrt()))
}

fn real_part_spec() -> QuadSpec {
    QuadSpec::double_exponential()
        .with_tolerances(0.0, 1e-13)
        .expect("static tolerances are valid")
}

fn check_excess(excess: f64, function: &'static str) -> Result<()> {
    if !(excess > 0.0) || excess.is_infinite() {
        return Err(Error::domain(
            function,
            format!("m - 1 = {excess}: real-part form needs m > 1"),
        ));
    }
    Ok(())
}

/// `1 - m sin²θ = m sin(θ* - θ) sin(θ* + θ)` with `sin²θ* = 1/m`; the first
/// factor comes from the quadrature node's distance to `θ*`.
fn truncated_integral(excess: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let m = 1.0 + excess;
    let theta_star = (1.0 / excess.sqrt()).atan();
    double_exponential_offsets(
        |n: Node| g(m * n.right.sin() * (theta_star + n.x).sin()),
        0.0,
        theta_star,
        &real_part_spec(),
    )
}

/// Real part of `K(m)` for `m > 1`: `∫₀^{θ*} dθ / sqrt(1 - m sin²θ)`.
pub fn elliptic_k_re(m: f64) -> Result<f64> {
    elliptic_k_re_excess(m - 1.0)
}

/// [`elliptic_k_re`] at `m = 1 + excess`, for callers holding `m - 1` exactly.
///
/// Uses `Re K(m) = K(1/m)/sqrt(m)` with `1 - 1/m = excess/m`.
pub fn elliptic_k_re_excess(excess: f64) -> Result<f64> {
    check_excess(excess, "elliptic_k_re")?;
    let m = 1.0 + excess;
    Ok(elliptic_k_complement(excess / m)? / m.sqrt())
}

/// Real part of `E(m)` for `m > 1`: `∫₀^{θ*} sqrt(1 - m sin²θ) dθ`.
pub fn elliptic_e_re(m: f64) -> Result<f64> {
    elliptic_e_re_excess(m - 1.0)
}

/// [`elliptic_e_re`] at `m = 1 + excess`.
///
/// Near `m = 1` uses `Re E(m) = sqrt(m) E(1/m) - (m-1)/sqrt(m) K(1/m)`, which
/// cancels for large `m`; there the truncated integral is used instead.
pub fn elliptic_e_re_excess(excess: f64) -> Result<f64> {
    check_excess(excess, "elliptic_e_re")?;
    if excess > 1.0 {
        return truncated_integral(excess, f64::sqrt);
    }
    let m = 1.0 + excess;
    let s = m.sqrt();
    let mc = excess / m;
    Ok(s * elliptic_e_complement(mc)? - excess / s * elliptic_k_complement(mc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::double_exponential_integrate;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn special_values() {
        assert!((elliptic_k(0.0).unwrap() - PI / 2.0).abs() < 1e-16);
        assert!((elliptic_e(0.0).unwrap() - PI / 2.0).abs() < 1e-16);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
        assert!(matches!(elliptic_k(1.0), Err(Error::Domain { .. })));
        assert!(matches!(elliptic_e(1.5), Err(Error::Domain { .. })));
        // K(1/2) = Γ(1/4)² / (4 sqrt(π))
        let g14 = 3.625_609_908_221_908_3;
        assert!(rel(elliptic_k(0.5).unwrap(), g14 * g14 / (4.0 * PI.sqrt())) < 1e-15);
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K - K K' = π/2
        for &m in &[1e-12, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10] {
            let p = EllipticPair::at(m).unwrap();
            let q = EllipticPair::at_complement(m).unwrap();
            let lhs = p.e_value * q.k_value + q.e_value * p.k_value - p.k_value * q.k_value;
            assert!((lhs - PI / 2.0).abs() < 1e-13, "m = {m}: {lhs}");
        }
    }

    #[test]
    fn agrees_with_quadrature() {
        let spec = QuadSpec::double_exponential().with_tolerances(0.0, 1e-14).unwrap();
        for &m in &[0.0, 0.2, 0.5, 0.8, 0.99] {
            let k =
                double_exponential_integrate(|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, &spec)
                    .unwrap();
            let e = double_exponential_integrate(|t: f64| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, &spec)
                .unwrap();
            assert!(rel(elliptic_k(m).unwrap(), k) < 1e-13, "K({m})");
            assert!(rel(elliptic_e(m).unwrap(), e) < 1e-13, "E({m})");
        }
    }

    #[test]
    fn complement_near_one() {
        // K(m) ~ ln 4 - ln(sqrt(mc))/... : compare with the asymptotic series
        let mc: f64 = 1e-200;
        let k = elliptic_k_complement(mc).unwrap();
        let asym = (4.0 / mc.sqrt()).ln();
        assert!(rel(k, asym) < 1e-14);
        let e = elliptic_e_complement(mc).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn landen_in_parameter_convention() {
        for i in 0..=19 {
            let z = 0.05 * i as f64;
            let w = 4.0 * z / ((1.0 + z) * (1.0 + z));
            let k2 = elliptic_k(z * z).unwrap();
            let e2 = elliptic_e(z * z).unwrap();
            assert!(rel(elliptic_k(w).unwrap(), (1.0 + z) * k2) < 1e-13);
            let rhs = 2.0 * e2 / (1.0 + z) - (1.0 - z) * k2;
            assert!(rel(elliptic_e(w).unwrap(), rhs) < 1e-13);
        }
    }

    #[test]
    fn real_parts_against_truncated_integral() {
        for &excess in &[1e-3, 0.2, 0.5, 0.999, 1.001, 3.0, 36.0] {
            let k = truncated_integral(excess, |q| 1.0 / q.sqrt()).unwrap();
            let e = truncated_integral(excess, f64::sqrt).unwrap();
            assert!(
                rel(elliptic_k_re_excess(excess).unwrap(), k) < 1e-12,
                "K excess={excess}"
            );
            assert!(
                rel(elliptic_e_re_excess(excess).unwrap(), e) < 1e-12,
                "E excess={excess}"
            );
        }
        assert!(matches!(elliptic_k_re(1.0), Err(Error::Domain { .. })));
        assert!(matches!(elliptic_e_re(0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn real_part_continuity_at_one() {
        assert!((elliptic_e_re_excess(1e-14).unwrap() - 1.0).abs() < 1e-12);
        let e = 1e-200;
        assert!(rel(elliptic_k_re_excess(e).unwrap(), elliptic_k_complement(e).unwrap()) < 1e-14);
    }

    #[test]
    fn real_parts_at_four_against_plain_quadrature() {
        let theta_star = 0.5f64.asin();
        let spec = QuadSpec::double_exponential().with_tolerances(1e-7, 0.0).unwrap();
        let k = double_exponential_integrate(
            |t: f64| 1.0 / (1.0 - 4.0 * t.sin().powi(2)).sqrt(),
            0.0,
            theta_star,
            &spec,
        )
        .unwrap();
        let e = double_exponential_integrate(
            |t: f64| (1.0 - 4.0 * t.sin().powi(2)).max(0.0).sqrt(),
            0.0,
            theta_star,
            &spec,
        )
        .unwrap();
        // the plain integrand loses digits beside θ*
        assert!(rel(elliptic_k_re(4.0).unwrap(), k) < 1e-7);
        assert!(rel(elliptic_e_re(4.0).unwrap(), e) < 1e-9);
    }
}
