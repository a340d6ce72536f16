//! Special functions: Gamma and relatives, hypergeometric series, complete
//! elliptic integrals, and the angular function `S_s`.

mod elliptic;
mod gamma;
mod hyper;

pub use elliptic::{
    elliptic_e, elliptic_e_complement, elliptic_e_re, elliptic_e_re_excess, elliptic_k, elliptic_k_complement,
    elliptic_k_re, elliptic_k_re_excess, EllipticPair,
};
pub use gamma::{digamma, gamma_fn, ln_gamma, pochhammer, rgamma, sin_pi, GAMMA_MAX_ARG};
pub use hyper::{hyp2f1, hyp2f1_complement, hyp_pfq, SeriesControl};

use crate::error::{Error, Result};

/// The angular function
///
/// ```text
/// S_s(z) = ∫₀^{π/2} sin^{s+1}α cos^{s+1}α / (1 - z sin²α)^{s/2} dα
///        = Γ((s+2)/2)² / (2 Γ(s+2)) · ₂F₁((s+2)/2, s/2; s+2; z)
/// ```
///
/// for `s > -2` and `z ∈ [0, 1]`. `S_{-1} = E` and `S_0 = 1/2`.
pub fn s_function(s: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    s_function_complement(s, z, 1.0 - z, ctrl)
}

/// [`s_function`] with `1 - z` supplied by the caller.
pub fn s_function_complement(s: f64, z: f64, one_minus_z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(s > -2.0) || !s.is_finite() {
        return Err(Error::domain("s_function", format!("s = {s} must exceed -2")));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain("s_function", format!("z = {z} outside [0, 1]")));
    }
    let half = 0.5 * (s + 2.0);
    let g = gamma_fn(half)?;
    let prefactor = g * g * rgamma(s + 2.0) * 0.5;
    Ok(prefactor * hyp2f1_complement(half, 0.5 * s, s + 2.0, z, one_minus_z, ctrl)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{double_exponential_offsets, Node, QuadSpec};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reflection_and_duplication() {
        for i in 0..=8 {
            let z = 0.1 + 0.1 * i as f64;
            let lhs = gamma_fn(z).unwrap() * gamma_fn(1.0 - z).unwrap() * sin_pi(z);
            assert!(rel(lhs, PI) < 1e-12, "z = {z}");
        }
        for &z in &[0.5, 1.0, 1.7, 3.0] {
            let lhs = PI.sqrt() * gamma_fn(2.0 * z).unwrap();
            let rhs = 2f64.powf(2.0 * z - 1.0) * gamma_fn(z).unwrap() * gamma_fn(z + 0.5).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn s_minus_one_is_e_and_s_zero_is_half() {
        let c = SeriesControl::default();
        for &z in &[0.0, 0.3, 0.9] {
            assert!(rel(s_function(-1.0, z, &c).unwrap(), elliptic_e(z).unwrap()) < 1e-13);
            assert!((s_function(0.0, z, &c).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn triple_agreement() {
        let c = SeriesControl::default();
        let spec = QuadSpec::double_exponential().with_tolerances(0.0, 1e-13).unwrap();
        for &s in &[-1.0, 0.0, 1.0, 2.0, 3.5] {
            for &z in &[0.0, 0.25, 0.5, 0.9] {
                let series = s_function(s, z, &c).unwrap();
                let trig = double_exponential_offsets(
                    |n: Node| {
                        let (sa, ca) = (n.x.sin(), n.right.sin());
                        (sa * ca).powf(s + 1.0) / (1.0 - z * sa * sa).powf(0.5 * s)
                    },
                    0.0,
                    FRAC_PI_2,
                    &spec,
                )
                .unwrap();
                let t_form = double_exponential_offsets(
                    |n: Node| {
                        let t = n.x;
                        let one_minus_t2 = n.right * (1.0 + t);
                        t.powf(s + 1.0) * one_minus_t2.powf(0.5 * s) / (1.0 - z * t * t).powf(0.5 * s)
                    },
                    0.0,
                    1.0,
                    &spec,
                )
                .unwrap();
                assert!((series - trig).abs() < 1e-9, "s={s} z={z}: {series} vs {trig}");
                assert!((series - t_form).abs() < 1e-9, "s={s} z={z}: {series} vs {t_form}");
            }
        }
    }

    #[test]
    fn s_function_domain() {
        let c = SeriesControl::default();
        assert!(s_function(-2.0, 0.5, &c).is_err());
        assert!(s_function(1.0, 1.5, &c).is_err());
        // z = 1: Gauss sum with c - a - b = 1
        let at_one = s_function(1.0, 1.0, &c).unwrap();
        let near = s_function_complement(1.0, 1.0 - 1e-13, 1e-13, &c).unwrap();
        assert!((at_one - near).abs() < 1e-9);
    }
}
