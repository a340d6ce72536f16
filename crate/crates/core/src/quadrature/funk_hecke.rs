//! Funk–Hecke reduction: the mean of `f(z·X)` over the uniform unit sphere
//! equals `τ(d) ∫₋₁¹ f(t) (1 - t²)^{(d-3)/2} dt`.
//!
//! The integral is evaluated in the angle form `τ(d) ∫₀^π f(cos θ) sin^{d-2} θ dθ`,
//! whose weight is bounded for every `d >= 2`.

use super::{double_exponential_offsets, gauss_legendre_integrate, Node, QuadMethod, QuadSpec, DEFAULT_DE_POINTS};
use crate::error::{Error, Result};
use crate::riesz::tau;

/// Mean of `f(z·X)` over the uniform sphere in dimension `d`.
///
/// `d = 2` always uses the double-exponential rule; otherwise `spec.method`
/// selects Gauss–Legendre or double exponential. Split points are given in
/// `t ∈ (-1, 1)`.
pub fn funk_hecke_reduce(f: impl Fn(f64) -> f64, d: u32, spec: &QuadSpec) -> Result<f64> {
    funk_hecke_angular(|theta| f(theta.cos()), d, spec)
}

/// `τ(d) ∫₀^π g(θ) sin^{d-2} θ dθ`, the same reduction with the integrand
/// given as a function of the angle. Split points are given in `t = cos θ`.
pub fn funk_hecke_angular(g: impl Fn(f64) -> f64, d: u32, spec: &QuadSpec) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "Funk-Hecke reduction needs d >= 2, got {d}"
        )));
    }
    let mut theta_spec = spec.clone();
    theta_spec.split_at = spec
        .panels(-1.0, 1.0)?
        .iter()
        .filter(|&&t| t > -1.0 && t < 1.0)
        .map(|&t| t.acos())
        .collect();
    if d == 2 || spec.method == QuadMethod::DoubleExponential {
        if spec.method != QuadMethod::DoubleExponential {
            theta_spec.method = QuadMethod::DoubleExponential;
            theta_spec.points = theta_spec.points.max(DEFAULT_DE_POINTS);
        }
        return funk_hecke_theta(|n: Node| g(n.x), d, &theta_spec);
    }
    let power = (d - 2) as i32;
    let weighted = |theta: f64| g(theta) * theta.sin().powi(power);
    let integral = gauss_legendre_integrate(weighted, 0.0, std::f64::consts::PI, &theta_spec)?;
    Ok(tau(d)? * integral)
}

/// Double-exponential form of [`funk_hecke_angular`] with split points given
/// directly in `θ`, for integrands that vary on scales finer than `cos θ` can
/// resolve near the poles. The integrand receives a node whose offsets are
/// the distances to `θ = 0` and `θ = π`.
pub fn funk_hecke_theta(g: impl Fn(Node) -> f64, d: u32, spec: &QuadSpec) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "Funk-Hecke reduction needs d >= 2, got {d}"
        )));
    }
    let pi = std::f64::consts::PI;
    let cuts = spec.panels(0.0, pi)?;
    let power = (d - 2) as i32;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let weighted = |n: Node| {
            let polar = Node {
                x: n.x,
                left: a + n.left,
                right: (pi - b) + n.right,
            };
            g(polar) * polar.left.min(polar.right).sin().powi(power)
        };
        let mut panel = spec.clone();
        panel.split_at.clear();
        total += double_exponential_offsets(weighted, a, b, &panel)?;
    }
    Ok(tau(d)? * total)
}
