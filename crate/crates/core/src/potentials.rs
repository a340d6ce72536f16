//! Potentials of radial measures and the field-augmented potential
//! `φ(λ) = U^μ(λR) + γ(λR)²` of the radial arcsine law.
//!
//! Every radial integral that depends on a radius `λ` is split at `r = λ`, and
//! the integrands are evaluated from exact distances to `λ` and to the outer
//! endpoint.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RadialMeasure;
use crate::par::Execution;
use crate::quadrature::{double_exponential_offsets, funk_hecke_theta, integrate_unit_split, Node, QuadSpec};
use crate::riesz::{kernel_unchecked, ProblemSpec, RieszParams};
use crate::specfun::{
    elliptic_e_complement, elliptic_k_complement, gamma_fn, hyp2f1_complement, s_function_complement, SeriesControl,
};

fn radial_spec() -> QuadSpec {
    QuadSpec {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        ..QuadSpec::double_exponential()
    }
}

fn check_lambda(function: &'static str, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(function, format!("lambda = {lambda} outside [0, 1]")));
    }
    Ok(())
}

/// Radial integral of `₂F₁(s/4, (s+2)/4; d/2; 4r²λ²/(λ²+r²)²) r^{d-1} / ((λ²+r²)^{s/2} (1-r²)^{(d-s)/2})`
/// over `[0, 1]`.
///
/// This is the sphere-averaged potential of the density `(1 - |y|²)^{-(d-s)/2}`
/// at `|x| = λ`, up to the factor `2π^{d/2}/Γ(d/2)`. For `d - 2 < s < d` it
/// equals `π / (2 sin(π(d-s)/2))` for every `λ ∈ [0, 1]`.
pub fn ball_potential_hypergeometric(params: &RieszParams, lambda: f64) -> Result<f64> {
    let (d, s) = (params.d() as f64, params.s());
    let ctrl = SeriesControl::default();
    let (a, b, c) = (0.25 * s, 0.25 * (s + 2.0), 0.5 * d);
    let hyp = |z: f64, omz: f64| hyp2f1_complement(a, b, c, z, omz, &ctrl).unwrap_or(f64::NAN);
    ball_potential_integral(params, lambda, hyp, &radial_spec())
}

/// The same radial integral with the hypergeometric factor supplied as
/// `hyp(z, 1 - z)`, for closed-form special cases.
pub fn ball_potential_integral(
    params: &RieszParams,
    lambda: f64,
    hyp: impl Fn(f64, f64) -> f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let (d, s) = (params.d() as f64, params.s());
    if !(d - 2.0 < s && s < d) {
        return Err(Error::domain(
            "ball_potential_hypergeometric",
            format!("needs d - 2 < s < d, got d = {d}, s = {s}"),
        ));
    }
    check_lambda("ball_potential_hypergeometric", lambda)?;
    let dm1 = params.d() as i32 - 1;
    let f = |r: f64, gap: f64, gap_one: f64| {
        let h = lambda.hypot(r);
        let q = 2.0 * (r / h) * (lambda / h);
        let omz = ((gap / h) * ((lambda + r) / h)).min(1.0);
        let value = hyp((q * q).min(1.0), omz * omz);
        value * r.powi(dm1) * h.powf(-s) * (gap_one * (1.0 + r)).powf(-0.5 * (d - s))
    };
    integrate_unit_split(f, lambda, spec)
}

/// `A(λ, r, |λ - r|) = ∫₀^π sin^{d-2}θ / (λ² - 2λr cos θ + r²)^{(d-3)/2} dθ`
/// through the closed form `2^{d-1} (λ+r)^{3-d} S_{d-3}(4λr/(λ+r)²)`.
fn angular_kernel_gap(d: u32, lambda: f64, r: f64, gap: f64, ctrl: &SeriesControl) -> Result<f64> {
    if d == 3 {
        return Ok(2.0);
    }
    let sum = lambda + r;
    if sum == 0.0 {
        return if d == 2 {
            Ok(0.0)
        } else {
            Err(Error::domain("angular_kernel", "lambda = r = 0 needs d <= 3"))
        };
    }
    let z = (4.0 * lambda / sum) * (r / sum);
    let omz = ((gap / sum) * (gap / sum)).min(1.0);
    if d == 2 {
        return Ok(2.0 * sum * elliptic_e_complement(omz)?);
    }
    let df = d as f64;
    Ok(2f64.powi(d as i32 - 1) * sum.powf(3.0 - df) * s_function_complement(df - 3.0, z.min(1.0), omz, ctrl)?)
}

/// `∫₀^π sin^{d-2}θ / (λ² - 2rλ cos θ + r²)^{(d-3)/2} dθ` in closed form.
pub fn angular_kernel(d: u32, lambda: f64, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain("angular_kernel", format!("needs d >= 2, got {d}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() || !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(
            "angular_kernel",
            format!("needs lambda >= 0 and r in [0, 1], got lambda = {lambda}, r = {r}"),
        ));
    }
    angular_kernel_gap(d, lambda, r, (lambda - r).abs(), &SeriesControl::default())
}

fn check_field_spec(function: &'static str, spec: &ProblemSpec) -> Result<()> {
    if !spec.params.is_field_regime() {
        return Err(Error::domain(
            function,
            format!("needs s = d - 3, got d = {}, s = {}", spec.params.d(), spec.params.s()),
        ));
    }
    Ok(())
}

/// `(λ+r)² log(λ+r) - (λ-r)² log|λ-r|`, divided by `λ`, rearranged as
/// `4r log|λ-r| + (λ+r)²/λ · log1p(2 min(λ, r)/|λ-r|)` to avoid cancellation
/// for small `λ`. At `λ = 0` it takes the limit `4r log r + 2r`.
fn log_difference_over_lambda(lambda: f64, r: f64, gap: f64) -> f64 {
    if lambda == 0.0 {
        return 4.0 * r * r.ln() + 2.0 * r;
    }
    let sum = lambda + r;
    4.0 * r * gap.ln() + sum * (sum / lambda) * (2.0 * lambda.min(r) / gap).ln_1p()
}

/// `φ(λ) = U(λR) + γR²λ²` for the radial arcsine law on the ball of radius
/// `R = spec.radius` with kernel `K_{d-3}`.
///
/// For `d ≠ 3`:
/// `φ = R^{3-d} (c_d ∫₀¹ A_d(λ, r) r^{d-1}/√(1-r²) dr) + γR²λ²` with
/// `c_d = 2 sign(d-3) Γ((d+1)/2) / (π Γ((d-1)/2))` and `A_d` the closed-form
/// angular integral. For `d = 3`:
/// `φ = -(1/(πλ)) ∫₀¹ [(λ+r)² log(λ+r) - (λ-r)² log|λ-r|] r/√(1-r²) dr - log R + 1/2 + γR²λ²`.
pub fn phi_general(spec: &ProblemSpec, lambda: f64) -> Result<f64> {
    check_field_spec("phi_general", spec)?;
    check_lambda("phi_general", lambda)?;
    let d = spec.params.d();
    let big_r = spec.radius;
    let field = spec.gamma * big_r * big_r * lambda * lambda;
    let quad = radial_spec();
    if d == 3 {
        let f = |r: f64, gap: f64, gap_one: f64| {
            log_difference_over_lambda(lambda, r, gap) * r / (gap_one * (1.0 + r)).sqrt()
        };
        let integral = integrate_unit_split(f, lambda, &quad)?;
        return Ok(-integral / PI - big_r.ln() + 0.5 + field);
    }
    let df = d as f64;
    let sign = if d > 3 { 1.0 } else { -1.0 };
    let c_d = 2.0 * sign * gamma_fn(0.5 * (df + 1.0))? / (PI * gamma_fn(0.5 * (df - 1.0))?);
    let ctrl = SeriesControl::default();
    let dm1 = d as i32 - 1;
    let f = |r: f64, gap: f64, gap_one: f64| {
        let a = angular_kernel_gap(d, lambda, r, gap, &ctrl).unwrap_or(f64::NAN);
        a * r.powi(dm1) / (gap_one * (1.0 + r)).sqrt()
    };
    let integral = integrate_unit_split(f, lambda, &quad)?;
    Ok(big_r.powf(3.0 - df) * c_d * integral + field)
}

fn check_gamma(function: &'static str, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(function, format!("gamma = {gamma} must be positive")));
    }
    Ok(())
}

/// `φ` and `φ'` for `d = 2`, `s = -1`, `R = π/(8γ)`:
///
/// ```text
/// φ(λ)  = -(1/(4γ)) ∫₀¹ (λ+r) E(4λr/(λ+r)²) r/√(1-r²) dr + π²λ²/(64γ)
/// φ'(λ) = -(1/(8γ)) ∫₀¹ [(1+r/λ) E + (1-r/λ) K](4λr/(λ+r)²) r/√(1-r²) dr + π²λ/(32γ)
/// ```
pub fn phi_d2_closed(gamma: f64, lambda: f64) -> Result<(f64, f64)> {
    check_gamma("phi_d2_closed", gamma)?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(
            "phi_d2_closed",
            format!("lambda = {lambda} outside (0, 1]"),
        ));
    }
    let quad = radial_spec();
    let omz = |r: f64, gap: f64| {
        let t = gap / (lambda + r);
        (t * t).min(1.0)
    };
    let value = |r: f64, gap: f64, gap_one: f64| {
        let e = elliptic_e_complement(omz(r, gap)).unwrap_or(f64::NAN);
        (lambda + r) * e * r / (gap_one * (1.0 + r)).sqrt()
    };
    let slope = |r: f64, gap: f64, gap_one: f64| {
        let mc = omz(r, gap);
        let e = elliptic_e_complement(mc).unwrap_or(f64::NAN);
        let k = elliptic_k_complement(mc).unwrap_or(f64::NAN);
        let signed_gap = if r < lambda { gap } else { -gap };
        ((1.0 + r / lambda) * e + (signed_gap / lambda) * k) * r / (gap_one * (1.0 + r)).sqrt()
    };
    let phi = -integrate_unit_split(value, lambda, &quad)? / (4.0 * gamma) + PI * PI * lambda * lambda / (64.0 * gamma);
    let phi_prime = -integrate_unit_split(slope, lambda, &quad)? / (8.0 * gamma) + PI * PI * lambda / (32.0 * gamma);
    Ok((phi, phi_prime))
}

/// `φ` for `d = 3`, `s = 0`, `R = (3γ)^{-1/2}`:
///
/// ```text
/// φ(λ) = (1 + log 3γ)/2 - (1/(2πλ)) ∫₀¹ [(λ+r)² log (λ+r)² - (λ-r)² log (λ-r)²] r/√(1-r²) dr + λ²/3
/// ```
///
/// The bracket divided by `λ` is evaluated in the cancellation-free form of
/// [`phi_general`]; at `λ = 0` it takes the limit `4r log r² + 4r`.
pub fn phi_d3_closed(gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma("phi_d3_closed", gamma)?;
    check_lambda("phi_d3_closed", lambda)?;
    let f = |r: f64, gap: f64, gap_one: f64| {
        2.0 * log_difference_over_lambda(lambda, r, gap) * r / (gap_one * (1.0 + r)).sqrt()
    };
    let integral = integrate_unit_split(f, lambda, &radial_spec())?;
    Ok(0.5 * (1.0 + (3.0 * gamma).ln()) - integral / (2.0 * PI) + lambda * lambda / 3.0)
}

/// Mean of `K_s(|a·e - r·Y|)` over `Y` uniform on the unit sphere of `R^d`,
/// given `gap = |a - r|` exactly.
fn sphere_mean_kernel(d: u32, s: f64, a: f64, r: f64, gap: f64, spec: &QuadSpec) -> Result<f64> {
    if a == 0.0 || r == 0.0 {
        return Ok(kernel_unchecked(s, a.max(r)));
    }
    let scale = (a * r).sqrt();
    // the integrand varies on the angular scale gap/√(ar); split geometrically below 1
    let mut splits = Vec::new();
    let mut w = gap / scale;
    while w < 1.0 {
        if w > 0.0 {
            splits.push(w);
        }
        w = if w > 0.0 { w * 100.0 } else { 1.0 };
    }
    let spec = QuadSpec {
        split_at: splits,
        ..spec.clone()
    };
    let f = |n: Node| {
        let half = if n.left <= n.right {
            (0.5 * n.left).sin()
        } else {
            (0.5 * n.right).cos()
        };
        kernel_unchecked(s, gap.hypot(2.0 * scale * half))
    };
    funk_hecke_theta(f, d, &spec)
}

/// `U^μ(x) = ∫ K_s(x - y) μ(dy)` at `|x| = a`, by Funk–Hecke reduction of the
/// sphere average followed by radial quadrature of the density.
pub fn radial_potential(measure: &RadialMeasure, s: f64, a: f64) -> Result<f64> {
    potential_of_density(
        |r, gap| measure.density_gap(r, gap),
        measure.dimension(),
        s,
        a,
        measure.support_radius(),
        &radial_spec(),
    )
}

/// `∫₀^R ρ(r) M(a, r) dr` where `M(a, r)` is the mean of `K_s` between the
/// point `a·e` and the sphere of radius `r` in `R^d`. The density receives `r`
/// and `R - r`. `spec` drives the radial rule; the angular rule uses the same
/// budget with tolerances ten times tighter.
pub fn potential_of_density(
    density: impl Fn(f64, f64) -> f64,
    d: u32,
    s: f64,
    a: f64,
    radius: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain(
            "radial_potential",
            format!("|x| = {a} must be finite and >= 0"),
        ));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(
            "radial_potential",
            format!("radius = {radius} must be positive"),
        ));
    }
    let mut quad = spec.clone();
    quad.split_at.clear();
    let inner = QuadSpec {
        abs_tol: 0.1 * spec.abs_tol,
        rel_tol: 0.1 * spec.rel_tol,
        ..quad.clone()
    };
    let mut total = 0.0;
    if a > 0.0 {
        let lower = a.min(radius);
        let to_top = radius - lower;
        let to_a = a - lower;
        let below = |n: Node| {
            let rho = density(n.x, to_top + n.right);
            if rho == 0.0 {
                return 0.0;
            }
            rho * sphere_mean_kernel(d, s, a, n.x, to_a + n.right, &inner).unwrap_or(f64::NAN)
        };
        total += double_exponential_offsets(below, 0.0, lower, &quad)?;
    }
    if a < radius {
        let above = |n: Node| {
            let rho = density(n.x, n.right);
            if rho == 0.0 {
                return 0.0;
            }
            rho * sphere_mean_kernel(d, s, a, n.x, n.left, &inner).unwrap_or(f64::NAN)
        };
        total += double_exponential_offsets(above, a, radius, &quad)?;
    }
    Ok(total)
}

/// `U^μ(λR) + V(λR) - U^μ(0) - V(0)` for the kernel and field of `spec`,
/// with `R = spec.radius`. Zero on the ball for the equilibrium measure.
pub fn el_residual(measure: &RadialMeasure, spec: &ProblemSpec, lambda: f64) -> Result<f64> {
    check_lambda("el_residual", lambda)?;
    if measure.dimension() != spec.params.d() {
        return Err(Error::domain(
            "el_residual",
            format!(
                "measure lives in d = {}, problem in d = {}",
                measure.dimension(),
                spec.params.d()
            ),
        ));
    }
    if measure.support_radius() > spec.radius * (1.0 + 1e-12) {
        return Err(Error::domain("el_residual", "measure support exceeds the ball"));
    }
    let s = spec.params.s();
    let x = lambda * spec.radius;
    let at_x = radial_potential(measure, s, x)? + spec.field(x);
    let at_0 = radial_potential(measure, s, 0.0)?;
    Ok(at_x - at_0)
}

/// Continuum energy `∬ K dμ dμ + 2∫ V dμ` of the radial arcsine law on the ball
/// of `spec`, `φ(0) + γR² d/(d+1)`.
pub fn equilibrium_energy(spec: &ProblemSpec) -> Result<f64> {
    let d = spec.params.d() as f64;
    Ok(phi_general(spec, 0.0)? + spec.gamma * spec.radius * spec.radius * d / (d + 1.0))
}

/// `φ` sampled on a grid of `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub spec: ProblemSpec,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub reference: f64,
}

impl PotentialProfile {
    /// Evaluates [`phi_general`] at every grid point and at `λ = 0`.
    pub fn compute(spec: &ProblemSpec, lambdas: &[f64], exec: Execution) -> Result<Self> {
        if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::InvalidParameter("profile grid must lie in [0, 1]".into()));
        }
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "profile grid must be strictly increasing".into(),
            ));
        }
        let values: Vec<f64> = exec
            .map_slice(lambdas, |&l| phi_general(spec, l))
            .into_iter()
            .collect::<Result<_>>()?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { at: lambdas[i] });
        }
        Ok(PotentialProfile {
            spec: *spec,
            lambdas: lambdas.to_vec(),
            values,
            reference: phi_general(spec, 0.0)?,
        })
    }

    /// `max |φ(λ) - φ(0)|` over the grid.
    pub fn max_deviation(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v - self.reference).abs())
            .fold(0.0, f64::max)
    }
}
