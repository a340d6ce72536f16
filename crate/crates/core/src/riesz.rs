//! Riesz kernels, dimensional constants and the critical radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma_fn;

/// Dimension `d` and Riesz exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    d: u32,
    s: f64,
}

impl RieszParams {
    pub fn new(d: u32, s: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !s.is_finite() || s <= -2.0 {
            return Err(Error::InvalidParameter(format!(
                "Riesz exponent s = {s} must be finite and > -2"
            )));
        }
        Ok(RieszParams { d, s })
    }

    /// The `s = d - 3` family with quadratic field, with `s` derived from `d`.
    pub fn field_regime(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "the s = d - 3 regime needs d >= 2, got {d}"
            )));
        }
        Self::new(d, d as f64 - 3.0)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `K_s` is locally integrable iff `s < d` (which includes `s = 0`).
    pub fn is_integrable(&self) -> bool {
        self.s == 0.0 || self.s < self.d as f64
    }

    pub fn is_field_regime(&self) -> bool {
        self.d >= 2 && self.s == self.d as f64 - 3.0
    }
}

/// One minimization problem: kernel, field strength `γ` in `V = γ|x|²`, and
/// the radius of the confining ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub params: RieszParams,
    pub gamma: f64,
    pub radius: f64,
}

impl ProblemSpec {
    pub fn new(params: RieszParams, gamma: f64, radius: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must be finite and >= 0"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radius = {radius} must be finite and > 0"
            )));
        }
        Ok(ProblemSpec { params, gamma, radius })
    }

    /// `s = d - 3`, field `γ|x|²`, ball of the critical radius.
    pub fn critical(d: u32, gamma: f64) -> Result<Self> {
        Self::new(RieszParams::field_regime(d)?, gamma, critical_radius(d, gamma)?)
    }

    /// External field `V(x) = γ|x|²` at `|x| = r`.
    pub fn field(&self, r: f64) -> f64 {
        self.gamma * r * r
    }
}

/// `K_s(dist)`: `sign(s) dist^{-s}`, or `-ln dist` for `s = 0`.
pub fn kernel(params: &RieszParams, dist: f64) -> Result<f64> {
    if !(dist > 0.0) {
        return Err(Error::domain("kernel", format!("distance {dist} must be positive")));
    }
    Ok(kernel_unchecked(params.s, dist))
}

pub(crate) fn kernel_unchecked(s: f64, dist: f64) -> f64 {
    if s == 0.0 {
        -dist.ln()
    } else {
        s.signum() * dist.powf(-s)
    }
}

/// `c_{d,s}` in `ΔK_s = -c_{d,s} K_{s+2}`, valid for `s < d - 2`.
pub fn laplacian_constant(params: &RieszParams) -> Result<f64> {
    let (d, s) = (params.d as f64, params.s);
    if s >= d - 2.0 {
        return Err(Error::domain(
            "laplacian_constant",
            format!("needs s < d - 2, got d = {d}, s = {s}"),
        ));
    }
    Ok(if s == 0.0 { d - 2.0 } else { s.abs() * (d - 2.0 - s) })
}

/// Area of the unit sphere in `R^d`, `2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParameter("sphere_area needs d >= 1".into()));
    }
    let half = 0.5 * d as f64;
    Ok(2.0 * PI.powf(half) / gamma_fn(half)?)
}

/// `τ(d) = Γ(d/2) / (Γ(1/2) Γ((d-1)/2))`, the reciprocal of `∫₀^π sin^{d-2}θ dθ`.
pub fn tau(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("tau needs d >= 2, got {d}")));
    }
    let df = d as f64;
    Ok(gamma_fn(0.5 * df)? / (PI.sqrt() * gamma_fn(0.5 * (df - 1.0))?))
}

fn check_field_dimension(function: &'static str, d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("{function} needs d >= 2, got {d}")));
    }
    Ok(())
}

/// Radius of the ball carrying the radial arcsine law as the equilibrium
/// measure for `s = d - 3` and `V = γ|x|²`:
///
/// ```text
/// R = ( max(|d-3|, 1) √π Γ((d+1)/2) / (4γ Γ((d+2)/2)) )^{1/(d-1)}
/// ```
pub fn critical_radius(d: u32, gamma: f64) -> Result<f64> {
    check_field_dimension("critical_radius", d)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be finite and > 0"
        )));
    }
    let df = d as f64;
    let c = (df - 3.0).abs().max(1.0);
    let base = c * PI.sqrt() * gamma_fn(0.5 * (df + 1.0))? / (4.0 * gamma * gamma_fn(0.5 * (df + 2.0))?);
    Ok(base.powf(1.0 / (df - 1.0)))
}

/// `W_R = W_1 / R^{d-1}` with `W_1 = √π Γ((d+1)/2) / Γ(d/2)`.
pub fn w_constant(d: u32, radius: f64) -> Result<f64> {
    check_field_dimension("w_constant", d)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius = {radius} must be finite and > 0"
        )));
    }
    let df = d as f64;
    let w1 = PI.sqrt() * gamma_fn(0.5 * (df + 1.0))? / gamma_fn(0.5 * df)?;
    Ok(w1 / radius.powf(df - 1.0))
}
