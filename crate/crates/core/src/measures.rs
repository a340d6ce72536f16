//! Rotationally invariant probability measures on balls, described by their
//! radial densities: `μ(dx) = ρ(|x|) d|x| × uniform direction`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{de_integrate_offsets, gauss_legendre_rule, Node, QuadSpec};
use crate::riesz::RieszParams;
use crate::specfun::gamma_fn;

/// Knots in the tabulated CDF used for inverse-CDF sampling.
pub const SAMPLER_KNOTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialMeasure {
    /// Equilibrium measure of the unit ball for `K_s`, `V = 0`, `d - 2 < s < d`:
    /// radial density `∝ r^{d-1} (1 - r²)^{-(d-s)/2}`.
    RieszEquilibrium { params: RieszParams },
    /// Radial arcsine law on the ball of radius `R`: `∝ r^{d-1} / sqrt(R² - r²)`.
    RadialArcsine { d: u32, radius: f64 },
    /// Uniform law on the ball of radius `R`: `∝ r^{d-1}`.
    UniformBall { d: u32, radius: f64 },
}

fn check_riesz_regime(function: &'static str, params: &RieszParams) -> Result<()> {
    let (d, s) = (params.d() as f64, params.s());
    if !(d - 2.0 < s && s < d) {
        return Err(Error::domain(
            function,
            format!("needs d - 2 < s < d, got d = {d}, s = {s}"),
        ));
    }
    Ok(())
}

fn check_ball(function: &'static str, d: u32, radius: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(function, format!("needs d >= 2, got {d}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(function, format!("radius {radius} must be positive")));
    }
    Ok(())
}

/// `2Γ((d+1)/2) / (√π Γ(d/2))`, the arcsine normalization at `R = 1`.
fn arcsine_constant(d: u32) -> Result<f64> {
    let df = d as f64;
    Ok(2.0 * gamma_fn(0.5 * (df + 1.0))? / (PI.sqrt() * gamma_fn(0.5 * df)?))
}

/// `2Γ(1+s/2) / (Γ(1+(s-d)/2) Γ(d/2))`.
fn riesz_constant(params: &RieszParams) -> Result<f64> {
    let (d, s) = (params.d() as f64, params.s());
    Ok(2.0 * gamma_fn(1.0 + 0.5 * s)? / (gamma_fn(1.0 + 0.5 * (s - d))? * gamma_fn(0.5 * d)?))
}

/// Radial density of the arcsine law on the ball of radius `R`:
/// `2Γ((d+1)/2)/(√π Γ(d/2) R^{d-1}) · r^{d-1}/sqrt(R² - r²)` on `[0, R)`,
/// zero outside, `+∞` at `r = R`.
pub fn arcsine_radial_density(d: u32, radius: f64, r: f64) -> Result<f64> {
    check_ball("arcsine_radial_density", d, radius)?;
    if !(0.0..=radius).contains(&r) {
        return Ok(0.0);
    }
    arcsine_density_gap(d, radius, r, radius - r)
}

/// Arcsine density with `gap = R - r` supplied by the caller.
fn arcsine_density_gap(d: u32, radius: f64, r: f64, gap: f64) -> Result<f64> {
    if gap == 0.0 {
        return Ok(f64::INFINITY);
    }
    let c = arcsine_constant(d)? / radius.powi(d as i32 - 1);
    Ok(c * r.powi(d as i32 - 1) / (gap * (radius + r)).sqrt())
}

/// Radial density of the Riesz equilibrium measure of the unit ball,
/// `2Γ(1+s/2)/(Γ(1+(s-d)/2)Γ(d/2)) · r^{d-1}/(1 - r²)^{(d-s)/2}` on `[0, 1)`.
pub fn riesz_radial_density(params: &RieszParams, r: f64) -> Result<f64> {
    check_riesz_regime("riesz_radial_density", params)?;
    if !(0.0..=1.0).contains(&r) {
        return Ok(0.0);
    }
    riesz_density_gap(params, r, 1.0 - r)
}

fn riesz_density_gap(params: &RieszParams, r: f64, gap: f64) -> Result<f64> {
    if gap == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (d, s) = (params.d(), params.s());
    let c = riesz_constant(params)?;
    Ok(c * r.powi(d as i32 - 1) * (gap * (1.0 + r)).powf(-0.5 * (d as f64 - s)))
}

/// `U^μ(x) = Γ(1+s/2)Γ((d-s)/2)/Γ(d/2)` on the unit ball for the Riesz
/// equilibrium measure.
pub fn riesz_potential_constant(params: &RieszParams) -> Result<f64> {
    check_riesz_regime("riesz_potential_constant", params)?;
    let (d, s) = (params.d() as f64, params.s());
    Ok(gamma_fn(1.0 + 0.5 * s)? * gamma_fn(0.5 * (d - s))? / gamma_fn(0.5 * d)?)
}

impl RadialMeasure {
    pub fn riesz_equilibrium(params: RieszParams) -> Result<Self> {
        check_riesz_regime("RadialMeasure::riesz_equilibrium", &params)?;
        Ok(RadialMeasure::RieszEquilibrium { params })
    }

    pub fn radial_arcsine(d: u32, radius: f64) -> Result<Self> {
        check_ball("RadialMeasure::radial_arcsine", d, radius)?;
        Ok(RadialMeasure::RadialArcsine { d, radius })
    }

    pub fn uniform_ball(d: u32, radius: f64) -> Result<Self> {
        check_ball("RadialMeasure::uniform_ball", d, radius)?;
        Ok(RadialMeasure::UniformBall { d, radius })
    }

    pub fn dimension(&self) -> u32 {
        match *self {
            RadialMeasure::RieszEquilibrium { params } => params.d(),
            RadialMeasure::RadialArcsine { d, .. } | RadialMeasure::UniformBall { d, .. } => d,
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            RadialMeasure::RieszEquilibrium { .. } => 1.0,
            RadialMeasure::RadialArcsine { radius, .. } | RadialMeasure::UniformBall { radius, .. } => radius,
        }
    }

    /// Radial density at `r`.
    pub fn density(&self, r: f64) -> f64 {
        let big_r = self.support_radius();
        if !(0.0..=big_r).contains(&r) {
            return 0.0;
        }
        self.density_gap(r, big_r - r)
    }

    /// Radial density at `r` given `gap = R - r` exactly.
    pub fn density_gap(&self, r: f64, gap: f64) -> f64 {
        let v = match *self {
            RadialMeasure::RieszEquilibrium { ref params } => riesz_density_gap(params, r, gap),
            RadialMeasure::RadialArcsine { d, radius } => arcsine_density_gap(d, radius, r, gap),
            RadialMeasure::UniformBall { d, radius } => {
                let df = d as f64;
                Ok(df * r.powi(d as i32 - 1) / radius.powi(d as i32))
            }
        };
        v.unwrap_or(f64::NAN)
    }

    /// `∫₀^{min(r, R)} ρ`, clamped to `[0, 1]`.
    pub fn cdf(&self, r: f64) -> f64 {
        let big_r = self.support_radius();
        if r <= 0.0 {
            return 0.0;
        }
        if r >= big_r {
            return 1.0;
        }
        let value = match *self {
            RadialMeasure::UniformBall { d, radius } => (r / radius).powi(d as i32),
            RadialMeasure::RadialArcsine { d, radius } => {
                // r = R sin u turns the arcsine law into ∝ sin^{d-1}u du
                let top = (r / radius).asin();
                let rule = gauss_legendre_rule(64);
                let half = 0.5 * top;
                let sum: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * (half * (1.0 + x)).sin().powi(d as i32 - 1))
                    .sum();
                arcsine_constant(d).unwrap_or(f64::NAN) * half * sum
            }
            RadialMeasure::RieszEquilibrium { .. } => {
                let gap = big_r - r;
                let f = |n: Node| self.density_gap(n.x, gap + n.right);
                de_integrate_offsets(&f, 0.0, r, &QuadSpec::double_exponential())
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
            }
        };
        value.clamp(0.0, 1.0)
    }

    /// Total mass by quadrature of the density over `[0, R]`.
    pub fn total_mass(&self, spec: &QuadSpec) -> Result<f64> {
        let big_r = self.support_radius();
        let f = |n: Node| self.density_gap(n.x, n.right);
        let q = de_integrate_offsets(&f, 0.0, big_r, spec)?;
        Ok(q.value)
    }
}

/// `measure.cdf(r)`.
pub fn radial_cdf(measure: &RadialMeasure, r: f64) -> f64 {
    measure.cdf(r)
}

/// Inverse-CDF sampler on a tabulated monotone cubic of the radial CDF.
///
/// Knots are uniform in `u` with `r = R sin u`, which spreads them densely
/// where the arcsine-type densities blow up.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    radius: f64,
    u: Vec<f64>,
    cdf: Vec<f64>,
    slope: Vec<f64>,
}

impl RadialSampler {
    pub fn new(measure: &RadialMeasure) -> Self {
        let radius = measure.support_radius();
        let n = SAMPLER_KNOTS;
        let u: Vec<f64> = (0..n).map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64).collect();
        let mut cdf: Vec<f64> = u.iter().map(|&uk| measure.cdf(radius * uk.sin())).collect();
        cdf[0] = 0.0;
        cdf[n - 1] = 1.0;
        for k in 1..n {
            if cdf[k] < cdf[k - 1] {
                cdf[k] = cdf[k - 1];
            }
        }
        let slope = fritsch_carlson(&u, &cdf);
        RadialSampler { radius, u, cdf, slope }
    }

    fn spline(&self, k: usize, t: f64) -> f64 {
        let h = self.u[k + 1] - self.u[k];
        let (y0, y1) = (self.cdf[k], self.cdf[k + 1]);
        let (m0, m1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// Radius with interpolated CDF equal to `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let n = self.u.len();
        let k = self.cdf.partition_point(|&c| c <= p).clamp(1, n - 1) - 1;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.spline(k, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let u = self.u[k] + t * (self.u[k + 1] - self.u[k]);
        (self.radius * u.sin()).clamp(0.0, self.radius)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.quantile(rng.random::<f64>())).collect()
    }
}

/// Monotone cubic Hermite slopes (Fritsch–Carlson).
fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[k - 1] + delta[k])
        };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// `n` independent radii drawn from `measure`, deterministic in `seed`.
pub fn sample_radial(measure: &RadialMeasure, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    Ok(RadialSampler::new(measure).sample(n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_spatial_constant_in_the_plane() {
        // spatial density C/sqrt(R² - |x|²) with C = ρ(r) sqrt(1 - r²) / (2π r)
        let r = 0.3;
        let rho = arcsine_radial_density(2, 1.0, r).unwrap();
        let c = rho * (1.0 - r * r).sqrt() / (2.0 * PI * r);
        assert!((c - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(arcsine_radial_density(3, 1.0, 1.5).unwrap(), 0.0);
        assert_eq!(arcsine_radial_density(3, 1.0, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn riesz_spatial_constant() {
        let p = RieszParams::new(2, 1.0).unwrap();
        let r = 0.4;
        let rho = riesz_radial_density(&p, r).unwrap();
        let c = rho * (1.0 - r * r).sqrt() / (2.0 * PI * r);
        assert!((c - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(riesz_radial_density(&RieszParams::new(3, 0.5).unwrap(), 0.2).is_err());
    }

    #[test]
    fn potential_constants() {
        let c = |d, s| riesz_potential_constant(&RieszParams::new(d, s).unwrap()).unwrap();
        assert!((c(2, 1.0) - PI / 2.0).abs() < 1e-15);
        assert!((c(3, 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_cdf_in_the_plane() {
        let m = RadialMeasure::radial_arcsine(2, 0.7).unwrap();
        for k in 0..=10 {
            let r = 0.07 * k as f64;
            let exact = 1.0 - (1.0 - (r / 0.7) * (r / 0.7)).max(0.0).sqrt();
            assert!((m.cdf(r) - exact).abs() < 1e-14, "r = {r}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = RadialMeasure::radial_arcsine(3, 0.57).unwrap();
        let s = RadialSampler::new(&m);
        for &p in &[0.0, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0] {
            let r = s.quantile(p);
            assert!((m.cdf(r) - p).abs() < 1e-6, "p = {p}");
        }
    }
}
