//! One-dimensional quadrature: Gauss–Legendre, an arcsine-weight rule,
//! tanh-sinh (double exponential), and the Funk–Hecke reduction of sphere
//! averages to an integral over `[-1, 1]`.
//!
//! Interior singularities are never detected automatically. Callers list
//! them in [`QuadSpec::split_at`] and the interval is cut there so that every
//! singular point sits at a panel endpoint.
//!
//! The double-exponential integrators hand the integrand a [`Node`] carrying
//! the distances to both panel ends, computed without cancellation. Integrands
//! with endpoint singularities such as `(1 - r)^{-1/2}` should build the
//! singular factor from those distances rather than from `x`, which rounds to
//! the endpoint long before the rule stops sampling.

mod de;
mod funk_hecke;
mod gauss;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use de::{de_integrate_offsets, de_panel, Node, QuadResult};
pub use funk_hecke::{funk_hecke_angular, funk_hecke_reduce, funk_hecke_theta};
pub use gauss::{gauss_legendre_integrate, gauss_legendre_rule, GaussRule};

/// Default absolute tolerance for adaptive rules.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default relative tolerance for adaptive rules.
pub const DEFAULT_REL_TOL: f64 = 1e-11;
/// Default node budget per panel for the double-exponential rule.
pub const DEFAULT_DE_POINTS: usize = 6145;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMethod {
    GaussLegendre,
    ArcsineWeighted,
    DoubleExponential,
}

/// Quadrature configuration.
///
/// `points` is the node count for the Gauss rules and the per-panel node
/// budget for the double-exponential rule. The adaptive rule stops once
/// `error <= abs_tol` or `error <= rel_tol * |value|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub method: QuadMethod,
    pub points: usize,
    pub split_at: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl QuadSpec {
    pub fn new(method: QuadMethod, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 2 points, got {points}"
            )));
        }
        Ok(QuadSpec {
            method,
            points,
            split_at: Vec::new(),
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
        })
    }

    pub fn gauss_legendre(points: usize) -> Result<Self> {
        Self::new(QuadMethod::GaussLegendre, points)
    }

    pub fn arcsine_weighted(points: usize) -> Result<Self> {
        Self::new(QuadMethod::ArcsineWeighted, points)
    }

    pub fn double_exponential() -> Self {
        QuadSpec {
            method: QuadMethod::DoubleExponential,
            points: DEFAULT_DE_POINTS,
            split_at: Vec::new(),
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn with_split(mut self, split_at: Vec<f64>) -> Result<Self> {
        if let Some(bad) = split_at.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("split point {bad} is not finite")));
        }
        self.split_at = split_at;
        Ok(self)
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0) || !(rel_tol >= 0.0) || (abs_tol == 0.0 && rel_tol == 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be non-negative and not both zero (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        Ok(self)
    }

    pub fn with_points(mut self, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 2 points, got {points}"
            )));
        }
        self.points = points;
        Ok(self)
    }

    /// Panel boundaries for `[a, b]`: `a`, the sorted split points, `b`.
    ///
    /// Split points that coincide with an endpoint are dropped; points outside
    /// the interval are rejected.
    pub fn panels(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
        }
        let mut cuts = Vec::with_capacity(self.split_at.len() + 2);
        cuts.push(a);
        let mut inner: Vec<f64> = Vec::with_capacity(self.split_at.len());
        for &p in &self.split_at {
            if p < a || p > b {
                return Err(Error::InvalidParameter(format!("split point {p} outside [{a}, {b}]")));
            }
            if p > a && p < b {
                inner.push(p);
            }
        }
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        cuts.extend(inner);
        cuts.push(b);
        Ok(cuts)
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self::double_exponential()
    }
}

/// Tanh-sinh integral of `f(x)` over `[a, b]`, split at `spec.split_at`.
///
/// Nodes that round onto a panel boundary are skipped. For integrable endpoint
/// singularities this limits accuracy to roughly the square root of machine
/// epsilon; use [`double_exponential_offsets`] when the singular factor can be
/// written in terms of the endpoint distances.
pub fn double_exponential_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    let cuts = spec.panels(a, b)?;
    double_exponential_offsets(
        |n: Node| {
            if n.left == 0.0 || n.right == 0.0 || cuts.contains(&n.x) {
                0.0
            } else {
                f(n.x)
            }
        },
        a,
        b,
        spec,
    )
}

/// Tanh-sinh integral where the integrand receives endpoint distances.
pub fn double_exponential_offsets(f: impl Fn(Node) -> f64, a: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    let r = de_integrate_offsets(&f, a, b, spec)?;
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence {
            what: "double-exponential quadrature",
            iterations: r.evaluations,
            estimate: r.error,
        })
    }
}

/// `∫₀¹ f(r, |λ - r|, 1 - r) dr` by tanh-sinh with the interval cut at
/// `r = λ ∈ [0, 1]`. Both distances are exact near the panel ends.
pub fn integrate_unit_split(f: impl Fn(f64, f64, f64) -> f64, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("split point {lambda} outside [0, 1]")));
    }
    let mut panel = spec.clone();
    panel.split_at.clear();
    let mut total = 0.0;
    if lambda > 0.0 {
        let below = |n: Node| f(n.x, n.right, (1.0 - lambda) + n.right);
        total += double_exponential_offsets(below, 0.0, lambda, &panel)?;
    }
    if lambda < 1.0 {
        let above = |n: Node| f(n.x, n.left, n.right);
        total += double_exponential_offsets(above, lambda, 1.0, &panel)?;
    }
    Ok(total)
}

/// `∫₀¹ f(r) / sqrt(1 - r²) dr` through `r = sin(u)`.
///
/// With `spec.method == DoubleExponential` the `u`-integral is adaptive;
/// otherwise a `spec.points`-point Gauss–Legendre rule is applied on each
/// panel. Split points are given in `r`.
pub fn arcsine_weighted_integrate(f: impl Fn(f64) -> f64, spec: &QuadSpec) -> Result<f64> {
    let mut u_spec = spec.clone();
    u_spec.split_at = spec
        .panels(0.0, 1.0)?
        .iter()
        .filter(|&&r| r > 0.0 && r < 1.0)
        .map(|&r| r.asin())
        .collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    match spec.method {
        QuadMethod::DoubleExponential => double_exponential_offsets(|n: Node| f(n.x.sin()), 0.0, half_pi, &u_spec),
        _ => gauss_legendre_integrate(|u| f(u.sin()), 0.0, half_pi, &u_spec),
    }
}

/// Dispatches on `spec.method` over `[a, b]`.
///
/// `ArcsineWeighted` here means: integrate `f(x) / sqrt((x - a)(b - x))`
/// through `x = c + h sin(u)`, a smooth integral in `u`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    match spec.method {
        QuadMethod::GaussLegendre => gauss_legendre_integrate(f, a, b, spec),
        QuadMethod::DoubleExponential => double_exponential_integrate(f, a, b, spec),
        QuadMethod::ArcsineWeighted => {
            if !(a < b) {
                return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
            }
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut u_spec = spec.clone();
            u_spec.split_at = spec
                .panels(a, b)?
                .iter()
                .filter(|&&x| x > a && x < b)
                .map(|&x| ((x - c) / h).clamp(-1.0, 1.0).asin())
                .collect();
            let half_pi = std::f64::consts::FRAC_PI_2;
            gauss_legendre_integrate(|u| f(c + h * u.sin()), -half_pi, half_pi, &u_spec)
        }
    }
}
