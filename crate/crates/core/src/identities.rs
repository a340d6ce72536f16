//! Integral identities satisfied by the equilibrium potentials, each checked by
//! evaluating both sides independently.
//!
//! Left sides are quadratures of the integrands as written; right sides are
//! the closed forms. A case passes when `abs_err <= abs_gate` or
//! `rel_err <= rel_gate`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::potentials::{ball_potential_integral, potential_of_density};
use crate::quadrature::{arcsine_weighted_integrate, double_exponential_offsets, integrate_unit_split, Node, QuadSpec};
use crate::riesz::{sphere_area, RieszParams};
use crate::specfun::{
    elliptic_e, elliptic_e_complement, elliptic_e_re_excess, elliptic_k_complement, elliptic_k_re_excess, gamma_fn,
    hyp2f1_complement, hyp_pfq, s_function_complement, SeriesControl,
};

/// Floor for the denominator of `rel_err`.
pub const REL_ERR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "riesz_formula")]
    RieszFormula,
    #[serde(rename = "co_riesz")]
    CoRiesz,
    #[serde(rename = "formula_sin")]
    FormulaSin,
    #[serde(rename = "formula_sinF")]
    FormulaSinF,
    #[serde(rename = "more_log")]
    MoreLog,
    #[serde(rename = "more_log_prime")]
    MoreLogPrime,
    #[serde(rename = "more_E")]
    MoreE,
    #[serde(rename = "more_K")]
    MoreK,
    #[serde(rename = "more_E2")]
    MoreE2,
    #[serde(rename = "more_K2")]
    MoreK2,
    #[serde(rename = "combo_EK")]
    ComboEK,
    #[serde(rename = "combo_EK2")]
    ComboEK2,
    #[serde(rename = "trig_id")]
    TrigId,
    #[serde(rename = "f32_log2")]
    F32Log2,
    #[serde(rename = "f32_log2_prime")]
    F32Log2Prime,
}

impl IdentityId {
    pub const ALL: [IdentityId; 15] = [
        IdentityId::RieszFormula,
        IdentityId::CoRiesz,
        IdentityId::FormulaSin,
        IdentityId::FormulaSinF,
        IdentityId::MoreLog,
        IdentityId::MoreLogPrime,
        IdentityId::MoreE,
        IdentityId::MoreK,
        IdentityId::MoreE2,
        IdentityId::MoreK2,
        IdentityId::ComboEK,
        IdentityId::ComboEK2,
        IdentityId::TrigId,
        IdentityId::F32Log2,
        IdentityId::F32Log2Prime,
    ];

    /// The six single-integral formulas in `λ` with weight `r/√(1-r²)`.
    pub const MORE: [IdentityId; 6] = [
        IdentityId::MoreLog,
        IdentityId::MoreLogPrime,
        IdentityId::MoreE,
        IdentityId::MoreK,
        IdentityId::MoreE2,
        IdentityId::MoreK2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::RieszFormula => "riesz_formula",
            IdentityId::CoRiesz => "co_riesz",
            IdentityId::FormulaSin => "formula_sin",
            IdentityId::FormulaSinF => "formula_sinF",
            IdentityId::MoreLog => "more_log",
            IdentityId::MoreLogPrime => "more_log_prime",
            IdentityId::MoreE => "more_E",
            IdentityId::MoreK => "more_K",
            IdentityId::MoreE2 => "more_E2",
            IdentityId::MoreK2 => "more_K2",
            IdentityId::ComboEK => "combo_EK",
            IdentityId::ComboEK2 => "combo_EK2",
            IdentityId::TrigId => "trig_id",
            IdentityId::F32Log2 => "f32_log2",
            IdentityId::F32Log2Prime => "f32_log2_prime",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| {
            let valid: Vec<&str> = IdentityId::ALL.iter().map(|id| id.as_str()).collect();
            Error::InvalidParameter(format!("unknown identity '{s}'; valid tags: {}", valid.join(", ")))
        })
    }
}

/// Parameters of one case; absent fields do not apply to the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl IdentityParams {
    fn d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }

    fn s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }
}

/// Pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    pub abs: f64,
    pub rel: f64,
}

impl Gates {
    pub const DEFAULT: Gates = Gates { abs: 1e-7, rel: 1e-9 };
    /// Cases at `λ ∈ {0, 1}`, where the integrands are most singular.
    pub const ENDPOINT: Gates = Gates { abs: 1e-6, rel: 1e-9 };

    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0) || !(rel >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gates must be non-negative, got abs {abs}, rel {rel}"
            )));
        }
        Ok(Gates { abs, rel })
    }

    pub fn for_lambda(lambda: Option<f64>) -> Self {
        match lambda {
            Some(l) if l == 0.0 || l == 1.0 => Gates::ENDPOINT,
            _ => Gates::DEFAULT,
        }
    }

    pub fn admits(&self, abs_err: f64, rel_err: f64) -> bool {
        abs_err <= self.abs || rel_err <= self.rel
    }
}

impl Default for Gates {
    fn default() -> Self {
        Gates::DEFAULT
    }
}

/// Both sides of one identity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    #[serde(rename = "id")]
    pub identity_id: IdentityId,
    pub params: IdentityParams,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl IdentityCase {
    pub fn new(identity_id: IdentityId, params: IdentityParams, lhs: f64, rhs: f64, gates: &Gates) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = abs_err / rhs.abs().max(REL_ERR_FLOOR);
        IdentityCase {
            identity_id,
            params,
            lhs,
            rhs,
            abs_err,
            rel_err,
            passed: gates.admits(abs_err, rel_err),
            diagnostic: None,
        }
    }

    /// A case whose evaluation failed; recorded as not passed.
    pub fn failed(identity_id: IdentityId, params: IdentityParams, err: &Error) -> Self {
        IdentityCase {
            identity_id,
            params,
            lhs: f64::NAN,
            rhs: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            passed: false,
            diagnostic: Some(err.to_string()),
        }
    }

    /// Re-evaluates `passed` against other gates.
    pub fn regate(&mut self, gates: &Gates) {
        self.passed = self.diagnostic.is_none() && gates.admits(self.abs_err, self.rel_err);
    }
}

fn settle(id: IdentityId, params: IdentityParams, lhs: Result<f64>, rhs: Result<f64>, gates: &Gates) -> IdentityCase {
    match lhs.and_then(|l| rhs.map(|r| (l, r))) {
        Ok((l, r)) if l.is_finite() && r.is_finite() => IdentityCase::new(id, params, l, r, gates),
        Ok((l, r)) => {
            let mut case = IdentityCase::new(id, params, l, r, gates);
            case.passed = false;
            case.diagnostic = Some("non-finite side".into());
            case
        }
        Err(e) => IdentityCase::failed(id, params, &e),
    }
}

/// Evaluates identities with a given quadrature configuration and optional
/// gate override.
#[derive(Debug, Clone, PartialEq)]
pub struct Verifier {
    pub quad: QuadSpec,
    pub gates: Option<Gates>,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            quad: QuadSpec {
                abs_tol: 1e-13,
                rel_tol: 1e-12,
                ..QuadSpec::double_exponential()
            },
            gates: None,
        }
    }
}

fn weight(r: f64, gap_one: f64) -> f64 {
    r / (gap_one * (1.0 + r)).sqrt()
}

/// `4λr/(λ+r)²` and its complement `((λ-r)/(λ+r))²`.
fn landen(lambda: f64, r: f64, gap: f64) -> (f64, f64) {
    let sum = lambda + r;
    let z = ((4.0 * lambda / sum) * (r / sum)).min(1.0);
    let t = gap / sum;
    (z, (t * t).min(1.0))
}

fn check_lambda_closed(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain("identities", format!("lambda = {lambda} outside [0, 1]")));
    }
    Ok(())
}

impl Verifier {
    fn gates(&self, lambda: Option<f64>) -> Gates {
        self.gates.unwrap_or_else(|| Gates::for_lambda(lambda))
    }

    /// `∫_{|y|<=1} |x-y|^{-s} (1-|y|²)^{-(d-s)/2} dy = π^{d/2+1} / (Γ(d/2) sin(π(d-s)/2))`
    /// for `d - 2 < s < d`, `s >= 0`, `|x| < 1`. The left side is a nested
    /// quadrature: Funk–Hecke sphere average, then the radial integral.
    pub fn riesz_formula(&self, d: u32, s: f64, x_norm: f64) -> Result<IdentityCase> {
        let params = IdentityParams {
            x_norm: Some(x_norm),
            ..IdentityParams::default().d(d as f64).s(s)
        };
        let df = d as f64;
        if d < 2 || !(s >= 0.0 && df - 2.0 < s && s < df) {
            return Err(Error::domain(
                "riesz_formula",
                format!("needs d >= 2, max(0, d-2) < s < d; got d = {d}, s = {s}"),
            ));
        }
        if !(0.0..1.0).contains(&x_norm) {
            return Err(Error::domain("riesz_formula", format!("|x| = {x_norm} outside [0, 1)")));
        }
        let exponent = -0.5 * (df - s);
        let dm1 = d as i32 - 1;
        let lhs = potential_of_density(
            |r, gap| r.powi(dm1) * (gap * (1.0 + r)).powf(exponent),
            d,
            s,
            x_norm,
            1.0,
            &self.quad,
        )
        .and_then(|v| Ok(sphere_area(d)? * v));
        let rhs = gamma_fn(0.5 * df).map(|g| PI.powf(0.5 * df + 1.0) / (g * (0.5 * PI * (df - s)).sin()));
        Ok(settle(IdentityId::RieszFormula, params, lhs, rhs, &self.gates(None)))
    }

    /// `∫₀¹ ₂F₁(s/4, (s+2)/4; d/2; 4r²λ²/(λ²+r²)²) r^{d-1} / ((λ²+r²)^{s/2} (1-r²)^{(d-s)/2}) dr = π / (2 sin(π(d-s)/2))`.
    ///
    /// For `(d, s) = (2, 1), (3, 2), (5, 4)` the `₂F₁` is evaluated through its
    /// elementary or elliptic closed form.
    pub fn co_riesz(&self, d: u32, s: f64, lambda: f64) -> Result<IdentityCase> {
        let params = IdentityParams::default().d(d as f64).s(s).lambda(lambda);
        let df = d as f64;
        if d < 2 || !(df - 2.0 < s && s < df) {
            return Err(Error::domain(
                "co_riesz",
                format!("needs d - 2 < s < d, got d = {d}, s = {s}"),
            ));
        }
        check_lambda_closed(lambda)?;
        let riesz = RieszParams::new(d, s)?;
        let ctrl = SeriesControl::default();
        let (a, b, c) = (0.25 * s, 0.25 * (s + 2.0), 0.5 * df);
        let series = |z: f64, omz: f64| hyp2f1_complement(a, b, c, z, omz, &ctrl).unwrap_or(f64::NAN);
        // artanh(√z) = ½ log((1+√z)² / (1-z))
        let artanh_sqrt = |z: f64, omz: f64| z.sqrt().ln_1p() - 0.5 * omz.ln();
        let lhs = if d == 2 && s == 1.0 {
            let hyp = |z: f64, omz: f64| {
                let q = z.sqrt();
                let mc = omz / ((1.0 + q) * (1.0 + q));
                2.0 * elliptic_k_complement(mc).unwrap_or(f64::NAN) / (PI * (1.0 + q).sqrt())
            };
            ball_potential_integral(&riesz, lambda, hyp, &self.quad)
        } else if d == 3 && s == 2.0 {
            let hyp = |z: f64, omz: f64| if z == 0.0 { 1.0 } else { artanh_sqrt(z, omz) / z.sqrt() };
            ball_potential_integral(&riesz, lambda, hyp, &self.quad)
        } else if d == 5 && s == 4.0 {
            let hyp = |z: f64, omz: f64| {
                if z < 0.25 {
                    series(z, omz)
                } else {
                    3.0 * (z.sqrt() * artanh_sqrt(z, omz) - z) / (z * z)
                }
            };
            ball_potential_integral(&riesz, lambda, hyp, &self.quad)
        } else {
            ball_potential_integral(&riesz, lambda, series, &self.quad)
        };
        let rhs = PI / (2.0 * (0.5 * PI * (df - s)).sin());
        Ok(settle(
            IdentityId::CoRiesz,
            params,
            lhs,
            Ok(rhs),
            &self.gates(Some(lambda)),
        ))
    }

    /// `∫₀¹ S_{d-3}(4λr/(λ+r)²) (λ+r)^{3-d} r^{d-1} / √(1-r²) dr
    ///  = π^{3/2} Γ((d-1)/2) / (2^{d+1} Γ(d/2)) · ((3/d - 1)λ² + 1)`.
    ///
    /// `d` may be real (`d >= 2`); integer `d` is the proven case.
    pub fn formula_sin(&self, d: f64, lambda: f64) -> Result<IdentityCase> {
        self.formula_sin_form(IdentityId::FormulaSin, d, lambda)
    }

    /// The same identity with `₂F₁((d-1)/2, (d-3)/2; d-1; ·)` in place of
    /// `S_{d-3}` and right side `(π/4)((3/d - 1)λ² + 1)`.
    pub fn formula_sin_f(&self, d: f64, lambda: f64) -> Result<IdentityCase> {
        self.formula_sin_form(IdentityId::FormulaSinF, d, lambda)
    }

    fn formula_sin_form(&self, id: IdentityId, d: f64, lambda: f64) -> Result<IdentityCase> {
        let params = IdentityParams::default().d(d).lambda(lambda);
        if !(d >= 2.0) || !d.is_finite() {
            return Err(Error::domain(id.as_str(), format!("needs d >= 2, got {d}")));
        }
        check_lambda_closed(lambda)?;
        let ctrl = SeriesControl::default();
        let factor = |r: f64| -> f64 {
            let (z, omz) = landen(lambda, r, (lambda - r).abs());
            let special = match id {
                IdentityId::FormulaSin if d == 2.0 => elliptic_e(z),
                IdentityId::FormulaSin => s_function_complement(d - 3.0, z, omz, &ctrl),
                _ => hyp2f1_complement(0.5 * (d - 1.0), 0.5 * (d - 3.0), d - 1.0, z, omz, &ctrl),
            };
            // (λ+r)^{3-d} r^{d-1} = r² (r/(λ+r))^{d-3}
            special.unwrap_or(f64::NAN) * r * r * (r / (lambda + r)).powf(d - 3.0)
        };
        let spec = self.quad.clone().with_split(vec![lambda])?;
        let lhs = arcsine_weighted_integrate(factor, &spec);
        let shape = (3.0 / d - 1.0) * lambda * lambda + 1.0;
        let rhs = match id {
            IdentityId::FormulaSin => gamma_fn(0.5 * (d - 1.0))
                .and_then(|g1| Ok(PI.powf(1.5) * g1 / (2f64.powf(d + 1.0) * gamma_fn(0.5 * d)?) * shape)),
            _ => Ok(0.25 * PI * shape),
        };
        Ok(settle(id, params, lhs, rhs, &self.gates(Some(lambda))))
    }

    /// One of the six formulas with weight `r/√(1-r²)` on `[0, 1]`:
    ///
    /// ```text
    /// more_log        ∫ ((λ+r)² log(λ+r) - (λ-r)² log|λ-r|)   = π(λ³/3 + (1 - log 2)λ)
    /// more_log_prime  ∫ ((λ+r) log(λ+r) - (λ-r) log|λ-r|)     = (π/2)(λ² + 1/2 - log 2)
    /// more_E          ∫ E(4λr/(λ+r)²) (λ+r)                  = (π²/8)(λ²/2 + 1)
    /// more_K          ∫ K(4λr/(λ+r)²) (λ-r)                  = (π²/8)(3λ²/2 - 1)
    /// more_E2         Re ∫ E(r²/λ²)                          = (π²/8) λ
    /// more_K2         Re ∫ K(r²/λ²) (λ² - r²)                = (π²/8)(3λ³/2 - λ)
    /// ```
    ///
    /// For `more_E2` and `more_K2` at `λ = 0` the integrand is taken as its
    /// pointwise limit 0, since `Re E(m)` and `Re K(m)` vanish like `m^{-1/2}`.
    pub fn more(&self, which: IdentityId, lambda: f64) -> Result<IdentityCase> {
        if !IdentityId::MORE.contains(&which) {
            return Err(Error::InvalidParameter(format!(
                "{which} is not a single-integral formula"
            )));
        }
        check_lambda_closed(lambda)?;
        let params = IdentityParams::default().lambda(lambda);
        let l = lambda;
        // |λ - r| log|λ - r| and its square version, with 0 at the split
        let xlogx = |x: f64, p: i32| if x > 0.0 { x.powi(p) * x.ln() } else { 0.0 };
        let signed = |r: f64, gap: f64| if r < l { gap } else { -gap };
        let integrand = |r: f64, gap: f64, gap_one: f64| -> f64 {
            let w = weight(r, gap_one);
            match which {
                IdentityId::MoreLog => (xlogx(l + r, 2) - xlogx(gap, 2)) * w,
                IdentityId::MoreLogPrime => {
                    let minus = if gap > 0.0 { signed(r, gap) * gap.ln() } else { 0.0 };
                    (xlogx(l + r, 1) - minus) * w
                }
                IdentityId::MoreE => {
                    let (_, omz) = landen(l, r, gap);
                    elliptic_e_complement(omz).unwrap_or(f64::NAN) * (l + r) * w
                }
                IdentityId::MoreK => {
                    let (_, omz) = landen(l, r, gap);
                    elliptic_k_complement(omz).unwrap_or(f64::NAN) * signed(r, gap) * w
                }
                IdentityId::MoreE2 => {
                    if l == 0.0 {
                        return 0.0;
                    }
                    elliptic_re(false, l, r, gap) * w
                }
                IdentityId::MoreK2 => {
                    if l == 0.0 {
                        return 0.0;
                    }
                    elliptic_re(true, l, r, gap) * signed(r, gap) * (l + r) * w
                }
                _ => f64::NAN,
            }
        };
        let lhs = integrate_unit_split(integrand, lambda, &self.quad);
        let pi2_8 = PI * PI / 8.0;
        let rhs = match which {
            IdentityId::MoreLog => PI * (l * l * l / 3.0 + (1.0 - 2f64.ln()) * l),
            IdentityId::MoreLogPrime => 0.5 * PI * (l * l + 0.5 - 2f64.ln()),
            IdentityId::MoreE => pi2_8 * (0.5 * l * l + 1.0),
            IdentityId::MoreK => pi2_8 * (1.5 * l * l - 1.0),
            IdentityId::MoreE2 => pi2_8 * l,
            _ => pi2_8 * (1.5 * l * l * l - l),
        };
        Ok(settle(which, params, lhs, Ok(rhs), &self.gates(Some(lambda))))
    }

    /// The two combinations obtained from the derivative of the planar
    /// potential, for `λ ∈ (0, 1]`:
    ///
    /// ```text
    /// combo_EK    ∫ [(λ+r) E + (λ-r) K](4λr/(λ+r)²) r/√(1-r²) dr          = (π²/4) λ²
    /// combo_EK2   λ Re ∫ [2E(r²/λ²) - (1 - r²/λ²) K(r²/λ²)] r/√(1-r²) dr = (π²/8)(λ²/2 + 1)
    /// ```
    pub fn combo(&self, which: IdentityId, lambda: f64) -> Result<IdentityCase> {
        if which != IdentityId::ComboEK && which != IdentityId::ComboEK2 {
            return Err(Error::InvalidParameter(format!("{which} is not a combination formula")));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::domain(
                which.as_str(),
                format!("lambda = {lambda} outside (0, 1]"),
            ));
        }
        let params = IdentityParams::default().lambda(lambda);
        let l = lambda;
        let integrand = |r: f64, gap: f64, gap_one: f64| -> f64 {
            let w = weight(r, gap_one);
            let signed = if r < l { gap } else { -gap };
            if which == IdentityId::ComboEK {
                let (_, omz) = landen(l, r, gap);
                let e = elliptic_e_complement(omz).unwrap_or(f64::NAN);
                let k = elliptic_k_complement(omz).unwrap_or(f64::NAN);
                ((l + r) * e + signed * k) * w
            } else {
                let e = elliptic_re(false, l, r, gap);
                let k = elliptic_re(true, l, r, gap);
                let one_minus_m = signed * (l + r) / (l * l);
                (2.0 * e - one_minus_m * k) * w
            }
        };
        let lhs = integrate_unit_split(integrand, lambda, &self.quad);
        let (lhs, rhs) = if which == IdentityId::ComboEK {
            (lhs, 0.25 * PI * PI * l * l)
        } else {
            (lhs.map(|v| l * v), PI * PI / 8.0 * (0.5 * l * l + 1.0))
        };
        Ok(settle(which, params, lhs, Ok(rhs), &self.gates(Some(lambda))))
    }

    /// `∫₀^π sin^{d-2}θ / (ρ² - 2ρ cos θ + 1)^{d/2} dθ = ρ^{2-d}/(ρ² - 1) · √π Γ((d-1)/2) / Γ(d/2)`
    /// for `ρ > 1`.
    pub fn trig_identity(&self, d: u32, rho: f64) -> Result<IdentityCase> {
        let params = IdentityParams {
            rho: Some(rho),
            ..IdentityParams::default().d(d as f64)
        };
        if d < 2 {
            return Err(Error::domain("trig_id", format!("needs d >= 2, got {d}")));
        }
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::domain("trig_id", format!("needs rho > 1, got {rho}")));
        }
        let df = d as f64;
        let power = d as i32 - 2;
        let f = |n: Node| {
            let (half_sin, sin_theta) = if n.left <= n.right {
                ((0.5 * n.left).sin(), n.left.sin())
            } else {
                ((0.5 * n.right).cos(), n.right.sin())
            };
            // ρ² - 2ρ cos θ + 1 = (ρ - 1)² + 4ρ sin²(θ/2)
            let q = (rho - 1.0) * (rho - 1.0) + 4.0 * rho * half_sin * half_sin;
            sin_theta.powi(power) * q.powf(-0.5 * df)
        };
        let lhs = double_exponential_offsets(f, 0.0, PI, &self.quad);
        let rhs = gamma_fn(0.5 * (df - 1.0))
            .and_then(|g| Ok(rho.powf(2.0 - df) / ((rho - 1.0) * (rho + 1.0)) * PI.sqrt() * g / gamma_fn(0.5 * df)?));
        Ok(settle(IdentityId::TrigId, params, lhs, rhs, &self.gates(None)))
    }

    /// `∫₀¹ (λ+r)^p log(λ+r) r/√(1-r²) dr` for `p = 2` (`f32_log2`) or `p = 1`
    /// (`f32_log2_prime`) against its `₃F₂` form in `1/λ²`. Needs `λ > 1`.
    pub fn f32_form(&self, which: IdentityId, lambda: f64) -> Result<IdentityCase> {
        let p = match which {
            IdentityId::F32Log2 => 2,
            IdentityId::F32Log2Prime => 1,
            _ => return Err(Error::InvalidParameter(format!("{which} is not a 3F2 form"))),
        };
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::domain(
                which.as_str(),
                format!("needs lambda > 1 so that 1/lambda² lies inside the unit disc, got {lambda}"),
            ));
        }
        let params = IdentityParams::default().lambda(lambda);
        let l = lambda;
        let lhs = arcsine_weighted_integrate(|r| (l + r).powi(p) * (l + r).ln() * r, &self.quad);
        let ctrl = SeriesControl::default();
        let z = 1.0 / (l * l);
        let rhs = if p == 2 {
            (|| -> Result<f64> {
                let f1 = hyp_pfq(&[0.5, 1.0, 1.0], &[2.0, 3.0], z, &ctrl)?;
                let f2 = hyp_pfq(&[1.0, 1.0, 1.5], &[2.5, 3.5], z, &ctrl)?;
                Ok(PI * f1 / (16.0 * l) - 2.0 * f2 / (45.0 * l * l)
                    + PI * l / 4.0
                    + (3.0 * l * (2.0 * l + PI) + 4.0) / 6.0 * l.ln()
                    + 1.0)
            })()
        } else {
            (|| -> Result<f64> {
                let f1 = hyp_pfq(&[0.5, 1.0, 1.0], &[1.5, 2.5], z, &ctrl)?;
                let f2 = hyp_pfq(&[1.0, 1.0, 1.5], &[2.0, 3.0], z, &ctrl)?;
                Ok((32.0 * l * f1 - 3.0 * PI * f2 + 24.0 * l * l * ((4.0 * l + PI) * l.ln() + PI)) / (96.0 * l * l))
            })()
        };
        Ok(settle(which, params, lhs, rhs, &self.gates(None)))
    }
}

/// `Re E(r²/λ²)` or `Re K(r²/λ²)` from the exact distance `|λ - r|`.
fn elliptic_re(k: bool, lambda: f64, r: f64, gap: f64) -> f64 {
    let off = gap * (lambda + r) / (lambda * lambda);
    let v = if r < lambda {
        if k {
            elliptic_k_complement(off.min(1.0))
        } else {
            elliptic_e_complement(off.min(1.0))
        }
    } else if k {
        elliptic_k_re_excess(off)
    } else {
        elliptic_e_re_excess(off)
    };
    v.unwrap_or(f64::NAN)
}

/// [`Verifier::riesz_formula`] with default settings.
pub fn verify_riesz_formula(d: u32, s: f64, x_norm: f64) -> Result<IdentityCase> {
    Verifier::default().riesz_formula(d, s, x_norm)
}

/// [`Verifier::co_riesz`] with default settings.
pub fn verify_co_riesz(d: u32, s: f64, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().co_riesz(d, s, lambda)
}

/// [`Verifier::formula_sin`] with default settings.
pub fn verify_formula_sin(d: f64, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().formula_sin(d, lambda)
}

/// [`Verifier::formula_sin_f`] with default settings.
pub fn verify_formula_sin_f(d: f64, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().formula_sin_f(d, lambda)
}

/// [`Verifier::more`] with default settings.
pub fn verify_more(which: IdentityId, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().more(which, lambda)
}

/// [`Verifier::combo`] with default settings.
pub fn verify_combo(which: IdentityId, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().combo(which, lambda)
}

/// [`Verifier::trig_identity`] with default settings.
pub fn verify_trig_identity(d: u32, rho: f64) -> Result<IdentityCase> {
    Verifier::default().trig_identity(d, rho)
}

/// [`Verifier::f32_form`] with default settings.
pub fn verify_3f2_forms(which: IdentityId, lambda: f64) -> Result<IdentityCase> {
    Verifier::default().f32_form(which, lambda)
}

/// Parameter grids for [`run_suite`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteGrid {
    /// `(d, s)` pairs for `riesz_formula` and `co_riesz`.
    pub riesz_pairs: Vec<(u32, f64)>,
    /// `|x|` values for `riesz_formula`.
    pub x_norms: Vec<f64>,
    /// `λ ∈ [0, 1]` for `co_riesz`, the sine formulas and the six single
    /// integrals; the combinations use the positive entries.
    pub lambdas: Vec<f64>,
    /// Dimensions for the sine formulas (real values allowed).
    pub sin_dims: Vec<f64>,
    /// Dimensions for `trig_id`.
    pub trig_dims: Vec<u32>,
    pub rhos: Vec<f64>,
    /// `λ > 1` for the `₃F₂` forms.
    pub log_lambdas: Vec<f64>,
}

fn unit_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridProfile {
    Smoke,
    Standard,
    Exhaustive,
    /// Sine formulas at non-integer dimensions, where the identities are
    /// conjectural.
    RealDimension,
    Custom(SuiteGrid),
}

impl GridProfile {
    pub fn grid(&self) -> SuiteGrid {
        match self {
            GridProfile::Smoke => SuiteGrid {
                riesz_pairs: vec![(2, 1.0), (3, 2.0), (4, 2.7), (5, 4.0)],
                x_norms: vec![0.0, 0.5],
                lambdas: vec![0.0, 0.5, 1.0],
                sin_dims: vec![2.0, 4.0, 5.0],
                trig_dims: vec![2, 3, 5],
                rhos: vec![1.1, 2.0],
                log_lambdas: vec![2.0, 10.0],
            },
            GridProfile::Standard => SuiteGrid {
                riesz_pairs: vec![
                    (2, 0.5),
                    (2, 1.0),
                    (2, 1.5),
                    (3, 1.5),
                    (3, 2.0),
                    (3, 2.5),
                    (4, 2.5),
                    (4, 3.0),
                    (5, 3.4),
                    (5, 4.0),
                ],
                x_norms: vec![0.0, 0.3, 0.7, 0.95],
                lambdas: unit_grid(20),
                sin_dims: (2..=8).map(f64::from).collect(),
                trig_dims: (2..=8).collect(),
                rhos: vec![1.1, 1.5, 2.0, 5.0, 10.0],
                log_lambdas: vec![1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0],
            },
            GridProfile::Exhaustive => SuiteGrid {
                riesz_pairs: vec![
                    (2, 0.25),
                    (2, 0.5),
                    (2, 1.0),
                    (2, 1.5),
                    (2, 1.75),
                    (3, 1.25),
                    (3, 1.5),
                    (3, 2.0),
                    (3, 2.5),
                    (3, 2.75),
                    (4, 2.25),
                    (4, 2.5),
                    (4, 2.7),
                    (4, 3.0),
                    (4, 3.5),
                    (5, 3.4),
                    (5, 4.0),
                    (6, 4.5),
                    (6, 5.0),
                    (7, 5.5),
                ],
                x_norms: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99],
                lambdas: unit_grid(40),
                sin_dims: (2..=12).map(f64::from).collect(),
                trig_dims: (2..=12).collect(),
                rhos: vec![1.01, 1.05, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0],
                log_lambdas: vec![1.02, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0],
            },
            GridProfile::RealDimension => SuiteGrid {
                lambdas: unit_grid(4),
                sin_dims: vec![2.25, 2.5, 3.5, 4.75, 6.5],
                ..SuiteGrid::default()
            },
            GridProfile::Custom(grid) => grid.clone(),
        }
    }
}

impl FromStr for GridProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(GridProfile::Smoke),
            "standard" => Ok(GridProfile::Standard),
            "exhaustive" => Ok(GridProfile::Exhaustive),
            "real_dimension" => Ok(GridProfile::RealDimension),
            other => Err(Error::InvalidParameter(format!(
                "unknown profile '{other}'; valid: smoke, standard, exhaustive, real_dimension"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Riesz(u32, f64, f64),
    CoRiesz(u32, f64, f64),
    Sin(IdentityId, f64, f64),
    More(IdentityId, f64),
    Combo(IdentityId, f64),
    Trig(u32, f64),
    F32(IdentityId, f64),
}

impl Job {
    fn id(self) -> IdentityId {
        match self {
            Job::Riesz(..) => IdentityId::RieszFormula,
            Job::CoRiesz(..) => IdentityId::CoRiesz,
            Job::Sin(id, ..) | Job::More(id, _) | Job::Combo(id, _) | Job::F32(id, _) => id,
            Job::Trig(..) => IdentityId::TrigId,
        }
    }

    fn params(self) -> IdentityParams {
        let p = IdentityParams::default();
        match self {
            Job::Riesz(d, s, x) => IdentityParams {
                x_norm: Some(x),
                ..p.d(d as f64).s(s)
            },
            Job::CoRiesz(d, s, l) => p.d(d as f64).s(s).lambda(l),
            Job::Sin(_, d, l) => p.d(d).lambda(l),
            Job::More(_, l) | Job::Combo(_, l) | Job::F32(_, l) => p.lambda(l),
            Job::Trig(d, rho) => IdentityParams {
                rho: Some(rho),
                ..p.d(d as f64)
            },
        }
    }

    fn run(self, v: &Verifier) -> IdentityCase {
        let result = match self {
            Job::Riesz(d, s, x) => v.riesz_formula(d, s, x),
            Job::CoRiesz(d, s, l) => v.co_riesz(d, s, l),
            Job::Sin(IdentityId::FormulaSin, d, l) => v.formula_sin(d, l),
            Job::Sin(_, d, l) => v.formula_sin_f(d, l),
            Job::More(id, l) => v.more(id, l),
            Job::Combo(id, l) => v.combo(id, l),
            Job::Trig(d, rho) => v.trig_identity(d, rho),
            Job::F32(id, l) => v.f32_form(id, l),
        };
        result.unwrap_or_else(|e| IdentityCase::failed(self.id(), self.params(), &e))
    }
}

fn jobs(grid: &SuiteGrid) -> Vec<Job> {
    let mut out = Vec::new();
    for &(d, s) in &grid.riesz_pairs {
        // the Riesz formula needs s >= 0; the ball integral only d - 2 < s < d
        if s >= 0.0 {
            out.extend(grid.x_norms.iter().map(|&x| Job::Riesz(d, s, x)));
        }
    }
    for &(d, s) in &grid.riesz_pairs {
        out.extend(grid.lambdas.iter().map(|&l| Job::CoRiesz(d, s, l)));
    }
    for id in [IdentityId::FormulaSin, IdentityId::FormulaSinF] {
        for &d in &grid.sin_dims {
            out.extend(grid.lambdas.iter().map(|&l| Job::Sin(id, d, l)));
        }
    }
    for id in IdentityId::MORE {
        out.extend(grid.lambdas.iter().map(|&l| Job::More(id, l)));
    }
    for id in [IdentityId::ComboEK, IdentityId::ComboEK2] {
        out.extend(grid.lambdas.iter().filter(|&&l| l > 0.0).map(|&l| Job::Combo(id, l)));
    }
    for &d in &grid.trig_dims {
        out.extend(grid.rhos.iter().map(|&rho| Job::Trig(d, rho)));
    }
    for id in [IdentityId::F32Log2, IdentityId::F32Log2Prime] {
        out.extend(grid.log_lambdas.iter().map(|&l| Job::F32(id, l)));
    }
    out
}

/// Pass and fail counts for one identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
}

/// Cases in grid order with per-identity counts and worst cases.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub cases: Vec<IdentityCase>,
    pub summary: BTreeMap<IdentityId, Tally>,
    /// The case with the largest `abs_err` per identity (failed evaluations first).
    pub worst: BTreeMap<IdentityId, IdentityCase>,
}

impl IdentityReport {
    pub fn from_cases(cases: Vec<IdentityCase>) -> Self {
        let mut summary: BTreeMap<IdentityId, Tally> = BTreeMap::new();
        let mut worst: BTreeMap<IdentityId, IdentityCase> = BTreeMap::new();
        for case in &cases {
            let tally = summary.entry(case.identity_id).or_default();
            if case.passed {
                tally.passed += 1;
            } else {
                tally.failed += 1;
            }
            let badness = |c: &IdentityCase| if c.abs_err.is_nan() { f64::INFINITY } else { c.abs_err };
            let replace = worst.get(&case.identity_id).is_none_or(|w| badness(case) > badness(w));
            if replace {
                worst.insert(case.identity_id, case.clone());
            }
        }
        IdentityReport { cases, summary, worst }
    }

    pub fn total(&self) -> usize {
        self.cases.len()
    }

    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.total() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }
}

/// Options for [`run_suite_with`].
#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub verifier: Verifier,
    /// Restrict to these identities; `None` runs all.
    pub filter: Option<Vec<IdentityId>>,
    pub exec: Execution,
}

/// Runs every identity over the profile's grids with default options.
pub fn run_suite(profile: &GridProfile) -> IdentityReport {
    run_suite_with(profile, &SuiteOptions::default())
}

/// Runs the suite; case order follows the grid regardless of the execution
/// strategy.
pub fn run_suite_with(profile: &GridProfile, options: &SuiteOptions) -> IdentityReport {
    let mut jobs = jobs(&profile.grid());
    if *profile == GridProfile::RealDimension {
        jobs.retain(|j| matches!(j, Job::Sin(..)));
    }
    if let Some(filter) = &options.filter {
        jobs.retain(|j| filter.contains(&j.id()));
    }
    let cases = options.exec.map_slice(&jobs, |j| j.run(&options.verifier));
    IdentityReport::from_cases(cases)
}
