//! Generalized hypergeometric series.
//!
//! `hyp_pfq` sums the defining series directly. `hyp2f1` adds the argument
//! transformations needed on the real segment `[-1, 1]`:
//!
//! * `z < 0`: Pfaff, `F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))`, which
//!   lands in `[0, 1/2]`.
//! * `0 <= z <= 1/2`: the raw series.
//! * `1/2 < z < 1`: the connection formulas in `1 - z`, including the
//!   logarithmic cases where `c - a - b` is an integer.
//!
//! Callers that know `1 - z` more accurately than `1 - z` rounds to (for
//! example near a Landen argument approaching one) should use
//! [`hyp2f1_complement`].

use serde::{Deserialize, Serialize};

use super::gamma::{digamma, gamma_fn, rgamma};
use crate::error::{Error, Result};

/// Truncation policy for hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::InvalidParameter("max_terms must be at least 1".into()));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rel_tol = {rel_tol} must be positive")));
        }
        if !(abs_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol = {abs_tol} must be non-negative"
            )));
        }
        Ok(SeriesControl {
            max_terms,
            rel_tol,
            abs_tol,
        })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_terms: 10_000,
            rel_tol: 1e-14,
            abs_tol: 1e-300,
        }
    }
}

/// Number of consecutive negligible terms required before a series stops.
const QUIET_TERMS: usize = 3;

/// Sums `term(0) + term(1) + ...` until [`QUIET_TERMS`] consecutive terms are
/// below `rel_tol * |sum| + abs_tol`.
fn sum_series(ctrl: &SeriesControl, what: &'static str, mut term: impl FnMut(usize) -> f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut last = f64::INFINITY;
    for n in 0..ctrl.max_terms {
        let t = term(n);
        if !t.is_finite() {
            return Err(Error::Overflow {
                function: what,
                at: n as f64,
            });
        }
        sum += t;
        last = t;
        if t.abs() <= ctrl.rel_tol * sum.abs() + ctrl.abs_tol {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what,
        iterations: ctrl.max_terms,
        estimate: last.abs(),
    })
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Raw pFq series with the term ratio recurrence; no domain checks.
fn pfq_series(a: &[f64], b: &[f64], z: f64, ctrl: &SeriesControl) -> Result<f64> {
    let mut t = 1.0;
    sum_series(ctrl, "hypergeometric series", |n| {
        if n > 0 {
            let k = (n - 1) as f64;
            let num: f64 = a.iter().map(|&ai| ai + k).product();
            let den: f64 = b.iter().map(|&bj| bj + k).product();
            t *= num / den * z / n as f64;
        }
        t
    })
}

/// Generalized hypergeometric function pFq(a; b; z) by direct summation.
///
/// Accepted inputs: terminating series (some `a_i` a non-positive integer)
/// for any `z`; `p <= q` for any `z`; `p = q + 1` for `|z| < 1`, or `|z| = 1`
/// when `sum(b) - sum(a) > 0`. A 2F1 with `z` in `[-1, 1]` is routed through
/// [`hyp2f1`] so that it benefits from the argument transformations.
pub fn hyp_pfq(a: &[f64], b: &[f64], z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain("hyp_pfq", "non-finite argument"));
    }
    // the series stops before index -a_min, which protects b-poles beyond it
    let terminating_at = a
        .iter()
        .filter(|&&ai| is_non_positive_integer(ai))
        .map(|&ai| -ai)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.min(v))));
    for &bj in b {
        if is_non_positive_integer(bj) && terminating_at.is_none_or(|stop| -bj < stop) {
            return Err(Error::Pole {
                function: "hyp_pfq",
                at: bj,
            });
        }
    }
    if terminating_at.is_some() {
        return pfq_series(a, b, z, ctrl);
    }
    let (p, q) = (a.len(), b.len());
    if p <= q {
        return pfq_series(a, b, z, ctrl);
    }
    if p > q + 1 {
        return Err(Error::domain(
            "hyp_pfq",
            format!("{p}F{q} diverges for z != 0 unless it terminates"),
        ));
    }
    if p == 2 && q == 1 && (-1.0..=1.0).contains(&z) {
        return hyp2f1(a[0], a[1], b[0], z, ctrl);
    }
    let az = z.abs();
    if az < 1.0 {
        return pfq_series(a, b, z, ctrl);
    }
    if az == 1.0 {
        let excess: f64 = b.iter().sum::<f64>() - a.iter().sum::<f64>();
        if excess > 0.0 {
            return pfq_series(a, b, z, ctrl);
        }
        return Err(Error::domain(
            "hyp_pfq",
            format!("series diverges on |z| = 1 when sum(b) - sum(a) = {excess} <= 0"),
        ));
    }
    Err(Error::domain(
        "hyp_pfq",
        format!("|z| = {az} > 1 for a non-terminating series"),
    ))
}

/// Gauss hypergeometric function 2F1(a, b; c; z) for real `z` in `[-1, 1]`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::domain("hyp2f1", format!("z = {z} outside [-1, 1]")));
    }
    if z < 0.0 {
        check_c(a, b, c)?;
        if is_non_positive_integer(a) || is_non_positive_integer(b) {
            return pfq_series(&[a, b], &[c], z, ctrl);
        }
        let w = z / (z - 1.0);
        let omz = 1.0 - z;
        return Ok(omz.powf(-a) * hyp2f1_complement(a, c - b, c, w, 1.0 / omz, ctrl)?);
    }
    hyp2f1_complement(a, b, c, z, 1.0 - z, ctrl)
}

fn check_c(a: f64, b: f64, c: f64) -> Result<()> {
    if is_non_positive_integer(c) {
        let stops_first = [a, b].iter().any(|&x| is_non_positive_integer(x) && x > c);
        if !stops_first {
            return Err(Error::Pole {
                function: "hyp2f1",
                at: c,
            });
        }
    }
    Ok(())
}

/// Largest `z` summed directly when `a, b, c > 0`.
const DIRECT_LIMIT_POSITIVE: f64 = 0.9;

/// 2F1(a, b; c; z) for `z` in `[0, 1]`, given `one_minus_z = 1 - z` computed
/// independently by the caller.
///
/// The complement is used in the `1 - z` connection formulas, where rounding
/// `z` first would cost relative accuracy in `ln(1 - z)` and `(1 - z)^{c-a-b}`.
pub fn hyp2f1_complement(a: f64, b: f64, c: f64, z: f64, one_minus_z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) || !(0.0..=1.0).contains(&one_minus_z) {
        return Err(Error::domain(
            "hyp2f1",
            format!("z = {z}, 1 - z = {one_minus_z}: complement form needs both in [0, 1]"),
        ));
    }
    check_c(a, b, c)?;
    if is_non_positive_integer(a) || is_non_positive_integer(b) {
        return pfq_series(&[a, b], &[c], z, ctrl);
    }
    let excess = c - a - b;
    if one_minus_z == 0.0 {
        if excess > 0.0 {
            return Ok(gamma_fn(c)? * gamma_fn(excess)? * rgamma(c - a) * rgamma(c - b));
        }
        return Err(Error::domain(
            "hyp2f1",
            format!("z = 1 requires c - a - b > 0, got {excess}"),
        ));
    }
    // with positive parameters the direct terms are all positive, while the
    // expansions around z = 1 grow before cancelling when a, b are large
    let direct_limit = if a > 0.0 && b > 0.0 && c > 0.0 {
        DIRECT_LIMIT_POSITIVE
    } else {
        0.5
    };
    if z <= direct_limit {
        return pfq_series(&[a, b], &[c], z, ctrl);
    }
    if excess == excess.round() {
        let m = excess.round();
        if m >= 0.0 {
            integer_excess(a, b, m as u32, one_minus_z, ctrl)
        } else {
            // Euler: F(a,b;c;z) = (1-z)^{c-a-b} F(c-a, c-b; c; z)
            Ok(one_minus_z.powf(excess) * integer_excess(c - a, c - b, (-m) as u32, one_minus_z, ctrl)?)
        }
    } else {
        let w = one_minus_z;
        let first = gamma_fn(c)? * gamma_fn(excess)? * rgamma(c - a) * rgamma(c - b);
        let second = gamma_fn(c)? * gamma_fn(-excess)? * rgamma(a) * rgamma(b);
        let mut value = 0.0;
        if first != 0.0 {
            value += first * pfq_series(&[a, b], &[1.0 - excess], w, ctrl)?;
        }
        if second != 0.0 {
            value += second * w.powf(excess) * pfq_series(&[c - a, c - b], &[1.0 + excess], w, ctrl)?;
        }
        Ok(value)
    }
}

/// 2F1(a, b; a + b + m; z) for integer `m >= 0`, expanded around `z = 1`
/// (Abramowitz & Stegun 15.3.10–15.3.11). `w = 1 - z` must lie in `(0, 1/2)`.
fn integer_excess(a: f64, b: f64, m: u32, w: f64, ctrl: &SeriesControl) -> Result<f64> {
    let mf = m as f64;
    let c = a + b + mf;
    let ln_w = w.ln();

    // finite part: Γ(m)Γ(c)/(Γ(a+m)Γ(b+m)) Σ_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n
    let mut finite = 0.0;
    if m > 0 {
        let pre = gamma_fn(mf)? * gamma_fn(c)? * rgamma(a + mf) * rgamma(b + mf);
        let mut t = 1.0;
        let mut acc = 0.0;
        for n in 0..m {
            if n > 0 {
                let k = (n - 1) as f64;
                t *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - mf + k)) * w;
            }
            acc += t;
        }
        finite = pre * acc;
    }

    // logarithmic part
    let pre = gamma_fn(c)? * rgamma(a) * rgamma(b);
    if pre == 0.0 {
        return Ok(finite);
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    // (z - 1)^m = (-1)^m w^m, and 1/m! folds into the first coefficient
    let mut coeff = w.powi(m as i32) * rgamma(mf + 1.0);
    let mut psi_n1 = digamma(1.0)?;
    let mut psi_nm1 = digamma(mf + 1.0)?;
    let mut psi_a = digamma(a + mf)?;
    let mut psi_b = digamma(b + mf)?;
    let series = sum_series(ctrl, "hyp2f1 logarithmic expansion", |n| {
        if n > 0 {
            let k = (n - 1) as f64;
            coeff *= (a + mf + k) * (b + mf + k) / ((k + 1.0) * (k + 1.0 + mf)) * w;
            psi_n1 += 1.0 / (k + 1.0);
            psi_nm1 += 1.0 / (k + 1.0 + mf);
            psi_a += 1.0 / (a + mf + k);
            psi_b += 1.0 / (b + mf + k);
        }
        coeff * (ln_w - psi_n1 - psi_nm1 + psi_a + psi_b)
    })?;
    Ok(finite - sign * pre * series)
}
