//! Gamma function and relatives.
//!
//! Γ is evaluated with a fixed Lanczos-type rational approximation
//! (g = 10.900511, eleven coefficients, Pugh 2004) on `x >= 0.5` and with the
//! reflection formula below that.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 10.900511;

const LANCZOS_COEFFS: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

/// `2 * sqrt(e / pi)`
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

/// Largest argument for which Γ(x) is representable as an f64.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_COEFFS
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_COEFFS[0], |acc, (k, c)| acc + c / (x + k as f64 - 1.0))
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// sin(πx) with exact argument reduction, so that integers give exact zeros.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let r = x.rem_euclid(2.0);
    // r in [0, 2)
    let (y, sign) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let y = if y > 0.5 { 1.0 - y } else { y };
    sign * (PI * y).sin()
}

/// Γ(x) for x >= 0.5, without range checks.
///
/// The Lanczos sum is used on `[0.5, 1.5)` only; larger arguments are shifted
/// down with `Γ(x) = (x-1)(x-2)···(y) Γ(y)`, which keeps factorials exact and
/// avoids the error growth of `powf` at large exponents.
fn gamma_positive(x: f64) -> f64 {
    let shift = (x - 0.5).floor().max(0.0);
    let y = x - shift;
    let base = (y - 0.5 + LANCZOS_G) / E;
    let mut g = lanczos_sum(y) * TWO_SQRT_E_OVER_PI * base.powf(y - 0.5);
    let mut k = y;
    while k < x {
        g *= k;
        k += 1.0;
    }
    g
}

/// The Gamma function.
///
/// Errors at the poles `0, -1, -2, ...` and when the result overflows.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma", "NaN argument"));
    }
    if is_non_positive_integer(x) {
        return Err(Error::Pole {
            function: "gamma",
            at: x,
        });
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow {
            function: "gamma",
            at: x,
        });
    }
    if x >= 0.5 {
        return Ok(gamma_positive(x));
    }
    let reflected = 1.0 - x;
    if reflected > GAMMA_MAX_ARG {
        // |Γ(x)| underflows to zero; only the sign survives
        return Ok(0.0_f64.copysign(sin_pi(x)));
    }
    Ok(PI / (sin_pi(x) * gamma_positive(reflected)))
}

/// ln|Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("ln_gamma", format!("x = {x} must be positive")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    Ok(lanczos_sum(x).ln() + TWO_SQRT_E_OVER_PI.ln() + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / E).ln())
}

/// 1/Γ(x), an entire function: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_non_positive_integer(x) {
        return 0.0;
    }
    if x > GAMMA_MAX_ARG {
        return (-ln_gamma(x).unwrap_or(f64::INFINITY)).exp();
    }
    match gamma_fn(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if is_non_positive_integer(x) {
        return Err(Error::Pole {
            function: "digamma",
            at: x,
        });
    }
    if x < 0.5 {
        // ψ(1 - x) - ψ(x) = π cot(πx)
        let cot = sin_pi(x + 0.5) / sin_pi(x);
        return Ok(digamma(1.0 - x)? - PI * cot);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // Bernoulli tail: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760, 1/12
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    Ok(acc + y.ln() - 0.5 / y - tail)
}

/// Rising factorial (α)_n = α(α+1)···(α+n−1), with (α)_0 = 1.
pub fn pochhammer(alpha: f64, n: u32) -> Result<f64> {
    let mut acc = 1.0_f64;
    for k in 0..n {
        acc *= alpha + k as f64;
        if !acc.is_finite() {
            return Err(Error::Overflow {
                function: "pochhammer",
                at: alpha,
            });
        }
    }
    Ok(acc)
}
