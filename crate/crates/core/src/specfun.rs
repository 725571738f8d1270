//! Special functions: erf, log-gamma, Kummer ₁F₁, Hermite polynomials and
//! the moment kernels `F_q` / `F̃_q`.

use alloc::format;

use crate::math::{self, SQRT_PI};
use crate::{Error, Result};

/// Order `q` of a moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOrder {
    q: f64,
    is_integer: bool,
}

impl MomentOrder {
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::Domain(format!("moment order must satisfy q > 1, got {q}")));
        }
        Ok(Self {
            q,
            is_integer: q >= 2.0 && q == math::floor(q) && q <= u32::MAX as f64,
        })
    }

    pub fn integer(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("integer moment order must be >= 2, got {q}")));
        }
        Self::new(q as f64)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_integer(&self) -> bool {
        self.is_integer
    }

    /// `Some(q)` on the integer path.
    pub fn as_integer(&self) -> Option<u32> {
        self.is_integer.then_some(self.q as u32)
    }
}

/// Error function (libm, sub-ulp accuracy).
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Γ(x)|` by the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = math::sin(math::PI * x);
        return math::ln(math::PI / math::abs(s)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * math::ln(2.0 * math::PI) + (x + 0.5) * math::ln(t) - t + math::ln(acc)
}

/// Γ(x) for real `x` that is not a non-positive integer.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return math::PI / (math::sin(math::PI * x) * gamma(1.0 - x));
    }
    if x == math::floor(x) && x <= 21.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    math::exp(ln_gamma(x))
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Physicists' Hermite polynomial `H_n(z)` by the three-term recurrence.
pub fn hermite(n: u32, z: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * z;
    for k in 1..n {
        let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

const SERIES_MAX_TERMS: usize = 20_000;
// Beyond this |x| the x < 0 branch switches to the asymptotic expansion.
const ASYMPTOTIC_FROM: f64 = 250.0;

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == math::floor(v)
}

// Plain Maclaurin series; caller guarantees no catastrophic cancellation.
fn kummer_series(a: f64, b: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if kf > x && math::abs(term) <= 1e-17 * math::abs(sum) {
            return Ok(sum);
        }
    }
    Err(Error::Domain(format!(
        "1F1 series did not converge for a = {a}, b = {b}, x = {x}"
    )))
}

/// Confluent hypergeometric function `₁F₁(a; b; x)`.
///
/// Regimes: `x < 0` through the Kummer transform `eˣ ₁F₁(b−a; b; −x)`
/// (terminating when `b − a` is a non-positive integer) or, for large
/// `|x|` and non-terminating cases, the algebraic asymptotic series;
/// `x ≥ 0` with `a, b > 0` by the direct series.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return Err(Error::Domain(format!("1F1 arguments must be finite: a = {a}, b = {b}, x = {x}")));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::Domain(format!("1F1 undefined for non-positive integer b = {b}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x > 0.0 {
        if a > 0.0 && b > 0.0 && x <= 700.0 {
            return kummer_series(a, b, x);
        }
        return Err(Error::Domain(format!(
            "1F1 regime x > 0 supported only for a, b > 0 and x <= 700 (a = {a}, b = {b}, x = {x})"
        )));
    }
    let y = -x;
    let c = b - a;
    if is_nonpositive_integer(c) {
        // polynomial of degree -c times e^x
        return Ok(math::exp(x) * kummer_series(c, b, y)?);
    }
    if b <= 0.0 {
        return Err(Error::Domain(format!("1F1 regime x < 0 needs b > 0 (b = {b})")));
    }
    if y <= ASYMPTOTIC_FROM {
        return Ok(math::exp(x) * kummer_series(c, b, y)?);
    }
    kummer_asymptotic_negative(a, b, y)
}

// ₁F₁(a; b; −y) ~ Γ(b)/Γ(b−a) y^{−a} Σ_s (a)_s (a−b+1)_s / s! y^{−s}
// plus an e^{−y} piece that is far below double precision here.
fn kummer_asymptotic_negative(a: f64, b: f64, y: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        term *= (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * y);
        if math::abs(term) > prev {
            break;
        }
        sum += term;
        prev = math::abs(term);
        if prev <= 1e-17 * math::abs(sum) {
            break;
        }
    }
    if prev > 1e-12 * math::abs(sum) {
        return Err(Error::Domain(format!(
            "1F1 asymptotic regime inaccurate for a = {a}, b = {b}, x = {}",
            -y
        )));
    }
    let c = b - a;
    let pref_sign = if gamma(c) < 0.0 { -1.0 } else { 1.0 };
    let log_pref = ln_gamma(b) - ln_gamma(c) - a * math::ln(y);
    Ok(pref_sign * math::exp(log_pref) * sum)
}

/// `F_q(z) = √π e^{−z²} (−1)^{q−1} 4^{−(q−1)} H_{2q−2}(z)`, the closed form
/// of `|t|^{2q−1} ∫ y^{2q−2} e^{−y²t² + iαy} dy` at `z = α / 2t`.
pub fn f_q_closed(q: u32, z: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!("F_q needs integer q >= 2, got {q}")));
    }
    let p = q - 1;
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(SQRT_PI * math::exp(-z * z) * sign * math::powi(0.25, p as i32) * hermite(2 * p, z))
}

/// Same finite sum with the coefficient `2^p` in place of `4^{−p}`.
///
/// Only kept so the self-test can display how far it is from the Gaussian
/// integral; it is not used by any moment computation.
pub fn f_q_power2_series(q: u32, z: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!("F_q needs integer q >= 2, got {q}")));
    }
    let n = q - 1;
    let mz2 = -z * z;
    let mut sum = 0.0;
    for p in 0..=n {
        let binom = factorial(2 * n) / (factorial(p) * factorial(2 * n - 2 * p));
        sum += math::powi(2.0, p as i32) * math::powi(mz2, (n - p) as i32) * binom;
    }
    Ok(SQRT_PI * math::exp(-z * z) * sum)
}

/// `F̃_q(z) = Γ(q − 1/2) ₁F₁(q − 1/2; 1/2; −z²)`, valid for real `q > 1`.
pub fn f_q_tilde(q: f64, z: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("F~_q needs q > 1, got {q}")));
    }
    Ok(gamma(q - 0.5) * kummer_1f1(q - 0.5, 0.5, -z * z)?)
}
