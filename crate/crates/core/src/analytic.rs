//! Analytic moments of the simplex model at `E = 0`.
//!
//! Conventions. With `s = t/N`, `θ = α/N` and `z = α/2t` the two kernels
//! are
//!
//! ```text
//! f(s, θ) = ∫ dx/√(2π) x^{-2} exp(-1/(2x²) - s²x² + iθx)
//! g(s, θ) = ∫ dx |x|^{2q-2} exp(-1/(2x²) - s²x² + iθx)
//! ```
//!
//! Both are real and even in each argument. After `x = y/s`:
//!
//! ```text
//! f(s, 2sz) = e^{-√2 s} - (2s/√(2π)) D(s, z)
//! D(s, z)   = ∫_0^∞ 2 sin²(zy) y^{-2} e^{-y² - s²/(2y²)} dy
//! g(s, 2sz) = s^{1-2q} ĝ(s, z),   ĝ(s, z) = 2 ∫_0^∞ y^{2q-2} e^{-y² - s²/(2y²)} cos(2zy) dy
//! ```
//!
//! and `ĝ(0, z) = F_q(z)`. The finite-`N` moment becomes
//!
//! ```text
//! I_q(N) = 8 r_q ∫_0^∞ dz ∫_0^∞ dt [cos(2tzw) f^{N-1}(t/N, 2tz/N) ĝ(t/N, z) - F_q(z) e^{-t}] / t
//! ```
//!
//! with `r_q = 1/(2π (q-2)!)`. The subtracted term integrates to zero
//! because `∫ F_q dz = 0`; it makes the inner `t` integral finite. For
//! `N → ∞`, `f^{N-1} → e^{-a t}` with `a = √2 (e^{-z²} + √π z erf z)` and
//! the `t` integral is `-½ ln(a² + 4z²w²)`, which gives
//!
//! ```text
//! I_q = -(2 / (π Γ(q-1))) ∫_0^∞ F_q(z) ln A(z) dz,
//! A(z) = 4z²w² + 2 (e^{-z²} + √π z erf z)².
//! ```

use alloc::format;
use alloc::vec::Vec;

use crate::math::{self, PI, SQRT_2, SQRT_2PI, SQRT_PI};
use crate::quadrature::{integrate_points, integrate_with_uncertainty, QuadratureResult, Tolerance};
use crate::specfun::{self, f_q_closed, f_q_tilde, gamma, ln_gamma, MomentOrder};
use crate::{Error, Result};

/// `ρ(0) = 1/(√(2π) w)`, the large-`N` density of states at the band centre.
pub fn rho0(w: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("rho0 needs w > 0, got {w}")));
    }
    Ok(1.0 / (SQRT_2PI * w))
}

/// `r_q = 1 / (2π Γ(q-1))`.
pub fn r_q(order: &MomentOrder) -> f64 {
    1.0 / (2.0 * PI * gamma(order.q() - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub s: f64,
    pub theta: f64,
}

impl KernelArgs {
    pub fn new(s: f64, theta: f64) -> Self {
        Self { s, theta }
    }
}

fn kernel_tol() -> Tolerance {
    Tolerance::new(1e-12, 1e-14).with_budget(200_000)
}

fn y_points(s: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(6);
    pts.push(0.0);
    if s > 1e-8 && s < 0.5 {
        pts.push(s);
    }
    pts.extend_from_slice(&[1.0, 3.0, f64::INFINITY]);
    pts
}

// D(s, z) with its error estimate; s >= 0, z >= 0.
fn d_integral(s: f64, z: f64) -> Result<(f64, f64)> {
    if s == 0.0 {
        return Ok((PI * z * specfun::erf(z) + SQRT_PI * math::expm1(-z * z), 0.0));
    }
    let half_s2 = 0.5 * s * s;
    let r = integrate_points(
        |y| {
            if y > 40.0 {
                return 0.0;
            }
            let sz = math::sin(z * y) / y;
            2.0 * sz * sz * math::exp(-y * y - half_s2 / (y * y))
        },
        &y_points(s),
        &kernel_tol(),
    )?
    .require_converged("kernel f")?;
    Ok((r.value, r.error_estimate))
}

// f(s, 2sz) - 1 and its error estimate, for s >= 0, z >= 0.
fn f_minus_one(s: f64, z: f64) -> Result<(f64, f64)> {
    let (d, err) = d_integral(s, z)?;
    let c = 2.0 * s / SQRT_2PI;
    Ok((math::expm1(-SQRT_2 * s) - c * d, c * err))
}

/// `f(s, θ)`.
pub fn f_kernel(args: KernelArgs) -> Result<f64> {
    let (s, theta) = (math::abs(args.s), math::abs(args.theta));
    if !(s.is_finite() && theta.is_finite()) {
        return Err(Error::Domain(format!("f kernel needs finite arguments, got ({}, {})", args.s, args.theta)));
    }
    if s == 0.0 {
        return f_at_zero_s(theta);
    }
    let (fm1, _) = f_minus_one(s, theta / (2.0 * s))?;
    Ok(1.0 + fm1)
}

// f(0, θ) = (2/√(2π)) Re ∫_0^∞ exp(-u²/2 + iθ/u) du, with the contour
// rotated to u = r e^{-iπ/6} so that both ends are exponentially damped.
fn f_at_zero_s(theta: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(1.0);
    }
    let phi = PI / 6.0;
    let (c2, s2) = (math::cos(2.0 * phi), math::sin(2.0 * phi));
    let (c1, s1) = (math::cos(phi), math::sin(phi));
    let knee = math::powf(theta, 1.0 / 3.0);
    let r = integrate_points(
        |r| {
            let re = -0.5 * r * r * c2 - theta * s1 / r;
            if re < -745.0 {
                return 0.0;
            }
            let im = 0.5 * r * r * s2 + theta * c1 / r;
            math::exp(re) * math::cos(im - phi)
        },
        &[0.0, knee, f64::INFINITY],
        &kernel_tol(),
    )?
    .require_converged("kernel f at s = 0")?;
    Ok(2.0 / SQRT_2PI * r.value)
}

fn y_power(y: f64, q: f64) -> f64 {
    if q == 2.0 {
        y * y
    } else {
        math::powf(y, 2.0 * q - 2.0)
    }
}

// ĝ(s, z) - F_q(z), computed without cancellation.
fn delta_g(s: f64, z: f64, q: f64) -> Result<(f64, f64)> {
    if s == 0.0 {
        return Ok((0.0, 0.0));
    }
    let half_s2 = 0.5 * s * s;
    let r = integrate_points(
        |y| {
            if y > 40.0 {
                return 0.0;
            }
            2.0 * y_power(y, q)
                * math::exp(-y * y)
                * math::expm1(-half_s2 / (y * y))
                * math::cos(2.0 * z * y)
        },
        &y_points(s),
        &kernel_tol(),
    )?
    .require_converged("kernel g")?;
    Ok((r.value, r.error_estimate))
}

fn f_q_any(order: &MomentOrder, z: f64) -> Result<f64> {
    match order.as_integer() {
        Some(q) => f_q_closed(q, z),
        None => f_q_tilde(order.q(), z),
    }
}

/// `ĝ(s, z) = |s|^{2q-1} g(s, 2sz)` for `s >= 0`; equals `F_q(z)` at `s = 0`.
pub fn g_hat(s: f64, z: f64, order: &MomentOrder) -> Result<f64> {
    let (s, z) = (math::abs(s), math::abs(z));
    let (dg, _) = delta_g(s, z, order.q())?;
    Ok(f_q_any(order, z)? + dg)
}

/// `g(s, θ)`; divergent at `s = 0`.
pub fn g_kernel(args: KernelArgs, order: &MomentOrder) -> Result<f64> {
    let (s, theta) = (math::abs(args.s), math::abs(args.theta));
    if s == 0.0 {
        return Err(Error::Domain("kernel divergent at s=0".into()));
    }
    if !(s.is_finite() && theta.is_finite()) {
        return Err(Error::Domain(format!("g kernel needs finite arguments, got ({}, {})", args.s, args.theta)));
    }
    let gh = g_hat(s, theta / (2.0 * s), order)?;
    Ok(math::powf(s, 1.0 - 2.0 * order.q()) * gh)
}

/// `A(z) = 4z²w² + 2 (e^{-z²} + √π |z| erf|z|)²`.
pub fn log_argument(z: f64, w: f64) -> f64 {
    let z = math::abs(z);
    let b = math::exp(-z * z) + SQRT_PI * z * specfun::erf(z);
    4.0 * z * z * w * w + 2.0 * b * b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticMomentQuery {
    pub order: MomentOrder,
    pub w: f64,
}

impl AnalyticMomentQuery {
    pub fn new(q: f64, w: f64) -> Result<Self> {
        let order = MomentOrder::new(q)?;
        rho0(w)?;
        Ok(Self { order, w })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteNQuery {
    pub order: MomentOrder,
    pub w: f64,
    pub n: usize,
}

impl FiniteNQuery {
    pub fn new(q: u32, w: f64, n: usize) -> Result<Self> {
        let order = MomentOrder::integer(q)?;
        rho0(w)?;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "the finite-N formula assumes an even number of sites, got N = {n}"
            )));
        }
        Ok(Self { order, w, n })
    }
}

/// Which closed form of the `y` integral enters the thermodynamic limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermoPath {
    /// `F_q` via Hermite polynomials (integer `q`).
    Hermite,
    /// `F̃_q = Γ(q-1/2) ₁F₁(q-1/2; 1/2; -z²)` (any real `q > 1`).
    Kummer,
}

fn thermo_tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-13)
}

// Beyond this point F̃_q is replaced by its algebraic asymptotic series
// and the tail integral is done in closed form.
const KUMMER_TAIL_FROM: f64 = 8.0;

fn z_points(w: f64, upper: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(6);
    pts.push(0.0);
    let knee = 1.0 / w;
    if knee < 0.5 {
        pts.push(knee);
        if 10.0 * knee < 0.5 {
            pts.push(10.0 * knee);
        }
    }
    pts.push(1.0);
    pts.push(4.0);
    if upper > 4.0 {
        pts.push(upper);
    }
    pts
}

/// Thermodynamic-limit moment `I_q(w)`; Hermite path for integer `q`,
/// Kummer path otherwise.
pub fn iq_thermo(query: &AnalyticMomentQuery) -> Result<QuadratureResult> {
    let path = if query.order.is_integer() {
        ThermoPath::Hermite
    } else {
        ThermoPath::Kummer
    };
    iq_thermo_scaled(query, path, 1.0)
}

pub fn iq_thermo_via(query: &AnalyticMomentQuery, path: ThermoPath) -> Result<QuadratureResult> {
    iq_thermo_scaled(query, path, 1.0)
}

/// Thermodynamic limit with `A(z)` replaced by `κ A(z)`. The result does
/// not depend on `κ` because `∫ F_q dz = 0`.
pub fn iq_thermo_scaled(query: &AnalyticMomentQuery, path: ThermoPath, kappa: f64) -> Result<QuadratureResult> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("log scale must be positive, got {kappa}")));
    }
    let q = query.order.q();
    let w = query.w;
    let pref = -2.0 / (PI * gamma(q - 1.0));
    let res = match path {
        ThermoPath::Hermite => {
            let qi = query.order.as_integer().ok_or_else(|| {
                Error::Domain(format!("Hermite path needs integer q, got {q}"))
            })?;
            let mut pts = z_points(w, 4.0);
            pts.push(f64::INFINITY);
            integrate_points(
                |z| {
                    let fz = f_q_closed(qi, z).unwrap_or(f64::NAN);
                    if fz == 0.0 {
                        0.0
                    } else {
                        fz * math::ln(kappa * log_argument(z, w))
                    }
                },
                &pts,
                &thermo_tol(),
            )?
        }
        ThermoPath::Kummer => {
            let pts = z_points(w, KUMMER_TAIL_FROM);
            let mut body = crate::quadrature::try_integrate_points(
                |z| Ok(f_q_tilde(q, z)? * math::ln(kappa * log_argument(z, w))),
                &pts,
                &thermo_tol(),
            )?;
            let (tail, tail_err) = kummer_tail(q, w, kappa, KUMMER_TAIL_FROM);
            body.value += tail;
            body.error_estimate += tail_err;
            body
        }
    };
    let out = QuadratureResult {
        value: pref * res.value,
        error_estimate: math::abs(pref) * res.error_estimate,
        evaluations: res.evaluations,
        converged: res.converged,
    };
    out.require_converged("thermodynamic-limit moment")
}

// ∫_Z^∞ F̃_q(z) ln(κ c z²) dz with c = 4w² + 2π, using
// F̃_q(z) ~ Γ(q-1/2) √π / Γ(1-q) Σ_s (q-1/2)_s (q)_s / s! z^{1-2q-2s}.
fn kummer_tail(q: f64, w: f64, kappa: f64, big_z: f64) -> (f64, f64) {
    // 1/Γ(1-q) = Γ(q) sin(πq) / π
    let frac = q - math::floor(q);
    if frac == 0.0 {
        return (0.0, 0.0);
    }
    let inv_gamma_1mq = math::exp(ln_gamma(q)) * math::sin(PI * q) / PI;
    let amp = gamma(q - 0.5) * SQRT_PI * inv_gamma_1mq;
    let log_c = math::ln(kappa * (4.0 * w * w + 2.0 * PI)) + 2.0 * math::ln(big_z);
    let mut coef = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    for s in 0..60 {
        let sf = s as f64;
        let m = 2.0 * q - 1.0 + 2.0 * sf;
        let piece = coef * math::powf(big_z, 1.0 - m) * (log_c / (m - 1.0) + 2.0 / ((m - 1.0) * (m - 1.0)));
        sum += piece;
        last = math::abs(piece);
        if last <= 1e-17 * math::abs(sum) {
            break;
        }
        coef *= (q - 0.5 + sf) * (q + sf) / (sf + 1.0);
    }
    (amp * sum, math::abs(amp) * last)
}

fn finite_n_tol() -> Tolerance {
    Tolerance::new(1e-8, 1e-11)
}

/// Exact finite-`N` moment from the two-fold `(t, z)` integral.
pub fn iq_finite_n(query: &FiniteNQuery) -> Result<QuadratureResult> {
    let qi = query
        .order
        .as_integer()
        .ok_or_else(|| Error::Domain("finite-N moments need integer q".into()))?;
    let q = query.order.q();
    let w = query.w;
    let n = query.n as f64;
    let nm1 = query.n as i32 - 1;
    let outer_tol = finite_n_tol();
    let inner_tol = outer_tol.tightened(10.0);
    let mut evaluations = 0u64;

    let t_points = [0.0, 1.0, 5.0, f64::INFINITY];
    let mut z_pts = z_points(w, 4.0);
    z_pts.push(f64::INFINITY);

    let outer = integrate_with_uncertainty(
        |z| {
            let fz = f_q_closed(qi, z)?;
            let inner = integrate_with_uncertainty(
                |t| {
                    let s = t / n;
                    let (fm1, fm1_err) = f_minus_one(s, z)?;
                    let f = 1.0 + fm1;
                    let (dp, p_deriv) = if fm1 > -0.5 {
                        let lp = (nm1 as f64) * math::ln1p(fm1);
                        (math::expm1(lp), (nm1 as f64) * math::exp(lp) / f)
                    } else {
                        (math::powi(f, nm1) - 1.0, (nm1 as f64) * math::powi(f, nm1 - 1))
                    };
                    let (dg, dg_err) = delta_g(s, z, q)?;
                    let c = math::cos(2.0 * t * z * w);
                    let sn = math::sin(t * z * w);
                    let cme = -2.0 * sn * sn - math::expm1(-t);
                    let num = fz * cme + c * (dp * fz + dg + dp * dg);
                    let unc = math::abs(c)
                        * (math::abs(p_deriv) * fm1_err * math::abs(fz + dg) + (1.0 + math::abs(dp)) * dg_err);
                    Ok((num / t, unc / t))
                },
                &t_points,
                &inner_tol,
            )?;
            evaluations += inner.evaluations;
            let inner = inner.require_converged("finite-N inner t integral")?;
            Ok((inner.value, inner.error_estimate))
        },
        &z_pts,
        &outer_tol,
    )?;
    let pref = 8.0 * r_q(&query.order);
    let out = QuadratureResult {
        value: pref * outer.value,
        error_estimate: pref * outer.error_estimate,
        evaluations,
        converged: outer.converged,
    };
    out.require_converged("finite-N moment")
}

/// `N → ∞` integrand before the `t` integral is done in closed form,
/// regulated by `1/t → t^{δ-1} / Γ(1+δ)`:
///
/// ```text
/// J(δ) = (8 r_q / Γ(1+δ)) ∫_0^∞ dz F_q(z) ∫_0^∞ dt t^{δ-1} cos(2tzw) e^{-a(z) t}
/// ```
///
/// evaluated by nested quadrature after `u = t^δ`. The normalization makes
/// `δ ∫ t^{δ-1} e^{-t} dt / Γ(1+δ) = 1` and removes the leading
/// `δ`-dependence that is common to every `z`. `J(δ) = I_q + O(δ)`.
pub fn iq_thermo_regulated(query: &AnalyticMomentQuery, delta: f64) -> Result<QuadratureResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("regulator must lie in (0, 1), got {delta}")));
    }
    let qi = query
        .order
        .as_integer()
        .ok_or_else(|| Error::Domain("regulated form is implemented for integer q".into()))?;
    let w = query.w;
    let inv_delta = 1.0 / delta;
    let mut u_points: Vec<f64> = Vec::with_capacity(12);
    u_points.push(0.0);
    for t in [1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0, 100.0] {
        u_points.push(math::powf(t, delta));
    }
    u_points.push(f64::INFINITY);

    // the inner value is multiplied by 1/δ before the cancelling z integral
    let outer_tol = Tolerance::new(1e-9, 1e-11);
    let inner_tol = Tolerance::new(1e-13, 1e-15);
    let mut evaluations = 0u64;
    let mut z_pts = z_points(w, 4.0);
    z_pts.push(f64::INFINITY);
    let outer = integrate_with_uncertainty(
        |z| {
            let fz = f_q_closed(qi, z)?;
            if fz == 0.0 {
                return Ok((0.0, 0.0));
            }
            let a = SQRT_2 * (math::exp(-z * z) + SQRT_PI * z * specfun::erf(z));
            let inner = integrate_points(
                |u| {
                    let t = math::powf(u, inv_delta);
                    if !(a * t < 745.0) {
                        return 0.0;
                    }
                    math::cos(2.0 * t * z * w) * math::exp(-a * t)
                },
                &u_points,
                &inner_tol,
            )?;
            evaluations += inner.evaluations;
            let inner = inner.require_converged("regulated inner integral")?;
            Ok((fz * inner.value * inv_delta, math::abs(fz) * inner.error_estimate * inv_delta))
        },
        &z_pts,
        &outer_tol,
    )?;
    let pref = 8.0 * r_q(&query.order) / gamma(1.0 + delta);
    let out = QuadratureResult {
        value: pref * outer.value,
        error_estimate: pref * outer.error_estimate,
        evaluations,
        converged: outer.converged,
    };
    out.require_converged("regulated moment")
}

/// Quadratic extrapolation of [`iq_thermo_regulated`] to `δ → 0` from
/// `δ`, `δ/2`, `δ/4`.
pub fn iq_thermo_regulated_extrapolated(query: &AnalyticMomentQuery, delta: f64) -> Result<f64> {
    let j1 = iq_thermo_regulated(query, delta)?.value;
    let j2 = iq_thermo_regulated(query, 0.5 * delta)?.value;
    let j4 = iq_thermo_regulated(query, 0.25 * delta)?.value;
    Ok(j1 / 3.0 - 2.0 * j2 + 8.0 * j4 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho0_values() {
        assert!((rho0(3.0).unwrap() - 0.132_980_760_133_810_6).abs() < 1e-12);
        assert!((rho0(1.0 / SQRT_2PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((rho0(0.01).unwrap() - 39.894_228_040_143_27).abs() < 1e-10);
        assert!(rho0(0.0).is_err());
    }

    #[test]
    fn f_kernel_closed_forms() {
        assert_eq!(f_kernel(KernelArgs::new(0.0, 0.0)).unwrap(), 1.0);
        let f10 = f_kernel(KernelArgs::new(1.0, 0.0)).unwrap();
        assert!((f10 - math::exp(-SQRT_2)).abs() < 1e-13);
        let a = f_kernel(KernelArgs::new(0.7, 1.3)).unwrap();
        let b = f_kernel(KernelArgs::new(0.7, -1.3)).unwrap();
        let c = f_kernel(KernelArgs::new(-0.7, 1.3)).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
    }

    // f(0, θ) = Σ_m 2^m m! θ^{2m} / ((2m)!)² - √(π/2) Σ_m 2^{-m} |θ|^{2m+1} / ((2m+1)! m!)
    fn f_zero_s_series(theta: f64) -> f64 {
        let mut sum = 0.0;
        let (mut fm, mut f2m) = (1.0, 1.0);
        for m in 0..40 {
            if m > 0 {
                fm *= m as f64;
                f2m *= (2 * m - 1) as f64 * (2 * m) as f64;
            }
            let f2m1 = f2m * (2 * m + 1) as f64;
            let even = 2f64.powi(m) * fm / (f2m * f2m) * theta.powi(2 * m);
            let odd = math::sqrt(PI / 2.0) * 2f64.powi(-m) / (f2m1 * fm) * theta.powi(2 * m + 1);
            sum += even - odd;
        }
        sum
    }

    #[test]
    fn f_kernel_at_zero_s() {
        for &theta in &[0.1, 0.8, 3.0, 10.0] {
            let f = f_kernel(KernelArgs::new(0.0, theta)).unwrap();
            let oracle = f_zero_s_series(theta);
            assert!((f - oracle).abs() < 1e-10, "theta = {theta}: {f} vs {oracle}");
        }
        // continuity in s
        let f0 = f_kernel(KernelArgs::new(0.0, 0.8)).unwrap();
        let d1 = (f_kernel(KernelArgs::new(1e-2, 0.8)).unwrap() - f0).abs();
        let d2 = (f_kernel(KernelArgs::new(1e-3, 0.8)).unwrap() - f0).abs();
        assert!(d2 < 0.2 * d1, "{d1} {d2}");
    }

    #[test]
    fn g_kernel_closed_form() {
        let q2 = MomentOrder::integer(2).unwrap();
        let g = g_kernel(KernelArgs::new(1.0, 0.0), &q2).unwrap();
        let expect = SQRT_PI * math::exp(-SQRT_2) * (0.5 + 1.0 / SQRT_2);
        assert!((g - expect).abs() < 1e-12, "{g} vs {expect}");
        assert!(matches!(g_kernel(KernelArgs::new(0.0, 1.0), &q2), Err(Error::Domain(_))));
    }

    #[test]
    fn finite_n_query_rejects_odd_n() {
        assert!(FiniteNQuery::new(2, 3.0, 33).is_err());
        assert!(FiniteNQuery::new(2, 3.0, 32).is_ok());
    }

    #[test]
    fn thermo_paths_agree() {
        let q = AnalyticMomentQuery::new(3.0, 3.0).unwrap();
        let h = iq_thermo_via(&q, ThermoPath::Hermite).unwrap().value;
        let k = iq_thermo_via(&q, ThermoPath::Kummer).unwrap().value;
        assert!((h - k).abs() < 1e-8, "{h} vs {k}");
    }
}
