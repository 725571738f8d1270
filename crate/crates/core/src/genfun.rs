//! Small-`N` checks of the single-real-field representation of the moments.
//!
//! For a zero-diagonal hopping matrix `T`, energy `E` and site `n`,
//!
//! ```text
//! Y(t_n) = (√(2π)/w) Π_{p≠n} ∫ dt_p / (√(2π) w t_p) det B
//!          · exp(-Σ_p [(Σ_q T_pq t_q/t_p - E)² / (2w²) + t_p²])
//! I_q(n) = 1 / (π ρ(E) (q-2)!) ∫_0^∞ dt_n t_n^{2q-3} Y(t_n)
//! B_pq   = -T_pq + δ_pq Σ_r T_pr t_r / t_p,   p, q ≠ n
//! ```
//!
//! A diagonal `T_pp = c` is absorbed by shifting `E → E - c`. The
//! density `ρ(E)` (per site) is an input; for `N = 2` it is available
//! exactly from [`dos_exact_n2`].

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math::{self, PI, SQRT_2PI};
use crate::model::{build_simplex_hopping, HoppingMatrix};
use crate::quadrature::{integrate_nd, integrate_points, integrate_with_uncertainty, QuadratureResult, Tolerance};
use crate::specfun::gamma;
use crate::{Error, Result};

/// Largest lattice the generating-function quadrature accepts.
pub const MAX_GENFUN_SITES: usize = 4;

/// A small-`N` instance: zero-diagonal `T`, energy, disorder and site.
#[derive(Debug, Clone, PartialEq)]
pub struct GenFunProblem {
    t_matrix: HoppingMatrix,
    energy: f64,
    w: f64,
    site: usize,
}

impl GenFunProblem {
    /// `site` is zero-based.
    pub fn new(t_matrix: HoppingMatrix, energy: f64, w: f64, site: usize) -> Result<Self> {
        if !t_matrix.zero_diagonal() {
            return Err(Error::InvalidInput(
                "the field representation needs a zero-diagonal hopping matrix; shift the energy instead".into(),
            ));
        }
        let n = t_matrix.n();
        if n < 2 {
            return Err(Error::InvalidDimension(format!("need at least two sites, got {n}")));
        }
        if site >= n {
            return Err(Error::InvalidInput(format!("site {site} out of range for N = {n}")));
        }
        if !(w > 0.0 && w.is_finite()) || !energy.is_finite() {
            return Err(Error::InvalidInput(format!("need w > 0 and finite E, got w = {w}, E = {energy}")));
        }
        Ok(Self {
            t_matrix,
            energy,
            w,
            site,
        })
    }

    /// Simplex at energy `energy`: off-diagonal `1/N` and `E → E - 1/N`.
    pub fn simplex(n: usize, energy: f64, w: f64, site: usize) -> Result<Self> {
        let t = build_simplex_hopping(n)?.without_diagonal();
        Self::new(t, energy - 1.0 / n as f64, w, site)
    }

    pub fn t_matrix(&self) -> &HoppingMatrix {
        &self.t_matrix
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn n_sites(&self) -> usize {
        self.t_matrix.n()
    }
}

/// Field configuration `t_p`; no component may vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct TVector {
    values: Vec<f64>,
}

impl TVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(p) = values.iter().position(|&x| x == 0.0 || !x.is_finite()) {
            return Err(Error::Domain(format!(
                "t vector components must be finite and nonzero (component {p} is {})",
                values[p]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_len(t_matrix: &HoppingMatrix, t: &TVector) -> Result<usize> {
    let n = t_matrix.n();
    if t.len() != n {
        return Err(Error::InvalidDimension(format!(
            "t vector has {} components for N = {n}",
            t.len()
        )));
    }
    Ok(n)
}

/// Full `N×N` matrix `B̂_pq = -T_pq + δ_pq Σ_r T_pr t_r / t_p`.
pub fn b_hat(t_matrix: &HoppingMatrix, t: &TVector) -> Result<Matrix> {
    let n = check_len(t_matrix, t)?;
    let tm = t_matrix.entries();
    let tv = t.values();
    let mut b = Matrix::from_fn(n, n, |p, q| -tm[(p, q)]);
    for p in 0..n {
        let s: f64 = (0..n).map(|r| tm[(p, r)] * tv[r]).sum();
        b[(p, p)] += s / tv[p];
    }
    Ok(b)
}

/// `B` with row and column `site` removed.
pub fn b_matrix(t_matrix: &HoppingMatrix, t: &TVector, site: usize) -> Result<Matrix> {
    let n = check_len(t_matrix, t)?;
    if site >= n {
        return Err(Error::InvalidInput(format!("site {site} out of range for N = {n}")));
    }
    Ok(b_hat(t_matrix, t)?.minor(site))
}

/// `det B = t_n² / N^{N-1} (Σ t_r)^{N-2} Π 1/t_p` for the simplex.
pub fn det_b_simplex_closed(t: &TVector, site: usize, n_sites: usize) -> Result<f64> {
    if t.len() != n_sites || n_sites < 2 {
        return Err(Error::InvalidDimension(format!(
            "t vector has {} components for N = {n_sites}",
            t.len()
        )));
    }
    if site >= n_sites {
        return Err(Error::InvalidInput(format!("site {site} out of range for N = {n_sites}")));
    }
    let tv = t.values();
    let sum: f64 = tv.iter().sum();
    let prod: f64 = tv.iter().map(|x| 1.0 / x).product();
    let nf = n_sites as f64;
    Ok(tv[site] * tv[site] / math::powi(nf, n_sites as i32 - 1) * math::powi(sum, n_sites as i32 - 2) * prod)
}

/// Normalized null vector `t / ‖t‖` of `B̂`.
pub fn zero_mode(t: &TVector) -> Vec<f64> {
    let norm = crate::linalg::norm2(t.values());
    t.values().iter().map(|x| x / norm).collect()
}

fn det_small(b: &[[f64; MAX_GENFUN_SITES]; MAX_GENFUN_SITES], m: usize) -> f64 {
    match m {
        1 => b[0][0],
        2 => b[0][0] * b[1][1] - b[0][1] * b[1][0],
        _ => {
            b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0])
        }
    }
}

/// Integrand of `Y` at the full configuration `t` (without the constant
/// prefactor). Assumes `N <= MAX_GENFUN_SITES`.
fn weight(problem: &GenFunProblem, t: &[f64]) -> f64 {
    let n = t.len();
    let tm = problem.t_matrix.entries();
    let two_w2 = 2.0 * problem.w * problem.w;
    let mut sums = [0.0; MAX_GENFUN_SITES];
    let mut expo = 0.0;
    for p in 0..n {
        sums[p] = (0..n).map(|q| tm[(p, q)] * t[q]).sum();
        let x = sums[p] / t[p] - problem.energy;
        expo -= x * x / two_w2 + t[p] * t[p];
    }
    if !(expo > -745.0) {
        return 0.0;
    }
    // Row p scaled by t_p keeps the entries bounded:
    // det B Π 1/t_p = det(t_p B_pq) Π 1/t_p².
    let mut b = [[0.0; MAX_GENFUN_SITES]; MAX_GENFUN_SITES];
    for (i, p) in (0..n).filter(|&p| p != problem.site).enumerate() {
        expo -= 2.0 * math::ln(math::abs(t[p]));
        for (j, q) in (0..n).filter(|&q| q != problem.site).enumerate() {
            b[i][j] = if p == q { sums[p] - tm[(p, p)] * t[p] } else { -tm[(p, q)] * t[p] };
        }
    }
    let det = det_small(&b, n - 1);
    if det == 0.0 {
        return 0.0;
    }
    math::copysign(math::exp(expo + math::ln(math::abs(det))), det)
}

// Each inner axis is mapped as t = ±e^x: the Gaussian suppression of the
// 1/t_p poles sits at |t_p| ~ |Σ_q T_pq t_q| / w, which has a fixed width
// in x whatever the other components are.
const X_AXIS: [f64; 4] = [f64::NEG_INFINITY, -3.0, 0.0, f64::INFINITY];

/// `Y(t_n)` by `(N-1)`-dimensional quadrature.
pub fn y_of_tn(problem: &GenFunProblem, t_n: f64, tol: &Tolerance) -> Result<QuadratureResult> {
    let n = problem.n_sites();
    if n > MAX_GENFUN_SITES {
        return Err(Error::Unsupported(format!(
            "generating-function quadrature supports N <= {MAX_GENFUN_SITES}, got {n}"
        )));
    }
    let site = problem.site;
    let dim = n - 1;
    let ranges: Vec<&[f64]> = (0..dim).map(|_| &X_AXIS[..]).collect();
    let mut full = alloc::vec![0.0; n];
    let r = integrate_nd(
        |x| {
            // e^{-t²} underflows long before e^x overflows
            if x.iter().any(|&v| v > 6.0) {
                return 0.0;
            }
            let jac: f64 = x.iter().map(|&v| math::exp(v)).product();
            let mut acc = 0.0;
            for signs in 0..(1u32 << dim) {
                let mut k = 0;
                for (p, slot) in full.iter_mut().enumerate() {
                    if p == site {
                        *slot = t_n;
                    } else {
                        let m = math::exp(x[k]);
                        *slot = if signs >> k & 1 == 0 { m } else { -m };
                        k += 1;
                    }
                }
                acc += weight(problem, &full);
            }
            acc * jac
        },
        &ranges,
        tol,
    )?;
    let pref = SQRT_2PI / problem.w * math::powi(1.0 / (SQRT_2PI * problem.w), n as i32 - 1);
    Ok(QuadratureResult {
        value: pref * r.value,
        error_estimate: pref * r.error_estimate,
        evaluations: r.evaluations,
        converged: r.converged,
    })
}

/// `I_q(n)` from the generating function, with a caller-supplied per-site
/// density of states `rho`.
pub fn iq_genfun_small_n(problem: &GenFunProblem, q: u32, rho: f64, tol: &Tolerance) -> Result<QuadratureResult> {
    if q < 2 {
        return Err(Error::Domain(format!("generating-function moments need q >= 2, got {q}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("density of states must be positive, got {rho}")));
    }
    let n = problem.n_sites();
    if n > MAX_GENFUN_SITES {
        return Err(Error::Unsupported(format!(
            "generating-function quadrature supports N <= {MAX_GENFUN_SITES}, got {n}"
        )));
    }
    let pref = 1.0 / (PI * rho * gamma(q as f64 - 1.0));
    let inner = tol.tightened(3.0);
    // absolute target of the outer integrand, in units of the raw integral
    let abs_raw = inner.abs / pref;
    let mut evaluations = 0u64;
    let power = 2 * q as i32 - 2;
    // t_n = e^x; Y only needs the accuracy that survives the t_n^{2q-2} factor
    let r = integrate_with_uncertainty(
        |x| {
            if x > 6.0 {
                return Ok((0.0, 0.0));
            }
            let tn = math::exp(x);
            let c = math::powi(tn, power);
            let y_tol = Tolerance::new(inner.rel, abs_raw / c).with_budget(inner.max_evals);
            let y = y_of_tn(problem, tn, &y_tol)?;
            evaluations += y.evaluations;
            let y = y.require_converged("generating function Y(t_n)")?;
            Ok((c * y.value, c * y.error_estimate))
        },
        &X_AXIS,
        tol,
    )?;
    let out = QuadratureResult {
        value: pref * r.value,
        error_estimate: pref * r.error_estimate,
        evaluations,
        converged: r.converged,
    };
    out.require_converged("generating-function moment")
}

/// Geometry of a two-site problem: `H = [[T11+v1, τ], [τ, T22+v2]]`.
struct TwoSite {
    mean: f64,
    half_diff: f64,
    tau: f64,
    /// density of `a = (v1+v2)/2` and `d = (v1-v2)/2`, each `N(0, w²/2)`
    sigma: f64,
    energy: f64,
    site: usize,
}

impl TwoSite {
    fn from_problem(problem: &GenFunProblem) -> Result<Self> {
        if problem.n_sites() != 2 {
            return Err(Error::Unsupported(format!(
                "the definition oracle handles N = 2 only, got N = {}",
                problem.n_sites()
            )));
        }
        let t = problem.t_matrix.entries();
        Ok(Self {
            mean: 0.5 * (t[(0, 0)] + t[(1, 1)]),
            half_diff: 0.5 * (t[(0, 0)] - t[(1, 1)]),
            tau: t[(0, 1)],
            sigma: problem.w * math::FRAC_1_SQRT_2,
            energy: problem.energy,
            site: problem.site,
        })
    }

    fn density(&self, x: f64) -> f64 {
        let u = x / self.sigma;
        math::exp(-0.5 * u * u) / (SQRT_2PI * self.sigma)
    }

    /// `(r, |f_+(site)|², |f_-(site)|²)` at disorder difference `d`.
    fn split(&self, d: f64) -> (f64, f64, f64) {
        let h = self.half_diff + d;
        let r = math::hypot(h, self.tau);
        let c = if r > 0.0 { h / r } else { 0.0 };
        let c = if self.site == 0 { c } else { -c };
        (r, 0.5 * (1.0 + c), 0.5 * (1.0 - c))
    }

    fn d_points(&self) -> [f64; 3] {
        [f64::NEG_INFINITY, -self.half_diff, f64::INFINITY]
    }
}

fn gaussian(x: f64, eta: f64) -> f64 {
    let u = x / eta;
    math::exp(-0.5 * u * u) / (SQRT_2PI * eta)
}

fn oracle_tol() -> Tolerance {
    Tolerance::new(1e-9, 1e-13)
}

/// `Σ_α ⟨|f_α(n)|^{2q} δ_η(E − E_α)⟩` and `(1/N) Σ_α ⟨δ_η(E − E_α)⟩` for
/// `N = 2`, by 2-D quadrature over the disorder with a Gaussian `δ_η`.
fn broadened_pair(problem: &GenFunProblem, q: f64, eta: f64) -> Result<(f64, f64)> {
    let g = TwoSite::from_problem(problem)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("broadening must be positive, got {eta}")));
    }
    let run = |moment: bool| -> Result<f64> {
        let inner_tol = oracle_tol().tightened(10.0);
        let r = integrate_with_uncertainty(
            |d| {
                let (r, wp, wm) = g.split(d);
                let cp = g.energy - g.mean - r;
                let cm = g.energy - g.mean + r;
                let mut pts = Vec::with_capacity(10);
                pts.push(f64::NEG_INFINITY);
                for c in [cp, cm] {
                    pts.extend_from_slice(&[c - 4.0 * eta, c, c + 4.0 * eta]);
                }
                pts.push(f64::INFINITY);
                pts.sort_by(f64::total_cmp);
                pts.dedup_by(|a, b| *a <= *b);
                let (fp, fm) = if moment {
                    (math::powf(wp, q), math::powf(wm, q))
                } else {
                    (0.5, 0.5)
                };
                let inner = integrate_points(
                    |a| {
                        let m = g.mean + a;
                        g.density(a) * (fp * gaussian(g.energy - m - r, eta) + fm * gaussian(g.energy - m + r, eta))
                    },
                    &pts,
                    &inner_tol,
                )?
                .require_converged("definition oracle inner integral")?;
                Ok((g.density(d) * inner.value, g.density(d) * inner.error_estimate))
            },
            &g.d_points(),
            &oracle_tol(),
        )?
        .require_converged("definition oracle")?;
        Ok(r.value)
    };
    let num = run(true)?;
    let rho = run(false)?;
    Ok((num, rho))
}

/// Broadened density of states per site, `N = 2`.
pub fn dos_definition_oracle(problem: &GenFunProblem, eta: f64) -> Result<f64> {
    Ok(broadened_pair(problem, 1.0, eta)?.1)
}

/// `I_q(n)` from its definition with a Gaussian `δ_η` of width `eta`,
/// numerator and density broadened alike.
pub fn iq_definition_oracle(problem: &GenFunProblem, q: f64, eta: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("moment order must be >= 1, got {q}")));
    }
    let (num, rho) = broadened_pair(problem, q, eta)?;
    if rho <= 0.0 {
        return Err(Error::EmptyWindow {
            lo: problem.energy - eta,
            hi: problem.energy + eta,
        });
    }
    Ok(num / rho)
}

/// Extrapolation of [`iq_definition_oracle`] to `η → 0` from `η`, `η/2`,
/// `η/4`, quadratic in `η²`.
pub fn iq_definition_extrapolated(problem: &GenFunProblem, q: f64, eta: f64) -> Result<f64> {
    let i1 = iq_definition_oracle(problem, q, eta)?;
    let i2 = iq_definition_oracle(problem, q, 0.5 * eta)?;
    let i4 = iq_definition_oracle(problem, q, 0.25 * eta)?;
    Ok(i1 / 45.0 - 4.0 * i2 / 9.0 + 64.0 * i4 / 45.0)
}

// η → 0 limit of the two-site averages: the a-integral collapses on
// a = E − mean ∓ r.
fn exact_pair(problem: &GenFunProblem, q: f64) -> Result<(f64, f64)> {
    let g = TwoSite::from_problem(problem)?;
    let run = |moment: bool| -> Result<f64> {
        Ok(integrate_points(
            |d| {
                let (r, wp, wm) = g.split(d);
                let (fp, fm) = if moment {
                    (math::powf(wp, q), math::powf(wm, q))
                } else {
                    (0.5, 0.5)
                };
                let base = g.energy - g.mean;
                g.density(d) * (fp * g.density(base - r) + fm * g.density(base + r))
            },
            &g.d_points(),
            &oracle_tol(),
        )?
        .require_converged("two-site average")?
        .value)
    };
    let num = run(true)?;
    let rho = run(false)?;
    Ok((num, rho))
}

/// Exact per-site density of states of a two-site problem.
pub fn dos_exact_n2(problem: &GenFunProblem) -> Result<f64> {
    Ok(exact_pair(problem, 1.0)?.1)
}

/// Exact `I_q(n)` of a two-site problem.
pub fn iq_exact_n2(problem: &GenFunProblem, q: f64) -> Result<f64> {
    let (num, rho) = exact_pair(problem, q)?;
    Ok(num / rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tv(v: &[f64]) -> TVector {
        TVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn b_matrix_examples() {
        let tau = 0.3;
        let t3 = HoppingMatrix::from_entries(3, vec![0.0, tau, tau, tau, 0.0, tau, tau, tau, 0.0]).unwrap();
        let b = b_matrix(&t3, &tv(&[1.0, 1.0, 1.0]), 0).unwrap();
        assert!((b[(0, 0)] - 2.0 * tau).abs() < 1e-15);
        assert!((b[(0, 1)] + tau).abs() < 1e-15);

        let s2 = build_simplex_hopping(2).unwrap();
        let b2 = b_matrix(&s2, &tv(&[1.0, 2.0]), 0).unwrap();
        assert!((b2[(0, 0)] - 0.25).abs() < 1e-15);

        let t = tv(&[0.4, -1.3, 2.2]);
        let scaled = tv(&[-1.2, 3.9, -6.6]);
        let (x, y) = (b_matrix(&t3, &t, 1).unwrap(), b_matrix(&t3, &scaled, 1).unwrap());
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(TVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn simplex_determinants() {
        let d = det_b_simplex_closed(&tv(&[1.0, 2.0, 3.0]), 0, 3).unwrap();
        assert!((d - 1.0 / 9.0).abs() < 1e-15);
        let s3 = build_simplex_hopping(3).unwrap();
        let brute = b_matrix(&s3, &tv(&[1.0, 2.0, 3.0]), 0).unwrap().determinant();
        assert!((brute - 1.0 / 9.0).abs() < 1e-15);
        assert!((det_b_simplex_closed(&tv(&[1.0, 2.0]), 0, 2).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(det_b_simplex_closed(&tv(&[1.0, -1.0, 2.0, -2.0]), 0, 4).unwrap(), 0.0);
    }

    #[test]
    fn problem_validation() {
        let s = build_simplex_hopping(2).unwrap();
        assert!(GenFunProblem::new(s, 0.0, 1.0, 0).is_err());
        let p = GenFunProblem::simplex(4, 0.0, 3.0, 1).unwrap();
        assert!((p.energy() + 0.25).abs() < 1e-15);
        assert!(GenFunProblem::simplex(4, 0.0, 3.0, 4).is_err());
        let big = GenFunProblem::simplex(5, 0.0, 3.0, 0).unwrap();
        assert!(matches!(
            iq_genfun_small_n(&big, 2, 0.1, &Tolerance::new(1e-3, 1e-6)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn oracle_normalization() {
        let t = HoppingMatrix::from_entries(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let p = GenFunProblem::new(t, 0.3, 1.2, 0).unwrap();
        assert!((iq_definition_oracle(&p, 1.0, 0.1).unwrap() - 1.0).abs() < 1e-9);
        assert!((iq_exact_n2(&p, 1.0).unwrap() - 1.0).abs() < 1e-9);
    }
}
