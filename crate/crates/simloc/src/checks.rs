//! Verification suites behind `genfun-check` and `selftest`.

use std::fmt;

use simloc_core::analytic::{iq_thermo_via, AnalyticMomentQuery, ThermoPath};
use simloc_core::ensemble::{estimate_dos0, EnergyWindow, EnsemblePlan};
use simloc_core::genfun::{
    b_hat, b_matrix, det_b_simplex_closed, dos_definition_oracle, iq_definition_extrapolated, iq_definition_oracle,
    iq_genfun_small_n, y_of_tn, zero_mode, GenFunProblem, TVector,
};
use simloc_core::linalg::norm2;
use simloc_core::math::SQRT_PI;
use simloc_core::model::{build_simplex_hopping, HoppingMatrix, ModelParams};
use simloc_core::quadrature::{integrate_points, Tolerance};
use simloc_core::rng::GaussianStream;
use simloc_core::specfun::{erf, f_q_closed, f_q_power2_series, f_q_tilde, gamma};

use crate::run::run_plan_parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

impl fmt::Display for CheckItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Components uniform in `[-2, -0.1] ∪ [0.1, 2]`.
pub fn random_t(rng: &mut GaussianStream, n: usize) -> TVector {
    let v = (0..n)
        .map(|_| {
            let m = 0.1 + 1.9 * rng.uniform();
            if rng.uniform() < 0.5 {
                -m
            } else {
                m
            }
        })
        .collect();
    TVector::new(v).expect("components are bounded away from zero")
}

/// Largest relative gap between the closed-form and LU determinants.
pub fn determinant_identity_error(seed: u64, sizes: std::ops::RangeInclusive<usize>, samples: usize) -> f64 {
    let mut rng = GaussianStream::new(seed);
    let mut worst = 0.0f64;
    for n in sizes {
        let t_full = build_simplex_hopping(n).expect("valid size");
        for _ in 0..samples {
            let t = random_t(&mut rng, n);
            let site = (rng.uniform() * n as f64) as usize % n;
            let closed = det_b_simplex_closed(&t, site, n).expect("valid t");
            let brute = b_matrix(&t_full, &t, site).expect("valid t").determinant();
            worst = worst.max((closed - brute).abs() / closed.abs());
        }
    }
    worst
}

/// Largest `‖B̂ z‖` over random `t`, for the simplex and random zero-diagonal `T`.
pub fn zero_mode_residual(seed: u64, sizes: std::ops::RangeInclusive<usize>, samples: usize) -> f64 {
    let mut rng = GaussianStream::new(seed);
    let mut worst = 0.0f64;
    for n in sizes {
        let simplex = build_simplex_hopping(n).expect("valid size");
        for k in 0..samples {
            let t_matrix = if k % 2 == 0 {
                simplex.clone()
            } else {
                let mut e = vec![0.0; n * n];
                for i in 0..n {
                    for j in i + 1..n {
                        let x = rng.standard_normal();
                        e[i * n + j] = x;
                        e[j * n + i] = x;
                    }
                }
                HoppingMatrix::from_entries(n, e).expect("symmetric")
            };
            let t = random_t(&mut rng, n);
            let z = zero_mode(&t);
            let r = b_hat(&t_matrix, &t).expect("valid t").matvec(&z);
            worst = worst.max(norm2(&r));
        }
    }
    worst
}

/// `F_q(z) = ∫ y^{2q−2} e^{−y²} cos(2zy) dy` by quadrature along the shifted
/// line `y = u + iz`, where the integrand no longer oscillates:
/// `F_q(z) = e^{−z²} ∫ Re[(u + iz)^{2q−2}] e^{−u²} du`.
pub fn f_q_direct(q: u32, z: f64) -> simloc_core::Result<f64> {
    let p = 2 * q - 2;
    let r = integrate_points(
        |u| {
            let (mut re, mut im) = (1.0, 0.0);
            for _ in 0..p {
                (re, im) = (re * u - im * z, re * z + im * u);
            }
            re * (-u * u).exp()
        },
        &[f64::NEG_INFINITY, -3.0, 0.0, 3.0, f64::INFINITY],
        &Tolerance::new(1e-14, 1e-300),
    )?;
    Ok((-z * z).exp() * r.value)
}

/// 20 points spread over `[0, 5]`.
pub fn f_q_grid() -> impl Iterator<Item = f64> {
    (0..20).map(|k| 5.0 * k as f64 / 19.0)
}

/// The standard two-site problem: off-diagonal 1/2, zero diagonal.
pub fn two_site_problem(energy: f64, w: f64) -> GenFunProblem {
    let t = HoppingMatrix::from_entries(2, vec![0.0, 0.5, 0.5, 0.0]).expect("valid matrix");
    GenFunProblem::new(t, energy, w, 0).expect("valid problem")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeWay {
    pub oracle: f64,
    pub genfun: f64,
    pub genfun_error: f64,
    pub monte_carlo: f64,
    pub mc_error: f64,
    pub rho: f64,
}

impl ThreeWay {
    /// Pairwise agreement within 2% or 3 combined standard errors.
    pub fn agrees(&self) -> bool {
        let pair = |a: f64, ea: f64, b: f64, eb: f64| {
            let rel = (a - b).abs() / b.abs();
            let sig = (ea * ea + eb * eb).sqrt();
            rel <= 0.02 || (a - b).abs() <= 3.0 * sig
        };
        pair(self.oracle, 0.0, self.genfun, self.genfun_error)
            && pair(self.oracle, 0.0, self.monte_carlo, self.mc_error)
            && pair(self.genfun, self.genfun_error, self.monte_carlo, self.mc_error)
    }
}

/// Definition oracle, generating function and Monte Carlo for `N = 2`.
pub fn three_way_n2(
    pool: &rayon::ThreadPool,
    w: f64,
    q: u32,
    realizations: u64,
    seed: u64,
) -> simloc_core::Result<ThreeWay> {
    let problem = two_site_problem(0.0, w);
    let eta = 0.2 * w;
    let oracle = iq_definition_extrapolated(&problem, q as f64, eta)?;
    let (r1, r2, r4) = (
        dos_definition_oracle(&problem, eta)?,
        dos_definition_oracle(&problem, 0.5 * eta)?,
        dos_definition_oracle(&problem, 0.25 * eta)?,
    );
    let rho = r1 / 45.0 - 4.0 * r2 / 9.0 + 64.0 * r4 / 45.0;
    let g = iq_genfun_small_n(&problem, q, rho, &Tolerance::new(1e-8, 1e-11))?;

    let params = ModelParams::new(2, w, 0.0, seed)?;
    let window = EnergyWindow::from_factor(0.0, w, simloc_core::ensemble::DEFAULT_WINDOW_FACTOR)?;
    let plan = EnsemblePlan::new(
        params,
        problem.t_matrix().clone(),
        realizations,
        &[q as f64],
        window,
    )?;
    let mc = run_plan_parallel(pool, &plan)?;
    Ok(ThreeWay {
        oracle,
        genfun: g.value,
        genfun_error: g.error_estimate,
        monte_carlo: mc.moments[0].estimate,
        mc_error: mc.moments[0].std_error,
        rho,
    })
}

/// `I_2` of the `N = 4` simplex at `E = 0`, `w = 3` from the generating
/// function (with the Monte Carlo density) and from Monte Carlo.
pub fn simplex_n4(pool: &rayon::ThreadPool, realizations: u64, seed: u64) -> simloc_core::Result<(f64, f64, f64, f64)> {
    let w = 3.0;
    let params = ModelParams::new(4, w, 0.0, seed)?;
    let plan = EnsemblePlan::simplex(params, realizations, &[2.0], simloc_core::ensemble::DEFAULT_WINDOW_FACTOR)?;
    let mc = run_plan_parallel(pool, &plan)?;
    let m = &mc.moments[0];
    let (rho, rho_se) = estimate_dos0(&mc.dos, &m.window)?;
    let problem = GenFunProblem::simplex(4, 0.0, w, 0)?;
    let g = iq_genfun_small_n(&problem, 2, rho, &Tolerance::new(1e-2, 1e-3))?;
    let sigma_g = (g.value * rho_se / rho).hypot(g.error_estimate);
    Ok((g.value, sigma_g, m.estimate, m.std_error))
}

pub fn genfun_suite(pool: &rayon::ThreadPool, include_slow: bool) -> Vec<CheckItem> {
    let mut out = Vec::new();

    let tau = 0.3;
    let t3 = HoppingMatrix::from_entries(3, vec![0.0, tau, tau, tau, 0.0, tau, tau, tau, 0.0]).expect("valid");
    let ones = TVector::new(vec![1.0; 3]).expect("valid");
    let b = b_matrix(&t3, &ones, 0).expect("valid");
    let s2 = build_simplex_hopping(2).expect("valid");
    let b2 = b_matrix(&s2, &TVector::new(vec![1.0, 2.0]).expect("valid"), 0).expect("valid");
    let ok = (b[(0, 0)] - 2.0 * tau).abs() < 1e-15 && (b[(0, 1)] + tau).abs() < 1e-15 && (b2[(0, 0)] - 0.25).abs() < 1e-15;
    out.push(CheckItem::new(
        "B-matrix examples",
        ok,
        format!("diag {:.6}, offdiag {:.6}, simplex N=2 {:.6}", b[(0, 0)], b[(0, 1)], b2[(0, 0)]),
    ));

    let d = det_b_simplex_closed(&TVector::new(vec![1.0, 2.0, 3.0]).expect("valid"), 0, 3).expect("valid");
    let d0 = det_b_simplex_closed(&TVector::new(vec![1.0, -1.0, 2.0, -2.0]).expect("valid"), 0, 4).expect("valid");
    out.push(CheckItem::new(
        "closed-form determinant examples",
        (d - 1.0 / 9.0).abs() < 1e-15 && d0 == 0.0,
        format!("t=(1,2,3): {d:.12}, t=(1,-1,2,-2): {d0}"),
    ));

    let worst = determinant_identity_error(11, 2..=8, 100);
    out.push(CheckItem::new(
        "determinant identity N=2..8",
        worst <= 1e-10,
        format!("max relative error {worst:.3e} (limit 1e-10)"),
    ));

    let res = zero_mode_residual(12, 2..=8, 100);
    out.push(CheckItem::new(
        "zero mode",
        res <= 1e-12,
        format!("max |B z| {res:.3e} (limit 1e-12)"),
    ));

    let p = two_site_problem(0.0, 1.0);
    match (
        iq_definition_oracle(&p, 1.0, 0.1),
        iq_definition_oracle(&p, 2.0, 0.1),
        iq_definition_oracle(&p, 2.0, 0.05),
    ) {
        (Ok(i1), Ok(a), Ok(b)) => {
            out.push(CheckItem::new(
                "definition oracle normalization",
                (i1 - 1.0).abs() < 1e-8,
                format!("I_1 = {i1:.12}"),
            ));
            let rel = (a - b).abs() / b;
            out.push(CheckItem::new(
                "definition oracle eta stability",
                rel < 0.01,
                format!("eta=0.1w {a:.8}, eta=0.05w {b:.8}, relative change {rel:.2e}"),
            ));
        }
        (a, b, c) => {
            let e = [a.err(), b.err(), c.err()].into_iter().flatten().next().expect("one failed");
            out.push(CheckItem::failed("definition oracle", e));
        }
    }
    match iq_definition_extrapolated(&two_site_problem(0.0, 50.0), 2.0, 10.0) {
        Ok(v) => out.push(CheckItem::new(
            "definition oracle strong disorder",
            (v - 1.0).abs() <= 0.02,
            format!("w=50: I_2 = {v:.6}"),
        )),
        Err(e) => out.push(CheckItem::failed("definition oracle strong disorder", e)),
    }

    match three_way_n2(pool, 1.0, 2, 100_000, 7) {
        Ok(t) => out.push(CheckItem::new(
            "N=2 three-way agreement",
            t.agrees(),
            format!(
                "oracle {:.6}, generating function {:.6}, Monte Carlo {:.6} +- {:.6}",
                t.oracle, t.genfun, t.monte_carlo, t.mc_error
            ),
        )),
        Err(e) => out.push(CheckItem::failed("N=2 three-way agreement", e)),
    }

    let tol = Tolerance::new(1e-3, 1e-9);
    let sym = [0.5, 1.5].iter().try_fold(0.0f64, |acc, &tn| {
        let a = y_of_tn(&GenFunProblem::simplex(4, 0.0, 3.0, 0)?, tn, &tol)?;
        let b = y_of_tn(&GenFunProblem::simplex(4, 0.0, 3.0, 1)?, tn, &tol)?;
        let gap = (a.value - b.value).abs() / (a.error_estimate + b.error_estimate);
        Ok::<f64, simloc_core::Error>(acc.max(gap))
    });
    match sym {
        Ok(g) => out.push(CheckItem::new(
            "N=4 site symmetry of Y(t_n)",
            g <= 1.0,
            format!("largest gap {g:.3} of the summed error estimates"),
        )),
        Err(e) => out.push(CheckItem::failed("N=4 site symmetry of Y(t_n)", e)),
    }

    if include_slow {
        match simplex_n4(pool, 200_000, 7) {
            Ok((g, sg, m, sm)) => {
                let sig = (g - m) / sg.hypot(sm);
                out.push(CheckItem::new(
                    "N=4 simplex vs Monte Carlo",
                    sig.abs() <= 3.0,
                    format!("generating function {g:.5} +- {sg:.5}, Monte Carlo {m:.5} +- {sm:.5} ({sig:+.2} sigma)"),
                ));
            }
            Err(e) => out.push(CheckItem::failed("N=4 simplex vs Monte Carlo", e)),
        }
    }
    out
}

pub fn selftest_suite() -> Vec<CheckItem> {
    let mut out = Vec::new();

    let g = [
        (gamma(0.5), SQRT_PI),
        (gamma(5.0), 24.0),
        (gamma(10.5), 654_729_075.0 / 1024.0 * SQRT_PI),
    ];
    let worst = g.iter().map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    out.push(CheckItem::new("gamma values", worst < 1e-13, format!("max relative error {worst:.2e}")));

    let e1 = erf(1.0);
    out.push(CheckItem::new(
        "erf(1)",
        (e1 - 0.842_700_792_949_714_9).abs() < 1e-15,
        format!("{e1:.16}"),
    ));

    let gauss = integrate_points(
        |x| (-0.5 * x * x).exp(),
        &[f64::NEG_INFINITY, 0.0, f64::INFINITY],
        &Tolerance::new(1e-12, 1e-15),
    );
    match gauss {
        Ok(r) => {
            let want = (2.0 * std::f64::consts::PI).sqrt();
            out.push(CheckItem::new(
                "quadrature: Gaussian on the line",
                (r.value - want).abs() < 1e-11,
                format!("{:.15} vs {want:.15}", r.value),
            ))
        }
        Err(e) => out.push(CheckItem::failed("quadrature: Gaussian on the line", e)),
    }

    let mut worst = 0.0f64;
    let mut fail = None;
    for q in 2..=6u32 {
        for z in f_q_grid() {
            match (f_q_closed(q, z), f_q_direct(q, z)) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / b.abs()),
                (Err(e), _) | (_, Err(e)) => fail = Some(e),
            }
        }
    }
    out.push(match fail {
        Some(e) => CheckItem::failed("F_q closed form vs Gaussian integral", e),
        None => CheckItem::new(
            "F_q closed form vs Gaussian integral",
            worst <= 1e-8,
            format!("q=2..6, 20 points in [0, 5]: max relative error {worst:.2e}"),
        ),
    });

    let mut worst = 0.0f64;
    let mut fail = None;
    for q in 2..=6u32 {
        for z in f_q_grid() {
            match (f_q_closed(q, z), f_q_tilde(q as f64, z)) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => fail = Some(e),
            }
        }
    }
    out.push(match fail {
        Some(e) => CheckItem::failed("F_q Hermite form vs Kummer form", e),
        None => CheckItem::new(
            "F_q Hermite form vs Kummer form",
            worst <= 1e-9,
            format!("max difference {worst:.2e}"),
        ),
    });

    let mut worst = 0.0f64;
    for q in 2..=6u32 {
        let r = integrate_points(
            |z| f_q_closed(q, z).unwrap_or(f64::NAN),
            &[0.0, 1.0, 3.0, f64::INFINITY],
            &Tolerance::new(1e-12, 1e-14),
        );
        worst = worst.max(r.map(|r| r.value.abs()).unwrap_or(f64::INFINITY));
    }
    out.push(CheckItem::new(
        "F_q sum rule",
        worst <= 1e-8,
        format!("max |integral of F_q over z| {worst:.2e}"),
    ));

    let f2 = f_q_closed(2, 0.0).unwrap_or(f64::NAN);
    let f2_printed = f_q_power2_series(2, 0.0).unwrap_or(f64::NAN);
    let f2_direct = f_q_direct(2, 0.0).unwrap_or(f64::NAN);
    out.push(CheckItem::new(
        "F_2(0) forms",
        (f2 - f2_direct).abs() < 1e-12,
        format!("Hermite form {f2:.10}, 2^p coefficient form {f2_printed:.10}, Gaussian integral {f2_direct:.10}"),
    ));

    let query = AnalyticMomentQuery::new(3.0, 3.0);
    let paths = query.and_then(|q| Ok((iq_thermo_via(&q, ThermoPath::Hermite)?, iq_thermo_via(&q, ThermoPath::Kummer)?)));
    match paths {
        Ok((h, k)) => out.push(CheckItem::new(
            "thermodynamic moment: Hermite vs Kummer path",
            (h.value - k.value).abs() <= 1e-7 * h.value,
            format!("q=3, w=3: {:.10} vs {:.10}", h.value, k.value),
        )),
        Err(e) => out.push(CheckItem::failed("thermodynamic moment paths", e)),
    }
    out
}
