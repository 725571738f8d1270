use proptest::prelude::*;
use simloc_core::ensemble::{estimate_dos0, run_ensemble};
use simloc_core::genfun::{
    b_hat, b_matrix, det_b_simplex_closed, dos_exact_n2, iq_definition_extrapolated, iq_definition_oracle,
    iq_exact_n2, iq_genfun_small_n, y_of_tn, zero_mode, GenFunProblem, TVector,
};
use simloc_core::linalg::norm2;
use simloc_core::model::{build_simplex_hopping, HoppingMatrix, ModelParams};
use simloc_core::quadrature::Tolerance;

fn component() -> impl Strategy<Value = f64> {
    (0.1f64..2.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn two_site(w: f64) -> GenFunProblem {
    let t = HoppingMatrix::from_entries(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
    GenFunProblem::new(t, 0.0, w, 0).unwrap()
}

#[test]
fn generating_function_matches_definition_at_n2() {
    let p = two_site(1.0);
    let rho = dos_exact_n2(&p).unwrap();
    for q in [2u32, 3] {
        let g = iq_genfun_small_n(&p, q, rho, &Tolerance::new(1e-8, 1e-11)).unwrap();
        let exact = iq_exact_n2(&p, q as f64).unwrap();
        let oracle = iq_definition_extrapolated(&p, q as f64, 0.2).unwrap();
        assert!((g.value - exact).abs() < 1e-7, "q={q}: {} vs {exact}", g.value);
        assert!((oracle - exact).abs() < 1e-3 * exact, "q={q}: {oracle} vs {exact}");
    }
}

#[test]
fn definition_oracle_limits() {
    let p = two_site(1.0);
    for eta in [0.2, 0.05] {
        assert!((iq_definition_oracle(&p, 1.0, eta).unwrap() - 1.0).abs() < 1e-9);
    }
    let a = iq_definition_oracle(&p, 2.0, 0.1).unwrap();
    let b = iq_definition_oracle(&p, 2.0, 0.05).unwrap();
    assert!((a - b).abs() < 0.01 * b);
    let strong = iq_definition_extrapolated(&two_site(50.0), 2.0, 10.0).unwrap();
    assert!((strong - 1.0).abs() <= 0.02, "{strong}");
}

#[test]
fn two_site_monte_carlo() {
    let p = two_site(1.0);
    let exact = iq_exact_n2(&p, 2.0).unwrap();
    let params = ModelParams::new(2, 1.0, 0.0, 3).unwrap();
    let window = simloc_core::ensemble::EnergyWindow::from_factor(0.0, 1.0, 0.05).unwrap();
    let plan =
        simloc_core::ensemble::EnsemblePlan::new(params, p.t_matrix().clone(), 40_000, &[2.0], window).unwrap();
    let r = simloc_core::ensemble::run_plan(&plan).unwrap();
    let m = &r.moments[0];
    assert!((m.estimate - exact).abs() < 3.0 * m.std_error, "{} +- {} vs {exact}", m.estimate, m.std_error);
}

#[test]
fn unsupported_sizes() {
    let p = GenFunProblem::simplex(6, 0.0, 1.0, 0).unwrap();
    assert!(iq_genfun_small_n(&p, 2, 0.1, &Tolerance::new(1e-3, 1e-6)).is_err());
    assert!(iq_definition_oracle(&GenFunProblem::simplex(4, 0.0, 1.0, 0).unwrap(), 2.0, 0.1).is_err());
    assert!(det_b_simplex_closed(&TVector::new(vec![1.0, 2.0]).unwrap(), 0, 3).is_err());
}

#[test]
fn simplex_site_symmetry() {
    let tol = Tolerance::new(1e-3, 1e-9);
    for tn in [0.4, 1.2] {
        let a = y_of_tn(&GenFunProblem::simplex(4, 0.0, 3.0, 0).unwrap(), tn, &tol).unwrap();
        let b = y_of_tn(&GenFunProblem::simplex(4, 0.0, 3.0, 2).unwrap(), tn, &tol).unwrap();
        assert!((a.value - b.value).abs() <= a.error_estimate + b.error_estimate);
    }
}

// About four minutes on one core.
#[test]
#[ignore]
fn simplex_n4_against_monte_carlo() {
    let params = ModelParams::new(4, 3.0, 0.0, 7).unwrap();
    let r = run_ensemble(params, 200_000, &[2.0], 0.05).unwrap();
    let m = &r.moments[0];
    let (rho, rho_se) = estimate_dos0(&r.dos, &m.window).unwrap();
    let p = GenFunProblem::simplex(4, 0.0, 3.0, 0).unwrap();
    let g = iq_genfun_small_n(&p, 2, rho, &Tolerance::new(1e-2, 1e-3)).unwrap();
    let sigma = (g.value * rho_se / rho).hypot(g.error_estimate).hypot(m.std_error);
    assert!((g.value - m.estimate).abs() <= 3.0 * sigma, "{} vs {} +- {sigma}", g.value, m.estimate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_determinant(n in 2usize..9, raw in prop::collection::vec(component(), 8), site in 0usize..8) {
        let t = TVector::new(raw[..n].to_vec()).unwrap();
        let site = site % n;
        let closed = det_b_simplex_closed(&t, site, n).unwrap();
        let brute = b_matrix(&build_simplex_hopping(n).unwrap(), &t, site).unwrap().determinant();
        prop_assert!((closed - brute).abs() <= 1e-10 * closed.abs(), "{} vs {}", closed, brute);
    }

    #[test]
    fn zero_mode_residual(n in 2usize..9, raw in prop::collection::vec(component(), 8),
                          hop in prop::collection::vec(-1.0f64..1.0, 64)) {
        let t = TVector::new(raw[..n].to_vec()).unwrap();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                e[i * n + j] = hop[i * 8 + j];
                e[j * n + i] = hop[i * 8 + j];
            }
        }
        let tm = HoppingMatrix::from_entries(n, e).unwrap();
        let r = b_hat(&tm, &t).unwrap().matvec(&zero_mode(&t));
        prop_assert!(norm2(&r) <= 1e-12);
    }

    #[test]
    fn b_matrix_scale_invariance(raw in prop::collection::vec(component(), 4), c in component()) {
        let t = TVector::new(raw.clone()).unwrap();
        let ct = TVector::new(raw.iter().map(|x| c * x).collect()).unwrap();
        let tm = build_simplex_hopping(4).unwrap().without_diagonal();
        let (a, b) = (b_matrix(&tm, &t, 1).unwrap(), b_matrix(&tm, &ct, 1).unwrap());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }
}
