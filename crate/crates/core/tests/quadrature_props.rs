use proptest::prelude::*;
use simloc_core::quadrature::{integrate_1d, integrate_2d, integrate_nd, Tolerance};

const INF: f64 = f64::INFINITY;

fn tol() -> Tolerance {
    Tolerance::new(1e-11, 1e-13)
}

#[test]
fn two_dimensional_examples() {
    let r = integrate_2d(|x, y| x * y, &[0.0, 1.0], &[0.0, 1.0], &tol()).unwrap();
    assert!((r.value - 0.25).abs() < 1e-10);
    let r = integrate_2d(|x, y| (-x * x - y * y).exp(), &[-INF, 0.0, INF], &[-INF, 0.0, INF], &tol()).unwrap();
    assert!((r.value - std::f64::consts::PI).abs() < 1e-8);
    let r = integrate_2d(
        |x, y| (-x - y).exp() * (x + y).cos(),
        &[0.0, INF],
        &[0.0, INF],
        &Tolerance::new(1e-10, 1e-10),
    )
    .unwrap();
    assert!(r.value.abs() < 1e-8, "{}", r.value);
}

#[test]
fn three_dimensional_examples() {
    let unit: &[f64] = &[0.0, 1.0];
    let r = integrate_nd(|_| 1.0, &[unit, unit, unit], &tol()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-14);
    let line: &[f64] = &[-INF, 0.0, INF];
    let t = Tolerance::new(1e-8, 1e-10);
    let r = integrate_nd(|x| (-x.iter().map(|v| v * v).sum::<f64>()).exp(), &[line, line, line], &t).unwrap();
    assert!((r.value - std::f64::consts::PI.powf(1.5)).abs() < 1e-6);
    let r = integrate_nd(
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (-r2).exp() * r2
        },
        &[line, line],
        &t,
    )
    .unwrap();
    assert!((r.value - std::f64::consts::PI).abs() < 1e-6);
    assert!(integrate_nd(|_| 1.0, &[unit, unit, unit, unit], &t).is_err());
}

#[test]
fn exhausted_budget_is_reported() {
    let r = integrate_1d(|x| (1.0 / x).sin() / x.sqrt(), 1e-6, 1.0, &Tolerance::new(1e-14, 1e-16).with_budget(300))
        .unwrap();
    assert!(!r.converged);
    assert!(r.require_converged("oscillatory").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.2f64..3.0, k in 0.0f64..4.0) {
        let f = |x: f64| (-c * x * x).exp();
        let g = |x: f64| (-x.abs()).exp() * (k * x).cos();
        let pts = [-INF, 0.0, INF];
        let rf = simloc_core::quadrature::integrate_points(f, &pts, &tol()).unwrap();
        let rg = simloc_core::quadrature::integrate_points(g, &pts, &tol()).unwrap();
        let rs = simloc_core::quadrature::integrate_points(|x| a * f(x) + b * g(x), &pts, &tol()).unwrap();
        let bound = a.abs() * rf.error_estimate + b.abs() * rg.error_estimate + rs.error_estimate + 1e-14;
        prop_assert!((rs.value - (a * rf.value + b * rg.value)).abs() <= bound);
    }

    #[test]
    fn reflection(c in 0.1f64..5.0, p in 0u32..4) {
        let f = |x: f64| x.powi(2 * p as i32) * (-c * x * x).exp();
        let whole = integrate_1d(f, -INF, INF, &tol()).unwrap();
        let half = integrate_1d(f, 0.0, INF, &tol()).unwrap();
        let bound = whole.error_estimate + 2.0 * half.error_estimate + 1e-13 * whole.value;
        prop_assert!((whole.value - 2.0 * half.value).abs() <= bound);
    }

    #[test]
    fn deterministic(c in 0.1f64..5.0, k in 0.0f64..10.0) {
        let f = |x: f64| (-c * x).exp() * (k * x).cos();
        let a = integrate_1d(f, 0.0, INF, &tol()).unwrap();
        let b = integrate_1d(f, 0.0, INF, &tol()).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
        // closed form c / (c² + k²)
        prop_assert!((a.value - c / (c * c + k * k)).abs() < 1e-9 * (1.0 + a.value.abs()));
    }
}
