use simloc_core::analytic::{f_kernel, g_hat, g_kernel, KernelArgs};
use simloc_core::specfun::{erf, f_q_closed, MomentOrder};

fn f(s: f64, theta: f64) -> f64 {
    f_kernel(KernelArgs::new(s, theta)).unwrap()
}

fn order_fit(d: &[f64]) -> f64 {
    // successive halvings of the small parameter
    let a = (d[0] / d[1]).log2();
    let b = (d[1] / d[2]).log2();
    a.min(b)
}

#[test]
fn f_first_order_expansion() {
    let (t, alpha) = (1.0f64, 1.0f64);
    let z = alpha / (2.0 * t);
    let d: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&eps| {
            let lead = 1.0
                - std::f64::consts::SQRT_2 * eps * t * (-z * z).exp()
                - (std::f64::consts::PI / 2.0).sqrt() * eps * alpha * erf(z);
            (f(eps * t, eps * alpha) - lead).abs()
        })
        .collect();
    let p = order_fit(&d);
    assert!(p >= 1.9, "order {p}, remainders {d:?}");
}

#[test]
fn g_large_n_scaling() {
    let (t, alpha) = (1.5f64, 2.0f64);
    let q = MomentOrder::integer(2).unwrap();
    let fq = f_q_closed(2, alpha / (2.0 * t)).unwrap();
    let d: Vec<f64> = [20.0f64, 40.0, 80.0]
        .iter()
        .map(|&n| {
            let g = g_kernel(KernelArgs::new(t / n, alpha / n), &q).unwrap();
            (g * n.powi(-3) * t.powi(3) - fq).abs()
        })
        .collect();
    let p = order_fit(&d);
    assert!(p >= 1.9, "order {p}, remainders {d:?}");
}

#[test]
fn maximum_at_zero_theta() {
    let q = MomentOrder::integer(3).unwrap();
    for i in 0..10 {
        let s = 0.05 + 0.3 * i as f64;
        let f0 = f(s, 0.0);
        assert!((f0 - (-std::f64::consts::SQRT_2 * s).exp()).abs() < 1e-12);
        let g0 = g_kernel(KernelArgs::new(s, 0.0), &q).unwrap();
        for j in 1..=10 {
            let theta = 0.4 * j as f64;
            assert!(f(s, theta).abs() <= f0 + 1e-14, "f at s={s} theta={theta}");
            let g = g_kernel(KernelArgs::new(s, theta), &q).unwrap();
            assert!(g.abs() <= g0 * (1.0 + 1e-12), "g at s={s} theta={theta}");
        }
    }
}

#[test]
fn kernels_are_even() {
    let q = MomentOrder::new(2.5).unwrap();
    for &(s, th) in &[(0.3, 0.9), (1.2, 4.0), (0.05, 0.2)] {
        let g = g_kernel(KernelArgs::new(s, th), &q).unwrap();
        assert_eq!(g, g_kernel(KernelArgs::new(-s, th), &q).unwrap());
        assert_eq!(g, g_kernel(KernelArgs::new(s, -th), &q).unwrap());
        assert_eq!(f(s, th), f(-s, -th));
    }
}

#[test]
fn g_hat_reduces_to_f_q_at_small_s() {
    // ĝ(s, z) → F_q(z) as s → 0
    let q = MomentOrder::integer(3).unwrap();
    for &z in &[0.0, 0.6, 1.7] {
        let a = g_hat(1e-7, z, &q).unwrap();
        let b = f_q_closed(3, z).unwrap();
        assert!((a - b).abs() < 1e-5, "z={z}: {a} vs {b}");
    }
}
