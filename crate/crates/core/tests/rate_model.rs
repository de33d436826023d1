use ppp_ase::rate_model::{self, NetworkConfig, RateModel};
use proptest::prelude::*;

fn model() -> RateModel {
    RateModel::new(4.0).unwrap()
}

#[test]
fn lower_bound_below_exact_on_integer_grid() {
    let m = model();
    for big_m in 1..=20u32 {
        for k in 1..=big_m {
            let exact = m.mean_rate_exact(big_m, k).unwrap().mean_rate;
            let lb = m.mean_rate_lower_bound(big_m as f64, k as f64).unwrap().mean_rate;
            assert!(lb <= exact * (1.0 + 1e-10), "M={big_m} K={k}: lb {lb} > exact {exact}");
            assert!(exact > 0.0);
        }
    }
}

#[test]
fn exact_rate_monotone_in_m_and_k() {
    let m = model();
    for big_m in 2..=16u32 {
        for k in 1..big_m {
            let here = m.mean_rate_exact(big_m, k).unwrap().mean_rate;
            let more_users = m.mean_rate_exact(big_m, k + 1).unwrap().mean_rate;
            let more_antennas = m.mean_rate_exact(big_m + 1, k).unwrap().mean_rate;
            assert!(more_users < here, "not decreasing in K at M={big_m} K={k}");
            assert!(more_antennas > here, "not increasing in M at M={big_m} K={k}");
        }
    }
}

#[test]
fn k_times_rate_unimodal_in_k() {
    let m = model();
    for big_m in [4u32, 8, 12, 20, 32] {
        let vals: Vec<f64> = (1..=big_m)
            .map(|k| k as f64 * m.mean_rate_exact(big_m, k).unwrap().mean_rate)
            .collect();
        let peak = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(vals[..=peak].windows(2).all(|w| w[1] > w[0]), "M={big_m}: {vals:?}");
        assert!(vals[peak..].windows(2).all(|w| w[1] < w[0]), "M={big_m}: {vals:?}");
    }
}

#[test]
fn single_antenna_reference() {
    // M = K = 1, α = 4: independent high-precision evaluation of the defining integral.
    let r = rate_model::mean_rate_exact(1, 1, 4.0).unwrap();
    assert!((r - 1.488_987_624_665_826).abs() < 1e-10, "{r}");
}

#[test]
fn lower_bound_hessian_is_negative_semidefinite() {
    // f(M, K) = K·E̲(M, K) is homogeneous of degree one, so one eigenvalue is
    // zero up to finite-difference noise; the other must be negative.
    let m = model();
    let f = |a: f64, b: f64| b * m.mean_rate_lower_bound(a, b).unwrap().mean_rate;
    let h = 1e-2;
    for big_m in (4..=40).step_by(4) {
        for frac in [0.2, 0.4, 0.6, 0.8] {
            let (a, b) = (big_m as f64, frac * big_m as f64);
            let f0 = f(a, b);
            let faa = (f(a + h, b) - 2.0 * f0 + f(a - h, b)) / (h * h);
            let fbb = (f(a, b + h) - 2.0 * f0 + f(a, b - h)) / (h * h);
            let fab = (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h)) / (4.0 * h * h);
            let tr = faa + fbb;
            let det = faa * fbb - fab * fab;
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            let top = 0.5 * tr + disc;
            let scale = faa.abs() + fbb.abs() + fab.abs();
            assert!(top <= 1e-4 * scale, "M={a} K={b}: eigenvalues {} {}", top, 0.5 * tr - disc);
            assert!(0.5 * tr - disc < 0.0);
        }
    }
}

#[test]
fn ase_linear_in_density() {
    let m = model();
    let base = NetworkConfig::new(1.0, 12.0, 6.0, 4.0).unwrap();
    let t1 = m.ase_exact(&base).unwrap();
    let t1_lb = m.ase_lower_bound(&base).unwrap();
    for lam in [0.01, 3.0, 250.0] {
        let cfg = NetworkConfig { lambda_b: lam, ..base };
        assert!((m.ase_exact(&cfg).unwrap() - lam * t1).abs() <= 1e-12 * lam * t1);
        assert!((m.ase_lower_bound(&cfg).unwrap() - lam * t1_lb).abs() <= 1e-12 * lam * t1_lb);
    }
}

#[test]
fn relaxed_m_agrees_with_integer_m() {
    let m = model();
    for (big_m, k) in [(4u32, 2u32), (8, 4), (9, 7), (30, 6)] {
        let a = m.mean_rate_exact(big_m, k).unwrap().mean_rate;
        let b = m.mean_rate_exact_relaxed_m(big_m as f64, k).unwrap().mean_rate;
        assert!((a - b).abs() <= 1e-12 * a);
    }
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lower_bound_depends_only_on_ratio(m in 1.0f64..60.0, u in 0.02f64..1.0, c in 0.1f64..10.0) {
        let k = u * m;
        let a = rate_model::mean_rate_lower_bound(m, k, 4.0).unwrap();
        let b = rate_model::mean_rate_lower_bound(c * m, c * k, 4.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn lower_bound_decreasing_in_load(m in 2.0f64..60.0, u in 0.02f64..0.95, du in 0.005f64..0.05) {
        let a = rate_model::mean_rate_lower_bound(m, u * m, 4.0).unwrap();
        let b = rate_model::mean_rate_lower_bound(m, (u + du).min(1.0) * m, 4.0).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn exact_derivative_in_m(extra in 0.5f64..30.0, k in 1u32..10, alpha in 2.5f64..6.0) {
        let m = k as f64 + extra;
        let model = RateModel::new(alpha).unwrap();
        let d = model.d_mean_rate_exact_dm(m, k).unwrap();
        let fd = central(|x| model.mean_rate_exact_relaxed_m(x, k).unwrap().mean_rate, m, 1e-3);
        prop_assert!((d - fd).abs() <= 1e-4 * d.abs(), "{d} vs {fd}");
    }

    #[test]
    fn lower_bound_derivatives(m in 4.0f64..40.0, u in 0.1f64..0.9, alpha in 2.5f64..6.0) {
        let model = RateModel::new(alpha).unwrap();
        let k = u * m;
        let h = 1e-3 * k;
        let dk = model.d_k_rate_lb_dk(m, k).unwrap();
        let fd_k = central(|x| x * model.mean_rate_lower_bound(m, x).unwrap().mean_rate, k, h);
        prop_assert!((dk - fd_k).abs() <= 1e-4 * dk.abs().max(1e-3), "dK: {dk} vs {fd_k}");
        let dm = model.d_rate_lb_dm(m, k).unwrap();
        let fd_m = central(|x| model.mean_rate_lower_bound(x, k).unwrap().mean_rate, m, 1e-3 * m);
        prop_assert!((dm - fd_m).abs() <= 1e-4 * dm.abs(), "dM: {dm} vs {fd_m}");
    }
}
