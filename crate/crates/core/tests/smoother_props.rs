mod common;

use proptest::prelude::*;

use common::natural_cubic_eval;
use kfd::smoother::*;

fn rss(y: &[f64], f: &SplineFit) -> f64 {
    y.iter().zip(f.fitted()).map(|(a, b)| (a - b).powi(2)).sum()
}

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 2..80)
}

proptest! {
    #[test]
    fn linear_smoother(y1 in series(), seed in prop::collection::vec(-10.0f64..10.0, 80), a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0.05f64..1.0) {
        let y2 = &seed[..y1.len()];
        let mix: Vec<f64> = y1.iter().zip(y2).map(|(u, v)| a * u + b * v).collect();
        let (f1, f2, fm) = (fit_spline(&y1, p).unwrap(), fit_spline(y2, p).unwrap(), fit_spline(&mix, p).unwrap());
        for i in 0..y1.len() {
            prop_assert!((fm.fitted()[i] - (a * f1.fitted()[i] + b * f2.fitted()[i])).abs() < 1e-8);
        }
    }

    #[test]
    fn fidelity_grows_with_p(y in series()) {
        let grid = [0.1, 0.3, 0.6, 0.8, 1.0];
        let r: Vec<f64> = grid.iter().map(|&p| rss(&y, &fit_spline(&y, p).unwrap())).collect();
        for w in r.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn constants_pass_through(c in -100.0f64..100.0, k in 2usize..60, p in 0.01f64..1.0) {
        let f = fit_spline(&vec![c; k], p).unwrap();
        for v in f.fitted() {
            prop_assert!((v - c).abs() < 1e-9 * c.abs().max(1.0));
        }
    }

    #[test]
    fn natural_boundary(y in series(), p in 0.01f64..1.0) {
        let f = fit_spline(&y, p).unwrap();
        let k = y.len() as f64;
        prop_assert!(f.second_derivative_at(0.0).unwrap().abs() < 1e-8);
        prop_assert!(f.second_derivative_at(k - 1.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn curve_is_natural_interpolant_of_fitted_values(y in prop::collection::vec(-5.0f64..5.0, 3..25), p in 0.05f64..1.0, u in 0.0f64..1.0) {
        let f = fit_spline(&y, p).unwrap();
        let t = u * (y.len() - 1) as f64;
        let want = natural_cubic_eval(f.fitted(), t);
        prop_assert!((f.eval_at(t).unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn linear_data_reproduced() {
    let y: Vec<f64> = (0..50).map(|i| 2.5 - 0.75 * i as f64).collect();
    for p in [0.1, 0.6, 1.0] {
        let f = fit_spline(&y, p).unwrap();
        for (a, b) in y.iter().zip(f.fitted()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn three_point_midpoint_matches_reconstruction() {
    let f = fit_spline(&[0.0, 1.0, 0.0], 0.5).unwrap();
    let want = natural_cubic_eval(f.fitted(), 0.5);
    assert!((f.eval_at(0.5).unwrap() - want).abs() < 1e-12);
    let f = fit_spline(&[0.0, 1.0, 0.0], 1.0).unwrap();
    assert!((f.eval_at(0.5).unwrap() - 0.6875).abs() < 1e-12);
}

#[test]
fn alpha_boundaries() {
    let cfg = SmootherConfig::default();
    assert_eq!(select_alpha(59, &cfg), 0.8);
    assert_eq!(select_alpha(60, &cfg), 0.6);
    assert_eq!(select_alpha(170, &cfg), 0.6);
    assert_eq!(select_alpha(171, &cfg), 0.1);
}
