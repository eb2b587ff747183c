use std::f64::consts::PI;

use proptest::prelude::*;
use pswf3d::quadrature::*;

#[test]
fn default_grid() {
    let g = ball_grid(23, 31, 61).unwrap();
    assert_eq!(g.len(), 43_493);
    assert!(g.nodes().iter().all(|x| x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-15));
    let volume: f64 = g.weights().iter().sum();
    assert!((volume - 4.0 * PI / 3.0).abs() < 1e-3);
}

#[test]
fn volume_converges_monotonically() {
    let errors: Vec<f64> = [8, 16, 23, 32]
        .iter()
        .map(|&t| (ball_grid(t, 31, 61).unwrap().weights().iter().sum::<f64>() - 4.0 * PI / 3.0).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn fibonacci_separation_scales_like_inverse_sqrt() {
    for n in [51, 101, 201] {
        let d = fibonacci_sphere(n).unwrap().directions;
        let mut min = f64::INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                let dot: f64 = (0..3).map(|k| d[a][k] * d[b][k]).sum();
                min = min.min(dot.clamp(-1.0, 1.0).acos());
            }
        }
        assert!(min > 0.5 / (n as f64).sqrt(), "n = {n}: {min}");
    }
}

/// `int_{-1}^{1} x^k dx`.
fn monomial_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (k + 1) as f64
    }
}

proptest! {
    #[test]
    fn gauss_legendre_exact_for_random_polynomials(
        n in 1usize..60,
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..120),
    ) {
        let rule = gauss_legendre(n).unwrap();
        let degree = coeffs.len().min(2 * n) - 1;
        let poly = |x: f64| coeffs[..=degree].iter().rev().fold(0.0, |acc, c| acc * x + c);
        let exact: f64 = (0..=degree).map(|k| coeffs[k] * monomial_moment(k)).sum();
        prop_assert!((rule.integrate(poly) - exact).abs() < 1e-13 * (degree + 1) as f64);
    }

    #[test]
    fn trapezoid_exact_for_trig_polynomials(n in 3usize..80, k in 1usize..200, shift in 0.0..2.0 * PI) {
        let rule = periodic_trapezoid(n).unwrap();
        let v = rule.integrate(|phi| (k as f64 * phi + shift).cos());
        let exact = if k % n == 0 { 2.0 * PI * shift.cos() } else { 0.0 };
        prop_assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn ball_grid_weights_positive_and_index_consistent(t in 1usize..12, mt in 1usize..12, mp in 1usize..20) {
        let g = ball_grid(t, mt, mp).unwrap();
        prop_assert_eq!(g.len(), t * mt * mp);
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
        for n in 0..g.len() {
            let (i, s, j) = g.triple(n);
            prop_assert_eq!(g.index(i, s, j), n);
        }
    }
}
