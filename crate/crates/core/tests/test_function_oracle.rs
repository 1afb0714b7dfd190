use std::f64::consts::PI;

use grouped_anova::index::Term;
use grouped_anova::test_functions::{bspline_value, sample_testfun, NoiseModel, TestFunction, ORDERS};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite Simpson rule for `∫₀¹ g` on `n` (even) intervals.
fn simpson(n: usize, g: impl Fn(f64) -> Complex64) -> Complex64 {
    let h = 1.0 / n as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += g(i as f64 * h) * c;
    }
    s * (h / 3.0)
}

fn spline_coefficient_by_quadrature(order: usize, k: i64) -> Complex64 {
    // Breakpoints at multiples of 1/order; 24000 intervals keep each piece polynomial.
    simpson(24_000, |x| bspline_value(order, x) * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * x))
}

#[test]
fn norm_by_monte_carlo() {
    let f = TestFunction::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 1 << 22;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut x = [0.0; 9];
    for _ in 0..n {
        for v in &mut x {
            *v = rng.random::<f64>();
        }
        let v = f.value(&x).powi(2);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - f.norm_sq()).abs() < 5.0 * se, "{mean} vs {} (se {se})", f.norm_sq());
    assert!((f.norm_sq() - 3.99284).abs() < 2e-4);
}

#[test]
fn coefficients_by_quadrature() {
    let f = TestFunction::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let triple = f.triples()[rng.random_range(0..3)];
        let mut k = [0i64; 9];
        for &c in &triple {
            if rng.random::<f64>() < 0.7 {
                k[c] = rng.random_range(-12..=12);
            }
        }
        let expected: Complex64 =
            triple.iter().zip(ORDERS).map(|(&c, j)| spline_coefficient_by_quadrature(j, k[c])).product();
        let got = f.coefficient(&k);
        let support = k.iter().filter(|&&v| v != 0).count();
        // The mean appears once per triple containing the support.
        let copies = if support == 0 { 3.0 } else { 1.0 };
        assert!((got - copies * expected.re).abs() < 1e-9, "{k:?}: {got} vs {}", expected.re);
        assert!(expected.im.abs() < 1e-9);
    }
}

#[test]
fn coefficients_vanish_outside_the_triples() {
    let f = TestFunction::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let a = rng.random_range(0..9usize);
        let b = (0..9).find(|&c| c != a && !f.triples().iter().any(|t| t.contains(&a) && t.contains(&c))).unwrap();
        let mut k = [0i64; 9];
        k[a] = rng.random_range(1..=10);
        k[b] = -rng.random_range(1..=10);
        assert_eq!(f.coefficient(&k), 0.0);
    }
}

#[test]
fn anova_terms_have_vanishing_marginals() {
    let f = TestFunction::new();
    for term in f.active_terms().iter().filter(|t| !t.is_empty()) {
        for (p, _) in term.coords().iter().enumerate() {
            let integral = simpson(6000, |x| {
                let mut point = vec![0.37; term.len()];
                point[p] = x;
                Complex64::new(f.analytic_term(term, &point).unwrap(), 0.0)
            });
            assert!(integral.norm() < 1e-9, "{}", term.label());
        }
    }
    assert_eq!(f.analytic_term(&Term::new(vec![0, 1]).unwrap(), &[0.2, 0.4]).unwrap(), 0.0);
}

#[test]
fn samples_follow_the_noise_model() {
    let clean = sample_testfun(20_000, NoiseModel::Relative(0.0), 1).unwrap();
    assert_eq!(clean.values, clean.clean);
    assert_eq!(clean.nodes.len(), 20_000);
    for j in 0..9 {
        assert!(clean.nodes.column(j).iter().all(|&x| (0.0..1.0).contains(&x)));
    }
    let noisy = sample_testfun(20_000, NoiseModel::Relative(0.1), 1).unwrap();
    assert_eq!(noisy.clean, clean.clean);
    let signal: f64 = clean.clean.iter().map(|v| v * v).sum();
    let noise: f64 = noisy.values.iter().zip(&noisy.clean).map(|(a, b)| (a - b).powi(2)).sum();
    assert!(((noise / signal).sqrt() - 0.1).abs() < 0.005);
    let absolute = sample_testfun(20_000, NoiseModel::Absolute(0.05), 2).unwrap();
    let sd = (absolute.values.iter().zip(&absolute.clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 20_000.0).sqrt();
    assert!((sd - 0.05).abs() < 0.002);
    assert!(sample_testfun(0, NoiseModel::Relative(0.0), 0).is_err());
    assert!(sample_testfun(10, NoiseModel::Absolute(-1.0), 0).is_err());
}
