//! Independent reference computations for the acceptance suite.

use std::f64::consts::PI;

use grouped_anova::index::{Basis, GroupedIndexSet};
use grouped_anova::transform::NodeSet;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
        .collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn basis_value(k: &[i64], x: &[f64], basis: Basis) -> Complex64 {
    match basis {
        Basis::Exponential => {
            let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        }
        Basis::Cosine => Complex64::new(
            k.iter()
                .zip(x)
                .filter(|(&kj, _)| kj != 0)
                .map(|(&kj, &xj)| std::f64::consts::SQRT_2 * (PI * kj as f64 * xj).cos())
                .product(),
            0.0,
        ),
    }
}

pub fn dense_matrix(set: &GroupedIndexSet, nodes: &NodeSet) -> DMatrix<Complex64> {
    let freqs = set.enumerate();
    DMatrix::from_fn(nodes.len(), freqs.len(), |i, j| basis_value(&freqs[j], &nodes.point(i), set.basis()))
}

pub fn to_vector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |a − b| / max |b|`.
pub fn rel_max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    max_abs(&diff) / max_abs(b).max(f64::MIN_POSITIVE)
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(A^H A + 2λ diag(ω))^{-1} A^H y` by LU.
pub fn normal_equations(a: &DMatrix<Complex64>, y: &[Complex64], lambda: f64, weights: &[f64]) -> Vec<Complex64> {
    let ah = a.adjoint();
    let mut g = &ah * a;
    for (i, w) in weights.iter().enumerate() {
        g[(i, i)] += Complex64::new(2.0 * lambda * w, 0.0);
    }
    let rhs = &ah * to_vector(y);
    g.lu().solve(&rhs).expect("regularized normal matrix is invertible").as_slice().to_vec()
}

/// Group soft-threshold by bisection on `ξ`: `x = y/(1 + ξω)` with `‖x‖_W ξ = λ'`.
pub fn prox_by_bisection(y: &[Complex64], w: &[f64], threshold: f64) -> Vec<Complex64> {
    let limit: f64 = y.iter().zip(w).map(|(v, w)| v.norm_sqr() / w).sum::<f64>().sqrt();
    if threshold >= limit {
        return vec![Complex64::new(0.0, 0.0); y.len()];
    }
    let gap = |xi: f64| {
        let n: f64 = y.iter().zip(w).map(|(v, w)| w * v.norm_sqr() / (1.0 + xi * w).powi(2)).sum::<f64>().sqrt();
        xi * n - threshold
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while gap(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = 0.5 * (lo + hi);
    y.iter().zip(w).map(|(v, w)| v / (1.0 + xi * w)).collect()
}

/// Composite Simpson rule for `∫₀¹ g` on `n` (even) intervals.
pub fn simpson(n: usize, g: impl Fn(f64) -> Complex64) -> Complex64 {
    let h = 1.0 / n as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += g(i as f64 * h) * c;
    }
    s * (h / 3.0)
}
