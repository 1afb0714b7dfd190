#![allow(dead_code)]

use grouped_anova::index::{Basis, GroupedIndexSet};
use grouped_anova::transform::NodeSet;
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

/// Basis function `φ_k(x)` evaluated from its definition.
pub fn basis_value(k: &[i64], x: &[f64], basis: Basis) -> Complex64 {
    match basis {
        Basis::Exponential => {
            let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
        }
        Basis::Cosine => {
            let v: f64 = k
                .iter()
                .zip(x)
                .filter(|(&kj, _)| kj != 0)
                .map(|(&kj, &xj)| std::f64::consts::SQRT_2 * (std::f64::consts::PI * kj as f64 * xj).cos())
                .product();
            Complex64::new(v, 0.0)
        }
    }
}

/// Dense matrix `F[i][j] = φ_{k_j}(x_i)`.
pub fn dense_matrix(set: &GroupedIndexSet, nodes: &NodeSet) -> Vec<Vec<Complex64>> {
    let freqs = set.enumerate();
    (0..nodes.len())
        .map(|i| {
            let x = nodes.point(i);
            freqs.iter().map(|k| basis_value(k, &x, set.basis())).collect()
        })
        .collect()
}

pub fn matvec(f: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    f.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn matvec_adjoint(f: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let cols = f.first().map_or(0, Vec::len);
    let mut out = vec![Complex64::new(0.0, 0.0); cols];
    for (row, yi) in f.iter().zip(y) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a.conj() * yi;
        }
    }
    out
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
