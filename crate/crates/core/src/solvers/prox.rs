//! Proximal map of `λ' Σ_u ‖x_u‖_{W(u)}`.
//!
//! Per group the minimizer of `½‖x − y‖² + λ'‖x‖_W` is zero when
//! `λ' ≥ ‖W^{-1/2} y‖₂`, and otherwise `y_k / (1 + ξ ω_k)` where `ξ > 0` solves
//! `t(ξ) = Σ ω_k |y_k|² / (1/ξ + ω_k)² = λ'²`.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-3;
const MAX_NEWTON: usize = 100;

/// `‖x‖_W = (Σ ω_k |x_k|²)^{1/2}`.
pub fn weighted_norm(x: &[Complex64], weights: &[f64]) -> f64 {
    x.iter().zip(weights).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt()
}

/// Minimizer of `½‖x − y‖² + ξ‖x‖²_W`: `y_k / (1 + 2ξω_k)`.
pub fn shrink_group_closed_form(y: &[Complex64], xi: f64, weights: &[f64]) -> Vec<Complex64> {
    y.iter().zip(weights).map(|(v, w)| v / (1.0 + 2.0 * xi * w)).collect()
}

/// `G(ζ) = Σ ω|y|²/(ζ + ω)² − λ'²` and `G'(ζ)`, with `ζ = 1/ξ`.
fn residual(sq: &[(f64, f64)], zeta: f64, target: f64) -> (f64, f64) {
    let mut g = -target;
    let mut dg = 0.0;
    for &(w, a) in sq {
        let q = 1.0 / (zeta + w);
        let term = w * a * q * q;
        g += term;
        dg -= 2.0 * term * q;
    }
    (g, dg)
}

/// Root `ξ` of `t(ξ) = λ'²` with relative accuracy `tol` on `t`.
pub fn find_xi(y: &[Complex64], weights: &[f64], threshold: f64, tol: f64) -> Result<f64> {
    let sq: Vec<(f64, f64)> = y.iter().zip(weights).map(|(v, &w)| (w, v.norm_sqr())).collect();
    let limit = sq.iter().map(|(w, a)| a / w).sum::<f64>().sqrt();
    if !(threshold > 0.0) || threshold >= limit {
        return Err(Error::BracketFailure { threshold, limit });
    }
    let target = threshold * threshold;
    let t = |xi: f64| residual(&sq, 1.0 / xi, target).0;

    // Bracket in ζ = 1/ξ, where G is decreasing and convex.
    let (mut lo, mut hi) = if t(1.0) >= 0.0 {
        // ξ ∈ (0, 1]: bisect on ξ.
        let (mut a, mut b) = (0.0f64, 1.0f64);
        while b - a > BISECTION_TOL * b {
            let mid = 0.5 * (a + b);
            if t(mid) >= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        (1.0 / b, if a > 0.0 { 1.0 / a } else { f64::INFINITY })
    } else {
        // ξ > 1: bisect on ζ ∈ [0, 1).
        let (mut a, mut b) = (0.0f64, 1.0f64);
        while b - a > BISECTION_TOL * b.max(f64::MIN_POSITIVE) && b > f64::MIN_POSITIVE {
            let mid = 0.5 * (a + b);
            if residual(&sq, mid, target).0 >= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a, b)
    };

    // Newton from the left end converges monotonically for a convex decreasing G.
    let mut zeta = lo;
    for _ in 0..MAX_NEWTON {
        let (g, dg) = residual(&sq, zeta, target);
        if g.abs() <= tol * target {
            return Ok(1.0 / zeta);
        }
        if g > 0.0 {
            lo = zeta;
        } else {
            hi = zeta;
        }
        let mut next = zeta - g / dg;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(1.0) };
        }
        if (next - zeta).abs() <= 4.0 * f64::EPSILON * zeta.abs() {
            return Ok(1.0 / next);
        }
        zeta = next;
    }
    Ok(1.0 / zeta)
}

/// Proximal map of `λ'‖·‖_W` on one group.
pub fn prox_group(y: &[Complex64], weights: &[f64], threshold: f64, tol: f64) -> Result<Vec<Complex64>> {
    if threshold == 0.0 {
        return Ok(y.to_vec());
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} must be nonnegative")));
    }
    let limit = y.iter().zip(weights).map(|(v, w)| v.norm_sqr() / w).sum::<f64>().sqrt();
    if threshold >= limit {
        return Ok(vec![Complex64::new(0.0, 0.0); y.len()]);
    }
    let xi = find_xi(y, weights, threshold, tol)?;
    Ok(y.iter().zip(weights).map(|(v, w)| v / (1.0 + xi * w)).collect())
}

/// Applies [`prox_group`] to every group. Groups listed in `exempt` are copied.
pub fn prox_grouped(
    h: &[Complex64],
    groups: &[Range<usize>],
    weights: &[f64],
    threshold: f64,
    tol: f64,
    exempt: &[usize],
) -> Result<Vec<Complex64>> {
    let blocks: Vec<Result<Vec<Complex64>>> = groups
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            if exempt.contains(&i) {
                Ok(h[r.clone()].to_vec())
            } else {
                prox_group(&h[r.clone()], &weights[r.clone()], threshold, tol)
            }
        })
        .collect();
    let mut out = Vec::with_capacity(h.len());
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn scalar_root() {
        let xi = find_xi(&re(&[4.0]), &[2.0], 1.0, 1e-12).unwrap();
        assert!((xi - 1.0 / (4.0 * 2f64.sqrt() - 2.0)).abs() < 1e-12);
        let t = 2.0 * 16.0 / (1.0 / xi + 2.0).powi(2);
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_weights_closed_form() {
        let y = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3), Complex64::new(0.0, -1.0)];
        let n = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for lam in [0.1, 0.9, 2.0] {
            let xi = find_xi(&y, &[1.0; 3], lam, 1e-13).unwrap();
            assert!((xi - 1.0 / (n / lam - 1.0)).abs() < 1e-10 * xi, "lambda {lam}");
        }
    }

    #[test]
    fn threshold_above_limit_zeroes_and_errors() {
        let y = re(&[3.0, 4.0]);
        assert!(find_xi(&y, &[1.0, 1.0], 5.0, 1e-12).is_err());
        assert_eq!(prox_group(&y, &[1.0, 1.0], 5.0, 1e-12).unwrap(), re(&[0.0, 0.0]));
        assert_eq!(prox_group(&y, &[1.0, 1.0], 0.0, 1e-12).unwrap(), y);
    }

    #[test]
    fn closed_form_shrink() {
        let y = re(&[2.0, -4.0]);
        assert_eq!(shrink_group_closed_form(&y, 0.5, &[1.0, 1.0]), re(&[1.0, -2.0]));
        assert_eq!(shrink_group_closed_form(&y, 0.0, &[3.0, 7.0]), y);
    }

    #[test]
    fn exempt_group_is_copied() {
        let h = re(&[5.0, 1.0, 1.0]);
        let groups = vec![0..1, 1..3];
        let out = prox_grouped(&h, &groups, &[1.0; 3], 10.0, 1e-12, &[0]).unwrap();
        assert_eq!(out, re(&[5.0, 0.0, 0.0]));
    }
}
