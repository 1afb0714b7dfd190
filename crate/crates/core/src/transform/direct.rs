//! Exact group kernels.
//!
//! A group with `r` axes and `L = N - 1` frequencies per axis is evaluated as a
//! tensor contraction against per-axis basis tables, one block of nodes at a
//! time. The work per node is `L^r + L^{r-1} + … + L`, and every inner loop
//! runs over a contiguous block of nodes.

use num_complex::Complex64;

use crate::index::{axis_frequencies, Basis};

const BLOCK: usize = 128;

/// Values of the one-dimensional basis functions of one coordinate at every
/// node, stored frequency-major (`[k][node]`).
#[derive(Debug)]
pub(crate) struct AxisTable {
    len: usize,
    nodes: usize,
    re: Vec<f64>,
    /// `None` for the cosine basis, whose factors are real.
    im: Option<Vec<f64>>,
}

impl AxisTable {
    pub(crate) fn new(coords: &[f64], bandwidth: usize, basis: Basis) -> Self {
        let freqs = axis_frequencies(bandwidth, basis);
        let nodes = coords.len();
        let mut re = Vec::with_capacity(freqs.len() * nodes);
        let mut im = match basis {
            Basis::Exponential => Some(Vec::with_capacity(freqs.len() * nodes)),
            Basis::Cosine => None,
        };
        for &k in &freqs {
            match im.as_mut() {
                Some(im) => {
                    for &x in coords {
                        let (s, c) = (2.0 * std::f64::consts::PI * k as f64 * x).sin_cos();
                        re.push(c);
                        im.push(s);
                    }
                }
                None => {
                    for &x in coords {
                        re.push(std::f64::consts::SQRT_2 * (std::f64::consts::PI * k as f64 * x).cos());
                    }
                }
            }
        }
        AxisTable {
            len: freqs.len(),
            nodes,
            re,
            im,
        }
    }

    #[inline]
    fn row_re(&self, k: usize, start: usize, len: usize) -> &[f64] {
        let o = k * self.nodes + start;
        &self.re[o..o + len]
    }

    #[inline]
    fn row_im(&self, k: usize, start: usize, len: usize) -> Option<&[f64]> {
        self.im.as_ref().map(|im| {
            let o = k * self.nodes + start;
            &im[o..o + len]
        })
    }
}

struct Scratch {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(levels: usize) -> Self {
        Scratch {
            re: vec![vec![0.0; BLOCK]; levels],
            im: vec![vec![0.0; BLOCK]; levels],
        }
    }
}

/// Adds `Σ_i c_i Π_t a_t[i_t](x)` over all nodes to `out`.
pub(crate) fn forward(tables: &[&AxisTable], coeffs: &[Complex64], out: &mut [Complex64]) {
    let r = tables.len();
    debug_assert!(r >= 1);
    let len = tables[0].len;
    debug_assert_eq!(coeffs.len(), len.pow(r as u32));
    let nodes = tables[0].nodes;
    debug_assert_eq!(out.len(), nodes);

    let mut scratch = Scratch::new(r);
    let mut start = 0;
    while start < nodes {
        let b = BLOCK.min(nodes - start);
        contract(r - 1, tables, coeffs, start, b, &mut scratch);
        let (re, im) = (&scratch.re[r - 1][..b], &scratch.im[r - 1][..b]);
        for ((o, &vr), &vi) in out[start..start + b].iter_mut().zip(re).zip(im) {
            o.re += vr;
            o.im += vi;
        }
        start += b;
    }
}

/// Writes the contraction of axes `0..=level` into `scratch[level]`.
fn contract(level: usize, tables: &[&AxisTable], coeffs: &[Complex64], start: usize, b: usize, scratch: &mut Scratch) {
    let table = tables[level];
    let len = table.len;
    if level == 0 {
        let (acc_re, acc_im) = (&mut scratch.re[0][..b], &mut scratch.im[0][..b]);
        acc_re.fill(0.0);
        acc_im.fill(0.0);
        for (k, c) in coeffs.iter().enumerate().take(len) {
            let a_re = table.row_re(k, start, b);
            match table.row_im(k, start, b) {
                Some(a_im) => {
                    for n in 0..b {
                        acc_re[n] += c.re * a_re[n] - c.im * a_im[n];
                        acc_im[n] += c.re * a_im[n] + c.im * a_re[n];
                    }
                }
                None => {
                    for n in 0..b {
                        acc_re[n] += c.re * a_re[n];
                        acc_im[n] += c.im * a_re[n];
                    }
                }
            }
        }
        return;
    }
    let stride = len.pow(level as u32);
    scratch.re[level][..b].fill(0.0);
    scratch.im[level][..b].fill(0.0);
    for k in 0..len {
        contract(level - 1, tables, &coeffs[k * stride..(k + 1) * stride], start, b, scratch);
        let (lower, upper) = scratch.re.split_at_mut(level);
        let (lower_im, upper_im) = scratch.im.split_at_mut(level);
        let (t_re, t_im) = (&lower[level - 1][..b], &lower_im[level - 1][..b]);
        let (acc_re, acc_im) = (&mut upper[0][..b], &mut upper_im[0][..b]);
        let a_re = table.row_re(k, start, b);
        match table.row_im(k, start, b) {
            Some(a_im) => {
                for n in 0..b {
                    acc_re[n] += t_re[n] * a_re[n] - t_im[n] * a_im[n];
                    acc_im[n] += t_re[n] * a_im[n] + t_im[n] * a_re[n];
                }
            }
            None => {
                for n in 0..b {
                    acc_re[n] += t_re[n] * a_re[n];
                    acc_im[n] += t_im[n] * a_re[n];
                }
            }
        }
    }
}

/// Returns `Σ_x y_x conj(Π_t a_t[i_t](x))` for every coefficient index `i`.
pub(crate) fn adjoint(tables: &[&AxisTable], values: &[Complex64]) -> Vec<Complex64> {
    let r = tables.len();
    let len = tables[0].len;
    let nodes = tables[0].nodes;
    debug_assert_eq!(values.len(), nodes);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len.pow(r as u32)];

    let mut scratch = Scratch::new(r);
    let mut start = 0;
    while start < nodes {
        let b = BLOCK.min(nodes - start);
        for (n, v) in values[start..start + b].iter().enumerate() {
            scratch.re[r - 1][n] = v.re;
            scratch.im[r - 1][n] = v.im;
        }
        spread(r - 1, tables, &mut coeffs, start, b, &mut scratch);
        start += b;
    }
    coeffs
}

/// `scratch[level]` holds the node weights with the axes above `level` applied.
fn spread(level: usize, tables: &[&AxisTable], coeffs: &mut [Complex64], start: usize, b: usize, scratch: &mut Scratch) {
    let table = tables[level];
    let len = table.len;
    if level == 0 {
        let (w_re, w_im) = (&scratch.re[0][..b], &scratch.im[0][..b]);
        for (k, c) in coeffs.iter_mut().enumerate().take(len) {
            let a_re = table.row_re(k, start, b);
            let (s_re, s_im) = match table.row_im(k, start, b) {
                Some(a_im) => conj_dot(w_re, w_im, a_re, a_im),
                None => (real_dot(w_re, a_re), real_dot(w_im, a_re)),
            };
            c.re += s_re;
            c.im += s_im;
        }
        return;
    }
    let stride = len.pow(level as u32);
    for k in 0..len {
        {
            let (lower, upper) = scratch.re.split_at_mut(level);
            let (lower_im, upper_im) = scratch.im.split_at_mut(level);
            let (w_re, w_im) = (&upper[0][..b], &upper_im[0][..b]);
            let (t_re, t_im) = (&mut lower[level - 1][..b], &mut lower_im[level - 1][..b]);
            let a_re = table.row_re(k, start, b);
            match table.row_im(k, start, b) {
                Some(a_im) => {
                    for n in 0..b {
                        t_re[n] = w_re[n] * a_re[n] + w_im[n] * a_im[n];
                        t_im[n] = w_im[n] * a_re[n] - w_re[n] * a_im[n];
                    }
                }
                None => {
                    for n in 0..b {
                        t_re[n] = w_re[n] * a_re[n];
                        t_im[n] = w_im[n] * a_re[n];
                    }
                }
            }
        }
        spread(level - 1, tables, &mut coeffs[k * stride..(k + 1) * stride], start, b, scratch);
    }
}

const LANES: usize = 8;

/// `Σ_n w_n conj(a_n)` with independent partial sums so the loop vectorizes.
fn conj_dot(w_re: &[f64], w_im: &[f64], a_re: &[f64], a_im: &[f64]) -> (f64, f64) {
    let mut acc_re = [0.0; LANES];
    let mut acc_im = [0.0; LANES];
    let chunks = w_re.len() / LANES * LANES;
    for base in (0..chunks).step_by(LANES) {
        for l in 0..LANES {
            let n = base + l;
            acc_re[l] += w_re[n] * a_re[n] + w_im[n] * a_im[n];
            acc_im[l] += w_im[n] * a_re[n] - w_re[n] * a_im[n];
        }
    }
    let (mut s_re, mut s_im): (f64, f64) = (acc_re.iter().sum(), acc_im.iter().sum());
    for n in chunks..w_re.len() {
        s_re += w_re[n] * a_re[n] + w_im[n] * a_im[n];
        s_im += w_im[n] * a_re[n] - w_re[n] * a_im[n];
    }
    (s_re, s_im)
}

fn real_dot(w: &[f64], a: &[f64]) -> f64 {
    let mut acc = [0.0; LANES];
    let chunks = w.len() / LANES * LANES;
    for base in (0..chunks).step_by(LANES) {
        for l in 0..LANES {
            acc[l] += w[base + l] * a[base + l];
        }
    }
    let mut s: f64 = acc.iter().sum();
    for n in chunks..w.len() {
        s += w[n] * a[n];
    }
    s
}
