//! Low-dimensional nonequispaced FFT for one group.
//!
//! The group coefficients are embedded in the full cube of `N^r` frequencies
//! (zero frequencies stay zero), divided by the window's Fourier factors,
//! transformed on an oversampled grid of `n = ⌈σN⌉` points per axis and
//! gathered at each node from the `(2m+1)^r` nearest grid points.
//!
//! The window is Kaiser–Bessel: a compactly supported `I_0` profile in
//! frequency, `sinh(b√(m²-t²))/(π√(m²-t²))` in space with `b = π(2 - 1/σ)`.
//!
//! The cosine basis reuses the exponential kernel through the even extension
//! `cos(πkx) = (e^{2πik(x/2)} + e^{-2πik(x/2)})/2`: bandwidth `2N`, nodes `x/2`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::index::{axis_frequencies, Basis};

/// Oversampling factor and window half-width.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FastParams {
    pub sigma: f64,
    pub m: usize,
}

impl Default for FastParams {
    fn default() -> Self {
        FastParams { sigma: 2.0, m: 6 }
    }
}

impl FastParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 1.25) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "oversampling factor {} must be at least 1.25",
                self.sigma
            )));
        }
        if self.m < 2 {
            return Err(Error::InvalidParameter(format!("window cutoff {} must be at least 2", self.m)));
        }
        Ok(())
    }
}

/// Modified Bessel function of the first kind, order zero.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 1.0;
    while term > 1e-17 * sum {
        term *= q / (j * j);
        sum += term;
        j += 1.0;
    }
    sum
}

#[derive(Clone, Copy, Debug)]
struct KaiserBessel {
    m: f64,
    b: f64,
}

impl KaiserBessel {
    fn new(n: usize, bandwidth: usize, m: usize) -> Self {
        let sigma = n as f64 / bandwidth as f64;
        KaiserBessel {
            m: m as f64,
            b: std::f64::consts::PI * (2.0 - 1.0 / sigma),
        }
    }

    /// Window at grid distance `t = n·x - l`.
    fn spatial(&self, t: f64) -> f64 {
        let arg = self.m * self.m - t * t;
        if arg > 0.0 {
            let s = arg.sqrt();
            (self.b * s).sinh() / (std::f64::consts::PI * s)
        } else if arg < 0.0 {
            let s = (-arg).sqrt();
            (self.b * s).sin() / (std::f64::consts::PI * s)
        } else {
            self.b / std::f64::consts::PI
        }
    }

    /// `n·φ̂(k)`.
    fn spectral(&self, k: i64, n: usize) -> f64 {
        let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        bessel_i0(self.m * (self.b * self.b - w * w).max(0.0).sqrt())
    }
}

/// Window weights of one coordinate for every node on a grid of size `n`.
#[derive(Debug)]
pub(crate) struct WindowTable {
    n: usize,
    width: usize,
    start: Vec<usize>,
    weights: Vec<f64>,
}

impl WindowTable {
    /// `scale` multiplies the coordinates before gridding (1/2 for the cosine basis).
    pub(crate) fn new(coords: &[f64], n: usize, bandwidth: usize, m: usize, scale: f64) -> Self {
        let window = KaiserBessel::new(n, bandwidth, m);
        let width = 2 * m + 1;
        let mut start = Vec::with_capacity(coords.len());
        let mut weights = Vec::with_capacity(coords.len() * width);
        for &x in coords {
            let nx = n as f64 * (x * scale);
            let center = nx.round() as i64;
            let first = center - m as i64;
            start.push(first.rem_euclid(n as i64) as usize);
            for p in 0..width as i64 {
                weights.push(window.spatial(nx - (first + p) as f64));
            }
        }
        WindowTable { n, width, start, weights }
    }

    #[inline]
    fn node(&self, i: usize) -> (usize, &[f64]) {
        (self.start[i], &self.weights[i * self.width..(i + 1) * self.width])
    }
}

/// Precomputed data for the fast transform of one group.
pub(crate) struct NfftGroup {
    n: usize,
    dims: usize,
    /// Per group-axis frequency: grid positions and real factors it maps to.
    entries: Vec<Vec<(usize, f64)>>,
    windows: Vec<Arc<WindowTable>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    fft_forward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NfftGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NfftGroup")
            .field("n", &self.n)
            .field("dims", &self.dims)
            .finish()
    }
}

/// Grid size and effective exponential bandwidth for a group bandwidth.
pub(crate) fn grid_size(bandwidth: usize, basis: Basis, params: &FastParams) -> Result<(usize, usize)> {
    let exp_bandwidth = match basis {
        Basis::Exponential => bandwidth,
        Basis::Cosine => 2 * bandwidth,
    };
    let n = (params.sigma * exp_bandwidth as f64).ceil();
    if !n.is_finite() || n > (1u64 << 24) as f64 {
        return Err(Error::GridOverflow(n as usize));
    }
    let mut n = n as usize;
    n += n % 2;
    let n = n.max(2 * params.m + 2);
    Ok((n, exp_bandwidth))
}

impl NfftGroup {
    pub(crate) fn new(
        bandwidth: usize,
        basis: Basis,
        params: &FastParams,
        windows: Vec<Arc<WindowTable>>,
        planner: &mut FftPlanner<f64>,
    ) -> Result<Self> {
        let dims = windows.len();
        let (n, exp_bandwidth) = grid_size(bandwidth, basis, params)?;
        if (n as u128).pow(dims as u32) > (1u128 << 31) {
            return Err(Error::GridOverflow(n));
        }
        debug_assert!(windows.iter().all(|w| w.n == n));
        let window = KaiserBessel::new(n, exp_bandwidth, params.m);
        let slot = |k: i64| k.rem_euclid(n as i64) as usize;
        let entries = axis_frequencies(bandwidth, basis)
            .into_iter()
            .map(|k| match basis {
                Basis::Exponential => vec![(slot(k), 1.0 / window.spectral(k, n))],
                Basis::Cosine => {
                    let h = std::f64::consts::FRAC_1_SQRT_2;
                    vec![
                        (slot(k), h / window.spectral(k, n)),
                        (slot(-k), h / window.spectral(-k, n)),
                    ]
                }
            })
            .collect();
        Ok(NfftGroup {
            n,
            dims,
            entries,
            windows,
            fft_inverse: planner.plan_fft(n, FftDirection::Inverse),
            fft_forward: planner.plan_fft(n, FftDirection::Forward),
        })
    }

    fn grid_len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    /// Multi-dimensional FFT, axis 0 contiguous.
    fn fft(&self, grid: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(grid, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 1..self.dims {
            let stride = n.pow(axis as u32);
            let block = stride * n;
            for outer in (0..grid.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (p, v) in line.iter_mut().enumerate() {
                        *v = grid[base + p * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (p, v) in line.iter().enumerate() {
                        grid[base + p * stride] = *v;
                    }
                }
            }
        }
    }

    fn scatter_coeffs(&self, axis: usize, coeffs: &[Complex64], base: usize, factor: f64, grid: &mut [Complex64]) {
        let len = self.entries.len();
        let stride_c = len.pow(axis as u32);
        let stride_g = self.n.pow(axis as u32);
        for (k, entries) in self.entries.iter().enumerate() {
            let sub = &coeffs[k * stride_c..(k + 1) * stride_c];
            for &(slot, f) in entries {
                if axis == 0 {
                    grid[base + slot] += sub[0] * (factor * f);
                } else {
                    self.scatter_coeffs(axis - 1, sub, base + slot * stride_g, factor * f, grid);
                }
            }
        }
    }

    fn gather_coeffs(&self, axis: usize, out: &mut [Complex64], base: usize, factor: f64, grid: &[Complex64]) {
        let len = self.entries.len();
        let stride_c = len.pow(axis as u32);
        let stride_g = self.n.pow(axis as u32);
        for (k, entries) in self.entries.iter().enumerate() {
            let sub = &mut out[k * stride_c..(k + 1) * stride_c];
            for &(slot, f) in entries {
                if axis == 0 {
                    sub[0] += grid[base + slot] * (factor * f);
                } else {
                    self.gather_coeffs(axis - 1, sub, base + slot * stride_g, factor * f, grid);
                }
            }
        }
    }

    fn gather_node(&self, axis: usize, node: usize, base: usize, grid: &[Complex64]) -> Complex64 {
        let (start, w) = self.windows[axis].node(node);
        let stride = self.n.pow(axis as u32);
        let mut idx = start;
        let mut acc = Complex64::new(0.0, 0.0);
        for &wp in w {
            let v = if axis == 0 {
                grid[base + idx]
            } else {
                self.gather_node(axis - 1, node, base + idx * stride, grid)
            };
            acc += v * wp;
            idx += 1;
            if idx == self.n {
                idx = 0;
            }
        }
        acc
    }

    fn spread_node(&self, axis: usize, node: usize, base: usize, value: Complex64, grid: &mut [Complex64]) {
        let (start, w) = self.windows[axis].node(node);
        let stride = self.n.pow(axis as u32);
        let mut idx = start;
        for &wp in w {
            if axis == 0 {
                grid[base + idx] += value * wp;
            } else {
                self.spread_node(axis - 1, node, base + idx * stride, value * wp, grid);
            }
            idx += 1;
            if idx == self.n {
                idx = 0;
            }
        }
    }

    /// Adds the group's contribution at every node to `out`.
    pub(crate) fn forward(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let mut grid = vec![Complex64::new(0.0, 0.0); self.grid_len()];
        self.scatter_coeffs(self.dims - 1, coeffs, 0, 1.0, &mut grid);
        self.fft(&mut grid, &self.fft_inverse);
        let top = self.dims - 1;
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.gather_node(top, i, 0, &grid);
        }
    }

    pub(crate) fn adjoint(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut grid = vec![Complex64::new(0.0, 0.0); self.grid_len()];
        let top = self.dims - 1;
        for (i, &v) in values.iter().enumerate() {
            self.spread_node(top, i, 0, v, &mut grid);
        }
        self.fft(&mut grid, &self.fft_forward);
        let mut out = vec![Complex64::new(0.0, 0.0); self.entries.len().pow(self.dims as u32)];
        self.gather_coeffs(self.dims - 1, &mut out, 0, 1.0, &grid);
        out
    }
}
