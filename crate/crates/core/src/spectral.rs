//! Sampled functions on the unit circle.
//!
//! A [`CircleGrid`] of size `N` carries the nodes `z_j = exp(2 pi i j / N)`.
//! The same index also parametrises the signal side: `theta_j = pi j / N`
//! and `x_j = cos(theta_j)`, so that `z_j = exp(2 i theta_j)`.
//!
//! Fourier coefficients follow `c_n = (1/N) sum_j g(z_j) z_j^(-n)` on the
//! window `[-N/2, N/2)`. The Nyquist coefficient sits on the negative side,
//! so the disk projection drops it and the exterior projection keeps it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest imaginary part tolerated when a function is declared real.
pub const REAL_INPUT_TOL: f64 = 1e-12;

struct GridInner {
    size: usize,
    nodes: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform `N`-point grid on the unit circle, `N` a power of two, `N >= 8`.
///
/// Cloning is cheap: the node table and FFT plans are shared.
#[derive(Clone)]
pub struct CircleGrid {
    inner: Arc<GridInner>,
}

impl CircleGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(size));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let nodes = (0..size)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / size as f64))
            .collect();
        Ok(Self {
            inner: Arc::new(GridInner {
                size,
                nodes,
                forward,
                inverse,
            }),
        })
    }

    pub fn size(&self) -> usize {
        self.inner.size
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.inner.nodes
    }

    pub fn node(&self, j: usize) -> Complex64 {
        self.inner.nodes[j]
    }

    /// `z_j^k`, looked up from the node table so that integer powers are exact
    /// to the accuracy of the table.
    pub fn node_power(&self, j: usize, k: i64) -> Complex64 {
        let n = self.inner.size as i64;
        let idx = ((j as i64 % n) * (k.rem_euclid(n))).rem_euclid(n);
        self.inner.nodes[idx as usize]
    }

    /// Signal-side angle `theta_j = pi j / N`.
    pub fn angle(&self, j: usize) -> f64 {
        PI * j as f64 / self.inner.size as f64
    }

    /// Signal-side abscissa `x_j = cos(pi j / N)`.
    pub fn abscissa(&self, j: usize) -> f64 {
        self.angle(j).cos()
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.size()).map(|j| self.abscissa(j)).collect()
    }

    /// Smallest frequency index in the coefficient window.
    pub fn min_frequency(&self) -> i64 {
        -(self.inner.size as i64 / 2)
    }

    /// Largest frequency index in the coefficient window.
    pub fn max_frequency(&self) -> i64 {
        self.inner.size as i64 / 2 - 1
    }

    /// Storage slot of frequency `n`, if `n` lies in `[-N/2, N/2)`.
    pub fn slot(&self, n: i64) -> Option<usize> {
        if n < self.min_frequency() || n > self.max_frequency() {
            None
        } else {
            Some(n.rem_euclid(self.inner.size as i64) as usize)
        }
    }

    /// Frequency stored in `slot`.
    pub fn frequency(&self, slot: usize) -> i64 {
        let n = self.inner.size;
        if slot < n / 2 {
            slot as i64
        } else {
            slot as i64 - n as i64
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.inner.inverse.process(buf);
    }

    pub(crate) fn ensure_same(&self, other: &CircleGrid) -> Result<()> {
        if self.size() == other.size() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.size(),
                right: other.size(),
            })
        }
    }
}

impl PartialEq for CircleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.size() == other.size()
    }
}

impl Eq for CircleGrid {}

impl fmt::Debug for CircleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleGrid").field("size", &self.size()).finish()
    }
}

/// Fourier coefficients of a [`CircleFunction`] on the window `[-N/2, N/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: CircleGrid,
    // FFT order: slot k holds frequency k for k < N/2, k - N otherwise.
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &CircleGrid) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.size()],
        }
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    /// Coefficient of `z^n`; zero outside the window.
    pub fn get(&self, n: i64) -> Complex64 {
        self.grid
            .slot(n)
            .map_or(Complex64::new(0.0, 0.0), |s| self.data[s])
    }

    pub fn set(&mut self, n: i64, value: Complex64) -> Result<()> {
        let slot = self.grid.slot(n).ok_or(Error::OutOfWindow {
            index: n,
            size: self.grid.size(),
        })?;
        self.data[slot] = value;
        Ok(())
    }

    /// `(n, c_n)` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (self.grid.min_frequency()..=self.grid.max_frequency()).map(move |n| (n, self.get(n)))
    }

    /// Raw coefficients in FFT slot order.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Wiener algebra norm: the l1 norm of the coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).sum()
    }

    /// Largest modulus among coefficients whose frequency fails `keep`.
    pub fn max_outside(&self, keep: impl Fn(i64) -> bool) -> f64 {
        self.iter()
            .filter(|(n, _)| !keep(*n))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Complex function sampled at the nodes of a [`CircleGrid`].
#[derive(Clone)]
pub struct CircleFunction {
    grid: CircleGrid,
    samples: Vec<Complex64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for CircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleFunction")
            .field("grid", &self.grid)
            .field("samples", &self.samples)
            .finish()
    }
}

impl PartialEq for CircleFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl CircleFunction {
    pub fn from_samples(grid: &CircleGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::GridMismatch {
                left: grid.size(),
                right: samples.len(),
            });
        }
        Ok(Self::from_samples_unchecked(grid, samples))
    }

    fn from_samples_unchecked(grid: &CircleGrid, samples: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            samples,
            coeffs: OnceLock::new(),
        }
    }

    /// Samples `g(z_j)` from a closure of the node.
    pub fn from_fn(grid: &CircleGrid, mut g: impl FnMut(Complex64) -> Complex64) -> Self {
        let samples = grid.nodes().iter().map(|&z| g(z)).collect();
        Self::from_samples_unchecked(grid, samples)
    }

    /// Samples indexed by node number `j`.
    pub fn from_index_fn(grid: &CircleGrid, g: impl FnMut(usize) -> Complex64) -> Self {
        Self::from_samples_unchecked(grid, (0..grid.size()).map(g).collect())
    }

    pub fn constant(grid: &CircleGrid, value: Complex64) -> Self {
        Self::from_samples_unchecked(grid, vec![value; grid.size()])
    }

    pub fn zero(grid: &CircleGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn one(grid: &CircleGrid) -> Self {
        Self::constant(grid, Complex64::new(1.0, 0.0))
    }

    /// Inverse of [`CircleFunction::to_coeffs`].
    pub fn from_coeffs(spectrum: &Spectrum) -> Self {
        let grid = spectrum.grid();
        let mut buf = spectrum.data.clone();
        grid.inverse(&mut buf);
        let coeffs = OnceLock::new();
        let _ = coeffs.set(spectrum.data.clone());
        Self {
            grid: grid.clone(),
            samples: buf,
            coeffs,
        }
    }

    /// Trigonometric polynomial `sum c_n z^n` from sparse `(n, c_n)` terms.
    pub fn from_terms(grid: &CircleGrid, terms: &[(i64, Complex64)]) -> Result<Self> {
        let mut spectrum = Spectrum::zeros(grid);
        for &(n, c) in terms {
            let old = spectrum.get(n);
            spectrum.set(n, old + c)?;
        }
        Ok(Self::from_coeffs(&spectrum))
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    fn coeff_data(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let mut buf = self.samples.clone();
            self.grid.forward(&mut buf);
            let scale = 1.0 / self.grid.size() as f64;
            buf.iter_mut().for_each(|c| *c *= scale);
            buf
        })
    }

    /// Fourier coefficients `c_n`, `n` in `[-N/2, N/2)`.
    pub fn to_coeffs(&self) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            data: self.coeff_data().to_vec(),
        }
    }

    /// Single coefficient `c_n` (zero outside the window).
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.grid
            .slot(n)
            .map_or(Complex64::new(0.0, 0.0), |s| self.coeff_data()[s])
    }

    /// `c_0`, the mean over the circle. Equals `g(infinity)` for `g` analytic
    /// outside the disk and `g(0)` for `g` analytic inside.
    pub fn mean_value(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.grid.size() as f64
    }

    fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let mut spectrum = self.to_coeffs();
        for (slot, c) in spectrum.data.iter_mut().enumerate() {
            *c = f(self.grid.frequency(slot), *c);
        }
        Self::from_coeffs(&spectrum)
    }

    /// Cauchy projection onto `H^2(D)`: keeps `n >= 0`.
    pub fn project_disk(&self) -> Self {
        self.map_coeffs(|n, c| if n >= 0 { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Projection onto `H^2(D*)`: keeps `n <= 0` (including the Nyquist slot).
    pub fn project_disk_star(&self) -> Self {
        self.map_coeffs(|n, c| if n <= 0 { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Circle Hilbert transform of a real function, normalised so that
    /// `Im(f) = H(Re f)` for `f` in `H^2(D)` with `f(0) = 0`.
    ///
    /// The Nyquist coefficient is dropped alongside the mean: no real
    /// multiplier can act on it.
    pub fn hilbert_transform(&self) -> Result<Self> {
        let max_imag = self.max_imag();
        if max_imag > REAL_INPUT_TOL {
            return Err(Error::NonRealInput {
                max_imag,
                tol: REAL_INPUT_TOL,
            });
        }
        let nyquist = self.grid.min_frequency();
        let i = Complex64::new(0.0, 1.0);
        let h = self.map_coeffs(|n, c| {
            if n > 0 {
                -i * c
            } else if n < 0 && n != nyquist {
                i * c
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(h.real_part())
    }

    /// `g*(z) = conj(g(conj(1/z)))`, which is pointwise conjugation on the
    /// circle and `c_n -> conj(c_{-n})` on coefficients.
    pub fn star(&self) -> Self {
        Self::from_samples_unchecked(&self.grid, self.samples.iter().map(|c| c.conj()).collect())
    }

    /// `g(1/z)`, i.e. the node permutation `j -> -j mod N`.
    pub fn reflect(&self) -> Self {
        let n = self.grid.size();
        Self::from_index_fn(&self.grid, |j| self.samples[(n - j) % n])
    }

    /// `z^k g(z)`.
    pub fn shift(&self, k: i64) -> Self {
        Self::from_index_fn(&self.grid, |j| self.samples[j] * self.grid.node_power(j, k))
    }

    pub fn real_part(&self) -> Self {
        Self::from_samples_unchecked(
            &self.grid,
            self.samples.iter().map(|c| Complex64::new(c.re, 0.0)).collect(),
        )
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_samples_unchecked(&self.grid, self.samples.iter().map(|&c| f(c)).collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_samples_unchecked(
            &self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|c| c * s)
    }

    /// `(mean |g|^2)^(1/2)`, the sampled `L^2(T)` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.size() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn inf_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `l1` norm of the Fourier coefficients.
    pub fn wiener_norm(&self) -> f64 {
        self.coeff_data().iter().map(|c| c.norm()).sum()
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }
}
