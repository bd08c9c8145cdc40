//! Periodic grids, spectral transforms and Fourier multipliers.
//!
//! The real line is truncated to the box `[-L, L)` sampled at `n` equispaced
//! points. Spectra are stored in FFT order (`k = 0, 1, .., n/2 - 1, -n/2, .., -1`)
//! and are unnormalised: `F_k = sum_j f_j exp(-2 pi i j k / n)`.
//!
//! Odd multipliers (derivative, Hilbert transform, dispersive phases) act as
//! zero on the unpaired Nyquist mode, which has no conjugate partner.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Mean-free tolerance used by operators that are singular at `xi = 0`.
pub const MEAN_FREE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} is not a power of two >= 8")]
    BadPointCount(usize),
    #[error("half length must be positive and finite, got {0}")]
    BadHalfLength(f64),
    #[error("multiplier is not finite at xi = {xi}")]
    NonFiniteMultiplier { xi: f64 },
    #[error("operand has a non-zero mean ({mean:e}); a negative-order operator is singular at xi = 0")]
    NotMeanFree { mean: f64 },
    #[error("sample count {actual} does not match grid size {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Uniform periodic grid on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_points: usize,
    half_length: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, half_length: f64) -> Result<Self, SpectralError> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(SpectralError::BadPointCount(n_points));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(SpectralError::BadHalfLength(half_length));
        }
        Ok(Self {
            n_points,
            half_length,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    /// Spacing of the wavenumber ladder, `pi / L`.
    pub fn fundamental(&self) -> f64 {
        PI / self.half_length
    }

    /// Position of sample `j`.
    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed integer mode number of FFT slot `index`.
    pub fn mode(&self, index: usize) -> i64 {
        let n = self.n_points;
        if index < n / 2 {
            index as i64
        } else {
            index as i64 - n as i64
        }
    }

    /// Angular wavenumber of FFT slot `index`.
    pub fn wavenumber(&self, index: usize) -> f64 {
        self.mode(index) as f64 * self.fundamental()
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.wavenumber(i)).collect()
    }

    /// FFT slot of the unpaired mode `k = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Largest resolved `|xi|`.
    pub fn nyquist(&self) -> f64 {
        (self.n_points / 2) as f64 * self.fundamental()
    }

    /// Index reflected through `x = 0` (`x_j -> -x_j`).
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} points on [-{}, {})", self.n_points, self.half_length, self.half_length)
    }
}

/// Builds a grid of `n_points` samples on `[-half_length, half_length)`.
pub fn make_grid(n_points: usize, half_length: f64) -> Result<GridSpec, SpectralError> {
    GridSpec::new(n_points, half_length)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

pub(crate) fn forward_transform(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(buf.len(), true).process(&mut buf);
    buf
}

pub(crate) fn inverse_transform(spectrum: &[Complex64]) -> Vec<f64> {
    let mut buf = spectrum.to_vec();
    let n = buf.len();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Real grid function with a lazily computed spectrum.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn from_samples(grid: GridSpec, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.n_points() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n_points(),
                actual: samples.len(),
            });
        }
        Ok(Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let samples = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            samples: vec![value; grid.n_points()],
            spectrum: OnceLock::new(),
        }
    }

    /// Builds a field from FFT-ordered modal coefficients. The imaginary part of
    /// the inverse transform is discarded.
    pub fn from_spectrum(grid: GridSpec, spectrum: Vec<Complex64>) -> Result<Self, SpectralError> {
        if spectrum.len() != grid.n_points() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n_points(),
                actual: spectrum.len(),
            });
        }
        let samples = inverse_transform(&spectrum);
        Ok(Self {
            grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub(crate) fn from_spectrum_unchecked(grid: GridSpec, spectrum: &[Complex64]) -> Self {
        Self {
            grid,
            samples: inverse_transform(spectrum),
            spectrum: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// FFT-ordered, unnormalised modal coefficients.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| forward_transform(&self.samples))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// True when the zero mode vanishes to [`MEAN_FREE_TOL`] relative to the field size.
    pub fn is_mean_free(&self) -> bool {
        self.mean().abs() <= MEAN_FREE_TOL * self.max_abs().max(1.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Field {
            grid: self.grid,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field, SpectralError> {
        self.axpby(1.0, other, -1.0)
    }

    /// Max-norm distance to `other`.
    pub fn max_diff(&self, other: &Field) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Periodic trapezoid rule for `int f dx`.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.samples.iter().sum::<f64>()
    }

    /// Periodic trapezoid rule for `int f g dx`.
    pub fn inner(&self, other: &Field) -> f64 {
        self.grid.dx() * self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `int w(xi) |f^(xi)|^2` over the discrete spectrum (Parseval-normalised).
    pub fn spectral_quadratic_form(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let n = self.grid.n_points();
        let norm = self.grid.dx() / n as f64;
        let spec = self.spectrum();
        (0..n)
            .map(|i| {
                let a = spec[i].norm_sqr();
                if a == 0.0 {
                    0.0
                } else {
                    weight(self.grid.wavenumber(i)) * a
                }
            })
            .sum::<f64>()
            * norm
    }

    /// Evaluates the trigonometric interpolant at arbitrary points.
    pub fn interpolate(&self, xs: &[f64]) -> Vec<f64> {
        let n = self.grid.n_points();
        let l = self.grid.half_length();
        let spec = self.spectrum();
        let half = n / 2;
        let inv_n = 1.0 / n as f64;
        xs.iter()
            .map(|&x| {
                let theta = PI * (x + l) / l;
                let step = Complex64::from_polar(1.0, theta);
                let mut acc = 0.0;
                let mut w = Complex64::new(1.0, 0.0);
                for (k, c) in spec.iter().enumerate().take(half).skip(1) {
                    if k % 64 == 0 {
                        w = Complex64::from_polar(1.0, theta * k as f64);
                    } else {
                        w *= step;
                    }
                    acc += 2.0 * (c * w).re;
                }
                acc += spec[0].re;
                acc += (spec[half] * Complex64::from_polar(1.0, -theta * half as f64)).re;
                acc * inv_n
            })
            .collect()
    }

    /// Spectral translate `f(x - a)`.
    pub fn shift(&self, a: f64) -> Field {
        let grid = self.grid;
        let nyq = grid.nyquist_index();
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let xi = grid.wavenumber(i);
                if i == nyq {
                    c * (xi * a).cos()
                } else {
                    c * Complex64::from_polar(1.0, -xi * a)
                }
            })
            .collect();
        Field::from_spectrum_unchecked(grid, &spec)
    }

    /// Zeroes every mode with `|k| > n / 3` (two-thirds rule).
    pub fn dealiased(&self) -> Field {
        let grid = self.grid;
        let cut = (grid.n_points() / 3) as i64;
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, c)| if grid.mode(i).abs() > cut { Complex64::new(0.0, 0.0) } else { *c })
            .collect();
        Field::from_spectrum_unchecked(grid, &spec)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

pub(crate) fn spectrum_map(
    f: &Field,
    mut m: impl FnMut(usize, f64, Complex64) -> Complex64,
) -> Field {
    let grid = *f.grid();
    let spec: Vec<Complex64> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, c)| m(i, grid.wavenumber(i), *c))
        .collect();
    Field::from_spectrum_unchecked(grid, &spec)
}

/// Multiplies every modal coefficient by `m(xi)`. Rejects non-finite values.
pub fn apply_multiplier(
    f: &Field,
    m: impl Fn(f64) -> Complex64,
) -> Result<Field, SpectralError> {
    let grid = *f.grid();
    let mut spec = Vec::with_capacity(grid.n_points());
    for (i, c) in f.spectrum().iter().enumerate() {
        let xi = grid.wavenumber(i);
        let v = m(xi);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(SpectralError::NonFiniteMultiplier { xi });
        }
        spec.push(c * v);
    }
    Ok(Field::from_spectrum_unchecked(grid, &spec))
}

/// Odd real-output multiplier `i * s(xi)` with the Nyquist slot zeroed.
fn apply_odd(f: &Field, s: impl Fn(f64) -> f64) -> Field {
    let nyq = f.grid().nyquist_index();
    spectrum_map(f, |i, xi, c| {
        if i == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, s(xi))
        }
    })
}

/// Riesz potential `D^beta`, the multiplier `|xi|^beta`.
pub fn riesz_potential(f: &Field, beta: f64) -> Result<Field, SpectralError> {
    if beta == 0.0 {
        return Ok(f.clone());
    }
    if beta < 0.0 && !f.is_mean_free() {
        return Err(SpectralError::NotMeanFree { mean: f.mean() });
    }
    Ok(spectrum_map(f, |_, xi, c| {
        if xi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * xi.abs().powf(beta)
        }
    }))
}

/// Hilbert transform, multiplier `-i sgn(xi)`, so that `D^1 = H d/dx`.
pub fn hilbert_transform(f: &Field) -> Field {
    apply_odd(f, |xi| {
        if xi > 0.0 {
            -1.0
        } else if xi < 0.0 {
            1.0
        } else {
            0.0
        }
    })
}

/// Spectral derivative, multiplier `i xi`.
pub fn derivative(f: &Field) -> Field {
    apply_odd(f, |xi| xi)
}

/// Multiplies each mode by `exp(i t rate(xi))`. The Nyquist mode is left
/// untouched (the odd exponent is zero there).
pub fn propagate(f: &Field, rate: impl Fn(f64) -> f64, t: f64) -> Field {
    let nyq = f.grid().nyquist_index();
    spectrum_map(f, |i, xi, c| {
        if i == nyq || xi == 0.0 {
            c
        } else {
            c * Complex64::from_polar(1.0, t * rate(xi))
        }
    })
}

/// Linear group of `u_t - D^alpha u_x = 0`: `exp(i t |xi|^alpha xi)`.
pub fn free_group(f: &Field, alpha: f64, t: f64) -> Field {
    propagate(f, |xi| xi.abs().powf(alpha) * xi, t)
}

/// Sobolev exponent together with the homogeneous / inhomogeneous choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub fn inhomogeneous(s: f64) -> Self {
        Self { s, homogeneous: false }
    }

    pub fn homogeneous(s: f64) -> Self {
        Self { s, homogeneous: true }
    }
}

/// `||f||_{H^s}` or `||f||_{Hdot^s}` by the discrete Parseval sum. Homogeneous
/// norms always drop the zero mode.
pub fn sobolev_norm(f: &Field, idx: SobolevIndex) -> Result<f64, SpectralError> {
    let s = idx.s;
    let sq = if idx.homogeneous {
        if s < 0.0 && !f.is_mean_free() {
            return Err(SpectralError::NotMeanFree { mean: f.mean() });
        }
        f.spectral_quadratic_form(|xi| if xi == 0.0 { 0.0 } else { xi.abs().powf(2.0 * s) })
    } else {
        f.spectral_quadratic_form(|xi| (1.0 + xi * xi).powf(s))
    };
    Ok(sq.max(0.0).sqrt())
}
