//! Solitary waves `D^alpha Q + c Q - Q^2 / 2 = 0`: Petviashvili iteration,
//! Pohozaev certificates, Weinstein functional, speed rescaling and tail decay.

use num_complex::Complex64;
use thiserror::Error;

use crate::invariants::{cubic_moment, fractional_energy};
use crate::spectral::{derivative, riesz_potential, Field, GridSpec, SpectralError};

/// Max-norm residual required of a converged wave.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Bound on both normalised Pohozaev residuals.
pub const POHOZAEV_TOL: f64 = 1e-6;
/// Relative evenness defect allowed.
pub const EVENNESS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitaryError {
    #[error("no solitary waves for alpha = {0} (need alpha > 1/3)")]
    AlphaOutOfRange(f64),
    #[error("speed must be positive, got {0}")]
    BadSpeed(f64),
    #[error("iteration did not converge in {iterations} steps (last change {change:e}, residual {residual:e})")]
    NotConverged {
        iterations: usize,
        change: f64,
        residual: f64,
    },
    #[error("iteration collapsed to zero after {0} steps")]
    CollapsedToZero(usize),
    #[error("seed must have a positive cubic moment")]
    BadSeed,
    #[error("constant fields are not decaying solitary-wave candidates")]
    NonDecaying,
    #[error("moment int |u|^(p+2) vanishes")]
    ZeroMoment,
    #[error("alpha = {alpha} is below the Gagliardo-Nirenberg range alpha >= p/(p+2) for p = {p}")]
    BelowGnRange { alpha: f64, p: u32 },
    #[error("target grid under-resolves the rescaled wave (dilation * dx = {0})")]
    UnderResolved(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Tuning of the Petviashvili iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PetviashviliOptions {
    pub max_iter: usize,
    /// Stop when the max-norm update falls below this (relative to `max(1, sup Q)`).
    pub change_tol: f64,
    pub residual_tol: f64,
    /// Stabilising exponent on the Petviashvili factor.
    pub gamma: f64,
    /// Skip the `alpha > 1/3` precondition (diagnostic runs only).
    pub force: bool,
    /// Solve with the two-thirds-rule product used by the time stepper, so
    /// the profile travels exactly under the dealiased semi-discrete flow.
    pub dealias: bool,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            change_tol: 1e-12,
            residual_tol: RESIDUAL_TOL,
            gamma: 2.0,
            force: false,
            dealias: false,
        }
    }
}

/// Three independent acceptance checks on a computed wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub residual_ok: bool,
    pub pohozaev_ok: bool,
    pub evenness_ok: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.pohozaev_ok && self.evenness_ok
    }
}

#[derive(Debug, Clone)]
pub struct SolitaryWave {
    pub alpha: f64,
    pub speed: f64,
    pub profile: Field,
    /// Max-norm residual of the profile equation (dealiased when solved so).
    pub residual: f64,
    pub iterations: usize,
    pub pohozaev: (f64, f64),
    pub evenness_defect: f64,
    /// Strictly decreasing away from the peak on the half grid.
    pub monotone: bool,
}

impl SolitaryWave {
    /// Wraps a profile, computing every diagnostic.
    pub fn from_profile(profile: Field, alpha: f64, speed: f64, iterations: usize) -> Self {
        let residual = residual_of(&profile, alpha, speed);
        let pohozaev = pohozaev_residuals(&profile, alpha, speed);
        let evenness_defect = evenness_defect(&profile);
        let monotone = is_monotone_from_peak(&profile);
        Self {
            alpha,
            speed,
            profile,
            residual,
            iterations,
            pohozaev,
            evenness_defect,
            monotone,
        }
    }

    pub fn certificate(&self) -> Certificate {
        Certificate {
            residual_ok: self.residual <= RESIDUAL_TOL,
            pohozaev_ok: self.pohozaev.0 <= POHOZAEV_TOL && self.pohozaev.1 <= POHOZAEV_TOL,
            evenness_ok: self.evenness_defect <= EVENNESS_TOL,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.certificate().passed()
    }
}

fn d_alpha(q: &Field, alpha: f64) -> Field {
    // alpha > 0 throughout this module, so the zero mode is simply annihilated
    riesz_potential(q, alpha).expect("positive order never needs a mean-free operand")
}

fn residual_of(q: &Field, alpha: f64, c: f64) -> f64 {
    let dq = d_alpha(q, alpha);
    dq.samples()
        .iter()
        .zip(q.samples())
        .map(|(d, v)| (d + c * v - 0.5 * v * v).abs())
        .fold(0.0, f64::max)
}

fn half_square_hat(q: &Field, dealias: bool) -> Vec<Complex64> {
    let src = if dealias { q.dealiased() } else { q.clone() };
    let half_sq: Vec<f64> = src.samples().iter().map(|v| 0.5 * v * v).collect();
    let hat = Field::from_samples(*q.grid(), half_sq).expect("same grid");
    if dealias {
        hat.dealiased().spectrum().to_vec()
    } else {
        hat.spectrum().to_vec()
    }
}

// residual of the dealiased profile equation
fn projected_residual(q: &Field, alpha: f64, c: f64) -> f64 {
    let nl = Field::from_spectrum(*q.grid(), half_square_hat(q, true)).expect("hermitian");
    let dq = d_alpha(q, alpha);
    (0..q.len())
        .map(|j| (dq.samples()[j] + c * q.samples()[j] - nl.samples()[j]).abs())
        .fold(0.0, f64::max)
}

/// Max-norm of `D^alpha Q + c Q - Q^2 / 2`. Non-zero constants are rejected.
pub fn solitary_residual(q: &Field, alpha: f64, c: f64) -> Result<f64, SolitaryError> {
    let s = q.samples();
    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if q.max_abs() == 0.0 {
        return Ok(0.0);
    }
    if hi - lo <= 1e-14 * q.max_abs() {
        return Err(SolitaryError::NonDecaying);
    }
    Ok(residual_of(q, alpha, c))
}

/// `max_j |Q_j - Q_{-j}| / max|Q|`.
pub fn evenness_defect(q: &Field) -> f64 {
    let m = q.max_abs();
    if m == 0.0 {
        return 0.0;
    }
    let g = q.grid();
    let s = q.samples();
    (0..s.len())
        .map(|j| (s[j] - s[g.mirror_index(j)]).abs())
        .fold(0.0, f64::max)
        / m
}

fn is_monotone_from_peak(q: &Field) -> bool {
    let n = q.len();
    let s = q.samples();
    // x = 0 sits at index n/2
    let mid = n / 2;
    (mid..n - 1).all(|j| s[j + 1] < s[j])
}

/// Normalised Pohozaev residuals `(r1, r2)`:
///
/// ```text
/// r1 = |A + cB - C/2| / (|A| + c|B| + |C|/2)
/// r2 = |(alpha-1)A - cB + C/3| / (|alpha-1||A| + c|B| + |C|/3)
/// ```
///
/// with `A = int |D^{alpha/2} Q|^2`, `B = int Q^2`, `C = int Q^3` (0/0 = 0).
pub fn pohozaev_residuals(q: &Field, alpha: f64, c: f64) -> (f64, f64) {
    let a = fractional_energy(q, alpha);
    let b = q.inner(q);
    let c3 = cubic_moment(q);
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let r1 = ratio((a + c * b - 0.5 * c3).abs(), a.abs() + c * b.abs() + 0.5 * c3.abs());
    let r2 = ratio(
        ((alpha - 1.0) * a - c * b + c3 / 3.0).abs(),
        (alpha - 1.0).abs() * a.abs() + c * b.abs() + c3.abs() / 3.0,
    );
    (r1, r2)
}

/// Default seed `c exp(-c x^2 / 4)`.
pub fn default_seed(grid: GridSpec, c: f64) -> Field {
    Field::from_fn(grid, |x| c * (-x * x * c / 4.0).exp())
}

fn residual_for(q: &Field, alpha: f64, c: f64, dealias: bool) -> f64 {
    if dealias {
        projected_residual(q, alpha, c)
    } else {
        residual_of(q, alpha, c)
    }
}

/// Petviashvili fixed-point iteration
///
/// ```text
/// Q_{n+1} = S_n^gamma (c + D^alpha)^{-1} (Q_n^2 / 2),
/// S_n = <(c + D^alpha) Q_n, Q_n> / <Q_n^2 / 2, Q_n>.
/// ```
pub fn petviashvili_solve(
    alpha: f64,
    c: f64,
    grid: GridSpec,
    seed: Option<&Field>,
    opts: &PetviashviliOptions,
) -> Result<SolitaryWave, SolitaryError> {
    if !(alpha.is_finite() && alpha <= 2.0 && alpha > 0.0) || (!opts.force && alpha <= 1.0 / 3.0) {
        return Err(SolitaryError::AlphaOutOfRange(alpha));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SolitaryError::BadSpeed(c));
    }
    let mut q = match seed {
        Some(s) => {
            if s.grid() != &grid {
                return Err(SpectralError::GridMismatch.into());
            }
            s.clone()
        }
        None => default_seed(grid, c),
    };
    if cubic_moment(&q) <= 0.0 {
        return Err(SolitaryError::BadSeed);
    }
    let n = grid.n_points();
    let symbol: Vec<f64> = (0..n)
        .map(|i| {
            let xi = grid.wavenumber(i);
            c + if xi == 0.0 { 0.0 } else { xi.abs().powf(alpha) }
        })
        .collect();

    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let qhat = q.spectrum();
        let nhat = half_square_hat(&q, opts.dealias);
        let mut lin = 0.0;
        let mut nonlin = 0.0;
        for i in 0..n {
            lin += symbol[i] * qhat[i].norm_sqr();
            nonlin += (nhat[i] * qhat[i].conj()).re;
        }
        if !(nonlin > 0.0) || !lin.is_finite() {
            return Err(SolitaryError::CollapsedToZero(it));
        }
        let factor = (lin / nonlin).powf(opts.gamma);
        let next: Vec<Complex64> = nhat.iter().zip(&symbol).map(|(v, s)| v * (factor / s)).collect();
        let q_next = Field::from_spectrum(grid, next)?;
        if !q_next.is_finite() {
            return Err(SolitaryError::NotConverged { iterations: it, change, residual });
        }
        change = q_next.max_diff(&q);
        q = q_next;
        let peak = q.max_abs();
        if peak < 1e-10 {
            return Err(SolitaryError::CollapsedToZero(it));
        }
        if change <= opts.change_tol * peak.max(1.0) {
            residual = residual_for(&q, alpha, c, opts.dealias);
            if residual <= opts.residual_tol {
                let mut wave = SolitaryWave::from_profile(q, alpha, c, it);
                wave.residual = residual;
                return Ok(wave);
            }
        }
    }
    residual = residual_for(&q, alpha, c, opts.dealias);
    Err(SolitaryError::NotConverged {
        iterations: opts.max_iter,
        change,
        residual,
    })
}

/// Pieces of the Weinstein quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeinsteinValue {
    /// `int |D^{alpha/2} u|^2`
    pub a: f64,
    /// `int u^2`
    pub b: f64,
    /// `int |u|^{p+2}`
    pub c: f64,
    pub value: f64,
}

/// `J = A^{p/(2 alpha)} B^{p(alpha-1)/(2 alpha) + 1} / C`.
pub fn weinstein_functional(u: &Field, alpha: f64, p: u32) -> Result<WeinsteinValue, SolitaryError> {
    let pf = p as f64;
    if alpha < pf / (pf + 2.0) {
        return Err(SolitaryError::BelowGnRange { alpha, p });
    }
    let a = fractional_energy(u, alpha);
    let b = u.inner(u);
    let c = u.grid().dx() * u.samples().iter().map(|v| v.abs().powi(p as i32 + 2)).sum::<f64>();
    if c == 0.0 {
        return Err(SolitaryError::ZeroMoment);
    }
    let value = a.powf(pf / (2.0 * alpha)) * b.powf(pf * (alpha - 1.0) / (2.0 * alpha) + 1.0) / c;
    Ok(WeinsteinValue { a, b, c, value })
}

/// Dilation factor and amplitude taking a speed-`c0` wave to speed `c_new`:
/// `Q_{c}(x) = (c / c0) Q_{c0}((c / c0)^{1/alpha} x)`.
pub fn speed_scaling(alpha: f64, c0: f64, c_new: f64) -> (f64, f64) {
    let ratio = c_new / c0;
    (ratio.powf(1.0 / alpha), ratio)
}

/// Resamples `wave` at speed `c_new` on its own grid.
pub fn rescale_wave(wave: &SolitaryWave, c_new: f64) -> Result<Field, SolitaryError> {
    rescale_wave_on(wave, c_new, *wave.profile.grid())
}

/// Resamples `wave` at speed `c_new` on `target` by trigonometric
/// interpolation. Points mapped outside the source box take the value zero.
pub fn rescale_wave_on(wave: &SolitaryWave, c_new: f64, target: GridSpec) -> Result<Field, SolitaryError> {
    if !(c_new > 0.0 && c_new.is_finite()) {
        return Err(SolitaryError::BadSpeed(c_new));
    }
    let (lambda, amp) = speed_scaling(wave.alpha, wave.speed, c_new);
    dilate(&wave.profile, lambda, amp, target)
}

/// `amp * f(lambda x)` sampled on `target`.
pub fn dilate(f: &Field, lambda: f64, amp: f64, target: GridSpec) -> Result<Field, SolitaryError> {
    let src = *f.grid();
    if lambda * target.dx() > 0.5 {
        return Err(SolitaryError::UnderResolved(lambda * target.dx()));
    }
    if lambda == 1.0 && target == src {
        return Ok(f.scale(amp));
    }
    let l = src.half_length();
    let xs = target.points();
    let inside: Vec<usize> = (0..xs.len()).filter(|&j| (lambda * xs[j]).abs() <= l * (1.0 + 1e-12)).collect();
    let pts: Vec<f64> = inside.iter().map(|&j| lambda * xs[j]).collect();
    let vals = f.interpolate(&pts);
    let mut out = vec![0.0; xs.len()];
    for (&j, v) in inside.iter().zip(vals) {
        out[j] = amp * v;
    }
    Ok(Field::from_samples(target, out)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayStatus {
    /// Power-law fit succeeded.
    Fitted { exponent: f64, within_tolerance: bool },
    /// The profile reaches the noise floor inside the window.
    TailBelowNoise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub status: DecayStatus,
    /// Plain least-squares slope of `log Q` against `log x`, biased by periodic images.
    pub raw_slope: Option<f64>,
    pub window: (f64, f64),
    /// Expected exponent `-(1 + alpha)`.
    pub expected: f64,
    /// `sup (1 + |x|^{1+alpha}) (|Q| + |x Q'|)` over the window.
    pub empirical_constant: f64,
}

/// Fits the tail on `[L/8, L/2]` with `b + C sum_k |x + 2Lk|^{-p}`, the
/// periodization of a power law plus the background mean.
pub fn decay_check(wave: &SolitaryWave) -> DecayReport {
    const EXPONENT_TOL: f64 = 0.15;
    let q = &wave.profile;
    let g = q.grid();
    let l = g.half_length();
    let window = (l / 8.0, l / 2.0);
    let expected = -(1.0 + wave.alpha);
    let dq = derivative(q);
    let peak = q.max_abs();
    let idx: Vec<usize> = (0..g.n_points())
        .filter(|&j| {
            let x = g.x(j);
            x >= window.0 && x <= window.1
        })
        .collect();
    let empirical_constant = idx
        .iter()
        .map(|&j| {
            let x = g.x(j);
            (1.0 + x.powf(1.0 + wave.alpha)) * (q.samples()[j].abs() + (x * dq.samples()[j]).abs())
        })
        .fold(0.0, f64::max);
    let noisy = peak == 0.0 || idx.iter().any(|&j| q.samples()[j] <= 1e-14 * peak.max(1e-300));
    if noisy || idx.len() < 2 {
        return DecayReport {
            status: DecayStatus::TailBelowNoise,
            raw_slope: None,
            window,
            expected,
            empirical_constant,
        };
    }
    let xs: Vec<f64> = idx.iter().map(|&j| g.x(j)).collect();
    let ys: Vec<f64> = idx.iter().map(|&j| q.samples()[j]).collect();
    let raw_slope = log_log_slope(&xs, &ys);
    let exponent = fit_periodized_power(&xs, &ys, l);
    DecayReport {
        status: DecayStatus::Fitted {
            exponent,
            within_tolerance: (exponent - expected).abs() <= EXPONENT_TOL,
        },
        raw_slope: Some(raw_slope),
        window,
        expected,
        empirical_constant,
    }
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn periodized(x: f64, l: f64, p: f64) -> f64 {
    const IMAGES: i32 = 200;
    (-IMAGES..=IMAGES).map(|k| (x + 2.0 * l * k as f64).abs().powf(-p)).sum()
}

// relative misfit of the best `b + C phi_p` for fixed p
fn tail_misfit(xs: &[f64], ys: &[f64], l: f64, p: f64) -> f64 {
    let phi: Vec<f64> = xs.iter().map(|&x| periodized(x, l, p)).collect();
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (f, y) in phi.iter().zip(ys) {
        let w = 1.0 / (y * y);
        s11 += w;
        s12 += w * f;
        s22 += w * f * f;
        r1 += w * y;
        r2 += w * f * y;
    }
    let det = s11 * s22 - s12 * s12;
    let b = (r1 * s22 - r2 * s12) / det;
    let c = (s11 * r2 - s12 * r1) / det;
    phi.iter().zip(ys).map(|(f, y)| ((b + c * f - y) / y).powi(2)).sum()
}

fn fit_periodized_power(xs: &[f64], ys: &[f64], l: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (1.05, 4.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (tail_misfit(xs, ys, l, c), tail_misfit(xs, ys, l, d));
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = tail_misfit(xs, ys, l, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = tail_misfit(xs, ys, l, d);
        }
    }
    -0.5 * (a + b)
}
