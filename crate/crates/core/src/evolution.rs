//! Time integration of the dispersive Burgers / Whitham family and the
//! fractional BBM equation.
//!
//! The Whitham-type families are written as
//!
//! ```text
//! u_t = sigma * delta * L u_x - nu * u u_x,     L^ = p(xi)
//! ```
//!
//! with `delta = nu = epsilon` by default and `sigma = +1` (standard sign).
//! They are advanced by integrating-factor RK4 in the frame of the exact
//! linear group. The fractional BBM equation
//!
//! ```text
//! u_t = -d/dx (I + delta D^alpha)^{-1} (u + nu u^2 / 2)
//! ```
//!
//! has a bounded linear part and is advanced by classical RK4.

use num_complex::Complex64;
use thiserror::Error;

use crate::dispersion::{DispersionSymbol, SymbolFamily};
use crate::invariants;
use crate::spectral::{forward_transform, inverse_transform, sobolev_norm, Field, GridSpec, SobolevIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("fractional BBM needs a power-law symbol")]
    BbmNeedsPower,
    #[error("initial data is not finite")]
    NonFiniteInitial,
    #[error("time step must be {0}")]
    BadTimeStep(&'static str),
    #[error("final time must be positive, got {0}")]
    BadFinalTime(f64),
    #[error("invalid step controls: {0}")]
    BadControls(String),
    #[error("state became non-finite")]
    NonFiniteState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationFamily {
    /// `u_t + u u_x - L u_x = 0` for an arbitrary even symbol.
    WhithamType,
    /// `u_t - D^alpha u_x + u u_x = 0`, power symbol.
    DispersiveBurgers,
    /// `u_t + d/dx (I + D^alpha)^{-1} (u + u^2/2) = 0`.
    FractionalBbm,
}

impl EquationFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            EquationFamily::WhithamType => "whitham_type",
            EquationFamily::DispersiveBurgers => "dispersive_burgers",
            EquationFamily::FractionalBbm => "fractional_bbm",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "whitham_type" => Some(EquationFamily::WhithamType),
            "dispersive_burgers" => Some(EquationFamily::DispersiveBurgers),
            "fractional_bbm" => Some(EquationFamily::FractionalBbm),
            _ => None,
        }
    }
}

/// Sign in front of the dispersive term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersionSign {
    /// `u_t + u u_x - L u_x = 0`
    #[default]
    Standard,
    /// `u_t + u u_x + L u_x = 0`
    Reversed,
}

impl DispersionSign {
    pub fn value(&self) -> f64 {
        match self {
            DispersionSign::Standard => 1.0,
            DispersionSign::Reversed => -1.0,
        }
    }
}

/// Coefficient of the nonlinear term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonlinearScale {
    /// `epsilon u u_x`
    #[default]
    Epsilon,
    /// `u u_x`, the amplitude-rescaled form `v = epsilon u`.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepControls {
    pub cfl_factor: f64,
    pub dt_floor: f64,
    pub breaking_factor: f64,
    pub dealias: bool,
    /// Diagnostics (and snapshots, when stored) every this many steps.
    pub snapshot_stride: usize,
    /// Optional cap on the step size.
    pub max_dt: Option<f64>,
    pub store_snapshots: bool,
    /// Exponents `s` of the `H^s` norms recorded with each diagnostic row.
    pub hs_list: Vec<f64>,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            cfl_factor: 0.5,
            dt_floor: 1e-9,
            breaking_factor: 50.0,
            dealias: true,
            snapshot_stride: 10,
            max_dt: None,
            store_snapshots: false,
            hs_list: Vec::new(),
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: &str| Err(EvolutionError::BadControls(m.to_string()));
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return bad("cfl_factor must lie in (0, 1]");
        }
        if !(self.dt_floor > 0.0) {
            return bad("dt_floor must be positive");
        }
        if !(self.breaking_factor > 1.0) {
            return bad("breaking_factor must exceed 1");
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be at least 1");
        }
        if let Some(m) = self.max_dt {
            if !(m > 0.0) {
                return bad("max_dt must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    pub family: EquationFamily,
    pub symbol: DispersionSymbol,
    pub epsilon: f64,
    pub initial: Field,
    pub controls: StepControls,
    pub dispersion_sign: DispersionSign,
    pub nonlinear_scale: NonlinearScale,
    /// Switches the quadratic term off (linear propagation only).
    pub nonlinear: bool,
}

impl EvolutionProblem {
    pub fn new(
        family: EquationFamily,
        symbol: DispersionSymbol,
        epsilon: f64,
        initial: Field,
        controls: StepControls,
    ) -> Result<Self, EvolutionError> {
        let p = Self {
            family,
            symbol,
            epsilon,
            initial,
            controls,
            dispersion_sign: DispersionSign::Standard,
            nonlinear_scale: NonlinearScale::Epsilon,
            nonlinear: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(EvolutionError::BadEpsilon(self.epsilon));
        }
        if self.family == EquationFamily::FractionalBbm && self.bbm_alpha().is_none() {
            return Err(EvolutionError::BbmNeedsPower);
        }
        if self.family == EquationFamily::DispersiveBurgers && self.symbol.power_alpha().is_none() {
            return Err(EvolutionError::BadControls(
                "dispersive_burgers needs a power symbol".into(),
            ));
        }
        if !self.initial.is_finite() {
            return Err(EvolutionError::NonFiniteInitial);
        }
        self.controls.validate()
    }

    fn bbm_alpha(&self) -> Option<f64> {
        match self.symbol.family() {
            SymbolFamily::Power { alpha } => Some(*alpha),
            SymbolFamily::Bbm { alpha } => Some(*alpha),
            _ => None,
        }
    }

    pub fn dispersion_coefficient(&self) -> f64 {
        self.epsilon
    }

    pub fn nonlinear_coefficient(&self) -> f64 {
        match self.nonlinear_scale {
            NonlinearScale::Epsilon => self.epsilon,
            NonlinearScale::Unit => 1.0,
        }
    }

    /// The equivalent problem for `v = epsilon u`: same dispersion, unit
    /// nonlinearity, initial data `epsilon u0`.
    pub fn amplitude_rescaled(&self) -> EvolutionProblem {
        let mut p = self.clone();
        p.initial = self.initial.scale(self.epsilon);
        p.nonlinear_scale = NonlinearScale::Unit;
        p
    }

    /// The conserved energy-type quantity reported in the `hamiltonian` column:
    /// the Hamiltonian for Whitham-type equations, `E` for BBM.
    pub fn conserved_energy(&self, u: &Field) -> f64 {
        let delta = self.dispersion_coefficient();
        let nu = self.nonlinear_coefficient();
        match self.family {
            EquationFamily::FractionalBbm => {
                let alpha = self.bbm_alpha().unwrap_or(0.0);
                u.inner(u) + delta * invariants::fractional_energy(u, alpha)
            }
            _ => {
                let p0 = self.symbol.evaluate(0.0);
                let quad = u.spectral_quadratic_form(|xi| {
                    if xi == 0.0 {
                        if p0.is_finite() {
                            p0
                        } else {
                            0.0
                        }
                    } else {
                        self.symbol.evaluate(xi)
                    }
                });
                self.dispersion_sign.value() * (delta / nu) * 0.5 * quad
                    - invariants::cubic_moment(u) / 6.0
            }
        }
    }

    /// BBM Hamiltonian `1/2 int (u^2 + nu u^3 / 3)`.
    pub fn bbm_hamiltonian(&self, u: &Field) -> f64 {
        0.5 * (u.inner(u) + self.nonlinear_coefficient() * invariants::cubic_moment(u) / 3.0)
    }
}

/// One-step integrator built for a fixed problem.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: GridSpec,
    family: EquationFamily,
    /// Linear dispersion rate per slot (integrating-factor families).
    rate: Vec<f64>,
    /// `1 / (1 + delta |xi|^alpha)` per slot (BBM).
    smoothing: Vec<f64>,
    /// `xi` with the Nyquist slot zeroed.
    dx_symbol: Vec<f64>,
    keep: Vec<bool>,
    nu: f64,
    nonlinear: bool,
}

impl Stepper {
    pub fn new(problem: &EvolutionProblem) -> Self {
        let grid = *problem.initial.grid();
        let n = grid.n_points();
        let nyq = grid.nyquist_index();
        let delta = problem.dispersion_coefficient();
        let sigma = problem.dispersion_sign.value();
        let cut = (n / 3) as i64;
        let mut rate = vec![0.0; n];
        let mut smoothing = vec![0.0; n];
        let mut dx_symbol = vec![0.0; n];
        let mut keep = vec![true; n];
        let bbm_alpha = problem.bbm_alpha().unwrap_or(0.0);
        for i in 0..n {
            let xi = grid.wavenumber(i);
            if i != nyq {
                dx_symbol[i] = xi;
                rate[i] = sigma * delta * problem.symbol.phase_rate(xi);
            }
            smoothing[i] = 1.0 / (1.0 + delta * if xi == 0.0 { if bbm_alpha == 0.0 { 1.0 } else { 0.0 } } else { xi.abs().powf(bbm_alpha) });
            keep[i] = !problem.controls.dealias || grid.mode(i).abs() <= cut;
        }
        Self {
            grid,
            family: problem.family,
            rate,
            smoothing,
            dx_symbol,
            keep,
            nu: problem.nonlinear_coefficient(),
            nonlinear: problem.nonlinear,
        }
    }

    /// Spectrum of `u^2`, with the two-thirds rule applied when enabled.
    fn square_hat(&self, uhat: &[Complex64]) -> Vec<Complex64> {
        let filtered: Vec<Complex64> = uhat
            .iter()
            .zip(&self.keep)
            .map(|(c, &k)| if k { *c } else { Complex64::new(0.0, 0.0) })
            .collect();
        let u = inverse_transform(&filtered);
        let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
        let mut out = forward_transform(&sq);
        for (c, &k) in out.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `-nu * 1/2 d/dx (u^2)` in spectral space.
    fn nonlinear_hat(&self, uhat: &[Complex64]) -> Vec<Complex64> {
        if !self.nonlinear {
            return vec![Complex64::new(0.0, 0.0); uhat.len()];
        }
        let mut sq = self.square_hat(uhat);
        for (c, &xi) in sq.iter_mut().zip(&self.dx_symbol) {
            *c *= Complex64::new(0.0, -0.5 * self.nu * xi);
        }
        sq
    }

    fn bbm_rhs_hat(&self, uhat: &[Complex64]) -> Vec<Complex64> {
        let sq = if self.nonlinear {
            self.square_hat(uhat)
        } else {
            vec![Complex64::new(0.0, 0.0); uhat.len()]
        };
        uhat.iter()
            .zip(&sq)
            .enumerate()
            .map(|(i, (u, s))| {
                let w = u + s * (0.5 * self.nu);
                w * Complex64::new(0.0, -self.dx_symbol[i] * self.smoothing[i])
            })
            .collect()
    }

    /// Advances `u` by `dt` (either sign).
    pub fn step(&self, u: &Field, dt: f64) -> Field {
        let uhat = u.spectrum();
        let next = match self.family {
            EquationFamily::FractionalBbm => self.rk4(uhat, dt),
            _ => self.if_rk4(uhat, dt),
        };
        Field::from_spectrum_unchecked(self.grid, &next)
    }

    fn if_rk4(&self, uhat: &[Complex64], dt: f64) -> Vec<Complex64> {
        let e_half: Vec<Complex64> = self.rate.iter().map(|r| Complex64::from_polar(1.0, r * dt * 0.5)).collect();
        let e_full: Vec<Complex64> = e_half.iter().map(|e| e * e).collect();
        let n = uhat.len();
        let k1 = self.nonlinear_hat(uhat);
        let a: Vec<Complex64> = (0..n).map(|i| e_half[i] * (uhat[i] + k1[i] * (0.5 * dt))).collect();
        let k2 = self.nonlinear_hat(&a);
        let b: Vec<Complex64> = (0..n).map(|i| e_half[i] * uhat[i] + k2[i] * (0.5 * dt)).collect();
        let k3 = self.nonlinear_hat(&b);
        let c: Vec<Complex64> = (0..n).map(|i| e_full[i] * uhat[i] + e_half[i] * k3[i] * dt).collect();
        let k4 = self.nonlinear_hat(&c);
        (0..n)
            .map(|i| {
                e_full[i] * uhat[i]
                    + (e_full[i] * k1[i] + e_half[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0)
            })
            .collect()
    }

    fn rk4(&self, uhat: &[Complex64], dt: f64) -> Vec<Complex64> {
        let n = uhat.len();
        let k1 = self.bbm_rhs_hat(uhat);
        let a: Vec<Complex64> = (0..n).map(|i| uhat[i] + k1[i] * (0.5 * dt)).collect();
        let k2 = self.bbm_rhs_hat(&a);
        let b: Vec<Complex64> = (0..n).map(|i| uhat[i] + k2[i] * (0.5 * dt)).collect();
        let k3 = self.bbm_rhs_hat(&b);
        let c: Vec<Complex64> = (0..n).map(|i| uhat[i] + k3[i] * dt).collect();
        let k4 = self.bbm_rhs_hat(&c);
        (0..n)
            .map(|i| uhat[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
            .collect()
    }
}

/// `1/2 d/dx (u^2)`, i.e. `u u_x` in conservative form.
pub fn nonlinear_term(f: &Field, dealias: bool) -> Field {
    let grid = *f.grid();
    let n = grid.n_points();
    let cut = (n / 3) as i64;
    let nyq = grid.nyquist_index();
    let keep = |i: usize| !dealias || grid.mode(i).abs() <= cut;
    let filtered: Vec<Complex64> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, c)| if keep(i) { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    let u = inverse_transform(&filtered);
    let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    let out: Vec<Complex64> = forward_transform(&sq)
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if i == nyq || !keep(i) {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, 0.5 * grid.wavenumber(i))
            }
        })
        .collect();
    Field::from_spectrum_unchecked(grid, &out)
}

/// One integrating-factor RK4 step of `u_t - epsilon L u_x + epsilon u u_x = 0`
/// with the two-thirds rule.
pub fn step_dispersive(
    state: &Field,
    dt: f64,
    symbol: &DispersionSymbol,
    epsilon: f64,
) -> Result<Field, EvolutionError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EvolutionError::BadTimeStep("positive and finite"));
    }
    let problem = EvolutionProblem::new(
        EquationFamily::WhithamType,
        symbol.clone(),
        epsilon,
        state.clone(),
        StepControls::default(),
    )?;
    let next = Stepper::new(&problem).step(state, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(EvolutionError::NonFiniteState)
    }
}

/// Right-hand side `-d/dx (I + epsilon D^alpha)^{-1} (u + epsilon u^2 / 2)`
/// (two-thirds rule on the square).
pub fn bbm_rhs(f: &Field, alpha: f64, epsilon: f64) -> Field {
    let grid = *f.grid();
    let n = grid.n_points();
    let nyq = grid.nyquist_index();
    let sq = nonlinear_square(f);
    let spec: Vec<Complex64> = (0..n)
        .map(|i| {
            if i == nyq {
                return Complex64::new(0.0, 0.0);
            }
            let xi = grid.wavenumber(i);
            let w = f.spectrum()[i] + sq[i] * (0.5 * epsilon);
            let d = if xi == 0.0 { if alpha == 0.0 { 1.0 } else { 0.0 } } else { xi.abs().powf(alpha) };
            w * Complex64::new(0.0, -xi / (1.0 + epsilon * d))
        })
        .collect();
    Field::from_spectrum_unchecked(grid, &spec)
}

fn nonlinear_square(f: &Field) -> Vec<Complex64> {
    let grid = *f.grid();
    let cut = (grid.n_points() / 3) as i64;
    let filtered: Vec<Complex64> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, c)| if grid.mode(i).abs() <= cut { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    let u = inverse_transform(&filtered);
    let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    forward_transform(&sq)
        .into_iter()
        .enumerate()
        .map(|(i, c)| if grid.mode(i).abs() <= cut { c } else { Complex64::new(0.0, 0.0) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Completed,
    BreakingDetected,
    DtFloorHit,
    NonfiniteDetected,
}

impl RunOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            RunOutcome::Completed => "completed",
            RunOutcome::BreakingDetected => "breaking_detected",
            RunOutcome::DtFloorHit => "dt_floor_hit",
            RunOutcome::NonfiniteDetected => "nonfinite_detected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub mass: f64,
    /// Hamiltonian, or the energy `E` for BBM runs.
    pub hamiltonian: f64,
    pub sup_u: f64,
    pub sup_ux: f64,
    pub dt: f64,
    pub hs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSeries {
    pub hs_list: Vec<f64>,
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticsSeries {
    pub fn first(&self) -> Option<&DiagnosticRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&DiagnosticRecord> {
        self.records.last()
    }

    /// Largest relative deviation of a column from its initial value.
    pub fn relative_drift(&self, column: impl Fn(&DiagnosticRecord) -> f64) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let base = column(first);
        self.records
            .iter()
            .map(|r| {
                let d = (column(r) - base).abs();
                if base == 0.0 {
                    d
                } else {
                    d / base.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn max_sup_ux(&self) -> f64 {
        self.records.iter().map(|r| r.sup_ux).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_field: Field,
    pub final_time: f64,
    pub diagnostics: DiagnosticsSeries,
    pub outcome: RunOutcome,
    pub snapshots: Vec<(f64, Field)>,
    /// Refined crossing time of the breaking threshold.
    pub breaking_time: Option<f64>,
    pub steps: usize,
}

fn sup_abs_derivative(u: &Field) -> f64 {
    crate::spectral::derivative(u).max_abs()
}

fn record(problem: &EvolutionProblem, u: &Field, t: f64, dt: f64, hs_list: &[f64]) -> DiagnosticRecord {
    DiagnosticRecord {
        t,
        mass: u.inner(u),
        hamiltonian: problem.conserved_energy(u),
        sup_u: u.max_abs(),
        sup_ux: sup_abs_derivative(u),
        dt,
        hs: hs_list
            .iter()
            .map(|&s| sobolev_norm(u, SobolevIndex::inhomogeneous(s)).unwrap_or(f64::NAN))
            .collect(),
    }
}

/// CFL surrogate `cfl * dx / max(1, sup|u|)`, capped by `max_dt`.
fn stable_dt(problem: &EvolutionProblem, u: &Field) -> f64 {
    let c = &problem.controls;
    let dt = c.cfl_factor * u.grid().dx() / u.max_abs().max(1.0);
    match c.max_dt {
        Some(m) => dt.min(m),
        None => dt,
    }
}

/// Integrates `problem` up to `t_end`, monitoring `sup|u_x|` for breaking.
pub fn run(problem: &EvolutionProblem, t_end: f64) -> Result<RunResult, EvolutionError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(EvolutionError::BadFinalTime(t_end));
    }
    problem.validate()?;
    let controls = &problem.controls;
    let stepper = Stepper::new(problem);
    let hs_list = controls.hs_list.clone();

    let mut u = problem.initial.clone();
    let mut t = 0.0;
    let initial_dt = stable_dt(problem, &u).min(t_end);
    let first = record(problem, &u, 0.0, initial_dt, &hs_list);
    let threshold = controls.breaking_factor * first.sup_ux;
    let mut diagnostics = DiagnosticsSeries {
        hs_list: hs_list.clone(),
        records: vec![first],
    };
    let mut snapshots = Vec::new();
    if controls.store_snapshots {
        snapshots.push((0.0, u.clone()));
    }
    let mut steps = 0usize;
    let mut breaking_time = None;

    let outcome = loop {
        if t >= t_end {
            break RunOutcome::Completed;
        }
        let dt_stable = stable_dt(problem, &u);
        if dt_stable < controls.dt_floor {
            break RunOutcome::DtFloorHit;
        }
        let remaining = t_end - t;
        let last = dt_stable >= remaining;
        let dt = if last { remaining } else { dt_stable };
        let next = stepper.step(&u, dt);
        steps += 1;
        if !next.is_finite() {
            break RunOutcome::NonfiniteDetected;
        }
        let t_next = if last { t_end } else { t + dt };
        let sup_ux = sup_abs_derivative(&next);
        if threshold > 0.0 && sup_ux > threshold {
            breaking_time = Some(t + refine_crossing(&stepper, &u, dt, threshold));
            u = next;
            t = t_next;
            diagnostics.records.push(record(problem, &u, t, dt, &hs_list));
            if controls.store_snapshots {
                snapshots.push((t, u.clone()));
            }
            break RunOutcome::BreakingDetected;
        }
        u = next;
        t = t_next;
        if steps.is_multiple_of(controls.snapshot_stride) || last {
            diagnostics.records.push(record(problem, &u, t, dt, &hs_list));
            if controls.store_snapshots {
                snapshots.push((t, u.clone()));
            }
        }
    };

    Ok(RunResult {
        final_field: u,
        final_time: t,
        diagnostics,
        outcome,
        snapshots,
        breaking_time,
        steps,
    })
}

/// Bisects the sub-step `h` in `(0, dt]` at which `sup|u_x|` first exceeds `threshold`.
fn refine_crossing(stepper: &Stepper, u: &Field, dt: f64, threshold: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, dt);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let trial = stepper.step(u, mid);
        if trial.is_finite() && sup_abs_derivative(&trial) <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
