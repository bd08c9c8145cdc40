//! TOML run configuration. Every constraint is checked up front and all
//! violations are reported together.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{
    bbm_symbol, capillary_symbol, gaussian_symbol, power_symbol, whitham_symbol, zaitsev_symbol, DispersionSymbol,
};
use crate::evolution::{DispersionSign, EquationFamily, EvolutionProblem, StepControls};
use crate::experiments::{
    breaking_experiment, illposedness_experiment, lifespan_experiment, scaling_experiment, traveling_wave_experiment,
    ExperimentError, ExperimentReport, ScalingEvolution, TravelingTolerances,
};
use crate::solitary::{petviashvili_solve, PetviashviliOptions};
use crate::spectral::{Field, GridSpec};

/// A violated constraint on one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    equation: Option<RawEquation>,
    initial: Option<RawInitial>,
    time: Option<RawTime>,
    controls: Option<RawControls>,
    output: Option<RawOutput>,
    experiment: Option<RawExperiment>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_points: Option<i64>,
    half_length: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    family: Option<String>,
    symbol: Option<String>,
    alpha: Option<f64>,
    epsilon: Option<f64>,
    dispersion_sign: Option<String>,
    depth: Option<f64>,
    tension: Option<f64>,
    regularization: Option<f64>,
    width: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    amplitude: Option<f64>,
    wavenumber: Option<f64>,
    width: Option<f64>,
    center: Option<f64>,
    speed: Option<f64>,
    path: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControls {
    cfl_factor: Option<f64>,
    dt_floor: Option<f64>,
    breaking_factor: Option<f64>,
    dealias: Option<bool>,
    snapshot_stride: Option<i64>,
    max_dt: Option<f64>,
    store_snapshots: Option<bool>,
    hs_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    alpha: Option<f64>,
    alphas: Option<Vec<f64>>,
    s: Option<Vec<f64>>,
    lambda: Option<f64>,
    evolve_time: Option<f64>,
    evolve_tolerance: Option<f64>,
    n_list: Option<Vec<i64>>,
    probe_time: Option<f64>,
    speed: Option<f64>,
    shape_tolerance: Option<f64>,
    speed_tolerance: Option<f64>,
    epsilons: Option<Vec<f64>>,
    equivalence_epsilon: Option<f64>,
    equivalence_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Evolve,
    Experiment,
}

/// Symbol choice with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Power,
    Whitham,
    Capillary { depth: f64, tension: f64 },
    Zaitsev { regularization: f64 },
    Bbm,
    Gaussian { width: f64 },
}

/// Initial profile recipes.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// `a sin(k x)`
    Sine { amplitude: f64, wavenumber: f64 },
    /// `a cos(k x)`
    Cosine { amplitude: f64, wavenumber: f64 },
    /// `a exp(-((x - x0) / w)^2)`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// `a sech^2((x - x0) / w)`
    Sech2 { amplitude: f64, width: f64, center: f64 },
    /// `-a x exp(-x^2)`
    OddGaussian { amplitude: f64 },
    /// Solitary wave of the configured alpha at the given speed.
    Soliton { speed: f64 },
    /// A snapshot file on the configured grid.
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    Breaking { alphas: Vec<f64> },
    Scaling { alpha: f64, s: Vec<f64>, lambda: f64, evolve: Option<(f64, f64)> },
    Illposedness { alpha: f64, n_list: Vec<u32>, probe_time: f64 },
    TravelingWave { alpha: f64, speed: f64, tolerances: TravelingTolerances },
    Lifespan { alpha: f64, epsilons: Vec<f64>, equivalence: Option<(f64, f64)> },
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Breaking { .. } => "breaking",
            ExperimentSpec::Scaling { .. } => "scaling",
            ExperimentSpec::Illposedness { .. } => "illposedness",
            ExperimentSpec::TravelingWave { .. } => "traveling_wave",
            ExperimentSpec::Lifespan { .. } => "lifespan",
        }
    }
}

pub const EXPERIMENT_NAMES: [&str; 5] = ["breaking", "scaling", "illposedness", "traveling_wave", "lifespan"];

/// Validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub grid: GridSpec,
    pub family: EquationFamily,
    pub symbol: SymbolSpec,
    pub alpha: f64,
    pub epsilon: f64,
    pub dispersion_sign: DispersionSign,
    pub initial: InitialSpec,
    pub t_end: f64,
    pub controls: StepControls,
    pub output_dir: PathBuf,
    pub experiment: Option<ExperimentSpec>,
    /// The configuration with defaults filled in, as TOML.
    pub resolved: String,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<String>,
    /// Experiment name; a `name` in the document must agree with it.
    pub experiment: Option<String>,
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

/// As [`parse_config`] for the named experiment.
pub fn parse_experiment_config(text: &str, name: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(
        text,
        &Overrides {
            experiment: Some(name.to_string()),
            ..Default::default()
        },
    )
}

pub fn parse_config_with(text: &str, over: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut raw = parse_raw(text)?;
    if let Some(name) = &over.experiment {
        let exp = raw.experiment.get_or_insert_with(RawExperiment::default);
        match &exp.name {
            Some(n) if n != name => {
                return Err(ConfigError::Invalid(vec![FieldError {
                    field: "experiment.name".into(),
                    constraint: format!("`{n}` does not match the requested experiment `{name}`"),
                }]))
            }
            _ => exp.name = Some(name.clone()),
        }
    }
    if let Some(dir) = &over.output_dir {
        raw.output = Some(RawOutput { dir: Some(dir.clone()) });
    }
    resolve(raw)
}

fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, field: &str, constraint: impl Into<String>) {
        self.0.push(FieldError {
            field: field.to_string(),
            constraint: constraint.into(),
        });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(field, format!("must be positive, got {v}"));
        }
    }
}

fn alpha_in(errs: &mut Errors, field: &str, alpha: f64, lo: f64, lo_open: bool, hi: f64) {
    let ok = alpha.is_finite() && (if lo_open { alpha > lo } else { alpha >= lo }) && alpha <= hi;
    if !ok {
        let open = if lo_open { "(" } else { "[" };
        errs.push(field, format!("alpha outside {open}{}, {}]", fmt_bound(lo), fmt_bound(hi)));
    }
}

fn fmt_bound(v: f64) -> String {
    if (v - 1.0 / 3.0).abs() < 1e-15 {
        "1/3".into()
    } else {
        v.to_string()
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut errs = Errors(Vec::new());
    let mut filled = raw.clone();

    let g = raw.grid.clone().unwrap_or_default();
    let n = g.n_points.unwrap_or(1024);
    let l = g.half_length.unwrap_or(std::f64::consts::PI);
    if n < 8 || (n as u64).count_ones() != 1 {
        errs.push("grid.n_points", format!("power of two required (at least 8), got {n}"));
    }
    errs.positive("grid.half_length", l);
    filled.grid = Some(RawGrid {
        n_points: Some(n),
        half_length: Some(l),
    });

    let e = raw.equation.clone().unwrap_or_default();
    let family_tag = e.family.clone().unwrap_or_else(|| "dispersive_burgers".into());
    let family = EquationFamily::from_tag(&family_tag);
    if family.is_none() {
        errs.push(
            "equation.family",
            format!("unknown family `{family_tag}` (dispersive_burgers, whitham_type, fractional_bbm)"),
        );
    }
    let family = family.unwrap_or(EquationFamily::DispersiveBurgers);
    let symbol_tag = e.symbol.clone().unwrap_or_else(|| "power".into());
    let symbol = match symbol_tag.as_str() {
        "power" => Some(SymbolSpec::Power),
        "whitham" => Some(SymbolSpec::Whitham),
        "capillary" => Some(SymbolSpec::Capillary {
            depth: e.depth.unwrap_or(1.0),
            tension: e.tension.unwrap_or(0.0),
        }),
        "zaitsev" => Some(SymbolSpec::Zaitsev {
            regularization: e.regularization.unwrap_or(1.0),
        }),
        "bbm" => Some(SymbolSpec::Bbm),
        "gaussian" => Some(SymbolSpec::Gaussian {
            width: e.width.unwrap_or(1.0),
        }),
        other => {
            errs.push(
                "equation.symbol",
                format!("unknown symbol `{other}` (power, whitham, capillary, zaitsev, bbm, gaussian)"),
            );
            None
        }
    };
    let symbol = symbol.unwrap_or(SymbolSpec::Power);
    let alpha = e.alpha.unwrap_or(1.0);
    let epsilon = e.epsilon.unwrap_or(1.0);
    errs.positive("equation.epsilon", epsilon);
    let sign_tag = e.dispersion_sign.clone().unwrap_or_else(|| "standard".into());
    let dispersion_sign = match sign_tag.as_str() {
        "standard" => DispersionSign::Standard,
        "reversed" => DispersionSign::Reversed,
        other => {
            errs.push("equation.dispersion_sign", format!("unknown sign `{other}` (standard, reversed)"));
            DispersionSign::Standard
        }
    };
    match family {
        EquationFamily::DispersiveBurgers => {
            if symbol != SymbolSpec::Power {
                errs.push("equation.symbol", "dispersive_burgers needs the power symbol");
            }
            alpha_in(&mut errs, "equation.alpha", alpha, -1.0, true, 2.0);
        }
        EquationFamily::FractionalBbm => {
            if !matches!(symbol, SymbolSpec::Power | SymbolSpec::Bbm) {
                errs.push("equation.symbol", "fractional_bbm needs the power or bbm symbol");
            }
            alpha_in(&mut errs, "equation.alpha", alpha, 0.0, true, 2.0);
        }
        EquationFamily::WhithamType => {
            if symbol == SymbolSpec::Power {
                alpha_in(&mut errs, "equation.alpha", alpha, -1.0, true, 2.0);
            }
        }
    }
    match symbol {
        SymbolSpec::Capillary { depth, tension } => {
            errs.positive("equation.depth", depth);
            if !(tension >= 0.0 && tension.is_finite()) {
                errs.push("equation.tension", format!("must be non-negative, got {tension}"));
            }
        }
        SymbolSpec::Zaitsev { regularization } => errs.positive("equation.regularization", regularization),
        SymbolSpec::Gaussian { width } => errs.positive("equation.width", width),
        _ => {}
    }
    filled.equation = Some(RawEquation {
        family: Some(family_tag),
        symbol: Some(symbol_tag),
        alpha: Some(alpha),
        epsilon: Some(epsilon),
        dispersion_sign: Some(sign_tag),
        ..e
    });

    let i = raw.initial.clone().unwrap_or_default();
    let kind = i.kind.clone().unwrap_or_else(|| "sine".into());
    let amplitude = i.amplitude.unwrap_or(1.0);
    let wavenumber = i.wavenumber.unwrap_or(std::f64::consts::PI / l);
    let width = i.width.unwrap_or(1.0);
    let center = i.center.unwrap_or(0.0);
    let initial = match kind.as_str() {
        "sine" => Some(InitialSpec::Sine { amplitude, wavenumber }),
        "cosine" => Some(InitialSpec::Cosine { amplitude, wavenumber }),
        "gaussian" => Some(InitialSpec::Gaussian { amplitude, width, center }),
        "sech2" => Some(InitialSpec::Sech2 { amplitude, width, center }),
        "odd_gaussian" => Some(InitialSpec::OddGaussian { amplitude }),
        "soliton" => {
            let speed = i.speed.unwrap_or(1.0);
            errs.positive("initial.speed", speed);
            alpha_in(&mut errs, "equation.alpha", alpha, 1.0 / 3.0, true, 2.0);
            Some(InitialSpec::Soliton { speed })
        }
        "snapshot" => match &i.path {
            Some(p) => Some(InitialSpec::Snapshot { path: PathBuf::from(p) }),
            None => {
                errs.push("initial.path", "required for kind = \"snapshot\"");
                None
            }
        },
        other => {
            errs.push(
                "initial.kind",
                format!("unknown kind `{other}` (sine, cosine, gaussian, sech2, odd_gaussian, soliton, snapshot)"),
            );
            None
        }
    };
    if !amplitude.is_finite() {
        errs.push("initial.amplitude", "must be finite");
    }
    if matches!(kind.as_str(), "gaussian" | "sech2") {
        errs.positive("initial.width", width);
    }
    let initial = initial.unwrap_or(InitialSpec::Sine { amplitude, wavenumber });
    if matches!(kind.as_str(), "sine" | "cosine") && l > 0.0 {
        // the profile must be periodic on the box
        let cycles = wavenumber * l / std::f64::consts::PI;
        if !(cycles.is_finite() && (cycles - cycles.round()).abs() < 1e-9) {
            errs.push("initial.wavenumber", "must be a multiple of pi / half_length");
        }
    }
    let used_wavenumber = matches!(kind.as_str(), "sine" | "cosine").then_some(wavenumber);
    filled.initial = Some(RawInitial {
        kind: Some(kind),
        amplitude: Some(amplitude),
        wavenumber: used_wavenumber,
        ..i
    });

    let t_end = raw.time.as_ref().and_then(|t| t.t_end).unwrap_or(1.0);
    errs.positive("time.t_end", t_end);
    filled.time = Some(RawTime { t_end: Some(t_end) });

    let c = raw.controls.clone().unwrap_or_default();
    let d = StepControls::default();
    let stride = c.snapshot_stride.unwrap_or(d.snapshot_stride as i64);
    let controls = StepControls {
        cfl_factor: c.cfl_factor.unwrap_or(d.cfl_factor),
        dt_floor: c.dt_floor.unwrap_or(d.dt_floor),
        breaking_factor: c.breaking_factor.unwrap_or(d.breaking_factor),
        dealias: c.dealias.unwrap_or(d.dealias),
        snapshot_stride: stride.max(1) as usize,
        max_dt: c.max_dt,
        store_snapshots: c.store_snapshots.unwrap_or(d.store_snapshots),
        hs_list: c.hs_list.clone().unwrap_or_default(),
    };
    if !(controls.cfl_factor > 0.0 && controls.cfl_factor <= 1.0) {
        errs.push("controls.cfl_factor", "must lie in (0, 1]");
    }
    errs.positive("controls.dt_floor", controls.dt_floor);
    if !(controls.breaking_factor > 1.0) {
        errs.push("controls.breaking_factor", "must exceed 1");
    }
    if stride < 1 {
        errs.push("controls.snapshot_stride", "must be at least 1");
    }
    if let Some(m) = controls.max_dt {
        errs.positive("controls.max_dt", m);
    }
    if controls.hs_list.iter().any(|s| !s.is_finite()) {
        errs.push("controls.hs_list", "entries must be finite");
    }
    filled.controls = Some(RawControls {
        cfl_factor: Some(controls.cfl_factor),
        dt_floor: Some(controls.dt_floor),
        breaking_factor: Some(controls.breaking_factor),
        dealias: Some(controls.dealias),
        snapshot_stride: Some(stride),
        max_dt: controls.max_dt,
        store_snapshots: Some(controls.store_snapshots),
        hs_list: Some(controls.hs_list.clone()),
    });

    let dir = raw.output.as_ref().and_then(|o| o.dir.clone()).unwrap_or_else(|| "out".into());
    filled.output = Some(RawOutput { dir: Some(dir.clone()) });

    let experiment = match &raw.experiment {
        None => None,
        Some(x) => {
            let (spec, x_filled) = resolve_experiment(x, alpha, &mut errs);
            filled.experiment = Some(x_filled);
            spec
        }
    };

    if !errs.0.is_empty() {
        return Err(ConfigError::Invalid(errs.0));
    }
    Ok(RunConfig {
        subcommand: if experiment.is_some() {
            Subcommand::Experiment
        } else {
            Subcommand::Evolve
        },
        grid: GridSpec::new(n as usize, l).expect("validated"),
        family,
        symbol,
        alpha,
        epsilon,
        dispersion_sign,
        initial,
        t_end,
        controls,
        output_dir: PathBuf::from(dir),
        experiment,
        resolved: toml::to_string(&filled).expect("plain data serializes"),
    })
}

fn resolve_experiment(x: &RawExperiment, eq_alpha: f64, errs: &mut Errors) -> (Option<ExperimentSpec>, RawExperiment) {
    let mut f = x.clone();
    let Some(name) = x.name.clone() else {
        errs.push("experiment.name", format!("required (one of {})", EXPERIMENT_NAMES.join(", ")));
        return (None, f);
    };
    let set: Vec<(&str, bool)> = vec![
        ("alpha", x.alpha.is_some()),
        ("alphas", x.alphas.is_some()),
        ("s", x.s.is_some()),
        ("lambda", x.lambda.is_some()),
        ("evolve_time", x.evolve_time.is_some()),
        ("evolve_tolerance", x.evolve_tolerance.is_some()),
        ("n_list", x.n_list.is_some()),
        ("probe_time", x.probe_time.is_some()),
        ("speed", x.speed.is_some()),
        ("shape_tolerance", x.shape_tolerance.is_some()),
        ("speed_tolerance", x.speed_tolerance.is_some()),
        ("epsilons", x.epsilons.is_some()),
        ("equivalence_epsilon", x.equivalence_epsilon.is_some()),
        ("equivalence_time", x.equivalence_time.is_some()),
    ];
    let allowed: &[&str] = match name.as_str() {
        "breaking" => &["alphas"],
        "scaling" => &["alpha", "s", "lambda", "evolve_time", "evolve_tolerance"],
        "illposedness" => &["alpha", "n_list", "probe_time"],
        "traveling_wave" => &["alpha", "speed", "shape_tolerance", "speed_tolerance"],
        "lifespan" => &["alpha", "epsilons", "equivalence_epsilon", "equivalence_time"],
        other => {
            errs.push(
                "experiment.name",
                format!("unknown experiment `{other}` (one of {})", EXPERIMENT_NAMES.join(", ")),
            );
            return (None, f);
        }
    };
    for (key, present) in set {
        if present && !allowed.contains(&key) {
            errs.push(&format!("experiment.{key}"), format!("not used by experiment `{name}`"));
        }
    }
    let alpha = x.alpha.unwrap_or(eq_alpha);
    let spec = match name.as_str() {
        "breaking" => {
            let alphas = x.alphas.clone().unwrap_or_else(|| vec![-0.5, 0.0, 0.25, 0.5, 1.0, 2.0]);
            if alphas.is_empty() {
                errs.push("experiment.alphas", "must not be empty");
            }
            for a in &alphas {
                alpha_in(errs, "experiment.alphas", *a, -1.0, true, 2.0);
            }
            f.alphas = Some(alphas.clone());
            ExperimentSpec::Breaking { alphas }
        }
        "scaling" => {
            alpha_in(errs, "experiment.alpha", alpha, -1.0, true, 2.0);
            let s = x.s.clone().unwrap_or_else(|| vec![0.5 - alpha]);
            if s.is_empty() || s.iter().any(|v| !v.is_finite()) {
                errs.push("experiment.s", "must be a non-empty list of finite exponents");
            }
            let lambda = x.lambda.unwrap_or(2.0);
            if !(lambda >= 1.0 && lambda.fract() == 0.0 && lambda.is_finite()) {
                errs.push("experiment.lambda", format!("must be a positive integer, got {lambda}"));
            }
            let evolve = x.evolve_time.map(|t| {
                errs.positive("experiment.evolve_time", t);
                let tol = x.evolve_tolerance.unwrap_or(1e-8);
                errs.positive("experiment.evolve_tolerance", tol);
                (t, tol)
            });
            f.alpha = Some(alpha);
            f.s = Some(s.clone());
            f.lambda = Some(lambda);
            ExperimentSpec::Scaling { alpha, s, lambda, evolve }
        }
        "illposedness" => {
            alpha_in(errs, "experiment.alpha", alpha, 1.0 / 3.0, true, 0.5);
            let n_list = x.n_list.clone().unwrap_or_else(|| vec![4, 8, 16]);
            if n_list.is_empty() || n_list.iter().any(|&k| k < 1 || k > u32::MAX as i64) {
                errs.push("experiment.n_list", "must be a non-empty list of positive integers");
            }
            let probe_time = x.probe_time.unwrap_or(0.05);
            errs.positive("experiment.probe_time", probe_time);
            f.alpha = Some(alpha);
            f.n_list = Some(n_list.clone());
            f.probe_time = Some(probe_time);
            ExperimentSpec::Illposedness {
                alpha,
                n_list: n_list.iter().map(|&k| k.clamp(1, u32::MAX as i64) as u32).collect(),
                probe_time,
            }
        }
        "traveling_wave" => {
            alpha_in(errs, "experiment.alpha", alpha, 1.0 / 3.0, true, 2.0);
            let speed = x.speed.unwrap_or(1.0);
            errs.positive("experiment.speed", speed);
            let shape = x.shape_tolerance.unwrap_or(1e-4);
            let speed_tol = x.speed_tolerance.unwrap_or(1e-3);
            errs.positive("experiment.shape_tolerance", shape);
            errs.positive("experiment.speed_tolerance", speed_tol);
            f.alpha = Some(alpha);
            f.speed = Some(speed);
            f.shape_tolerance = Some(shape);
            f.speed_tolerance = Some(speed_tol);
            ExperimentSpec::TravelingWave {
                alpha,
                speed,
                tolerances: TravelingTolerances {
                    shape,
                    speed: speed_tol,
                },
            }
        }
        _ => {
            alpha_in(errs, "experiment.alpha", alpha, -1.0, true, 2.0);
            let epsilons = x.epsilons.clone().unwrap_or_else(|| vec![1.0, 0.5, 0.25]);
            if epsilons.is_empty() {
                errs.push("experiment.epsilons", "must not be empty");
            }
            for e in &epsilons {
                errs.positive("experiment.epsilons", *e);
            }
            let equivalence = match (x.equivalence_epsilon, x.equivalence_time) {
                (None, None) => None,
                (Some(e), Some(t)) => {
                    errs.positive("experiment.equivalence_epsilon", e);
                    errs.positive("experiment.equivalence_time", t);
                    Some((e, t))
                }
                _ => {
                    errs.push("experiment.equivalence_time", "equivalence_epsilon and equivalence_time go together");
                    None
                }
            };
            f.alpha = Some(alpha);
            f.epsilons = Some(epsilons.clone());
            ExperimentSpec::Lifespan {
                alpha,
                epsilons,
                equivalence,
            }
        }
    };
    (Some(spec), f)
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot read initial snapshot: {0}")]
    Snapshot(String),
}

impl From<crate::evolution::EvolutionError> for BuildError {
    fn from(e: crate::evolution::EvolutionError) -> Self {
        BuildError::Experiment(e.into())
    }
}

impl From<crate::solitary::SolitaryError> for BuildError {
    fn from(e: crate::solitary::SolitaryError) -> Self {
        BuildError::Experiment(e.into())
    }
}

impl From<crate::dispersion::SymbolError> for BuildError {
    fn from(e: crate::dispersion::SymbolError) -> Self {
        BuildError::Experiment(e.into())
    }
}

impl RunConfig {
    pub fn symbol(&self) -> Result<DispersionSymbol, BuildError> {
        Ok(match self.symbol {
            SymbolSpec::Power => power_symbol(self.alpha)?,
            SymbolSpec::Whitham => whitham_symbol(),
            SymbolSpec::Capillary { depth, tension } => capillary_symbol(depth, tension)?,
            SymbolSpec::Zaitsev { regularization } => zaitsev_symbol(regularization)?,
            SymbolSpec::Bbm => bbm_symbol(self.alpha)?,
            SymbolSpec::Gaussian { width } => gaussian_symbol(width)?,
        })
    }

    pub fn initial_field(&self) -> Result<Field, BuildError> {
        let g = self.grid;
        Ok(match &self.initial {
            InitialSpec::Sine { amplitude, wavenumber } => Field::from_fn(g, |x| amplitude * (wavenumber * x).sin()),
            InitialSpec::Cosine { amplitude, wavenumber } => Field::from_fn(g, |x| amplitude * (wavenumber * x).cos()),
            InitialSpec::Gaussian { amplitude, width, center } => {
                Field::from_fn(g, |x| amplitude * (-((x - center) / width).powi(2)).exp())
            }
            InitialSpec::Sech2 { amplitude, width, center } => {
                Field::from_fn(g, |x| amplitude / ((x - center) / width).cosh().powi(2))
            }
            InitialSpec::OddGaussian { amplitude } => Field::from_fn(g, |x| -amplitude * x * (-x * x).exp()),
            InitialSpec::Soliton { speed } => {
                let opts = PetviashviliOptions {
                    dealias: self.controls.dealias,
                    ..Default::default()
                };
                petviashvili_solve(self.alpha, *speed, g, None, &opts)?.profile
            }
            InitialSpec::Snapshot { path } => {
                let snap = crate::io::load_snapshot(path).map_err(|e| BuildError::Snapshot(e.to_string()))?;
                if snap.field.grid() != &g {
                    return Err(BuildError::Snapshot(format!(
                        "{} holds a grid of {} points on half-length {}, config asks for {} on {}",
                        path.display(),
                        snap.field.grid().n_points(),
                        snap.field.grid().half_length(),
                        g.n_points(),
                        g.half_length()
                    )));
                }
                snap.field
            }
        })
    }

    pub fn problem(&self) -> Result<EvolutionProblem, BuildError> {
        let mut p = EvolutionProblem::new(
            self.family,
            self.symbol()?,
            self.epsilon,
            self.initial_field()?,
            self.controls.clone(),
        )?;
        p.dispersion_sign = self.dispersion_sign;
        Ok(p)
    }

    /// Runs the configured experiment.
    pub fn run_experiment(&self) -> Result<ExperimentReport, BuildError> {
        let Some(spec) = &self.experiment else {
            return Err(ExperimentError::Invalid("no experiment configured".into()).into());
        };
        let c = &self.controls;
        Ok(match spec {
            ExperimentSpec::Breaking { alphas } => breaking_experiment(alphas, &self.initial_field()?, self.t_end, c)?,
            ExperimentSpec::Scaling { alpha, s, lambda, evolve } => {
                let u0 = self.initial_field()?;
                let ev = evolve.map(|(time, tolerance)| ScalingEvolution {
                    time,
                    controls: c.clone(),
                    tolerance,
                });
                let mut parts = Vec::new();
                for (k, &sk) in s.iter().enumerate() {
                    // the evolution does not depend on s, run it once
                    let ev_k = if k == 0 { ev.as_ref() } else { None };
                    parts.push(scaling_experiment(*alpha, sk, *lambda, &u0, ev_k)?);
                }
                merge_scaling(parts)
            }
            ExperimentSpec::Illposedness { alpha, n_list, probe_time } => {
                illposedness_experiment(*alpha, n_list, self.grid, *probe_time)?
            }
            ExperimentSpec::TravelingWave { alpha, speed, tolerances } => {
                traveling_wave_experiment(*alpha, *speed, self.grid, self.t_end, c, *tolerances)?
            }
            ExperimentSpec::Lifespan {
                alpha,
                epsilons,
                equivalence,
            } => lifespan_experiment(*alpha, epsilons, &self.initial_field()?, self.t_end, c, *equivalence)?,
        })
    }
}

fn merge_scaling(parts: Vec<ExperimentReport>) -> ExperimentReport {
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    let mut out = ExperimentReport {
        name: parts[0].name.clone(),
        columns: parts[0].columns.clone(),
        ..Default::default()
    };
    for p in parts {
        let s = p.parameters.iter().find(|(k, _)| k == "s").map(|(_, v)| v.clone()).unwrap_or_default();
        for (k, v) in p.parameters {
            if k != "s" && !out.parameters.iter().any(|(q, _)| q == &k) {
                out.parameters.push((k, v));
            }
        }
        out.rows.extend(p.rows);
        out.measured.extend(p.measured.into_iter().map(|(k, v)| (format!("{k}[s={s}]"), v)));
        out.verdicts.extend(p.verdicts.into_iter().map(|mut v| {
            v.name = format!("{}[s={s}]", v.name);
            v
        }));
        out.series.extend(p.series);
        out.fields.extend(p.fields);
    }
    out
}
