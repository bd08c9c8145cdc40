//! Browser bindings for the demo page in `www/`: a solitary-wave profile, an
//! animated evolution, and a breaking sweep over alpha. All results are flat
//! `f64` arrays so that they cross into JavaScript as `Float64Array`s.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use fracwave::dispersion::power_symbol;
use fracwave::evolution::{run, EquationFamily, EvolutionProblem, StepControls};
use fracwave::solitary::{petviashvili_solve, PetviashviliOptions};
use fracwave::{Field, GridSpec};

fn grid(n: usize, half_length: f64) -> Result<GridSpec, String> {
    GridSpec::new(n, half_length).map_err(|e| e.to_string())
}

/// Profile samples of the speed-`c` solitary wave followed by its residual
/// and both Pohozaev residuals (`n + 3` values).
pub fn soliton(alpha: f64, speed: f64, n: usize, half_length: f64) -> Result<Vec<f64>, String> {
    let w = petviashvili_solve(alpha, speed, grid(n, half_length)?, None, &PetviashviliOptions::default())
        .map_err(|e| e.to_string())?;
    let mut out = w.profile.samples().to_vec();
    out.extend([w.residual, w.pohozaev.0, w.pohozaev.1]);
    Ok(out)
}

/// `frames` equally spaced states of `u_t - D^alpha u_x + u u_x = 0` from
/// `amplitude * sin x` on `[-pi, pi)`, concatenated. A run that breaks stops
/// early, so fewer frames may come back.
pub fn evolve(alpha: f64, amplitude: f64, n: usize, t_end: f64, frames: usize) -> Result<Vec<f64>, String> {
    if frames == 0 || !(t_end > 0.0) {
        return Err("need at least one frame and a positive final time".into());
    }
    let g = grid(n, PI)?;
    let controls = StepControls {
        cfl_factor: 0.25,
        ..Default::default()
    };
    let mut u = Field::from_fn(g, |x| amplitude * x.sin());
    let mut out = u.samples().to_vec();
    let dt = t_end / frames as f64;
    for _ in 0..frames {
        let p = EvolutionProblem::new(
            EquationFamily::DispersiveBurgers,
            power_symbol(alpha).map_err(|e| e.to_string())?,
            1.0,
            u,
            controls.clone(),
        )
        .map_err(|e| e.to_string())?;
        let r = run(&p, dt).map_err(|e| e.to_string())?;
        u = r.final_field;
        out.extend_from_slice(u.samples());
        if r.breaking_time.is_some() {
            break;
        }
    }
    Ok(out)
}

/// For each alpha: breaking time (NaN when the run completes) and the
/// growth factor `max sup|u_x| / sup|u0_x|`, interleaved.
pub fn sweep(alphas: &[f64], n: usize, t_end: f64) -> Result<Vec<f64>, String> {
    let g = grid(n, PI)?;
    let controls = StepControls {
        cfl_factor: 0.25,
        ..Default::default()
    };
    let mut out = Vec::with_capacity(2 * alphas.len());
    for &a in alphas {
        let p = EvolutionProblem::new(
            EquationFamily::DispersiveBurgers,
            power_symbol(a).map_err(|e| e.to_string())?,
            1.0,
            Field::from_fn(g, f64::sin),
            controls.clone(),
        )
        .map_err(|e| e.to_string())?;
        let r = run(&p, t_end).map_err(|e| e.to_string())?;
        let init = r.diagnostics.first().map_or(1.0, |d| d.sup_ux);
        out.push(r.breaking_time.unwrap_or(f64::NAN));
        out.push(r.diagnostics.max_sup_ux() / init);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn soliton_profile(alpha: f64, speed: f64, n: usize, half_length: f64) -> Result<Vec<f64>, JsError> {
    soliton(alpha, speed, n, half_length).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn evolve_frames(alpha: f64, amplitude: f64, n: usize, t_end: f64, frames: usize) -> Result<Vec<f64>, JsError> {
    evolve(alpha, amplitude, n, t_end, frames).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn breaking_sweep(alphas: Vec<f64>, n: usize, t_end: f64) -> Result<Vec<f64>, JsError> {
    sweep(&alphas, n, t_end).map_err(|e| JsError::new(&e))
}
