//! Pseudo-spectral simulation and solitary-wave toolkit for Burgers-type
//! equations with fractional dispersion,
//!
//! ```text
//! u_t - D^alpha u_x + u u_x = 0,
//! ```
//!
//! together with Whitham-type symbols and the fractional BBM equation.

pub mod config;
pub mod dispersion;
pub mod evolution;
pub mod experiments;
pub mod invariants;
pub mod io;
pub mod solitary;
pub mod spectral;

pub use dispersion::DispersionSymbol;
pub use evolution::{DiagnosticsSeries, EquationFamily, EvolutionProblem, RunOutcome, RunResult, StepControls};
pub use experiments::ExperimentReport;
pub use solitary::SolitaryWave;
pub use spectral::{Field, GridSpec, SobolevIndex};
