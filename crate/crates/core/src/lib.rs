//! Dynamics of a three-level V atom coupled to a single quantized field mode,
//! with the counter-rotating terms kept.
//!
//! The atom has a ground state `|a>` and two excited states `|b>` and `|c>`.
//! The interaction-picture amplitudes split into two parity chains which are
//! integrated independently with fixed-step RK4. The [`analysis`] module runs
//! the two-level (`g_ac = 0`) and three-level models side by side and measures
//! how far the extra level pushes the `|b>` population.
//!
//! With the `parallel` feature (on by default) the two chains of one run and
//! the cells of a parameter sweep are distributed over rayon; without it every
//! path runs sequentially and produces bit-identical results.

pub mod analysis;
pub mod dynamics;
mod error;
pub mod model;
pub mod oracle;

pub use analysis::{compare, sweep, ComparisonResult, ErrorSurface};
pub use dynamics::{convergence_check, evolve, rhs, IntegratorConfig, TimeSeries};
pub use error::{Error, Result};
pub use model::{
    coherent_weights, initial_state, population, ChainParity, ChainState, Level, ModelParams,
    SystemState, C64,
};
