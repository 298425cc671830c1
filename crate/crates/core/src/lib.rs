//! Single-image defogging: dark-channel haze estimation followed by a damped
//! fourth-order diffusion that refines the recovered radiance.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, configuration and
//! the experiment harness live in the `defog` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod haze;
pub mod image;
pub mod metrics;
pub mod pde;

pub use error::{Error, Result};
pub use haze::{estimate, synthesize_fog, FogSpec, HazeEstimate};
pub use image::{Kernel2D, PlanarImage};
pub use metrics::MetricReport;
pub use pde::{solve, EvolutionState, Solution, SolverConfig, SolverWarning, StepStats};
