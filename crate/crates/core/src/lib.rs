//! Multiscale simulation of time-dependent diffusion on weighted networks:
//! network generation, spectral multiscale bases on a tensor coarse grid,
//! fine and coarse implicit Euler solvers, flux-averaging upscaling and
//! error metrics.

pub mod coarse;
pub mod eigen;
pub mod error;
pub mod generate;
pub mod io;
pub mod linsolve;
pub mod metrics;
pub mod msbasis;
pub mod netcore;
pub mod pipeline;
pub mod solve;
pub mod sparse;
pub mod upscale;

pub use error::{Error, Result};
