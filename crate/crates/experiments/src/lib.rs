//! Batch experiments for `sparsegrad`: one-bar and two-bar recovery sweeps,
//! super-resolution, radial MRI, limited-angle CT, parameter sensitivity and
//! ablations. Results go to CSV, solver traces to JSON.

pub mod config;
pub mod results;
pub mod runners;

pub use config::{Application, ExperimentConfig, Kind, Method, Study};
pub use results::{write_outputs, Manifest, Outcome, ResultRow, Trace};
pub use runners::run;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SPARSEGRAD_WORKERS";
