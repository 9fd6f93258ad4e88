//! Configuration, sweeps, file formats, plots and acceptance checks built on
//! `fractalcap-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod plot;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, KmaxChoice, RuleConfig};
pub use error::{Error, Result};
pub use sweep::{run_sweep, SweepRow};
