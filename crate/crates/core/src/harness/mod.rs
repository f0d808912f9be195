//! Experiment orchestration: config files, run directories, evaluation,
//! comparison tables and plots.

mod artifacts;
mod compare;
mod config;
mod plot;
mod run;

pub use artifacts::*;
pub use compare::*;
pub use config::*;
pub use plot::*;
pub use run::*;
