//! File formats, experiment sweeps and statistical reports for the nested
//! cooperative tool-switching solver in [`deepmemetic_core`].

pub mod analyze;
pub mod config;
pub mod experiment;
pub mod io;

pub use deepmemetic_core as solver;

pub use analyze::{analyze, Analysis, AnalyzeError};
pub use config::{emax_for, ExperimentConfig};
pub use experiment::{run_experiment, RunRecord};
pub use io::{load_instance, load_macros, save_instance};
