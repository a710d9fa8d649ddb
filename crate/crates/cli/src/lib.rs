//! Command-line front end for `tailbounds-core`: single-threshold reports,
//! CSV sweeps over `p`, and grid certification runs.

pub mod cli;
pub mod eval;
pub mod format;
pub mod sweep;
pub mod verify;

pub use cli::run;
