//! Independent exact and high-precision recomputation of every quantity in
//! [`dist`](crate::dist), identity verifiers, and the grid certification runner.
//!
//! Nothing here calls into the floating-point evaluation paths except the grid
//! suites, which compare the two.

pub mod grid;
pub mod highprec;
pub mod rational;
pub mod verify;

pub use grid::{run_grid, run_suite, GridConfig, GridPoint, GridVerdict, Suite};
pub use highprec::{pois_sf_highprec, pois_tce_highprec, HighPrecReal, PoissonTable};
pub use rational::{binom_sf_exact, binom_tce_exact, parse_exact, BinomialFamily, ExactBinomial, RationalProb};
pub use verify::{verify_product_identity, verify_tail_tce_identity, verify_tce_recursion, IdentityCheck, OracleDist, ProductCheck};
