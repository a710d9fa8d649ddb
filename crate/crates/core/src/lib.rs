//! Binomial and Poisson upper tails, tail conditional expectations, and
//! non-asymptotic tail bounds.
//!
//! The crate is `no_std` (it needs `alloc`). Floating-point evaluation lives in
//! [`dist`] and [`bounds`]; [`oracle`] recomputes the same quantities in exact
//! rational and fixed-point arithmetic and certifies every inequality and
//! identity over parameter grids.
//!
//! ```
//! use tailbounds_core::{bounds, dist, BinomialParams};
//!
//! let params = BinomialParams::new(10, 0.3).unwrap();
//! let sf = dist::binom_sf(&params, 5).value();
//! let lower = bounds::binom::tail_lower(&params, 5).unwrap();
//! let upper = bounds::binom::factorial_moment_upper(&params, 5).unwrap();
//! assert!(lower <= sf && sf <= upper);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod dist;
mod error;
pub mod oracle;
mod special;

pub use dist::{BinomialParams, PoissonParams, Probability};
pub use error::{Error, Result};
