//! Closed-form tail bounds.
//!
//! Every bound returns [`Error::Domain`](crate::Error::Domain) outside the
//! hypotheses it is proven under instead of extrapolating.

pub mod binom;
pub mod pois;

pub use binom::BinomBoundSet;
pub use pois::PoisBoundSet;
