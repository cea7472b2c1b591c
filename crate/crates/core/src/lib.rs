//! Numerical laboratory for quadratic Siegel disks.
//!
//! The crate computes continued-fraction data and Bruno sums, explodes
//! parabolic cycles of `P_alpha(z) = e^{2 i pi alpha} z + z^2`, evaluates
//! conformal-radius bounds, and measures the Siegel radius directly from the
//! linearizing power series.

pub mod conformal;
pub mod contfrac;
pub mod error;
pub mod explosion;
pub mod ladder;
pub mod mp;
pub mod poly;
pub mod siegel;

pub use error::{Error, Result};
