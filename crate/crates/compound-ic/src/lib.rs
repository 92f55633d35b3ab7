//! Inner and outer rate-region bounds for finite-state compound Gaussian
//! interference channels.

pub mod bounds;
pub mod channel;
pub mod constraints;
pub mod det;
pub mod dominance;
pub mod error;
pub mod gap;
pub mod gaussian;
pub mod hk;
pub mod info;
pub mod io;
pub mod lp;
pub mod mc;
pub mod polytope;
pub mod rebalance;
pub mod sample;
pub mod suite;

pub use error::{Error, Result};
