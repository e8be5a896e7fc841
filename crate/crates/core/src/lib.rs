//! Numerical laboratory for infimum-convolution inequalities, transport maps
//! between product exponential laws and uniform measures on `l_p` balls, and
//! the concentration estimates that follow from them.
//!
//! Every check returns a [`report::CheckReport`]; Monte Carlo estimates carry
//! standard errors and are seeded through [`rng`] so that reruns are
//! bit-reproducible.

#![forbid(unsafe_code)]

pub mod bodies;
pub mod conc;
pub mod convex;
pub mod error;
pub mod measures;
pub mod quad;
pub mod report;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tau;
pub mod transports;

pub use error::{Error, Result};
