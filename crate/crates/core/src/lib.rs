//! Damped, driven harmonic chain on a circle: direct simulation with elastic
//! collisions, exact normal-mode solutions, continuum wave and Euler limits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain_sim;
pub mod continuum;
pub mod error;
mod exppoly;
pub mod fields;
pub mod profiles;
pub mod quad;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};
pub use profiles::{Profile, ProfileField, RegularityReport};
