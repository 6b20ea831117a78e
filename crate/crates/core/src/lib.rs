//! Finite linear prediction errors of stationary sequences, computed in configurable precision
//! from spectral densities, with checks of their asymptotic laws.

pub mod arcs;
pub mod error;
pub mod grammar;
pub mod mp;

pub use arcs::{Angle, ArcSet};
pub use error::{Error, Result};
pub mod poly;
pub mod trig;
pub mod geomean;
pub mod quadrature;
pub mod spectral;
pub mod covariance;
pub mod toeplitz;
pub mod capacity;
pub mod asymptotics;
