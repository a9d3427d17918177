//! A simulation and verification laboratory for local empirical processes.
//!
//! The crate computes local empirical processes over finite function nets,
//! uniform-increment processes, the oscillation modulus of the uniform
//! empirical process, kernel density estimators with their normalized sup
//! statistics and plug-in bands, Poissonized companion processes, the
//! quadratic rate function attached to a net's Gram matrix, and sup-norm
//! distances to the induced unit ball. On top of the engines sits a
//! declarative, seed-deterministic Monte Carlo experiment runner that checks
//! the classical limit laws for these objects at desk scale and emits CSV
//! result tables.
//!
//! Start with the runnable programs under `examples/`; each demonstrates one
//! capability end to end.

pub mod cli;
pub mod density;
pub mod error;
pub mod experiment;
pub mod functions;
pub mod limit;
pub mod poisson;
pub mod process;

mod poly;
mod quad;
mod rng;

pub use error::{Error, Result};
