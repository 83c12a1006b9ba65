//! Numerical laboratory for the total-variation cutoff phenomenon of
//! small-noise SDEs dX = -b(X) dt + eps dL driven by locally layered
//! stable Levy processes.
//!
//! Modules follow the pipeline: `levy` (measures and exponents) ->
//! `sampling` (increments) -> `dynamics` (deterministic flow and
//! fundamental matrices) -> `spectral` (Hartman-Grobman data, cutoff
//! schedules, omega-limit sets) -> `simulate` (Monte Carlo for X, its
//! first-order approximation Y, and the stationary OU law) -> `distance`
//! (total-variation estimators) -> `lab` (config-driven experiments and
//! reports).

pub mod distance;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod levy;
pub mod ode;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
