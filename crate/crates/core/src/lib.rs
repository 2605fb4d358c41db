//! Simulation, estimation and limit-theory tools for a Cox-process model of
//! limit-order flow driven by the fractional part of a Brownian price.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod kv;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
