//! High-throughput Bayesian optimisation with sparse Gaussian-process
//! surrogates and information-theoretic inducing point placement.

pub mod bench;
pub mod benchmarks;
pub mod bo;
pub mod demo;
pub mod dpp;
pub mod error;
pub mod gp;
pub mod maxvalue;
pub mod placement;
pub mod points;
pub mod qmc;
pub mod thompson;
pub mod stats;

pub use error::{Error, Result};
