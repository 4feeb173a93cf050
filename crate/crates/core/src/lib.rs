//! Simulation of quantum coin-flipping protocols over lossy channels: state
//! catalogs, the protocol engine, named cheating strategies, closed-form
//! biases and a Monte Carlo harness.

pub mod analytics;
pub mod catalog;
pub mod channel;
pub mod discrimination;
pub mod error;
pub mod harness;
pub mod protocols;
pub mod quantum;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
