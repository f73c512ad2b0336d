//! Hybrid circuit and packet access for TDM passive optical networks.
//!
//! Circuits are admitted into a stochastic knapsack bounded by a circuit
//! limit and carried in a fixed-size partition at the start of each cycle;
//! packets share the remainder through report/grant polling.

pub mod analysis;
pub mod config;
pub mod error;
pub mod harness;
pub mod knapsack;
pub mod protocol;
pub mod sim;

pub use config::{PacketSizeDistribution, ScenarioConfig};
pub use error::{Error, Result};
