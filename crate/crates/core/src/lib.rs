//! Random Steiner triple systems: hill-climbing and Markov-chain generators,
//! cycle switching, and configuration counting against random-hypergraph
//! expectations.

pub mod cameron;
pub mod configurations;
pub mod error;
pub mod harness;
pub mod rng;
pub mod stinson;
pub mod sts13;
pub mod sts;
pub mod switching;

pub use error::{Error, Result};
pub use sts::{Order, PartialSts, Point, Triple};
