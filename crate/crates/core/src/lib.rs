//! Simulation laboratory for collision-sensing multiplayer bandits.
//!
//! Arms are numbered from 1 to `K` everywhere in this crate. The main
//! protocol lives in [`init`] and [`agents`]; [`harness`] wires players to an
//! [`env::Environment`] and records regret traces.

pub mod agents;
pub mod baselines;
pub mod diagnostics;
pub mod env;
pub mod harness;
pub mod index;
pub mod init;
pub mod rng;

pub use env::{ArmMeans, Environment, Feedback, RoundLog};
