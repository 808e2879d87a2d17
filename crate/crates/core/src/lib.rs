//! Quantum relays for long-distance QKD: a Fock-space simulation of the QND
//! relay circuit and a classical model of relay chains, their signal-to-noise
//! ratio and secret-key throughput.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod chain;
pub mod cli;
pub mod config;
pub mod error;
pub mod fock;
pub mod optimize;
pub mod qnd;
pub mod report;
pub mod sample;
pub mod throughput;
pub mod verify;

pub use error::ModelError;
