//! Detects and quantifies non-Markovian qubit dynamics through the quantum
//! loss of a system qubit that starts maximally entangled with an ancilla.
//!
//! The pipeline is: pick a [`channels::ChannelModel`], evolve the Bell pair
//! ([`channels::evolve_bell`]), sample the entropic quantities over time
//! ([`witness::sample_trajectory`]), and integrate the loss over the
//! intervals where it decreases ([`witness::measure`]).

pub mod channels;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod qmath;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
