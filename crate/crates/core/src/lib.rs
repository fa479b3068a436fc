//! Solving timed automaton games with parity objectives.
//!
//! The crate reduces a timed game to a finite turn-based parity game over
//! clock regions, solves it, and maps winning sets and memoryless strategies
//! back to regions. Three winning notions are supported: exact winning,
//! limit-robust winning (player 1 must tolerate arbitrarily small timing
//! perturbations) and bounded-robust winning for a given jitter and response
//! time.

pub mod model;
pub mod regions;
pub mod robust;
pub mod enlarged;
pub mod fixtures;
pub mod harness;
pub mod parity;
pub mod pipeline;
pub mod reduction;
pub mod solver;
