//! Compiles layered quantum circuits into string rewriting systems whose
//! walk-count differences encode the circuit's output amplitude, and
//! verifies the encoding by exact computation.

pub mod amplitude;
pub mod circuit;
pub mod rewriting;
pub mod hp;
pub mod spectral;
pub mod compiler;
pub mod verifier;
pub mod estimator;
