//! Proof synthesis on top of the `cocv-kernel` checker: contexts with holes
//! and equations, second-order matching, the synthesizer, and the proof
//! script interpreter.

pub mod batch;
pub mod context;
pub mod matcher;
pub mod synth;
pub mod vernacular;
