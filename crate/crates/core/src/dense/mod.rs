//! Dense state-vector simulation for small registers: arbitrary phases,
//! Pauli noise trajectories, and the teleportation decoder.

mod decoder;
mod state;

pub use decoder::{conjugate_program, run_decoder, DecoderCircuit, DecoderRow, DecoderSetup, TrajectoryStats, MAX_DECODER_QUBITS};
pub use state::{DenseState, Gate, NoiseModel, Pauli, CROSSTALK_PHASE, MAX_DENSE_QUBITS};
