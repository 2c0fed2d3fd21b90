//! Deterministic simulation of shuffle-based fast-scrambling circuits.
//!
//! The stabilizer engine ([`tableau`]) handles everything that reduces to
//! GF(2) ranks: Page curves, graph-state entanglement and Hayden-Preskill
//! mutual information. A small statevector engine ([`dense`]) runs the
//! probabilistic decoder with noise and Rydberg crosstalk.

pub mod circuits;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod gf2;
pub mod graphstate;
pub mod haydenpreskill;
pub mod rng;
pub mod stats;
pub mod tableau;

pub use error::{Error, Result};
pub use gf2::BitMatrix;
pub use rng::SeedStream;
pub use tableau::{Basis, StabilizerTableau};
