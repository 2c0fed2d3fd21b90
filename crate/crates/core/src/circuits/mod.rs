//! Circuit families: shuffles, the hypercube and scrambling circuits, and the
//! random nearest-neighbor and all-to-all Clifford baselines.

mod clifford2;
mod permutation;
mod program;

pub use clifford2::{
    clifford_group, clifford_tables, gen_two_qubit_clifford_group, PauliImage, TwoQubitClifford,
};
pub use permutation::{faro_shuffle, inverse, Permutation};
pub use program::{
    accumulated_cz_edges, build_hypercube_circuit, build_random_all_to_all, build_random_nn,
    build_scrambling_circuit, build_unshuffled_circuit, cz_even_bonds, cz_odd_bonds, execute,
    execute_on, run_layers, CircuitLayer, CircuitProgram, CliffordGate,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The circuit families the experiments compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitFamily {
    /// Strongly scrambling shuffle circuit.
    Es,
    /// Hypercube graph-state circuit.
    Qm,
    /// Random two-qubit Clifford brickwork.
    Nn,
    /// Random Cliffords on even bonds plus random relabeling.
    A2a,
}

impl CircuitFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "es" => Ok(Self::Es),
            "qm" => Ok(Self::Qm),
            "nn" => Ok(Self::Nn),
            "a2a" => Ok(Self::A2a),
            other => Err(Error::InvalidArgument(format!("unknown circuit family {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Es => "es",
            Self::Qm => "qm",
            Self::Nn => "nn",
            Self::A2a => "a2a",
        }
    }

    /// Build the family on `2^m` sites. `depth` only applies to the random
    /// families, which default to `2m` layers.
    pub fn build<R: rand::Rng + ?Sized>(
        self,
        m: usize,
        depth: Option<usize>,
        rng: &mut R,
    ) -> Result<CircuitProgram> {
        let n = 1usize << m;
        match self {
            Self::Es => build_scrambling_circuit(m),
            Self::Qm => build_hypercube_circuit(m),
            Self::Nn => build_random_nn(n, depth.unwrap_or(2 * m), rng),
            Self::A2a => build_random_all_to_all(n, depth.unwrap_or(2 * m), rng),
        }
    }
}
