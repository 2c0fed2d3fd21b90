use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::clifford2::{clifford_group, clifford_tables};
use super::permutation::Permutation;
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;

/// A two-qubit Clifford placed on sites `(a, b)`; `id` indexes
/// [`clifford_group`](super::clifford_group).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordGate {
    pub a: usize,
    pub b: usize,
    pub id: usize,
}

/// One step of a circuit program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircuitLayer {
    GlobalH,
    GlobalP,
    /// Inverse phase gate on every qubit; only produced by conjugation.
    GlobalPdg,
    CzEven,
    CzOdd,
    Permute(Permutation),
    Clifford(Vec<CliffordGate>),
}

impl CircuitLayer {
    /// Layers made of two-qubit gates are the unit of circuit time.
    pub fn is_interaction(&self) -> bool {
        matches!(self, Self::CzEven | Self::CzOdd | Self::Clifford(_))
    }
}

/// Bonds `(2i, 2i + 1)` of an open chain.
pub fn cz_even_bonds(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
}

/// Bonds `(2i + 1, 2i + 2)` of an open chain (no wraparound).
pub fn cz_odd_bonds(n: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1) / 2).map(|i| (2 * i + 1, 2 * i + 2)).collect()
}

#[derive(Deserialize)]
struct RawProgram {
    n_qubits: usize,
    layers: Vec<CircuitLayer>,
}

/// An ordered list of layers on `n_qubits` sites, applied first to last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram")]
pub struct CircuitProgram {
    n_qubits: usize,
    layers: Vec<CircuitLayer>,
    #[serde(skip_serializing)]
    interaction_layers: usize,
}

impl TryFrom<RawProgram> for CircuitProgram {
    type Error = Error;
    fn try_from(raw: RawProgram) -> Result<Self> {
        Self::new(raw.n_qubits, raw.layers)
    }
}

impl CircuitProgram {
    pub fn new(n_qubits: usize, layers: Vec<CircuitLayer>) -> Result<Self> {
        let group = clifford_group().len();
        for layer in &layers {
            match layer {
                CircuitLayer::Permute(p) if p.len() != n_qubits => {
                    return Err(Error::SizeMismatch { expected: n_qubits, actual: p.len() });
                }
                CircuitLayer::Clifford(gates) => {
                    let mut used = vec![false; n_qubits];
                    for g in gates {
                        for q in [g.a, g.b] {
                            if q >= n_qubits {
                                return Err(Error::IndexOutOfRange { index: q, size: n_qubits });
                            }
                            if std::mem::replace(&mut used[q], true) {
                                return Err(Error::DuplicateQubit(q));
                            }
                        }
                        if g.id >= group {
                            return Err(Error::IndexOutOfRange { index: g.id, size: group });
                        }
                    }
                }
                _ => {}
            }
        }
        let interaction_layers = layers.iter().filter(|l| l.is_interaction()).count();
        Ok(Self { n_qubits, layers, interaction_layers })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, layers: Vec::new(), interaction_layers: 0 }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[CircuitLayer] {
        &self.layers
    }

    /// Number of interaction layers `t`.
    pub fn depth(&self) -> usize {
        self.interaction_layers
    }

    /// `ends[t]` is the layer index just past the `t`-th interaction layer and
    /// any permutations directly after it; `ends[0] == 0`.
    pub fn interaction_ends(&self) -> Vec<usize> {
        let mut ends = vec![0];
        let mut i = 0;
        while i < self.layers.len() {
            if self.layers[i].is_interaction() {
                i += 1;
                while i < self.layers.len() && matches!(self.layers[i], CircuitLayer::Permute(_)) {
                    i += 1;
                }
                ends.push(i);
            } else {
                i += 1;
            }
        }
        ends
    }

    /// Prefix containing the first `t` interaction layers.
    pub fn truncated(&self, t: usize) -> Result<Self> {
        let ends = self.interaction_ends();
        let end = *ends.get(t).ok_or_else(|| {
            Error::InvalidArgument(format!("program has only {} interaction layers", self.depth()))
        })?;
        Self::new(self.n_qubits, self.layers[..end].to_vec())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn check_power_of_two(m: usize) -> Result<usize> {
    if m == 0 || m >= usize::BITS as usize - 1 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 1")));
    }
    Ok(1 << m)
}

/// `[R . CZ_even]^m` on `2^m` sites: CZ on even bonds, then the shuffle.
pub fn build_hypercube_circuit(m: usize) -> Result<CircuitProgram> {
    let n = check_power_of_two(m)?;
    let shuffle = Permutation::faro_shuffle(n)?;
    let mut layers = Vec::with_capacity(2 * m);
    for _ in 0..m {
        layers.push(CircuitLayer::CzEven);
        layers.push(CircuitLayer::Permute(shuffle.clone()));
    }
    CircuitProgram::new(n, layers)
}

/// The strongly scrambling circuit on `2^m` sites: `m` iterations of
/// `P, H, CZ_even, R^-1` followed by `m` iterations of `P, H, CZ_odd, R^-1`.
/// The rightmost operator in a product acts first, so each iteration opens
/// with the global phase layer.
pub fn build_scrambling_circuit(m: usize) -> Result<CircuitProgram> {
    let n = check_power_of_two(m)?;
    let unshuffle = Permutation::faro_shuffle(n)?.inverse();
    let mut layers = Vec::with_capacity(8 * m);
    for cz in [CircuitLayer::CzEven, CircuitLayer::CzOdd] {
        for _ in 0..m {
            layers.push(CircuitLayer::GlobalP);
            layers.push(CircuitLayer::GlobalH);
            layers.push(cz.clone());
            layers.push(CircuitLayer::Permute(unshuffle.clone()));
        }
    }
    CircuitProgram::new(n, layers)
}

/// The scrambling circuit's gate content without shuffles: `2m` iterations of
/// `P, H` and a CZ layer alternating between even and odd bonds.
pub fn build_unshuffled_circuit(m: usize) -> Result<CircuitProgram> {
    let n = check_power_of_two(m)?;
    let mut layers = Vec::with_capacity(6 * m);
    for k in 0..2 * m {
        layers.push(CircuitLayer::GlobalP);
        layers.push(CircuitLayer::GlobalH);
        layers.push(if k % 2 == 0 { CircuitLayer::CzEven } else { CircuitLayer::CzOdd });
    }
    CircuitProgram::new(n, layers)
}

fn random_clifford_layer<R: Rng + ?Sized>(bonds: &[(usize, usize)], rng: &mut R) -> CircuitLayer {
    let group = clifford_group().len();
    CircuitLayer::Clifford(
        bonds.iter().map(|&(a, b)| CliffordGate { a, b, id: rng.gen_range(0..group) }).collect(),
    )
}

fn check_random_args(n: usize, t: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("n = {n} must be even and at least 2")));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    Ok(())
}

/// Brickwork of uniformly random two-qubit Cliffords: even bonds on layers
/// 0, 2, ..., odd bonds on layers 1, 3, ...
pub fn build_random_nn<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> Result<CircuitProgram> {
    check_random_args(n, t)?;
    let (even, odd) = (cz_even_bonds(n), cz_odd_bonds(n));
    let layers = (0..t)
        .map(|k| random_clifford_layer(if k % 2 == 0 { &even } else { &odd }, rng))
        .collect();
    CircuitProgram::new(n, layers)
}

/// Random Cliffords on even bonds followed by a uniformly random relabeling
/// of all sites, `t` times.
pub fn build_random_all_to_all<R: Rng + ?Sized>(
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<CircuitProgram> {
    check_random_args(n, t)?;
    let even = cz_even_bonds(n);
    let mut layers = Vec::with_capacity(2 * t);
    for _ in 0..t {
        layers.push(random_clifford_layer(&even, rng));
        layers.push(CircuitLayer::Permute(Permutation::random(n, rng)));
    }
    CircuitProgram::new(n, layers)
}

/// Run the whole program on `state`, or stop after `upto` interaction layers.
pub fn execute(
    program: &CircuitProgram,
    state: &mut StabilizerTableau,
    upto: Option<usize>,
) -> Result<()> {
    if state.n_qubits() != program.n_qubits() {
        return Err(Error::SizeMismatch { expected: program.n_qubits(), actual: state.n_qubits() });
    }
    let end = match upto {
        None => program.layers().len(),
        Some(t) => *program.interaction_ends().get(t).ok_or_else(|| {
            Error::InvalidArgument(format!("program has only {} interaction layers", program.depth()))
        })?,
    };
    let sites: Vec<usize> = (0..state.n_qubits()).collect();
    run_layers(program, 0..end, state, &sites)
}

/// Run the program on the tableau qubits `sites` (site `i` of the program is
/// qubit `sites[i]`), leaving every other qubit alone.
pub fn execute_on(
    program: &CircuitProgram,
    state: &mut StabilizerTableau,
    sites: &[usize],
) -> Result<()> {
    if sites.len() != program.n_qubits() {
        return Err(Error::SizeMismatch { expected: program.n_qubits(), actual: sites.len() });
    }
    let mut seen = vec![false; state.n_qubits()];
    for &q in sites {
        if q >= state.n_qubits() {
            return Err(Error::IndexOutOfRange { index: q, size: state.n_qubits() });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    run_layers(program, 0..program.layers().len(), state, sites)
}

/// Apply `program.layers()[range]`.
pub fn run_layers(
    program: &CircuitProgram,
    range: Range<usize>,
    state: &mut StabilizerTableau,
    sites: &[usize],
) -> Result<()> {
    let n = program.n_qubits();
    let tables = clifford_tables();
    for layer in &program.layers()[range] {
        match layer {
            CircuitLayer::GlobalH => sites.iter().for_each(|&q| state.h_unchecked(q)),
            CircuitLayer::GlobalP => sites.iter().for_each(|&q| state.phase_unchecked(q)),
            CircuitLayer::GlobalPdg => sites.iter().for_each(|&q| {
                for _ in 0..3 {
                    state.phase_unchecked(q);
                }
            }),
            CircuitLayer::CzEven => {
                cz_even_bonds(n).iter().for_each(|&(a, b)| state.cz_unchecked(sites[a], sites[b]))
            }
            CircuitLayer::CzOdd => {
                cz_odd_bonds(n).iter().for_each(|&(a, b)| state.cz_unchecked(sites[a], sites[b]))
            }
            CircuitLayer::Clifford(gates) => {
                for g in gates {
                    state.local_table_unchecked(&tables[g.id], sites[g.a], sites[g.b]);
                }
            }
            CircuitLayer::Permute(p) => {
                let total = state.n_qubits();
                let mut full: Vec<usize> = (0..total).collect();
                for (i, &q) in sites.iter().enumerate() {
                    full[q] = sites[p.apply(i)];
                }
                state.apply_permutation(&Permutation::new(full)?)?;
            }
        }
    }
    Ok(())
}

/// Every CZ edge the program generates, in the original site labels.
///
/// Only meaningful for programs built from CZ layers and permutations; other
/// layers are ignored.
pub fn accumulated_cz_edges(program: &CircuitProgram) -> (Vec<(usize, usize)>, Permutation) {
    let n = program.n_qubits();
    // at[s] = original label of the qubit currently on site s
    let mut at: Vec<usize> = (0..n).collect();
    let mut edges = Vec::new();
    for layer in program.layers() {
        match layer {
            CircuitLayer::CzEven | CircuitLayer::CzOdd => {
                let bonds =
                    if *layer == CircuitLayer::CzEven { cz_even_bonds(n) } else { cz_odd_bonds(n) };
                for (a, b) in bonds {
                    let (u, v) = (at[a], at[b]);
                    edges.push((u.min(v), u.max(v)));
                }
            }
            CircuitLayer::Permute(p) => {
                let mut next = vec![0; n];
                for (s, &orig) in at.iter().enumerate() {
                    next[p.apply(s)] = orig;
                }
                at = next;
            }
            _ => {}
        }
    }
    // net map: original label -> final site
    let mut net = vec![0; n];
    for (s, &orig) in at.iter().enumerate() {
        net[orig] = s;
    }
    (edges, Permutation::new(net).expect("tracked labels form a bijection"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bond_sets() {
        assert_eq!(cz_even_bonds(8), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
        assert_eq!(cz_odd_bonds(8), vec![(1, 2), (3, 4), (5, 6)]);
        assert!(cz_odd_bonds(2).is_empty());
        for n in 2..20 {
            let mut all: Vec<_> = cz_even_bonds(n).into_iter().chain(cz_odd_bonds(n)).collect();
            all.sort_unstable();
            let chain: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            assert_eq!(all, chain);
        }
    }

    #[test]
    fn hypercube_circuit_m2_edges() {
        let p = build_hypercube_circuit(2).unwrap();
        assert_eq!((p.n_qubits(), p.depth()), (4, 2));
        let (mut edges, net) = accumulated_cz_edges(&p);
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert!(net.is_identity());
    }

    #[test]
    fn hypercube_circuit_m1() {
        let p = build_hypercube_circuit(1).unwrap();
        let (edges, _) = accumulated_cz_edges(&p);
        assert_eq!((p.n_qubits(), edges), (2, vec![(0, 1)]));
        assert!(build_hypercube_circuit(0).is_err());
    }

    #[test]
    fn scrambling_circuit_counts() {
        let p = build_scrambling_circuit(7).unwrap();
        assert_eq!((p.n_qubits(), p.depth()), (128, 14));
        let p = build_scrambling_circuit(2).unwrap();
        let count = |f: fn(&CircuitLayer) -> bool| p.layers().iter().filter(|l| f(l)).count();
        assert_eq!(count(|l| l.is_interaction()), 4);
        assert_eq!(count(|l| matches!(l, CircuitLayer::Permute(_))), 4);
        assert_eq!(count(|l| matches!(l, CircuitLayer::GlobalH | CircuitLayer::GlobalP)), 8);
        assert_eq!(p.layers()[0], CircuitLayer::GlobalP);
        assert_eq!(p.layers()[2], CircuitLayer::CzEven);
        assert_eq!(p.layers()[10], CircuitLayer::CzOdd);
    }

    #[test]
    fn random_builders_are_deterministic() {
        let build = |seed| build_random_nn(16, 5, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(build(3), build(3));
        assert_ne!(build(3), build(4));
        assert_eq!(build(3).depth(), 5);
        let a2a = |seed| {
            build_random_all_to_all(16, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        assert_eq!(a2a(9), a2a(9));
        assert_eq!(a2a(9).depth(), 4);
        assert!(build_random_nn(7, 2, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(build_random_nn(8, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn random_nn_alternates_bonds() {
        let p = build_random_nn(8, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let sites = |l: &CircuitLayer| match l {
            CircuitLayer::Clifford(g) => g.iter().map(|g| (g.a, g.b)).collect::<Vec<_>>(),
            _ => unreachable!(),
        };
        assert_eq!(sites(&p.layers()[0]), cz_even_bonds(8));
        assert_eq!(sites(&p.layers()[1]), cz_odd_bonds(8));
        assert_eq!(sites(&p.layers()[2]), cz_even_bonds(8));
    }

    #[test]
    fn execute_empty_and_mismatch() {
        let mut s = StabilizerTableau::new_polarized(4, Basis::X).unwrap();
        let before = s.clone();
        execute(&CircuitProgram::empty(4), &mut s, None).unwrap();
        assert_eq!(s, before);
        assert!(execute(&CircuitProgram::empty(3), &mut s, None).is_err());
        assert!(execute(&build_scrambling_circuit(2).unwrap(), &mut s, Some(5)).is_err());
    }

    #[test]
    fn executing_twice_differs_from_once() {
        let p = build_scrambling_circuit(3).unwrap();
        let mut once = StabilizerTableau::new_polarized(8, Basis::Z).unwrap();
        execute(&p, &mut once, None).unwrap();
        let mut twice = once.clone();
        execute(&p, &mut twice, None).unwrap();
        assert!(once.is_valid() && twice.is_valid());
        let differs = (0u32..256).any(|mask| {
            let a: Vec<usize> = (0..8).filter(|q| mask >> q & 1 == 1).collect();
            once.renyi2_entropy_bits(&a).unwrap() != twice.renyi2_entropy_bits(&a).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn truncation_and_upto_agree() {
        let p = build_scrambling_circuit(3).unwrap();
        for t in 0..=p.depth() {
            let mut a = StabilizerTableau::new_polarized(8, Basis::Z).unwrap();
            let mut b = a.clone();
            execute(&p, &mut a, Some(t)).unwrap();
            execute(&p.truncated(t).unwrap(), &mut b, None).unwrap();
            assert_eq!(a, b);
            assert_eq!(p.truncated(t).unwrap().depth(), t);
        }
        let mut full = StabilizerTableau::new_polarized(8, Basis::Z).unwrap();
        let mut upto = full.clone();
        execute(&p, &mut full, None).unwrap();
        execute(&p, &mut upto, Some(p.depth())).unwrap();
        assert_eq!(full, upto);
    }

    #[test]
    fn execute_on_subregister_matches_execute() {
        let p = build_random_all_to_all(4, 3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut small = StabilizerTableau::new_polarized(4, Basis::Y).unwrap();
        execute(&p, &mut small, None).unwrap();
        let mut big = StabilizerTableau::new_polarized(6, Basis::Y).unwrap();
        execute_on(&p, &mut big, &[1, 2, 3, 4]).unwrap();
        for mask in 0u32..16 {
            let a: Vec<usize> = (0..4).filter(|q| mask >> q & 1 == 1).collect();
            let shifted: Vec<usize> = a.iter().map(|q| q + 1).collect();
            assert_eq!(
                small.renyi2_entropy_bits(&a).unwrap(),
                big.renyi2_entropy_bits(&shifted).unwrap()
            );
        }
        assert!(execute_on(&p, &mut big, &[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let p = build_random_all_to_all(8, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let q = CircuitProgram::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.depth(), 2);
        let bad = r#"{"n_qubits": 3, "layers": [{"Permute": [0, 1]}]}"#;
        assert!(CircuitProgram::from_json(bad).is_err());
        let golden = build_hypercube_circuit(2).unwrap().to_json();
        let compact: String = golden.split_whitespace().collect();
        assert_eq!(
            compact,
            r#"{"n_qubits":4,"layers":["CzEven",{"Permute":[0,2,1,3]},"CzEven",{"Permute":[0,2,1,3]}]}"#
        );
    }
}
