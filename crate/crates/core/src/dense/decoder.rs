//! Probabilistic teleportation decoder run on the dense engine with noise
//! trajectories.
//!
//! Bit layout of the `2N + 2|A|` qubits: scrambler register `0..N`, decoder
//! register `N..2N`, Alice's references `2N..2N+|A|`, Bob's probe qubits
//! `2N+|A|..`. Alice feeds input sites `0..|A|`. The scrambler `U` acts on
//! the first register and `U*` on the second; both advance in lockstep, one
//! noise round on every qubit following each interaction layer.
//!
//! Site permutations are never executed: they only relabel which bit holds
//! which site, so every gate is resolved to fixed bit positions up front.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{NoiseModel, Pauli};
use crate::circuits::{
    build_scrambling_circuit, build_unshuffled_circuit, clifford_group, cz_even_bonds, cz_odd_bonds, CircuitLayer,
    CircuitProgram, CliffordGate,
};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Total qubit budget of the decoder.
pub const MAX_DECODER_QUBITS: usize = 20;

/// Phases are tracked in units of `pi/64`; 128 units make a full turn.
const TURN: u32 = 128;
const UNIT_P: u32 = 32;
const UNIT_CZ: u32 = 64;
const UNIT_CROSSTALK: u32 = 1;

/// Complex conjugate of a circuit: `P <-> P^dagger`, two-qubit Cliffords
/// replaced by their conjugates, everything else unchanged.
pub fn conjugate_program(program: &CircuitProgram) -> Result<CircuitProgram> {
    let group = clifford_group();
    let layers = program
        .layers()
        .iter()
        .map(|layer| match layer {
            CircuitLayer::GlobalP => CircuitLayer::GlobalPdg,
            CircuitLayer::GlobalPdg => CircuitLayer::GlobalP,
            CircuitLayer::Clifford(gates) => CircuitLayer::Clifford(
                gates
                    .iter()
                    .map(|g| {
                        let key = group[g.id].complex_conjugate().key();
                        let id = group.binary_search_by_key(&key, |c| c.key()).expect("group is closed");
                        CliffordGate { a: g.a, b: g.b, id }
                    })
                    .collect(),
            ),
            other => other.clone(),
        })
        .collect();
    CircuitProgram::new(program.n_qubits(), layers)
}

/// Circuit run by the decoder experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderCircuit {
    /// The shuffle-based scrambling circuit.
    #[default]
    Scrambling,
    /// Same rotations and alternating CZ layers without shuffles.
    Unshuffled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSetup {
    /// Scrambler width, a power of two.
    pub n: usize,
    pub size_a: usize,
    /// Interaction layers kept from the `2 log2 N`-layer circuit.
    pub depth: usize,
    /// Error rate per qubit per interaction layer.
    pub p: f64,
    pub crosstalk: bool,
    pub noise: NoiseModel,
    pub circuit: DecoderCircuit,
}

impl DecoderSetup {
    /// Full-depth scrambling circuit on `n` sites, crosstalk on.
    pub fn new(n: usize, size_a: usize, p: f64) -> Self {
        let depth = 2 * n.max(1).trailing_zeros() as usize;
        Self { n, size_a, depth, p, crosstalk: true, noise: NoiseModel::Depolarizing, circuit: DecoderCircuit::Scrambling }
    }

    pub fn total_qubits(&self) -> usize {
        2 * self.n + 2 * self.size_a
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(Error::InvalidArgument(format!("decoder width {} must be a power of two >= 4", self.n)));
        }
        if self.total_qubits() > MAX_DECODER_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{} qubits exceed the decoder limit {MAX_DECODER_QUBITS}",
                self.total_qubits()
            )));
        }
        if self.size_a == 0 || self.size_a > self.n {
            return Err(Error::InvalidArgument(format!("|A|={} outside 1..={}", self.size_a, self.n)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!("noise rate {} outside [0, 1]", self.p)));
        }
        let m = self.n.trailing_zeros() as usize;
        if self.depth == 0 || self.depth > 2 * m {
            return Err(Error::InvalidArgument(format!("depth {} outside 1..={}", self.depth, 2 * m)));
        }
        Ok(())
    }

    /// The scrambler `U`.
    pub fn program(&self) -> Result<CircuitProgram> {
        self.validate()?;
        let m = self.n.trailing_zeros() as usize;
        let full = match self.circuit {
            DecoderCircuit::Scrambling => build_scrambling_circuit(m)?,
            DecoderCircuit::Unshuffled => build_unshuffled_circuit(m)?,
        };
        full.truncated(self.depth)
    }
}

#[derive(Clone, Debug)]
enum Step {
    /// `(bit, units)` single-qubit and `(bit, bit, units)` two-qubit phases.
    Diag { single: Vec<(usize, u32)>, pair: Vec<(usize, usize, u32)> },
    /// Hadamard on each of the low `k` bits.
    HadamardLow(usize),
    Noise,
}

/// Gate list of `U (x) U*` with permutations resolved.
#[derive(Clone, Debug)]
struct Compiled {
    steps: Vec<Step>,
    /// `site_bit[s]`: bit offset of site `s` within either register at the end.
    site_bit: Vec<usize>,
    rounds: usize,
}

fn compile(program: &CircuitProgram, crosstalk: bool) -> Result<Compiled> {
    let n = program.n_qubits();
    let mut site_bit: Vec<usize> = (0..n).collect();
    let mut steps = Vec::new();
    let mut rounds = 0;
    let conj = |u: u32| (TURN - u) % TURN;
    for layer in program.layers() {
        match layer {
            CircuitLayer::GlobalP | CircuitLayer::GlobalPdg => {
                let u = if matches!(layer, CircuitLayer::GlobalP) { UNIT_P } else { conj(UNIT_P) };
                let single = (0..n).flat_map(|b| [(b, u), (n + b, conj(u))]).collect();
                steps.push(Step::Diag { single, pair: Vec::new() });
            }
            CircuitLayer::GlobalH => steps.push(Step::HadamardLow(2 * n)),
            CircuitLayer::CzEven | CircuitLayer::CzOdd => {
                let even = matches!(layer, CircuitLayer::CzEven);
                let (bonds, idle) =
                    if even { (cz_even_bonds(n), cz_odd_bonds(n)) } else { (cz_odd_bonds(n), cz_even_bonds(n)) };
                let mut pair = Vec::new();
                for &(a, b) in &bonds {
                    pair.push((site_bit[a], site_bit[b], UNIT_CZ));
                    pair.push((n + site_bit[a], n + site_bit[b], UNIT_CZ));
                }
                if crosstalk {
                    for &(a, b) in &idle {
                        pair.push((site_bit[a], site_bit[b], UNIT_CROSSTALK));
                        pair.push((n + site_bit[a], n + site_bit[b], conj(UNIT_CROSSTALK)));
                    }
                }
                steps.push(Step::Diag { single: Vec::new(), pair });
                steps.push(Step::Noise);
                rounds += 1;
            }
            CircuitLayer::Permute(p) => {
                let mut next = vec![0; n];
                for (s, &bit) in site_bit.iter().enumerate() {
                    next[p.apply(s)] = bit;
                }
                site_bit = next;
            }
            CircuitLayer::Clifford(_) => {
                return Err(Error::Unsupported("sampled two-qubit Clifford layers in the decoder".into()))
            }
        }
    }
    Ok(Compiled { steps, site_bit, rounds })
}

/// Deferred `out[i] = scale * e^{i pi u(i)/64} * in[i ^ flip]` with `u` a sum
/// of per-byte lookup tables.
struct Pending {
    flip: usize,
    tables: Vec<[u32; 256]>,
    scale: f64,
    trivial: bool,
}

impl Pending {
    fn new(n_bits: usize) -> Self {
        Self { flip: 0, tables: vec![[0; 256]; n_bits.div_ceil(8).max(1)], scale: 1.0, trivial: true }
    }

    fn reset(&mut self) {
        self.flip = 0;
        self.tables.iter_mut().for_each(|t| *t = [0; 256]);
        self.trivial = true;
    }

    fn add_single(&mut self, bit: usize, u: u32) {
        let (c, j) = (bit / 8, bit % 8);
        for (v, e) in self.tables[c].iter_mut().enumerate() {
            if v >> j & 1 == 1 {
                *e = (*e + u) % TURN;
            }
        }
        self.trivial = false;
    }

    fn add_pair(&mut self, a: usize, b: usize, u: u32) {
        debug_assert_eq!(a / 8, b / 8, "register straddles a table boundary");
        let (c, ja, jb) = (a / 8, a % 8, b % 8);
        for (v, e) in self.tables[c].iter_mut().enumerate() {
            if v >> ja & 1 == 1 && v >> jb & 1 == 1 {
                *e = (*e + u) % TURN;
            }
        }
        self.trivial = false;
    }

    /// Compose a Pauli string `X^x Z^z` (global phase dropped) after the
    /// pending operator.
    fn add_pauli(&mut self, x: usize, z: usize) {
        if x == 0 && z == 0 {
            return;
        }
        for (c, t) in self.tables.iter_mut().enumerate() {
            let xc = (x >> (8 * c)) & 0xff;
            let zc = (z >> (8 * c)) & 0xff;
            let old = *t;
            for (v, e) in t.iter_mut().enumerate() {
                let sign = if (zc & v).count_ones() % 2 == 1 { UNIT_CZ } else { 0 };
                *e = (old[v ^ xc] + sign) % TURN;
            }
        }
        self.flip ^= x;
        self.trivial = false;
    }

    fn apply(&self, src: &[Complex64], dst: &mut [Complex64], lut: &[Complex64; TURN as usize]) {
        let lut: Vec<Complex64> = lut.iter().map(|c| c * self.scale).collect();
        let t = &self.tables;
        let flip_lo = self.flip & 0xff;
        let flip_hi = self.flip >> 8;
        if dst.len() < 256 {
            for (i, d) in dst.iter_mut().enumerate() {
                *d = lut[(t[0][i] % TURN) as usize] * src[i ^ flip_lo];
            }
            return;
        }
        for (hi, block) in dst.chunks_mut(256).enumerate() {
            let base: u32 = t[1..].iter().enumerate().map(|(c, tab)| tab[(hi >> (8 * c)) & 0xff]).sum();
            let from = &src[((hi ^ flip_hi) << 8)..][..256];
            for (lo, d) in block.iter_mut().enumerate() {
                *d = lut[((base + t[0][lo]) % TURN) as usize] * from[lo ^ flip_lo];
            }
        }
    }
}

fn phase_lut() -> [Complex64; TURN as usize] {
    std::array::from_fn(|u| Complex64::from_polar(1.0, std::f64::consts::PI * u as f64 / 64.0))
}

/// Levels handled inside one cache-resident block.
const WHT_BLOCK_BITS: usize = 11;

/// Unnormalized Walsh-Hadamard transform on the low `k` bits.
fn hadamard_low(v: &mut [Complex64], k: usize) {
    let low = k.min(WHT_BLOCK_BITS);
    for chunk in v.chunks_mut(1 << low) {
        for h in 0..low {
            butterflies(chunk, 1 << h);
        }
    }
    let mut h = low;
    while h + 1 < k {
        let q = 1usize << h;
        for base in (0..v.len()).step_by(4 * q) {
            let (a, rest) = v[base..base + 4 * q].split_at_mut(q);
            let (b, rest) = rest.split_at_mut(q);
            let (c, d) = rest.split_at_mut(q);
            for j in 0..q {
                let (s0, d0) = (a[j] + b[j], a[j] - b[j]);
                let (s1, d1) = (c[j] + d[j], c[j] - d[j]);
                a[j] = s0 + s1;
                b[j] = d0 + d1;
                c[j] = s0 - s1;
                d[j] = d0 - d1;
            }
        }
        h += 2;
    }
    if h < k {
        butterflies(v, 1 << h);
    }
}

fn butterflies(v: &mut [Complex64], half: usize) {
    for pair in v.chunks_mut(2 * half) {
        let (lo, hi) = pair.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x + y;
            *b = x - y;
        }
    }
}

/// Error pattern of one noise round as bit masks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct PauliMask {
    x: usize,
    z: usize,
}

struct Engine {
    compiled: Compiled,
    n_bits: usize,
    lut: [Complex64; TURN as usize],
    initial: Vec<Complex64>,
    /// `snapshots[k]`: noiseless state just before noise round `k`;
    /// `snapshots[rounds]`: noiseless final state.
    snapshots: Vec<Vec<Complex64>>,
    /// Index of the `k`-th noise step in `compiled.steps`.
    noise_steps: Vec<usize>,
}

impl Engine {
    fn new(compiled: Compiled, n_bits: usize, initial: Vec<Complex64>) -> Self {
        let noise_steps =
            compiled.steps.iter().enumerate().filter(|(_, s)| matches!(s, Step::Noise)).map(|(i, _)| i).collect();
        let mut e = Self { compiled, n_bits, lut: phase_lut(), initial, snapshots: Vec::new(), noise_steps };
        e.snapshots = e.noiseless_snapshots();
        e
    }

    fn noiseless_snapshots(&self) -> Vec<Vec<Complex64>> {
        let mut out = Vec::new();
        let mut cur = self.initial.clone();
        let mut from = 0;
        for &k in &self.noise_steps {
            cur = self.run(&cur, from, k, &[]);
            out.push(cur.clone());
            from = k + 1;
        }
        out.push(self.run(&cur, from, self.compiled.steps.len(), &[]));
        out
    }

    /// Apply `steps[from..to]` to `src`; the `j`-th noise step met uses
    /// `errors[j]` (missing entries are error-free).
    fn run(&self, src: &[Complex64], from: usize, to: usize, errors: &[PauliMask]) -> Vec<Complex64> {
        let mut pending = Pending::new(self.n_bits);
        let mut cur: Option<Vec<Complex64>> = None;
        let mut noise_idx = 0;
        let flush = |pending: &mut Pending, cur: &mut Option<Vec<Complex64>>| {
            if pending.trivial && pending.scale == 1.0 {
                return;
            }
            let mut dst = vec![Complex64::new(0.0, 0.0); src.len()];
            pending.apply(cur.as_deref().unwrap_or(src), &mut dst, &self.lut);
            *cur = Some(dst);
            pending.reset();
            pending.scale = 1.0;
        };
        for step in &self.compiled.steps[from..to] {
            match step {
                Step::Diag { single, pair } => {
                    single.iter().for_each(|&(b, u)| pending.add_single(b, u));
                    pair.iter().for_each(|&(a, b, u)| pending.add_pair(a, b, u));
                }
                Step::Noise => {
                    if let Some(e) = errors.get(noise_idx) {
                        pending.add_pauli(e.x, e.z);
                    }
                    noise_idx += 1;
                }
                Step::HadamardLow(k) => {
                    let scale = pending.scale;
                    pending.scale = 1.0;
                    flush(&mut pending, &mut cur);
                    let v = cur.get_or_insert_with(|| src.to_vec());
                    hadamard_low(v, *k);
                    pending.scale = scale * 0.5f64.powf(*k as f64 / 2.0);
                }
            }
        }
        flush(&mut pending, &mut cur);
        cur.unwrap_or_else(|| src.to_vec())
    }

    /// Final state of one trajectory with the given per-round errors.
    fn trajectory(&self, errors: &[PauliMask]) -> std::borrow::Cow<'_, [Complex64]> {
        match errors.iter().position(|e| *e != PauliMask::default()) {
            None => std::borrow::Cow::Borrowed(&self.snapshots[self.compiled.rounds]),
            Some(k) => std::borrow::Cow::Owned(self.run(
                &self.snapshots[k],
                self.noise_steps[k],
                self.compiled.steps.len(),
                &errors[k..],
            )),
        }
    }
}

/// Project bits `a`, `b` (positions in the current vector) onto a Bell pair
/// and drop them.
fn contract(v: &[Complex64], a: usize, b: usize) -> Vec<Complex64> {
    let (lo, hi) = (a.min(b), a.max(b));
    let len = v.len() >> 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|r| {
            let low = r & ((1 << lo) - 1);
            let mid = (r >> lo) & ((1 << (hi - lo - 1)) - 1);
            let high = r >> (hi - 1);
            let i = low | (mid << (lo + 1)) | (high << (hi + 1));
            (v[i] + v[i | (1 << lo) | (1 << hi)]) * s
        })
        .collect()
}

/// Contract original bits `a`, `b`, keeping `alive` (sorted original bit
/// labels of `v`) in step.
fn contract_labels(v: &[Complex64], alive: &mut Vec<usize>, a: usize, b: usize) -> Vec<Complex64> {
    let pa = alive.binary_search(&a).expect("bit is alive");
    let pb = alive.binary_search(&b).expect("bit is alive");
    let out = contract(v, pa, pb);
    alive.retain(|&q| q != a && q != b);
    out
}

/// Decoder statistics at one `|R|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderRow {
    pub size_r: usize,
    /// Mean success probability of the EPR projections on `R`.
    pub p_epr: f64,
    pub p_epr_stderr: f64,
    /// Fidelity conditioned on success: `E[P F] / E[P]`.
    pub f_epr: f64,
    pub f_epr_stderr: f64,
    /// Unweighted mean of the per-trajectory conditional fidelity.
    pub f_mean: f64,
    pub f_mean_stderr: f64,
    /// `P_EPR F_EPR 2^{2|A|}`.
    pub delta: f64,
    pub delta_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub setup: DecoderSetup,
    pub trajectories: usize,
    /// One row per `|R| = 0..=N`.
    pub rows: Vec<DecoderRow>,
}

impl TrajectoryStats {
    pub fn row(&self, size_r: usize) -> Option<&DecoderRow> {
        self.rows.iter().find(|r| r.size_r == size_r)
    }
}

/// Per-trajectory `(P, F)` for every prefix of a random site ordering.
fn measure(
    psi: &[Complex64],
    setup: &DecoderSetup,
    site_bit: &[usize],
    order: &[usize],
) -> Vec<(f64, f64)> {
    let n = setup.n;
    let a = setup.size_a;
    let mut alive: Vec<usize> = (0..setup.total_qubits()).collect();
    let mut v = psi.to_vec();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            let s = order[k - 1];
            v = contract_labels(&v, &mut alive, site_bit[s], n + site_bit[s]);
        }
        let p: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let mut w = v.clone();
        let mut alive_w = alive.clone();
        for j in 0..a {
            w = contract_labels(&w, &mut alive_w, 2 * n + j, 2 * n + a + j);
        }
        let pf: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        out.push((p, if p > 0.0 { pf / p } else { 0.0 }));
    }
    out
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: f64,
    p: f64,
    pp: f64,
    x: f64,
    xx: f64,
    xp: f64,
}

impl Sums {
    fn push(&mut self, p: f64, f: f64) {
        let x = p * f;
        self.n += 1.0;
        self.p += p;
        self.pp += p * p;
        self.x += x;
        self.xx += x * x;
        self.xp += x * p;
    }

    fn row(&self, size_r: usize, size_a: usize, f_mean: &crate::stats::Mean) -> DecoderRow {
        let n = self.n;
        let mp = self.p / n;
        let mx = self.x / n;
        let denom = (n - 1.0).max(1.0);
        let vp = ((self.pp - n * mp * mp) / denom).max(0.0);
        let vx = ((self.xx - n * mx * mx) / denom).max(0.0);
        let cxp = (self.xp - n * mx * mp) / denom;
        let f = if mp > 0.0 { mx / mp } else { 0.0 };
        let vf = if mp > 0.0 { ((vx - 2.0 * f * cxp + f * f * vp) / (n * mp * mp)).max(0.0) } else { 0.0 };
        let scale = (2.0 * size_a as f64).exp2();
        DecoderRow {
            size_r,
            p_epr: mp,
            p_epr_stderr: (vp / n).sqrt(),
            f_epr: f,
            f_epr_stderr: vf.sqrt(),
            f_mean: f_mean.mean(),
            f_mean_stderr: f_mean.stderr(),
            delta: mx * scale,
            delta_stderr: (vx / n).sqrt() * scale,
        }
    }
}

/// Run `trajectories` noise realizations of the decoder. Each trajectory also
/// draws a uniformly random order of output sites; `R` of size `k` is its
/// first `k` sites, so one trajectory contributes to every `|R|`.
///
/// Trajectory `j` draws everything from `seeds.rng(j)`.
pub fn run_decoder(setup: &DecoderSetup, trajectories: usize, seeds: &SeedStream) -> Result<TrajectoryStats> {
    let program = setup.program()?;
    if trajectories == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    let n = setup.n;
    let a = setup.size_a;
    let total = setup.total_qubits();
    let compiled = compile(&program, setup.crosstalk)?;
    let site_bit = compiled.site_bit.clone();
    let rounds = compiled.rounds;

    // Alice on input sites 0..a; decoder slots 0..a hold the partners of
    // Bob's probe qubits.
    let mut pairs: Vec<(usize, usize)> = (0..a).map(|j| (2 * n + j, j)).collect();
    pairs.extend((a..n).map(|i| (n + i, i)));
    pairs.extend((0..a).map(|j| (n + j, 2 * n + a + j)));
    let initial = super::state::DenseState::epr_pairs(total, &pairs)?.amplitudes().to_vec();
    let engine = Engine::new(compiled, total, initial);

    let per_traj: Vec<Vec<(f64, f64)>> = (0..trajectories as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = seeds.rng(j);
            let errors: Vec<PauliMask> = (0..rounds)
                .map(|_| {
                    let mut m = PauliMask::default();
                    for q in 0..total {
                        match setup.noise.sample(setup.p, &mut rng) {
                            Pauli::I => {}
                            Pauli::X => m.x |= 1 << q,
                            Pauli::Y => {
                                m.x |= 1 << q;
                                m.z |= 1 << q;
                            }
                            Pauli::Z => m.z |= 1 << q,
                        }
                    }
                    m
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let psi = engine.trajectory(&errors);
            measure(&psi, setup, &site_bit, &order)
        })
        .collect();

    let rows = (0..=n)
        .map(|k| {
            let mut sums = Sums::default();
            let mut f_mean = crate::stats::Mean::new();
            for t in &per_traj {
                let (p, f) = t[k];
                sums.push(p, f);
                if p > 1e-14 {
                    f_mean.push(f);
                }
            }
            sums.row(k, a, &f_mean)
        })
        .collect();
    Ok(TrajectoryStats { setup: setup.clone(), trajectories, rows })
}
