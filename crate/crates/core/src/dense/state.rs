use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{cz_even_bonds, cz_odd_bonds, CircuitLayer, CircuitProgram};
use crate::error::{Error, Result};

/// Largest register the dense engine will allocate.
pub const MAX_DENSE_QUBITS: usize = 20;

/// Residual phase between atoms at twice the blockade distance: `pi / 2^6`.
pub const CROSSTALK_PHASE: f64 = PI / 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Single-qubit error model of one noise round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// X, Y, Z with probability `p/4` each.
    #[default]
    Depolarizing,
    /// Z with probability `p/2`.
    Dephasing,
}

impl NoiseModel {
    /// Draw the error on one qubit.
    pub fn sample<R: Rng + ?Sized>(self, p: f64, rng: &mut R) -> Pauli {
        let u: f64 = rng.gen();
        match self {
            NoiseModel::Depolarizing => {
                if u < 0.25 * p {
                    Pauli::X
                } else if u < 0.5 * p {
                    Pauli::Y
                } else if u < 0.75 * p {
                    Pauli::Z
                } else {
                    Pauli::I
                }
            }
            NoiseModel::Dephasing => {
                if u < 0.5 * p {
                    Pauli::Z
                } else {
                    Pauli::I
                }
            }
        }
    }
}

/// Gates understood by [`DenseState::apply_gate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    /// `diag(1, i)`.
    P(usize),
    /// `diag(1, -i)`.
    Pdg(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
    /// `diag(1, 1, 1, e^{i theta})`.
    CPhase(usize, usize, f64),
    Pauli(usize, Pauli),
}

/// Pure state of `n` qubits; qubit `q` is bit `q` of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::ResourceCap(format!("{n} qubits exceed the dense limit {MAX_DENSE_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wrap an amplitude vector of length `2^n`; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::ResourceCap(format!("{n} qubits exceed the dense limit {MAX_DENSE_QUBITS}")));
        }
        Ok(Self { n, amps })
    }

    /// Product of Bell pairs `(|00> + |11>)/sqrt 2`; every qubit must appear
    /// in exactly one pair.
    pub fn epr_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut s = Self::zero(n)?;
        let mut seen = vec![false; n];
        for &(a, b) in pairs {
            for q in [a, b] {
                s.check(q)?;
                if std::mem::replace(&mut seen[q], true) {
                    return Err(Error::DuplicateQubit(q));
                }
            }
        }
        if let Some(q) = seen.iter().position(|&x| !x) {
            return Err(Error::InvalidArgument(format!("qubit {q} is not in any pair")));
        }
        let masks: Vec<usize> = pairs.iter().map(|&(a, b)| (1 << a) | (1 << b)).collect();
        let amp = Complex64::new((0.5f64).powf(pairs.len() as f64 / 2.0), 0.0);
        s.amps[0] = Complex64::new(0.0, 0.0);
        for sel in 0usize..(1 << pairs.len()) {
            let mut i = 0;
            for (k, m) in masks.iter().enumerate() {
                if sel >> k & 1 == 1 {
                    i |= m;
                }
            }
            s.amps[i] = amp;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, size: self.n });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => {
                self.check(q)?;
                self.h(q);
            }
            Gate::P(q) => {
                self.check(q)?;
                self.phase1(q, Complex64::new(0.0, 1.0));
            }
            Gate::Pdg(q) => {
                self.check(q)?;
                self.phase1(q, Complex64::new(0.0, -1.0));
            }
            Gate::Cz(a, b) => {
                self.check_pair(a, b)?;
                self.phase2(a, b, Complex64::new(-1.0, 0.0));
            }
            Gate::CPhase(a, b, theta) => {
                self.check_pair(a, b)?;
                self.phase2(a, b, Complex64::from_polar(1.0, theta));
            }
            Gate::Cnot(c, t) => {
                self.check_pair(c, t)?;
                let (mc, mt) = (1usize << c, 1usize << t);
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            Gate::Pauli(q, p) => {
                self.check(q)?;
                self.pauli(q, p);
            }
        }
        Ok(())
    }

    pub(crate) fn h(&mut self, q: usize) {
        let m = 1usize << q;
        let s = FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (a + b) * s;
                self.amps[i | m] = (a - b) * s;
            }
        }
    }

    fn phase1(&mut self, q: usize, ph: Complex64) {
        let m = 1usize << q;
        self.amps.iter_mut().enumerate().filter(|(i, _)| i & m != 0).for_each(|(_, a)| *a *= ph);
    }

    fn phase2(&mut self, a: usize, b: usize, ph: Complex64) {
        let m = (1usize << a) | (1usize << b);
        self.amps.iter_mut().enumerate().filter(|(i, _)| i & m == m).for_each(|(_, x)| *x *= ph);
    }

    pub(crate) fn pauli(&mut self, q: usize, p: Pauli) {
        let m = 1usize << q;
        match p {
            Pauli::I => {}
            Pauli::Z => self.phase1(q, Complex64::new(-1.0, 0.0)),
            Pauli::X | Pauli::Y => {
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
                if p == Pauli::Y {
                    // Y = i X Z: after the swap, |1> carries +i and |0> carries -i.
                    for (i, a) in self.amps.iter_mut().enumerate() {
                        *a *= if i & m != 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                    }
                }
            }
        }
    }

    /// CZ on every bond; with `crosstalk`, also `CPhase(pi/64)` on each
    /// adjacent pair of the open chain `0..n` that is not a bond, the pair
    /// then sitting at twice the blockade distance. Longer-range tails are
    /// dropped.
    pub fn rydberg_cz_layer(&mut self, bonds: &[(usize, usize)], crosstalk: bool) -> Result<()> {
        let mut used = vec![false; self.n];
        for &(a, b) in bonds {
            self.check_pair(a, b)?;
            for q in [a, b] {
                if std::mem::replace(&mut used[q], true) {
                    return Err(Error::InvalidArgument(format!("bonds overlap on qubit {q}")));
                }
            }
        }
        for &(a, b) in bonds {
            self.phase2(a, b, Complex64::new(-1.0, 0.0));
        }
        if crosstalk {
            let ph = Complex64::from_polar(1.0, CROSSTALK_PHASE);
            for q in 0..self.n.saturating_sub(1) {
                let bonded = bonds.iter().any(|&(a, b)| (a.min(b), a.max(b)) == (q, q + 1));
                if !bonded {
                    self.phase2(q, q + 1, ph);
                }
            }
        }
        Ok(())
    }

    /// One noise round on `qubits`: each draws its own error.
    pub fn depolarize_trajectory<R: Rng + ?Sized>(
        &mut self,
        qubits: &[usize],
        p: f64,
        model: NoiseModel,
        rng: &mut R,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("noise rate {p} outside [0, 1]")));
        }
        for &q in qubits {
            self.check(q)?;
            let e = model.sample(p, rng);
            self.pauli(q, e);
        }
        Ok(())
    }

    /// Reduced density matrix of qubits `a`, row-major with `a[k]` as bit `k`.
    pub fn reduced_density_matrix(&self, a: &[usize]) -> Result<Vec<Complex64>> {
        for &q in a {
            self.check(q)?;
        }
        let k = a.len();
        let rest: Vec<usize> = (0..self.n).filter(|q| !a.contains(q)).collect();
        let da = 1usize << k;
        let mut rho = vec![Complex64::new(0.0, 0.0); da * da];
        let spread = |bits: &[usize], v: usize| bits.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | ((v >> j & 1) << q));
        for e in 0..1usize << rest.len() {
            let base = spread(&rest, e);
            let col: Vec<Complex64> = (0..da).map(|v| self.amps[base | spread(a, v)]).collect();
            for i in 0..da {
                for j in 0..da {
                    rho[i * da + j] += col[i] * col[j].conj();
                }
            }
        }
        Ok(rho)
    }

    /// `-log2 Tr rho_A^2`.
    pub fn renyi2_entropy_bits(&self, a: &[usize]) -> Result<f64> {
        let mut sorted = a.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &q in &sorted {
            self.check(q)?;
        }
        // Use the smaller side: Tr rho_A^2 = Tr rho_Abar^2.
        let side = if 2 * sorted.len() <= self.n {
            sorted
        } else {
            (0..self.n).filter(|q| sorted.binary_search(q).is_err()).collect()
        };
        let rho = self.reduced_density_matrix(&side)?;
        let purity: f64 = rho.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.norm_sqr().powi(2);
        Ok(-purity.log2())
    }

    /// Project qubits `a`, `b` onto `(|00> + |11>)/sqrt 2` and trace them out:
    /// the result lives on the remaining qubits in their original order, and
    /// its squared norm is the success probability times the input norm.
    pub fn contract_epr(&self, a: usize, b: usize) -> Result<DenseState> {
        self.check_pair(a, b)?;
        let (lo, hi) = (a.min(b), a.max(b));
        let n = self.n - 2;
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (r, o) in out.iter_mut().enumerate() {
            // insert zero bits at lo and hi
            let low = r & ((1 << lo) - 1);
            let mid = (r >> lo) & ((1 << (hi - lo - 1)) - 1);
            let high = r >> (hi - 1);
            let i = low | (mid << (lo + 1)) | (high << (hi + 1));
            *o = (self.amps[i] + self.amps[i | (1 << lo) | (1 << hi)]) * FRAC_1_SQRT_2;
        }
        Ok(DenseState { n, amps: out })
    }

    /// Probability that a projective measurement finds `a`, `b` in the Bell
    /// pair, for a normalized state.
    pub fn epr_probability(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.contract_epr(a, b)?.norm_sqr())
    }

    /// Run a program with qubit `i` on site `i`. Permutations move amplitudes.
    pub fn execute(&mut self, program: &CircuitProgram) -> Result<()> {
        let n = program.n_qubits();
        if n != self.n {
            return Err(Error::SizeMismatch { expected: n, actual: self.n });
        }
        for layer in program.layers() {
            match layer {
                CircuitLayer::GlobalH => (0..n).for_each(|q| self.h(q)),
                CircuitLayer::GlobalP => (0..n).for_each(|q| self.phase1(q, Complex64::new(0.0, 1.0))),
                CircuitLayer::GlobalPdg => (0..n).for_each(|q| self.phase1(q, Complex64::new(0.0, -1.0))),
                CircuitLayer::CzEven => {
                    cz_even_bonds(n).iter().for_each(|&(a, b)| self.phase2(a, b, Complex64::new(-1.0, 0.0)))
                }
                CircuitLayer::CzOdd => {
                    cz_odd_bonds(n).iter().for_each(|&(a, b)| self.phase2(a, b, Complex64::new(-1.0, 0.0)))
                }
                CircuitLayer::Permute(p) => {
                    let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
                    for (i, a) in self.amps.iter().enumerate() {
                        let j = (0..n).fold(0usize, |acc, q| acc | ((i >> q & 1) << p.apply(q)));
                        out[j] = *a;
                    }
                    self.amps = out;
                }
                CircuitLayer::Clifford(_) => {
                    return Err(Error::Unsupported("sampled two-qubit Clifford layers in the dense engine".into()))
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, seed: u64) -> DenseState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> =
            (0..1 << n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        DenseState::from_amplitudes(amps).unwrap()
    }

    fn close(a: &DenseState, b: &DenseState) -> bool {
        a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn involutions_and_orders() {
        let s = random_state(4, 1);
        for gates in [
            vec![Gate::H(2), Gate::H(2)],
            vec![Gate::P(1); 4],
            vec![Gate::Cz(0, 3), Gate::Cz(0, 3)],
            vec![Gate::Cnot(1, 2), Gate::Cnot(1, 2)],
            vec![Gate::P(0), Gate::Pdg(0)],
            vec![Gate::Pauli(3, Pauli::Y), Gate::Pauli(3, Pauli::Y)],
        ] {
            let mut t = s.clone();
            gates.into_iter().for_each(|g| t.apply_gate(g).unwrap());
            assert!(close(&s, &t));
            assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let mut a = s.clone();
        let mut b = s.clone();
        a.apply_gate(Gate::CPhase(0, 2, PI)).unwrap();
        b.apply_gate(Gate::Cz(0, 2)).unwrap();
        assert!(close(&a, &b));
        assert!(s.clone().apply_gate(Gate::Cz(1, 1)).is_err());
        assert!(s.clone().apply_gate(Gate::H(4)).is_err());
    }

    #[test]
    fn pauli_matrices() {
        // Y|0> = i|1>, Y|1> = -i|0>.
        let mut s = DenseState::zero(1).unwrap();
        s.apply_gate(Gate::Pauli(0, Pauli::Y)).unwrap();
        assert!((s.amplitudes()[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        s.apply_gate(Gate::Pauli(0, Pauli::Y)).unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_pair_entropy_and_projection() {
        let s = DenseState::epr_pairs(4, &[(0, 2), (1, 3)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.renyi2_entropy_bits(&[0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.renyi2_entropy_bits(&[0, 2]).unwrap()).abs() < 1e-12);
        assert!((s.renyi2_entropy_bits(&[0, 1]).unwrap() - 2.0).abs() < 1e-12);
        assert!((s.epr_probability(0, 2).unwrap() - 1.0).abs() < 1e-12);
        // Halves of different pairs: probability 1/4.
        assert!((s.epr_probability(0, 1).unwrap() - 0.25).abs() < 1e-12);
        let rest = s.contract_epr(0, 2).unwrap();
        assert_eq!(rest.n_qubits(), 2);
        assert!((rest.epr_probability(0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(DenseState::epr_pairs(3, &[(0, 1)]).is_err());
        assert!(DenseState::epr_pairs(4, &[(0, 1), (1, 2)]).is_err());
    }

    #[test]
    fn contraction_keeps_remaining_order() {
        // Qubit 1 in |1>, qubits 0 and 2 in a Bell pair, qubit 3 in |0>.
        let mut s = DenseState::zero(4).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::Cnot(0, 2)).unwrap();
        s.apply_gate(Gate::Pauli(1, Pauli::X)).unwrap();
        let r = s.contract_epr(2, 0).unwrap();
        assert!((r.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((r.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crosstalk_layer() {
        let mut plus = DenseState::zero(4).unwrap();
        (0..4).for_each(|q| plus.h(q));
        let mut off = plus.clone();
        off.rydberg_cz_layer(&[(0, 1), (2, 3)], false).unwrap();
        let mut cz = plus.clone();
        cz.apply_gate(Gate::Cz(0, 1)).unwrap();
        cz.apply_gate(Gate::Cz(2, 3)).unwrap();
        assert!(close(&off, &cz));
        let mut on = plus.clone();
        on.rydberg_cz_layer(&[(0, 1), (2, 3)], true).unwrap();
        let mut expect = cz.clone();
        expect.apply_gate(Gate::CPhase(1, 2, PI / 64.0)).unwrap();
        assert!(close(&on, &expect));
        let overlap = off.inner(&on).unwrap().norm_sqr();
        assert!(overlap < 1.0 - 1e-6 && overlap > 0.99);
        assert!((CROSSTALK_PHASE - PI * 0.5f64.powi(6)).abs() < 1e-15);
        assert!(plus.clone().rydberg_cz_layer(&[(0, 1), (1, 2)], false).is_err());
    }

    #[test]
    fn depolarizing_average_matches_channel() {
        // Average rho over trajectories for |0> and |+>, compare with
        // (1-p) rho + p I/2 entrywise.
        let trials = 20_000u64;
        for (p, prep_plus) in [(0.2, false), (0.2, true), (1.0, false)] {
            let mut acc = [Complex64::new(0.0, 0.0); 4];
            for k in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(k);
                let mut s = DenseState::zero(1).unwrap();
                if prep_plus {
                    s.h(0);
                }
                s.depolarize_trajectory(&[0], p, NoiseModel::Depolarizing, &mut rng).unwrap();
                let rho = s.reduced_density_matrix(&[0]).unwrap();
                acc.iter_mut().zip(&rho).for_each(|(a, r)| *a += r);
            }
            let rho0: [f64; 4] = if prep_plus { [0.5, 0.5, 0.5, 0.5] } else { [1.0, 0.0, 0.0, 0.0] };
            for e in 0..4 {
                let mean = acc[e].re / trials as f64;
                let expect = (1.0 - p) * rho0[e] + if e == 0 || e == 3 { p / 2.0 } else { 0.0 };
                // Each trajectory's entry is bounded by 1 in magnitude.
                let sigma = 0.5 / (trials as f64).sqrt();
                assert!((mean - expect).abs() < 3.0 * sigma, "p={p} plus={prep_plus} e={e} {mean} {expect}");
                assert!(acc[e].im.abs() / (trials as f64) < 1e-12);
            }
        }
        let mut s = DenseState::zero(1).unwrap();
        assert!(s.depolarize_trajectory(&[0], 1.5, NoiseModel::Depolarizing, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn dephasing_model_only_flips_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            counts[NoiseModel::Dephasing.sample(0.4, &mut rng) as usize] += 1;
        }
        assert_eq!(counts[Pauli::X as usize] + counts[Pauli::Y as usize], 0);
        assert!((counts[Pauli::Z as usize] as f64 / 1e4 - 0.2).abs() < 3.0 * (0.16f64 / 1e4).sqrt());
    }

    #[test]
    fn resource_cap() {
        assert!(matches!(DenseState::zero(21), Err(Error::ResourceCap(_))));
    }
}
