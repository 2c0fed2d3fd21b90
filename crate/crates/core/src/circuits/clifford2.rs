//! The two-qubit Clifford group modulo global phase.
//!
//! An element is stored by where it sends the generators `X0, Z0, X1, Z1`
//! (signed Hermitian Pauli images). The full group is closed by breadth-first
//! search over `{H0, H1, P0, P1, CNOT01, CNOT10}` and has 11520 elements.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use crate::tableau::LocalCliffordTable;

/// Two-qubit Pauli with phase: `i^phase * X^x * Z^z`, bit 0 = qubit 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PhasedPauli {
    x: u8,
    z: u8,
    phase: u8,
}

impl PhasedPauli {
    fn hermitian(x: u8, z: u8, negative: bool) -> Self {
        let ph = (x & z).count_ones() as u8 + if negative { 2 } else { 0 };
        Self { x, z, phase: ph % 4 }
    }

    fn mul(self, rhs: Self) -> Self {
        // Moving X^x2 left past Z^z1 picks up (-1)^{z1 . x2}.
        let swap = 2 * (self.z & rhs.x).count_ones() as u8;
        Self { x: self.x ^ rhs.x, z: self.z ^ rhs.z, phase: (self.phase + rhs.phase + swap) % 4 }
    }

    /// Sign of the Hermitian operator, `true` for minus.
    fn negative(self) -> bool {
        let rel = (4 + self.phase - (self.x & self.z).count_ones() as u8 % 4) % 4;
        debug_assert!(rel % 2 == 0, "non-Hermitian image");
        rel == 2
    }
}

/// Signed image of one generator: `x`, `z` are 2-bit masks over the two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliImage {
    pub x: u8,
    pub z: u8,
    pub negative: bool,
}

impl PauliImage {
    const fn new(x: u8, z: u8, negative: bool) -> Self {
        Self { x, z, negative }
    }

    fn phased(self) -> PhasedPauli {
        PhasedPauli::hermitian(self.x, self.z, self.negative)
    }

    fn pack(self) -> u32 {
        (self.x as u32) | (self.z as u32) << 2 | (self.negative as u32) << 4
    }

    /// Letters for qubits 0 and 1, with sign, e.g. `-XZ`.
    pub fn label(self) -> String {
        let letter = |q: u8| match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        };
        format!("{}{}{}", if self.negative { '-' } else { '+' }, letter(0), letter(1))
    }
}

/// Two-qubit Clifford element, as images of `[X0, Z0, X1, Z1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoQubitClifford {
    pub images: [PauliImage; 4],
}

impl TwoQubitClifford {
    pub const IDENTITY: Self = Self {
        images: [
            PauliImage::new(0b01, 0b00, false),
            PauliImage::new(0b00, 0b01, false),
            PauliImage::new(0b10, 0b00, false),
            PauliImage::new(0b00, 0b10, false),
        ],
    };

    pub fn h(q: usize) -> Self {
        let mut g = Self::IDENTITY;
        let bit = 1 << q;
        g.images[2 * q] = PauliImage::new(0, bit, false);
        g.images[2 * q + 1] = PauliImage::new(bit, 0, false);
        g
    }

    pub fn phase(q: usize) -> Self {
        let mut g = Self::IDENTITY;
        let bit = 1 << q;
        g.images[2 * q] = PauliImage::new(bit, bit, false);
        g
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        assert!(control < 2 && target < 2 && control != target);
        let (c, t) = (1u8 << control, 1u8 << target);
        let mut g = Self::IDENTITY;
        g.images[2 * control] = PauliImage::new(c | t, 0, false);
        g.images[2 * target + 1] = PauliImage::new(0, c | t, false);
        g
    }

    pub fn cz() -> Self {
        let mut g = Self::IDENTITY;
        g.images[0] = PauliImage::new(0b01, 0b10, false);
        g.images[2] = PauliImage::new(0b10, 0b01, false);
        g
    }

    /// Image of a Hermitian Pauli `x, z` (2-bit masks) under this element.
    pub fn conjugate_pauli(&self, x: u8, z: u8, negative: bool) -> PauliImage {
        let mut acc = PhasedPauli::hermitian(x, z, negative);
        // acc = i^{x.z} (-1)^s, then multiply the images in X0 Z0 X1 Z1 order
        // matching i^{...} X0^x0 Z0^z0 X1^x1 Z1^z1.
        acc.x = 0;
        acc.z = 0;
        for q in 0..2 {
            if (x >> q) & 1 == 1 {
                acc = acc.mul(self.images[2 * q].phased());
            }
            if (z >> q) & 1 == 1 {
                acc = acc.mul(self.images[2 * q + 1].phased());
            }
        }
        PauliImage { x: acc.x, z: acc.z, negative: acc.negative() }
    }

    /// `other` first, then `self`.
    pub fn after(&self, other: &Self) -> Self {
        let mut images = other.images;
        for img in images.iter_mut() {
            *img = self.conjugate_pauli(img.x, img.z, img.negative);
        }
        Self { images }
    }

    /// Symplectic form is preserved: images of X_q, Z_q anticommute and all
    /// cross pairs commute.
    pub fn preserves_commutation(&self) -> bool {
        let anti = |a: PauliImage, b: PauliImage| {
            ((a.x & b.z).count_ones() + (a.z & b.x).count_ones()) % 2 == 1
        };
        let im = &self.images;
        anti(im[0], im[1])
            && anti(im[2], im[3])
            && !anti(im[0], im[2])
            && !anti(im[0], im[3])
            && !anti(im[1], im[2])
            && !anti(im[1], im[3])
    }

    pub fn key(&self) -> u32 {
        self.images.iter().enumerate().fold(0, |acc, (k, im)| acc | im.pack() << (5 * k))
    }

    /// Action on all 16 local Paulis in the tableau's bit layout.
    pub fn local_table(&self) -> LocalCliffordTable {
        let mut image = [0u8; 16];
        let mut flip = [false; 16];
        for key in 0..16u8 {
            let x = (key & 1) | ((key >> 2) & 1) << 1;
            let z = ((key >> 1) & 1) | ((key >> 3) & 1) << 1;
            let out = self.conjugate_pauli(x, z, false);
            image[key as usize] =
                (out.x & 1) | (out.z & 1) << 1 | ((out.x >> 1) & 1) << 2 | ((out.z >> 1) & 1) << 3;
            flip[key as usize] = out.negative;
        }
        LocalCliffordTable { image, flip }
    }

    /// Complex conjugate `C*`. X and Z are real, so `C* P C*^dag` is the
    /// conjugate of `C P C^dag`; conjugating a Pauli string flips its sign once
    /// per Y factor.
    pub fn complex_conjugate(&self) -> Self {
        let mut images = self.images;
        for img in images.iter_mut() {
            if (img.x & img.z).count_ones() % 2 == 1 {
                img.negative = !img.negative;
            }
        }
        Self { images }
    }
}

/// Enumerate the group by closure from the identity.
pub fn gen_two_qubit_clifford_group() -> Vec<TwoQubitClifford> {
    let gens = [
        TwoQubitClifford::h(0),
        TwoQubitClifford::h(1),
        TwoQubitClifford::phase(0),
        TwoQubitClifford::phase(1),
        TwoQubitClifford::cnot(0, 1),
        TwoQubitClifford::cnot(1, 0),
    ];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([TwoQubitClifford::IDENTITY]);
    seen.insert(TwoQubitClifford::IDENTITY.key());
    while let Some(c) = queue.pop_front() {
        for g in &gens {
            let next = g.after(&c);
            if seen.insert(next.key()) {
                queue.push_back(next);
            }
        }
        out.push(c);
    }
    out.sort_by_key(|c| c.key());
    out
}

/// The group, enumerated once and sorted by canonical key. Indices into this
/// slice are the element ids stored in circuit programs.
pub fn clifford_group() -> &'static [TwoQubitClifford] {
    static GROUP: OnceLock<Vec<TwoQubitClifford>> = OnceLock::new();
    GROUP.get_or_init(gen_two_qubit_clifford_group)
}

/// Local tables for every group element, indexed like [`clifford_group`].
pub fn clifford_tables() -> &'static [LocalCliffordTable] {
    static TABLES: OnceLock<Vec<LocalCliffordTable>> = OnceLock::new();
    TABLES.get_or_init(|| clifford_group().iter().map(|c| c.local_table()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{Basis, StabilizerTableau};

    #[test]
    fn group_order() {
        let g = clifford_group();
        assert_eq!(g.len(), 11520);
        let keys: HashSet<u32> = g.iter().map(|c| c.key()).collect();
        assert_eq!(keys.len(), 11520);
    }

    #[test]
    fn identity_present_and_all_symplectic() {
        let g = clifford_group();
        assert!(g.contains(&TwoQubitClifford::IDENTITY));
        assert!(g.iter().all(|c| c.preserves_commutation()));
        assert!(g.contains(&TwoQubitClifford::cz()));
    }

    #[test]
    fn closed_under_composition_sample() {
        let g = clifford_group();
        let keys: HashSet<u32> = g.iter().map(|c| c.key()).collect();
        for i in (0..g.len()).step_by(997) {
            for j in (0..g.len()).step_by(1301) {
                assert!(keys.contains(&g[i].after(&g[j]).key()));
            }
        }
    }

    #[test]
    fn generator_images() {
        assert_eq!(TwoQubitClifford::phase(0).conjugate_pauli(0b01, 0b01, false).label(), "-XI");
        assert_eq!(TwoQubitClifford::h(1).conjugate_pauli(0b10, 0b10, false).label(), "-IY");
        assert_eq!(TwoQubitClifford::cnot(0, 1).conjugate_pauli(0b01, 0, false).label(), "+XX");
        assert_eq!(TwoQubitClifford::cnot(0, 1).conjugate_pauli(0, 0b10, false).label(), "+ZZ");
        assert_eq!(TwoQubitClifford::cz().conjugate_pauli(0b11, 0, false).label(), "+YY");
    }

    // The table route must agree with the native tableau gates.
    #[test]
    fn local_tables_match_native_gates() {
        let start = StabilizerTableau::from_pauli_strings(&["+XY", "-ZX"]).unwrap();
        let cases: Vec<(TwoQubitClifford, Box<dyn Fn(&mut StabilizerTableau)>)> = vec![
            (TwoQubitClifford::h(0), Box::new(|t| t.apply_h(0).unwrap())),
            (TwoQubitClifford::h(1), Box::new(|t| t.apply_h(1).unwrap())),
            (TwoQubitClifford::phase(1), Box::new(|t| t.apply_phase(1).unwrap())),
            (TwoQubitClifford::cnot(0, 1), Box::new(|t| t.apply_cnot(0, 1).unwrap())),
            (TwoQubitClifford::cnot(1, 0), Box::new(|t| t.apply_cnot(1, 0).unwrap())),
            (TwoQubitClifford::cz(), Box::new(|t| t.apply_cz(0, 1).unwrap())),
        ];
        for (c, native) in cases {
            let mut a = start.clone();
            let mut b = start.clone();
            a.apply_local_table(&c.local_table(), 0, 1).unwrap();
            native(&mut b);
            assert_eq!(a, b, "{c:?}");
        }
        let mut s = StabilizerTableau::new_polarized(3, Basis::Z).unwrap();
        for (i, t) in clifford_tables().iter().enumerate().step_by(613) {
            s.apply_local_table(t, i % 3, (i + 1) % 3).unwrap();
            assert!(s.is_valid());
        }
    }

    #[test]
    fn conjugation_is_an_involution_and_fixes_real_gates() {
        let g = clifford_group();
        let keys: HashSet<u32> = g.iter().map(|c| c.key()).collect();
        for c in g.iter().step_by(37) {
            let cc = c.complex_conjugate();
            assert!(keys.contains(&cc.key()));
            assert_eq!(cc.complex_conjugate(), *c);
        }
        for real in [TwoQubitClifford::h(0), TwoQubitClifford::cnot(1, 0), TwoQubitClifford::cz()] {
            assert_eq!(real.complex_conjugate(), real);
        }
        // P* = P^dag: X -> -Y.
        let pc = TwoQubitClifford::phase(0).complex_conjugate();
        assert_eq!(pc.conjugate_pauli(0b01, 0, false).label(), "-YI");
    }
}
