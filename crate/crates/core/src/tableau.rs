//! Stabilizer states as `n x (2n + 1)` binary tableaux.
//!
//! Row `i` holds generator `i`: X bits in columns `0..n`, Z bits in columns
//! `n..2n` and the sign in column `2n`. A set sign bit means `+1`, a clear
//! one `-1`. Only stabilizers are tracked (no destabilizers), which is all the
//! rank-based entropy measurements need.
//!
//! Subsystem Renyi-2 entropies come out as integers in bits:
//! `S_A = rank(M_A) - |A|`, with `M_A` the X and Z columns of the qubits in A.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::Permutation;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Single-qubit Pauli axis used for polarized product states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Y,
    Z,
}

/// Signed action of a two-qubit Clifford on the 16 Hermitian two-qubit Paulis.
///
/// Index bits are `x_a | z_a << 1 | x_b << 2 | z_b << 3`; each entry holds the
/// image in the same layout and whether the sign flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalCliffordTable {
    pub image: [u8; 16],
    pub flip: [bool; 16],
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    matrix: BitMatrix,
}

impl StabilizerTableau {
    /// Product state with every qubit stabilized by `+basis`.
    pub fn new_polarized(n: usize, basis: Basis) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
        }
        let mut matrix = BitMatrix::zeros(n, 2 * n + 1);
        for i in 0..n {
            match basis {
                Basis::X => matrix.set(i, i, true),
                Basis::Z => matrix.set(i, n + i, true),
                Basis::Y => {
                    matrix.set(i, i, true);
                    matrix.set(i, n + i, true);
                }
            }
            matrix.set(i, 2 * n, true);
        }
        Ok(Self { n, matrix })
    }

    /// Build from signed Pauli strings such as `"+XZ"` or `"-YI"`.
    ///
    /// The generators must commute pairwise and be independent.
    pub fn from_pauli_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
        }
        let mut matrix = BitMatrix::zeros(n, 2 * n + 1);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            let mut chars = row.chars();
            let positive = match chars.next() {
                Some('+') => true,
                Some('-') => false,
                _ => return Err(Error::InvalidArgument(format!("missing sign in {row:?}"))),
            };
            let body: Vec<char> = chars.collect();
            if body.len() != n {
                return Err(Error::SizeMismatch { expected: n, actual: body.len() });
            }
            for (q, c) in body.into_iter().enumerate() {
                let (x, z) = match c {
                    'I' | '_' | '.' => (false, false),
                    'X' => (true, false),
                    'Y' => (true, true),
                    'Z' => (false, true),
                    other => {
                        return Err(Error::InvalidArgument(format!("bad Pauli letter {other:?}")))
                    }
                };
                matrix.set(i, q, x);
                matrix.set(i, n + q, z);
            }
            matrix.set(i, 2 * n, positive);
        }
        let t = Self { n, matrix };
        if !t.generators_commute() || t.gate_rank() != n {
            return Err(Error::InvalidArgument(
                "generators must commute and be independent".into(),
            ));
        }
        Ok(t)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// The underlying `n x (2n + 1)` matrix.
    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    #[inline]
    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::IndexOutOfRange { index: q, size: self.n })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }

    /// Sign of generator `row`: `true` for `+1`.
    pub fn is_positive(&self, row: usize) -> bool {
        self.matrix.get(row, 2 * self.n)
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.h_unchecked(q);
        Ok(())
    }

    pub(crate) fn h_unchecked(&mut self, q: usize) {
        let (xc, zc, sc) = (q, self.n + q, 2 * self.n);
        for r in 0..self.n {
            let x = self.matrix.get(r, xc);
            let z = self.matrix.get(r, zc);
            if x != z {
                self.matrix.flip(r, xc);
                self.matrix.flip(r, zc);
            } else if x {
                self.matrix.flip(r, sc);
            }
        }
    }

    /// Phase gate `diag(1, i)`: X -> Y, Y -> -X, Z -> Z.
    pub fn apply_phase(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.phase_unchecked(q);
        Ok(())
    }

    pub(crate) fn phase_unchecked(&mut self, q: usize) {
        let (xc, zc, sc) = (q, self.n + q, 2 * self.n);
        for r in 0..self.n {
            if self.matrix.get(r, xc) {
                if self.matrix.get(r, zc) {
                    self.matrix.flip(r, sc);
                }
                self.matrix.flip(r, zc);
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let n = self.n;
        let (xc, zc, xt, zt, sc) = (control, n + control, target, n + target, 2 * n);
        for r in 0..n {
            let (a, b, c, d) = (
                self.matrix.get(r, xc),
                self.matrix.get(r, zc),
                self.matrix.get(r, xt),
                self.matrix.get(r, zt),
            );
            if a && d && (c == b) {
                self.matrix.flip(r, sc);
            }
            if a {
                self.matrix.flip(r, xt);
            }
            if d {
                self.matrix.flip(r, zc);
            }
        }
        Ok(())
    }

    /// Controlled-Z: X_a -> X_a Z_b, X_b -> Z_a X_b, Z unchanged.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.cz_unchecked(a, b);
        Ok(())
    }

    pub(crate) fn cz_unchecked(&mut self, a: usize, b: usize) {
        let n = self.n;
        let (xa, za, xb, zb, sc) = (a, n + a, b, n + b, 2 * n);
        for r in 0..n {
            let x_a = self.matrix.get(r, xa);
            let x_b = self.matrix.get(r, xb);
            if !(x_a || x_b) {
                continue;
            }
            let z_a = self.matrix.get(r, za);
            let z_b = self.matrix.get(r, zb);
            if x_a && x_b && z_a != z_b {
                self.matrix.flip(r, sc);
            }
            if x_b {
                self.matrix.flip(r, za);
            }
            if x_a {
                self.matrix.flip(r, zb);
            }
        }
    }

    /// Apply a two-qubit Clifford given by its local Pauli table, with the
    /// table's first qubit on `a` and second on `b`.
    pub fn apply_local_table(&mut self, table: &LocalCliffordTable, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.local_table_unchecked(table, a, b);
        Ok(())
    }

    pub(crate) fn local_table_unchecked(&mut self, table: &LocalCliffordTable, a: usize, b: usize) {
        let n = self.n;
        let cols = [a, n + a, b, n + b];
        for r in 0..n {
            let mut key = 0usize;
            for (k, &c) in cols.iter().enumerate() {
                key |= (self.matrix.get(r, c) as usize) << k;
            }
            if key == 0 {
                continue;
            }
            let img = table.image[key];
            for (k, &c) in cols.iter().enumerate() {
                self.matrix.set(r, c, (img >> k) & 1 == 1);
            }
            if table.flip[key] {
                self.matrix.flip(r, 2 * n);
            }
        }
    }

    /// Relabel qubits: qubit `i` moves to position `p(i)`.
    pub fn apply_permutation(&mut self, p: &Permutation) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: p.len() });
        }
        let n = self.n;
        let mut out = BitMatrix::zeros(n, 2 * n + 1);
        for r in 0..n {
            for i in 0..n {
                let j = p.apply(i);
                if self.matrix.get(r, i) {
                    out.set(r, j, true);
                }
                if self.matrix.get(r, n + i) {
                    out.set(r, n + j, true);
                }
            }
            out.set(r, 2 * n, self.matrix.get(r, 2 * n));
        }
        self.matrix = out;
        Ok(())
    }

    /// Renyi-2 entropy of subsystem `a` in bits.
    pub fn renyi2_entropy_bits(&self, a: &[usize]) -> Result<usize> {
        let a = normalize_subset(a, self.n)?;
        Ok(self.entropy_view().entropy_bits(&a))
    }

    /// `S_A + S_B - S_{AB}` in bits for disjoint `a`, `b`.
    pub fn mutual_info_bits(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        let a = normalize_subset(a, self.n)?;
        let b = normalize_subset(b, self.n)?;
        if let Some(&q) = a.iter().find(|q| b.binary_search(q).is_ok()) {
            return Err(Error::OverlappingSets(q));
        }
        let view = self.entropy_view();
        let mut ab: Vec<usize> = a.iter().chain(&b).copied().collect();
        ab.sort_unstable();
        Ok(view.entropy_bits(&a) + view.entropy_bits(&b) - view.entropy_bits(&ab))
    }

    /// Column-major copy for repeated entropy queries on a fixed state.
    pub fn entropy_view(&self) -> EntropyView {
        EntropyView::new(self)
    }

    /// GF(2) rank of the `2n` gate columns.
    pub fn gate_rank(&self) -> usize {
        let cols: Vec<usize> = (0..2 * self.n).collect();
        self.matrix.select_columns(&cols).map(|m| m.rank()).unwrap_or(0)
    }

    /// Pairwise symplectic products all vanish.
    pub fn generators_commute(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let mut s = false;
                for q in 0..n {
                    s ^= self.matrix.get(i, q) & self.matrix.get(j, n + q);
                    s ^= self.matrix.get(i, n + q) & self.matrix.get(j, q);
                }
                !s
            })
        })
    }

    /// Both structural invariants: full gate rank and commuting generators.
    pub fn is_valid(&self) -> bool {
        self.gate_rank() == self.n && self.generators_commute()
    }

    /// One line per generator, e.g. `+XZI`.
    pub fn dump(&self) -> String {
        self.to_string()
    }

    pub(crate) fn pauli_letter(&self, row: usize, q: usize) -> char {
        match (self.matrix.get(row, q), self.matrix.get(row, self.n + q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            f.write_str(if self.is_positive(r) { "+" } else { "-" })?;
            for q in 0..self.n {
                write!(f, "{}", self.pauli_letter(r, q))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StabilizerTableau({})\n{}", self.n, self)
    }
}

/// Sorted, deduplicated copy of `a`; every index must be below `n`.
pub(crate) fn normalize_subset(a: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&q) = v.last() {
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, size: n });
        }
    }
    Ok(v)
}

/// Transposed tableau: row `2q` is the X column of qubit `q`, row `2q + 1` its
/// Z column. Selecting a subsystem then means copying whole rows.
#[derive(Clone, Debug)]
pub struct EntropyView {
    n: usize,
    columns: BitMatrix,
}

impl EntropyView {
    fn new(t: &StabilizerTableau) -> Self {
        let n = t.n;
        let tr = t.matrix.transpose();
        let mut columns = BitMatrix::zeros(2 * n, n);
        for q in 0..n {
            columns.row_mut(2 * q).copy_from_slice(tr.row(q));
            columns.row_mut(2 * q + 1).copy_from_slice(tr.row(n + q));
        }
        Self { n, columns }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Entropy in bits of a sorted, duplicate-free, in-range subset. The
    /// smaller side of the bipartition is used, since `S_A = S_Abar`.
    pub fn entropy_bits(&self, a: &[usize]) -> usize {
        debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
        if a.len() * 2 <= self.n {
            self.rank_of(a.iter().copied(), a.len()) - a.len()
        } else {
            let k = self.n - a.len();
            let mut it = a.iter().copied().peekable();
            let complement = (0..self.n).filter(move |q| {
                if it.peek() == Some(q) {
                    it.next();
                    false
                } else {
                    true
                }
            });
            self.rank_of(complement, k) - k
        }
    }

    fn rank_of(&self, qubits: impl Iterator<Item = usize>, k: usize) -> usize {
        let stride = self.columns.stride();
        let mut m = BitMatrix::zeros(2 * k, self.n);
        let mut r = 0;
        for q in qubits {
            m.row_mut(r).copy_from_slice(self.columns.row(2 * q));
            m.row_mut(r + 1).copy_from_slice(self.columns.row(2 * q + 1));
            r += 2;
        }
        debug_assert_eq!(r, 2 * k);
        debug_assert_eq!(m.stride(), stride);
        m.rank_in_place()
    }
}
