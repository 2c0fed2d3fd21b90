//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored contiguously as little-endian 64-bit blocks: column `c` of
//! a row lives in block `c / 64`, bit `c % 64`. Padding bits past `cols` are
//! always zero, so whole-block operations never leak garbage into results.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const BLOCK: usize = 64;

#[inline]
fn blocks_for(cols: usize) -> usize {
    cols.div_ceil(BLOCK)
}

/// A binary matrix with row-major packed storage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = blocks_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from explicit 0/1 rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::SizeMismatch { expected: cols, actual: row.len() });
            }
            for (j, &b) in row.iter().enumerate() {
                if b > 1 {
                    return Err(Error::InvalidArgument(format!("entry {b} is not a bit")));
                }
                m.set(i, j, b == 1);
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Uniformly random matrix, every bit independent.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let tail = cols % BLOCK;
        let tail_mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
        for r in 0..rows {
            let row = m.row_mut(r);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = row.last_mut() {
                *last &= tail_mask;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of 64-bit blocks per row.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / BLOCK] >> (c % BLOCK)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / BLOCK];
        let bit = 1u64 << (c % BLOCK);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / BLOCK] ^= 1u64 << (c % BLOCK);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// Raw packed storage, `rows * stride` blocks.
    pub fn as_blocks(&self) -> &[u64] {
        &self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * s);
        head[lo * s..(lo + 1) * s].swap_with_slice(&mut tail[..s]);
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        if src < dst {
            let (head, tail) = self.data.split_at_mut(dst * s);
            for (d, x) in tail[..s].iter_mut().zip(&head[src * s..(src + 1) * s]) {
                *d ^= x;
            }
        } else {
            let (head, tail) = self.data.split_at_mut(src * s);
            for (d, x) in head[dst * s..(dst + 1) * s].iter_mut().zip(&tail[..s]) {
                *d ^= x;
            }
        }
    }

    /// Swap two columns in every row.
    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            let (va, vb) = (self.get(r, a), self.get(r, b));
            if va != vb {
                self.flip(r, a);
                self.flip(r, b);
            }
        }
    }

    /// Columns `cols` (any order given) copied out in ascending index order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<BitMatrix> {
        let mut sorted = cols.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&c| c >= self.cols) {
            return Err(Error::IndexOutOfRange { index: bad, size: self.cols });
        }
        let mut out = BitMatrix::zeros(self.rows, sorted.len());
        for r in 0..self.rows {
            let src = self.row(r);
            let dst = &mut out.data[r * out.stride..(r + 1) * out.stride];
            for (j, &c) in sorted.iter().enumerate() {
                if (src[c / BLOCK] >> (c % BLOCK)) & 1 == 1 {
                    dst[j / BLOCK] |= 1u64 << (j % BLOCK);
                }
            }
        }
        Ok(out)
    }

    /// Rows `rows` copied out in the order given.
    pub fn select_rows(&self, rows: &[usize]) -> Result<BitMatrix> {
        let mut out = BitMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            if r >= self.rows {
                return Err(Error::IndexOutOfRange { index: r, size: self.rows });
            }
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            for (w, &block) in row.iter().enumerate() {
                let mut bits = block;
                while bits != 0 {
                    let c = w * BLOCK + bits.trailing_zeros() as usize;
                    out.data[c * out.stride + r / BLOCK] |= 1u64 << (r % BLOCK);
                    bits &= bits - 1;
                }
            }
        }
        out
    }

    /// Rank over GF(2). The receiver is left untouched.
    pub fn rank(&self) -> usize {
        self.clone().rank_in_place()
    }

    /// Rank over GF(2), reducing `self` to row-echelon form as a side effect.
    ///
    /// Pivots are chosen left to right, taking the topmost row not yet used as
    /// a pivot.
    pub fn rank_in_place(&mut self) -> usize {
        let s = self.stride;
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let w = c / BLOCK;
            let bit = 1u64 << (c % BLOCK);
            let Some(pivot) = (rank..self.rows).find(|&r| self.data[r * s + w] & bit != 0) else {
                continue;
            };
            self.swap_rows(rank, pivot);
            let (head, tail) = self.data.split_at_mut((rank + 1) * s);
            let prow = &head[rank * s + w..(rank + 1) * s];
            for row in tail.chunks_exact_mut(s) {
                if row[w] & bit != 0 {
                    for (d, x) in row[w..].iter_mut().zip(prow) {
                        *d ^= x;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// True if the row is all zeros.
    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(|&w| w == 0)
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Padding bits beyond `cols` are zero in every row.
    pub fn padding_is_clean(&self) -> bool {
        let tail = self.cols % BLOCK;
        if tail == 0 || self.stride == 0 {
            return self.data.len() == self.rows * self.stride;
        }
        let mask = !((1u64 << tail) - 1);
        (0..self.rows).all(|r| self.row(r)[self.stride - 1] & mask == 0)
    }
}

/// Rank over GF(2) of `m`.
pub fn rank_gf2(m: &BitMatrix) -> usize {
    m.rank()
}

/// Copy of `m` restricted to `cols`, in ascending column order.
pub fn select_columns(m: &BitMatrix, cols: &[usize]) -> Result<BitMatrix> {
    m.select_columns(cols)
}

pub fn random_bitmatrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> BitMatrix {
    BitMatrix::random(rows, cols, rng)
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
