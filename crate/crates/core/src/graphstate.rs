//! Graph states: construction, the adjacency-rank entropy formula, and the
//! hypercube family.

use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::rng::SeedStream;
use crate::stats::{Histogram, SizeFractions};
use crate::tableau::{normalize_subset, Basis, StabilizerTableau};

/// Simple undirected graph stored as a symmetric adjacency matrix with zero
/// diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: BitMatrix,
}

impl Graph {
    pub fn edgeless(n: usize) -> Self {
        Self { adjacency: BitMatrix::zeros(n, n) }
    }

    pub fn complete(n: usize) -> Self {
        Self { adjacency: BitMatrix::from_fn(n, n, |i, j| i != j) }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::edgeless(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Accepts any square matrix that is symmetric with an empty diagonal.
    pub fn from_adjacency(adjacency: BitMatrix) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::SizeMismatch { expected: n, actual: adjacency.cols() });
        }
        for i in 0..n {
            if adjacency.get(i, i) {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {i}")));
            }
            for j in 0..i {
                if adjacency.get(i, j) != adjacency.get(j, i) {
                    return Err(Error::InvalidArgument(format!("asymmetric entry ({i},{j})")));
                }
            }
        }
        Ok(Self { adjacency })
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.n_vertices();
        for q in [a, b] {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, size: n });
            }
        }
        if a == b {
            return Err(Error::DuplicateQubit(a));
        }
        self.adjacency.set(a, b, true);
        self.adjacency.set(b, a, true);
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a, b)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency.row(v).iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_vertices();
        (0..n).flat_map(|i| (i + 1..n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j))).collect()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.count_ones() / 2
    }

    /// Header line with the vertex count, then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n_vertices());
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    /// Inverse of [`Graph::to_edge_list`]; blank lines and `#` comments are
    /// skipped.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::InvalidArgument("missing vertex count".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad vertex count {header:?}")))?;
        let mut g = Self::edgeless(n);
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => g.add_edge(a, b)?,
                _ => return Err(Error::InvalidArgument(format!("bad edge line {line:?}"))),
            }
        }
        Ok(g)
    }
}

/// The `m`-dimensional hypercube: `i ~ j` iff `i ^ j` is a power of two.
pub fn hypercube(m: usize) -> Result<Graph> {
    if m == 0 || m > 16 {
        return Err(Error::InvalidArgument(format!("hypercube dimension {m} outside 1..=16")));
    }
    let n = 1usize << m;
    Ok(Graph { adjacency: BitMatrix::from_fn(n, n, |i, j| (i ^ j).is_power_of_two()) })
}

/// Entropy in bits of the graph state on subsystem `a`: the GF(2) rank of the
/// off-diagonal adjacency block between `a` and its complement.
pub fn graph_entropy_bits(g: &Graph, a: &[usize]) -> Result<usize> {
    let n = g.n_vertices();
    let a = normalize_subset(a, n)?;
    Ok(block_rank(g, &a))
}

// `a` sorted and in range.
fn block_rank(g: &Graph, a: &[usize]) -> usize {
    let n = g.n_vertices();
    let mut mark = vec![false; n];
    a.iter().for_each(|&q| mark[q] = true);
    let rest: Vec<usize> = (0..n).filter(|&q| !mark[q]).collect();
    let (rows, cols) = if a.len() <= rest.len() { (a, &rest[..]) } else { (&rest[..], a) };
    let block = g
        .adjacency
        .select_rows(rows)
        .and_then(|m| m.select_columns(cols))
        .expect("indices are in range");
    block.rank()
}

/// Graph state `prod CZ_e |+>^n` built by the tableau engine.
pub fn tableau_from_graph(g: &Graph) -> Result<StabilizerTableau> {
    let mut t = StabilizerTableau::new_polarized(g.n_vertices(), Basis::X)?;
    for (a, b) in g.edges() {
        t.cz_unchecked(a, b);
    }
    Ok(t)
}

/// Sample `samples` bipartitions with `|A|` uniform in `1..=max_size` and `A`
/// uniform of that size; bin the deficit `min(|A|, |Abar|) - S_A` by size.
///
/// Sample `k` draws from `seeds.rng(k)`, so the result does not depend on
/// thread scheduling.
pub fn page_scrambling_fraction(
    g: &Graph,
    max_size: usize,
    samples: usize,
    seeds: &SeedStream,
) -> Result<Vec<SizeFractions>> {
    let n = g.n_vertices();
    if max_size == 0 || max_size > n {
        return Err(Error::InvalidArgument(format!("max_size {max_size} outside 1..={n}")));
    }
    let draws: Vec<(usize, usize)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            use rand::Rng;
            let mut rng = seeds.rng(k);
            let size = rng.gen_range(1..=max_size);
            let mut a = index::sample(&mut rng, n, size).into_vec();
            a.sort_unstable();
            let eps = size.min(n - size) - block_rank(g, &a);
            (size, eps)
        })
        .collect();
    let mut out: Vec<SizeFractions> =
        (1..=max_size).map(|size| SizeFractions { size, histogram: Histogram::new() }).collect();
    for (size, eps) in draws {
        out[size - 1].histogram.add(eps);
    }
    Ok(out)
}
