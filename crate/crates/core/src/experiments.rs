//! Entropy statistics over sampled bipartitions, random-matrix predictions
//! and the area-law baseline.

use std::f64::consts::LN_2;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::stats::{Histogram, Mean, SizeFractions};
use crate::tableau::{EntropyView, StabilizerTableau};

/// Enumeration guard for exhaustive bipartition scans.
pub const MAX_EXHAUSTIVE_SUBSETS: u64 = 1 << 22;

/// Factors beyond this index differ from one by less than `2^-64`.
const PRODUCT_CUTOFF: usize = 64;

/// Largest subsystem handled by the partition sum.
pub const MAX_AREA_LAW_SIZE: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitionSample {
    pub subset: Vec<usize>,
    pub entropy_bits: usize,
    /// `min(|A|, |Abar|) - S_A`.
    pub deficit_bits: usize,
}

/// Uniform `size`-subset of `0..n`, sorted.
pub fn sample_subset<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Vec<usize> {
    let mut a = index::sample(rng, n, size).into_vec();
    a.sort_unstable();
    a
}

fn size_stream(seeds: &SeedStream, size: usize) -> SeedStream {
    seeds.child(&format!("size-{size}"))
}

fn check_sizes(n: usize, sizes: &[usize]) -> Result<()> {
    match sizes.iter().find(|&&s| s > n) {
        Some(&s) => Err(Error::InvalidArgument(format!("subsystem size {s} exceeds {n} qubits"))),
        None => Ok(()),
    }
}

/// `count` independent uniform subsets for every entry of `sizes`.
///
/// Sample `k` of size `s` is drawn from its own stream, so the draws for one
/// size do not depend on which other sizes are requested.
pub fn sample_bipartitions(
    n: usize,
    sizes: &[usize],
    count: usize,
    seeds: &SeedStream,
) -> Result<Vec<Vec<Vec<usize>>>> {
    check_sizes(n, sizes)?;
    Ok(sizes
        .iter()
        .map(|&size| {
            let stream = size_stream(seeds, size);
            (0..count as u64).map(|k| sample_subset(n, size, &mut stream.rng(k))).collect()
        })
        .collect())
}

fn measure(view: &EntropyView, subset: Vec<usize>) -> BipartitionSample {
    let n = view.n_qubits();
    let entropy_bits = view.entropy_bits(&subset);
    let deficit_bits = subset.len().min(n - subset.len()) - entropy_bits;
    BipartitionSample { subset, entropy_bits, deficit_bits }
}

/// Entropies of `count` random subsets of each size.
pub fn sample_entropies(
    t: &StabilizerTableau,
    sizes: &[usize],
    count: usize,
    seeds: &SeedStream,
) -> Result<Vec<Vec<BipartitionSample>>> {
    let n = t.n_qubits();
    check_sizes(n, sizes)?;
    let view = t.entropy_view();
    Ok(sizes
        .iter()
        .map(|&size| {
            let stream = size_stream(seeds, size);
            (0..count as u64)
                .into_par_iter()
                .map(|k| measure(&view, sample_subset(n, size, &mut stream.rng(k))))
                .collect()
        })
        .collect())
}

/// Statistics for one subsystem size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageRow {
    pub size: usize,
    pub entropy: Mean,
    pub deficit: Mean,
    pub histogram: Histogram,
}

impl PageRow {
    fn new(size: usize) -> Self {
        Self { size, entropy: Mean::new(), deficit: Mean::new(), histogram: Histogram::new() }
    }

    fn push(&mut self, s: &BipartitionSample) {
        self.entropy.push(s.entropy_bits as f64);
        self.deficit.push(s.deficit_bits as f64);
        self.histogram.add(s.deficit_bits);
    }

    pub fn samples(&self) -> u64 {
        self.histogram.total()
    }

    /// Fraction of subsets with deficit `eps`.
    pub fn fraction(&self, eps: usize) -> f64 {
        self.histogram.fraction(eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageStats {
    pub n_qubits: usize,
    pub rows: Vec<PageRow>,
}

impl PageStats {
    pub fn row(&self, size: usize) -> Option<&PageRow> {
        self.rows.iter().find(|r| r.size == size)
    }

    pub fn fractions(&self) -> Vec<SizeFractions> {
        self.rows
            .iter()
            .map(|r| SizeFractions { size: r.size, histogram: r.histogram.clone() })
            .collect()
    }
}

fn collect_stats(n: usize, sizes: &[usize], samples: Vec<Vec<BipartitionSample>>) -> PageStats {
    let rows = sizes
        .iter()
        .zip(samples)
        .map(|(&size, batch)| {
            let mut row = PageRow::new(size);
            batch.iter().for_each(|s| row.push(s));
            row
        })
        .collect();
    PageStats { n_qubits: n, rows }
}

/// Mean entropy, mean deficit and deficit histogram per subsystem size over
/// `count` random subsets each.
pub fn page_curve(
    t: &StabilizerTableau,
    sizes: &[usize],
    count: usize,
    seeds: &SeedStream,
) -> Result<PageStats> {
    let samples = sample_entropies(t, sizes, count, seeds)?;
    Ok(collect_stats(t.n_qubits(), sizes, samples))
}

/// Deficit histograms `f_{eps,|A|}` over `count` random subsets per size.
pub fn deficit_fractions(
    t: &StabilizerTableau,
    sizes: &[usize],
    count: usize,
    seeds: &SeedStream,
) -> Result<Vec<SizeFractions>> {
    Ok(page_curve(t, sizes, count, seeds)?.fractions())
}

/// Like [`page_curve`] but over every subset of each size.
pub fn page_curve_exhaustive(t: &StabilizerTableau, sizes: &[usize]) -> Result<PageStats> {
    let n = t.n_qubits();
    check_sizes(n, sizes)?;
    let total: u64 = sizes.iter().map(|&s| binomial_u64(n, s)).fold(0, u64::saturating_add);
    if total > MAX_EXHAUSTIVE_SUBSETS {
        return Err(Error::ResourceCap(format!("{total} subsets exceed {MAX_EXHAUSTIVE_SUBSETS}")));
    }
    let view = t.entropy_view();
    let samples = sizes
        .iter()
        .map(|&size| Combinations::new(n, size).map(|a| measure(&view, a)).collect())
        .collect();
    Ok(collect_stats(n, sizes, samples))
}

/// `binom(n, k)`, saturating at `u64::MAX`.
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still advance
        if let Some(i) = (0..k).rev().find(|&i| next[i] < self.n - k + i) {
            next[i] += 1;
            for j in i + 1..k {
                next[j] = next[j - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

fn check_rmt_regime(n: usize, a: usize) -> Result<()> {
    if 2 * a >= n {
        return Err(Error::Regime(format!("random-matrix formula needs 2|A| < N, got |A|={a}, N={n}")));
    }
    Ok(())
}

/// Large-`N` approximation to the probability that a random subsystem of size
/// `a` of a random `n`-qubit stabilizer state has deficit `eps` bits:
///
/// `2^{-eps(n-2a+eps)} prod_{i>eps} (1-2^-i) / prod_{i=1}^{n-2a+eps} (1-2^-i)`.
pub fn rmt_rank_prob(n: usize, a: usize, eps: usize) -> Result<f64> {
    check_rmt_regime(n, a)?;
    let s = n - 2 * a + eps;
    let mut log2p = -((eps * s) as f64);
    for i in eps + 1..=PRODUCT_CUTOFF.max(eps + 1) {
        log2p += (1.0 - (-(i as f64)).exp2()).log2();
    }
    for i in 1..=s.min(PRODUCT_CUTOFF) {
        log2p -= (1.0 - (-(i as f64)).exp2()).log2();
    }
    Ok(log2p.exp2())
}

/// Mean deficit in nats: the closed form `2^{2a-n} ln 2` and the full sum
/// `sum_eps eps P(eps) ln 2` over the distribution above.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmtDeficit {
    pub closed_form_nats: f64,
    pub eps_sum_nats: f64,
}

pub fn rmt_mean_deficit(n: usize, a: usize) -> Result<RmtDeficit> {
    check_rmt_regime(n, a)?;
    let closed_form_nats = (2.0 * a as f64 - n as f64).exp2() * LN_2;
    let mut sum = 0.0;
    for eps in 1..=2 * a {
        sum += eps as f64 * rmt_rank_prob(n, a, eps)?;
    }
    Ok(RmtDeficit { closed_form_nats, eps_sum_nats: sum * LN_2 })
}

/// Exact rank distribution of a uniform `rows x cols` binary matrix; entry
/// `r` is `P(rank = r)`. Rows are added one at a time: a new row raises the
/// rank from `r` unless it lands in the current span, which has probability
/// `2^{r - cols}`.
pub fn random_matrix_rank_distribution(rows: usize, cols: usize) -> Vec<f64> {
    let mut p = vec![0.0; cols + 1];
    p[0] = 1.0;
    for _ in 0..rows {
        let mut next = vec![0.0; cols + 1];
        for r in 0..=cols {
            if p[r] == 0.0 {
                continue;
            }
            let stay = (r as f64 - cols as f64).exp2();
            next[r] += p[r] * stay;
            if r < cols {
                next[r + 1] += p[r] * (1.0 - stay);
            }
        }
        p = next;
    }
    p
}

/// How partitions of `|A|` into runs are weighted in the area-law average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionWeighting {
    /// Each partition counts the subsets realizing it: `C(Q)` gap placements
    /// times the distinct orderings of its parts. The result is the exact
    /// subset average under the additivity assumption.
    Arrangements,
    /// `sum_l C(Q_l) sum_k S(q_lk) / sum_l Q_l C(Q_l)`, with
    /// `C(Q) = binom(N-|A|+1, Q)`.
    AsPrinted,
}

/// Integer partitions of `a` as non-increasing part lists.
pub fn integer_partitions(a: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=left.min(max)).rev() {
            cur.push(part);
            rec(left - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(a, a, &mut Vec::new(), &mut out);
    out
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Mean entropy of a random `a`-subset of an `n`-site open chain, assuming the
/// entropy of a subset is the sum of `s_of_r` over its maximal runs of
/// consecutive sites. `s_of_r[r - 1]` is the entropy of a run of length `r`.
pub fn area_law_mean_entropy(
    s_of_r: &[f64],
    a: usize,
    n: usize,
    weighting: PartitionWeighting,
) -> Result<f64> {
    if a > MAX_AREA_LAW_SIZE {
        return Err(Error::ResourceCap(format!("|A|={a} exceeds partition cap {MAX_AREA_LAW_SIZE}")));
    }
    if a > n {
        return Err(Error::InvalidArgument(format!("|A|={a} exceeds N={n}")));
    }
    if s_of_r.len() < a {
        return Err(Error::InvalidArgument(format!("S(r) given up to r={}, need {a}", s_of_r.len())));
    }
    if a == 0 {
        return Ok(0.0);
    }
    let slots = n - a + 1;
    let mut terms = Vec::new();
    for parts in integer_partitions(a) {
        let q = parts.len();
        if q > slots {
            continue;
        }
        let total_s: f64 = parts.iter().map(|&r| s_of_r[r - 1]).sum();
        let ln_c = ln_binomial(slots, q);
        let (ln_num_w, ln_den_w) = match weighting {
            PartitionWeighting::Arrangements => {
                let mut ln_orderings = ln_factorial(q);
                let mut i = 0;
                while i < q {
                    let j = (i..q).find(|&j| parts[j] != parts[i]).unwrap_or(q);
                    ln_orderings -= ln_factorial(j - i);
                    i = j;
                }
                (ln_c + ln_orderings, ln_c + ln_orderings)
            }
            PartitionWeighting::AsPrinted => (ln_c, ln_c + (q as f64).ln()),
        };
        terms.push((ln_num_w, ln_den_w, total_s));
    }
    let shift = terms.iter().map(|t| t.0.max(t.1)).fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = terms.iter().fold((0.0, 0.0), |(num, den), &(ln_n, ln_d, s)| {
        (num + (ln_n - shift).exp() * s, den + (ln_d - shift).exp())
    });
    Ok(num / den)
}

/// `S_i(r)` in bits for the windows `i..i+r`, `r = 1..=n-i`.
pub fn consecutive_entropy_profile(t: &StabilizerTableau, i: usize) -> Result<Vec<usize>> {
    let n = t.n_qubits();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, size: n });
    }
    let view = t.entropy_view();
    Ok((i + 1..=n).map(|end| view.entropy_bits(&(i..end).collect::<Vec<_>>())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_scrambling_circuit, execute};
    use crate::gf2::random_bitmatrix;
    use crate::tableau::Basis;

    fn bell_chain(n: usize) -> StabilizerTableau {
        let mut t = StabilizerTableau::new_polarized(n, Basis::Z).unwrap();
        for k in (0..n).step_by(2) {
            t.apply_h(k).unwrap();
            t.apply_cnot(k, k + 1).unwrap();
        }
        t
    }

    #[test]
    fn bipartition_sampling() {
        let seeds = SeedStream::new(11, "bip");
        let draws = sample_bipartitions(6, &[6, 0, 1], 2000, &seeds).unwrap();
        assert!(draws[0].iter().all(|a| a == &vec![0, 1, 2, 3, 4, 5]));
        assert!(draws[1].iter().all(|a| a.is_empty()));
        let mut counts = [0u32; 6];
        draws[2].iter().for_each(|a| counts[a[0]] += 1);
        // Binomial(2000, 1/6) per site.
        let sigma = (2000.0f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for c in counts {
            assert!((c as f64 - 2000.0 / 6.0).abs() < 3.0 * sigma + 1.0, "{counts:?}");
        }
        assert!(sample_bipartitions(4, &[5], 1, &seeds).is_err());
        assert_eq!(sample_bipartitions(6, &[3], 5, &seeds).unwrap(), sample_bipartitions(6, &[2, 3], 5, &seeds).unwrap()[1..]);
    }

    #[test]
    fn page_curve_of_simple_states() {
        let seeds = SeedStream::new(5, "pc");
        let prod = StabilizerTableau::new_polarized(10, Basis::Y).unwrap();
        let stats = page_curve(&prod, &[1, 3, 5], 300, &seeds).unwrap();
        for row in &stats.rows {
            assert_eq!(row.entropy.mean(), 0.0);
            assert_eq!(row.fraction(row.size), 1.0);
        }
        let bell = page_curve(&bell_chain(10), &[1], 100, &seeds).unwrap();
        assert_eq!(bell.rows[0].entropy.mean(), 1.0);
        assert_eq!(bell.rows[0].deficit.mean(), 0.0);
    }

    #[test]
    fn complement_entropies_agree() {
        let mut t = StabilizerTableau::new_polarized(16, Basis::Z).unwrap();
        execute(&build_scrambling_circuit(4).unwrap(), &mut t, Some(3)).unwrap();
        let seeds = SeedStream::new(2, "comp");
        for batch in sample_entropies(&t, &[3, 7, 8], 200, &seeds).unwrap() {
            for s in batch {
                let abar: Vec<usize> = (0..16).filter(|q| !s.subset.contains(q)).collect();
                assert_eq!(t.renyi2_entropy_bits(&abar).unwrap(), s.entropy_bits);
            }
        }
    }

    #[test]
    fn exhaustive_scan_counts() {
        let t = bell_chain(8);
        let stats = page_curve_exhaustive(&t, &[0, 2, 8]).unwrap();
        assert_eq!(stats.rows[1].samples(), 28);
        // 4 of the 28 pairs are Bell pairs, the rest carry 2 bits.
        assert!((stats.rows[1].entropy.mean() - (4.0 * 0.0 + 24.0 * 2.0) / 28.0).abs() < 1e-12);
        assert_eq!(stats.rows[0].samples(), 1);
        assert_eq!(stats.rows[2].samples(), 1);
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(3, 4).count(), 0);
        assert_eq!(binomial_u64(64, 32), 1832624140942590534);
    }

    #[test]
    fn rmt_normalization_and_regime() {
        let total: f64 = (0..=64).map(|e| rmt_rank_prob(128, 32, e).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        for (n, a) in [(16, 3), (32, 15), (12, 1)] {
            let total: f64 = (0..=2 * a).map(|e| rmt_rank_prob(n, a, e).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-9, "n={n} a={a} {total}");
        }
        assert!(rmt_rank_prob(16, 8, 0).is_err());
        assert!(rmt_mean_deficit(10, 5).is_err());
    }

    #[test]
    fn rmt_leading_order() {
        // P(eps=1) = 2^{-(N-2|A|+1)} times prod_{i>=2} / prod_{i<=N-2|A|+1}; the
        // unmatched i=1 factor (1 - 1/2)^{-1} leaves an overall factor 2.
        let p = rmt_rank_prob(128, 32, 1).unwrap();
        let lead = (-65.0f64).exp2();
        assert!((p / lead - 2.0).abs() < 1e-12, "{}", p / lead);
        let d = rmt_mean_deficit(128, 32).unwrap();
        assert!((d.closed_form_nats - (-64.0f64).exp2() * LN_2).abs() < 1e-30);
    }

    #[test]
    fn closed_form_tracks_eps_sum() {
        for n in [16usize, 32, 64] {
            for a in 1..n / 2 {
                if n - 2 * a < 4 {
                    continue;
                }
                let d = rmt_mean_deficit(n, a).unwrap();
                let rel = (d.eps_sum_nats - d.closed_form_nats).abs() / d.closed_form_nats;
                assert!(rel < 0.10, "n={n} a={a} rel={rel}");
            }
        }
    }

    #[test]
    fn formula_approaches_exact_matrix_distribution() {
        // M_A is N x 2|A|; deficit eps means rank 2|A| - eps.
        for n in 6..=12usize {
            let a = 1;
            let exact = random_matrix_rank_distribution(n, 2 * a);
            let gap: f64 = (0..=2 * a)
                .map(|eps| (exact[2 * a - eps] - rmt_rank_prob(n, a, eps).unwrap()).abs())
                .fold(0.0, f64::max);
            // Both have eps=1 probability ~2^{-(n-1)}; their difference is
            // of the next order.
            assert!(gap < (-(n as f64 - 1.0)).exp2(), "n={n} gap={gap}");
        }
    }

    #[test]
    fn exact_distribution_matches_sampled_matrices() {
        let seeds = SeedStream::new(9, "rmt-mc");
        let (rows, cols, trials) = (6, 4, 40_000u64);
        let exact = random_matrix_rank_distribution(rows, cols);
        let mut h = Histogram::new();
        for k in 0..trials {
            h.add(random_bitmatrix(rows, cols, &mut seeds.rng(k)).rank());
        }
        for (r, &p) in exact.iter().enumerate() {
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((h.fraction(r) - p).abs() <= 3.0 * sigma + 1e-12, "rank {r}");
        }
        assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(random_matrix_rank_distribution(0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn partitions_enumerate() {
        assert_eq!(integer_partitions(4), vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]);
        let counts: Vec<usize> = (0..=10).map(|a| integer_partitions(a).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn area_law_small_cases() {
        let s = [1.0, 1.5, 1.75];
        let n = 10;
        for w in [PartitionWeighting::Arrangements, PartitionWeighting::AsPrinted] {
            assert_eq!(area_law_mean_entropy(&s, 1, n, w).unwrap(), 1.0);
            assert_eq!(area_law_mean_entropy(&s, 0, n, w).unwrap(), 0.0);
        }
        let c1 = 9.0;
        let c2 = 36.0;
        let arr = area_law_mean_entropy(&s, 2, n, PartitionWeighting::Arrangements).unwrap();
        assert!((arr - (c1 * 1.5 + c2 * 2.0) / (c1 + c2)).abs() < 1e-12);
        let printed = area_law_mean_entropy(&s, 2, n, PartitionWeighting::AsPrinted).unwrap();
        assert!((printed - (c1 * 1.5 + c2 * 2.0) / (c1 + 2.0 * c2)).abs() < 1e-12);
        assert!(area_law_mean_entropy(&s, 4, n, PartitionWeighting::Arrangements).is_err());
        assert!(area_law_mean_entropy(&[0.0; 41], 41, 64, PartitionWeighting::Arrangements).is_err());
    }

    #[test]
    fn arrangement_weighting_is_exact_subset_average() {
        let n = 11;
        let s: Vec<f64> = (1..=n).map(|r| (r as f64).sqrt() + 0.1 * r as f64).collect();
        for a in 1..=6 {
            let brute: Mean = Combinations::new(n, a)
                .map(|sub| {
                    let mut total = 0.0;
                    let mut run = 1;
                    for w in sub.windows(2) {
                        if w[1] == w[0] + 1 {
                            run += 1;
                        } else {
                            total += s[run - 1];
                            run = 1;
                        }
                    }
                    total + s[run - 1]
                })
                .collect();
            let formula = area_law_mean_entropy(&s, a, n, PartitionWeighting::Arrangements).unwrap();
            assert!((brute.mean() - formula).abs() < 1e-10, "a={a}");
        }
    }

    #[test]
    fn consecutive_profiles() {
        let prod = StabilizerTableau::new_polarized(6, Basis::X).unwrap();
        assert_eq!(consecutive_entropy_profile(&prod, 0).unwrap(), vec![0; 6]);
        assert_eq!(consecutive_entropy_profile(&bell_chain(8), 0).unwrap(), vec![1, 0, 1, 0, 1, 0, 1, 0]);
        assert_eq!(consecutive_entropy_profile(&bell_chain(8), 5).unwrap(), vec![1, 2, 1]);
        assert!(consecutive_entropy_profile(&prod, 6).is_err());
    }
}
