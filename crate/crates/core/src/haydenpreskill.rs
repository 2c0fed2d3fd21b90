//! Channel states of scrambling circuits and the mutual-information
//! diagnostics of the Hayden-Preskill protocol.
//!
//! Qubit layout of the `2N`-qubit channel state: references `0..N`, circuit
//! outputs `N..2N`. Reference `i` starts in an EPR pair with input site `i`.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{execute_on, CircuitProgram};
use crate::error::{Error, Result};
use crate::experiments::sample_subset;
use crate::rng::SeedStream;
use crate::stats::Mean;
use crate::tableau::{Basis, EntropyView, StabilizerTableau};

/// Where Alice's qubits enter the circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Inputs `0..|A|`.
    #[default]
    Contiguous,
    /// A uniform `|A|`-subset of inputs, redrawn per sample.
    Random,
}

/// Pure state `(1 x U)|EPR>^N` of a circuit `U`.
#[derive(Clone, Debug)]
pub struct ChannelState {
    n: usize,
    tableau: StabilizerTableau,
    view: EntropyView,
}

/// Build the channel state of `program`.
pub fn channel_state(program: &CircuitProgram) -> Result<ChannelState> {
    let n = program.n_qubits();
    let mut t = StabilizerTableau::new_polarized(2 * n, Basis::Z)?;
    for i in 0..n {
        t.apply_h(i)?;
        t.apply_cnot(i, n + i)?;
    }
    let sites: Vec<usize> = (n..2 * n).collect();
    execute_on(program, &mut t, &sites)?;
    let view = t.entropy_view();
    Ok(ChannelState { n, tableau: t, view })
}

/// One `(A, R)` draw with both mutual informations in bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HpSample {
    /// Reference indices in `0..N`.
    pub a: Vec<usize>,
    /// Output sites in `0..N`.
    pub r: Vec<usize>,
    pub i2_a_rb: usize,
    pub i2_a_rbar: usize,
}

impl ChannelState {
    pub fn n_inputs(&self) -> usize {
        self.n
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tableau
    }

    fn check(&self, a: &[usize], r: &[usize]) -> Result<()> {
        for (set, name) in [(a, "A"), (r, "R")] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("{name} must be sorted and duplicate-free")));
            }
            if let Some(&q) = set.last() {
                if q >= self.n {
                    return Err(Error::IndexOutOfRange { index: q, size: self.n });
                }
            }
        }
        Ok(())
    }

    fn s(&self, refs: &[usize], outputs: impl Iterator<Item = usize>) -> usize {
        let set: Vec<usize> = refs.iter().copied().chain(outputs.map(|q| q + self.n)).collect();
        self.view.entropy_bits(&set)
    }

    fn complement(&self, set: &[usize]) -> Vec<usize> {
        (0..self.n).filter(|q| set.binary_search(q).is_err()).collect()
    }

    /// `I(A:RB) = S_A + S_{A Rbar} - S_{Rbar}`, with `B` the references not
    /// in `A`. Both sets sorted, indices in `0..N`.
    pub fn i2_a_rb(&self, a: &[usize], r: &[usize]) -> Result<usize> {
        self.check(a, r)?;
        let rbar = self.complement(r);
        Ok(self.s(a, std::iter::empty()) + self.s(a, rbar.iter().copied())
            - self.s(&[], rbar.iter().copied()))
    }

    /// `I(A:RB) = S_A + S_{RB} - S_{ARB}` evaluated on the sets themselves.
    pub fn i2_a_rb_direct(&self, a: &[usize], r: &[usize]) -> Result<usize> {
        self.check(a, r)?;
        let b = self.complement(a);
        Ok(self.s(a, std::iter::empty()) + self.s(&b, r.iter().copied())
            - self.s(&(0..self.n).collect::<Vec<_>>(), r.iter().copied()))
    }

    /// `I(A:Rbar) = S_A + S_{Rbar} - S_{A Rbar}`.
    pub fn i2_a_rbar(&self, a: &[usize], r: &[usize]) -> Result<usize> {
        self.check(a, r)?;
        let rbar = self.complement(r);
        Ok(self.s(a, std::iter::empty()) + self.s(&[], rbar.iter().copied())
            - self.s(a, rbar.iter().copied()))
    }

    fn draw(&self, size_a: usize, size_r: usize, placement: Placement, seeds: &SeedStream, k: u64) -> HpSample {
        let mut rng = seeds.rng(k);
        let a = match placement {
            Placement::Contiguous => (0..size_a).collect(),
            Placement::Random => sample_subset(self.n, size_a, &mut rng),
        };
        let mut r = index::sample(&mut rng, self.n, size_r).into_vec();
        r.sort_unstable();
        let i2_a_rb = self.i2_a_rb(&a, &r).expect("sampled sets are valid");
        let i2_a_rbar = self.i2_a_rbar(&a, &r).expect("sampled sets are valid");
        HpSample { a, r, i2_a_rb, i2_a_rbar }
    }

    fn check_sizes(&self, size_a: usize, size_r: usize) -> Result<()> {
        if size_a > self.n || size_r > self.n {
            return Err(Error::InvalidArgument(format!(
                "|A|={size_a} and |R|={size_r} must not exceed N={}",
                self.n
            )));
        }
        Ok(())
    }

    /// `samples` independent draws of `A` (per `placement`) and `R`.
    pub fn sample(
        &self,
        size_a: usize,
        size_r: usize,
        samples: usize,
        placement: Placement,
        seeds: &SeedStream,
    ) -> Result<Vec<HpSample>> {
        self.check_sizes(size_a, size_r)?;
        let stream = seeds.child(&format!("a{size_a}-r{size_r}"));
        Ok((0..samples as u64)
            .into_par_iter()
            .map(|k| self.draw(size_a, size_r, placement, &stream, k))
            .collect())
    }
}

/// Mean `I(A:RB)` in bits over `samples` draws.
pub fn mutual_info_a_rb(
    cs: &ChannelState,
    size_a: usize,
    size_r: usize,
    samples: usize,
    placement: Placement,
    seeds: &SeedStream,
) -> Result<Mean> {
    Ok(cs
        .sample(size_a, size_r, samples, placement, seeds)?
        .iter()
        .map(|s| s.i2_a_rb as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    /// Smallest `|R|` whose mean `I(A:RB)` reaches the threshold.
    pub min_r: usize,
    /// False when the threshold is first met only at `|R| = N`.
    pub saturated_below_n: bool,
    /// Mean `I(A:RB)` for `|R| = 0..=min_r`.
    pub curve: Vec<Mean>,
}

/// Scan `|R| = 0, 1, ...` until the mean `I(A:RB)` reaches
/// `threshold * 2|A|` bits.
pub fn min_r_for_saturation(
    cs: &ChannelState,
    size_a: usize,
    threshold: f64,
    samples: usize,
    placement: Placement,
    seeds: &SeedStream,
) -> Result<Saturation> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let target = threshold * 2.0 * size_a as f64;
    let mut curve = Vec::new();
    for size_r in 0..=cs.n_inputs() {
        let m = mutual_info_a_rb(cs, size_a, size_r, samples, placement, seeds)?;
        let hit = m.mean() >= target;
        curve.push(m);
        if hit {
            return Ok(Saturation { min_r: size_r, saturated_below_n: size_r < cs.n_inputs(), curve });
        }
    }
    unreachable!("I(A:RB) = 2|A| once R holds every output")
}
