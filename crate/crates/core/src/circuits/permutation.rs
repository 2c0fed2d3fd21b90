use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `0..n`; `map[i]` is the image of site `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &j in &map {
            if j >= n {
                return Err(Error::NotBijective(format!("image {j} out of range for {n} sites")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotBijective(format!("image {j} repeated")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Perfect (Faro) shuffle on `n = 2^m` sites: the index bits rotate right
    /// by one, so the least significant bit becomes the most significant.
    pub fn faro_shuffle(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let m = n.trailing_zeros();
        let map = (0..n)
            .map(|i| if m == 0 { i } else { (i >> 1) | ((i & 1) << (m - 1)) })
            .collect();
        Ok(Self { map })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { map: inv }
    }

    /// `self` followed by `next`: `i -> next(self(i))`.
    pub fn then(&self, next: &Permutation) -> Result<Self> {
        if next.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), actual: next.len() });
        }
        Ok(Self { map: self.map.iter().map(|&j| next.map[j]).collect() })
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Uniformly random permutation.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(map: Vec<usize>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

pub fn faro_shuffle(n: usize) -> Result<Permutation> {
    Permutation::faro_shuffle(n)
}

pub fn inverse(p: &Permutation) -> Permutation {
    p.inverse()
}
