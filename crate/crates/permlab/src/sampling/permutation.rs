use super::RngStream;
use crate::{Error, Result};

/// A permutation of `{0, .., n-1}` in one-line notation: `map[k] = sigma(k)`.
///
/// The matrix convention used throughout the crate is `P e_k = e_{sigma(k)}`,
/// i.e. `P[sigma(k), k] = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::NotABijection);
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn cycle_count(&self) -> usize {
        cycle_type(self).parts().len()
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|(k, &v)| *k == v).count()
    }
}

/// Multiset of cycle lengths, stored in decreasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    /// Parts are sorted decreasingly; zero parts are rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(Error::EmptyCycleType);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Sum of parts, the size of the underlying permutation.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Multiplicity of part 1, the fixed-point count.
    pub fn fixed_points(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }
}

/// Orbit decomposition of a permutation.
pub fn cycle_type(p: &Permutation) -> CycleType {
    let n = p.n();
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            len += 1;
            k = p.apply(k);
        }
        parts.push(len);
    }
    CycleType::new(parts).expect("orbit decomposition is never empty")
}

/// Uniform permutation of `{0, .., n-1}` by Fisher-Yates with unbiased
/// index sampling.
pub fn uniform_permutation(n: usize, stream: &mut RngStream) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = stream.uniform_below(i as u64 + 1) as usize;
        map.swap(i, j);
    }
    Ok(Permutation { map })
}

/// The canonical permutation with the given cycle type: consecutive blocks
/// `(0,..,n1-1)(n1,..,n2-1)...`, each block cycled forward, parts taken in
/// decreasing order.
pub fn canonical_permutation(ct: &CycleType) -> Permutation {
    let n = ct.n();
    let mut map = vec![0usize; n];
    let mut offset = 0;
    for &len in ct.parts() {
        for k in 0..len {
            map[offset + k] = offset + (k + 1) % len;
        }
        offset += len;
    }
    Permutation { map }
}
