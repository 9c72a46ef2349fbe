use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

/// A local Hilbert space split into particle-number sectors.
///
/// `dims[n]` is the dimension of the `n`-particle sector. Within a sector the
/// basis is fixed; for [`SectorSpace::qubit_modes`] it is the lexicographic
/// order of occupation strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpace {
    dims: Vec<usize>,
}

impl SectorSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().all(|&d| d == 0) {
            return Err(SsrError::EmptySpace);
        }
        Ok(SectorSpace { dims })
    }

    /// `m` two-level modes: `dims[n] = C(m, n)`.
    pub fn qubit_modes(m: usize) -> Self {
        let mut dims = Vec::with_capacity(m + 1);
        let mut c = 1usize;
        for n in 0..=m {
            dims.push(c);
            c = c * (m - n) / (n + 1);
        }
        SectorSpace { dims }
    }

    /// One basis state per particle number `0..=n_max`.
    pub fn unary(n_max: usize) -> Self {
        SectorSpace { dims: vec![1; n_max + 1] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension of sector `n` (zero outside the stored range).
    pub fn dim(&self, n: usize) -> usize {
        self.dims.get(n).copied().unwrap_or(0)
    }

    pub fn n_max(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of sector `n` in the flattened (sector-ascending) basis.
    pub fn offset(&self, n: usize) -> usize {
        self.dims.iter().take(n).sum()
    }

    /// Sectors with nonzero dimension.
    pub fn sectors(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dims.iter().copied().enumerate().filter(|&(_, d)| d > 0)
    }

    /// Sector structure of the tensor product: dimensions convolve.
    pub fn tensor(&self, other: &SectorSpace) -> SectorSpace {
        let mut dims = vec![0; self.dims.len() + other.dims.len() - 1];
        for (a, &da) in self.dims.iter().enumerate() {
            for (b, &db) in other.dims.iter().enumerate() {
                dims[a + b] += da * db;
            }
        }
        SectorSpace { dims }
    }

    /// Position of `(a, i) ⊗ (b, j)` inside `self.tensor(other)`.
    ///
    /// Sector `a + b` of the product is ordered by ascending `a`, then by
    /// `(i, j)` row-major.
    pub fn tensor_index(&self, other: &SectorSpace, (a, i): (usize, usize), (b, j): (usize, usize)) -> (usize, usize) {
        let n = a + b;
        let mut offset = 0;
        for a2 in 0..a {
            if n >= a2 {
                offset += self.dim(a2) * other.dim(n - a2);
            }
        }
        (n, offset + i * other.dim(b) + j)
    }
}

/// Occupation strings of `m` modes holding `n` particles, in lexicographic
/// order (`'0' < '1'`). Entry `k` labels basis vector `k` of sector `n` of
/// [`SectorSpace::qubit_modes`].
pub fn occupation_strings(m: usize, n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if n > m {
        return out;
    }
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == m {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining = m - cur.len();
        if remaining > left {
            cur.push(0);
            rec(m, left, cur, out);
            cur.pop();
        }
        if left > 0 {
            cur.push(1);
            rec(m, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(m, n, &mut cur, &mut out);
    out
}

/// Sector and in-sector index of an occupation bit pattern over `m` modes.
///
/// Bit `m - 1 - k` of `bits` is the occupation of mode `k`, so the integer
/// value of the string read left to right equals `bits`.
pub fn locate_occupation(m: usize, bits: usize) -> (usize, usize) {
    let n = bits.count_ones() as usize;
    // rank among strings with n ones, lexicographic == numeric order
    let mut rank = 0usize;
    let mut ones_left = n;
    for pos in 0..m {
        let bit = (bits >> (m - 1 - pos)) & 1;
        let rest = m - pos - 1;
        if bit == 1 {
            // every string with '0' here and the same prefix comes first
            rank += binomial(rest, ones_left);
            ones_left -= 1;
        }
    }
    (n, rank)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c = 1usize;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_mode_dims() {
        assert_eq!(SectorSpace::qubit_modes(1).dims(), &[1, 1]);
        assert_eq!(SectorSpace::qubit_modes(2).dims(), &[1, 2, 1]);
        assert_eq!(SectorSpace::qubit_modes(0).dims(), &[1]);
        assert_eq!(SectorSpace::qubit_modes(5).dims(), &[1, 5, 10, 10, 5, 1]);
    }

    #[test]
    fn unary_dims() {
        assert_eq!(SectorSpace::unary(3).dims(), &[1, 1, 1, 1]);
        assert_eq!(SectorSpace::unary(0).dims(), &[1]);
    }

    #[test]
    fn empty_space_rejected() {
        assert_eq!(SectorSpace::new(vec![0, 0]), Err(SsrError::EmptySpace));
        assert!(SectorSpace::new(vec![0, 3]).is_ok());
    }

    #[test]
    fn occupation_order_is_lexicographic() {
        let s = occupation_strings(3, 1);
        assert_eq!(s, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(occupation_strings(2, 1), vec![vec![0, 1], vec![1, 0]]);
        for m in 0..7 {
            for n in 0..=m {
                let strings = occupation_strings(m, n);
                assert_eq!(strings.len(), binomial(m, n));
                for (k, s) in strings.iter().enumerate() {
                    let bits = s.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                    assert_eq!(locate_occupation(m, bits), (n, k));
                }
            }
        }
    }

    #[test]
    fn tensor_convolves_and_indexes_bijectively() {
        let a = SectorSpace::new(vec![1, 2, 1]).unwrap();
        let b = SectorSpace::new(vec![2, 1]).unwrap();
        let t = a.tensor(&b);
        assert_eq!(t.dims(), &[2, 5, 4, 1]);
        let mut seen = std::collections::HashSet::new();
        for (x, dx) in a.sectors() {
            for (y, dy) in b.sectors() {
                for i in 0..dx {
                    for j in 0..dy {
                        let (n, k) = a.tensor_index(&b, (x, i), (y, j));
                        assert!(k < t.dim(n));
                        assert!(seen.insert((n, k)));
                    }
                }
            }
        }
        assert_eq!(seen.len(), t.total_dim());
    }
}
