use std::collections::BTreeMap;

use crate::error::{Result, SsrError};
use crate::fock::SectorSpace;
use crate::scalar::{czero, frob_sq, lit, CMatrix, Complex, Real};
use crate::tol::Tolerances;

/// A pure bipartite state with definite global particle number.
///
/// Block `n` holds the amplitudes with `n` particles on Alice's side and
/// `n_total - n` on Bob's, as a `dim_A(n) x dim_B(n_total - n)` matrix. Absent
/// blocks are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedPureState<T: Real> {
    n_total: usize,
    alice: SectorSpace,
    bob: SectorSpace,
    blocks: BTreeMap<usize, CMatrix<T>>,
}

impl<T: Real> BlockedPureState<T> {
    /// Builds a state from blocks that must already be normalized.
    pub fn new(n_total: usize, alice: SectorSpace, bob: SectorSpace, blocks: BTreeMap<usize, CMatrix<T>>) -> Result<Self> {
        Self::new_with(n_total, alice, bob, blocks, &Tolerances::of::<T>())
    }

    pub fn new_with(
        n_total: usize,
        alice: SectorSpace,
        bob: SectorSpace,
        blocks: BTreeMap<usize, CMatrix<T>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let state = Self::unchecked(n_total, alice, bob, blocks)?;
        let norm = state.norm_sqr().to_f64().unwrap_or(f64::NAN);
        if norm.is_nan() || (norm - 1.0).abs() > tol.norm {
            return Err(SsrError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Builds a state from arbitrary nonzero blocks and rescales it to unit norm.
    pub fn normalized(n_total: usize, alice: SectorSpace, bob: SectorSpace, blocks: BTreeMap<usize, CMatrix<T>>) -> Result<Self> {
        Self::unchecked(n_total, alice, bob, blocks)?.normalize()
    }

    fn unchecked(n_total: usize, alice: SectorSpace, bob: SectorSpace, blocks: BTreeMap<usize, CMatrix<T>>) -> Result<Self> {
        for (&n, m) in &blocks {
            if n > n_total {
                return Err(SsrError::Shape(format!("block {n} exceeds n_total {n_total}")));
            }
            let (da, db) = (alice.dim(n), bob.dim(n_total - n));
            if da == 0 || db == 0 {
                return Err(SsrError::Shape(format!("block {n} is not admissible")));
            }
            if m.shape() != (da, db) {
                return Err(SsrError::Shape(format!(
                    "block {n} has shape {:?}, expected ({da}, {db})",
                    m.shape()
                )));
            }
        }
        Ok(BlockedPureState { n_total, alice, bob, blocks })
    }

    /// Rescales to unit norm, keeping block ratios.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < lit(Tolerances::of::<T>().zero) {
            return Err(SsrError::ZeroState);
        }
        let inv = Complex::new(T::one() / norm, T::zero());
        for m in self.blocks.values_mut() {
            *m *= inv;
        }
        Ok(self)
    }

    /// A product state `|a, i>_A |n_total - a, j>_B`.
    pub fn basis(n_total: usize, alice: SectorSpace, bob: SectorSpace, (a, i): (usize, usize), j: usize) -> Result<Self> {
        if a > n_total {
            return Err(SsrError::Shape(format!("sector {a} exceeds n_total {n_total}")));
        }
        let (da, db) = (alice.dim(a), bob.dim(n_total - a));
        if i >= da || j >= db {
            return Err(SsrError::Shape("basis index out of range".into()));
        }
        let mut m = CMatrix::zeros(da, db);
        m[(i, j)] = Complex::new(T::one(), T::zero());
        Self::new(n_total, alice, bob, BTreeMap::from([(a, m)]))
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn alice(&self) -> &SectorSpace {
        &self.alice
    }

    pub fn bob(&self) -> &SectorSpace {
        &self.bob
    }

    pub fn blocks(&self) -> &BTreeMap<usize, CMatrix<T>> {
        &self.blocks
    }

    pub fn block(&self, n: usize) -> Option<&CMatrix<T>> {
        self.blocks.get(&n)
    }

    pub fn into_blocks(self) -> BTreeMap<usize, CMatrix<T>> {
        self.blocks
    }

    /// Alice sectors that can carry amplitude for this global number.
    pub fn admissible_sectors(alice: &SectorSpace, bob: &SectorSpace, n_total: usize) -> Vec<usize> {
        (0..=n_total.min(alice.n_max()))
            .filter(|&n| alice.dim(n) > 0 && bob.dim(n_total - n) > 0)
            .collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.blocks.values().fold(T::zero(), |acc, m| acc + frob_sq(m))
    }

    /// Weight `p_n` of each stored block.
    pub fn sector_weights(&self) -> BTreeMap<usize, T> {
        self.blocks.iter().map(|(&n, m)| (n, frob_sq(m))).collect()
    }

    /// `<self|other>`; zero when the global numbers differ.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        if self.n_total != other.n_total {
            return czero();
        }
        let mut acc = czero();
        for (n, a) in &self.blocks {
            if let Some(b) = other.blocks.get(n) {
                if a.shape() == b.shape() {
                    acc += a.dotc(b);
                }
            }
        }
        acc
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// Dense amplitude matrix over the full local spaces (sector-ascending bases).
    pub fn to_dense(&self) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.alice.total_dim(), self.bob.total_dim());
        for (&n, m) in &self.blocks {
            let (ra, cb) = (self.alice.offset(n), self.bob.offset(self.n_total - n));
            out.view_mut((ra, cb), m.shape()).copy_from(m);
        }
        out
    }

    /// Flattened vector over the global-sector basis: ascending `n`, then
    /// Alice index, then Bob index.
    pub fn to_sector_vector(&self) -> Vec<Complex<T>> {
        let mut out = Vec::new();
        for n in Self::admissible_sectors(&self.alice, &self.bob, self.n_total) {
            let (da, db) = (self.alice.dim(n), self.bob.dim(self.n_total - n));
            match self.blocks.get(&n) {
                Some(m) => {
                    for i in 0..da {
                        for j in 0..db {
                            out.push(m[(i, j)]);
                        }
                    }
                }
                None => out.extend(std::iter::repeat_n(czero(), da * db)),
            }
        }
        out
    }

    /// Inverse of [`Self::to_sector_vector`]; the vector is renormalized.
    pub fn from_sector_vector(n_total: usize, alice: SectorSpace, bob: SectorSpace, v: &[Complex<T>]) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        let mut pos = 0;
        let zero = lit::<T>(0.0);
        for n in Self::admissible_sectors(&alice, &bob, n_total) {
            let (da, db) = (alice.dim(n), bob.dim(n_total - n));
            if pos + da * db > v.len() {
                return Err(SsrError::Shape("sector vector too short".into()));
            }
            let m = CMatrix::from_fn(da, db, |i, j| v[pos + i * db + j]);
            pos += da * db;
            if m.iter().any(|z| z.norm_sqr() > zero) {
                blocks.insert(n, m);
            }
        }
        if pos != v.len() {
            return Err(SsrError::Shape("sector vector has wrong length".into()));
        }
        Self::normalized(n_total, alice, bob, blocks)
    }

    /// Tensor product; local spaces and block indices combine additively.
    pub fn tensor(&self, other: &Self) -> Self {
        let alice = self.alice.tensor(&other.alice);
        let bob = self.bob.tensor(&other.bob);
        let n_total = self.n_total + other.n_total;
        let mut blocks: BTreeMap<usize, CMatrix<T>> = BTreeMap::new();
        for (&a1, m1) in &self.blocks {
            let b1 = self.n_total - a1;
            for (&a2, m2) in &other.blocks {
                let b2 = other.n_total - a2;
                let n = a1 + a2;
                let block = blocks
                    .entry(n)
                    .or_insert_with(|| CMatrix::zeros(alice.dim(n), bob.dim(n_total - n)));
                for i1 in 0..m1.nrows() {
                    for j1 in 0..m1.ncols() {
                        let x = m1[(i1, j1)];
                        for i2 in 0..m2.nrows() {
                            let (_, r) = self.alice.tensor_index(&other.alice, (a1, i1), (a2, i2));
                            for j2 in 0..m2.ncols() {
                                let (_, c) = self.bob.tensor_index(&other.bob, (b1, j1), (b2, j2));
                                block[(r, c)] = x * m2[(i2, j2)];
                            }
                        }
                    }
                }
            }
        }
        BlockedPureState { n_total, alice, bob, blocks }
    }

    /// Applies sector-diagonal operators: Alice's `A_n` on the rows and
    /// Bob's `B_m` on the columns of every block (`A_n X B_m^T`). Missing
    /// operators act as identity.
    pub fn apply_local(&self, alice_ops: Option<&BTreeMap<usize, CMatrix<T>>>, bob_ops: Option<&BTreeMap<usize, CMatrix<T>>>) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(&n, m)| {
                let mut out = match alice_ops.and_then(|ops| ops.get(&n)) {
                    Some(a) => a * m,
                    None => m.clone(),
                };
                if let Some(b) = bob_ops.and_then(|ops| ops.get(&(self.n_total - n))) {
                    out *= b.transpose();
                }
                (n, out)
            })
            .collect();
        BlockedPureState { n_total: self.n_total, alice: self.alice.clone(), bob: self.bob.clone(), blocks }
    }

    /// Same blocks without any normalization check; used for intermediate
    /// (unnormalized) branches of a measurement.
    pub(crate) fn raw(n_total: usize, alice: SectorSpace, bob: SectorSpace, blocks: BTreeMap<usize, CMatrix<T>>) -> Self {
        BlockedPureState { n_total, alice, bob, blocks }
    }

    /// Swaps the roles of Alice and Bob.
    pub fn swap_parties(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(&n, m)| (self.n_total - n, m.transpose()))
            .collect();
        BlockedPureState { n_total: self.n_total, alice: self.bob.clone(), bob: self.alice.clone(), blocks }
    }
}
