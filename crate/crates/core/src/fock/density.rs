use std::collections::BTreeMap;

use crate::error::{Result, SsrError};
use crate::fock::{BlockedPureState, SectorSpace};
use crate::linalg::{hermitian_eigen, trace_norm_hermitian};
use crate::scalar::{cplx, lit, to_f64, CMatrix, Complex, Real};
use crate::tol::Tolerances;

/// One global-number sector of a density operator: weight `q_N` and a unit
/// trace matrix `rho_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySector<T: Real> {
    pub weight: T,
    pub matrix: CMatrix<T>,
}

/// Placement of Alice sector `n` inside a global sector basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorSlot {
    pub n_alice: usize,
    pub offset: usize,
    pub dim_alice: usize,
    pub dim_bob: usize,
}

/// Basis layout of global sector `n_total`: ascending Alice number, then Alice
/// index, then Bob index.
pub fn global_layout(alice: &SectorSpace, bob: &SectorSpace, n_total: usize) -> Vec<SectorSlot> {
    let mut offset = 0;
    BlockedPureState::<f64>::admissible_sectors(alice, bob, n_total)
        .into_iter()
        .map(|n| {
            let slot = SectorSlot { n_alice: n, offset, dim_alice: alice.dim(n), dim_bob: bob.dim(n_total - n) };
            offset += slot.dim_alice * slot.dim_bob;
            slot
        })
        .collect()
}

pub fn global_dim(alice: &SectorSpace, bob: &SectorSpace, n_total: usize) -> usize {
    global_layout(alice, bob, n_total).iter().map(|s| s.dim_alice * s.dim_bob).sum()
}

/// A density operator commuting with the global particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedDensity<T: Real> {
    alice: SectorSpace,
    bob: SectorSpace,
    sectors: BTreeMap<usize, DensitySector<T>>,
}

impl<T: Real> BlockedDensity<T> {
    pub fn new(alice: SectorSpace, bob: SectorSpace, sectors: BTreeMap<usize, DensitySector<T>>) -> Result<Self> {
        Self::new_with(alice, bob, sectors, &Tolerances::of::<T>())
    }

    pub fn new_with(
        alice: SectorSpace,
        bob: SectorSpace,
        sectors: BTreeMap<usize, DensitySector<T>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut total = 0.0;
        for (&n, s) in &sectors {
            let d = global_dim(&alice, &bob, n);
            if d == 0 || s.matrix.shape() != (d, d) {
                return Err(SsrError::Shape(format!("density sector {n} has shape {:?}, expected ({d}, {d})", s.matrix.shape())));
            }
            let w = to_f64(s.weight);
            if w.is_nan() || w < 0.0 {
                return Err(SsrError::InvalidDensity(format!("sector {n} has negative weight")));
            }
            total += w;
            let herm = to_f64((&s.matrix - s.matrix.adjoint()).norm());
            if herm > tol.hermitian {
                return Err(SsrError::InvalidDensity(format!("sector {n} is not Hermitian ({herm:e})")));
            }
            let tr = to_f64(s.matrix.trace().re);
            if (tr - 1.0).abs() > tol.norm.max(tol.psd) {
                return Err(SsrError::InvalidDensity(format!("sector {n} has trace {tr}")));
            }
            let min_eig = hermitian_eigen(&s.matrix).0.last().map(|&x| to_f64(x)).unwrap_or(0.0);
            if min_eig < -tol.psd {
                return Err(SsrError::InvalidDensity(format!("sector {n} has eigenvalue {min_eig:e}")));
            }
        }
        if (total - 1.0).abs() > tol.norm.max(tol.psd) {
            return Err(SsrError::InvalidDensity(format!("sector weights sum to {total}")));
        }
        Ok(BlockedDensity { alice, bob, sectors })
    }

    /// `|psi><psi|` as a single-sector density.
    pub fn from_pure(state: &BlockedPureState<T>) -> Self {
        let v = state.to_sector_vector();
        let d = v.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        let sectors = BTreeMap::from([(state.n_total(), DensitySector { weight: T::one(), matrix })]);
        BlockedDensity { alice: state.alice().clone(), bob: state.bob().clone(), sectors }
    }

    /// Mixture `sum_i p_i |psi_i><psi_i|` of pure states on common local spaces.
    pub fn from_ensemble(members: &[(T, BlockedPureState<T>)]) -> Result<Self> {
        let first = members.first().ok_or_else(|| SsrError::InvalidDensity("empty ensemble".into()))?;
        let (alice, bob) = (first.1.alice().clone(), first.1.bob().clone());
        let mut acc: BTreeMap<usize, CMatrix<T>> = BTreeMap::new();
        for (p, s) in members {
            if s.alice() != &alice || s.bob() != &bob {
                return Err(SsrError::Shape("ensemble members live on different spaces".into()));
            }
            let v = s.to_sector_vector();
            let d = v.len();
            let m = acc.entry(s.n_total()).or_insert_with(|| CMatrix::zeros(d, d));
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += v[i] * v[j].conj() * cplx(*p, T::zero());
                }
            }
        }
        Ok(Self::from_unnormalized_sectors(alice, bob, acc))
    }

    /// Splits unnormalized sector matrices into weights and unit-trace parts.
    pub(crate) fn from_unnormalized_sectors(alice: SectorSpace, bob: SectorSpace, acc: BTreeMap<usize, CMatrix<T>>) -> Self {
        let total = acc.values().fold(T::zero(), |a, m| a + m.trace().re);
        let sectors = acc
            .into_iter()
            .filter_map(|(n, m)| {
                let tr = m.trace().re;
                if tr <= T::zero() {
                    return None;
                }
                let matrix = m * cplx(T::one() / tr, T::zero());
                Some((n, DensitySector { weight: tr / total, matrix }))
            })
            .collect();
        BlockedDensity { alice, bob, sectors }
    }

    pub fn alice(&self) -> &SectorSpace {
        &self.alice
    }

    pub fn bob(&self) -> &SectorSpace {
        &self.bob
    }

    pub fn sectors(&self) -> &BTreeMap<usize, DensitySector<T>> {
        &self.sectors
    }

    pub fn layout(&self, n_total: usize) -> Vec<SectorSlot> {
        global_layout(&self.alice, &self.bob, n_total)
    }

    /// Weighted matrix `q_N rho_N`.
    pub fn weighted(&self, n_total: usize) -> Option<CMatrix<T>> {
        self.sectors.get(&n_total).map(|s| &s.matrix * cplx(s.weight, T::zero()))
    }

    /// Trace distance `1/2 ||self - other||_1`; sectors are compared blockwise.
    pub fn trace_distance(&self, other: &Self) -> T {
        let mut keys: Vec<usize> = self.sectors.keys().chain(other.sectors.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let half = lit::<T>(0.5);
        keys.into_iter()
            .map(|n| match (self.weighted(n), other.weighted(n)) {
                (Some(a), Some(b)) => trace_norm_hermitian(&(a - b)),
                (Some(a), None) | (None, Some(a)) => trace_norm_hermitian(&a),
                (None, None) => T::zero(),
            })
            .fold(T::zero(), |acc, x| acc + x)
            * half
    }

    /// Embedding into the full product space `(sum_n d^A_n) x (sum_m d^B_m)`
    /// with row index `alice_index * dim_B + bob_index`.
    pub fn to_full(&self) -> CMatrix<T> {
        let (da, db) = (self.alice.total_dim(), self.bob.total_dim());
        let mut out = CMatrix::zeros(da * db, da * db);
        for (&n, s) in &self.sectors {
            let map = full_index_map(&self.alice, &self.bob, n);
            for (i, &fi) in map.iter().enumerate() {
                for (j, &fj) in map.iter().enumerate() {
                    out[(fi, fj)] = s.matrix[(i, j)] * cplx(s.weight, T::zero());
                }
            }
        }
        out
    }

    /// Density of two independent copies, `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let alice = self.alice.tensor(&other.alice);
        let bob = self.bob.tensor(&other.bob);
        let mut acc: BTreeMap<usize, CMatrix<T>> = BTreeMap::new();
        for (&n1, s1) in &self.sectors {
            let l1 = basis_labels(&self.alice, &self.bob, n1);
            for (&n2, s2) in &other.sectors {
                let l2 = basis_labels(&other.alice, &other.bob, n2);
                let n = n1 + n2;
                let layout = global_layout(&alice, &bob, n);
                let d = layout.iter().map(|s| s.dim_alice * s.dim_bob).sum();
                let place = |x: &(usize, usize, usize), y: &(usize, usize, usize)| -> usize {
                    let (a1, i1, j1) = *x;
                    let (a2, i2, j2) = *y;
                    let (na, ia) = self.alice.tensor_index(&other.alice, (a1, i1), (a2, i2));
                    let (_, jb) = self.bob.tensor_index(&other.bob, (n1 - a1, j1), (n2 - a2, j2));
                    let slot = layout.iter().find(|s| s.n_alice == na).expect("admissible product sector");
                    slot.offset + ia * slot.dim_bob + jb
                };
                let idx: Vec<Vec<usize>> = l1.iter().map(|x| l2.iter().map(|y| place(x, y)).collect()).collect();
                let m = acc.entry(n).or_insert_with(|| CMatrix::zeros(d, d));
                let w = s1.weight * s2.weight;
                for r1 in 0..l1.len() {
                    for c1 in 0..l1.len() {
                        let x = s1.matrix[(r1, c1)] * cplx(w, T::zero());
                        if x == Complex::new(T::zero(), T::zero()) {
                            continue;
                        }
                        for r2 in 0..l2.len() {
                            for c2 in 0..l2.len() {
                                m[(idx[r1][r2], idx[c1][c2])] += x * s2.matrix[(r2, c2)];
                            }
                        }
                    }
                }
            }
        }
        Self::from_unnormalized_sectors(alice, bob, acc)
    }
}

/// `(n_alice, alice_index, bob_index)` for every basis vector of a global sector.
pub fn basis_labels(alice: &SectorSpace, bob: &SectorSpace, n_total: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for slot in global_layout(alice, bob, n_total) {
        for i in 0..slot.dim_alice {
            for j in 0..slot.dim_bob {
                out.push((slot.n_alice, i, j));
            }
        }
    }
    out
}

/// Position of each global-sector basis vector in the full product basis.
pub fn full_index_map(alice: &SectorSpace, bob: &SectorSpace, n_total: usize) -> Vec<usize> {
    let db = bob.total_dim();
    basis_labels(alice, bob, n_total)
        .into_iter()
        .map(|(n, i, j)| (alice.offset(n) + i) * db + bob.offset(n_total - n) + j)
        .collect()
}
