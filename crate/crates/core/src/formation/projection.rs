//! Entanglement created by projecting a product state onto one global number sector.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::fock::random::rng_from_seed;
use crate::fock::{occupation_strings, BlockedPureState, SectorSpace};
use crate::linalg::gaussian_vector;
use crate::schmidt::{entropy_of_entanglement, schmidt_block_decompose, SchmidtSector};
use crate::scalar::{from_usize, lit, log2, CMatrix, Complex, Real};
use crate::tol::Tolerances;

/// One mode pair `|chi>_A |psi>_B`, amplitudes over occupation 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair<T: Real> {
    pub alice: [Complex<T>; 2],
    pub bob: [Complex<T>; 2],
}

/// Independent Haar-random single-mode states for each side of `n` pairs.
pub fn random_mode_pairs<T: Real>(n: usize, seed: u64) -> Vec<ModePair<T>> {
    let mut rng = rng_from_seed(seed);
    let mut unit = || {
        let v = gaussian_vector::<T, _>(2, &mut rng);
        let norm = v.norm_squared().sqrt();
        [v[0].unscale(norm), v[1].unscale(norm)]
    };
    (0..n).map(|_| ModePair { alice: unit(), bob: unit() }).collect()
}

/// `P_n (⊗_k chi_k ⊗ psi_k)`, renormalized, with each party holding one mode per pair.
pub fn project_product_state<T: Real>(pairs: &[ModePair<T>], n_sector: usize) -> Result<BlockedPureState<T>> {
    let m = pairs.len();
    let space = SectorSpace::qubit_modes(m);
    let amp = |bits: &[u8], side: fn(&ModePair<T>) -> &[Complex<T>; 2]| -> Complex<T> {
        bits.iter().zip(pairs).fold(Complex::new(T::one(), T::zero()), |acc, (&b, p)| acc * side(p)[b as usize])
    };
    let mut blocks = BTreeMap::new();
    for a in BlockedPureState::<T>::admissible_sectors(&space, &space, n_sector) {
        let u: Vec<Complex<T>> = occupation_strings(m, a).iter().map(|s| amp(s, |p| &p.alice)).collect();
        let v: Vec<Complex<T>> = occupation_strings(m, n_sector - a).iter().map(|s| amp(s, |p| &p.bob)).collect();
        blocks.insert(a, CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j]));
    }
    let norm: T = blocks.values().fold(T::zero(), |acc, b| acc + b.norm_squared());
    if blocks.is_empty() || norm < lit(Tolerances::of::<T>().zero) {
        return Err(SsrError::ZeroProjection(n_sector));
    }
    BlockedPureState::normalized(n_sector, space.clone(), space, blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionBound<T: Real> {
    pub sector: usize,
    pub schmidt_rank: usize,
    pub eoe: T,
    /// `log2(N + 1)` for `N` mode pairs.
    pub bound: T,
}

impl<T: Real> ProjectionBound<T> {
    /// `eoe <= log2(rank)` and `rank <= N + 1`.
    pub fn holds(&self, n_pairs: usize) -> bool {
        let slack = lit::<T>(1e-12);
        self.schmidt_rank <= n_pairs + 1
            && self.eoe <= log2(from_usize::<T>(self.schmidt_rank.max(1))) + slack
            && self.eoe <= self.bound + slack
    }
}

pub fn projection_entanglement_bound<T: Real>(pairs: &[ModePair<T>], n_sector: usize) -> Result<ProjectionBound<T>> {
    let state = project_product_state(pairs, n_sector)?;
    let blocks = schmidt_block_decompose(&state);
    let schmidt_rank = blocks
        .sectors
        .values()
        .map(|s| match s {
            SchmidtSector::Explicit(v) => v.len(),
            SchmidtSector::Uniform { ln_count, .. } => crate::scalar::to_f64(ln_count.exp()).round() as usize,
        })
        .sum();
    Ok(ProjectionBound {
        sector: n_sector,
        schmidt_rank,
        eoe: entropy_of_entanglement(&blocks),
        bound: log2(from_usize::<T>(pairs.len() + 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn plus_plus_projects_to_bell_state() {
        let h = cplx(0.5f64.sqrt(), 0.0);
        let pairs = [ModePair { alice: [h, h], bob: [h, h] }];
        let r = projection_entanglement_bound(&pairs, 1).unwrap();
        assert_eq!(r.schmidt_rank, 2);
        assert!((r.eoe - 1.0).abs() < 1e-14 && (r.bound - 1.0).abs() < 1e-15);
        assert!(r.holds(1));
    }

    #[test]
    fn random_four_pair_states() {
        for seed in 0..10 {
            let pairs = random_mode_pairs::<f64>(4, seed);
            for n in 0..=8 {
                let r = projection_entanglement_bound(&pairs, n).unwrap();
                assert!(r.holds(4), "{r:?}");
                assert!(r.eoe <= 5f64.log2() + 1e-12);
            }
        }
    }

    #[test]
    fn empty_sector() {
        let pairs = random_mode_pairs::<f64>(2, 0);
        assert_eq!(projection_entanglement_bound(&pairs, 5).unwrap_err(), SsrError::ZeroProjection(5));
        let zero = [ModePair { alice: [cplx(1.0, 0.0), cplx(0.0, 0.0)], bob: [cplx(1.0, 0.0), cplx(0.0, 0.0)] }];
        assert_eq!(projection_entanglement_bound(&zero, 1).unwrap_err(), SsrError::ZeroProjection(1));
    }
}
