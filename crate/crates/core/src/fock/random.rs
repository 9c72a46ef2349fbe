use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SsrError};
use crate::fock::{BlockedPureState, LocalPovm, PovmElement, SectorSpace};
use crate::linalg::{gaussian_matrix, inv_sqrt_psd};
use crate::scalar::{CMatrix, Real};

/// Deterministic generator used for every seeded draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed `index` of a root seed (splitmix64 of a counter).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random pure state: i.i.d. complex Gaussian amplitudes in every admissible
/// block, normalized.
pub fn random_state<T: Real>(alice: &SectorSpace, bob: &SectorSpace, n_total: usize, seed: u64) -> Result<BlockedPureState<T>> {
    let sectors = BlockedPureState::<T>::admissible_sectors(alice, bob, n_total);
    if sectors.is_empty() {
        return Err(SsrError::EmptySector { n_total });
    }
    let mut rng = rng_from_seed(seed);
    let blocks: BTreeMap<usize, CMatrix<T>> = sectors
        .into_iter()
        .map(|n| (n, gaussian_matrix(alice.dim(n), bob.dim(n_total - n), &mut rng)))
        .collect();
    BlockedPureState::normalized(n_total, alice.clone(), bob.clone(), blocks)
}

/// Random `k`-outcome sector-preserving POVM.
///
/// Draws Gaussian blocks `G_i` per sector and sets `M_i = G_i S^{-1/2}` with
/// `S = sum_i G_i^† G_i`, so completeness holds exactly up to rounding.
pub fn random_povm<T: Real>(space: &SectorSpace, k: usize, seed: u64) -> Result<LocalPovm<T>> {
    if k == 0 {
        return Err(SsrError::Domain("POVM needs at least one element".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut elements: Vec<BTreeMap<usize, CMatrix<T>>> = vec![BTreeMap::new(); k];
    for (n, d) in space.sectors() {
        let raw: Vec<CMatrix<T>> = (0..k).map(|_| gaussian_matrix(d, d, &mut rng)).collect();
        let s = raw.iter().fold(CMatrix::<T>::zeros(d, d), |acc, g| acc + g.adjoint() * g);
        let w = inv_sqrt_psd(&s);
        for (slot, g) in elements.iter_mut().zip(raw) {
            slot.insert(n, g * &w);
        }
    }
    Ok(LocalPovm::unchecked(space.clone(), elements.into_iter().map(PovmElement::new).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    #[test]
    fn random_state_is_deterministic_and_normalized() {
        let a = SectorSpace::new(vec![1, 2, 1]).unwrap();
        let b = SectorSpace::new(vec![2, 1]).unwrap();
        let s1 = random_state::<f64>(&a, &b, 2, 42).unwrap();
        let s2 = random_state::<f64>(&a, &b, 2, 42).unwrap();
        assert_eq!(s1, s2);
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-12);
        assert_ne!(s1, random_state::<f64>(&a, &b, 2, 43).unwrap());
    }

    #[test]
    fn random_state_without_admissible_block() {
        let a = SectorSpace::qubit_modes(1);
        assert_eq!(random_state::<f64>(&a, &a, 5, 0).unwrap_err(), SsrError::EmptySector { n_total: 5 });
    }

    #[test]
    fn single_element_povm_is_unitary_per_sector() {
        let space = SectorSpace::new(vec![2, 3]).unwrap();
        let p = random_povm::<f64>(&space, 1, 9).unwrap();
        for (n, d) in space.sectors() {
            let m = p.elements()[0].sector(n).unwrap();
            assert!((m.adjoint() * m - identity::<f64>(d)).norm() < 1e-10);
        }
    }

    #[test]
    fn random_povm_complete_and_deterministic() {
        let space = SectorSpace::qubit_modes(3);
        for seed in 0..20 {
            let p = random_povm::<f64>(&space, 4, seed).unwrap();
            assert!(p.completeness_residual() < 1e-10);
            assert_eq!(p, random_povm::<f64>(&space, 4, seed).unwrap());
        }
    }

    #[test]
    fn f32_draws_are_complete_at_single_precision() {
        let space = SectorSpace::qubit_modes(2);
        let p = random_povm::<f32>(&space, 3, 1).unwrap();
        assert!(p.completeness_residual() < 1e-4);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(17, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
