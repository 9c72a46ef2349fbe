//! Distinguishability of two states under local product observables.

use crate::fock::{BlockedPureState, SectorSpace};
use crate::fock::random::rng_from_seed;
use crate::linalg::{identity, random_unit_hermitian};
use crate::scalar::{cplx, from_usize, CMatrix, Real};

/// Which local observables the parties may measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableClass {
    /// Block-diagonal in the local particle number.
    SectorDiagonal,
    /// Any Hermitian operator on the full local space.
    Unrestricted,
}

fn number_observable<T: Real>(space: &SectorSpace) -> CMatrix<T> {
    let scale = from_usize::<T>(space.n_max().max(1));
    let mut m = CMatrix::zeros(space.total_dim(), space.total_dim());
    for (n, d) in space.sectors() {
        let off = space.offset(n);
        for i in 0..d {
            m[(off + i, off + i)] = cplx(from_usize::<T>(n) / scale, T::zero());
        }
    }
    m
}

fn random_observable<T: Real, R: rand::Rng>(space: &SectorSpace, class: ObservableClass, rng: &mut R) -> CMatrix<T> {
    match class {
        ObservableClass::Unrestricted => random_unit_hermitian(space.total_dim(), rng),
        ObservableClass::SectorDiagonal => {
            let mut m = CMatrix::zeros(space.total_dim(), space.total_dim());
            let mut top = T::zero();
            let mut blocks = Vec::new();
            for (n, d) in space.sectors() {
                let h: CMatrix<T> = random_unit_hermitian(d, rng);
                let g = crate::scalar::lit::<T>(rng.random_range(0.0..1.0));
                top = top.max(g);
                blocks.push((space.offset(n), h * cplx(g, T::zero())));
            }
            let inv = if top > T::zero() { T::one() / top } else { T::one() };
            for (off, h) in blocks {
                let d = h.nrows();
                m.view_mut((off, off), (d, d)).copy_from(&(h * cplx(inv, T::zero())));
            }
            m
        }
    }
}

/// `<psi| A ⊗ B |psi>` with `psi` as its dense amplitude matrix `X`: `tr(X^† A X B^T)`.
fn expectation<T: Real>(x: &CMatrix<T>, a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    (x.adjoint() * a * x * b.transpose()).trace().re
}

/// Largest gap `|<s1|A⊗B|s1> - <s2|A⊗B|s2>|` over sampled unit-norm observables.
///
/// The local number observables (scaled to unit norm) are always tried first,
/// followed by `trials` random pairs drawn from `class`.
pub fn distinguishing_gap<T: Real>(
    s1: &BlockedPureState<T>,
    s2: &BlockedPureState<T>,
    class: ObservableClass,
    trials: usize,
    seed: u64,
) -> T {
    let (alice, bob) = (s1.alice(), s1.bob());
    let (x1, x2) = (s1.to_dense(), s2.to_dense());
    let gap = |a: &CMatrix<T>, b: &CMatrix<T>| (expectation(&x1, a, b) - expectation(&x2, a, b)).abs();
    let (ia, ib) = (identity::<T>(alice.total_dim()), identity::<T>(bob.total_dim()));
    let mut best = gap(&number_observable(alice), &ib).max(gap(&ia, &number_observable(bob)));
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let a = random_observable(alice, class, &mut rng);
        let b = random_observable(bob, class, &mut rng);
        best = best.max(gap(&a, &b));
    }
    best
}

/// Distinguishing gap restricted to observables commuting with local particle number.
pub fn data_hiding_distance<T: Real>(s1: &BlockedPureState<T>, s2: &BlockedPureState<T>, trials: usize, seed: u64) -> T {
    distinguishing_gap(s1, s2, ObservableClass::SectorDiagonal, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn bell(sign: f64) -> BlockedPureState<f64> {
        let q = SectorSpace::qubit_modes(1);
        let h = 0.5f64.sqrt();
        let b = |x: f64| CMatrix::from_element(1, 1, cplx(x, 0.0));
        BlockedPureState::new(1, q.clone(), q, BTreeMap::from([(0, b(h)), (1, b(sign * h))])).unwrap()
    }

    #[test]
    fn bell_pair_hidden_under_ssr() {
        for seed in 0..5 {
            assert!(data_hiding_distance(&bell(1.0), &bell(-1.0), 200, seed) < 1e-12);
        }
    }

    #[test]
    fn bell_pair_visible_without_ssr() {
        assert!(distinguishing_gap(&bell(1.0), &bell(-1.0), ObservableClass::Unrestricted, 100, 1) > 0.4);
    }

    #[test]
    fn identical_states_give_exact_zero() {
        assert_eq!(data_hiding_distance(&bell(1.0), &bell(1.0), 50, 3), 0.0);
    }

    #[test]
    fn different_sectors_are_locally_distinguishable() {
        let q = SectorSpace::qubit_modes(1);
        let s01 = BlockedPureState::<f64>::basis(1, q.clone(), q.clone(), (0, 0), 0).unwrap();
        let s10 = BlockedPureState::<f64>::basis(1, q.clone(), q, (1, 0), 0).unwrap();
        assert!(data_hiding_distance(&s01, &s10, 0, 0) >= 1.0 - 1e-9);
    }
}
