//! Applying sector-diagonal measurements and the SiV monotonicity test.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::fock::{BlockedPureState, LocalPovm, PovmElement};
use crate::scalar::{frob_sq, from_usize, lit, to_f64, CMatrix, Real};
use crate::tol::Tolerances;

/// Born probability and normalized post-measurement state of `M ⊗ 1`.
pub fn apply_povm_outcome<T: Real>(state: &BlockedPureState<T>, element: &PovmElement<T>) -> Result<(T, BlockedPureState<T>)> {
    for (&n, m) in &element.sectors {
        let d = state.alice().dim(n);
        if m.shape() != (d, d) {
            return Err(SsrError::Shape(format!("element sector {n} does not match Alice's space")));
        }
    }
    let blocks: BTreeMap<usize, CMatrix<T>> = state
        .blocks()
        .iter()
        .filter_map(|(&n, b)| element.sectors.get(&n).map(|m| (n, m * b)))
        .collect();
    let branch = BlockedPureState::raw(state.n_total(), state.alice().clone(), state.bob().clone(), blocks);
    let prob = branch.norm_sqr();
    if prob < lit(Tolerances::of::<T>().zero) {
        return Err(SsrError::ZeroProbability);
    }
    Ok((prob, branch.normalize()?))
}

/// Both sides of the monotonicity inequality for the local-number variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneCheck<T: Real> {
    /// `sum_i <M_i^† N^2 M_i> - sum_i <M_i^† N M_i>^2 / <M_i^† M_i>`
    pub lhs: T,
    /// `V(psi) / 4`
    pub rhs: T,
    pub ok: bool,
}

fn raw_variance<T: Real>(weights: impl Iterator<Item = (usize, T)>) -> T {
    let (mut w0, mut w1, mut w2) = (T::zero(), T::zero(), T::zero());
    for (n, w) in weights {
        let x = from_usize::<T>(n);
        w0 += w;
        w1 += x * w;
        w2 += x * x * w;
    }
    if w0 <= T::zero() {
        T::zero()
    } else {
        w2 - w1 * w1 / w0
    }
}

/// Expected post-measurement variance of Alice's number against the initial one.
pub fn siv_monotone_check<T: Real>(state: &BlockedPureState<T>, povm: &LocalPovm<T>) -> MonotoneCheck<T> {
    let rhs = raw_variance(state.sector_weights().into_iter());
    let lhs = povm.elements().iter().fold(T::zero(), |acc, e| {
        let w = state
            .blocks()
            .iter()
            .filter_map(|(&n, b)| e.sectors.get(&n).map(|m| (n, frob_sq(&(m * b)))));
        acc + raw_variance(w)
    });
    let ok = to_f64(lhs) <= to_f64(rhs) + 1e-9;
    MonotoneCheck { lhs, rhs, ok }
}
