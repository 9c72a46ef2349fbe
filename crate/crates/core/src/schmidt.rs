//! Sector-wise Schmidt decomposition and the two pure-state resources:
//! entropy of entanglement (EoE) and superselection-induced variance (SiV).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fock::BlockedPureState;
use crate::linalg::squared_singular_values;
use crate::scalar::{from_usize, lit, xlog2x_neg, Real};
use crate::tol::Tolerances;

/// Schmidt coefficients of one local-number sector.
#[derive(Debug, Clone, PartialEq)]
pub enum SchmidtSector<T: Real> {
    /// Coefficients `lambda_i^n`, nonincreasing and nonnegative.
    Explicit(Vec<T>),
    /// `count` equal coefficients summing to `weight`; `ln_count` is the
    /// natural log of the count so that astronomically large ranks stay finite.
    Uniform { ln_count: T, weight: T },
}

impl<T: Real> SchmidtSector<T> {
    /// Sector weight `p_n`.
    pub fn weight(&self) -> T {
        match self {
            SchmidtSector::Explicit(v) => v.iter().fold(T::zero(), |a, &x| a + x),
            SchmidtSector::Uniform { weight, .. } => *weight,
        }
    }

    /// `-sum_i lambda_i log2 lambda_i` restricted to this sector.
    pub fn entropy_contribution(&self) -> T {
        match self {
            SchmidtSector::Explicit(v) => v.iter().fold(T::zero(), |a, &x| a + xlog2x_neg(x)),
            SchmidtSector::Uniform { ln_count, weight } => {
                if *weight <= T::zero() {
                    T::zero()
                } else {
                    *weight * *ln_count / T::ln_2() + xlog2x_neg(*weight)
                }
            }
        }
    }

    /// Natural log of the number of nonzero coefficients.
    pub fn ln_rank(&self) -> T {
        match self {
            SchmidtSector::Explicit(v) => from_usize::<T>(v.iter().filter(|&&x| x > T::zero()).count().max(1)).ln(),
            SchmidtSector::Uniform { ln_count, .. } => *ln_count,
        }
    }
}

/// Schmidt data of a pure state, keyed by Alice's local particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtBlocks<T: Real> {
    pub sectors: BTreeMap<usize, SchmidtSector<T>>,
}

impl<T: Real> SchmidtBlocks<T> {
    pub fn new(sectors: BTreeMap<usize, SchmidtSector<T>>) -> Self {
        SchmidtBlocks { sectors }
    }

    /// Explicit blocks from plain coefficient vectors (sorted on entry).
    pub fn explicit(sectors: impl IntoIterator<Item = (usize, Vec<T>)>) -> Self {
        SchmidtBlocks {
            sectors: sectors
                .into_iter()
                .map(|(n, mut v)| {
                    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
                    (n, SchmidtSector::Explicit(v))
                })
                .collect(),
        }
    }

    pub fn sector(&self, n: usize) -> Option<&SchmidtSector<T>> {
        self.sectors.get(&n)
    }

    pub fn weights(&self) -> BTreeMap<usize, T> {
        self.sectors.iter().map(|(&n, s)| (n, s.weight())).collect()
    }

    pub fn total_weight(&self) -> T {
        self.sectors.values().fold(T::zero(), |a, s| a + s.weight())
    }
}

/// Per-sector Schmidt coefficients: squared singular values of every block.
pub fn schmidt_block_decompose<T: Real>(state: &BlockedPureState<T>) -> SchmidtBlocks<T> {
    let cut = lit::<T>(Tolerances::of::<T>().singular);
    let cut_sq = cut * cut;
    let sectors = state
        .blocks()
        .iter()
        .filter_map(|(&n, m)| {
            let v: Vec<T> = squared_singular_values(m).into_iter().filter(|&x| x >= cut_sq).collect();
            (!v.is_empty()).then_some((n, SchmidtSector::Explicit(v)))
        })
        .collect();
    SchmidtBlocks { sectors }
}

/// Entropy of entanglement in bits.
pub fn entropy_of_entanglement<T: Real>(blocks: &SchmidtBlocks<T>) -> T {
    blocks.sectors.values().fold(T::zero(), |a, s| a + s.entropy_contribution()).max(T::zero())
}

/// `p_n = sum_i lambda_i^n` for `n = 0..=max sector`.
pub fn local_number_distribution<T: Real>(blocks: &SchmidtBlocks<T>) -> Vec<T> {
    let n_max = blocks.sectors.keys().next_back().copied().unwrap_or(0);
    let mut p = vec![T::zero(); n_max + 1];
    for (&n, s) in &blocks.sectors {
        p[n] = s.weight();
    }
    p
}

/// `4 Var(n)` of a distribution over local particle numbers, normalized by its total.
pub fn siv_of_distribution<T: Real>(p: &[T]) -> T {
    let total = p.iter().fold(T::zero(), |a, &x| a + x);
    if total <= T::zero() {
        return T::zero();
    }
    let mean = p.iter().enumerate().fold(T::zero(), |a, (n, &x)| a + from_usize::<T>(n) * x) / total;
    let var = p.iter().enumerate().fold(T::zero(), |a, (n, &x)| {
        let d = from_usize::<T>(n) - mean;
        a + d * d * x
    }) / total;
    lit::<T>(4.0) * var
}

/// Superselection-induced variance from Schmidt data.
pub fn siv<T: Real>(blocks: &SchmidtBlocks<T>) -> T {
    siv_of_distribution(&local_number_distribution(blocks))
}

/// SiV read directly off the block weights of a state (no decomposition).
pub fn siv_of_state<T: Real>(state: &BlockedPureState<T>) -> T {
    let n_max = state.blocks().keys().next_back().copied().unwrap_or(0);
    let mut p = vec![T::zero(); n_max + 1];
    for (n, w) in state.sector_weights() {
        p[n] = w;
    }
    siv_of_distribution(&p)
}

/// Mean of Alice's local particle number.
pub fn mean_local_number<T: Real>(blocks: &SchmidtBlocks<T>) -> T {
    let total = blocks.total_weight();
    if total <= T::zero() {
        return T::zero();
    }
    blocks.sectors.iter().fold(T::zero(), |a, (&n, s)| a + from_usize::<T>(n) * s.weight()) / total
}

/// Both resources of a pure state plus the mean local number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourcePair<T: Real> {
    pub eoe: T,
    pub siv: T,
    pub mean_local_number: T,
}

pub fn resource_pair_of_blocks<T: Real>(blocks: &SchmidtBlocks<T>) -> ResourcePair<T> {
    ResourcePair { eoe: entropy_of_entanglement(blocks), siv: siv(blocks), mean_local_number: mean_local_number(blocks) }
}

pub fn resource_pair<T: Real>(state: &BlockedPureState<T>) -> ResourcePair<T> {
    resource_pair_of_blocks(&schmidt_block_decompose(state))
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    xlog2x_neg(p) + xlog2x_neg(T::one() - p)
}

/// Shannon entropy in bits of a (possibly unnormalized) weight vector.
pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    let total = p.iter().fold(T::zero(), |a, &x| a + x);
    p.iter().fold(T::zero(), |a, &x| a + xlog2x_neg(x / total))
}
