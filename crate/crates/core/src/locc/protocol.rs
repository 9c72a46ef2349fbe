//! Explicit one-way LOCC protocols that respect the superselection rule.
//!
//! In each local-number sector Alice performs a Nielsen-type measurement
//! built from a convex decomposition `lambda = sum_j t_j P_j mu` (a product
//! of T-transforms). Sectors are then glued into one sector-diagonal POVM by
//! splitting every sector's outcome into pieces so that all sectors share the
//! same outcome probabilities; Bob finishes with a per-sector unitary.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Result, SsrError};
use crate::fock::{BlockedPureState, LocalPovm, PovmElement};
use crate::linalg::{hermitian_eigen, identity, procrustes};
use crate::locc::majorize::is_majorized_by_with;
use crate::scalar::{cplx, lit, CMatrix, Real};
use crate::tol::Tolerances;

/// What Bob does after Alice announces an outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeAction<T: Real> {
    /// Index of the target state produced by this outcome.
    pub target: usize,
    /// Unitary per Bob sector; absent sectors are left alone.
    pub bob_correction: BTreeMap<usize, CMatrix<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionProtocol<T: Real> {
    pub povm: LocalPovm<T>,
    pub actions: Vec<OutcomeAction<T>>,
}

/// Probability and fidelity of one executed outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCheck<T: Real> {
    pub prob: T,
    pub fidelity: T,
}

impl<T: Real> ConversionProtocol<T> {
    /// Runs every outcome on `source` and compares with `targets[action.target]`.
    pub fn execute(&self, source: &BlockedPureState<T>, targets: &[BlockedPureState<T>]) -> Vec<BranchCheck<T>> {
        self.povm
            .elements()
            .iter()
            .zip(&self.actions)
            .map(|(e, act)| {
                let branch = source.apply_local(Some(&e.sectors), None);
                // sectors the element does not touch are annihilated
                let blocks: BTreeMap<usize, CMatrix<T>> = branch
                    .blocks()
                    .iter()
                    .filter(|(n, _)| e.sectors.contains_key(n))
                    .map(|(&n, m)| (n, m.clone()))
                    .collect();
                let branch = BlockedPureState::raw(source.n_total(), source.alice().clone(), source.bob().clone(), blocks);
                let prob = branch.norm_sqr();
                let fidelity = match branch.normalize() {
                    Ok(post) => post.apply_local(None, Some(&act.bob_correction)).fidelity(&targets[act.target]),
                    Err(_) => T::zero(),
                };
                BranchCheck { prob, fidelity }
            })
            .collect()
    }
}

/// Writes `lambda = sum_j t_j P_j mu` with `(P_j mu)_i = mu[perm_j[i]]`.
///
/// Both inputs sorted nonincreasing with `lambda ≺ mu`. The decomposition is
/// obtained by applying T-transforms to `mu` until it equals `lambda`.
pub fn doubly_stochastic_decomposition<T: Real>(lambda: &[T], mu: &[T]) -> Vec<(T, Vec<usize>)> {
    let d = lambda.len();
    let eps = lit::<T>(1e-14);
    let mut y: Vec<T> = mu.to_vec();
    y.resize(d, T::zero());
    let mut terms: Vec<(T, Vec<usize>)> = vec![(T::one(), (0..d).collect())];
    for _ in 0..2 * d {
        let j = match (0..d).rev().find(|&i| y[i] > lambda[i] + eps) {
            Some(j) => j,
            None => break,
        };
        let k = match (j + 1..d).find(|&i| lambda[i] > y[i] + eps) {
            Some(k) => k,
            None => break,
        };
        let delta = (y[j] - lambda[j]).min(lambda[k] - y[k]);
        let gap = y[j] - y[k];
        if gap <= T::zero() {
            break;
        }
        let swap_weight = delta / gap;
        let exact_j = y[j] - lambda[j] <= lambda[k] - y[k];
        y[j] -= delta;
        y[k] += delta;
        if exact_j {
            y[j] = lambda[j];
        } else {
            y[k] = lambda[k];
        }
        let mut next: HashMap<Vec<usize>, T> = HashMap::new();
        for (w, perm) in terms {
            *next.entry(perm.clone()).or_insert(T::zero()) += w * (T::one() - swap_weight);
            let mut swapped = perm;
            swapped.swap(j, k);
            *next.entry(swapped).or_insert(T::zero()) += w * swap_weight;
        }
        terms = next.into_iter().filter(|(_, w)| *w > T::zero()).map(|(p, w)| (w, p)).collect();
        terms.sort_by(|a, b| a.1.cmp(&b.1));
    }
    terms
}

/// Per-sector pieces: `(probability t_j, Alice operator M_j)`.
type SectorOutcomes<T> = Vec<(T, CMatrix<T>)>;

fn sorted_svd<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap_or(std::cmp::Ordering::Equal));
    let s = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u = CMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    (s, u)
}

/// Extends orthonormal columns `u` (`d x r`) to a `d x d` unitary.
fn complete_basis<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let (d, r) = u.shape();
    let (_, vecs) = hermitian_eigen(&(identity::<T>(d) - u * u.adjoint()));
    let mut full = CMatrix::zeros(d, d);
    full.columns_mut(0, r).copy_from(u);
    full.columns_mut(r, d - r).copy_from(&vecs.columns(0, d - r));
    full
}

fn nielsen_sector<T: Real>(src: &CMatrix<T>, tgt: &CMatrix<T>, weight: T, tol: &Tolerances) -> Result<SectorOutcomes<T>> {
    let cut = lit::<T>(tol.singular);
    let (s_src, u_src) = sorted_svd(src);
    let (s_tgt, u_tgt) = sorted_svd(tgt);
    let rank = s_src.iter().filter(|&&s| s > cut).count();
    let lambda: Vec<T> = s_src[..rank].iter().map(|&s| s * s / weight).collect();
    let mut mu: Vec<T> = s_tgt.iter().map(|&s| s * s / weight).collect();
    if mu[rank.min(mu.len())..].iter().any(|&m| m > lit(tol.majorization)) {
        return Err(SsrError::NotConvertible);
    }
    mu.resize(rank, T::zero());
    let total = mu.iter().fold(T::zero(), |a, &x| a + x);
    for m in mu.iter_mut() {
        *m /= total;
    }
    if !is_majorized_by_with(&lambda, &mu, tol).map_err(|_| SsrError::NotConvertible)? {
        return Err(SsrError::NotConvertible);
    }
    let d = src.nrows();
    let s_basis = complete_basis(&u_src.columns(0, rank).into_owned());
    let t_basis = complete_basis(&u_tgt.columns(0, rank).into_owned());
    // the source's null space goes to the target's unused directions
    let rest = t_basis.columns(rank, d - rank) * s_basis.columns(rank, d - rank).adjoint();
    let mut out = Vec::new();
    for (t, perm) in doubly_stochastic_decomposition(&lambda, &mu) {
        let mut m = CMatrix::<T>::zeros(d, d);
        for i in 0..rank {
            let coef = (t * mu[perm[i]] / lambda[i]).sqrt();
            if coef == T::zero() {
                continue;
            }
            m += t_basis.column(perm[i]) * s_basis.column(i).adjoint() * cplx(coef, T::zero());
        }
        m += &rest * cplx(t.sqrt(), T::zero());
        out.push((t, m));
    }
    Ok(out)
}

/// Builds a deterministic SSR-respecting protocol turning `source` into `target`.
pub fn build_protocol<T: Real>(source: &BlockedPureState<T>, target: &BlockedPureState<T>) -> Result<ConversionProtocol<T>> {
    build_protocol_with(source, target, &Tolerances::of::<T>())
}

pub fn build_protocol_with<T: Real>(
    source: &BlockedPureState<T>,
    target: &BlockedPureState<T>,
    tol: &Tolerances,
) -> Result<ConversionProtocol<T>> {
    if source.n_total() != target.n_total() || source.alice() != target.alice() || source.bob() != target.bob() {
        return Err(SsrError::NotConvertible);
    }
    let alice = source.alice().clone();
    let src_w = source.sector_weights();
    let tgt_w = target.sector_weights();
    let zero_w = lit::<T>(tol.zero);

    let mut per_sector: BTreeMap<usize, SectorOutcomes<T>> = BTreeMap::new();
    for (n, d) in alice.sectors() {
        let ws = src_w.get(&n).copied().unwrap_or(T::zero());
        let wt = tgt_w.get(&n).copied().unwrap_or(T::zero());
        if (ws - wt).abs() > lit(tol.majorization) {
            return Err(SsrError::NotConvertible);
        }
        let outcomes = if ws > zero_w {
            nielsen_sector(source.block(n).expect("weighted block"), target.block(n).expect("weighted block"), ws, tol)?
        } else {
            vec![(T::one(), identity(d))]
        };
        per_sector.insert(n, outcomes);
    }

    // Common refinement of the per-sector outcome distributions on [0, 1].
    let mut cuts: Vec<T> = vec![T::zero(), T::one()];
    let mut cumulative: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for (&n, outs) in &per_sector {
        let total = outs.iter().fold(T::zero(), |a, (t, _)| a + *t);
        let mut acc = T::zero();
        let mut c = Vec::with_capacity(outs.len());
        for (i, (t, _)) in outs.iter().enumerate() {
            acc += *t / total;
            let edge = if i + 1 == outs.len() { T::one() } else { acc };
            c.push(edge);
            cuts.push(edge);
        }
        cumulative.insert(n, c);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cuts.dedup();

    let mut elements = Vec::new();
    let mut actions = Vec::new();
    let half = lit::<T>(0.5);
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= T::zero() {
            continue;
        }
        let mid = (w[0] + w[1]) * half;
        let mut sectors = BTreeMap::new();
        let mut bob_correction = BTreeMap::new();
        for (&n, outs) in &per_sector {
            let c = &cumulative[&n];
            let j = c.iter().position(|&edge| mid < edge).unwrap_or(outs.len() - 1);
            let (t, m) = &outs[j];
            let scaled = m * cplx((len / *t).sqrt(), T::zero());
            if let (Some(b), Some(goal)) = (source.block(n), target.block(n)) {
                let post = &scaled * b;
                // Bob acts on columns: post * U^T ≈ sqrt(len) * goal
                let w = procrustes(&post, goal);
                bob_correction.insert(source.n_total() - n, w.transpose());
            }
            sectors.insert(n, scaled);
        }
        elements.push(PovmElement::new(sectors));
        actions.push(OutcomeAction { target: 0, bob_correction });
    }
    let povm = LocalPovm::new_with(alice, elements, &Tolerances { completeness: tol.completeness.max(1e-9), ..*tol })?;
    Ok(ConversionProtocol { povm, actions })
}
