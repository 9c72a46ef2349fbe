//! Formation measures of mixed states under the superselection rule.
//!
//! Admissible ensembles never mix global number sectors, so the minimum
//! splits into one independent search per sector. Inside a sector every
//! ensemble of `K` members is `psi~_i = sum_r U_ir sqrt(lambda_r) e_r` for a
//! `K x r` isometry `U`; the search is a restarted local descent over `U`.
//! Reported values are upper bounds backed by the returned ensemble.

mod projection;
mod search;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::fock::random::{derive_seed, rng_from_seed};
use crate::fock::{BlockedDensity, BlockedPureState, SectorSlot};
use crate::linalg::{haar_unitary, hermitian_eigen, squared_singular_values};
use crate::schmidt::{resource_pair, siv_of_state};
use crate::scalar::{cplx, czero, from_usize, lit, phase, to_f64, xlog2x_neg, CMatrix, CVector, Real};
use crate::tol::Tolerances;
use search::{MemberCost, Search};

pub use projection::{project_product_state, projection_entanglement_bound, random_mode_pairs, ModePair, ProjectionBound};

/// Pure-state measure being averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Eoe,
    Siv,
}

impl Measure {
    pub fn of<T: Real>(self, state: &BlockedPureState<T>) -> T {
        match self {
            Measure::Eoe => resource_pair(state).eoe,
            Measure::Siv => siv_of_state(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormationOptions {
    /// Members per sector; `None` uses `rank^2`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Maximum number of full pairwise sweeps per restart.
    pub max_iters: usize,
    /// Stop when a sweep improves the sector value by less than this.
    pub tol: f64,
}

impl Default for FormationOptions {
    fn default() -> Self {
        FormationOptions { ensemble_size: None, restarts: 32, seed: 0, max_iters: 100, tol: 1e-10 }
    }
}

/// Pure states with probabilities, each confined to one global sector.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDecomposition<T: Real> {
    pub members: Vec<(T, BlockedPureState<T>)>,
}

impl<T: Real> EnsembleDecomposition<T> {
    pub fn reconstruct(&self) -> Result<BlockedDensity<T>> {
        BlockedDensity::from_ensemble(&self.members)
    }

    /// `sum_i p_i f(psi_i)`.
    pub fn average(&self, measure: Measure) -> T {
        self.members.iter().fold(T::zero(), |a, (p, s)| a + *p * measure.of(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorFormation<T: Real> {
    pub n_total: usize,
    pub weight: T,
    pub rank: usize,
    pub ensemble_size: usize,
    /// Average over the sector's members, normalized to the sector.
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormationResult<T: Real> {
    pub value: T,
    pub best_ensemble: EnsembleDecomposition<T>,
    pub restarts: usize,
    pub converged: bool,
    pub sectors: Vec<SectorFormation<T>>,
}

/// Weighted eigenvectors `sqrt(lambda_r) e_r` of a unit-trace Hermitian matrix, as columns.
fn weighted_eigenbasis<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let cut = lit::<T>(Tolerances::of::<T>().singular);
    let r = vals.iter().filter(|&&v| v > cut).count();
    CMatrix::from_fn(m.nrows(), r, |i, j| vecs[(i, j)] * cplx(vals[j].sqrt(), T::zero()))
}

/// EoE or SiV of an unnormalized vector over a global-sector layout, times its norm squared.
fn sector_cost<T: Real>(slots: &[SectorSlot], measure: Measure, v: &CVector<T>) -> T {
    let w = v.norm_squared();
    if w <= T::zero() {
        return T::zero();
    }
    match measure {
        Measure::Eoe => slots.iter().fold(T::zero(), |acc, s| {
            let x = CMatrix::from_fn(s.dim_alice, s.dim_bob, |i, j| v[s.offset + i * s.dim_bob + j]);
            squared_singular_values(&x).into_iter().fold(acc, |a, sv| a + xlog2x_neg(sv / w))
        }) * w,
        Measure::Siv => {
            let (mut m1, mut m2) = (T::zero(), T::zero());
            for s in slots {
                let pn = (0..s.dim_alice * s.dim_bob).fold(T::zero(), |a, k| a + v[s.offset + k].norm_sqr()) / w;
                let n = from_usize::<T>(s.n_alice);
                m1 += n * pn;
                m2 += n * n * pn;
            }
            lit::<T>(4.0) * (m2 - m1 * m1) * w
        }
    }
}

/// Entropy of entanglement of an unnormalized vector on the full product space, times its norm squared.
fn full_space_eoe<T: Real>(da: usize, db: usize, v: &CVector<T>) -> T {
    let w = v.norm_squared();
    if w <= T::zero() {
        return T::zero();
    }
    let x = CMatrix::from_fn(da, db, |i, j| v[i * db + j]);
    squared_singular_values(&x).into_iter().fold(T::zero(), |a, sv| a + xlog2x_neg(sv / w)) * w
}

/// `U = [I_r; 0]`, the eigen-ensemble.
fn eigen_start<T: Real>(k: usize, r: usize) -> CMatrix<T> {
    CMatrix::from_fn(k, r, |i, j| if i == j { cplx(T::one(), T::zero()) } else { czero() })
}

struct SectorRun<T: Real> {
    value: T,
    iso: CMatrix<T>,
    converged: bool,
}

/// Best of `restarts` random starts (plus optional warm starts); ties go to the lowest index.
fn best_of<T: Real>(
    search: &Search<'_, T>,
    k: usize,
    restarts: usize,
    seed: u64,
    warm: Vec<CMatrix<T>>,
) -> SectorRun<T> {
    let r = search.basis.ncols();
    let starts = restarts.max(1) + warm.len();
    let runs: Vec<SectorRun<T>> = (0..starts)
        .into_par_iter()
        .map(|idx| {
            let start = if idx < warm.len() {
                warm[idx].clone()
            } else {
                let mut rng = rng_from_seed(derive_seed(seed, idx as u64));
                haar_unitary::<T, _>(k, &mut rng).columns(0, r).into_owned()
            };
            let found = search.run(start);
            SectorRun { value: found.value, iso: found.iso, converged: found.converged }
        })
        .collect();
    runs.into_iter()
        .reduce(|best, next| if next.value < best.value { next } else { best })
        .expect("at least one start")
}

/// `min sum_i p_i f(psi_i)` over ensembles of `rho` whose members each carry a
/// definite total particle number.
pub fn formation_measure<T: Real>(rho: &BlockedDensity<T>, measure: Measure, opts: &FormationOptions) -> Result<FormationResult<T>> {
    let (alice, bob) = (rho.alice().clone(), rho.bob().clone());
    let mut members = Vec::new();
    let mut sectors = Vec::new();
    let mut converged = true;
    let min_p = lit::<T>(Tolerances::of::<T>().zero);
    for (&n_total, sec) in rho.sectors() {
        if sec.weight <= T::zero() {
            continue;
        }
        let basis = weighted_eigenbasis(&sec.matrix);
        let rank = basis.ncols();
        let k = opts.ensemble_size.unwrap_or(rank * rank).max(1);
        if k < rank {
            return Err(SsrError::RankExceedsK { rank, k });
        }
        let slots = rho.layout(n_total);
        let cost = |v: &CVector<T>| sector_cost(&slots, measure, v);
        let search = Search { basis: &basis, cost: &cost as &MemberCost<T>, max_sweeps: opts.max_iters, tol: lit(opts.tol) };
        let run = if rank <= 1 {
            let iso = CMatrix::from_fn(1, rank, |_, _| cplx(T::one(), T::zero()));
            SectorRun { value: search.total(&iso), iso, converged: true }
        } else {
            best_of(&search, k, opts.restarts, derive_seed(opts.seed, n_total as u64), vec![eigen_start(k, rank)])
        };
        converged &= run.converged;
        let mut sector_value = T::zero();
        for i in 0..run.iso.nrows() {
            let v = search.member(&run.iso, i);
            let p = v.norm_squared();
            if p <= min_p {
                continue;
            }
            let state = BlockedPureState::from_sector_vector(n_total, alice.clone(), bob.clone(), v.as_slice())?;
            sector_value += p * measure.of(&state);
            members.push((sec.weight * p, state));
        }
        sectors.push(SectorFormation { n_total, weight: sec.weight, rank, ensemble_size: run.iso.nrows(), value: sector_value });
    }
    let best_ensemble = EnsembleDecomposition { members };
    Ok(FormationResult { value: best_ensemble.average(measure), best_ensemble, restarts: opts.restarts, converged, sectors })
}

/// Embeds a single-sector pure state as a vector over the full product basis.
fn full_vector<T: Real>(state: &BlockedPureState<T>) -> CVector<T> {
    let dense = state.to_dense();
    let db = dense.ncols();
    CVector::from_fn(dense.nrows() * db, |k, _| dense[(k / db, k % db)])
}

/// Entanglement of formation without the superselection rule: members may be
/// any pure states on the full product space. `warm` ensembles are used as
/// additional starting points.
pub fn unrestricted_eof<T: Real>(rho: &BlockedDensity<T>, opts: &FormationOptions, warm: &[&EnsembleDecomposition<T>]) -> Result<(T, bool)> {
    let (da, db) = (rho.alice().total_dim(), rho.bob().total_dim());
    let full = rho.to_full();
    let (vals, vecs) = hermitian_eigen(&full);
    let cut = lit::<T>(Tolerances::of::<T>().singular);
    let rank = vals.iter().filter(|&&v| v > cut).count();
    let basis = CMatrix::from_fn(full.nrows(), rank, |i, j| vecs[(i, j)] * cplx(vals[j].sqrt(), T::zero()));
    let mut k = opts.ensemble_size.unwrap_or(rank * rank).max(1);
    if k < rank {
        return Err(SsrError::RankExceedsK { rank, k });
    }
    k = warm.iter().fold(k, |a, e| a.max(e.members.len()));
    let cost = |v: &CVector<T>| full_space_eoe(da, db, v);
    let search = Search { basis: &basis, cost: &cost as &MemberCost<T>, max_sweeps: opts.max_iters, tol: lit(opts.tol) };
    // U_ir = <e_r|psi~_i> / sqrt(lambda_r)
    let starts: Vec<CMatrix<T>> = warm
        .iter()
        .map(|e| {
            let mut iso = CMatrix::zeros(k, rank);
            for (i, (p, s)) in e.members.iter().enumerate() {
                let v = full_vector(s) * cplx(p.sqrt(), T::zero());
                for r in 0..rank {
                    let e_r = vecs.column(r);
                    iso[(i, r)] = e_r.dotc(&v) * cplx(T::one() / vals[r].sqrt(), T::zero());
                }
            }
            iso
        })
        .collect();
    if rank <= 1 {
        let iso = CMatrix::from_fn(1, rank, |_, _| cplx(T::one(), T::zero()));
        return Ok((search.total(&iso), true));
    }
    let mut starts = starts;
    starts.push(eigen_start(k, rank));
    let run = best_of(&search, k, opts.restarts, opts.seed, starts);
    Ok((run.value, run.converged))
}

/// Exhaustive scan of two-member ensembles of a rank-2 sector.
///
/// Up to irrelevant member phases the mixing unitary is
/// `[[cos t, e^{ip} sin t], [-e^{-ip} sin t, cos t]]` with `t` in `[0, pi/2]`
/// and `p` in `[0, 2 pi)`; each range is sampled at `resolution` points.
pub fn rank2_grid_oracle<T: Real>(rho: &BlockedDensity<T>, n_total: usize, measure: Measure, resolution: usize) -> Result<T> {
    let sec = rho.sectors().get(&n_total).ok_or(SsrError::EmptySector { n_total })?;
    let basis = weighted_eigenbasis(&sec.matrix);
    if basis.ncols() != 2 {
        return Err(SsrError::Domain(format!("sector {n_total} has rank {}, not 2", basis.ncols())));
    }
    let slots = rho.layout(n_total);
    let res = resolution.max(2);
    let mut best: Option<T> = None;
    for a in 0..res {
        let t = T::frac_pi_2() * from_usize::<T>(a) / from_usize::<T>(res - 1);
        let (c, s) = (cplx(t.cos(), T::zero()), cplx(t.sin(), T::zero()));
        for b in 0..res {
            let e = phase(lit::<T>(2.0) * T::pi() * from_usize::<T>(b) / from_usize::<T>(res));
            let u0 = basis.column(0) * c + basis.column(1) * (s * e);
            let u1 = basis.column(1) * c - basis.column(0) * (s * e.conj());
            let v = sector_cost(&slots, measure, &u0) + sector_cost(&slots, measure, &u1);
            best = Some(best.map_or(v, |x: T| x.min(v)));
        }
    }
    Ok(best.expect("nonempty grid") * sec.weight)
}

/// `V_F` of `rho` and of `rho ⊗ rho`, and their ratio `v2 / (2 v1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditivityProbe<T: Real> {
    pub v1: T,
    pub v2: T,
    pub ratio: T,
}

pub fn vf_additivity_probe<T: Real>(rho: &BlockedDensity<T>, opts: &FormationOptions) -> Result<AdditivityProbe<T>> {
    let v1 = formation_measure(rho, Measure::Siv, opts)?.value;
    let v2 = formation_measure(&rho.tensor(rho), Measure::Siv, opts)?.value;
    let ratio = if v1 > T::zero() { v2 / (lit::<T>(2.0) * v1) } else if v2 <= T::zero() { T::one() } else { T::zero() / T::zero() };
    Ok(AdditivityProbe { v1, v2, ratio })
}

/// Weighted mixture `1/4 (|00><00| + |11><11|) + 1/2 |s><s|` with
/// `s = (|01> + |10>)/sqrt 2`, one mode per party.
pub fn spread_mixture<T: Real>() -> BlockedDensity<T> {
    let q = crate::fock::SectorSpace::qubit_modes(1);
    let one = |w: f64| DensityOne::<T>::new(w);
    let half = lit::<T>(0.5);
    let mut sectors = BTreeMap::new();
    sectors.insert(0, one(0.25).sector(1));
    sectors.insert(2, one(0.25).sector(1));
    let m = CMatrix::from_fn(2, 2, |_, _| cplx(half, T::zero()));
    sectors.insert(1, crate::fock::DensitySector { weight: half, matrix: m });
    BlockedDensity::new(q.clone(), q, sectors).expect("valid mixture")
}

struct DensityOne<T: Real>(T);

impl<T: Real> DensityOne<T> {
    fn new(w: f64) -> Self {
        DensityOne(lit(w))
    }

    fn sector(&self, d: usize) -> crate::fock::DensitySector<T> {
        crate::fock::DensitySector { weight: self.0, matrix: CMatrix::from_fn(d, d, |i, j| if i == j { cplx(T::one(), T::zero()) } else { czero() }) }
    }
}

/// Largest reconstruction error of an ensemble against `rho`, as a trace distance.
pub fn certificate_error<T: Real>(rho: &BlockedDensity<T>, ensemble: &EnsembleDecomposition<T>) -> Result<f64> {
    Ok(to_f64(ensemble.reconstruct()?.trace_distance(rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::random::random_state;
    use crate::fock::SectorSpace;

    fn quick() -> FormationOptions {
        FormationOptions { restarts: 4, ..FormationOptions::default() }
    }

    fn random_mixture(alice: &SectorSpace, bob: &SectorSpace, n_total: usize, rank: usize, seed: u64) -> BlockedDensity<f64> {
        let members: Vec<(f64, BlockedPureState<f64>)> = (0..rank)
            .map(|i| (1.0 + i as f64, random_state(alice, bob, n_total, derive_seed(seed, i as u64)).unwrap()))
            .collect();
        let total: f64 = members.iter().map(|m| m.0).sum();
        BlockedDensity::from_ensemble(&members.into_iter().map(|(p, s)| (p / total, s)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn spread_mixture_values() {
        let rho = spread_mixture::<f64>();
        for m in [Measure::Eoe, Measure::Siv] {
            let r = formation_measure(&rho, m, &FormationOptions::default()).unwrap();
            assert!((r.value - 0.5).abs() < 1e-12, "{m:?} {}", r.value);
            assert!(certificate_error(&rho, &r.best_ensemble).unwrap() < 1e-12);
        }
    }

    #[test]
    fn pure_state_gives_its_own_measure() {
        let a = SectorSpace::new(vec![1, 2, 1]).unwrap();
        let s = random_state::<f64>(&a, &a, 2, 5).unwrap();
        let rho = BlockedDensity::from_pure(&s);
        for k in [None, Some(1), Some(3)] {
            let opts = FormationOptions { ensemble_size: k, ..quick() };
            assert!((formation_measure(&rho, Measure::Eoe, &opts).unwrap().value - resource_pair(&s).eoe).abs() < 1e-10);
            assert!((formation_measure(&rho, Measure::Siv, &opts).unwrap().value - siv_of_state(&s)).abs() < 1e-10);
        }
    }

    #[test]
    fn definite_number_products_cost_nothing() {
        let q = SectorSpace::qubit_modes(1);
        let members: Vec<(f64, BlockedPureState<f64>)> = vec![
            (0.5, BlockedPureState::basis(1, q.clone(), q.clone(), (0, 0), 0).unwrap()),
            (0.3, BlockedPureState::basis(1, q.clone(), q.clone(), (1, 0), 0).unwrap()),
            (0.2, BlockedPureState::basis(2, q.clone(), q.clone(), (1, 0), 0).unwrap()),
        ];
        let rho = BlockedDensity::from_ensemble(&members).unwrap();
        for m in [Measure::Eoe, Measure::Siv] {
            assert!(formation_measure(&rho, m, &quick()).unwrap().value.abs() < 1e-12);
        }
        let p = vf_additivity_probe(&rho, &quick()).unwrap();
        assert!(p.v1.abs() < 1e-12 && p.v2.abs() < 1e-12);
    }

    #[test]
    fn certificate_is_consistent() {
        let a = SectorSpace::new(vec![1, 2, 1]).unwrap();
        let rho = random_mixture(&a, &a, 2, 2, 11);
        for m in [Measure::Eoe, Measure::Siv] {
            let r = formation_measure(&rho, m, &quick()).unwrap();
            assert!(certificate_error(&rho, &r.best_ensemble).unwrap() < 1e-8);
            assert!((r.best_ensemble.average(m) - r.value).abs() < 1e-10);
            assert!(r.best_ensemble.members.iter().all(|(p, _)| *p > 0.0));
        }
    }

    #[test]
    fn rank_exceeds_k() {
        let a = SectorSpace::new(vec![1, 2, 1]).unwrap();
        let rho = random_mixture(&a, &a, 2, 3, 1);
        let opts = FormationOptions { ensemble_size: Some(2), ..quick() };
        assert_eq!(formation_measure(&rho, Measure::Eoe, &opts).unwrap_err(), SsrError::RankExceedsK { rank: 3, k: 2 });
    }

    #[test]
    fn grid_oracle_matches_optimizer() {
        let q = SectorSpace::qubit_modes(2);
        let rho = random_mixture(&q, &q, 2, 2, 7);
        for m in [Measure::Eoe, Measure::Siv] {
            let opts = FormationOptions { ensemble_size: Some(2), restarts: 8, ..FormationOptions::default() };
            let opt = formation_measure(&rho, m, &opts).unwrap().value;
            let grid = rank2_grid_oracle(&rho, 2, m, 200).unwrap();
            assert!((opt - grid).abs() < 1e-4, "{m:?}: {opt} vs {grid}");
            assert!(opt <= grid + 1e-9);
        }
    }

    #[test]
    fn larger_ensembles_do_not_hurt() {
        let q = SectorSpace::qubit_modes(2);
        let rho = random_mixture(&q, &q, 2, 2, 3);
        let mut prev = f64::INFINITY;
        for k in 2..=4 {
            let v = formation_measure(&rho, Measure::Eoe, &FormationOptions { ensemble_size: Some(k), restarts: 8, ..FormationOptions::default() })
                .unwrap()
                .value;
            assert!(v <= prev + 1e-8, "K={k}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn superselection_never_lowers_eof() {
        let q = SectorSpace::qubit_modes(1);
        let a = random_state::<f64>(&q, &q, 1, 1).unwrap();
        let b = BlockedPureState::basis(0, q.clone(), q.clone(), (0, 0), 0).unwrap();
        let rho = BlockedDensity::from_ensemble(&[(0.6, a), (0.4, b)]).unwrap();
        let opts = FormationOptions { max_iters: 20, ..quick() };
        let ssr = formation_measure(&rho, Measure::Eoe, &opts).unwrap();
        let (free, _) = unrestricted_eof(&rho, &opts, &[&ssr.best_ensemble]).unwrap();
        assert!(free <= ssr.value + 1e-9);
        let spread = spread_mixture::<f64>();
        let ssr = formation_measure(&spread, Measure::Eoe, &opts).unwrap();
        let (free, _) = unrestricted_eof(&spread, &opts, &[&ssr.best_ensemble]).unwrap();
        // separable without the rule
        assert!(free < 1e-6, "{free}");
    }

    #[test]
    fn additivity_on_the_spread_mixture() {
        let p = vf_additivity_probe(&spread_mixture::<f64>(), &quick()).unwrap();
        assert!((p.ratio - 1.0).abs() < 0.02, "{p:?}");
    }

    #[test]
    fn additivity_on_pure_states() {
        let a = SectorSpace::new(vec![1, 1, 1]).unwrap();
        let s = random_state::<f64>(&a, &a, 2, 8).unwrap();
        let p = vf_additivity_probe(&BlockedDensity::from_pure(&s), &quick()).unwrap();
        assert!((p.ratio - 1.0).abs() < 1e-9);
    }
}
