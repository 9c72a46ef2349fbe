//! The acceptance criteria as runnable checks, shared by the test suite and
//! the command-line `selftest`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::asymptotics::{dilute_check, distill_rate, entropy_variance_gap, gaussian_fit, n_copy_spectrum, qubit_corollary};
use crate::error::SsrError;
use crate::fock::random::{derive_seed, rng_from_seed};
use crate::fock::{random_povm, random_state, BlockedPureState, SectorSpace};
use crate::formation::{
    certificate_error, formation_measure, projection_entanglement_bound, random_mode_pairs, rank2_grid_oracle, spread_mixture,
    FormationOptions, Measure,
};
use crate::linalg::haar_unitary;
use crate::locc::{
    build_protocol, data_hiding_distance, distinguishing_gap, siv_monotone_check, ssr_convertible, ConversionTarget,
    ObservableClass,
};
use crate::schmidt::{binary_entropy, resource_pair, schmidt_block_decompose, siv_of_state};
use crate::scalar::{cplx, CMatrix};
use crate::teleport::{run_teleport, success_probability, success_probability_exact, TeleportInstance};

const ROOT_SEED: u64 = 0x5eed_2003;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {:<24} {:>8.3}s (limit {:>5.0}s)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

type Check = fn() -> (bool, String);

/// `(id, name, time limit in seconds, check)` for every criterion.
pub const CRITERIA: [(u8, &str, f64, Check); 10] = [
    (1, "siv-normalization", 1.0, siv_normalization),
    (2, "teleportation-formula", 30.0, teleportation_formula),
    (3, "siv-monotonicity", 60.0, siv_monotonicity),
    (4, "majorization-protocol", 120.0, majorization_protocol),
    (5, "asymptotic-rate", 10.0, asymptotic_rate),
    (6, "data-hiding", 10.0, data_hiding),
    (7, "mixed-formation", 300.0, mixed_formation),
    (8, "projection-bound", 60.0, projection_bound),
    (9, "qubit-corollary", 5.0, qubit_corollary_check),
    (10, "additivity", 30.0, additivity),
];

pub fn run_criterion(id: u8) -> Option<CriterionReport> {
    CRITERIA.iter().find(|c| c.0 == id).map(|&(id, name, limit_seconds, check)| {
        let start = Instant::now();
        let (ok, detail) = check();
        let seconds = start.elapsed().as_secs_f64();
        CriterionReport { id, name, passed: ok && seconds <= limit_seconds, seconds, limit_seconds, detail }
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn qubit_pair(sign: f64) -> BlockedPureState<f64> {
    let q = SectorSpace::qubit_modes(1);
    let h = 0.5f64.sqrt();
    let b = |x: f64| CMatrix::from_element(1, 1, cplx(x, 0.0));
    BlockedPureState::new(1, q.clone(), q, BTreeMap::from([(0, b(h)), (1, b(sign * h))])).expect("unit norm")
}

/// `(|01,01> + |10,10>)/sqrt 2`: each party holds one particle in two modes.
pub fn constant_number_singlet() -> BlockedPureState<f64> {
    let q = SectorSpace::qubit_modes(2);
    let h = 0.5f64.sqrt();
    let m = CMatrix::from_fn(2, 2, |i, j| if i == j { cplx(h, 0.0) } else { cplx(0.0, 0.0) });
    BlockedPureState::new(2, q.clone(), q, BTreeMap::from([(1, m)])).expect("unit norm")
}

fn siv_normalization() -> (bool, String) {
    let v_pair = siv_of_state(&qubit_pair(1.0));
    let v_singlet = siv_of_state(&constant_number_singlet());
    let ok = (v_pair - 1.0).abs() <= 1e-12 && v_singlet.abs() <= 1e-12;
    (ok, format!("V(|01>+|10>) = {v_pair:.15}, V(|01,01>+|10,10>) = {v_singlet:.3e}"))
}

fn teleportation_formula() -> (bool, String) {
    let (mut worst_p, mut worst_f) = (0.0f64, 1.0f64);
    let mut runs = 0usize;
    for n in 0..=8usize {
        for m in n..=40usize {
            for trial in 0..100u64 {
                let seed = derive_seed(ROOT_SEED, ((n * 41 + m) as u64) << 8 | trial);
                let out = run_teleport(&TeleportInstance::<f64>::random(n, m, seed));
                worst_p = worst_p.max((success_probability_exact(&out) - success_probability::<f64>(n, m)).abs());
                for o in out.iter().filter(|o| o.success && o.prob > 0.0) {
                    worst_f = worst_f.min(o.fidelity);
                }
                runs += 1;
            }
        }
    }
    let ok = worst_p <= 1e-12 && worst_f >= 1.0 - 1e-10;
    (ok, format!("{runs} runs, max |P - (1 - N/(M+1))| = {worst_p:.2e}, min success fidelity = {worst_f:.15}"))
}

/// Random sector dimensions with total at most `max_total`.
fn random_space<R: Rng>(rng: &mut R, max_total: usize, max_sectors: usize) -> SectorSpace {
    loop {
        let len = rng.random_range(1..=max_sectors);
        let dims: Vec<usize> = (0..len).map(|_| rng.random_range(1..=3)).collect();
        if dims.iter().sum::<usize>() <= max_total {
            return SectorSpace::new(dims).expect("nonempty");
        }
    }
}

fn random_admissible_total<R: Rng>(rng: &mut R, a: &SectorSpace, b: &SectorSpace) -> usize {
    rng.random_range(0..=(a.n_max() + b.n_max()))
}

fn siv_monotonicity() -> (bool, String) {
    let mut rng = rng_from_seed(derive_seed(ROOT_SEED, 3));
    let mut worst = f64::INFINITY;
    let mut worst_prob = 0.0f64;
    for trial in 0..1000u64 {
        let a = random_space(&mut rng, 12, 5);
        let b = random_space(&mut rng, 12, 5);
        let n = random_admissible_total(&mut rng, &a, &b);
        let k = rng.random_range(1..=6);
        let s = random_state::<f64>(&a, &b, n, derive_seed(ROOT_SEED, 1000 + trial)).expect("every total is admissible");
        let povm = random_povm::<f64>(&a, k, derive_seed(ROOT_SEED, 5000 + trial)).expect("k >= 1");
        let c = siv_monotone_check(&s, &povm);
        worst = worst.min(c.rhs - c.lhs);
        let total: f64 = povm.elements().iter().map(|e| crate::locc::apply_povm_outcome(&s, e).map_or(0.0, |r| r.0)).sum();
        worst_prob = worst_prob.max((total - 1.0).abs());
    }
    let ok = worst >= -1e-9 && worst_prob <= 1e-10;
    (ok, format!("1000 pairs, min slack V/4 - lhs = {worst:.3e}, max |sum p - 1| = {worst_prob:.2e}"))
}

/// Random local unitaries on every sector of both parties.
fn scramble(state: &BlockedPureState<f64>, seed: u64) -> BlockedPureState<f64> {
    let mut rng = rng_from_seed(seed);
    let ua: BTreeMap<usize, CMatrix<f64>> = state.alice().sectors().map(|(n, d)| (n, haar_unitary(d, &mut rng))).collect();
    let ub: BTreeMap<usize, CMatrix<f64>> = state.bob().sectors().map(|(n, d)| (n, haar_unitary(d, &mut rng))).collect();
    state.apply_local(Some(&ua), Some(&ub))
}

/// Same sector weights, Schmidt vectors kept, coefficients pushed toward the largest.
fn concentrate(state: &BlockedPureState<f64>, t: f64) -> BlockedPureState<f64> {
    let blocks = state
        .blocks()
        .iter()
        .map(|(&n, x)| {
            let svd = x.clone().svd(true, true);
            let (u, vt) = (svd.u.expect("U"), svd.v_t.expect("V^T"));
            let w: f64 = svd.singular_values.iter().map(|s| s * s).sum();
            let mu: Vec<f64> =
                svd.singular_values.iter().enumerate().map(|(i, s)| (1.0 - t) * s * s + if i == 0 { t * w } else { 0.0 }).collect();
            let d = CMatrix::from_fn(mu.len(), mu.len(), |i, j| if i == j { cplx(mu[i].sqrt(), 0.0) } else { cplx(0.0, 0.0) });
            (n, u * d * vt)
        })
        .collect();
    BlockedPureState::normalized(state.n_total(), state.alice().clone(), state.bob().clone(), blocks).expect("nonzero")
}

/// Random amplitudes inside each of the source's blocks, rescaled to its sector weights.
fn reshuffle_within_sectors(state: &BlockedPureState<f64>, seed: u64) -> BlockedPureState<f64> {
    let fresh = random_state::<f64>(state.alice(), state.bob(), state.n_total(), seed).expect("admissible");
    let weights = state.sector_weights();
    let blocks = fresh
        .blocks()
        .iter()
        .filter_map(|(&n, x)| {
            let w = *weights.get(&n)?;
            let norm = x.norm_squared().sqrt();
            Some((n, x * cplx(w.sqrt() / norm, 0.0)))
        })
        .collect();
    BlockedPureState::normalized(state.n_total(), state.alice().clone(), state.bob().clone(), blocks).expect("nonzero")
}

fn global_dim(a: &SectorSpace, b: &SectorSpace, n: usize) -> usize {
    crate::fock::global_dim(a, b, n)
}

fn majorization_protocol() -> (bool, String) {
    let mut rng = rng_from_seed(derive_seed(ROOT_SEED, 4));
    let (mut yes, mut no, mut no_weights, mut no_refused) = (0, 0, 0, 0);
    let mut worst_fid = 1.0f64;
    let mut worst_complete = 0.0f64;
    let mut failures = Vec::new();
    let mut trial = 0u64;
    while yes + no < 200 {
        trial += 1;
        let a = random_space(&mut rng, 4, 3);
        let b = random_space(&mut rng, 4, 3);
        let n = random_admissible_total(&mut rng, &a, &b);
        if !(3..=8).contains(&global_dim(&a, &b, n)) {
            continue;
        }
        let source = random_state::<f64>(&a, &b, n, derive_seed(ROOT_SEED, 10_000 + trial)).expect("admissible");
        let seed = derive_seed(ROOT_SEED, 20_000 + trial);
        let target = match trial % 4 {
            0 => random_state::<f64>(&a, &b, n, seed).expect("admissible"),
            1 => reshuffle_within_sectors(&source, seed),
            2 => scramble(&concentrate(&source, rng.random_range(0.0..1.0)), seed),
            _ => scramble(&source, seed),
        };
        let (sb, tb) = (schmidt_block_decompose(&source), schmidt_block_decompose(&target));
        let verdict = ssr_convertible(&sb, &[ConversionTarget { prob: 1.0, blocks: tb.clone() }]);
        if verdict {
            yes += 1;
            match build_protocol(&source, &target) {
                Ok(p) => {
                    worst_complete = worst_complete.max(p.povm.completeness_residual());
                    let branches = p.execute(&source, std::slice::from_ref(&target));
                    let total: f64 = branches.iter().map(|b| b.prob).sum();
                    for br in &branches {
                        worst_fid = worst_fid.min(br.fidelity);
                    }
                    if (total - 1.0).abs() > 1e-9 {
                        failures.push(format!("trial {trial}: outcome probabilities sum to {total}"));
                    }
                    if resource_pair(&source).eoe < resource_pair(&target).eoe - 1e-9 {
                        failures.push(format!("trial {trial}: EoE increased"));
                    }
                }
                Err(e) => failures.push(format!("trial {trial}: protocol failed: {e}")),
            }
        } else {
            no += 1;
            let (ws, wt) = (sb.weights(), tb.weights());
            let weights_differ = ws.keys().chain(wt.keys()).any(|k| {
                (ws.get(k).copied().unwrap_or(0.0) - wt.get(k).copied().unwrap_or(0.0)).abs() > 1e-8
            });
            if weights_differ {
                no_weights += 1;
            } else if matches!(build_protocol(&source, &target), Err(SsrError::NotConvertible)) {
                no_refused += 1;
            } else {
                failures.push(format!("trial {trial}: rejected pair with equal weights was not refused"));
            }
        }
    }
    let ok = failures.is_empty() && worst_fid >= 1.0 - 1e-9 && worst_complete <= 1e-9 && yes > 0 && no > 0;
    let mut detail = format!(
        "{yes} convertible (min fidelity {worst_fid:.12}, max completeness residual {worst_complete:.1e}), \
         {no} not ({no_weights} sector weights differ, {no_refused} refused)"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    (ok, detail)
}

fn asymptotic_rate() -> (bool, String) {
    let h = binary_entropy(1.0 / 3.0);
    let mut rates = Vec::new();
    let mut all_ok = true;
    let mut notes = Vec::new();
    for n in [64usize, 128, 256] {
        let spec = n_copy_spectrum(1.0 / 3.0, n).expect("valid");
        let d = distill_rate(&spec, 3.0).expect("typical set");
        let dilute = dilute_check(&spec, 3.0, 0).expect("typical set");
        let g = gaussian_fit(&spec);
        let npq = n as f64 * (2.0 / 9.0);
        all_ok &= d.truncation_loss <= 0.01 && d.convertible && dilute && (g.variance - npq).abs() <= 1e-9;
        notes.push(format!("N={n}: rate {:.4} loss {:.1e} var-npq {:.1e}", d.ebits_per_copy, d.truncation_loss, g.variance - npq));
        rates.push(d.ebits_per_copy);
    }
    let monotone = rates.windows(2).all(|w| w[0] <= w[1]);
    let gap = h - rates[2];
    let ok = all_ok && monotone && (0.0..=0.15).contains(&gap);
    (ok, format!("H(1/3) - rate(256) = {gap:.4}; {}", notes.join("; ")))
}

fn data_hiding() -> (bool, String) {
    let (plus, minus) = (qubit_pair(1.0), qubit_pair(-1.0));
    let hidden = data_hiding_distance(&plus, &minus, 500, derive_seed(ROOT_SEED, 6));
    let open = distinguishing_gap(&plus, &minus, ObservableClass::Unrestricted, 100, derive_seed(ROOT_SEED, 7));
    let ok = hidden <= 1e-10 && open > 0.4;
    (ok, format!("SSR-legal distance {hidden:.2e}, unrestricted distance {open:.4}"))
}

fn mixed_formation() -> (bool, String) {
    let rho = spread_mixture::<f64>();
    let opts = FormationOptions { seed: derive_seed(ROOT_SEED, 8), ..FormationOptions::default() };
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [Measure::Eoe, Measure::Siv] {
        match formation_measure(&rho, m, &opts) {
            Ok(r) => {
                let err = certificate_error(&rho, &r.best_ensemble).unwrap_or(f64::INFINITY);
                ok &= (r.value - 0.5).abs() <= 1e-6 && err <= 1e-8;
                notes.push(format!("{m:?} = {:.9} (certificate error {err:.1e})", r.value));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{m:?} failed: {e}"));
            }
        }
    }
    // rank-2 oracle on a random two-mode sector
    let q = SectorSpace::qubit_modes(2);
    let mix: Vec<(f64, BlockedPureState<f64>)> =
        (0..2).map(|i| (0.5 - 0.2 * i as f64 + 0.1, random_state(&q, &q, 2, derive_seed(ROOT_SEED, 80 + i)).expect("admissible"))).collect();
    let sample = crate::fock::BlockedDensity::from_ensemble(&mix).expect("valid");
    let k2 = FormationOptions { ensemble_size: Some(2), ..opts };
    for m in [Measure::Eoe, Measure::Siv] {
        let opt = formation_measure(&sample, m, &k2).map(|r| r.value);
        let grid = rank2_grid_oracle(&sample, 2, m, 200);
        match (opt, grid) {
            (Ok(o), Ok(g)) => {
                ok &= (o - g).abs() <= 1e-4;
                notes.push(format!("rank-2 {m:?}: optimizer {o:.7} grid {g:.7}"));
            }
            _ => {
                ok = false;
                notes.push(format!("rank-2 {m:?}: evaluation failed"));
            }
        }
    }
    (ok, notes.join("; "))
}

fn projection_bound() -> (bool, String) {
    let mut checked = 0;
    let mut worst_gap = f64::INFINITY;
    let mut max_rank_excess = i64::MIN;
    let mut ok = true;
    for n in 1..=6usize {
        for trial in 0..5u64 {
            let pairs = random_mode_pairs::<f64>(n, derive_seed(ROOT_SEED, 900 + 10 * n as u64 + trial));
            for sector in 0..=2 * n {
                match projection_entanglement_bound(&pairs, sector) {
                    Ok(r) => {
                        ok &= r.holds(n);
                        worst_gap = worst_gap.min(r.bound - r.eoe);
                        max_rank_excess = max_rank_excess.max(r.schmidt_rank as i64 - (n as i64 + 1));
                        checked += 1;
                    }
                    Err(e) => {
                        ok = false;
                        return (ok, format!("N={n} sector {sector}: {e}"));
                    }
                }
            }
        }
    }
    (ok, format!("{checked} projections, min log2(N+1) - EoE = {worst_gap:.4}, max rank - (N+1) = {max_rank_excess}"))
}

fn qubit_corollary_check() -> (bool, String) {
    let mut rng = rng_from_seed(derive_seed(ROOT_SEED, 9));
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let p: f64 = rng.random_range(0.0..1.0);
        if p > 0.0 {
            worst = worst.min(entropy_variance_gap(p));
        }
    }
    let at_half = entropy_variance_gap(0.5f64).abs();
    let singlet = resource_pair(&constant_number_singlet());
    let spread = resource_pair(&qubit_pair(1.0));
    let mut worst_acc = 0.0f64;
    for &(p0, n) in &[(0.1, 10usize), (1.0 / 3.0, 64), (0.45, 256), (0.5, 7)] {
        let c = qubit_corollary(p0, n, (singlet.eoe, singlet.siv), (spread.eoe, spread.siv));
        worst_acc = worst_acc.max((c.total_eoe - c.expected_eoe).abs()).max((c.total_siv - c.expected_siv).abs());
    }
    let ok = worst >= 0.0 && at_half <= 1e-12 && worst_acc <= 1e-9;
    (ok, format!("min H(p) - 4p(1-p) = {worst:.3e}, gap at 1/2 = {at_half:.1e}, accounting error {worst_acc:.1e}"))
}

fn additivity() -> (bool, String) {
    let mut rng = rng_from_seed(derive_seed(ROOT_SEED, 10));
    let (mut de, mut dv) = (0.0f64, 0.0f64);
    for trial in 0..100u64 {
        let draw = |rng: &mut rand_chacha::ChaCha8Rng, idx: u64| {
            let a = random_space(rng, 5, 3);
            let b = random_space(rng, 5, 3);
            let n = random_admissible_total(rng, &a, &b);
            random_state::<f64>(&a, &b, n, derive_seed(ROOT_SEED, idx)).expect("admissible")
        };
        let s1 = draw(&mut rng, 30_000 + 2 * trial);
        let s2 = draw(&mut rng, 30_001 + 2 * trial);
        let (r1, r2, r12) = (resource_pair(&s1), resource_pair(&s2), resource_pair(&s1.tensor(&s2)));
        de = de.max((r12.eoe - r1.eoe - r2.eoe).abs());
        dv = dv.max((r12.siv - r1.siv - r2.siv).abs());
    }
    let ok = de <= 1e-9 && dv <= 1e-9;
    (ok, format!("100 pairs, max EoE defect {de:.2e}, max SiV defect {dv:.2e}"))
}
