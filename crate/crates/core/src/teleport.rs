//! Teleportation of a number-entangled state through the resource
//! `sum_i |i>|M-i> / sqrt(M+1)` when every party obeys the superselection rule.
//!
//! Registers are unary (a single mode holding `0..` particles): Alice owns the
//! input register `A` and resource half `Ā`, Bob owns `B`, and the passive
//! register `C` holds the partner of the input. The joint state is kept as a
//! sparse map over occupation tuples.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::fock::random::rng_from_seed;
use crate::linalg::gaussian_vector;
use crate::scalar::{cplx, czero, from_usize, lit, phase, to_f64, Complex, Real};
use crate::tol::Tolerances;

/// Input amplitudes `alpha_j` of `sum_j alpha_j |j>_A |N-j>_C` and the resource size `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportInstance<T: Real> {
    alpha: Vec<Complex<T>>,
    m_resource: usize,
}

impl<T: Real> TeleportInstance<T> {
    pub fn new(alpha: Vec<Complex<T>>, m_resource: usize) -> Result<Self> {
        if alpha.is_empty() {
            return Err(SsrError::Shape("alpha needs at least one amplitude".into()));
        }
        let norm: T = alpha.iter().fold(T::zero(), |a, x| a + x.norm_sqr());
        let dev = (to_f64(norm) - 1.0).abs();
        if dev > Tolerances::of::<T>().norm {
            return Err(SsrError::NotNormalized(dev));
        }
        Ok(Self { alpha, m_resource })
    }

    /// Haar-random input amplitudes for `N` particles.
    pub fn random(n: usize, m_resource: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let v = gaussian_vector::<T, _>(n + 1, &mut rng);
        let norm = v.iter().fold(T::zero(), |a, x| a + x.norm_sqr()).sqrt();
        let alpha = v.iter().map(|x| x.unscale(norm)).collect();
        Self { alpha, m_resource }
    }

    /// Number of particles shared between `A` and `C`.
    pub fn n(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn m_resource(&self) -> usize {
        self.m_resource
    }

    pub fn alpha(&self) -> &[Complex<T>] {
        &self.alpha
    }
}

/// `(n_low, n_high)`: range of input numbers `l` compatible with Alice's total `n`.
pub fn sector_range(n: usize, n_input: usize, m_resource: usize) -> (usize, usize) {
    (n.saturating_sub(m_resource), n.min(n_input))
}

/// Alice's measurement basis in her total-number sector `n`, as amplitudes over
/// `l` (the `A` occupation; `Ā` holds `n - l`). Entry `k` is `chi_k`.
pub fn bell_basis<T: Real>(n: usize, n_input: usize, m_resource: usize) -> Vec<BTreeMap<(usize, usize), Complex<T>>> {
    let (lo, hi) = sector_range(n, n_input, m_resource);
    if lo > hi {
        return Vec::new();
    }
    let d = hi - lo + 1;
    let norm = T::one() / from_usize::<T>(d).sqrt();
    (0..d)
        .map(|k| {
            (lo..=hi)
                .map(|l| {
                    let angle = lit::<T>(2.0) * T::pi() * from_usize::<T>(l * k % d) / from_usize::<T>(d);
                    ((l, n - l), phase(angle) * norm)
                })
                .collect()
        })
        .collect()
}

/// Bob's phase correction for outcome `(n, k)`, diagonal over `b = 0..=M`.
pub fn bob_correction<T: Real>(n: usize, k: usize, n_input: usize, m_resource: usize) -> Vec<Complex<T>> {
    let (lo, hi) = sector_range(n, n_input, m_resource);
    let d = (hi + 1).saturating_sub(lo).max(1);
    (0..=m_resource)
        .map(|b| {
            let shifted = (b + n) as i64 - m_resource as i64;
            let r = shifted.rem_euclid(d as i64) as usize * k % d;
            phase(lit::<T>(2.0) * T::pi() * from_usize::<T>(r) / from_usize::<T>(d))
        })
        .collect()
}

/// One measurement outcome of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportOutcome<T: Real> {
    pub n: usize,
    pub k: usize,
    pub prob: T,
    /// Overlap of the corrected Bob–Charlie state with the ideal output.
    pub fidelity: T,
    pub success: bool,
    #[serde(skip)]
    pub output: BTreeMap<(usize, usize), Complex<T>>,
}

type JointState<T> = BTreeMap<usize, Vec<((usize, usize, usize, usize), Complex<T>)>>;

/// Initial joint state over `(a, ā, b, c)`, grouped by Alice's total `a + ā`.
fn joint_state<T: Real>(inst: &TeleportInstance<T>) -> JointState<T> {
    let (n_in, m) = (inst.n(), inst.m_resource);
    let r = T::one() / from_usize::<T>(m + 1).sqrt();
    let mut psi: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for (j, &a) in inst.alpha.iter().enumerate() {
        for i in 0..=m {
            psi.entry(j + i).or_default().push(((j, i, m - i, n_in - j), a * r));
        }
    }
    psi
}

/// Enumerates every outcome `(n, k)` with Bob's correction and relabeling applied.
pub fn run_teleport<T: Real>(inst: &TeleportInstance<T>) -> Vec<TeleportOutcome<T>> {
    let (n_in, m) = (inst.n(), inst.m_resource);
    let psi = joint_state(inst);
    let ideal: BTreeMap<(usize, usize), Complex<T>> = inst.alpha.iter().enumerate().map(|(j, &a)| ((j, n_in - j), a)).collect();
    let mut out = Vec::new();
    for n in 0..=(n_in + m) {
        let (lo, hi) = sector_range(n, n_in, m);
        let terms = psi.get(&n).map_or(&[][..], Vec::as_slice);
        for (k, chi) in bell_basis::<T>(n, n_in, m).into_iter().enumerate() {
            // <chi| on Alice's registers
            let mut bc: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
            for &((a, abar, b, c), amp) in terms {
                if let Some(w) = chi.get(&(a, abar)) {
                    *bc.entry((b, c)).or_insert_with(czero) += w.conj() * amp;
                }
            }
            let prob = bc.values().fold(T::zero(), |s, x| s + x.norm_sqr());
            let corr = bob_correction::<T>(n, k, n_in, m);
            let scale = if prob > T::zero() { T::one() / prob.sqrt() } else { T::zero() };
            let output: BTreeMap<(usize, usize), Complex<T>> = bc
                .into_iter()
                .filter(|(_, v)| v.norm_sqr() > T::zero())
                .map(|((b, c), v)| ((b + n - m, c), v * corr[b] * scale))
                .collect();
            let overlap = output.iter().fold(czero::<T>(), |s, (key, v)| s + ideal.get(key).map_or(czero(), |x| x.conj() * v));
            out.push(TeleportOutcome { n, k, prob, fidelity: overlap.norm_sqr(), success: lo == 0 && hi == n_in, output });
        }
    }
    out
}

/// Total probability of the successful outcomes.
pub fn success_probability_exact<T: Real>(outcomes: &[TeleportOutcome<T>]) -> T {
    outcomes.iter().filter(|o| o.success).fold(T::zero(), |a, o| a + o.prob)
}

/// `max(0, 1 - N/(M+1))`.
pub fn success_probability<T: Real>(n: usize, m: usize) -> T {
    (T::one() - from_usize::<T>(n) / from_usize::<T>(m + 1)).max(T::zero())
}

/// Smallest `M` with success probability at least `target` for each `N`.
pub fn scaling_table(n_list: &[usize], target: f64) -> Result<Vec<(usize, usize)>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(SsrError::Domain(format!("target success must lie in (0, 1), got {target}")));
    }
    let meets = |n: usize, m: usize| success_probability::<f64>(n, m) >= target - 1e-12;
    Ok(n_list
        .iter()
        .map(|&n| {
            let mut m = (n as f64 / (1.0 - target) - 1.0).ceil().max(0.0) as usize;
            while !meets(n, m) {
                m += 1;
            }
            while m > 0 && meets(n, m - 1) {
                m -= 1;
            }
            (n, m)
        })
        .collect())
}

/// Samples `shots` outcomes from the exact distribution and returns the success frequency.
pub fn sample_success<T: Real>(outcomes: &[TeleportOutcome<T>], shots: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let probs: Vec<f64> = outcomes.iter().map(|o| to_f64(o.prob)).collect();
    let mut hits = 0usize;
    for _ in 0..shots {
        let mut u: f64 = rng.random_range(0.0..1.0);
        let mut pick = outcomes.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                pick = i;
                break;
            }
            u -= p;
        }
        hits += usize::from(outcomes[pick].success);
    }
    hits as f64 / shots.max(1) as f64
}

/// Every `chi_k^(n)` lies in Alice's number sector `n`.
pub fn alice_basis_is_sector_diagonal(n_input: usize, m_resource: usize) -> bool {
    (0..=(n_input + m_resource)).all(|n| {
        bell_basis::<f64>(n, n_input, m_resource)
            .iter()
            .all(|chi| chi.keys().all(|&(a, abar)| a + abar == n && a <= n_input && abar <= m_resource))
    })
}

/// The pure input state `sum_j alpha_j |j>|N-j>` restricted to `lo..=hi`, renormalized.
pub fn truncated_input<T: Real>(alpha: &[Complex<T>], lo: usize, hi: usize) -> BTreeMap<(usize, usize), Complex<T>> {
    let n_in = alpha.len() - 1;
    let norm = (lo..=hi).fold(T::zero(), |a, j| a + alpha[j].norm_sqr()).sqrt();
    (lo..=hi).map(|j| ((j, n_in - j), alpha[j].unscale(norm))).collect()
}

/// `alpha_j = 1/sqrt(N+1)` for all `j`.
pub fn uniform_alpha<T: Real>(n: usize) -> Vec<Complex<T>> {
    vec![cplx(T::one() / from_usize::<T>(n + 1).sqrt(), T::zero()); n + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_sector() {
        let b = bell_basis::<f64>(0, 2, 3);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].keys().copied().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn two_vector_basis() {
        let b = bell_basis::<f64>(1, 1, 1);
        assert_eq!(b.len(), 2);
        let h = 0.5f64.sqrt();
        assert!((b[0][&(0, 1)] - cplx(h, 0.0)).norm() < 1e-15 && (b[0][&(1, 0)] - cplx(h, 0.0)).norm() < 1e-15);
        assert!((b[1][&(0, 1)] - cplx(h, 0.0)).norm() < 1e-15 && (b[1][&(1, 0)] + cplx(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in 0..=8 {
            let b = bell_basis::<f64>(n, 3, 5);
            let (lo, hi) = sector_range(n, 3, 5);
            assert_eq!(b.len(), hi - lo + 1);
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let g: Complex<f64> = x.iter().map(|(k, v)| y.get(k).map_or(czero(), |w| v.conj() * w)).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - cplx(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let inst = TeleportInstance::new(uniform_alpha::<f64>(1), 1).unwrap();
        assert!((success_probability_exact(&run_teleport(&inst)) - 0.5).abs() < 1e-14);
        for seed in 0..5 {
            let inst = TeleportInstance::<f64>::random(2, 3, seed);
            assert!((success_probability_exact(&run_teleport(&inst)) - 0.5).abs() < 1e-14);
        }
        let inst = TeleportInstance::new(uniform_alpha::<f64>(0), 4).unwrap();
        let out = run_teleport(&inst);
        assert!(out.iter().all(|o| o.success && (o.prob == 0.0 || (o.fidelity - 1.0).abs() < 1e-14)));
        assert!((success_probability_exact(&out) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn formula_values() {
        assert_eq!(success_probability::<f64>(1, 3), 0.75);
        assert!((success_probability::<f64>(4, 4) - 0.2).abs() < 1e-15);
        assert_eq!(success_probability::<f64>(5, 2), 0.0);
        let out = run_teleport(&TeleportInstance::<f64>::random(5, 2, 1));
        assert_eq!(success_probability_exact(&out), 0.0);
    }

    #[test]
    fn enumeration_is_complete_and_k_independent() {
        let inst = TeleportInstance::<f64>::random(3, 4, 9);
        let out = run_teleport(&inst);
        assert!((out.iter().map(|o| o.prob).sum::<f64>() - 1.0).abs() < 1e-12);
        for n in 0..=7 {
            let (lo, hi) = sector_range(n, 3, 4);
            let sector: Vec<_> = out.iter().filter(|o| o.n == n).collect();
            let want: f64 = (lo..=hi).map(|j| inst.alpha()[j].norm_sqr()).sum::<f64>() / 5.0;
            assert!((sector.iter().map(|o| o.prob).sum::<f64>() - want).abs() < 1e-12);
            for o in &sector {
                assert!((o.prob - want / sector.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn failures_carry_truncated_input() {
        let inst = TeleportInstance::<f64>::random(4, 3, 2);
        for o in run_teleport(&inst).iter().filter(|o| !o.success && o.prob > 1e-14) {
            let (lo, hi) = sector_range(o.n, 4, 3);
            let want = truncated_input(inst.alpha(), lo, hi);
            assert_eq!(o.output.len(), want.len());
            for (key, v) in &want {
                assert!((o.output[key] - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn scaling() {
        assert_eq!(scaling_table(&[10], 0.99).unwrap(), vec![(10, 999)]);
        assert_eq!(scaling_table(&[5], 0.5).unwrap(), vec![(5, 9)]);
        assert_eq!(scaling_table(&[0], 0.9).unwrap(), vec![(0, 0)]);
        assert!(scaling_table(&[1], 1.0).is_err());
        for (n, m) in scaling_table(&[1, 2, 3, 4], 0.6).unwrap() {
            let exact = success_probability_exact(&run_teleport(&TeleportInstance::<f64>::random(n, m, 0)));
            assert!(exact >= 0.6 - 1e-12);
            if m > 0 {
                let below = success_probability_exact(&run_teleport(&TeleportInstance::<f64>::random(n, m - 1, 0)));
                assert!(below < 0.6);
            }
        }
    }

    #[test]
    fn operators_respect_superselection() {
        assert!(alice_basis_is_sector_diagonal(4, 6));
        let corr = bob_correction::<f64>(3, 1, 2, 4);
        assert_eq!(corr.len(), 5);
        assert!(corr.iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn sampling_tracks_exact_value() {
        let out = run_teleport(&TeleportInstance::<f64>::random(2, 5, 4));
        let f = sample_success(&out, 20000, 1);
        assert!((f - 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn rejects_unnormalized_input() {
        assert!(matches!(TeleportInstance::new(vec![cplx(1.0f64, 0.0); 2], 1), Err(SsrError::NotNormalized(_))));
    }
}
