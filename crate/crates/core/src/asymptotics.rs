//! N-copy spectra of a two-coefficient state, typical-set truncation, and
//! the distillation/dilution bookkeeping built on them.
//!
//! Nothing here touches state vectors. Copies are described by their
//! local-number distribution `c_n` and block sizes `C(N, n)`, both kept as
//! natural logarithms so that `N` in the hundreds stays finite.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::locc::{ssr_convertible, ConversionTarget};
use crate::schmidt::{binary_entropy, shannon_entropy, siv_of_distribution, SchmidtBlocks, SchmidtSector};
use crate::scalar::{from_usize, lit, log2, to_f64, Real};

/// Local-number spectrum of `N` copies of `sqrt(p1)|0>|1> + sqrt(p0)|1>|0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopySpectrum<T: Real> {
    n_copies: usize,
    p0: T,
    ln_weights: Vec<T>,
    ln_counts: Vec<T>,
}

impl<T: Real> CopySpectrum<T> {
    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn p0(&self) -> T {
        self.p0
    }

    /// `ln c_n` for `n = 0..=N`.
    pub fn ln_weights(&self) -> &[T] {
        &self.ln_weights
    }

    /// `ln C(N, n)` for `n = 0..=N`.
    pub fn ln_counts(&self) -> &[T] {
        &self.ln_counts
    }

    pub fn weights(&self) -> Vec<T> {
        self.ln_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn log2_counts(&self) -> Vec<T> {
        self.ln_counts.iter().map(|&c| c / T::ln_2()).collect()
    }

    /// Every sector is maximally entangled with `C(N, n)` terms.
    pub fn schmidt_blocks(&self) -> SchmidtBlocks<T> {
        SchmidtBlocks::new(
            (0..=self.n_copies)
                .map(|n| (n, SchmidtSector::Uniform { ln_count: self.ln_counts[n], weight: self.ln_weights[n].exp() }))
                .collect(),
        )
    }

    pub fn siv(&self) -> T {
        siv_of_distribution(&self.weights())
    }

    /// Rows `(n, c_n, log2 C(N, n))`.
    pub fn rows(&self) -> Vec<(usize, T, T)> {
        (0..=self.n_copies).map(|n| (n, self.ln_weights[n].exp(), self.ln_counts[n] / T::ln_2())).collect()
    }

    fn sigma(&self) -> T {
        (from_usize::<T>(self.n_copies) * self.p0 * (T::one() - self.p0)).sqrt()
    }
}

/// `ln C(N, n)` for all `n`, from cumulative `ln k!`.
fn ln_binomials<T: Real>(n_copies: usize) -> Vec<T> {
    let mut ln_fact = Vec::with_capacity(n_copies + 1);
    let mut acc = 0.0f64;
    ln_fact.push(0.0);
    for k in 1..=n_copies {
        acc += (k as f64).ln();
        ln_fact.push(acc);
    }
    (0..=n_copies).map(|n| lit(ln_fact[n_copies] - ln_fact[n] - ln_fact[n_copies - n])).collect()
}

pub fn n_copy_spectrum<T: Real>(p0: T, n_copies: usize) -> Result<CopySpectrum<T>> {
    if !(p0 > T::zero() && p0 < T::one()) {
        return Err(SsrError::Domain(format!("p0 must lie in (0, 1), got {}", p0)));
    }
    if n_copies == 0 {
        return Err(SsrError::Domain("at least one copy is required".into()));
    }
    let ln_counts = ln_binomials::<T>(n_copies);
    let (lp0, lp1) = (p0.ln(), (T::one() - p0).ln());
    let ln_weights = (0..=n_copies)
        .map(|n| from_usize::<T>(n) * lp0 + from_usize::<T>(n_copies - n) * lp1 + ln_counts[n])
        .collect();
    Ok(CopySpectrum { n_copies, p0, ln_weights, ln_counts })
}

/// Sectors within `delta` standard deviations of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSet<T: Real> {
    /// Smallest member sector.
    pub lo: usize,
    /// Largest member sector (inclusive).
    pub hi: usize,
    pub mass: T,
    pub min_log2_count: T,
    pub max_log2_count: T,
}

impl<T: Real> TypicalSet<T> {
    pub fn contains(&self, n: usize) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `S = {n : |n - N p0| <= delta sigma}`, or the nearest sector to the mean when
/// that interval holds no integer.
pub fn typical_set<T: Real>(spec: &CopySpectrum<T>, delta: T) -> TypicalSet<T> {
    let mean = from_usize::<T>(spec.n_copies) * spec.p0;
    let half = delta * spec.sigma();
    let n_top = from_usize::<T>(spec.n_copies);
    let lo_f = (mean - half).ceil().max(T::zero());
    let hi_f = (mean + half).floor().min(n_top);
    let (lo, hi) = if lo_f <= hi_f {
        (to_f64(lo_f) as usize, to_f64(hi_f) as usize)
    } else {
        let c = to_f64(mean.round()) as usize;
        (c, c)
    };
    let log2c = spec.log2_counts();
    let range = lo..=hi;
    let mass = log_sum_exp(&spec.ln_weights[range.clone()]).exp();
    let min_log2_count = log2c[range.clone()].iter().copied().fold(log2c[lo], |a, b| a.min(b));
    let max_log2_count = log2c[range].iter().copied().fold(log2c[lo], |a, b| a.max(b));
    TypicalSet { lo, hi, mass, min_log2_count, max_log2_count }
}

fn log_sum_exp<T: Real>(v: &[T]) -> T {
    let top = v.iter().copied().fold(T::min_value().unwrap_or(lit(-1e300)), |a, b| a.max(b));
    top + v.iter().fold(T::zero(), |a, &x| a + (x - top).exp()).ln()
}

/// Renormalized weights `c~_n` on the typical set, indexed by sector.
fn truncated_weights<T: Real>(spec: &CopySpectrum<T>, set: &TypicalSet<T>) -> Result<BTreeMap<usize, T>> {
    if set.mass <= T::zero() {
        return Err(SsrError::EmptyTypicalSet);
    }
    let ln_mass = set.mass.ln();
    Ok((set.lo..=set.hi).map(|n| (n, (spec.ln_weights[n] - ln_mass).exp())).collect())
}

fn uniform_blocks<T: Real>(weights: &BTreeMap<usize, T>, ln_count: impl Fn(usize) -> T) -> SchmidtBlocks<T> {
    SchmidtBlocks::new(weights.iter().map(|(&n, &w)| (n, SchmidtSector::Uniform { ln_count: ln_count(n), weight: w })).collect())
}

/// Result of distilling the truncated N-copy state into ebits plus a remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distillation<T: Real> {
    pub n_copies: usize,
    /// Whole ebits extracted, `floor(min_S log2 C(N, n))`.
    pub ebits: usize,
    pub ebits_per_copy: T,
    /// SiV of the renormalized remainder `sum_n c~_n |n>|N-n>`.
    pub residual_siv: T,
    /// EoE of the same remainder, in bits.
    pub residual_eoe: T,
    pub truncation_loss: T,
    pub typical: TypicalSet<T>,
    /// Criterion verdict for source blocks to `ebits` ebits plus remainder.
    pub convertible: bool,
}

pub fn distill_rate<T: Real>(spec: &CopySpectrum<T>, delta: T) -> Result<Distillation<T>> {
    let typical = typical_set(spec, delta);
    let weights = truncated_weights(spec, &typical)?;
    let ebits = to_f64(typical.min_log2_count.floor()).max(0.0) as usize;
    let source = uniform_blocks(&weights, |n| spec.ln_counts[n]);
    let ln_target = from_usize::<T>(ebits) * T::ln_2();
    let target = uniform_blocks(&weights, |_| ln_target);
    let convertible = ssr_convertible(&source, &[ConversionTarget { prob: T::one(), blocks: target }]);
    let remainder: Vec<T> = weights.values().copied().collect();
    let mut padded = vec![T::zero(); spec.n_copies + 1];
    for (&n, &w) in &weights {
        padded[n] = w;
    }
    Ok(Distillation {
        n_copies: spec.n_copies,
        ebits,
        ebits_per_copy: from_usize::<T>(ebits) / from_usize::<T>(spec.n_copies),
        residual_siv: siv_of_distribution(&padded),
        residual_eoe: shannon_entropy(&remainder),
        truncation_loss: T::one() - typical.mass,
        typical,
        convertible,
    })
}

/// Whether `2^resource_bits` ebits, spread over the typical sectors with
/// weights `c~_n`, can be converted into the truncated N-copy blocks.
pub fn dilute_with_resource<T: Real>(spec: &CopySpectrum<T>, delta: T, resource_bits: usize) -> Result<bool> {
    let typical = typical_set(spec, delta);
    let weights = truncated_weights(spec, &typical)?;
    let ln_res = from_usize::<T>(resource_bits) * T::ln_2();
    let source = uniform_blocks(&weights, |_| ln_res);
    let target = uniform_blocks(&weights, |n| spec.ln_counts[n]);
    Ok(ssr_convertible(&source, &[ConversionTarget { prob: T::one(), blocks: target }]))
}

/// Dilution with `max_S ceil(log2 C(N, n)) + pad_bits` resource ebits.
pub fn dilute_check<T: Real>(spec: &CopySpectrum<T>, delta: T, pad_bits: usize) -> Result<bool> {
    let typical = typical_set(spec, delta);
    dilute_with_resource(spec, delta, dilution_bits(&typical) + pad_bits)
}

/// Smallest whole number of ebits covering every typical block.
pub fn dilution_bits<T: Real>(typical: &TypicalSet<T>) -> usize {
    // guard against log2 of an exact power of two landing a hair above the integer
    let x = to_f64(typical.max_log2_count);
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Exact moments of `c_n` and the largest pointwise gap to the matching normal density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit<T: Real> {
    pub mean: T,
    pub variance: T,
    pub max_abs_dev: T,
}

pub fn gaussian_fit<T: Real>(spec: &CopySpectrum<T>) -> GaussianFit<T> {
    let c = spec.weights();
    let total = c.iter().fold(T::zero(), |a, &w| a + w);
    let mean = c.iter().enumerate().fold(T::zero(), |a, (n, &w)| a + w * from_usize::<T>(n)) / total;
    let variance = c.iter().enumerate().fold(T::zero(), |a, (n, &w)| {
        let z = from_usize::<T>(n) - mean;
        a + w * z * z
    }) / total;
    let norm = T::one() / (lit::<T>(2.0) * T::pi() * variance).sqrt();
    let max_abs_dev = c.iter().enumerate().fold(T::zero(), |acc, (n, &w)| {
        let z = from_usize::<T>(n) - mean;
        let g = norm * (-(z * z) / (lit::<T>(2.0) * variance)).exp();
        acc.max((w - g).abs())
    });
    GaussianFit { mean, variance, max_abs_dev }
}

/// Resource bookkeeping for the qubit form of the reversible decomposition:
/// `N(E - V)` constant-number singlets plus `N V` pairs `|01> + |10>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryAccounting<T: Real> {
    pub singlets: T,
    pub spread_pairs: T,
    pub total_eoe: T,
    pub total_siv: T,
    pub expected_eoe: T,
    pub expected_siv: T,
}

/// `singlet` and `spread` are the `(EoE, SiV)` of the two building blocks.
pub fn qubit_corollary<T: Real>(p0: T, n_copies: usize, singlet: (T, T), spread: (T, T)) -> CorollaryAccounting<T> {
    let n = from_usize::<T>(n_copies);
    let e = binary_entropy(p0);
    let v = lit::<T>(4.0) * p0 * (T::one() - p0);
    let singlets = n * (e - v);
    let spread_pairs = n * v;
    CorollaryAccounting {
        singlets,
        spread_pairs,
        total_eoe: singlets * singlet.0 + spread_pairs * spread.0,
        total_siv: singlets * singlet.1 + spread_pairs * spread.1,
        expected_eoe: n * e,
        expected_siv: n * v,
    }
}

/// `H(p) - 4p(1-p)`; never negative.
pub fn entropy_variance_gap<T: Real>(p: T) -> T {
    binary_entropy(p) - lit::<T>(4.0) * p * (T::one() - p)
}

/// Upper bound on the remainder's entanglement, `log2 |S|`.
pub fn remainder_bound<T: Real>(typical: &TypicalSet<T>) -> T {
    log2(from_usize::<T>(typical.len()))
}
