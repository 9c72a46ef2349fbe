//! Majorization and the sector-wise convertibility criterion.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, SsrError};
use crate::schmidt::{SchmidtBlocks, SchmidtSector};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::tol::Tolerances;

fn sorted_desc<T: Real>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `min_k (sum_{i<=k} y_i - sum_{i<=k} x_i)` over the nonincreasing
/// rearrangements, zero-padded to equal length.
pub fn partial_sum_slack<T: Real>(x: &[T], y: &[T]) -> T {
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let len = xs.len().max(ys.len());
    let (mut sx, mut sy) = (T::zero(), T::zero());
    let mut slack: Option<T> = None;
    for k in 0..len {
        sx += xs.get(k).copied().unwrap_or(T::zero());
        sy += ys.get(k).copied().unwrap_or(T::zero());
        let d = sy - sx;
        slack = Some(slack.map_or(d, |s: T| s.min(d)));
    }
    slack.unwrap_or(T::zero())
}

/// `x ≺ y`: `y` majorizes `x`.
///
/// Totals must agree within the majorization tolerance, otherwise
/// [`SsrError::TotalMismatch`].
pub fn is_majorized_by<T: Real>(x: &[T], y: &[T]) -> Result<bool> {
    is_majorized_by_with(x, y, &Tolerances::of::<T>())
}

pub fn is_majorized_by_with<T: Real>(x: &[T], y: &[T], tol: &Tolerances) -> Result<bool> {
    let tx = x.iter().fold(T::zero(), |a, &v| a + v);
    let ty = y.iter().fold(T::zero(), |a, &v| a + v);
    if (to_f64(tx) - to_f64(ty)).abs() > tol.majorization {
        return Err(SsrError::TotalMismatch(to_f64(tx), to_f64(ty)));
    }
    Ok(partial_sum_slack(x, y) >= -lit::<T>(tol.majorization))
}

/// One branch of a multi-outcome conversion: target Schmidt data with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionTarget<T: Real> {
    pub prob: T,
    pub blocks: SchmidtBlocks<T>,
}

/// Outcome of the criterion in one local-number sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorVerdict {
    pub n: usize,
    pub source_weight: f64,
    pub target_weight: f64,
    /// Worst partial-sum margin (explicit spectra).
    pub partial_sum_slack: Option<f64>,
    /// `ln rank(source) - ln rank(target)` when the source sector is uniform.
    pub ln_rank_margin: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvertibilityReport {
    pub convertible: bool,
    pub sectors: Vec<SectorVerdict>,
}

/// Criterion for turning a source into the ensemble `{p_α, φ_α}`: in every
/// sector the source spectrum is majorized by the probability-weighted sum of
/// the (sorted) target spectra, and sector weights agree.
pub fn ssr_convertible<T: Real>(source: &SchmidtBlocks<T>, targets: &[ConversionTarget<T>]) -> bool {
    convertibility_report(source, targets).convertible
}

pub fn convertibility_report<T: Real>(source: &SchmidtBlocks<T>, targets: &[ConversionTarget<T>]) -> ConvertibilityReport {
    convertibility_report_with(source, targets, &Tolerances::of::<T>())
}

pub fn convertibility_report_with<T: Real>(
    source: &SchmidtBlocks<T>,
    targets: &[ConversionTarget<T>],
    tol: &Tolerances,
) -> ConvertibilityReport {
    let mut keys: BTreeSet<usize> = source.sectors.keys().copied().collect();
    for t in targets {
        keys.extend(t.blocks.sectors.keys().copied());
    }
    let sectors: Vec<SectorVerdict> = keys.into_iter().map(|n| sector_verdict(n, source, targets, tol)).collect();
    ConvertibilityReport { convertible: sectors.iter().all(|s| s.ok), sectors }
}

fn sector_verdict<T: Real>(n: usize, source: &SchmidtBlocks<T>, targets: &[ConversionTarget<T>], tol: &Tolerances) -> SectorVerdict {
    let src = source.sector(n);
    let source_weight = src.map_or(T::zero(), |s| s.weight());
    let target_weight = targets
        .iter()
        .fold(T::zero(), |a, t| a + t.prob * t.blocks.sector(n).map_or(T::zero(), |s| s.weight()));
    let mut verdict = SectorVerdict {
        n,
        source_weight: to_f64(source_weight),
        target_weight: to_f64(target_weight),
        partial_sum_slack: None,
        ln_rank_margin: None,
        ok: false,
    };
    if (verdict.source_weight - verdict.target_weight).abs() > tol.majorization {
        return verdict;
    }
    if verdict.source_weight <= tol.majorization {
        verdict.ok = true;
        return verdict;
    }
    let supp_cut = lit::<T>(tol.majorization);
    let target_ln_support = targets
        .iter()
        .filter_map(|t| t.blocks.sector(n).filter(|s| s.weight() > T::zero()).map(|s| ln_support(s, supp_cut)))
        .fold(None, |a: Option<T>, x| Some(a.map_or(x, |m| m.max(x))))
        .unwrap_or(T::zero());
    match src {
        Some(SchmidtSector::Uniform { ln_count, .. }) => {
            // A flat spectrum is majorized by anything of no larger support.
            let margin = *ln_count - target_ln_support;
            verdict.ln_rank_margin = Some(to_f64(margin));
            verdict.ok = to_f64(margin) >= -1e-9;
        }
        Some(SchmidtSector::Explicit(x)) => {
            let src_support = x.iter().filter(|&&v| v > supp_cut).count().max(1);
            let margin = from_usize::<T>(src_support).ln() - target_ln_support;
            if to_f64(margin) < -1e-9 {
                verdict.ln_rank_margin = Some(to_f64(margin));
                return verdict;
            }
            let mut y: Vec<T> = Vec::new();
            for t in targets {
                if let Some(s) = t.blocks.sector(n) {
                    let v = expand_sorted(s, x.len().max(1));
                    if y.len() < v.len() {
                        y.resize(v.len(), T::zero());
                    }
                    for (acc, val) in y.iter_mut().zip(v) {
                        *acc += t.prob * val;
                    }
                }
            }
            let slack = partial_sum_slack(x, &y);
            verdict.partial_sum_slack = Some(to_f64(slack));
            verdict.ok = to_f64(slack) >= -tol.majorization;
        }
        None => {}
    }
    verdict
}

/// Natural log of the number of coefficients above `cut`.
fn ln_support<T: Real>(s: &SchmidtSector<T>, cut: T) -> T {
    match s {
        SchmidtSector::Explicit(v) => from_usize::<T>(v.iter().filter(|&&x| x > cut).count().max(1)).ln(),
        SchmidtSector::Uniform { ln_count, .. } => *ln_count,
    }
}

/// Sorted coefficient vector; uniform sectors are materialized and must be
/// small (callers check support against `limit` first).
fn expand_sorted<T: Real>(s: &SchmidtSector<T>, limit: usize) -> Vec<T> {
    match s {
        SchmidtSector::Explicit(v) => sorted_desc(v),
        SchmidtSector::Uniform { ln_count, weight } => {
            let count = to_f64(ln_count.exp()).round().max(1.0) as usize;
            let count = count.min(limit.max(1));
            vec![*weight / from_usize::<T>(count); count]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn basic_majorization() {
        assert!(is_majorized_by(&[0.5, 0.5], &[1.0]).unwrap());
        assert!(!is_majorized_by(&[1.0], &[0.5, 0.5]).unwrap());
        let x = [0.4, 0.35, 0.25];
        assert!(is_majorized_by(&x, &x).unwrap());
        assert!(is_majorized_by(&[0.25, 0.25, 0.5], &[0.6, 0.4]).unwrap());
    }

    #[test]
    fn total_mismatch_is_an_error() {
        assert!(matches!(is_majorized_by(&[0.5, 0.4], &[1.0]), Err(SsrError::TotalMismatch(..))));
    }

    fn explicit(v: Vec<(usize, Vec<f64>)>) -> SchmidtBlocks<f64> {
        SchmidtBlocks::explicit(v)
    }

    #[test]
    fn identical_source_and_target_convert() {
        let s = explicit(vec![(0, vec![0.3, 0.2]), (1, vec![0.5])]);
        assert!(ssr_convertible(&s, &[ConversionTarget { prob: 1.0, blocks: s.clone() }]));
    }

    #[test]
    fn sector_weights_must_match() {
        let s = explicit(vec![(0, vec![0.5]), (1, vec![0.5])]);
        let t = explicit(vec![(0, vec![0.25]), (1, vec![0.75])]);
        let rep = convertibility_report(&s, &[ConversionTarget { prob: 1.0, blocks: t }]);
        assert!(!rep.convertible);
        assert!(rep.sectors.iter().all(|v| !v.ok));
    }

    #[test]
    fn ensemble_targets_use_weighted_sum() {
        // source sector spectrum (0.5, 0.5) -> two product branches with equal weight
        let s = explicit(vec![(0, vec![0.5, 0.5])]);
        let prod = explicit(vec![(0, vec![1.0])]);
        let t = vec![
            ConversionTarget { prob: 0.5, blocks: prod.clone() },
            ConversionTarget { prob: 0.5, blocks: prod },
        ];
        assert!(ssr_convertible(&s, &t));
        // but a flat target cannot come from a concentrated source
        let flat = explicit(vec![(0, vec![0.25; 4])]);
        assert!(!ssr_convertible(&explicit(vec![(0, vec![1.0])]), &[ConversionTarget { prob: 1.0, blocks: flat }]));
    }

    #[test]
    fn uniform_sectors_compare_by_rank() {
        let big = (1u64 << 40) as f64;
        let mk = |ln_count: f64| SchmidtBlocks::new(BTreeMap::from([(3, SchmidtSector::Uniform { ln_count, weight: 1.0 })]));
        let to = |b: SchmidtBlocks<f64>| vec![ConversionTarget { prob: 1.0, blocks: b }];
        assert!(ssr_convertible(&mk(big.ln()), &to(mk(20.0f64 * 2f64.ln()))));
        assert!(!ssr_convertible(&mk(20.0f64 * 2f64.ln()), &to(mk(big.ln()))));
        // ln C(256,128) is far beyond any machine integer yet still comparable
        assert!(ssr_convertible(&mk(174.0), &to(mk(170.0))));
    }

    #[test]
    fn uniform_against_explicit() {
        let u = SchmidtBlocks::new(BTreeMap::from([(0, SchmidtSector::Uniform { ln_count: 4f64.ln(), weight: 1.0 })]));
        let e = explicit(vec![(0, vec![0.4, 0.3, 0.2, 0.1])]);
        assert!(ssr_convertible(&u, &[ConversionTarget { prob: 1.0, blocks: e.clone() }]));
        assert!(!ssr_convertible(&e, &[ConversionTarget { prob: 1.0, blocks: u }]));
    }
}
