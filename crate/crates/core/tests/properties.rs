//! Randomized invariants across modules.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use ssr_core::asymptotics::{distill_rate, n_copy_spectrum};
use ssr_core::fock::{random_povm, random_state, BlockedDensity, SectorSpace};
use ssr_core::locc::{
    apply_povm_outcome, convertibility_report, doubly_stochastic_decomposition, is_majorized_by, siv_monotone_check,
    ssr_convertible, ConversionTarget,
};
use ssr_core::schmidt::{resource_pair, schmidt_block_decompose, siv_of_state, SchmidtBlocks};
use ssr_core::teleport::{run_teleport, success_probability, success_probability_exact, TeleportInstance};

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=4)
}

fn probability_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        let mut v: Vec<f64> = v.into_iter().map(|x| x / s).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn majorization_is_reflexive(x in probability_vector(5)) {
        prop_assert!(is_majorized_by(&x, &x).unwrap());
    }

    #[test]
    fn uniform_is_majorized_by_everything(x in probability_vector(4)) {
        prop_assert!(is_majorized_by(&[0.25; 4], &x).unwrap());
        prop_assert!(is_majorized_by(&x, &[1.0]).unwrap());
    }

    #[test]
    fn majorization_is_transitive(x in probability_vector(4), y in probability_vector(4), z in probability_vector(4)) {
        if is_majorized_by(&x, &y).unwrap() && is_majorized_by(&y, &z).unwrap() {
            prop_assert!(is_majorized_by(&x, &z).unwrap());
        }
    }

    #[test]
    fn t_transform_decomposition_reproduces_source(mu in probability_vector(5), mix in 0.0f64..1.0) {
        // lambda = mix * mu + (1 - mix) * uniform is always majorized by mu
        let lambda: Vec<f64> = mu.iter().map(|m| mix * m + (1.0 - mix) * 0.2).collect();
        let terms = doubly_stochastic_decomposition(&lambda, &mu);
        assert_abs_diff_eq!(terms.iter().map(|t| t.0).sum::<f64>(), 1.0, epsilon = 1e-12);
        for i in 0..5 {
            let v: f64 = terms.iter().map(|(t, p)| t * mu[p[i]]).sum();
            assert_abs_diff_eq!(v, lambda[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn siv_is_symmetric_between_parties(a in dims(), b in dims(), n in 0usize..6, seed in any::<u64>()) {
        let (a, b) = (SectorSpace::new(a).unwrap(), SectorSpace::new(b).unwrap());
        if let Ok(s) = random_state::<f64>(&a, &b, n, seed) {
            let (r, w) = (resource_pair(&s), resource_pair(&s.swap_parties()));
            assert_abs_diff_eq!(r.siv, w.siv, epsilon = 1e-12);
            assert_abs_diff_eq!(r.eoe, w.eoe, epsilon = 1e-12);
        }
    }

    #[test]
    fn convertibility_is_reflexive_and_preserves_weights(a in dims(), b in dims(), n in 0usize..6, seed in any::<u64>()) {
        let (a, b) = (SectorSpace::new(a).unwrap(), SectorSpace::new(b).unwrap());
        if let Ok(s) = random_state::<f64>(&a, &b, n, seed) {
            let blocks = schmidt_block_decompose(&s);
            let to_self = [ConversionTarget { prob: 1.0, blocks: blocks.clone() }];
            prop_assert!(ssr_convertible(&blocks, &to_self));
            if let Ok(t) = random_state::<f64>(&a, &b, n, seed ^ 1) {
                let tb = schmidt_block_decompose(&t);
                let to_other = [ConversionTarget { prob: 1.0, blocks: tb }];
                if ssr_convertible(&blocks, &to_other) {
                    prop_assert!(resource_pair(&s).eoe >= resource_pair(&t).eoe - 1e-9);
                    assert_abs_diff_eq!(siv_of_state(&s), siv_of_state(&t), epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn povm_outcomes_are_complete_and_monotone(a in dims(), b in dims(), n in 0usize..6, k in 1usize..5, seed in any::<u64>()) {
        let (a, b) = (SectorSpace::new(a).unwrap(), SectorSpace::new(b).unwrap());
        if let Ok(s) = random_state::<f64>(&a, &b, n, seed) {
            let povm = random_povm::<f64>(&a, k, seed ^ 7).unwrap();
            let total: f64 = povm.elements().iter().map(|e| apply_povm_outcome(&s, e).map_or(0.0, |r| r.0)).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
            prop_assert!(siv_monotone_check(&s, &povm).ok);
        }
    }

    #[test]
    fn teleport_matches_formula(n in 0usize..6, m in 0usize..12, seed in any::<u64>()) {
        let out = run_teleport(&TeleportInstance::<f64>::random(n, m, seed));
        assert_abs_diff_eq!(success_probability_exact(&out), success_probability::<f64>(n, m), epsilon = 1e-12);
        assert_abs_diff_eq!(out.iter().map(|o| o.prob).sum::<f64>(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn distillation_never_beats_entropy(p0 in 0.05f64..0.95, copies in 8usize..200) {
        let d = distill_rate(&n_copy_spectrum(p0, copies).unwrap(), 3.0).unwrap();
        let h = -(p0 * p0.log2() + (1.0 - p0) * (1.0 - p0).log2());
        prop_assert!(d.ebits_per_copy <= h + 1e-9);
        prop_assert!(d.residual_siv <= 4.0 * copies as f64 * p0 * (1.0 - p0) + 1e-9);
        prop_assert!(d.convertible);
    }
}

#[test]
fn tensor_of_pure_densities_is_pure_density_of_tensor() {
    let a = SectorSpace::new(vec![1, 2]).unwrap();
    let b = SectorSpace::new(vec![2, 1]).unwrap();
    let s1 = random_state::<f64>(&a, &b, 1, 1).unwrap();
    let s2 = random_state::<f64>(&a, &b, 2, 2).unwrap();
    let lhs = BlockedDensity::from_pure(&s1).tensor(&BlockedDensity::from_pure(&s2));
    let rhs = BlockedDensity::from_pure(&s1.tensor(&s2));
    assert!(lhs.trace_distance(&rhs) < 1e-12);
}

#[test]
fn weight_mismatch_is_reported_per_sector() {
    let s = SchmidtBlocks::explicit(vec![(0, vec![0.5]), (1, vec![0.5])]);
    let t = SchmidtBlocks::explicit(vec![(0, vec![0.25]), (1, vec![0.75])]);
    let rep = convertibility_report(&s, &[ConversionTarget { prob: 1.0, blocks: t }]);
    assert!(!rep.convertible);
    assert_eq!(rep.sectors.len(), 2);
    assert!(rep.sectors.iter().all(|v| (v.source_weight - v.target_weight).abs() == 0.25));
}
