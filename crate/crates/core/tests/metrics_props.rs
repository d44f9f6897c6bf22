mod common;

use common::*;
use geodisc::continuation::SolveConfig;
use geodisc::domain::DomainSpec;
use geodisc::metrics::{ball_kobayashi, ball_lempert, kobayashi_royden, lempert_distance};
use geodisc::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolveConfig {
    SolveConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ball_metric_matches_closed_form(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = DomainSpec::ball(2);
        let z = random_point(&mut rng, &ball, 0.6);
        let v: Vec<C64> = unit_vector(&mut rng, 2).iter().map(|a| a * 0.7).collect();
        let s = kobayashi_royden(&ball, &z, &v, &cfg()).unwrap();
        prop_assert!((s.result.value - ball_kobayashi(&z, &v)).abs() < 1e-8);
        prop_assert!(s.result.certified);
    }

    #[test]
    fn ellipsoid_lies_between_balls(seed in 0u64..10_000) {
        // B_2 ⊆ E(1, 2) ⊆ 2 B_2
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = DomainSpec::ball(2);
        let dom = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let z = random_point(&mut rng, &ball, 0.6);
        let w = random_point(&mut rng, &ball, 0.6);
        let s = lempert_distance(&dom, &z, &w, &cfg()).unwrap();
        let half = |p: &[C64]| -> Vec<C64> { p.iter().map(|a| a * 0.5).collect() };
        let outer = ball_lempert(&half(&z), &half(&w));
        let inner = ball_lempert(&z, &w);
        prop_assert!(outer <= s.result.value + 1e-9);
        prop_assert!(s.result.value <= inner + 1e-9);
    }
}

#[test]
fn metric_is_homogeneous_in_the_direction() {
    let dom = DomainSpec::ellipsoid(&[1.0, 1.2]).unwrap();
    let z = [c(0.2, -0.1), c(0.1, 0.3)];
    let v = [c(0.3, 0.1), c(-0.2, 0.4)];
    let a = kobayashi_royden(&dom, &z, &v, &cfg()).unwrap().result.value;
    let s = c(0.0, 2.5);
    let sv: Vec<C64> = v.iter().map(|x| x * s).collect();
    let b = kobayashi_royden(&dom, &z, &sv, &cfg()).unwrap().result.value;
    assert!((b - 2.5 * a).abs() < 1e-9 * b);
}

#[test]
fn lempert_function_satisfies_triangle_inequality() {
    let dom = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
    let p = [c(0.1, 0.0), c(0.2, 0.0)];
    let q = [c(-0.2, 0.1), c(0.0, 0.5)];
    let r = [c(0.3, -0.1), c(-0.4, 0.2)];
    let d = |a: &[C64], b: &[C64]| lempert_distance(&dom, a, b, &cfg()).unwrap().result.value;
    assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9);
}

#[test]
fn result_serializes_all_certificates() {
    let ball = DomainSpec::ball(2);
    let s = lempert_distance(&ball, &[c(0.0, 0.0); 2], &[c(0.5, 0.0), c(0.0, 0.0)], &cfg()).unwrap();
    assert!((s.result.value - 0.5493061443340549).abs() < 1e-12);
    let json = serde_json::to_value(&s.result).unwrap();
    for key in ["value", "xi_or_lambda", "certificate_gap", "windings", "residuals", "certified"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}
