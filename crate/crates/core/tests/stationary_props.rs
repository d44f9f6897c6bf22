mod common;

use common::*;
use geodisc::continuation::{ball_seed, SolveConfig};
use geodisc::disc::FourierDisc;
use geodisc::domain::{DefiningFunction, DomainSpec, Monomial};
use geodisc::metrics::{left_inverse, lempert_distance, poincare};
use geodisc::stationary::{
    compose_mobius, newton_solve, residual, round_trip_error, solve_linearized_at_axis, verify_e,
    Constraint, DiscBundle, LinearMode, LinearizedData, NewtonConfig, StationaryDisc,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(|z|^2 - 1)/2 + (a/2) Re z2^2 + (b/2) x1 |z2|^2`, which keeps the axis disc in normal position.
fn perturbed_ball(a: f64, b: f64) -> DefiningFunction {
    let mono = |c: f64, p: [u32; 4]| Monomial { c, p: p.to_vec() };
    DefiningFunction::new(
        2,
        vec![
            mono(0.5, [2, 0, 0, 0]),
            mono(0.5, [0, 2, 0, 0]),
            mono(0.5 + a / 2.0, [0, 0, 2, 0]),
            mono(0.5 - a / 2.0, [0, 0, 0, 2]),
            mono(-0.5, [0, 0, 0, 0]),
            mono(b / 2.0, [1, 0, 2, 0]),
            mono(b / 2.0, [1, 0, 0, 2]),
        ],
    )
    .unwrap()
}

#[test]
fn reparametrized_disc_stays_stationary() {
    let dom = DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap();
    let z = [c(0.1, 0.0), c(0.2, 0.1)];
    let w = [c(-0.2, 0.1), c(0.5, -0.3)];
    let s = lempert_distance(&dom, &z, &w, &SolveConfig::default()).unwrap();
    let b = c(0.3, -0.2);
    let g = compose_mobius(&s.disc.f, b);
    let moved = StationaryDisc::from_boundary_map(&dom.r, g, s.disc.mode, s.disc.multiplier).unwrap();
    let probe = moved.f.eval_unchecked(c(0.0, 0.0));
    let rep = verify_e(&dom, &moved, &probe);
    assert!(rep.passed, "{:?}", rep.failures);
    // the pair keeps its Poincaré distance in the new parametrization
    let zi = dom.to_internal(&z);
    let wi = dom.to_internal(&w);
    let d = poincare(left_inverse(&moved, &zi).unwrap(), left_inverse(&moved, &wi).unwrap());
    assert!((d - s.result.value).abs() < 1e-9);
}

#[test]
fn perturbed_seed_returns_to_solution() {
    let cons = Constraint::two_point(vec![c(0.2, 0.1), c(0.0, -0.1)], vec![c(-0.3, 0.0), c(0.4, 0.2)]);
    let exact = ball_seed(&cons, 32).unwrap();
    let mut seed = exact.clone();
    seed.f.coeff_mut(2)[1] += c(0.01, -0.02);
    seed.multiplier *= 1.01;
    let ball = DefiningFunction::ball(2);
    let (out, iters) = newton_solve(&ball, &cons, &seed, &NewtonConfig::default()).unwrap();
    assert!(iters > 0);
    assert!(out.residual_norm < 1e-10);
    assert!((out.multiplier - exact.multiplier).abs() < 1e-10);
}

#[test]
fn bundle_round_trip() {
    let cons = Constraint::direction(vec![c(0.1, 0.2), c(-0.3, 0.0)], vec![c(1.0, 0.5), c(0.0, 1.0)]);
    let d = ball_seed(&cons, 64).unwrap();
    let text = serde_json::to_string(&d.to_bundle(None)).unwrap();
    let back = StationaryDisc::from_bundle(&serde_json::from_str::<DiscBundle>(&text).unwrap()).unwrap();
    assert_eq!(back.f.coeffs, d.f.coeffs);
    assert_eq!(back.q.coeffs, d.q.coeffs);
    assert_eq!(back.multiplier, d.multiplier);
}

#[test]
fn linearization_round_trip_off_the_ball() {
    let r0 = perturbed_ball(0.4, 0.3);
    let order = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = LinearizedData::at_axis(
        &r0,
        order,
        FourierDisc::zeros_boundary(1, order),
        FourierDisc::zeros_boundary(2, order),
        vec![c(0.0, 0.0); 2],
    )
    .unwrap();
    assert!(base.margin > 0.0 && base.margin < 1.0);
    for (i, mode) in [LinearMode::Direction, LinearMode::TwoPoint(0.4), LinearMode::TwoPoint(0.7)].into_iter().enumerate() {
        let eta = random_real_field(&mut rng, order, 6, 0.5);
        let mut phi = FourierDisc::zeros_boundary(2, order);
        for k in 1..=6i64 {
            phi.coeff_mut(-k)[0] = cgauss(&mut rng) * (0.5 / (k * k) as f64);
            phi.coeff_mut(-k)[1] = cgauss(&mut rng) * (0.5 / (k * k) as f64);
        }
        let data = base.with_data(eta, phi, vec![cgauss(&mut rng), cgauss(&mut rng)]).unwrap();
        let sol = solve_linearized_at_axis(&data, mode).unwrap();
        let err = round_trip_error(&data, mode, &sol);
        assert!(err < 1e-9, "case {i}: {err:e}");
    }
}

#[test]
fn non_normal_domain_is_rejected_for_linearization() {
    let order = 8;
    let r = DefiningFunction::ball(2);
    let res = LinearizedData::at_axis(
        &r,
        order,
        FourierDisc::zeros_boundary(1, order),
        FourierDisc::zeros_boundary(2, order),
        vec![c(0.0, 0.0); 2],
    );
    assert!(res.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ball_seeds_solve_the_system(seed in 0u64..10_000, direction in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = DomainSpec::ball(3);
        let z = random_point(&mut rng, &ball, 0.6);
        let cons = if direction {
            Constraint::direction(z, unit_vector(&mut rng, 3))
        } else {
            Constraint::two_point(z, random_point(&mut rng, &ball, 0.8))
        };
        let d = ball_seed(&cons, 64).unwrap();
        let res = residual(&ball.r, &cons, &d.f, &d.q, d.multiplier).unwrap();
        prop_assert!(res.norm() < 1e-10);
        prop_assert!(d.multiplier > 0.0);
        let rep = verify_e(&ball, &d, &cons.z);
        prop_assert!(rep.passed, "{:?}", rep.failures);
    }
}
