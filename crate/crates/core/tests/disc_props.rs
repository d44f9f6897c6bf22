mod common;

use common::c;
use geodisc::disc::{analytic_completion, dft, grid, idft, winding, FourierDisc};
use geodisc::C64;
use proptest::prelude::*;

fn coeffs(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_inverts(v in coeffs(24)) {
        let back = idft(&dft(&v));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn samples_round_trip(a in coeffs(9)) {
        let f = FourierDisc::scalar(&a);
        let g = FourierDisc::from_samples_scalar(&f.samples_scalar(32), 8, true);
        for k in 0..=8 {
            prop_assert!((f.c(k, 0) - g.c(k, 0)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient(a in coeffs(7), re in -0.5..0.5f64, im in -0.5..0.5f64) {
        let f = FourierDisc::scalar(&a);
        let z = c(re, im);
        let h = 1e-6;
        let fd = (f.eval_unchecked(z + h)[0] - f.eval_unchecked(z - h)[0]) / (2.0 * h);
        prop_assert!((f.derivative().eval_unchecked(z)[0] - fd).norm() < 1e-7);
    }

    #[test]
    fn completion_has_prescribed_real_part(a in coeffs(6), im0 in -2.0..2.0f64) {
        let mut eta = FourierDisc::zeros_boundary(1, 5);
        eta.coeff_mut(0)[0] = c(a[0].re, 0.0);
        for k in 1..6i64 {
            eta.coeff_mut(k)[0] = a[k as usize];
            eta.coeff_mut(-k)[0] = a[k as usize].conj();
        }
        let g = analytic_completion(&eta, im0).unwrap();
        prop_assert!((g.c(0, 0).im - im0).abs() < 1e-15);
        for (u, z) in eta.samples_scalar(40).iter().zip(g.samples_scalar(40)) {
            prop_assert!((u.re - z.re).abs() < 1e-13);
        }
    }

    #[test]
    fn winding_of_powers(k in 0usize..6, tail in -0.3..0.3f64) {
        let mut a = vec![c(0.0, 0.0); 8];
        a[k] = c(1.0, 0.0);
        a[7] += c(tail, 0.0);
        prop_assert_eq!(winding(&FourierDisc::scalar(&a)).unwrap().value, k as i64);
    }
}

#[test]
fn grid_points_are_roots_of_unity() {
    for z in grid(16) {
        assert!((z.powi(16) - c(1.0, 0.0)).norm() < 1e-13);
    }
}

#[test]
fn zero_on_circle_is_rejected() {
    let f = FourierDisc::scalar(&[c(1.0, 0.0), c(1.0, 0.0)]);
    assert!(winding(&f).is_err());
}
