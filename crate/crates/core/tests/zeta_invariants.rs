use geozeta::lie;
use geozeta::spectrum::{extend_powers, synth_spectrum, LengthSpectrum};
use geozeta::zeta::{
    log_ruelle, log_selberg, log_selberg_euler, opposite_parabolic_check, zero_free_region_check, Weights,
};
use geozeta::{Complex64, Error};
use proptest::prelude::*;

fn synth(name: &str, seed: u64, lmax: f64) -> LengthSpectrum {
    synth_spectrum(lie::datum(name).unwrap(), seed, lmax, 1.0).unwrap()
}

#[test]
fn h2_ruelle_is_a_ratio_of_two_selberg_factors() {
    let d = lie::datum("H2-model").unwrap();
    let w = Weights::with_omega();
    for seed in 0..5 {
        let s = synth("H2-model", seed, 7.0);
        for z in [Complex64::new(3.0, 0.0), Complex64::new(4.0, 1.5)] {
            let r = log_ruelle(&s, z).unwrap().log_value;
            let a = log_selberg(&s, z, &w).unwrap().log_value;
            let b = log_selberg(&s, z + d.alpha_norm, &w).unwrap().log_value;
            assert!((r - (a - b)).norm() < 1e-13);
        }
    }
}

#[test]
fn two_summation_orders_agree_on_ch2() {
    let w = Weights::with_omega();
    for seed in 0..4 {
        let s = synth("CH2-model", seed, 5.0);
        let extended = extend_powers(&s, 30.0).unwrap();
        for z in [Complex64::new(3.0, 0.0), Complex64::new(4.0, -2.0)] {
            let a = log_selberg(&extended, z, &w).unwrap();
            let b = log_selberg_euler(&s, z, 80, &w).unwrap();
            assert!((a.log_value - b.log_value).norm() <= 1e-10 + a.truncation_bound + b.truncation_bound);
        }
    }
}

#[test]
fn opposite_parabolic_below_abscissa_diverges() {
    let s = synth("H2-model", 3, 6.0);
    let r = opposite_parabolic_check(&s, &[Complex64::new(0.5, 0.0)], &Weights::with_omega());
    assert!(matches!(r, Err(Error::Divergence { .. })));
    let ok = opposite_parabolic_check(&s, &[Complex64::new(5.0, 0.0), Complex64::new(3.0, 2.0)], &Weights::with_omega())
        .unwrap();
    assert!(ok.max_discrepancy <= 1e-10 && ok.within_bounds());
}

#[test]
fn coarse_grid_is_a_precision_error() {
    let s = synth("H2-model", 1, 6.0);
    let r = zero_free_region_check(&s, (Complex64::new(1.05, -20.0), Complex64::new(8.0, 20.0)), 2, &Weights::with_omega());
    assert!(matches!(r, Err(Error::Precision { .. })), "{r:?}");
    let z = Complex64::new(4.0, 0.0);
    assert_eq!(zero_free_region_check(&s, (z, z + Complex64::new(0.0, 1.0)), 2, &Weights::with_omega()).unwrap(), 0);
}

#[test]
fn truncation_bound_never_grows_with_the_cutoff() {
    let w = Weights::with_omega();
    for seed in 0..5 {
        let mut last = f64::INFINITY;
        for lmax in [3.0, 4.0, 5.0, 6.0, 7.0, 8.0] {
            let b = log_selberg(&synth("H2-model", seed, lmax), Complex64::new(3.0, 0.5), &w).unwrap().truncation_bound;
            assert!(b <= last, "seed {seed} lmax {lmax}: {b} > {last}");
            last = b;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn real_points_give_real_logs(seed in 0u64..500, which in 0usize..3, sigma in 2.5f64..8.0) {
        let d = &lie::catalog().entries[which];
        let s = synth_spectrum(d, seed, 5.0, 1.0).unwrap();
        let z = Complex64::new(sigma, 0.0);
        prop_assert_eq!(log_selberg(&s, z, &Weights::with_omega()).unwrap().log_value.im, 0.0);
        prop_assert_eq!(log_ruelle(&s, z).unwrap().log_value.im, 0.0);
    }

    #[test]
    fn rectangles_in_the_half_plane_have_no_zeros(
        seed in 0u64..200, re in 1.5f64..5.0, im in -6.0f64..6.0, w in 0.1f64..2.0, h in 0.1f64..2.0,
    ) {
        let s = synth("H2-model", seed, 6.0);
        let corners = (Complex64::new(re, im), Complex64::new(re + w, im + h));
        prop_assert_eq!(zero_free_region_check(&s, corners, 200, &Weights::with_omega()).unwrap(), 0);
    }
}
