use geozeta::lie::{self, alternating_binomial, casimir_principal_series, formal_degree, restricted_root_pattern};
use geozeta::Error;
use proptest::prelude::*;

fn direct_sum(m: u32, r: u32, a: u32) -> i64 {
    let mut binom: i64 = 1;
    let mut total = 0;
    for j in 0..=r {
        let q = (a + j) as i64;
        if q <= m as i64 {
            total += if q % 2 == 0 { q * binom } else { -q * binom };
        }
        binom = binom * (r - j) as i64 / (j + 1) as i64;
    }
    total
}

#[test]
fn binomial_identity_exhaustive() {
    for r in 1..=6 {
        for m in r..=12 {
            for a in 0..=m - r {
                let closed = if r == 1 { if a % 2 == 0 { -1 } else { 1 } } else { 0 };
                assert_eq!(alternating_binomial(m, r, a).unwrap(), closed, "m={m} r={r} a={a}");
                assert_eq!(direct_sum(m, r, a), closed);
            }
        }
    }
}

#[test]
fn binomial_outside_domain() {
    assert!(matches!(alternating_binomial(3, 2, 2), Err(Error::Domain(_))));
}

#[test]
fn a2_formal_degree_at_rho() {
    // simple roots e1 - e2, e2 - e3 in R^3, rho = (1, 0, -1)
    let d = lie::datum("H2-model").unwrap();
    let roots = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0], vec![1.0, 0.0, -1.0]];
    let rho = [1.0, 0.0, -1.0];
    assert_eq!(formal_degree(d, &rho, &roots, &rho).unwrap(), 8.0);
    assert_eq!(formal_degree(d, &[0.0; 3], &roots, &rho).unwrap(), 1.0);
    assert!(matches!(
        formal_degree(d, &rho, &[vec![0.0, 0.0, 0.0]], &rho),
        Err(Error::DivisionByZero(_))
    ));
}

#[test]
fn every_catalog_entry_is_consistent() {
    for d in &lie::catalog().entries {
        d.validate().unwrap();
        restricted_root_pattern(d).unwrap();
        assert_eq!(d.rho_from_roots(), d.rho_p_norm, "{}", d.name);
    }
}

#[test]
fn h2_casimir_matches_sl2() {
    // B(rho) = 1/4 for the hyperbolic plane; nu = i r gives -r^2 - 1/4
    let d = lie::datum("H2-model").unwrap();
    assert_eq!(d.b_rho, 0.25);
    for r in [0.0, 0.5, 3.0] {
        assert!((casimir_principal_series(d, -r * r, 0.0) - (-r * r - 0.25)).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn formal_degree_is_multiplicative_over_orthogonal_unions(
        l1 in prop::collection::vec(0.0f64..5.0, 2),
        l2 in prop::collection::vec(0.0f64..5.0, 2),
    ) {
        let d = lie::datum("CH2-model").unwrap();
        // A1 x A1 in R^2 and B2-type pieces embedded orthogonally in R^4
        let roots_a = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let rho_a = [2.0, 1.0];
        let roots_b = vec![vec![0.0, 1.0], vec![1.0, -1.0]];
        let rho_b = [1.5, 0.5];
        let pad = |v: &[f64], left: bool| -> Vec<f64> {
            if left { [v, &[0.0, 0.0][..]].concat() } else { [&[0.0, 0.0][..], v].concat() }
        };
        let roots: Vec<Vec<f64>> = roots_a.iter().map(|r| pad(r, true)).chain(roots_b.iter().map(|r| pad(r, false))).collect();
        let rho = [&rho_a[..], &rho_b[..]].concat();
        let lambda = [&l1[..], &l2[..]].concat();
        let whole = formal_degree(d, &lambda, &roots, &rho).unwrap();
        let parts = formal_degree(d, &l1, &roots_a, &rho_a).unwrap() * formal_degree(d, &l2, &roots_b, &rho_b).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * parts.abs().max(1.0));
    }

    #[test]
    fn casimir_is_affine_with_unit_slopes(x in -50.0f64..50.0, y in -50.0f64..50.0, dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
        for d in &lie::catalog().entries {
            let base = casimir_principal_series(d, x, y);
            prop_assert!((casimir_principal_series(d, x + dx, y) - base - dx).abs() < 1e-12);
            prop_assert!((casimir_principal_series(d, x, y + dy) - base - dy).abs() < 1e-12);
            prop_assert!((casimir_principal_series(d, 0.0, 0.0) + d.b_rho).abs() == 0.0);
        }
    }
}
