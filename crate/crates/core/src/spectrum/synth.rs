//! Deterministic synthetic spectra for tests and demos.
//!
//! Primitive lengths follow the prime-geodesic shape N(L) ~ e^{gL}/(gL):
//! the k-th length solves F(L) = k - U_k with U_k uniform on [0,1).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{extend_powers, LengthSpectrum, Primitive, TraceData};
use crate::error::{Error, Result};
use crate::lie::GroupDatum;

/// No synthetic primitive is shorter than this.
pub const SYNTH_MIN_LENGTH: f64 = 1.0;

fn counting(g: f64, l: f64) -> f64 {
    (g * l).exp() / (g * l)
}

/// Inverse of x - ln x on x >= 1.
fn solve_x_minus_ln_x(target: f64) -> f64 {
    let mut x = (target + target.max(1.0).ln()).max(1.0 + 1e-12);
    for _ in 0..100 {
        let f = x - x.ln() - target;
        let step = f / (1.0 - 1.0 / x);
        let next = (x - step).max(1.0 + 1e-12);
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

pub fn synth_spectrum(datum: &GroupDatum, seed: u64, l_max: f64, growth: f64) -> Result<LengthSpectrum> {
    if !(growth.is_finite() && growth > 0.0) {
        return Err(Error::Precondition(format!("growth must be positive, got {growth}")));
    }
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Error::Precondition(format!("l_max must be positive, got {l_max}")));
    }
    let g = growth;
    // F is increasing only for gL >= 1; below that the law is flattened.
    let l_star = SYNTH_MIN_LENGTH.max(1.0 / g);
    let f_star = counting(g, l_star);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut primitives = Vec::new();
    if l_max >= l_star {
        let f_max = counting(g, l_max);
        for k in 1u64.. {
            let u: f64 = rng.gen();
            let y = k as f64 - u;
            if y > f_max {
                break;
            }
            let length = if y <= f_star {
                l_star + 0.01 * y / f_star
            } else {
                solve_x_minus_ln_x(y.ln()) / g
            };
            if length > l_max {
                break;
            }
            primitives.push(synthetic_primitive(datum, k, length));
        }
    }
    let spectrum = LengthSpectrum::from_parts(
        datum.name.clone(),
        l_max,
        format!("synthetic seed={seed} growth={g}"),
        true,
        Some(g),
        primitives,
        &[],
    )?;
    extend_powers(&spectrum, l_max)
}

fn synthetic_primitive(datum: &GroupDatum, k: u64, length: f64) -> Primitive {
    let one = Complex64::new(1.0, 0.0);
    let mut n_eigenvalues = Vec::with_capacity(datum.dim_n as usize);
    for (label, mult) in datum.root_multiples() {
        let e = Complex64::new((-label.multiple() * datum.alpha_norm * length).exp(), 0.0);
        n_eigenvalues.extend(std::iter::repeat(e).take(mult as usize));
    }
    let holonomy: BTreeMap<String, TraceData> = datum
        .shift_table
        .iter()
        .map(|e| (e.trace_tag.clone(), TraceData::Eigenvalues(vec![one; e.dim as usize])))
        .collect();
    Primitive {
        id: format!("p{k}"),
        length,
        chi1: 1.0,
        omega: TraceData::Eigenvalues(vec![one]),
        holonomy,
        n_eigenvalues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::datum;

    #[test]
    fn inverse_counting() {
        for target in [1.0, 2.5, 10.0, 40.0] {
            let x = solve_x_minus_ln_x(target);
            assert!((x - x.ln() - target).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_spectrum() {
        let d = datum("H2-model").unwrap();
        let a = synth_spectrum(d, 1, 8.0, 1.0).unwrap();
        let b = synth_spectrum(d, 1, 8.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(a.synthetic);
        assert_ne!(a, synth_spectrum(d, 2, 8.0, 1.0).unwrap());
    }

    #[test]
    fn below_floor_is_empty() {
        let d = datum("H2-model").unwrap();
        assert!(synth_spectrum(d, 1, 0.5, 1.0).unwrap().is_empty());
    }

    #[test]
    fn cutoff_count_follows_target_law() {
        let d = datum("H2-model").unwrap();
        for seed in 0..10 {
            let s = synth_spectrum(d, seed, 8.0, 1.0).unwrap();
            let n = s.primitives.len() as f64;
            let ratio = n * 8.0 / 8f64.exp();
            assert!((0.5..=2.0).contains(&ratio), "seed {seed}: ratio {ratio}");
        }
    }

    #[test]
    fn ch2_eigenvalues_by_root() {
        let d = datum("CH2-model").unwrap();
        let s = synth_spectrum(d, 3, 5.0, 2.0).unwrap();
        let p = &s.primitives[0];
        assert_eq!(p.n_eigenvalues.len(), 3);
        assert!(p.holonomy.contains_key("n_minus"));
    }

    #[test]
    fn rejects_nonpositive_growth() {
        let d = datum("H2-model").unwrap();
        assert!(matches!(synth_spectrum(d, 1, 5.0, 0.0), Err(Error::Precondition(_))));
    }
}
