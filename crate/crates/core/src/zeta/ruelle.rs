//! Ruelle zeta function, directly and as an alternating product of shifted
//! Selberg zeta functions.
//!
//! Splitting the n-eigenvalues of each class by restricted-root multiple m_g,
//! det(1 - gamma | n) = sum_q (-1)^{|q|} e^{-(sum_g q_g m_g |alpha|) l}
//! prod_g e_{q_g}(phases_g), so
//! log Z^R(s) = sum_q (-1)^{|q|} log Z_{tau_q}(s + sum_g q_g m_g |alpha|)
//! with tr tau_q = prod_g e_{q_g}(phases_g).

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{abscissa, log_selberg_weighted, tail_bound, ZetaEvaluation};
use crate::error::Result;
use crate::lie::RootLabel;
use crate::spectrum::{partition_by_root, LengthSpectrum};

/// -sum chi1 e^{-s l} tr w / mu over all classes.
pub fn log_ruelle_direct(spectrum: &LengthSpectrum, s: Complex64) -> Result<ZetaEvaluation> {
    log_selberg_weighted(spectrum, s, |c| Ok(c.chi1 * c.omega_trace))
}

/// Elementary symmetric polynomials e_0..e_n.
fn elementary(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); values.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * v;
        }
    }
    e
}

/// The factorized form. The bound is the sum of the bounds of every shifted
/// Selberg factor.
pub fn log_ruelle(spectrum: &LengthSpectrum, s: Complex64) -> Result<ZetaEvaluation> {
    let datum = spectrum.datum()?;
    let groups = datum.root_multiples();

    // phases split by root, per class, shared by every factor
    let mut phase_tables: Vec<BTreeMap<RootLabel, Vec<Complex64>>> = Vec::with_capacity(spectrum.classes.len());
    for c in &spectrum.classes {
        let parts = partition_by_root(datum, c.length, &c.n_eigenvalues)?;
        phase_tables.push(
            parts
                .into_iter()
                .map(|(label, eigs)| (label, elementary(&eigs.iter().map(|e| e / e.norm()).collect::<Vec<_>>())))
                .collect(),
        );
    }
    let index: BTreeMap<(String, u32), usize> = spectrum
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.primitive_id.clone(), c.mu), i))
        .collect();

    // enumerate tuples q_g in 0..=mult_g
    let mut tuples: Vec<Vec<u32>> = vec![vec![]];
    for (_, mult) in &groups {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..=*mult).map(move |q| {
                    let mut t = t.clone();
                    t.push(q);
                    t
                })
            })
            .collect();
    }

    let mut value = crate::numerics::sum::ComplexSum::new();
    let mut bound = 0.0;
    for q in &tuples {
        let shift: f64 = q
            .iter()
            .zip(&groups)
            .map(|(&qg, (label, _))| qg as f64 * label.multiple() * datum.alpha_norm)
            .sum();
        let sign = if q.iter().sum::<u32>() % 2 == 0 { 1.0 } else { -1.0 };
        let factor = log_selberg_weighted(spectrum, s + shift, |c| {
            let table = &phase_tables[index[&(c.primitive_id.clone(), c.mu)]];
            let mut tr = Complex64::new(1.0, 0.0);
            for (&qg, (label, _)) in q.iter().zip(&groups) {
                tr *= table[label][qg as usize];
            }
            Ok(c.chi1 * c.omega_trace * tr / c.det_n)
        })?;
        value.add(sign * factor.log_value);
        bound += factor.truncation_bound;
    }
    let a = abscissa(spectrum);
    if spectrum.classes.is_empty() {
        bound = tail_bound(spectrum, s.re, a, 1.0);
    }
    Ok(ZetaEvaluation {
        s,
        log_value: value.value(),
        truncation_bound: bound,
        abscissa: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::datum;
    use crate::spectrum::synth_spectrum;
    use crate::zeta::{log_selberg, Weights};

    #[test]
    fn elementary_polynomials() {
        let e = elementary(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert_eq!(e, vec![Complex64::new(1.0, 0.0), Complex64::new(5.0, 0.0), Complex64::new(6.0, 0.0)]);
    }

    #[test]
    fn h2_is_two_selberg_factors() {
        let s = synth_spectrum(datum("H2-model").unwrap(), 2, 7.0, 1.0).unwrap();
        let at = Complex64::new(3.0, 1.0);
        let r = log_ruelle(&s, at).unwrap().log_value;
        let w = Weights::with_omega();
        let z0 = log_selberg(&s, at, &w).unwrap().log_value;
        let z1 = log_selberg(&s, at + 1.0, &w).unwrap().log_value;
        assert!((r - (z0 - z1)).norm() < 1e-13);
    }

    #[test]
    fn factorized_equals_direct_ch2() {
        let s = synth_spectrum(datum("CH2-model").unwrap(), 5, 6.0, 1.5).unwrap();
        let at = Complex64::new(4.0, -0.7);
        let a = log_ruelle(&s, at).unwrap().log_value;
        let b = log_ruelle_direct(&s, at).unwrap().log_value;
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}
