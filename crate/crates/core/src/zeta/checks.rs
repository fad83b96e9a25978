//! Consistency checks that need no spectral data: the opposite-parabolic
//! symmetry and the absence of zeros in the Euler-product half-plane.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{abscissa, log_selberg, Weights};
use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct OppositeReport {
    /// (s, log Z on the spectrum, log Z on the opposite-parabolic transform)
    pub points: Vec<(Complex64, Complex64, Complex64)>,
    pub max_discrepancy: f64,
    /// Sum of the two truncation bounds, maximized over the samples.
    pub combined_bound: f64,
}

impl OppositeReport {
    pub fn within_bounds(&self) -> bool {
        self.max_discrepancy <= self.combined_bound.max(1e-10)
    }
}

/// Compares Z_{P,tau,w} with Z_{Pbar,tau^w,w} at each sample.
pub fn opposite_parabolic_check(
    spectrum: &LengthSpectrum,
    s_samples: &[Complex64],
    weights: &Weights,
) -> Result<OppositeReport> {
    let opposite = spectrum.opposite_parabolic()?;
    let twisted = weights.twisted();
    let mut points = Vec::with_capacity(s_samples.len());
    let mut max_discrepancy: f64 = 0.0;
    let mut combined_bound: f64 = 0.0;
    for &s in s_samples {
        let a = log_selberg(spectrum, s, weights)?;
        let b = log_selberg(&opposite, s, &twisted)?;
        max_discrepancy = max_discrepancy.max((a.log_value - b.log_value).norm());
        combined_bound = combined_bound.max(a.truncation_bound + b.truncation_bound);
        points.push((s, a.log_value, b.log_value));
    }
    Ok(OppositeReport { points, max_discrepancy, combined_bound })
}

fn wrap(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Winding number of exp(log Z) around the rectangle with the given opposite
/// corners, sampled at `grid` steps per side, counterclockwise.
pub fn zero_free_region_check(
    spectrum: &LengthSpectrum,
    corners: (Complex64, Complex64),
    grid: usize,
    weights: &Weights,
) -> Result<i64> {
    let (lo_re, hi_re) = (corners.0.re.min(corners.1.re), corners.0.re.max(corners.1.re));
    let (lo_im, hi_im) = (corners.0.im.min(corners.1.im), corners.0.im.max(corners.1.im));
    if grid == 0 {
        return Err(Error::Precondition("grid must be at least 1".into()));
    }
    let a = abscissa(spectrum);
    if !(lo_re > a) {
        return Err(Error::Divergence { re_s: lo_re, abscissa: a });
    }
    if hi_re - lo_re == 0.0 || hi_im - lo_im == 0.0 {
        return Ok(0);
    }
    let vertices = [
        Complex64::new(lo_re, lo_im),
        Complex64::new(hi_re, lo_im),
        Complex64::new(hi_re, hi_im),
        Complex64::new(lo_re, hi_im),
    ];
    let mut path = Vec::with_capacity(4 * grid + 1);
    for side in 0..4 {
        let (from, to) = (vertices[side], vertices[(side + 1) % 4]);
        for k in 0..grid {
            path.push(from + (to - from) * (k as f64 / grid as f64));
        }
    }
    path.push(vertices[0]);

    let phases: Vec<Result<f64>> = path
        .par_iter()
        .map(|&s| log_selberg(spectrum, s, weights).map(|z| z.log_value.im))
        .collect();
    let phases: Vec<f64> = phases.into_iter().collect::<Result<_>>()?;
    let mut total = 0.0;
    for k in 1..phases.len() {
        let step = wrap(phases[k] - phases[k - 1]);
        if step.abs() > FRAC_PI_2 {
            return Err(Error::Precision { step: step.abs(), at: format!("{}", path[k]) });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::datum;
    use crate::spectrum::{synth_spectrum, LengthSpectrum, Primitive, TraceData};
    use std::collections::BTreeMap;

    #[test]
    fn trivial_holonomy_is_symmetric() {
        let s = synth_spectrum(datum("H2-model").unwrap(), 3, 7.0, 1.0).unwrap();
        let r = opposite_parabolic_check(&s, &[Complex64::new(5.0, 0.0)], &Weights::tag("triv")).unwrap();
        assert!(r.max_discrepancy <= 1e-10);
    }

    #[test]
    fn phase_holonomy_is_symmetric() {
        let l: f64 = 1.3;
        let phase = Complex64::from_polar(1.0, 0.9);
        let r = (-l).exp();
        let p = Primitive {
            id: "g".into(),
            length: l,
            chi1: 2.0,
            omega: TraceData::Eigenvalues(vec![Complex64::from_polar(1.0, 0.3)]),
            holonomy: BTreeMap::from([("triv".to_string(), TraceData::Eigenvalues(vec![Complex64::from_polar(1.0, 1.1)]))]),
            n_eigenvalues: vec![r * phase, r * phase.conj()],
        };
        let s = LengthSpectrum::from_parts("H3-model".into(), 2.0, "t".into(), false, None, vec![p], &[("g".into(), 1)])
            .unwrap();
        let rep = opposite_parabolic_check(&s, &[Complex64::new(3.0, 0.5)], &Weights::tag("triv")).unwrap();
        assert!(rep.max_discrepancy <= 1e-10, "{}", rep.max_discrepancy);
        assert!(rep.points[0].1.im.abs() > 1e-3);
    }

    #[test]
    fn winding_zero_and_degenerate() {
        let s = synth_spectrum(datum("H2-model").unwrap(), 1, 7.0, 1.0).unwrap();
        let w = Weights::trivial();
        let rect = (Complex64::new(4.0, -1.0), Complex64::new(6.0, 1.0));
        assert_eq!(zero_free_region_check(&s, rect, 400, &w).unwrap(), 0);
        let flat = (Complex64::new(4.0, 0.0), Complex64::new(6.0, 0.0));
        assert_eq!(zero_free_region_check(&s, flat, 10, &w).unwrap(), 0);
        let below = (Complex64::new(0.5, -1.0), Complex64::new(6.0, 1.0));
        assert!(matches!(zero_free_region_check(&s, below, 10, &w), Err(Error::Divergence { .. })));
    }

    #[test]
    fn wrap_is_principal() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap(-0.1) + 0.1).abs() < 1e-15);
    }
}
