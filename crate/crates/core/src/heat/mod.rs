//! Geodesic heat theta series, the heat/zeta bridge, spectral zeta
//! functions, determinants and torsion.

mod l2;
mod spectral;
mod spline;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lie::{GroupDatum, ShiftEntry};
use crate::numerics::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::numerics::sum::ComplexSum;
use crate::spectrum::{GeodesicClass, LengthSpectrum};
use crate::zeta::{abscissa, log_selberg_derivative_weighted};

pub use l2::{
    l2_heat_trace, l2_log_det, l2_torsion, l2_torsion_with, novikov_shubin_estimate, torsion_ratio_assembly, Density,
    NsFit, PlancherelModel, NS_RESIDUAL_THRESHOLD,
};
pub use spectral::{
    det_prime, log_det_prime, neg_zeta_prime_at_zero, spectral_zeta, spectral_zeta_direct, spectral_zeta_mellin,
    torsion, torsion_exponent, torsion_from_determinants, zeta_at_zero, EigenvalueSpectrum, MellinConfig,
    MellinSplit, SpectralZeta, ZetaRoute,
};

fn check_datum(spectrum: &LengthSpectrum, datum: &GroupDatum) -> Result<()> {
    if spectrum.datum_name != datum.name {
        return Err(Error::Precondition(format!(
            "spectrum is for {} but datum {} was given",
            spectrum.datum_name, datum.name
        )));
    }
    Ok(())
}

/// sum over shift entries of (-1)^c e^{t s} tr(b | sigma + tau) L(gamma, tau).
fn shift_sum(class: &GeodesicClass, datum: &GroupDatum, t: f64) -> Result<Complex64> {
    let mut acc = ComplexSum::new();
    for e in &datum.shift_table {
        let tr = class.holonomy_trace(&e.trace_tag)?;
        acc.add(e.sign as f64 * (t * e.s).exp() * tr * class.monodromy(&e.trace_tag));
    }
    Ok(acc.value())
}

/// chi1 l_0 e^{-rho l} tr w / det(1 - gamma | n).
fn orbital_weight(class: &GeodesicClass, datum: &GroupDatum) -> Complex64 {
    class.chi1 * class.primitive_length * (-datum.rho_p_norm * class.length).exp() * class.omega_trace / class.det_n
}

/// Geodesic side of the theta series at time t.
pub fn theta_geometric(spectrum: &LengthSpectrum, datum: &GroupDatum, t: f64) -> Result<f64> {
    check_datum(spectrum, datum)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let gauss = |l: f64| (-l * l / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
    let terms: Vec<Result<Complex64>> = spectrum
        .classes
        .par_iter()
        .map(|c| Ok(orbital_weight(c, datum) * gauss(c.length) * shift_sum(c, datum, t)?))
        .collect();
    let mut acc = ComplexSum::new();
    for term in terms {
        acc.add(term?);
    }
    Ok(acc.value().re)
}

/// e^{-l sqrt(mu)} / (2 sqrt(mu)).
pub fn subordination_closed(l: f64, mu: f64) -> f64 {
    (-l * mu.sqrt()).exp() / (2.0 * mu.sqrt())
}

/// int_0^inf e^{-l^2/4t}/sqrt(4 pi t) e^{-t mu} dt by adaptive quadrature,
/// split at the peak of the integrand.
pub fn subordination_quadrature(l: f64, mu: f64) -> Result<f64> {
    if !(l > 0.0 && mu > 0.0) {
        return Err(Error::Domain(format!("need l > 0 and mu > 0, got l = {l}, mu = {mu}")));
    }
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        (-l * l / (4.0 * t) - t * mu).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
    };
    let peak = l / (2.0 * mu.sqrt());
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 4000 };
    let head = integrate(f, 0.0, peak, opts)?;
    let tail = integrate_to_infinity(f, peak, opts)?;
    Ok(head.value + tail.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeReport {
    pub mu: f64,
    /// The Selberg argument |rho_P| + sqrt(mu).
    pub point: f64,
    /// Largest |quadrature - closed form| over the classes.
    pub kernel_max_error: f64,
    pub heat_side: f64,
    pub zeta_side: f64,
    pub relative_error: f64,
}

/// Compares, for one shift entry, the heat-side resolvent sum
/// sum_gamma w_gamma int_0^inf e^{-l^2/4t}/sqrt(4 pi t) e^{-t(lambda - s)} dt
/// with (Z'/Z)(|rho_P| + sqrt(lambda - s)) / (2 sqrt(lambda - s)) for the
/// Selberg zeta function carrying the same weights.
pub fn resolvent_bridge_check(
    spectrum: &LengthSpectrum,
    datum: &GroupDatum,
    lambda: f64,
    entry: &ShiftEntry,
) -> Result<BridgeReport> {
    check_datum(spectrum, datum)?;
    let mu = lambda - entry.s;
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!("lambda - s = {mu} must be positive")));
    }
    let point = datum.rho_p_norm + mu.sqrt();
    let a = abscissa(spectrum);
    if !(point > a) {
        return Err(Error::Divergence { re_s: point, abscissa: a });
    }
    let weight = |c: &GeodesicClass| -> Result<Complex64> {
        let tr = c.holonomy_trace(&entry.trace_tag)?;
        Ok(entry.sign as f64 * c.chi1 * c.omega_trace * tr * c.monodromy(&entry.trace_tag) / c.det_n)
    };
    let terms: Vec<Result<(Complex64, f64)>> = spectrum
        .classes
        .par_iter()
        .map(|c| {
            let q = subordination_quadrature(c.length, mu)?;
            let err = (q - subordination_closed(c.length, mu)).abs();
            let w = weight(c)? * c.primitive_length * (-datum.rho_p_norm * c.length).exp();
            Ok((w * q, err))
        })
        .collect();
    let mut heat = ComplexSum::new();
    let mut kernel_max_error: f64 = 0.0;
    for t in terms {
        let (z, e) = t?;
        heat.add(z);
        kernel_max_error = kernel_max_error.max(e);
    }
    let derivative = log_selberg_derivative_weighted(spectrum, Complex64::new(point, 0.0), weight)?;
    let zeta_side = derivative.log_value.re / (2.0 * mu.sqrt());
    let heat_side = heat.value().re;
    let scale = zeta_side.abs().max(heat_side.abs());
    let relative_error = if scale == 0.0 { 0.0 } else { (heat_side - zeta_side).abs() / scale };
    Ok(BridgeReport { mu, point, kernel_max_error, heat_side, zeta_side, relative_error })
}

/// theta_geometric at several times, evaluated concurrently.
pub fn theta_series(spectrum: &LengthSpectrum, datum: &GroupDatum, ts: &[f64]) -> Result<Vec<f64>> {
    ts.par_iter().map(|&t| theta_geometric(spectrum, datum, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::datum;
    use crate::spectrum::{extend_powers, synth_spectrum};
    use crate::zeta::log_selberg_derivative;

    fn one_class_h2() -> LengthSpectrum {
        let p = crate::spectrum::Primitive {
            id: "a".into(),
            length: 1.0,
            chi1: 1.0,
            omega: crate::spectrum::TraceData::Eigenvalues(vec![Complex64::new(1.0, 0.0)]),
            holonomy: [("triv".to_string(), crate::spectrum::TraceData::Eigenvalues(vec![Complex64::new(1.0, 0.0)]))]
                .into(),
            n_eigenvalues: vec![Complex64::new((-1.0f64).exp(), 0.0)],
        };
        LengthSpectrum::from_parts("H2-model".into(), 1.0, "t".into(), false, None, vec![p], &[("a".into(), 1)])
            .unwrap()
    }

    #[test]
    fn theta_hand_value() {
        let s = one_class_h2();
        let v = theta_geometric(&s, datum("H2-model").unwrap(), 1.0).unwrap();
        let hand = (-0.5f64).exp() / (1.0 - (-1.0f64).exp()) * (-0.25f64).exp() / (4.0 * std::f64::consts::PI).sqrt();
        assert!((v - hand).abs() < 1e-15);
        assert!((v - 0.21080178848060774).abs() < 1e-15);
    }

    #[test]
    fn theta_rejects_bad_t() {
        let s = one_class_h2();
        assert!(theta_geometric(&s, datum("H2-model").unwrap(), 0.0).is_err());
        assert!(theta_geometric(&s, datum("H3-model").unwrap(), 1.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let q = subordination_quadrature(2.0, 1.0).unwrap();
        assert!((q - (-2.0f64).exp() / 2.0).abs() < 1e-8);
        let q = subordination_quadrature(1.0, 100.0).unwrap();
        let c = subordination_closed(1.0, 100.0);
        assert!((q - c).abs() / c < 1e-6);
    }

    #[test]
    fn bridge_on_synthetic() {
        let d = datum("CH2-model").unwrap();
        let s = synth_spectrum(d, 2, 5.0, 1.0).unwrap();
        let r = resolvent_bridge_check(&s, d, 5.0, &d.shift_table[1]).unwrap();
        assert!(r.relative_error < 1e-6, "{r:?}");
        assert!(r.kernel_max_error < 1e-8);
        // zeta side equals the public derivative for trivial monodromy
        let w = crate::zeta::Weights::tag("n_minus");
        let z = log_selberg_derivative(&s, Complex64::new(r.point, 0.0), &w).unwrap();
        assert!((-z.log_value.re / (2.0 * r.mu.sqrt()) - r.zeta_side).abs() < 1e-14);
    }

    #[test]
    fn bridge_empty() {
        let d = datum("H2-model").unwrap();
        let s = extend_powers(&synth_spectrum(d, 0, 0.5, 1.0).unwrap(), 1.0).unwrap();
        let r = resolvent_bridge_check(&s, d, 2.0, &d.shift_table[0]).unwrap();
        assert_eq!((r.heat_side, r.zeta_side, r.relative_error), (0.0, 0.0, 0.0));
    }
}
