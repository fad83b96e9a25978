//! Truncated generalized Selberg zeta functions over a length spectrum.
//!
//! The evaluator uses the class expansion
//!
//! ```text
//! log Z(s) = - sum_[gamma] chi1 e^{-s l} tr w(gamma) tr tau(b) / (mu det(1 - gamma | n))
//! ```
//!
//! in which the symmetric-power sum over S^N(n) has been resummed to the
//! determinant. The Euler product over primitives and S^N(n) is kept as an
//! independent cross-check ([`log_selberg_euler`]).

mod checks;
mod orders;
mod ruelle;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::sum::ComplexSum;
use crate::spectrum::{GeodesicClass, LengthSpectrum, TraceData};

pub use checks::{opposite_parabolic_check, zero_free_region_check, OppositeReport};
pub use orders::{assemble_c_constant, regularized_product, OrderList};
pub use ruelle::{log_ruelle, log_ruelle_direct};

/// Which representation tau enters the weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TauChoice {
    Trivial,
    /// Holonomy trace stored under this tag.
    Tag(String),
    /// The w-twist of a tagged representation: its trace is the complex
    /// conjugate of the stored one.
    Twisted(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    pub use_omega: bool,
    pub tau: TauChoice,
}

impl Weights {
    pub fn trivial() -> Self {
        Weights { use_omega: false, tau: TauChoice::Trivial }
    }

    pub fn with_omega() -> Self {
        Weights { use_omega: true, tau: TauChoice::Trivial }
    }

    pub fn tag(tag: &str) -> Self {
        Weights { use_omega: true, tau: TauChoice::Tag(tag.to_string()) }
    }

    /// The weights seen from the opposite parabolic.
    pub fn twisted(&self) -> Self {
        let tau = match &self.tau {
            TauChoice::Trivial => TauChoice::Trivial,
            TauChoice::Tag(t) => TauChoice::Twisted(t.clone()),
            TauChoice::Twisted(t) => TauChoice::Tag(t.clone()),
        };
        Weights { use_omega: self.use_omega, tau }
    }

    fn tau_trace(&self, class: &GeodesicClass) -> Result<Complex64> {
        match &self.tau {
            TauChoice::Trivial => Ok(Complex64::new(1.0, 0.0)),
            TauChoice::Tag(t) => class.holonomy_trace(t),
            TauChoice::Twisted(t) => Ok(class.holonomy_trace(t)?.conj()),
        }
    }

    /// chi1 tr w tr tau / det(1 - gamma | n).
    pub fn class_weight(&self, class: &GeodesicClass) -> Result<Complex64> {
        let omega = if self.use_omega { class.omega_trace } else { Complex64::new(1.0, 0.0) };
        Ok(class.chi1 * omega * self.tau_trace(class)? / class.det_n)
    }

    fn tau_eigenvalues(&self, p: &crate::spectrum::Primitive) -> Result<Vec<Complex64>> {
        let data = |tag: &str| -> Result<&TraceData> {
            p.holonomy.get(tag).ok_or_else(|| Error::MissingTrace {
                tag: tag.to_string(),
                class: format!("{}^1", p.id),
            })
        };
        let ev = |d: &TraceData| d.eigenvalues().map(|e| e.to_vec()).ok_or_else(|| Error::MissingEigenvalues(p.id.clone()));
        match &self.tau {
            TauChoice::Trivial => Ok(vec![Complex64::new(1.0, 0.0)]),
            TauChoice::Tag(t) => ev(data(t)?),
            TauChoice::Twisted(t) => Ok(ev(data(t)?)?.iter().map(|e| e.conj()).collect()),
        }
    }
}

/// Value of a truncated log Z at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaEvaluation {
    pub s: Complex64,
    pub log_value: Complex64,
    /// Bound on the contribution of classes beyond the complete length.
    pub truncation_bound: f64,
    pub abscissa: f64,
}

/// Abscissa of convergence implied by the growth rate; an empty spectrum
/// without growth metadata converges everywhere.
pub fn abscissa(spectrum: &LengthSpectrum) -> f64 {
    if spectrum.is_empty() && spectrum.growth.is_none() {
        f64::NEG_INFINITY
    } else {
        spectrum.growth_rate()
    }
}

fn check_convergence(s: Complex64, abscissa: f64) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() && s.re > abscissa {
        Ok(())
    } else {
        Err(Error::Divergence { re_s: s.re, abscissa })
    }
}

/// `W e^{(g - sigma) L} / (sigma - g)` with L the complete length and W the
/// largest per-class weight observed (1 if there are no classes).
pub(crate) fn tail_bound(spectrum: &LengthSpectrum, sigma: f64, abscissa: f64, w_max: f64) -> f64 {
    if abscissa == f64::NEG_INFINITY {
        return 0.0;
    }
    let length = spectrum.complete_to();
    let gap = sigma - abscissa;
    w_max * (-gap * length).exp() / gap
}

/// Per-class terms computed in parallel, reduced in class order.
fn reduce_classes<F>(spectrum: &LengthSpectrum, term: F) -> Result<(Complex64, f64)>
where
    F: Fn(&GeodesicClass) -> Result<(Complex64, f64)> + Sync,
{
    let terms: Vec<Result<(Complex64, f64)>> = spectrum.classes.par_iter().map(&term).collect();
    let mut acc = ComplexSum::new();
    let mut w_max: f64 = 0.0;
    for t in terms {
        let (z, w) = t?;
        acc.add(z);
        w_max = w_max.max(w);
    }
    if spectrum.classes.is_empty() {
        w_max = 1.0;
    }
    Ok((acc.value(), w_max))
}

/// log Z with an arbitrary per-class weight `chi1 tr w tr tau / det`.
pub(crate) fn log_selberg_weighted<F>(spectrum: &LengthSpectrum, s: Complex64, weight: F) -> Result<ZetaEvaluation>
where
    F: Fn(&GeodesicClass) -> Result<Complex64> + Sync,
{
    let a = abscissa(spectrum);
    check_convergence(s, a)?;
    let (value, w_max) = reduce_classes(spectrum, |c| {
        let w = weight(c)?;
        Ok((-w * (-s * c.length).exp() / c.mu as f64, w.norm()))
    })?;
    Ok(ZetaEvaluation {
        s,
        log_value: value,
        truncation_bound: tail_bound(spectrum, s.re, a, w_max),
        abscissa: a,
    })
}

/// Truncated log Z_{P,tau,omega}(s), closed determinant form.
pub fn log_selberg(spectrum: &LengthSpectrum, s: Complex64, weights: &Weights) -> Result<ZetaEvaluation> {
    log_selberg_weighted(spectrum, s, |c| weights.class_weight(c))
}

/// d/ds log Z(s) = sum chi1 l e^{-s l} tr w tr tau / (mu det). The bound
/// covers the omitted tail of the derivative series.
pub fn log_selberg_derivative(spectrum: &LengthSpectrum, s: Complex64, weights: &Weights) -> Result<ZetaEvaluation> {
    log_selberg_derivative_weighted(spectrum, s, |c| weights.class_weight(c))
}

pub(crate) fn log_selberg_derivative_weighted<F>(
    spectrum: &LengthSpectrum,
    s: Complex64,
    weight: F,
) -> Result<ZetaEvaluation>
where
    F: Fn(&GeodesicClass) -> Result<Complex64> + Sync,
{
    let a = abscissa(spectrum);
    check_convergence(s, a)?;
    let (value, w_max) = reduce_classes(spectrum, |c| {
        let w = weight(c)?;
        Ok((w * c.primitive_length * (-s * c.length).exp(), w.norm() * c.primitive_length))
    })?;
    // l e^{-sigma l} <= e^{-(sigma - eps) l}/(e eps); take eps = half the gap.
    let bound = if a == f64::NEG_INFINITY {
        0.0
    } else {
        let half = 0.5 * (s.re - a);
        let length = spectrum.complete_to();
        let w = w_max * (length * (-half * length).exp()).max(1.0 / (std::f64::consts::E * half));
        tail_bound(spectrum, s.re - half, a, w)
    };
    Ok(ZetaEvaluation {
        s,
        log_value: value,
        truncation_bound: bound,
        abscissa: a,
    })
}

/// log(1 - x), accurate for small |x|.
fn log_one_minus(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = x;
        for k in 1..=6 {
            acc -= p / k as f64;
            p *= x;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) - x).ln()
    }
}

/// All monomials of degree `n` in `vars` (eigenvalues of S^n).
fn symmetric_power(vars: &[Complex64], n: usize) -> Vec<Complex64> {
    fn rec(vars: &[Complex64], start: usize, left: usize, acc: Complex64, out: &mut Vec<Complex64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..vars.len() {
            rec(vars, i, left - 1, acc * vars[i], out);
        }
    }
    let mut out = Vec::new();
    rec(vars, 0, n, Complex64::new(1.0, 0.0), &mut out);
    out
}

/// Euler-product form over primitives:
/// `sum_p chi1 sum_{N <= n_max} sum_lambda log(1 - e^{-s l} lambda)` with lambda
/// running over eigenvalues of w (x) tau (x) S^N(n). All powers of every
/// primitive are implicitly included; levels whose terms are below 1e-18 are
/// skipped. The bound covers omitted primitives and the N-truncation.
pub fn log_selberg_euler(
    spectrum: &LengthSpectrum,
    s: Complex64,
    n_max: usize,
    weights: &Weights,
) -> Result<ZetaEvaluation> {
    let a = abscissa(spectrum);
    check_convergence(s, a)?;
    let terms: Vec<Result<(Complex64, f64, f64)>> = spectrum
        .primitives
        .par_iter()
        .map(|p| {
            let omega = if weights.use_omega {
                p.omega
                    .eigenvalues()
                    .ok_or_else(|| Error::MissingEigenvalues(p.id.clone()))?
                    .to_vec()
            } else {
                vec![Complex64::new(1.0, 0.0)]
            };
            let tau = weights.tau_eigenvalues(p)?;
            let base: Vec<Complex64> = omega.iter().flat_map(|w| tau.iter().map(move |t| w * t)).collect();
            let base_norm = base.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let scale = (-s * p.length).exp();
            let e_max = p.n_eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
            let mut acc = ComplexSum::new();
            let mut omitted = 0.0;
            for n in 0..=n_max {
                let level = scale.norm() * base_norm * e_max.powi(n as i32);
                if level < 1e-18 {
                    break;
                }
                for mono in symmetric_power(&p.n_eigenvalues, n) {
                    for b in &base {
                        acc.add(p.chi1 * log_one_minus(scale * b * mono));
                    }
                }
                if n == n_max {
                    // geometric tail of the remaining levels, each dominated by
                    // dim S^N times the level size
                    let r = e_max * (1.0 + p.n_eigenvalues.len() as f64);
                    omitted = if r < 1.0 { 2.0 * p.chi1.abs() * level * r / (1.0 - r) } else { f64::INFINITY };
                }
            }
            let weight = p.chi1.abs() * base_norm / crate::spectrum::det_one_minus(&p.n_eigenvalues).norm();
            Ok((acc.value(), omitted, weight))
        })
        .collect();
    let mut total = ComplexSum::new();
    let mut omitted = 0.0;
    let mut w_max: f64 = 0.0;
    for t in terms {
        let (z, o, w) = t?;
        total.add(z);
        omitted += o;
        w_max = w_max.max(w);
    }
    if spectrum.primitives.is_empty() {
        w_max = 1.0;
    }
    Ok(ZetaEvaluation {
        s,
        log_value: total.value(),
        truncation_bound: tail_bound(spectrum, s.re, a, w_max) + omitted,
        abscissa: a,
    })
}
