//! Spectral zeta functions of eigenvalue lists, their continuation to s = 0
//! through the Mellin split at t = 1, and zeta-regularized determinants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::gauss_legendre;
use crate::numerics::special::recip_gamma;
use crate::numerics::sum::{sum_f64, ComplexSum, CompensatedSum};

/// Eigenvalues of a self-adjoint operator with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenvalueSpectrum {
    pub label: String,
    /// d with tr e^{-tD} ~ C t^{-d/2} as t -> 0. Zero marks a finite list
    /// (a finite-dimensional operator), whose zeta function is entire.
    pub heat_dimension: f64,
    pub eigenvalues: Vec<(f64, u64)>,
}

impl EigenvalueSpectrum {
    pub fn new(label: &str, heat_dimension: f64, eigenvalues: Vec<(f64, u64)>) -> Result<Self> {
        let s = EigenvalueSpectrum { label: label.to_string(), heat_dimension, eigenvalues };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.heat_dimension.is_finite() && self.heat_dimension >= 0.0) {
            return Err(Error::Validation(format!(
                "{}: heat_dimension must be a non-negative number, got {}",
                self.label, self.heat_dimension
            )));
        }
        for (k, &(l, m)) in self.eigenvalues.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::Validation(format!("{}: eigenvalue {k} = {l} is negative", self.label)));
            }
            if m == 0 {
                return Err(Error::Validation(format!("{}: eigenvalue {k} has multiplicity 0", self.label)));
            }
            if k > 0 && l < self.eigenvalues[k - 1].0 {
                return Err(Error::Validation(format!("{}: eigenvalues decrease at index {k}", self.label)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: EigenvalueSpectrum = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Positive eigenvalues of D + shift with multiplicities.
    pub fn shifted_positive(&self, shift: f64) -> Vec<(f64, f64)> {
        self.eigenvalues
            .iter()
            .map(|&(l, m)| (l + shift, m as f64))
            .filter(|&(l, _)| l > 0.0)
            .collect()
    }

    /// Scales every eigenvalue by c > 0.
    pub fn scaled(&self, c: f64) -> Self {
        EigenvalueSpectrum {
            label: format!("{}*{c}", self.label),
            heat_dimension: self.heat_dimension,
            eigenvalues: self.eigenvalues.iter().map(|&(l, m)| (c * l, m)).collect(),
        }
    }

    /// The heat trace sum over positive eigenvalues of D + shift.
    pub fn heat_trace(&self, t: f64, shift: f64) -> f64 {
        sum_f64(self.shifted_positive(shift).into_iter().map(|(l, m)| m * (-t * l).exp()))
    }
}

/// Quadrature and fitting parameters of the Mellin split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinConfig {
    /// The small-t expansion replaces the trace on (0, t0].
    pub t0: f64,
    /// Upper end of the fitting window [t0, fit_hi].
    pub fit_hi: f64,
    pub fit_points: usize,
    /// Panel width in u = ln t.
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub u_max: f64,
    /// Integration stops once the integrand falls below this fraction of the
    /// running integral.
    pub tail_tol: f64,
    /// Largest acceptable relative RMS residual of the expansion fit.
    pub fit_tol: f64,
}

impl Default for MellinConfig {
    fn default() -> Self {
        MellinConfig {
            t0: 1e-4,
            fit_hi: 1e-2,
            fit_points: 40,
            panel_width: 0.5,
            nodes_per_panel: 20,
            u_max: 200.0,
            tail_tol: 1e-18,
            fit_tol: 1e-3,
        }
    }
}

impl MellinConfig {
    /// Halved panels, more nodes and fit points.
    pub fn refined(&self) -> Self {
        MellinConfig {
            fit_points: self.fit_points * 2,
            panel_width: self.panel_width / 2.0,
            nodes_per_panel: self.nodes_per_panel + 10,
            tail_tol: self.tail_tol / 100.0,
            ..*self
        }
    }
}

/// A trace function sampled once, from which zeta(s) is available for any s
/// with Re s up to the value the split was built for:
///
/// zeta(s) = 1/Gamma(s) [ sum_k c_k t0^{s+p_k}/(s+p_k) + int_{t0}^inf t^{s-1} theta(t) dt ].
#[derive(Debug, Clone)]
pub struct MellinSplit {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub fit_residual: f64,
    t0: f64,
    u: Vec<f64>,
    weights: Vec<f64>,
    theta: Vec<f64>,
}

fn expansion_exponents(d: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..4).map(|k| -d / 2.0 + k as f64).collect();
    if !p.iter().any(|&x| x == 0.0) {
        p.push(0.0);
    }
    p.sort_by(f64::total_cmp);
    p
}

impl MellinSplit {
    pub fn build<F>(trace: F, heat_dimension: f64, re_s_max: f64, cfg: &MellinConfig) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let (exponents, coefficients, fit_residual) = fit_expansion(&trace, heat_dimension, cfg)?;

        let (gl_x, gl_w) = gauss_legendre(cfg.nodes_per_panel);
        let mut u = Vec::new();
        let mut weights = Vec::new();
        let mut theta = Vec::new();
        let push_panel = |a: f64, b: f64, u: &mut Vec<f64>, weights: &mut Vec<f64>| {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gl_x.iter().zip(&gl_w) {
                u.push(mid + half * x);
                weights.push(half * w);
            }
        };
        let u0 = cfg.t0.ln();
        let n_small = (-u0 / cfg.panel_width).ceil().max(1.0) as usize;
        for k in 0..n_small {
            let a = u0 + (-u0) * k as f64 / n_small as f64;
            let b = u0 + (-u0) * (k + 1) as f64 / n_small as f64;
            push_panel(a, b, &mut u, &mut weights);
        }
        let sample = |us: &[f64]| -> Result<Vec<f64>> { us.par_iter().map(|&x| trace(x.exp())).collect() };
        theta.extend(sample(&u)?);

        let mut running = CompensatedSum::new();
        for (i, &x) in u.iter().enumerate() {
            running.add(weights[i] * (re_s_max * x).exp() * theta[i]);
        }
        let mut a = 0.0;
        loop {
            if a >= cfg.u_max {
                let last = theta.last().copied().unwrap_or(0.0) * (re_s_max * a).exp();
                if last.abs() > 1e-10 * running.value().abs().max(1e-300) {
                    return Err(Error::Quadrature(format!(
                        "Mellin integrand still {last:e} at t = e^{a}; the trace decays too slowly for Re s = {re_s_max}"
                    )));
                }
                break;
            }
            let b = a + cfg.panel_width;
            let (mut pu, mut pw) = (Vec::new(), Vec::new());
            push_panel(a, b, &mut pu, &mut pw);
            let pt = sample(&pu)?;
            let mut panel = CompensatedSum::new();
            let mut edge: f64 = 0.0;
            for i in 0..pu.len() {
                let v = (re_s_max * pu[i]).exp() * pt[i];
                panel.add(pw[i] * v);
                edge = edge.max(v.abs());
            }
            running.add(panel.value());
            u.extend(pu);
            weights.extend(pw);
            theta.extend(pt);
            a = b;
            let tail_end = (re_s_max * b).exp() * trace(b.exp())?;
            if edge * cfg.panel_width < cfg.tail_tol * running.value().abs() && tail_end.abs() <= edge {
                break;
            }
            if edge == 0.0 {
                break;
            }
        }
        Ok(MellinSplit { exponents, coefficients, fit_residual, t0: cfg.t0, u, weights, theta })
    }

    /// zeta(s), with removable singularities at s = -n handled exactly.
    pub fn zeta(&self, s: Complex64) -> Result<Complex64> {
        let rg = recip_gamma(s);
        let mut acc = ComplexSum::new();
        for (&p, &c) in self.exponents.iter().zip(&self.coefficients) {
            let q = s + p;
            if q.norm() < 1e-12 {
                let n = -s.re;
                let near_int = s.im.abs() < 1e-12 && (n - n.round()).abs() < 1e-12 && n.round() >= 0.0;
                if !near_int {
                    return Err(Error::Pole { point: format!("{s}"), order: -1 });
                }
                let n = n.round() as u32;
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                acc.add(Complex64::new(c * sign * fact, 0.0));
            } else {
                acc.add(rg * c * (q * self.t0.ln()).exp() / q);
            }
        }
        let mut integral = ComplexSum::new();
        for i in 0..self.u.len() {
            integral.add(self.weights[i] * self.theta[i] * (s * self.u[i]).exp());
        }
        acc.add(rg * integral.value());
        Ok(acc.value())
    }

    /// Size of the fitted part, scaled by the fit residual.
    pub fn error_estimate(&self, s: Complex64) -> f64 {
        let rg = recip_gamma(s).norm().max(1e-300);
        let fit: f64 = self
            .exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(&p, &c)| {
                let q = s.re + p;
                if q.abs() < 1e-12 {
                    c.abs()
                } else {
                    rg * (c * self.t0.powf(q) / q).abs()
                }
            })
            .sum();
        self.fit_residual * fit + 1e-15
    }
}

/// Weighted least squares of theta(t) against t^{p_k} on [t0, fit_hi].
fn fit_expansion<F>(trace: &F, d: f64, cfg: &MellinConfig) -> Result<(Vec<f64>, Vec<f64>, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let exponents = expansion_exponents(d);
    let n = cfg.fit_points.max(exponents.len() + 2);
    let (la, lb) = (cfg.t0.ln(), cfg.fit_hi.ln());
    let ts: Vec<f64> = (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect();
    let values: Vec<f64> = ts.par_iter().map(|&t| trace(t)).collect::<Result<_>>()?;
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Precondition(
            "heat trace is not positive on the fitting window; the spectrum is too short".into(),
        ));
    }
    let mut a = DMatrix::<f64>::zeros(n, exponents.len());
    for (i, &t) in ts.iter().enumerate() {
        for (j, &p) in exponents.iter().enumerate() {
            a[(i, j)] = t.powf(p) / values[i];
        }
    }
    let scales: Vec<f64> = (0..exponents.len()).map(|j| a.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::<f64>::from_element(n, 1.0);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-15)
        .map_err(|e| Error::Instability(format!("expansion fit failed: {e}")))?;
    let coefficients: Vec<f64> = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let r = &a * &x - &b;
    let residual = (r.norm_squared() / n as f64).sqrt();
    if !(residual <= cfg.fit_tol) {
        return Err(Error::Precondition(format!(
            "small-t expansion does not stabilize (relative rms residual {residual:.3e}); the spectrum is too short"
        )));
    }
    // the declared leading power must carry the trace at t0
    let lead = coefficients[0] * cfg.t0.powf(exponents[0]) / values[0];
    if !((lead - 1.0).abs() <= 0.5) {
        return Err(Error::Precondition(format!(
            "the t^{} term carries {:.3} of the heat trace at t = {}; the spectrum is too short",
            exponents[0], lead, cfg.t0
        )));
    }
    Ok((exponents, coefficients, residual))
}

/// Which summation route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaRoute {
    Direct,
    Mellin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralZeta {
    pub value: Complex64,
    pub error_estimate: f64,
    pub route: ZetaRoute,
}

/// Dirichlet series over the list plus a Weyl-law estimate of the omitted
/// eigenvalues (none for a finite list).
pub fn spectral_zeta_direct(spec: &EigenvalueSpectrum, s: Complex64, lambda_shift: f64) -> Result<SpectralZeta> {
    spec.validate()?;
    let d = spec.heat_dimension;
    if d > 0.0 && !(s.re > d / 2.0) {
        return Err(Error::Divergence { re_s: s.re, abscissa: d / 2.0 });
    }
    let list = spec.shifted_positive(lambda_shift);
    let mut acc = ComplexSum::new();
    for &(l, m) in &list {
        acc.add(m * (-s * l.ln()).exp());
    }
    let mut tail = Complex64::new(0.0, 0.0);
    if d > 0.0 {
        if let Some(&(top, _)) = list.last() {
            let count: f64 = list.iter().map(|(_, m)| m).sum();
            let c = count / top.powf(d / 2.0);
            tail = c * (d / 2.0) * ((d / 2.0 - s) * top.ln()).exp() / (s - d / 2.0);
        }
    }
    acc.add(tail);
    Ok(SpectralZeta { value: acc.value(), error_estimate: tail.norm(), route: ZetaRoute::Direct })
}

fn split_for(spec: &EigenvalueSpectrum, lambda_shift: f64, re_s_max: f64, cfg: &MellinConfig) -> Result<MellinSplit> {
    spec.validate()?;
    let list = spec.shifted_positive(lambda_shift);
    if list.is_empty() {
        return Err(Error::Precondition(format!("{}: no positive eigenvalues", spec.label)));
    }
    MellinSplit::build(
        |t| Ok(sum_f64(list.iter().map(|&(l, m)| m * (-t * l).exp()))),
        spec.heat_dimension,
        re_s_max,
        cfg,
    )
}

pub fn spectral_zeta_mellin(
    spec: &EigenvalueSpectrum,
    s: Complex64,
    lambda_shift: f64,
    cfg: &MellinConfig,
) -> Result<SpectralZeta> {
    let split = split_for(spec, lambda_shift, s.re.max(0.0), cfg)?;
    Ok(SpectralZeta {
        value: split.zeta(s)?,
        error_estimate: split.error_estimate(s),
        route: ZetaRoute::Mellin,
    })
}

/// zeta of D + lambda_shift on its positive eigenvalues. Finite lists and
/// points with Re s > d/2 + 1 are summed directly; the rest goes through the
/// Mellin split.
pub fn spectral_zeta(spec: &EigenvalueSpectrum, s: Complex64, lambda_shift: f64) -> Result<SpectralZeta> {
    let d = spec.heat_dimension;
    if d == 0.0 || s.re > d / 2.0 + 1.0 {
        spectral_zeta_direct(spec, s, lambda_shift)
    } else {
        spectral_zeta_mellin(spec, s, lambda_shift, &MellinConfig::default())
    }
}

pub fn zeta_at_zero(spec: &EigenvalueSpectrum) -> Result<f64> {
    Ok(spectral_zeta(spec, Complex64::new(0.0, 0.0), 0.0)?.value.re)
}

/// -zeta'(0) from central differences with Richardson extrapolation, h
/// halved from 0.1 until successive estimates agree to 1e-9.
pub fn neg_zeta_prime_at_zero<F>(zeta: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((zeta(h)? - zeta(-h)?) / (2.0 * h)) };
    let mut h = 0.1;
    let mut d_prev = central(h)?;
    let mut r_prev: Option<f64> = None;
    loop {
        h /= 2.0;
        if h < 1e-6 {
            return Err(Error::Instability(format!(
                "zeta'(0) did not settle before h < 1e-6 (last estimate {})",
                r_prev.unwrap_or(d_prev)
            )));
        }
        let d = central(h)?;
        let r = (4.0 * d - d_prev) / 3.0;
        if let Some(rp) = r_prev {
            if (r - rp).abs() < 1e-9 * r.abs().max(1.0) {
                return Ok(-r);
            }
        }
        r_prev = Some(r);
        d_prev = d;
    }
}

/// ln det'(D) = -zeta'(0).
pub fn log_det_prime(spec: &EigenvalueSpectrum) -> Result<f64> {
    spec.validate()?;
    if spec.heat_dimension == 0.0 {
        // finite list: -zeta'(0) = sum m ln(lambda) exactly
        return Ok(sum_f64(spec.shifted_positive(0.0).iter().map(|&(l, m)| m * l.ln())));
    }
    let split = split_for(spec, 0.0, 0.1, &MellinConfig::default())?;
    neg_zeta_prime_at_zero(|h| Ok(split.zeta(Complex64::new(h, 0.0))?.re))
}

pub fn det_prime(spec: &EigenvalueSpectrum) -> Result<f64> {
    Ok(log_det_prime(spec)?.exp())
}

/// q (-1)^{q+1}.
pub fn torsion_exponent(q: usize) -> i64 {
    let q = q as i64;
    if q % 2 == 1 {
        q
    } else {
        -q
    }
}

/// prod_q det'_q^{q (-1)^{q+1}} from determinants indexed by q.
pub fn torsion_from_determinants(dets: &[f64]) -> Result<f64> {
    let mut log_t = CompensatedSum::new();
    for (q, &d) in dets.iter().enumerate() {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Precondition(format!("determinant {q} must be positive, got {d}")));
        }
        log_t.add(torsion_exponent(q) as f64 * d.ln());
    }
    Ok(log_t.value().exp())
}

/// prod_q det'(Delta_q)^{q (-1)^{q+1}}, spectra indexed by q.
pub fn torsion(specs: &[EigenvalueSpectrum]) -> Result<f64> {
    let mut log_t = CompensatedSum::new();
    for (q, spec) in specs.iter().enumerate() {
        let e = torsion_exponent(q);
        if e != 0 {
            log_t.add(e as f64 * log_det_prime(spec)?);
        }
    }
    Ok(log_t.value().exp())
}
