//! Gamma-traces from Plancherel densities, Novikov-Shubin fits and L²
//! determinants and torsion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{neg_zeta_prime_at_zero, torsion_exponent, MellinConfig, MellinSplit};
use super::spline::CubicSpline;
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::sum::CompensatedSum;

/// Relative RMS residual (in log space) above which a power-law fit is
/// rejected.
pub const NS_RESIDUAL_THRESHOLD: f64 = 0.05;

/// Plancherel density p(r) on [0, inf) with a declared polynomial growth
/// degree k: p(r) <= C (1 + r)^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Density {
    /// Cubic spline through (r, p); beyond the last knot the value is
    /// continued as p_last ((1 + r)/(1 + r_last))^k.
    Table { r: Vec<f64>, p: Vec<f64>, growth_degree: f64 },
    /// Closed form in the variable `r`.
    Expr { expr: String, growth_degree: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlancherelModel {
    pub label: String,
    pub shift: f64,
    pub volume: f64,
    /// Small-t exponent d of the trace; estimated from the trace if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_dimension: Option<f64>,
    pub density: Density,
}

enum Compiled {
    Table(CubicSpline, f64),
    Expr(meval::Expr),
}

impl PlancherelModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: PlancherelModel = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn with_volume(&self, volume: f64) -> Self {
        PlancherelModel { volume, ..self.clone() }
    }

    fn growth_degree(&self) -> f64 {
        match &self.density {
            Density::Table { growth_degree, .. } | Density::Expr { growth_degree, .. } => *growth_degree,
        }
    }

    fn compile(&self) -> Result<Compiled> {
        match &self.density {
            Density::Table { r, p, growth_degree } => {
                if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Validation(format!("{}: density table has negative values", self.label)));
                }
                Ok(Compiled::Table(CubicSpline::new(r, p)?, *growth_degree))
            }
            Density::Expr { expr, .. } => {
                let e: meval::Expr = expr
                    .parse()
                    .map_err(|e| Error::Parse(format!("{}: density expression: {e}", self.label)))?;
                if let Err(err) = e.clone().bind("r") {
                    return Err(Error::Parse(format!("{}: density expression: {err}", self.label)));
                }
                Ok(Compiled::Expr(e))
            }
        }
    }

    /// Runs `f` with the density as a plain function.
    fn with_density<R>(&self, f: impl FnOnce(&dyn Fn(f64) -> f64) -> R) -> Result<R> {
        match self.compile()? {
            Compiled::Table(spline, k) => {
                let (r_last, p_last) = spline.last();
                let p = move |r: f64| {
                    if r <= r_last {
                        spline.eval(r).max(0.0)
                    } else {
                        p_last * ((1.0 + r) / (1.0 + r_last)).powf(k)
                    }
                };
                Ok(f(&p))
            }
            Compiled::Expr(e) => {
                let bound = e.bind("r").map_err(|e| Error::Parse(e.to_string()))?;
                Ok(f(&bound))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volume.is_finite() && self.volume > 0.0) {
            return Err(Error::Validation(format!("{}: volume must be positive", self.label)));
        }
        if !self.shift.is_finite() {
            return Err(Error::Validation(format!("{}: shift is not finite", self.label)));
        }
        let k = self.growth_degree();
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Validation(format!("{}: growth_degree must be non-negative", self.label)));
        }
        if let Some(d) = self.heat_dimension {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Validation(format!("{}: heat_dimension must be positive", self.label)));
            }
        }
        self.with_density(|p| check_growth(&self.label, p, k))?
    }

    pub fn heat_dimension_or_estimate(&self) -> Result<f64> {
        if let Some(d) = self.heat_dimension {
            return Ok(d);
        }
        let ts: Vec<f64> = (0..10).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 9.0)).collect();
        let samples: Vec<(f64, f64)> = ts.iter().map(|&t| Ok((t, l2_heat_trace(self, t)?))).collect::<Result<_>>()?;
        let (slope, _, _) = log_log_fit(&samples);
        Ok(-2.0 * slope)
    }
}

/// Rejects densities that are negative or outgrow C (1 + r)^k, with C taken
/// from [0, 10].
fn check_growth(label: &str, p: &dyn Fn(f64) -> f64, k: f64) -> Result<()> {
    let mut c: f64 = 0.0;
    for i in 0..=100 {
        let r = i as f64 * 0.1;
        let v = p(r);
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Validation(format!("{label}: density p({r}) = {v} is not a non-negative number")));
        }
        c = c.max(v / (1.0 + r).powf(k));
    }
    let c = c.max(1e-300);
    let mut r = 10.0;
    while r <= 1e7 {
        let v = p(r);
        if !(v.is_finite() && v >= 0.0) || v > 1e6 * c * (1.0 + r).powf(k) {
            return Err(Error::TailBound(format!(
                "{label}: p({r}) = {v:e} exceeds the declared degree-{k} growth"
            )));
        }
        r *= 1.5;
    }
    Ok(())
}

/// volume * int_0^inf e^{-t (r^2 + shift)} p(r) dr, integrated in x = r sqrt(t).
pub fn l2_heat_trace(model: &PlancherelModel, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let st = t.sqrt();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 2000 };
    // e^{-x^2} is below 1e-62 beyond x = 12
    let integral = model.with_density(|p| integrate(|x| (-x * x).exp() * p(x / st), 0.0, 12.0, opts))??;
    Ok(model.volume * (-t * model.shift).exp() / st * integral.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsFit {
    pub alpha: f64,
    /// RMS of the residuals of ln trace.
    pub residual: f64,
    pub slope: f64,
    pub intercept: f64,
}

fn log_log_fit(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// alpha = -2 * slope of ln trace against ln t.
pub fn novikov_shubin_estimate(samples: &[(f64, f64)]) -> Result<NsFit> {
    if samples.len() < 8 {
        return Err(Error::Precondition(format!("need at least 8 samples, got {}", samples.len())));
    }
    for &(t, v) in samples {
        if !(t.is_finite() && t >= 1.0) {
            return Err(Error::Precondition(format!("sample time {t} is below 1")));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Precondition(format!("trace {v} at t = {t} is not positive")));
        }
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if hi / lo < 100.0 {
        return Err(Error::Precondition(format!("samples span {:.1}x; need two decades", hi / lo)));
    }
    let (slope, intercept, residual) = log_log_fit(samples);
    let alpha = -2.0 * slope;
    if !(residual <= NS_RESIDUAL_THRESHOLD) {
        return Err(Error::IllConditionedFit { alpha, residual });
    }
    Ok(NsFit { alpha, residual, slope, intercept })
}

/// Large-t decay check on [10, 1e4]; traces that underflow decay
/// exponentially and pass.
fn check_positive_alpha(model: &PlancherelModel) -> Result<()> {
    let samples: Vec<(f64, f64)> = (0..12)
        .map(|i| {
            let t = 10f64.powf(1.0 + 3.0 * i as f64 / 11.0);
            Ok((t, l2_heat_trace(model, t)?))
        })
        .collect::<Result<_>>()?;
    if samples.iter().any(|&(_, v)| v <= 0.0) {
        return Ok(());
    }
    let (slope, _, _) = log_log_fit(&samples);
    let alpha = -2.0 * slope;
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    Ok(())
}

/// ln det^(2) = -d/ds|_0 of the L² zeta function, continued by the Mellin
/// split at t = 1.
pub fn l2_log_det(model: &PlancherelModel, cfg: &MellinConfig) -> Result<f64> {
    model.validate()?;
    check_positive_alpha(model)?;
    // heat dimensions are integers; a fitted slope is rounded so the
    // expansion exponents stay apart
    let d = match model.heat_dimension {
        Some(d) => d,
        None => model.heat_dimension_or_estimate()?.round().max(1.0),
    };
    let split = MellinSplit::build(|t| l2_heat_trace(model, t), d, 0.1, cfg)?;
    neg_zeta_prime_at_zero(|h| Ok(split.zeta(Complex64::new(h, 0.0))?.re))
}

/// prod_q det^(2)(Delta_q)^{q (-1)^{q+1}}, models indexed by q.
pub fn l2_torsion(models: &[PlancherelModel]) -> Result<f64> {
    l2_torsion_with(models, &MellinConfig::default())
}

pub fn l2_torsion_with(models: &[PlancherelModel], cfg: &MellinConfig) -> Result<f64> {
    let mut log_t = CompensatedSum::new();
    for (q, model) in models.iter().enumerate() {
        let e = torsion_exponent(q);
        if e != 0 {
            log_t.add(e as f64 * l2_log_det(model, cfg)?);
        }
    }
    Ok(log_t.value().exp())
}

/// T / (T^(2))^{dim w}.
pub fn torsion_ratio_assembly(torsion_value: f64, l2_torsion_value: f64, dim_omega: u32) -> Result<f64> {
    for (what, v) in [("torsion", torsion_value), ("L2 torsion", l2_torsion_value)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Precondition(format!("{what} must be positive, got {v}")));
        }
    }
    if dim_omega == 0 {
        return Err(Error::Precondition("dim omega must be positive".into()));
    }
    Ok((torsion_value.ln() - dim_omega as f64 * l2_torsion_value.ln()).exp())
}
