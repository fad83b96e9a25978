//! Rank-one structure data and the closed-form Lie-theoretic formulas that
//! the zeta and heat modules consume.
//!
//! A [`GroupDatum`] stores its norms pre-computed under a fixed multiple of
//! the Killing form (`b_scale`); nothing here derives them symbolically.
//! The catalog ships with the build (`data/catalog.json`); see
//! `docs/catalog.md` for how each constant was obtained.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive restricted roots as multiples of the real root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootLabel {
    Half,
    Full,
    Threehalf,
}

impl RootLabel {
    pub fn multiple(self) -> f64 {
        match self {
            RootLabel::Half => 0.5,
            RootLabel::Full => 1.0,
            RootLabel::Threehalf => 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictedRoot {
    pub label: RootLabel,
    pub multiplicity: u32,
}

/// One summand of the exterior-power decomposition, with its Casimir shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub c: u32,
    pub i: u32,
    pub s: f64,
    pub sign: i32,
    pub trace_tag: String,
    /// Dimension of the summand; the trace of the identity element.
    pub dim: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDatum {
    pub name: String,
    pub fundamental_rank: u32,
    pub restricted_roots: Vec<RestrictedRoot>,
    pub alpha_norm: f64,
    pub rho_p_norm: f64,
    pub b_scale: f64,
    /// B(rho) for the full Cartan; stored, not derived.
    pub b_rho: f64,
    pub dim_n: u32,
    pub dim_n_alpha: u32,
    pub dim_n_2alpha: u32,
    pub shift_table: Vec<ShiftEntry>,
    pub dim_p_m1: u32,
    pub dim_p_m2_minus: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootPattern {
    C1,
    C2,
    C3,
}

impl std::fmt::Display for RootPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RootPattern::C1 => "c1",
            RootPattern::C2 => "c2",
            RootPattern::C3 => "c3",
        })
    }
}

impl GroupDatum {
    pub fn multiplicity(&self, label: RootLabel) -> u32 {
        self.restricted_roots
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.multiplicity)
            .sum()
    }

    /// Half the sum of positive restricted roots, weighted by multiplicity.
    pub fn rho_from_roots(&self) -> f64 {
        0.5 * self
            .restricted_roots
            .iter()
            .map(|r| r.multiplicity as f64 * r.label.multiple() * self.alpha_norm)
            .sum::<f64>()
    }

    /// Root multiples present with nonzero multiplicity, ascending.
    pub fn root_multiples(&self) -> Vec<(RootLabel, u32)> {
        let mut out: Vec<(RootLabel, u32)> = [RootLabel::Half, RootLabel::Full, RootLabel::Threehalf]
            .into_iter()
            .map(|l| (l, self.multiplicity(l)))
            .filter(|(_, m)| *m > 0)
            .collect();
        out.sort_by_key(|(l, _)| *l);
        out
    }

    pub fn shift(&self, c: u32, i: u32) -> Option<&ShiftEntry> {
        self.shift_table.iter().find(|e| e.c == c && e.i == i)
    }

    /// Checks every structural invariant; the first violation is reported.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(format!("datum {}: {msg}", self.name)));
        for (what, v) in [
            ("alpha_norm", self.alpha_norm),
            ("rho_p_norm", self.rho_p_norm),
            ("b_scale", self.b_scale),
            ("b_rho", self.b_rho),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{what} must be positive, got {v}"));
            }
        }
        let full_entries = self
            .restricted_roots
            .iter()
            .filter(|r| r.label == RootLabel::Full && r.multiplicity > 0)
            .count();
        if full_entries != 1 {
            return bad(format!("expected exactly one real root, found {full_entries}"));
        }
        restricted_root_pattern(self)?;
        let rho = self.rho_from_roots();
        if (rho - self.rho_p_norm).abs() > 1e-12 * rho.max(1.0) {
            return bad(format!("rho_p_norm {} differs from root data {rho}", self.rho_p_norm));
        }
        for e in &self.shift_table {
            let expected = if e.c % 2 == 0 { 1 } else { -1 };
            if e.sign != expected {
                return bad(format!("shift (c={}, i={}) has sign {} != (-1)^c", e.c, e.i, e.sign));
            }
            if !(e.s.is_finite() && e.s >= 0.0) {
                return bad(format!("shift (c={}, i={}) has s = {}", e.c, e.i, e.s));
            }
        }
        for (k, e) in self.shift_table.iter().enumerate() {
            if self.shift_table[..k].iter().any(|o| o.c == e.c && o.i == e.i) {
                return bad(format!("duplicate shift entry (c={}, i={})", e.c, e.i));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub catalog_version: u32,
    pub normalization: String,
    pub entries: Vec<GroupDatum>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Result<&GroupDatum> {
        self.entries
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::Validation(format!("unknown datum `{name}`")))
    }
}

static CATALOG: OnceLock<Catalog> = OnceLock::new();

pub fn catalog() -> &'static Catalog {
    CATALOG.get_or_init(|| {
        serde_json::from_str(include_str!("../data/catalog.json")).expect("embedded catalog parses")
    })
}

pub fn datum(name: &str) -> Result<&'static GroupDatum> {
    catalog().get(name)
}

/// pi_{xi,nu}(C) = B(nu) + B(lambda_xi) - B(rho).
pub fn casimir_principal_series(datum: &GroupDatum, b_nu: f64, b_lambda_xi: f64) -> f64 {
    b_nu + b_lambda_xi - datum.b_rho
}

fn b_dot(datum: &GroupDatum, x: &[f64], y: &[f64]) -> f64 {
    datum.b_scale * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
}

/// Formal degree d(lambda) = prod over positive roots of (alpha, lambda + rho) / (alpha, rho).
pub fn formal_degree(
    datum: &GroupDatum,
    lambda: &[f64],
    positive_roots: &[Vec<f64>],
    rho: &[f64],
) -> Result<f64> {
    if lambda.len() != rho.len() || positive_roots.iter().any(|a| a.len() != rho.len()) {
        return Err(Error::Domain("weight vectors must share one dimension".into()));
    }
    let shifted: Vec<f64> = lambda.iter().zip(rho).map(|(l, r)| l + r).collect();
    let mut degree = 1.0;
    for alpha in positive_roots {
        let den = b_dot(datum, alpha, rho);
        let scale = b_dot(datum, alpha, alpha).abs().sqrt() * b_dot(datum, rho, rho).abs().sqrt();
        if den == 0.0 || den.abs() <= 1e-14 * scale {
            return Err(Error::DivisionByZero(format!("(alpha, rho) = 0 for alpha = {alpha:?}")));
        }
        degree *= b_dot(datum, alpha, &shifted) / den;
    }
    Ok(degree)
}

fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i128 / (j + 1) as i128;
    }
    acc as i64
}

/// Sum over q = a..=m of q (-1)^q binom(r, q - a), evaluated term by term.
pub fn alternating_binomial(m: u32, r: u32, a: u32) -> Result<i64> {
    if r < 1 {
        return Err(Error::Domain(format!("r must be at least 1, got {r}")));
    }
    if r > m || a > m - r {
        return Err(Error::Domain(format!("need a <= m - r, got m={m}, r={r}, a={a}")));
    }
    let mut total: i64 = 0;
    for q in a..=m {
        let sign = if q % 2 == 0 { 1 } else { -1 };
        total += sign * q as i64 * binomial(r, q - a);
    }
    Ok(total)
}

/// Classifies the positive restricted roots into the three admissible shapes.
pub fn restricted_root_pattern(datum: &GroupDatum) -> Result<RootPattern> {
    let present: Vec<RootLabel> = datum
        .restricted_roots
        .iter()
        .filter(|r| r.multiplicity > 0)
        .map(|r| r.label)
        .collect();
    let mut labels = present.clone();
    labels.sort();
    labels.dedup();
    if labels.len() != present.len() {
        return Err(Error::InvalidPattern(format!("{}: repeated root label", datum.name)));
    }
    use RootLabel::*;
    let pattern = match labels.as_slice() {
        [Full] => RootPattern::C1,
        [Half, Full] => RootPattern::C2,
        [Half, Full, Threehalf] => RootPattern::C3,
        other => {
            return Err(Error::InvalidPattern(format!("{}: root set {other:?}", datum.name)));
        }
    };
    let (n_alpha, n_2alpha) = match pattern {
        RootPattern::C1 => (datum.multiplicity(Full), 0),
        _ => (datum.multiplicity(Half) + datum.multiplicity(Threehalf), datum.multiplicity(Full)),
    };
    if n_alpha != datum.dim_n_alpha
        || n_2alpha != datum.dim_n_2alpha
        || n_alpha + n_2alpha != datum.dim_n
    {
        return Err(Error::InvalidPattern(format!(
            "{}: dims (n={}, n_alpha={}, n_2alpha={}) disagree with roots ({n_alpha}, {n_2alpha})",
            datum.name, datum.dim_n, datum.dim_n_alpha, datum.dim_n_2alpha
        )));
    }
    Ok(pattern)
}
