//! Geodesic length spectra: data model, validation, power extension and a
//! synthetic generator for tests.

mod file;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lie::{self, GroupDatum, RootLabel};

pub use file::{canonical_json, load_spectrum, parse_spectrum, to_canonical_json, write_spectrum, SCHEMA_VERSION};
pub use synth::{synth_spectrum, SYNTH_MIN_LENGTH};

/// Holonomy or representation data for a primitive class: either the full
/// eigenvalue list (so powers can be formed) or just the trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceData {
    Eigenvalues(Vec<Complex64>),
    Trace(Complex64),
}

impl TraceData {
    /// Trace of the `k`-th power.
    pub fn power_trace(&self, k: u32) -> Option<Complex64> {
        match self {
            TraceData::Eigenvalues(ev) => Some(ev.iter().map(|e| e.powu(k)).sum()),
            TraceData::Trace(t) if k == 1 => Some(*t),
            TraceData::Trace(_) => None,
        }
    }

    pub fn eigenvalues(&self) -> Option<&[Complex64]> {
        match self {
            TraceData::Eigenvalues(ev) => Some(ev),
            TraceData::Trace(_) => None,
        }
    }

    fn conj(&self) -> Self {
        match self {
            TraceData::Eigenvalues(ev) => TraceData::Eigenvalues(ev.iter().map(|e| e.conj()).collect()),
            TraceData::Trace(t) => TraceData::Trace(t.conj()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub id: String,
    pub length: f64,
    pub chi1: f64,
    pub omega: TraceData,
    pub holonomy: BTreeMap<String, TraceData>,
    /// Eigenvalues of Ad(a b)^{-1} on n; all of modulus < 1.
    pub n_eigenvalues: Vec<Complex64>,
}

/// One class gamma = gamma_0^mu with everything the evaluators need cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicClass {
    pub primitive_id: String,
    pub mu: u32,
    pub length: f64,
    pub primitive_length: f64,
    pub chi1: f64,
    pub n_eigenvalues: Vec<Complex64>,
    pub omega_trace: Complex64,
    pub holonomy_traces: BTreeMap<String, Complex64>,
    /// Monodromy factor per trace tag for regular classes; absent tags mean 1.
    pub monodromy: BTreeMap<String, Complex64>,
    /// det(1 - gamma | n) = prod (1 - e_j).
    pub det_n: Complex64,
}

impl GeodesicClass {
    pub fn label(&self) -> String {
        format!("{}^{}", self.primitive_id, self.mu)
    }

    pub fn holonomy_trace(&self, tag: &str) -> Result<Complex64> {
        self.holonomy_traces.get(tag).copied().ok_or_else(|| Error::MissingTrace {
            tag: tag.to_string(),
            class: self.label(),
        })
    }

    pub fn monodromy(&self, tag: &str) -> Complex64 {
        self.monodromy.get(tag).copied().unwrap_or(Complex64::new(1.0, 0.0))
    }
}

pub fn det_one_minus(eigenvalues: &[Complex64]) -> Complex64 {
    eigenvalues
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, e| acc * (1.0 - e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    pub datum_name: String,
    /// All primitive classes of length <= cutoff are claimed present.
    pub cutoff: f64,
    pub provenance: String,
    pub synthetic: bool,
    /// Exponential growth rate of the class count, when the producer knows it.
    pub growth: Option<f64>,
    pub primitives: Vec<Primitive>,
    /// Sorted by (length, primitive id, mu).
    pub classes: Vec<GeodesicClass>,
}

fn class_from_primitive(p: &Primitive, mu: u32) -> Result<GeodesicClass> {
    let omega_trace = p
        .omega
        .power_trace(mu)
        .ok_or_else(|| Error::MissingEigenvalues(p.id.clone()))?;
    let mut holonomy_traces = BTreeMap::new();
    for (tag, data) in &p.holonomy {
        let t = data.power_trace(mu).ok_or_else(|| Error::MissingEigenvalues(p.id.clone()))?;
        holonomy_traces.insert(tag.clone(), t);
    }
    let n_eigenvalues: Vec<Complex64> = p.n_eigenvalues.iter().map(|e| e.powu(mu)).collect();
    let det_n = det_one_minus(&n_eigenvalues);
    Ok(GeodesicClass {
        primitive_id: p.id.clone(),
        mu,
        length: mu as f64 * p.length,
        primitive_length: p.length,
        chi1: p.chi1,
        n_eigenvalues,
        omega_trace,
        holonomy_traces,
        monodromy: BTreeMap::new(),
        det_n,
    })
}

fn sort_classes(classes: &mut [GeodesicClass]) {
    classes.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then_with(|| a.primitive_id.cmp(&b.primitive_id))
            .then_with(|| a.mu.cmp(&b.mu))
    });
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Greedy check that a multiset of complex numbers is closed under conjugation.
fn conjugation_closed(values: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        let target = values[i].conj();
        let partner = (0..values.len())
            .filter(|&j| !used[j] && j != i)
            .find(|&j| (values[j] - target).norm() <= tol)
            .or_else(|| ((values[i] - target).norm() <= tol).then_some(i));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Splits the n-eigenvalues of a class by restricted-root multiple, using
/// |e| = exp(-multiple * |alpha_r| * length).
pub fn partition_by_root(
    datum: &GroupDatum,
    length: f64,
    eigenvalues: &[Complex64],
) -> Result<BTreeMap<RootLabel, Vec<Complex64>>> {
    let labels = datum.root_multiples();
    let mut groups: BTreeMap<RootLabel, Vec<Complex64>> = BTreeMap::new();
    for e in eigenvalues {
        let m = -e.norm().ln() / (datum.alpha_norm * length);
        let label = labels
            .iter()
            .map(|(l, _)| *l)
            .find(|l| (l.multiple() - m).abs() <= 1e-8)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "n-eigenvalue {e} at length {length} has root multiple {m:.6}, not one of {:?}",
                    labels.iter().map(|(l, _)| l.multiple()).collect::<Vec<_>>()
                ))
            })?;
        groups.entry(label).or_default().push(*e);
    }
    for (label, mult) in labels {
        let got = groups.get(&label).map_or(0, |g| g.len());
        if got != mult as usize {
            return Err(Error::Validation(format!(
                "length {length}: {got} eigenvalues for root {label:?}, expected {mult}"
            )));
        }
    }
    Ok(groups)
}

impl LengthSpectrum {
    pub fn datum(&self) -> Result<&'static GroupDatum> {
        lie::datum(&self.datum_name)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn primitive(&self, id: &str) -> Option<&Primitive> {
        self.primitives.iter().find(|p| p.id == id)
    }

    /// Builds a spectrum from primitives and the (id, mu) pairs present,
    /// then validates it.
    pub fn from_parts(
        datum_name: String,
        cutoff: f64,
        provenance: String,
        synthetic: bool,
        growth: Option<f64>,
        primitives: Vec<Primitive>,
        class_keys: &[(String, u32)],
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for p in &primitives {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::Validation(format!("duplicate primitive id {}", p.id)));
            }
        }
        let mut classes = Vec::with_capacity(class_keys.len());
        let mut seen = BTreeSet::new();
        for (id, mu) in class_keys {
            if !seen.insert((id.clone(), *mu)) {
                return Err(Error::Validation(format!("duplicate class {id}^{mu}")));
            }
            if *mu == 0 {
                return Err(Error::Validation(format!("class {id}^0: mu must be at least 1")));
            }
            let p = primitives
                .iter()
                .find(|p| &p.id == id)
                .ok_or_else(|| Error::Validation(format!("class {id}^{mu}: unknown primitive")))?;
            classes.push(class_from_primitive(p, *mu)?);
        }
        sort_classes(&mut classes);
        let spectrum = LengthSpectrum {
            datum_name,
            cutoff,
            provenance,
            synthetic,
            growth,
            primitives,
            classes,
        };
        spectrum.validate()?;
        Ok(spectrum)
    }

    /// Checks every invariant; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        let datum = self.datum()?;
        let bad = |msg: String| Err(Error::Validation(msg));
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return bad(format!("cutoff must be positive, got {}", self.cutoff));
        }
        if let Some(g) = self.growth {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("growth must be non-negative, got {g}"));
            }
        }
        for p in &self.primitives {
            if !(p.length.is_finite() && p.length > 0.0) {
                return bad(format!("primitive {}: length must be positive, got {}", p.id, p.length));
            }
            if !p.chi1.is_finite() {
                return bad(format!("primitive {}: chi1 is not finite", p.id));
            }
            if p.n_eigenvalues.len() != datum.dim_n as usize {
                return bad(format!(
                    "primitive {}: {} n-eigenvalues, datum {} has dim n = {}",
                    p.id,
                    p.n_eigenvalues.len(),
                    datum.name,
                    datum.dim_n
                ));
            }
            if let Some(e) = p.n_eigenvalues.iter().find(|e| !(e.norm() < 1.0)) {
                return bad(format!("primitive {}: n-eigenvalue {e} is not contracting", p.id));
            }
            let groups = partition_by_root(datum, p.length, &p.n_eigenvalues)
                .map_err(|e| Error::Validation(format!("primitive {}: {e}", p.id)))?;
            for (label, g) in &groups {
                if !conjugation_closed(g, 1e-12) {
                    return bad(format!(
                        "primitive {}: n-eigenvalues of root {label:?} are not closed under conjugation",
                        p.id
                    ));
                }
            }
            if let TraceData::Eigenvalues(ev) = &p.omega {
                if ev.is_empty() {
                    return bad(format!("primitive {}: omega has no eigenvalues", p.id));
                }
                if let Some(e) = ev.iter().find(|e| (e.norm() - 1.0).abs() > 1e-9) {
                    return bad(format!("primitive {}: omega eigenvalue {e} is not unitary", p.id));
                }
            }
        }
        for c in &self.classes {
            let p = self
                .primitive(&c.primitive_id)
                .ok_or_else(|| Error::Validation(format!("class {}: unknown primitive", c.label())))?;
            if c.mu < 1 || !(c.length > 0.0) {
                return bad(format!("class {}: bad mu or length", c.label()));
            }
            if !close(c.length / c.mu as f64, p.length, 1e-12) {
                return bad(format!(
                    "class {}: length/mu = {} but primitive length is {}",
                    c.label(),
                    c.length / c.mu as f64,
                    p.length
                ));
            }
            if !close(c.chi1, p.chi1, 1e-12) {
                return bad(format!(
                    "class {}: chi1 = {} differs from its primitive's {} (X_gamma^n = X_gamma)",
                    c.label(),
                    c.chi1,
                    p.chi1
                ));
            }
            let prod = det_one_minus(&c.n_eigenvalues);
            if (c.det_n - prod).norm() > 1e-12 * (1.0 + c.det_n.norm()) {
                return bad(format!(
                    "class {}: det_n = {} but prod(1 - e_j) = {prod}",
                    c.label(),
                    c.det_n
                ));
            }
            if let Some(e) = c.n_eigenvalues.iter().find(|e| !(e.norm() < 1.0)) {
                return bad(format!("class {}: n-eigenvalue {e} is not contracting", c.label()));
            }
        }
        if self.classes.windows(2).any(|w| w[0].length > w[1].length) {
            return bad("classes are not sorted by length".into());
        }
        Ok(())
    }

    /// Length up to which every class (primitives and their powers) is present.
    pub fn complete_to(&self) -> f64 {
        let mut limit = self.cutoff;
        for p in &self.primitives {
            let mut k = 1u32;
            while self.classes.iter().any(|c| c.primitive_id == p.id && c.mu == k) {
                k += 1;
            }
            limit = limit.min(k as f64 * p.length);
        }
        limit
    }

    /// Growth rate of the class count: metadata if present, otherwise solved
    /// from N(L) ~ exp(gL)/(gL) at the cutoff.
    pub fn growth_rate(&self) -> f64 {
        if let Some(g) = self.growth {
            return g;
        }
        let n = self.primitives.iter().filter(|p| p.length <= self.cutoff).count() as f64;
        if n <= std::f64::consts::E {
            return 0.0;
        }
        // x - ln x = ln n with x = g L >= 1
        let target = n.ln();
        let mut x = target.max(1.0) + target.max(1.0).ln();
        for _ in 0..60 {
            let step = (x - x.ln() - target) / (1.0 - 1.0 / x);
            x -= step;
            if step.abs() < 1e-14 * x {
                break;
            }
        }
        x / self.cutoff
    }

    /// The opposite-parabolic transform: w conjugates every compact phase, so
    /// n-eigenvalue phases and holonomy eigenvalues are conjugated while
    /// moduli (the A-part) are kept.
    pub fn opposite_parabolic(&self) -> Result<LengthSpectrum> {
        let primitives: Vec<Primitive> = self
            .primitives
            .iter()
            .map(|p| Primitive {
                id: p.id.clone(),
                length: p.length,
                chi1: p.chi1,
                omega: p.omega.clone(),
                holonomy: p.holonomy.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
                n_eigenvalues: p.n_eigenvalues.iter().map(|e| e.conj()).collect(),
            })
            .collect();
        let mut classes: Vec<GeodesicClass> = self
            .classes
            .iter()
            .map(|c| GeodesicClass {
                n_eigenvalues: c.n_eigenvalues.iter().map(|e| e.conj()).collect(),
                holonomy_traces: c.holonomy_traces.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
                monodromy: c.monodromy.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
                det_n: c.det_n.conj(),
                ..c.clone()
            })
            .collect();
        sort_classes(&mut classes);
        let out = LengthSpectrum {
            primitives,
            classes,
            provenance: format!("{} [opposite parabolic]", self.provenance),
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }
}

/// Adds every power gamma_0^k with k * l(gamma_0) <= l_max. Existing classes
/// (and their per-class data) are kept, so the operation is idempotent.
pub fn extend_powers(spectrum: &LengthSpectrum, l_max: f64) -> Result<LengthSpectrum> {
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Error::Precondition(format!("l_max must be positive, got {l_max}")));
    }
    let mut classes = spectrum.classes.clone();
    let present: BTreeSet<(String, u32)> =
        classes.iter().map(|c| (c.primitive_id.clone(), c.mu)).collect();
    for p in &spectrum.primitives {
        let kmax = (l_max / p.length * (1.0 + 1e-12)).floor() as u32;
        for k in 1..=kmax {
            if !present.contains(&(p.id.clone(), k)) {
                classes.push(class_from_primitive(p, k)?);
            }
        }
    }
    sort_classes(&mut classes);
    let out = LengthSpectrum { classes, ..spectrum.clone() };
    out.validate()?;
    Ok(out)
}
