//! JSON spectrum files.
//!
//! Floats are written with 17 significant digits so that a write/load cycle
//! reproduces the in-memory spectrum bit for bit.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::{GeodesicClass, LengthSpectrum, Primitive, TraceData};
use crate::error::{Error, Result};
use crate::numerics::fmt_f64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct C {
    re: f64,
    im: f64,
}

impl From<C> for Complex64 {
    fn from(c: C) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for C {
    fn from(z: Complex64) -> Self {
        C { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimitiveRecord {
    id: String,
    length: f64,
    chi1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_eigenvalues: Option<Vec<C>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_trace: Option<C>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    holonomy: BTreeMap<String, Vec<C>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    holonomy_traces: BTreeMap<String, C>,
    n_eigenvalues: Vec<C>,
}

/// A class entry. Everything but the key is an optional cached value that is
/// checked against the primitive's data on load.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassRecord {
    primitive_id: String,
    mu: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    det_n: Option<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_trace: Option<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    holonomy_traces: Option<BTreeMap<String, C>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    monodromy: BTreeMap<String, C>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumFile {
    schema_version: u32,
    datum_name: String,
    cutoff: f64,
    provenance: String,
    #[serde(default)]
    synthetic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth: Option<f64>,
    primitives: Vec<PrimitiveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<ClassRecord>>,
}

fn cvec(v: &[C]) -> Vec<Complex64> {
    v.iter().map(|&c| c.into()).collect()
}

fn close_c(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

fn trace_data(
    owner: &str,
    what: &str,
    eigenvalues: Option<&Vec<C>>,
    trace: Option<&C>,
) -> Result<Option<TraceData>> {
    match (eigenvalues, trace) {
        (Some(ev), Some(t)) => {
            let sum: Complex64 = cvec(ev).iter().sum();
            if !close_c(sum, (*t).into()) {
                return Err(Error::Validation(format!(
                    "primitive {owner}: {what} trace {} disagrees with its eigenvalues (sum {sum})",
                    Complex64::from(*t)
                )));
            }
            Ok(Some(TraceData::Eigenvalues(cvec(ev))))
        }
        (Some(ev), None) => Ok(Some(TraceData::Eigenvalues(cvec(ev)))),
        (None, Some(t)) => Ok(Some(TraceData::Trace((*t).into()))),
        (None, None) => Ok(None),
    }
}

fn from_file(mut file: SpectrumFile) -> Result<LengthSpectrum> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let mut primitives = Vec::with_capacity(file.primitives.len());
    for rec in &file.primitives {
        let omega = trace_data(&rec.id, "omega", rec.omega_eigenvalues.as_ref(), rec.omega_trace.as_ref())?
            .unwrap_or(TraceData::Eigenvalues(vec![Complex64::new(1.0, 0.0)]));
        let mut holonomy = BTreeMap::new();
        let tags: std::collections::BTreeSet<&String> =
            rec.holonomy.keys().chain(rec.holonomy_traces.keys()).collect();
        for tag in tags {
            let data = trace_data(&rec.id, tag, rec.holonomy.get(tag), rec.holonomy_traces.get(tag))?
                .expect("tag came from one of the maps");
            holonomy.insert(tag.clone(), data);
        }
        primitives.push(Primitive {
            id: rec.id.clone(),
            length: rec.length,
            chi1: rec.chi1,
            omega,
            holonomy,
            n_eigenvalues: cvec(&rec.n_eigenvalues),
        });
    }
    let records: Vec<ClassRecord> = match file.classes.take() {
        Some(c) => c,
        None => file
            .primitives
            .iter()
            .map(|p| ClassRecord {
                primitive_id: p.id.clone(),
                mu: 1,
                length: None,
                chi1: None,
                det_n: None,
                omega_trace: None,
                holonomy_traces: None,
                monodromy: BTreeMap::new(),
            })
            .collect(),
    };

    let keys: Vec<(String, u32)> = records.iter().map(|r| (r.primitive_id.clone(), r.mu)).collect();
    // Classes whose primitive only carries traces may still be listed if the
    // record brings its own cached traces; build those by hand.
    let mut spectrum = match LengthSpectrum::from_parts(
        file.datum_name.clone(),
        file.cutoff,
        file.provenance.clone(),
        file.synthetic,
        file.growth,
        primitives.clone(),
        &keys,
    ) {
        Ok(s) => s,
        Err(Error::MissingEigenvalues(id)) => {
            let covered = records.iter().filter(|r| r.primitive_id == id && r.mu > 1).all(|r| {
                r.omega_trace.is_some() && r.holonomy_traces.is_some()
            });
            if !covered {
                return Err(Error::MissingEigenvalues(id));
            }
            build_with_cached(&file.datum_name, &file, primitives, &records)?
        }
        Err(e) => return Err(e),
    };

    for rec in &records {
        let class = spectrum
            .classes
            .iter_mut()
            .find(|c| c.primitive_id == rec.primitive_id && c.mu == rec.mu)
            .expect("class was built from this record");
        apply_cached(class, rec)?;
    }
    spectrum.validate()?;
    Ok(spectrum)
}

fn build_with_cached(
    datum_name: &str,
    file: &SpectrumFile,
    primitives: Vec<Primitive>,
    records: &[ClassRecord],
) -> Result<LengthSpectrum> {
    let mut classes = Vec::new();
    for rec in records {
        let p = primitives
            .iter()
            .find(|p| p.id == rec.primitive_id)
            .ok_or_else(|| Error::Validation(format!("class {}^{}: unknown primitive", rec.primitive_id, rec.mu)))?;
        let n_eigenvalues: Vec<Complex64> = p.n_eigenvalues.iter().map(|e| e.powu(rec.mu)).collect();
        let omega_trace = match (p.omega.power_trace(rec.mu), rec.omega_trace) {
            (Some(t), _) => t,
            (None, Some(t)) => t.into(),
            (None, None) => return Err(Error::MissingEigenvalues(p.id.clone())),
        };
        let mut holonomy_traces = BTreeMap::new();
        for (tag, data) in &p.holonomy {
            let cached = rec.holonomy_traces.as_ref().and_then(|m| m.get(tag)).copied();
            let t = match (data.power_trace(rec.mu), cached) {
                (Some(t), _) => t,
                (None, Some(t)) => t.into(),
                (None, None) => return Err(Error::MissingEigenvalues(p.id.clone())),
            };
            holonomy_traces.insert(tag.clone(), t);
        }
        classes.push(GeodesicClass {
            primitive_id: p.id.clone(),
            mu: rec.mu,
            length: rec.mu as f64 * p.length,
            primitive_length: p.length,
            chi1: p.chi1,
            det_n: super::det_one_minus(&n_eigenvalues),
            n_eigenvalues,
            omega_trace,
            holonomy_traces,
            monodromy: BTreeMap::new(),
        });
    }
    super::sort_classes(&mut classes);
    let s = LengthSpectrum {
        datum_name: datum_name.to_string(),
        cutoff: file.cutoff,
        provenance: file.provenance.clone(),
        synthetic: file.synthetic,
        growth: file.growth,
        primitives,
        classes,
    };
    s.validate()?;
    Ok(s)
}

/// Overlays the cached values of a record; the validator then checks them.
fn apply_cached(class: &mut GeodesicClass, rec: &ClassRecord) -> Result<()> {
    if let Some(l) = rec.length {
        class.length = l;
    }
    if let Some(chi) = rec.chi1 {
        class.chi1 = chi;
    }
    if let Some(d) = rec.det_n {
        class.det_n = d.into();
    }
    if let Some(t) = rec.omega_trace {
        if !close_c(t.into(), class.omega_trace) {
            return Err(Error::Validation(format!(
                "class {}: cached omega trace {} disagrees with computed {}",
                class.label(),
                Complex64::from(t),
                class.omega_trace
            )));
        }
    }
    if let Some(traces) = &rec.holonomy_traces {
        for (tag, t) in traces {
            match class.holonomy_traces.get(tag) {
                Some(have) if !close_c(*have, (*t).into()) => {
                    return Err(Error::Validation(format!(
                        "class {}: cached trace `{tag}` = {} disagrees with computed {have}",
                        class.label(),
                        Complex64::from(*t)
                    )));
                }
                Some(_) => {}
                None => {
                    class.holonomy_traces.insert(tag.clone(), (*t).into());
                }
            }
        }
    }
    class.monodromy = rec.monodromy.iter().map(|(k, v)| (k.clone(), (*v).into())).collect();
    Ok(())
}

fn to_file(s: &LengthSpectrum) -> SpectrumFile {
    let primitives = s
        .primitives
        .iter()
        .map(|p| {
            let (omega_eigenvalues, omega_trace) = match &p.omega {
                TraceData::Eigenvalues(ev) => (Some(ev.iter().map(|&z| z.into()).collect()), None),
                TraceData::Trace(t) => (None, Some((*t).into())),
            };
            let mut holonomy = BTreeMap::new();
            let mut holonomy_traces = BTreeMap::new();
            for (tag, data) in &p.holonomy {
                match data {
                    TraceData::Eigenvalues(ev) => {
                        holonomy.insert(tag.clone(), ev.iter().map(|&z| z.into()).collect());
                    }
                    TraceData::Trace(t) => {
                        holonomy_traces.insert(tag.clone(), (*t).into());
                    }
                }
            }
            PrimitiveRecord {
                id: p.id.clone(),
                length: p.length,
                chi1: p.chi1,
                omega_eigenvalues,
                omega_trace,
                holonomy,
                holonomy_traces,
                n_eigenvalues: p.n_eigenvalues.iter().map(|&z| z.into()).collect(),
            }
        })
        .collect();
    let classes = s
        .classes
        .iter()
        .map(|c| {
            let primitive = s.primitive(&c.primitive_id);
            // Traces that cannot be recomputed from eigenvalues must be written.
            let trace_only = primitive.is_some_and(|p| {
                c.mu > 1
                    && (p.omega.eigenvalues().is_none() || p.holonomy.values().any(|d| d.eigenvalues().is_none()))
            });
            ClassRecord {
                primitive_id: c.primitive_id.clone(),
                mu: c.mu,
                length: None,
                chi1: None,
                det_n: None,
                omega_trace: trace_only.then(|| c.omega_trace.into()),
                holonomy_traces: trace_only
                    .then(|| c.holonomy_traces.iter().map(|(k, v)| (k.clone(), (*v).into())).collect()),
                monodromy: c.monodromy.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
            }
        })
        .collect();
    SpectrumFile {
        schema_version: SCHEMA_VERSION,
        datum_name: s.datum_name.clone(),
        cutoff: s.cutoff,
        provenance: s.provenance.clone(),
        synthetic: s.synthetic,
        growth: s.growth,
        primitives,
        classes: Some(classes),
    }
}

/// Pretty JSON with every float in 17-significant-digit scientific form.
pub(crate) struct CanonicalFormatter<'a>(PrettyFormatter<'a>);

impl CanonicalFormatter<'_> {
    pub(crate) fn new() -> Self {
        CanonicalFormatter(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Two-space indented JSON with every float at 17 significant digits and a
/// trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter::new());
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn to_canonical_json(spectrum: &LengthSpectrum) -> String {
    canonical_json(&to_file(spectrum))
}

pub fn parse_spectrum(text: &str) -> Result<LengthSpectrum> {
    let file: SpectrumFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_file(file)
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<LengthSpectrum> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spectrum(&text)
}

pub fn write_spectrum(spectrum: &LengthSpectrum, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_canonical_json(spectrum)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CLASSES: &str = r#"{
      "schema_version": 1,
      "datum_name": "H2-model",
      "cutoff": 2.0,
      "provenance": "hand-built",
      "primitives": [
        {"id": "a", "length": 1.0, "chi1": 1.0,
         "omega_eigenvalues": [{"re": 1.0, "im": 0.0}],
         "holonomy": {"triv": [{"re": 1.0, "im": 0.0}]},
         "n_eigenvalues": [{"re": 0.36787944117144233, "im": 0.0}]}
      ],
      "classes": [{"primitive_id": "a", "mu": 1}, {"primitive_id": "a", "mu": 2}]
    }"#;

    #[test]
    fn loads_two_classes() {
        let s = parse_spectrum(TWO_CLASSES).unwrap();
        assert_eq!(s.classes.len(), 2);
        assert_eq!(s.classes[1].length, 2.0);
    }

    #[test]
    fn chi1_mismatch_on_power_is_rejected() {
        let text = TWO_CLASSES.replace(r#"{"primitive_id": "a", "mu": 2}"#, r#"{"primitive_id": "a", "mu": 2, "chi1": 2.0}"#);
        let err = parse_spectrum(&text).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("chi1") && msg.contains("a^2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_det_is_rejected() {
        let text = TWO_CLASSES.replace(
            r#"{"primitive_id": "a", "mu": 1}"#,
            r#"{"primitive_id": "a", "mu": 1, "det_n": {"re": 0.5, "im": 0.0}}"#,
        );
        let err = parse_spectrum(&text).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("det_n")), "{err:?}");
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_spectrum("{ not json"), Err(Error::Parse(_))));
        let text = TWO_CLASSES.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(parse_spectrum(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn missing_classes_default_to_primitives() {
        let text = TWO_CLASSES.replace(
            r#""classes": [{"primitive_id": "a", "mu": 1}, {"primitive_id": "a", "mu": 2}]"#,
            r#""growth": 1.0"#,
        );
        let s = parse_spectrum(&text).unwrap();
        assert_eq!(s.classes.len(), 1);
        assert_eq!(s.growth, Some(1.0));
    }

    #[test]
    fn canonical_round_trip_is_byte_stable() {
        let s = parse_spectrum(TWO_CLASSES).unwrap();
        let text = to_canonical_json(&s);
        let back = parse_spectrum(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(to_canonical_json(&back), text);
    }

    #[test]
    fn trace_only_power_with_cached_traces() {
        let text = r#"{
          "schema_version": 1, "datum_name": "H2-model", "cutoff": 2.0, "provenance": "x",
          "primitives": [{"id": "a", "length": 1.0, "chi1": 1.0,
             "omega_trace": {"re": 1.0, "im": 0.0},
             "holonomy_traces": {"triv": {"re": 1.0, "im": 0.0}},
             "n_eigenvalues": [{"re": 0.36787944117144233, "im": 0.0}]}],
          "classes": [{"primitive_id": "a", "mu": 1},
                      {"primitive_id": "a", "mu": 2, "omega_trace": {"re": 1.0, "im": 0.0},
                       "holonomy_traces": {"triv": {"re": 1.0, "im": 0.0}}}]
        }"#;
        let s = parse_spectrum(text).unwrap();
        assert_eq!(s.classes.len(), 2);
        let again = parse_spectrum(&to_canonical_json(&s)).unwrap();
        assert_eq!(again, s);

        let bare = text.replace(
            r#", "omega_trace": {"re": 1.0, "im": 0.0},
                       "holonomy_traces": {"triv": {"re": 1.0, "im": 0.0}}}"#,
            "}",
        );
        assert!(matches!(parse_spectrum(&bare), Err(Error::MissingEigenvalues(_))));
    }
}
