//! Command handlers. Each returns the complete artifact as bytes; nothing is
//! written until the command has succeeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geozeta::heat::{
    det_prime, l2_heat_trace, l2_torsion_with, log_det_prime, novikov_shubin_estimate, resolvent_bridge_check,
    spectral_zeta, spectral_zeta_direct, spectral_zeta_mellin, theta_series, torsion_from_determinants,
    torsion_ratio_assembly, zeta_at_zero, EigenvalueSpectrum, MellinConfig, PlancherelModel, ZetaRoute,
};
use geozeta::lie::{self, restricted_root_pattern};
use geozeta::numerics::fmt_f64;
use geozeta::spectrum::{canonical_json, parse_spectrum, synth_spectrum, to_canonical_json, LengthSpectrum};
use geozeta::zeta::{
    abscissa, assemble_c_constant, log_ruelle, log_ruelle_direct, log_selberg, log_selberg_euler,
    opposite_parabolic_check, regularized_product, zero_free_region_check, OrderList, Weights, ZetaEvaluation,
};
use geozeta::{Complex64, Error, Result};
use rayon::prelude::*;
use serde::Deserialize;

use crate::args::{Command, DetCmd, HeatCmd, LieCmd, Route, SpectrumCmd, TimeArgs, WeightArgs, ZetaCmd};
use crate::manifest::{sha256_hex, InputRecord};

/// Per-run state: options that affect every command and the inputs read.
pub struct Ctx {
    pub strict: bool,
    /// Canonical location of the output file, if any.
    output: Option<PathBuf>,
    pub inputs: Vec<InputRecord>,
}

/// Absolute form of a path whose file may not exist yet.
pub fn resolve(path: &Path) -> PathBuf {
    if let Ok(p) = path.canonicalize() {
        return p;
    }
    let abs = if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(path)).unwrap_or_else(|_| path.to_path_buf())
    };
    match (abs.parent().and_then(|p| p.canonicalize().ok()), abs.file_name()) {
        (Some(dir), Some(name)) => dir.join(name),
        _ => abs,
    }
}

impl Ctx {
    pub fn new(strict: bool, output: Option<&Path>) -> Self {
        Ctx { strict, output: output.map(resolve), inputs: Vec::new() }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        if self.output.as_deref() == Some(resolve(path).as_path()) {
            return Err(Error::Precondition(format!("input {} is also the output path", path.display())));
        }
        let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        self.inputs.push(InputRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))
    }

    fn spectrum(&mut self, path: &Path) -> Result<LengthSpectrum> {
        let s = parse_spectrum(&self.read(path)?)?;
        if self.strict && s.synthetic {
            return Err(Error::Validation(format!(
                "{} has synthetic provenance ({}); rejected under --strict",
                path.display(),
                s.provenance
            )));
        }
        Ok(s)
    }

    fn eigen(&mut self, path: &Path) -> Result<EigenvalueSpectrum> {
        EigenvalueSpectrum::from_json(&self.read(path)?)
    }

    fn model(&mut self, path: &Path) -> Result<PlancherelModel> {
        PlancherelModel::from_json(&self.read(path)?)
    }
}

/// CSV table with a header row.
struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn into_bytes(self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

pub fn execute(cmd: &Command, ctx: &mut Ctx) -> Result<Vec<u8>> {
    match cmd {
        Command::Lie { cmd } => lie_cmd(cmd),
        Command::Spectrum { cmd } => spectrum_cmd(cmd, ctx),
        Command::Zeta { cmd } => zeta_cmd(cmd, ctx),
        Command::Heat { cmd } => heat_cmd(cmd, ctx),
        Command::Det { cmd } => det_cmd(cmd, ctx),
        Command::Replay { .. } => Err(Error::Precondition("replay cannot be nested".into())),
    }
}

fn lie_cmd(cmd: &LieCmd) -> Result<Vec<u8>> {
    match cmd {
        LieCmd::Info { name } => {
            let d = lie::datum(name)?;
            let mut v = serde_json::to_value(d).expect("datum serializes");
            let obj = v.as_object_mut().expect("datum is an object");
            obj.insert("pattern".into(), restricted_root_pattern(d)?.to_string().into());
            obj.insert("rho_from_roots".into(), d.rho_from_roots().into());
            Ok(canonical_json(&v).into_bytes())
        }
        LieCmd::List => {
            let mut t = Table::new(&["name", "pattern", "dim_n", "rho_p_norm"]);
            for d in &lie::catalog().entries {
                t.push(vec![
                    d.name.clone(),
                    restricted_root_pattern(d)?.to_string(),
                    d.dim_n.to_string(),
                    f(d.rho_p_norm),
                ]);
            }
            Ok(t.into_bytes())
        }
    }
}

fn spectrum_cmd(cmd: &SpectrumCmd, ctx: &mut Ctx) -> Result<Vec<u8>> {
    match cmd {
        SpectrumCmd::Validate { file } => {
            let s = ctx.spectrum(file)?;
            let mut t = Table::new(&[
                "datum",
                "primitives",
                "classes",
                "cutoff",
                "complete_to",
                "growth_rate",
                "abscissa",
                "synthetic",
            ]);
            t.push(vec![
                s.datum_name.clone(),
                s.primitives.len().to_string(),
                s.classes.len().to_string(),
                f(s.cutoff),
                f(s.complete_to()),
                f(s.growth_rate()),
                f(abscissa(&s)),
                s.synthetic.to_string(),
            ]);
            Ok(t.into_bytes())
        }
        SpectrumCmd::Synth { datum, seed, lmax, growth } => {
            if ctx.strict {
                return Err(Error::Precondition("--strict forbids producing synthetic spectra".into()));
            }
            let s = synth_spectrum(lie::datum(datum)?, *seed, *lmax, *growth)?;
            Ok(to_canonical_json(&s).into_bytes())
        }
    }
}

fn weights(args: &WeightArgs) -> Weights {
    Weights {
        use_omega: !args.no_omega,
        tau: match &args.tag {
            Some(t) => geozeta::zeta::TauChoice::Tag(t.clone()),
            None => geozeta::zeta::TauChoice::Trivial,
        },
    }
}

const EVAL_HEADER: &[&str] = &["s_re", "s_im", "logZ_re", "logZ_im", "bound"];

fn zeta_cmd(cmd: &ZetaCmd, ctx: &mut Ctx) -> Result<Vec<u8>> {
    match cmd {
        ZetaCmd::Eval { spectrum, s, ruelle, direct, euler, weights: w } => {
            let spec = ctx.spectrum(spectrum)?;
            let w = weights(w);
            let eval = |z: Complex64| -> Result<ZetaEvaluation> {
                match (ruelle, direct, euler) {
                    (true, true, _) => log_ruelle_direct(&spec, z),
                    (true, false, _) => log_ruelle(&spec, z),
                    (false, _, Some(n)) => log_selberg_euler(&spec, z, *n, &w),
                    (false, _, None) => log_selberg(&spec, z, &w),
                }
            };
            let values: Vec<ZetaEvaluation> = s.par_iter().map(|&z| eval(z)).collect::<Result<_>>()?;
            let mut t = Table::new(EVAL_HEADER);
            for v in values {
                t.push(vec![f(v.s.re), f(v.s.im), f(v.log_value.re), f(v.log_value.im), f(v.truncation_bound)]);
            }
            Ok(t.into_bytes())
        }
        ZetaCmd::CheckOpposite { spectrum, s, weights: w } => {
            let spec = ctx.spectrum(spectrum)?;
            let report = opposite_parabolic_check(&spec, s, &weights(w))?;
            if !report.within_bounds() {
                return Err(Error::Instability(format!(
                    "opposite-parabolic discrepancy {} exceeds the truncation bound {}",
                    report.max_discrepancy, report.combined_bound
                )));
            }
            let mut t = Table::new(&["s_re", "s_im", "logZ_re", "logZ_im", "opposite_re", "opposite_im", "discrepancy"]);
            for (z, a, b) in report.points {
                t.push(vec![f(z.re), f(z.im), f(a.re), f(a.im), f(b.re), f(b.im), f((a - b).norm())]);
            }
            Ok(t.into_bytes())
        }
        ZetaCmd::ZeroScan { spectrum, rect, grid, weights: w } => {
            let spec = ctx.spectrum(spectrum)?;
            let n = zero_free_region_check(&spec, *rect, *grid, &weights(w))?;
            let mut t = Table::new(&["lo_re", "lo_im", "hi_re", "hi_im", "grid", "winding"]);
            let (a, b) = *rect;
            t.push(vec![
                f(a.re.min(b.re)),
                f(a.im.min(b.im)),
                f(a.re.max(b.re)),
                f(a.im.max(b.im)),
                grid.to_string(),
                n.to_string(),
            ]);
            Ok(t.into_bytes())
        }
        ZetaCmd::CConstant { datum, orders } => {
            let d = lie::datum(datum)?;
            let file: ShiftOrders = serde_json::from_str(&ctx.read(orders)?).map_err(|e| Error::Parse(e.to_string()))?;
            let mut map = BTreeMap::new();
            for e in file.orders {
                if map.insert((e.c, e.i), e.order).is_some() {
                    return Err(Error::Validation(format!("shift (c={}, i={}) listed twice", e.c, e.i)));
                }
            }
            let c = assemble_c_constant(d, &map)?;
            let mut t = Table::new(&["datum", "c_constant"]);
            t.push(vec![d.name.clone(), f(c)]);
            Ok(t.into_bytes())
        }
        ZetaCmd::RegProduct { orders, s } => {
            let list = OrderList::from_json(&ctx.read(orders)?)?;
            let mut t = Table::new(&["s_re", "s_im", "value_re", "value_im"]);
            for &z in s {
                let v = regularized_product(&list, z)?;
                t.push(vec![f(z.re), f(z.im), f(v.re), f(v.im)]);
            }
            Ok(t.into_bytes())
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftOrder {
    c: u32,
    i: u32,
    order: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftOrders {
    orders: Vec<ShiftOrder>,
}

fn times(args: &TimeArgs) -> Result<Vec<f64>> {
    let mut ts = args.t.clone();
    if let Some((lo, hi, n)) = args.t_range {
        let (a, b) = (lo.ln(), hi.ln());
        ts.extend((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()));
    }
    if ts.is_empty() {
        return Err(Error::Precondition("give at least one --t or a --t-range".into()));
    }
    Ok(ts)
}

fn heat_cmd(cmd: &HeatCmd, ctx: &mut Ctx) -> Result<Vec<u8>> {
    match cmd {
        HeatCmd::Theta { spectrum, times: ta } => {
            let spec = ctx.spectrum(spectrum)?;
            let ts = times(ta)?;
            let values = theta_series(&spec, spec.datum()?, &ts)?;
            let mut t = Table::new(&["t", "theta"]);
            for (x, v) in ts.iter().zip(values) {
                t.push(vec![f(*x), f(v)]);
            }
            Ok(t.into_bytes())
        }
        HeatCmd::Bridge { spectrum, lambda, c, i } => {
            let spec = ctx.spectrum(spectrum)?;
            let d = spec.datum()?;
            let entries: Vec<_> = match (c, i) {
                (Some(c), Some(i)) => vec![d
                    .shift(*c, *i)
                    .ok_or_else(|| Error::Precondition(format!("datum {} has no shift entry (c={c}, i={i})", d.name)))?],
                _ => d.shift_table.iter().collect(),
            };
            let mut t = Table::new(&[
                "c",
                "i",
                "mu",
                "point",
                "kernel_max_error",
                "heat_side",
                "zeta_side",
                "relative_error",
            ]);
            for e in entries {
                let r = resolvent_bridge_check(&spec, d, *lambda, e)?;
                t.push(vec![
                    e.c.to_string(),
                    e.i.to_string(),
                    f(r.mu),
                    f(r.point),
                    f(r.kernel_max_error),
                    f(r.heat_side),
                    f(r.zeta_side),
                    f(r.relative_error),
                ]);
            }
            Ok(t.into_bytes())
        }
        HeatCmd::L2Trace { model, times: ta } => {
            let m = ctx.model(model)?;
            let ts = times(ta)?;
            let values: Vec<f64> = ts.par_iter().map(|&x| l2_heat_trace(&m, x)).collect::<Result<_>>()?;
            let mut t = Table::new(&["t", "trace"]);
            for (x, v) in ts.iter().zip(values) {
                t.push(vec![f(*x), f(v)]);
            }
            Ok(t.into_bytes())
        }
    }
}

fn det_cmd(cmd: &DetCmd, ctx: &mut Ctx) -> Result<Vec<u8>> {
    match cmd {
        DetCmd::Zeta { eigen, s, shift, route } => {
            let spec = ctx.eigen(eigen)?;
            let eval = |z: Complex64| match route {
                Route::Auto => spectral_zeta(&spec, z, *shift),
                Route::Direct => spectral_zeta_direct(&spec, z, *shift),
                Route::Mellin => spectral_zeta_mellin(&spec, z, *shift, &MellinConfig::default()),
            };
            let values: Vec<_> = s.par_iter().map(|&z| eval(z)).collect::<Result<_>>()?;
            let mut t = Table::new(&["s_re", "s_im", "zeta_re", "zeta_im", "error_estimate", "route"]);
            for (z, v) in s.iter().zip(values) {
                let r = match v.route {
                    ZetaRoute::Direct => "direct",
                    ZetaRoute::Mellin => "mellin",
                };
                t.push(vec![f(z.re), f(z.im), f(v.value.re), f(v.value.im), f(v.error_estimate), r.into()]);
            }
            Ok(t.into_bytes())
        }
        DetCmd::Prime { eigen } => {
            let spec = ctx.eigen(eigen)?;
            let z0 = zeta_at_zero(&spec)?;
            let ld = log_det_prime(&spec)?;
            let mut t = Table::new(&["label", "zeta_at_zero", "log_det_prime", "det_prime"]);
            t.push(vec![spec.label.clone(), f(z0), f(ld), f(det_prime(&spec)?)]);
            Ok(t.into_bytes())
        }
        DetCmd::Torsion { eigen } => {
            let specs: Vec<EigenvalueSpectrum> = eigen.iter().map(|p| ctx.eigen(p)).collect::<Result<_>>()?;
            let logs: Vec<f64> = specs.par_iter().map(log_det_prime).collect::<Result<_>>()?;
            let dets: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
            let tau = torsion_from_determinants(&dets)?;
            let mut t = Table::new(&["degrees", "log_torsion", "torsion"]);
            t.push(vec![specs.len().to_string(), f(tau.ln()), f(tau)]);
            Ok(t.into_bytes())
        }
        DetCmd::L2 { model, refined } => {
            let models: Vec<PlancherelModel> = model.iter().map(|p| ctx.model(p)).collect::<Result<_>>()?;
            let cfg = if *refined { MellinConfig::default().refined() } else { MellinConfig::default() };
            let t2 = l2_torsion_with(&models, &cfg)?;
            let mut t = Table::new(&["degrees", "log_l2_torsion", "l2_torsion"]);
            t.push(vec![models.len().to_string(), f(t2.ln()), f(t2)]);
            Ok(t.into_bytes())
        }
        DetCmd::Ratio { torsion, l2, dim_omega } => {
            let r = torsion_ratio_assembly(*torsion, *l2, *dim_omega)?;
            let mut t = Table::new(&["torsion", "l2_torsion", "dim_omega", "ratio"]);
            t.push(vec![f(*torsion), f(*l2), dim_omega.to_string(), f(r)]);
            Ok(t.into_bytes())
        }
        DetCmd::Ns { samples } => {
            let text = ctx.read(samples)?;
            let pts = read_samples(&text)?;
            let fit = novikov_shubin_estimate(&pts)?;
            let mut t = Table::new(&["alpha", "residual", "slope", "intercept"]);
            t.push(vec![f(fit.alpha), f(fit.residual), f(fit.slope), f(fit.intercept)]);
            Ok(t.into_bytes())
        }
    }
}

/// Two-column CSV with header `t,trace`.
fn read_samples(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "trace"] {
        return Err(Error::Parse(format!("sample header must be t,trace, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse::<f64>().map_err(|_| Error::Parse(format!("row {}: {:?} is not a number", k + 2, &rec[j])))
        };
        out.push((num(0)?, num(1)?));
    }
    Ok(out)
}
