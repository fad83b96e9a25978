use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geozeta::Complex64;

#[derive(Debug, Parser)]
#[command(name = "geozeta", version, about = "Selberg zeta functions, heat theta series and regularized determinants")]
pub struct Cli {
    /// Reject spectra whose provenance is synthetic.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Write the artifact here and a run manifest next to it; stdout otherwise.
    #[arg(short = 'o', long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catalog of rank-one group data.
    Lie {
        #[command(subcommand)]
        cmd: LieCmd,
    },
    /// Length spectrum files.
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    /// Selberg and Ruelle zeta functions.
    Zeta {
        #[command(subcommand)]
        cmd: ZetaCmd,
    },
    /// Geodesic theta series and the resolvent bridge.
    Heat {
        #[command(subcommand)]
        cmd: HeatCmd,
    },
    /// Spectral zeta functions, determinants and torsion.
    Det {
        #[command(subcommand)]
        cmd: DetCmd,
    },
    /// Rerun the command recorded in a manifest and check the output hash.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum LieCmd {
    /// Print a catalog entry with its root pattern as JSON.
    Info { name: String },
    /// List catalog entries.
    List,
}

#[derive(Debug, Subcommand)]
pub enum SpectrumCmd {
    /// Load and validate a spectrum file, printing a summary row.
    Validate { file: PathBuf },
    /// Generate a synthetic spectrum.
    Synth {
        #[arg(long)]
        datum: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        lmax: f64,
        #[arg(long)]
        growth: f64,
    },
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Holonomy tag for tau; trivial tau when omitted.
    #[arg(long)]
    pub tag: Option<String>,
    /// Leave tr w out of the weights.
    #[arg(long)]
    pub no_omega: bool,
}

#[derive(Debug, Subcommand)]
pub enum ZetaCmd {
    /// Truncated log Z at one or more points.
    Eval {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long = "s", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Vec<Complex64>,
        /// Ruelle zeta through its Selberg factorization.
        #[arg(long, conflicts_with_all = ["euler", "tag", "no_omega"])]
        ruelle: bool,
        /// Ruelle zeta from its defining series.
        #[arg(long, requires = "ruelle")]
        direct: bool,
        /// Evaluate the Euler product over symmetric powers up to this degree.
        #[arg(long, value_name = "N_MAX")]
        euler: Option<usize>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Compare Z on the spectrum with Z on its opposite-parabolic transform.
    CheckOpposite {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long = "s", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Vec<Complex64>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Winding number of Z around a rectangle.
    ZeroScan {
        #[arg(long)]
        spectrum: PathBuf,
        /// Opposite corners, e.g. "4-1i,6+1i".
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rect)]
        rect: (Complex64, Complex64),
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// The constant c(X, w) from vanishing orders at the shifts.
    CConstant {
        #[arg(long)]
        datum: String,
        #[arg(long)]
        orders: PathBuf,
    },
    /// Finite regularized product from an order list.
    RegProduct {
        #[arg(long)]
        orders: PathBuf,
        #[arg(long = "s", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Vec<Complex64>,
    },
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long = "t", value_name = "T")]
    pub t: Vec<f64>,
    /// Log-spaced times "lo:hi:n".
    #[arg(long, value_parser = parse_range)]
    pub t_range: Option<(f64, f64, usize)>,
}

#[derive(Debug, Subcommand)]
pub enum HeatCmd {
    /// Geodesic side of the theta series.
    Theta {
        #[arg(long)]
        spectrum: PathBuf,
        #[command(flatten)]
        times: TimeArgs,
    },
    /// Heat-side resolvent sums against Z'/Z, per shift entry.
    Bridge {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Restrict to one shift entry (needs --i as well).
        #[arg(long, requires = "i")]
        c: Option<u32>,
        #[arg(long, requires = "c")]
        i: Option<u32>,
    },
    /// Gamma-trace of the heat kernel from a Plancherel model.
    L2Trace {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        times: TimeArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Auto,
    Direct,
    Mellin,
}

#[derive(Debug, Subcommand)]
pub enum DetCmd {
    /// Spectral zeta function of D + shift.
    Zeta {
        #[arg(long)]
        eigen: PathBuf,
        #[arg(long = "s", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Vec<Complex64>,
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        #[arg(long, value_enum, default_value_t = Route::Auto)]
        route: Route,
    },
    /// Zeta-regularized determinant det'(D).
    Prime {
        #[arg(long)]
        eigen: PathBuf,
    },
    /// Torsion from spectra given in degree order q = 0, 1, ...
    Torsion {
        #[arg(long = "eigen", required = true)]
        eigen: Vec<PathBuf>,
    },
    /// L2 torsion from Plancherel models given in degree order.
    L2 {
        #[arg(long = "model", required = true)]
        model: Vec<PathBuf>,
        /// Use the refined quadrature configuration.
        #[arg(long)]
        refined: bool,
    },
    /// T / (T2)^dim_omega.
    Ratio {
        #[arg(long)]
        torsion: f64,
        #[arg(long)]
        l2: f64,
        #[arg(long)]
        dim_omega: u32,
    },
    /// Novikov-Shubin exponent from a CSV of (t, trace) samples.
    Ns {
        #[arg(long)]
        samples: PathBuf,
    },
}

/// Parses "a", "bi", "a+bi", "a-bi" (spaces ignored, `j` accepted for `i`).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {text:?}");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_rect(text: &str) -> Result<(Complex64, Complex64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("rectangle {text:?} must be two corners separated by a comma"))?;
    Ok((parse_complex(a)?, parse_complex(b)?))
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("range {text:?} must be lo:hi:n with 0 < lo < hi and n >= 2");
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(bad());
    }
    Ok((lo, hi, n))
}
