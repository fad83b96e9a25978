//! geozeta command-line front end.
//!
//! Exit codes: 0 success, 2 parse or I/O, 3 validation, 4 numeric,
//! 5 precondition. Errors go to stderr as one JSON object.

mod args;
mod commands;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use geozeta::{Error, ErrorKind, Result, VERSION};

use args::{Cli, Command};
use commands::{execute, resolve, Ctx};
use manifest::{manifest_path, sha256_hex, strip_output, Manifest};

const THREADS_VAR: &str = "GEOZETA_THREADS";

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Parse => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numeric => 4,
        ErrorKind::Precondition => 5,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Parse => "parse",
        ErrorKind::Validation => "validation",
        ErrorKind::Numeric => "numeric",
        ErrorKind::Precondition => "precondition",
    }
}

/// `tag` is the specific error variant, `kind` its class.
fn report(kind: ErrorKind, tag: &str, message: &str) -> ExitCode {
    let code = exit_code(kind);
    let body = serde_json::json!({
        "error": { "kind": kind_name(kind), "code": code, "tag": tag, "message": message }
    });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn configure_threads() -> Result<()> {
    let value = match std::env::var(THREADS_VAR) {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(Error::Precondition(format!("{THREADS_VAR} is not valid UTF-8")))
        }
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Precondition(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Precondition(format!("cannot size the worker pool: {e}")))
}

/// Writes through a temporary sibling so a failed write leaves no partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io { path: path.display().to_string(), source };
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(name);
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn run(cli: Cli, raw_args: &[String]) -> Result<()> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, cli.output.as_deref());
    }
    let mut ctx = Ctx::new(cli.strict, cli.output.as_deref());
    let bytes = execute(&cli.command, &mut ctx)?;
    let Some(output) = cli.output else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(&bytes)
            .and_then(|_| out.flush())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source });
    };
    let mpath = manifest_path(&output);
    if ctx.inputs.iter().any(|i| resolve(Path::new(&i.path)) == resolve(&mpath)) {
        return Err(Error::Precondition(format!("an input is the manifest path {}", mpath.display())));
    }
    let cwd = std::env::current_dir().map_err(|source| Error::Io { path: ".".into(), source })?;
    let manifest = Manifest {
        tool: "geozeta".into(),
        version: VERSION.into(),
        cwd: cwd.display().to_string(),
        argv: strip_output(raw_args),
        inputs: ctx.inputs,
        output: output.display().to_string(),
        output_sha256: sha256_hex(&bytes),
    };
    write_atomic(&output, &bytes)?;
    write_atomic(&mpath, manifest.to_json().as_bytes())
}

/// Reruns a recorded command from its original working directory, checking
/// input hashes first and the output hash before anything is written.
fn replay(path: &Path, output_override: Option<&Path>) -> Result<()> {
    let m = Manifest::load(path)?;
    if m.tool != "geozeta" {
        return Err(Error::Parse(format!("{} is not a geozeta manifest", path.display())));
    }
    if m.version != VERSION {
        return Err(Error::Precondition(format!("manifest was written by version {}, this is {VERSION}", m.version)));
    }
    let target: PathBuf = match output_override {
        Some(p) => resolve(p),
        None => Path::new(&m.cwd).join(&m.output),
    };
    std::env::set_current_dir(&m.cwd)
        .map_err(|e| Error::Precondition(format!("recorded working directory {}: {e}", m.cwd)))?;
    for input in &m.inputs {
        let bytes = std::fs::read(&input.path).map_err(|source| Error::Io { path: input.path.clone(), source })?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(Error::Validation(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let argv = std::iter::once("geozeta".to_string()).chain(m.argv.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Parse(format!("recorded command line: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(Error::Precondition("a manifest cannot record a replay".into()));
    }
    let mut ctx = Ctx::new(cli.strict, Some(&target));
    let bytes = execute(&cli.command, &mut ctx)?;
    let digest = sha256_hex(&bytes);
    if digest != m.output_sha256 {
        return Err(Error::Instability(format!(
            "replayed output hashes to {digest}, the manifest records {}",
            m.output_sha256
        )));
    }
    write_atomic(&target, &bytes)
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => match e.kind() {
            ClapKind::DisplayHelp | ClapKind::DisplayVersion | ClapKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                e.exit()
            }
            _ => return report(ErrorKind::Parse, "usage", e.to_string().trim_end()),
        },
    };
    if let Err(e) = configure_threads() {
        return report(e.kind(), e.code(), &e.to_string());
    }
    match run(cli, &raw[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e.kind(), e.code(), &e.to_string()),
    }
}
