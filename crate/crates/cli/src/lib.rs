//! Configuration-driven front end: parses a JSON study description, runs it
//! and writes tables, plot data and a run manifest to an output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use config::RunConfig;
use error::{RunError, RunResult};
use io::OutputDir;
use manifest::{unix_now, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Relatively parallel frame of an analytic curve, with the Frenet comparison.
    Frame,
    /// Embedded strip surface as OBJ and CSV.
    Surface,
    /// Lowest eigenvalues of the Dirichlet Laplacian on the strip.
    Spectrum,
    /// Transverse eigenvalue profile lambda(s).
    Lambda,
    /// Effective potential and its 1D spectrum.
    Effective,
    Hardy,
    Bent,
    Stability,
    Quasimode,
    ThinSweep,
    /// Hypothesis report only.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Frame => "frame",
            Command::Surface => "surface",
            Command::Spectrum => "spectrum",
            Command::Lambda => "lambda",
            Command::Effective => "effective",
            Command::Hardy => "hardy",
            Command::Bent => "bent",
            Command::Stability => "stability",
            Command::Quasimode => "quasimode",
            Command::ThinSweep => "thin-sweep",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "strip-spectra", version, about = "Spectral studies of thin ruled strips")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "STRIP_SPECTRA_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

struct Context {
    cli: Cli,
    config_bytes: Vec<u8>,
    started: f64,
}

fn execute<C: RunConfig>(
    ctx: &Context,
    out: &mut OutputDir,
    manifest_config: &mut serde_json::Value,
    seed: &mut Option<u64>,
    body: fn(&C, &mut OutputDir) -> RunResult<String>,
) -> RunResult<String> {
    let text = std::str::from_utf8(&ctx.config_bytes).map_err(RunError::config)?;
    let mut cfg: C = config::parse(text)?;
    if let Some(s) = ctx.cli.seed {
        if cfg.seed().is_none() {
            log::warn!("--seed ignored: `{}` is deterministic", C::COMMAND);
        }
        cfg.set_seed(s);
    }
    *seed = cfg.seed();
    *manifest_config = config::to_json(&cfg)?;
    body(&cfg, out)
}

fn dispatch(
    ctx: &Context,
    out: &mut OutputDir,
    cfg: &mut serde_json::Value,
    seed: &mut Option<u64>,
) -> RunResult<String> {
    use commands as c;
    match ctx.cli.command {
        Command::Frame => execute(ctx, out, cfg, seed, c::frame),
        Command::Surface => execute(ctx, out, cfg, seed, c::surface),
        Command::Spectrum => execute(ctx, out, cfg, seed, c::spectrum),
        Command::Lambda => execute(ctx, out, cfg, seed, c::lambda),
        Command::Effective => execute(ctx, out, cfg, seed, c::effective),
        Command::Hardy => execute(ctx, out, cfg, seed, c::hardy),
        Command::Bent => execute(ctx, out, cfg, seed, c::bent),
        Command::Stability => execute(ctx, out, cfg, seed, c::stability),
        Command::Quasimode => execute(ctx, out, cfg, seed, c::quasimode),
        Command::ThinSweep => execute(ctx, out, cfg, seed, c::thin_sweep),
        Command::Validate => execute(ctx, out, cfg, seed, c::validate),
    }
}

fn write_failure(out: &mut OutputDir, err: &RunError) -> anyhow::Result<()> {
    match err {
        RunError::Assumption(f) => out.json("assumption.json", f),
        RunError::NotConverged(msg, partial) => out.json(
            "partial.json",
            &json!({
                "message": msg,
                "eigenvalues": partial.as_ref().map(|p| p.eigenvalues.clone()),
                "residuals": partial.as_ref().map(|p| p.residuals.clone()),
                "iterations": partial.as_ref().map(|p| p.iterations),
            }),
        ),
        _ => out.json("error.json", &json!({ "message": err.to_string() })),
    }
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli) -> ExitCode {
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let config_bytes = match std::fs::read(&cli.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: reading {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut out = match OutputDir::new(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let ctx = Context { cli, config_bytes, started: unix_now() };
    let mut resolved = serde_json::Value::Null;
    let mut seed = None;
    log::info!("{} with {}", ctx.cli.command.name(), ctx.cli.config.display());
    let result = dispatch(&ctx, &mut out, &mut resolved, &mut seed);
    let (status, code) = match &result {
        Ok(summary) => {
            if !ctx.cli.quiet {
                println!("{summary}");
            }
            ("ok", 0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(w) = write_failure(&mut out, e) {
                eprintln!("error: writing failure report: {w:#}");
            }
            let status = match e {
                RunError::Assumption(_) => "assumption_violated",
                RunError::NotConverged(..) => "not_converged",
                _ => "error",
            };
            (status, e.status())
        }
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: ctx.cli.command.name().into(),
        status: status.into(),
        exit_code: code,
        config_sha256: RunManifest::config_digest(&resolved),
        config: resolved,
        seed,
        threads: rayon::current_num_threads(),
        started_unix: ctx.started,
        finished_unix: unix_now(),
        inputs: vec![RunManifest::input(&ctx.cli.config, &ctx.config_bytes)],
        outputs: out.written.iter().map(|(p, h)| manifest::FileDigest { path: p.clone(), sha256: h.clone() }).collect(),
    };
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: writing manifest: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
