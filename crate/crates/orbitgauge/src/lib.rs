//! Command-line front end for `orbitgauge-core`.
//!
//! Every subcommand resolves its parameters from an optional config file
//! (or a previous run's manifest) overridden by flags, runs on a rayon
//! pool, and writes `<out>/<subcommand>.{csv,json}` plus
//! `<out>/<subcommand>.manifest.json`. Outputs are byte-identical for a
//! fixed seed and shard count.

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod exec;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use orbitgauge_core::mc::McConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::Ctx;
use crate::config::{load_config, merge, overrides, parse_count, parse_params, resolve_globals, SEED_ENV};
use crate::emit::{digest, write_json, Manifest};
pub use crate::error::{CliError, CliResult};
pub use crate::exec::RayonExec;

pub const TOOL: &str = "orbitgauge";

#[derive(Debug, Parser)]
#[command(name = "orbitgauge", version, about = "Numerical experiments on diagonal orbits in spaces of lattices")]
pub struct Cli {
    /// Master seed (falls back to ORBITGAUGE_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo sample count; accepts 1e6.
    #[arg(long, global = true, value_parser = parse_count)]
    pub samples: Option<u64>,
    /// Shard count. Part of the determinism contract.
    #[arg(long, global = true)]
    pub shards: Option<usize>,
    /// JSON config file, or a manifest from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shortest vectors, or Haar-sampler calibration.
    Systole(commands::systole::Args),
    /// Exact translate counts against the covering bound.
    Tessellate(commands::tessellate::Args),
    /// Fit the Margulis constants of the height function.
    MargulisCheck(commands::margulis::Args),
    /// Escape-mass bound against Monte Carlo.
    EscapeBound(commands::escape::Args),
    /// Equidistribution error decay and the measure lower bound.
    Equidist(commands::equidist::Args),
    /// Recursive cover of a finite-horizon avoidance set.
    Cover(commands::cover::Args),
    /// Box-counting dimension of a set.
    Dimension(commands::dimension::Args),
    /// Codimension bound calculators.
    Bounds(commands::bounds::Args),
    /// Dirichlet improvability over a range of N.
    DiCheck(commands::di_check::Args),
    /// Box dimension of the finite-range improvable set.
    DiScan(commands::di_scan::Args),
    /// Exact-oracle self checks.
    Selftest(commands::selftest::Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Systole(_) => "systole",
            Command::Tessellate(_) => "tessellate",
            Command::MargulisCheck(_) => "margulis-check",
            Command::EscapeBound(_) => "escape-bound",
            Command::Equidist(_) => "equidist",
            Command::Cover(_) => "cover",
            Command::Dimension(_) => "dimension",
            Command::Bounds(_) => "bounds",
            Command::DiCheck(_) => "di-check",
            Command::DiScan(_) => "di-scan",
            Command::Selftest(_) => "selftest",
        }
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("orbitgauge: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    use commands::*;
    match &cli.command {
        Command::Systole(a) => drive(cli, a, systole::run),
        Command::Tessellate(a) => drive(cli, a, tessellate::run),
        Command::MargulisCheck(a) => drive(cli, a, margulis::run),
        Command::EscapeBound(a) => drive(cli, a, escape::run),
        Command::Equidist(a) => drive(cli, a, equidist::run),
        Command::Cover(a) => drive(cli, a, cover::run),
        Command::Dimension(a) => drive(cli, a, dimension::run),
        Command::Bounds(a) => drive(cli, a, bounds::run),
        Command::DiCheck(a) => drive(cli, &a.clone().normalized(), di_check::run),
        Command::DiScan(a) => drive(cli, a, di_scan::run),
        Command::Selftest(a) => drive(cli, a, selftest::run),
    }
}

fn drive<A, P>(cli: &Cli, args: &A, run: fn(&mut Ctx, &P) -> CliResult<()>) -> CliResult<()>
where
    A: Serialize,
    P: Serialize + DeserializeOwned,
{
    let name = cli.command.name();
    let file = match &cli.config {
        Some(path) => load_config(path, name)?,
        None => Map::new(),
    };
    let mut flags = overrides(args)?;
    let globals = [
        ("seed", cli.seed.map(Value::from)),
        ("samples", cli.samples.map(Value::from)),
        ("shards", cli.shards.map(Value::from)),
    ];
    for (key, value) in globals {
        if let Some(v) = value {
            flags.insert(key.into(), v);
        }
    }
    let mut merged = merge(file, flags);
    let g = resolve_globals(&mut merged, std::env::var(SEED_ENV).ok())?;
    let params: P = parse_params(merged)?;

    let mut record = match serde_json::to_value(&params)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    record.insert("seed".into(), g.seed.into());
    record.insert("samples".into(), g.samples.into());
    record.insert("shards".into(), g.shards.into());

    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    let start = Instant::now();
    let mut ctx = Ctx::new(name, &cli.out, McConfig::new(g.seed, g.samples).with_shards(g.shards));
    let outcome = run(&mut ctx, &params);

    // Outputs written before a failure still get their manifest.
    if !ctx.outputs().is_empty() {
        let outputs = ctx.outputs().iter().map(|p| digest(p)).collect::<CliResult<Vec<_>>>()?;
        let manifest = Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: name.into(),
            config: Value::Object(record),
            seed: g.seed,
            shards: g.shards,
            wall_clock_secs: start.elapsed().as_secs_f64(),
            outputs,
        };
        write_json(&cli.out.join(format!("{name}.manifest.json")), &manifest)?;
    }
    outcome
}
