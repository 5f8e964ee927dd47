//! `fraclab` command-line runner.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a check fails or
//! a computation errors, 2 on usage and configuration errors.

// `!(x <= y)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{Config, ConfigError};
use output::{Check, Outputs, RunManifest};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Drift and fractional diffusion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Extend seeded smooth data and compare the DtN map with the spectral operator.
    Extend,
    /// Solve the drift-diffusion equation with a synthesised Hölder drift.
    Evolve,
    /// Build and certify one barrier (`--tag`).
    Barriers,
    /// Flatness decay of driftless smooth solutions over several seeds.
    Flatness,
    /// Exponent experiment (`--theorem 1`, `2` or `holder`).
    Exponent,
    /// Built-in suites; `--quick` runs special solutions and the semigroup.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Extend => "extend",
            Self::Evolve => "evolve",
            Self::Barriers => "barriers",
            Self::Flatness => "flatness",
            Self::Exponent => "exponent",
            Self::Validate => "validate",
        }
    }
}

#[derive(Debug, clap::Args)]
struct Opts {
    /// Config file with `[section]` headers and `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "fraclab-out")]
    out: PathBuf,
    /// Also write gnuplot scripts next to every CSV.
    #[arg(long, global = true)]
    plot: bool,
    /// Set any config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    jobs: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long = "N", global = true)]
    n: Option<String>,
    #[arg(long = "M", global = true)]
    m: Option<String>,
    #[arg(long = "T", global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    dim: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    tag: Option<String>,
    #[arg(long, global = true)]
    theorem: Option<String>,
    #[arg(long, global = true)]
    quick: bool,
}

fn resolve(opts: &Opts) -> Result<Config, ConfigError> {
    let mut cfg = match &opts.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for kv in &opts.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    let flags = [
        ("jobs", &opts.jobs),
        ("seed", &opts.seed),
        ("s", &opts.s),
        ("alpha", &opts.alpha),
        ("N", &opts.n),
        ("M", &opts.m),
        ("T", &opts.t),
        ("dim", &opts.dim),
        ("delta", &opts.delta),
        ("tag", &opts.tag),
        ("theorem", &opts.theorem),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(|e| ConfigError(format!("--{key}: {e}")))?;
        }
    }
    if opts.quick {
        cfg.run.quick = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &fraclab::Error) -> i32 {
    use fraclab::Error::*;
    match e {
        InvalidArgument(_) | Domain(_) | InvalidScale(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match resolve(&cli.opts) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut out = match Outputs::create(&cli.opts.out, cli.opts.plot) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: cannot prepare {}: {e}", cli.opts.out.display());
            return EXIT_FAIL;
        }
    };

    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let result = match cli.command {
        Command::Extend => commands::extend(&cfg, &mut out),
        Command::Evolve => commands::evolve(&cfg, &mut out),
        Command::Barriers => commands::barriers(&cfg, &mut out),
        Command::Flatness => commands::flatness(&cfg, &mut out),
        Command::Exponent => commands::exponent(&cfg, &mut out),
        Command::Validate => commands::validate(&cfg, &mut out),
    };
    let (checks, error, code): (Vec<Check>, Option<String>, i32) = match result {
        Ok(checks) => {
            let pass = checks.iter().all(|c| c.pass);
            (checks, None, if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e}");
            (Vec::new(), Some(e.to_string()), exit_code(&e))
        }
    };
    // Write errors (a closed pipe) must not turn a finished run into a panic.
    let mut stdout = std::io::stdout().lock();
    for c in &checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(stdout, "{verdict} {} = {:.6e} (bound {})", c.name, c.value, c.bound);
    }

    let manifest = RunManifest {
        subcommand: cli.command.name(),
        config: &cfg,
        seed: cfg.run.seed,
        version: env!("CARGO_PKG_VERSION"),
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: &out.files,
        checks: &checks,
        error,
        pass: code == EXIT_PASS,
    };
    if let Err(e) = out.finish(&manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_FAIL;
    }
    let _ = writeln!(stdout, "wrote {} files and manifest.json to {}", out.files.len(), out.dir().display());
    code
}
