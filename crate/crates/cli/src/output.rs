//! Output directory bookkeeping and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;

pub const MANIFEST: &str = "manifest.json";

/// One asserted check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// The acceptance bar in words, e.g. `<= 0.02`.
    pub bound: String,
    pub pass: bool,
}

fn fmt_bound(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!("<= {}", fmt_bound(bound)), pass: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!(">= {}", fmt_bound(bound)), pass: value >= bound }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, bound: format!("{target} +- {tol}"), pass: (value - target).abs() <= tol }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), value: if pass { 1.0 } else { 0.0 }, bound: "true".into(), pass }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub config: &'a Config,
    pub seed: u64,
    pub version: &'static str,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub outputs: &'a [String],
    pub checks: &'a [Check],
    pub error: Option<String>,
    pub pass: bool,
}

/// Files written under `--out`, in write order.
pub struct Outputs {
    dir: PathBuf,
    plot: bool,
    pub files: Vec<String>,
}

impl Outputs {
    /// Creates the directory and removes any manifest left by an earlier
    /// run, so a crash never leaves a stale claim of success behind.
    pub fn create(dir: &Path, plot: bool) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        match fs::remove_file(dir.join(MANIFEST)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e),
            _ => {}
        }
        Ok(Self { dir: dir.to_path_buf(), plot, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> fraclab::Result<()>,
    ) -> fraclab::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> fraclab::Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// A CSV plus, with `--plot`, a gnuplot script drawing every column
    /// against the first.
    pub fn csv(
        &mut self,
        name: &str,
        log: bool,
        body: impl FnOnce(&mut BufWriter<File>) -> fraclab::Result<()>,
    ) -> fraclab::Result<()> {
        self.write(name, body)?;
        if self.plot {
            let stem = name.trim_end_matches(".csv");
            let script = format!(
                "set datafile separator ','\nset key autotitle columnhead\n{}set terminal pngcairo size 900,600\nset output '{stem}.png'\nplot for [i=2:*] '{name}' using 1:i with linespoints\n",
                if log { "set logscale xy\n" } else { "" }
            );
            self.write(&format!("{stem}.gp"), |w| Ok(w.write_all(script.as_bytes())?))?;
        }
        Ok(())
    }

    /// Writes the manifest through a temporary file and a rename.
    pub fn finish(&self, manifest: &RunManifest<'_>) -> std::io::Result<()> {
        let tmp = self.dir.join(format!(".{MANIFEST}.tmp"));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer_pretty(&mut w, manifest)?;
            writeln!(w)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(MANIFEST))
    }
}
