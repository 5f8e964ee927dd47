//! Plain-text run configuration: `[section]` headers and `key = value`
//! lines, `#` comments. Every key is validated against a fixed table.

use std::fmt;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub seed: u64,
    pub jobs: usize,
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicsSection {
    pub s: f64,
    pub alpha: f64,
    pub eps: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    pub dt_max: f64,
    pub cfl_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSection {
    pub delta: f64,
    pub lambda: u32,
    pub terms: u32,
    pub forcing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierSection {
    pub tag: String,
    pub h: f64,
    pub levels: usize,
    pub nx: usize,
    pub my: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessSection {
    pub r: f64,
    #[serde(rename = "K")]
    pub k_max: usize,
    pub samples: usize,
    pub slope_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSection {
    pub theorem: String,
    pub deltas: Vec<f64>,
    pub exponent_tolerance: f64,
    pub roughest_point: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub run: RunSection,
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub drift: DriftSection,
    pub barrier: BarrierSection,
    pub flatness: FlatnessSection,
    pub experiment: ExperimentSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            run: RunSection { seed: 1, jobs: 1, quick: false },
            grid: GridSection { dim: 1, n: 512, length: std::f64::consts::TAU, m: 64 },
            physics: PhysicsSection {
                s: 0.25,
                alpha: 0.25,
                eps: 0.0,
                duration: 1.0,
                dt_max: 1.0 / 64.0,
                cfl_target: 0.4,
            },
            drift: DriftSection { delta: 1.0, lambda: 2, terms: 8, forcing: 0.1 },
            barrier: BarrierSection { tag: "sphere_boundary".into(), h: 1.0 / 32.0, levels: 5, nx: 64, my: 32 },
            flatness: FlatnessSection { r: 0.5, k_max: 4, samples: 5, slope_slack: 0.2 },
            experiment: ExperimentSection {
                theorem: "1".into(),
                deltas: vec![0.1, 0.05, 0.025],
                exponent_tolerance: 0.25,
                roughest_point: true,
            },
        }
    }
}

/// `(section, key)` for every accepted key.
pub const KEYS: &[(&str, &str)] = &[
    ("run", "seed"),
    ("run", "jobs"),
    ("run", "quick"),
    ("grid", "dim"),
    ("grid", "N"),
    ("grid", "L"),
    ("grid", "M"),
    ("physics", "s"),
    ("physics", "alpha"),
    ("physics", "eps"),
    ("physics", "T"),
    ("physics", "dt_max"),
    ("physics", "cfl_target"),
    ("drift", "delta"),
    ("drift", "lambda"),
    ("drift", "terms"),
    ("drift", "forcing"),
    ("barrier", "tag"),
    ("barrier", "h"),
    ("barrier", "levels"),
    ("barrier", "nx"),
    ("barrier", "my"),
    ("flatness", "r"),
    ("flatness", "K"),
    ("flatness", "samples"),
    ("flatness", "slope_slack"),
    ("experiment", "theorem"),
    ("experiment", "deltas"),
    ("experiment", "exponent_tolerance"),
    ("experiment", "roughest_point"),
];

fn nearest<'a>(word: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::jaro_winkler(word, c), c))
        .filter(|(score, _)| *score > 0.6)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

fn unknown_key(key: &str) -> ConfigError {
    match nearest(key, KEYS.iter().map(|(_, k)| *k)) {
        Some(k) => ConfigError(format!("unknown key `{key}`; did you mean `{k}`?")),
        None => ConfigError(format!("unknown key `{key}`")),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Res<T> {
    value.trim().parse().map_err(|_| ConfigError(format!("`{key}` expects {expected}, got `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Res<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError(format!("`{key}` expects a boolean, got `{value}`"))),
    }
}

fn parse_list(key: &str, value: &str) -> Res<Vec<f64>> {
    value.split(',').map(|v| parse(key, v, "a comma-separated list of reals")).collect()
}

impl Config {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Res<()> {
        let v = value.trim();
        match key {
            "seed" => self.run.seed = parse(key, v, "a non-negative integer")?,
            "jobs" => self.run.jobs = parse(key, v, "a positive integer")?,
            "quick" => self.run.quick = parse_bool(key, v)?,
            "dim" => self.grid.dim = parse(key, v, "an integer")?,
            "N" => self.grid.n = parse(key, v, "an integer")?,
            "L" => self.grid.length = parse(key, v, "a real")?,
            "M" => self.grid.m = parse(key, v, "an integer")?,
            "s" => self.physics.s = parse(key, v, "a real")?,
            "alpha" => self.physics.alpha = parse(key, v, "a real")?,
            "eps" => self.physics.eps = parse(key, v, "a real")?,
            "T" => self.physics.duration = parse(key, v, "a real")?,
            "dt_max" => self.physics.dt_max = parse(key, v, "a real")?,
            "cfl_target" => self.physics.cfl_target = parse(key, v, "a real")?,
            "delta" => self.drift.delta = parse(key, v, "a real")?,
            "lambda" => self.drift.lambda = parse(key, v, "an integer")?,
            "terms" => self.drift.terms = parse(key, v, "an integer")?,
            "forcing" => self.drift.forcing = parse(key, v, "a real")?,
            "tag" => self.barrier.tag = v.to_string(),
            "h" => self.barrier.h = parse(key, v, "a real")?,
            "levels" => self.barrier.levels = parse(key, v, "an integer")?,
            "nx" => self.barrier.nx = parse(key, v, "an integer")?,
            "my" => self.barrier.my = parse(key, v, "an integer")?,
            "r" => self.flatness.r = parse(key, v, "a real")?,
            "K" => self.flatness.k_max = parse(key, v, "an integer")?,
            "samples" => self.flatness.samples = parse(key, v, "an integer")?,
            "slope_slack" => self.flatness.slope_slack = parse(key, v, "a real")?,
            "theorem" => self.experiment.theorem = v.to_string(),
            "deltas" => self.experiment.deltas = parse_list(key, v)?,
            "exponent_tolerance" => self.experiment.exponent_tolerance = parse(key, v, "a real")?,
            "roughest_point" => self.experiment.roughest_point = parse_bool(key, v)?,
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    /// Applies a config file's contents on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Res<()> {
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| ConfigError(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name =
                    rest.strip_suffix(']').ok_or_else(|| at(format!("malformed section header `{line}`")))?.trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    let hint = nearest(name, KEYS.iter().map(|(s, _)| *s))
                        .map(|s| format!("; did you mean `[{s}]`?"))
                        .unwrap_or_default();
                    return Err(at(format!("unknown section `[{name}]`{hint}")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if let (Some(sec), Some((home, _))) = (&section, KEYS.iter().find(|(_, k)| *k == key)) {
                if sec != home {
                    return Err(at(format!("key `{key}` belongs in section `[{home}]`, not `[{sec}]`")));
                }
            }
            self.set(key, value).map_err(|e| at(e.0))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.merge_text(&text)?;
        Ok(cfg)
    }

    /// Domain checks shared by every subcommand.
    pub fn validate(&self) -> Res<()> {
        let err = |m: String| Err(ConfigError(m));
        let s = self.physics.s;
        if !(s > 0.0 && s <= 0.5) {
            return err(format!("s must lie in (0, 0.5], got {s}"));
        }
        if !(self.grid.dim == 1 || self.grid.dim == 2) {
            return err(format!("dim must be 1 or 2, got {}", self.grid.dim));
        }
        if self.grid.n < 8 || !self.grid.n.is_power_of_two() {
            return err(format!("N must be a power of two >= 8, got {}", self.grid.n));
        }
        if !(self.grid.length > 0.0 && self.grid.length.is_finite()) {
            return err(format!("L must be positive, got {}", self.grid.length));
        }
        if self.grid.m < 4 {
            return err(format!("M must be at least 4, got {}", self.grid.m));
        }
        if self.run.jobs == 0 {
            return err("jobs must be at least 1".into());
        }
        if !(self.physics.duration > 0.0) {
            return err(format!("T must be positive, got {}", self.physics.duration));
        }
        if !(self.physics.eps >= 0.0) {
            return err(format!("eps must be non-negative, got {}", self.physics.eps));
        }
        if !(self.drift.delta >= 0.0) {
            return err(format!("delta must be non-negative, got {}", self.drift.delta));
        }
        if self.experiment.deltas.iter().any(|d| !(*d >= 0.0)) {
            return err("deltas must be non-negative".into());
        }
        if !(self.flatness.r > 0.0 && self.flatness.r <= 0.5) {
            return err(format!("r must lie in (0, 0.5], got {}", self.flatness.r));
        }
        if self.flatness.k_max < 3 {
            return err(format!("K must be at least 3, got {}", self.flatness.k_max));
        }
        if self.flatness.samples == 0 {
            return err("samples must be at least 1".into());
        }
        if !["1", "2", "holder"].contains(&self.experiment.theorem.as_str()) {
            return err(format!("theorem must be 1, 2 or holder, got `{}`", self.experiment.theorem));
        }
        if self.barrier.tag.parse::<fraclab::barriers::BarrierTag>().is_err() {
            let tags = ["sphere_boundary", "flat_boundary", "bfun", "caloric_U"];
            let hint = nearest(&self.barrier.tag, tags.into_iter())
                .map(|t| format!("; did you mean `{t}`?"))
                .unwrap_or_default();
            return err(format!("unknown barrier tag `{}`{hint}", self.barrier.tag));
        }
        Ok(())
    }

    pub fn experiment(&self) -> fraclab::regularity::ExperimentConfig {
        fraclab::regularity::ExperimentConfig {
            s: self.physics.s,
            alpha: self.physics.alpha,
            dim: self.grid.dim,
            n: self.grid.n,
            length: self.grid.length,
            seed: self.run.seed,
            delta: self.drift.delta,
            lambda: self.drift.lambda,
            terms: self.drift.terms,
            forcing: self.drift.forcing,
            r: self.flatness.r,
            k_max: self.flatness.k_max,
            m: self.grid.m,
            dt_max: self.physics.dt_max,
            cfl_target: self.physics.cfl_target,
            exponent_tolerance: self.experiment.exponent_tolerance,
            slope_slack: self.flatness.slope_slack,
            roughest_point: self.experiment.roughest_point,
        }
    }
}
