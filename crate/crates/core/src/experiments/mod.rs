//! Batch experiments: JSON configs, a registry of experiment kinds, and artifact emission.
//!
//! A config names a registered kind and carries its parameters; [`Registry::run`] executes it
//! in memory and [`write_outcome`] stores the artifacts only once the run has finished, so a
//! rejected config never leaves files behind.

mod admissibility;
mod extraction;
mod forward;
mod lemma;
mod recovery;
mod templates;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use templates::{templates, Template};

/// Environment variable naming the directory under which run directories are created.
pub const OUTPUT_ROOT_VAR: &str = "NLINC_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    /// Run directory relative to the output root; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub params: serde_json::Value,
    /// Mesh in the text format of [`crate::mesh::TriMesh::to_text`], for kinds that accept one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config; relative file references are resolved against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        if cfg.name.trim().is_empty() {
            return Err(Error::Config("`name` must not be empty".into()));
        }
        if let Some(mesh) = cfg.mesh_file.take() {
            let path = if mesh.is_relative() { base.join(mesh) } else { mesh };
            if !path.is_file() {
                return Err(Error::Config(format!("mesh file {} does not exist", path.display())));
            }
            cfg.mesh_file = Some(path);
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Typed parameters of the experiment kind.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(self.params.clone()).map_err(|e| Error::Config(format!("params of `{}`: {e}", self.name)))
    }

    pub fn run_dir(&self, root: &Path) -> PathBuf {
        root.join(self.output_dir.clone().unwrap_or_else(|| PathBuf::from(&self.name)))
    }
}

/// Output root from [`OUTPUT_ROOT_VAR`], falling back to `./results`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

/// One declared pass criterion and the value it was judged on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance region, e.g. `[-2.05, -1.95]`.
    pub target: String,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("{expected} +/- {tol}"),
            pass: (value - expected).abs() <= tol,
        }
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, target: format!("<= {bound}"), pass: value <= bound }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, target: format!("> {bound}"), pass: value > bound }
    }

    pub fn range(name: &str, value: f64, [lo, hi]: [f64; 2]) -> Self {
        Self { name: name.into(), value, target: format!("[{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Self { name: name.into(), value: if pass { 1.0 } else { 0.0 }, target: "true".into(), pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

impl Artifact {
    pub fn csv(file: &str, contents: String) -> Self {
        Self { file: format!("{file}.csv"), contents }
    }

    pub fn json<T: Serialize>(file: &str, value: &T) -> Result<Self> {
        Ok(Self { file: format!("{file}.json"), contents: serde_json::to_string_pretty(value)? + "\n" })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Outcome {
    pub name: String,
    pub kind: String,
    pub checks: Vec<Check>,
    /// Kind-specific scalar results, keyed for the summary.
    pub summary: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self { name: cfg.name.clone(), kind: cfg.kind.clone(), checks: Vec::new(), summary: BTreeMap::new(), artifacts: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn report(&self) -> String {
        let mut s = format!("{} ({})\n", self.name, self.kind);
        for (k, v) in &self.summary {
            let _ = writeln!(s, "  {k}: {v}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "  [{}] {}: {:.6e} (target {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
        }
        let _ = writeln!(s, "{}", if self.pass() { "all criteria hold" } else { "some criteria failed" });
        s
    }
}

pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;

    fn describe(&self) -> &'static str;

    /// Checks the parameters without doing any numerical work.
    fn validate(&self, cfg: &ExperimentConfig) -> Result<()>;

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()>;
}

pub struct Registry {
    experiments: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self { experiments: BTreeMap::new() };
        r.register(Box::new(forward::Forward));
        r.register(Box::new(lemma::Lemma21));
        r.register(Box::new(extraction::Extraction));
        r.register(Box::new(recovery::ShapeRecover));
        r.register(Box::new(recovery::CoeffRecover));
        r.register(Box::new(recovery::NestRecover));
        r.register(Box::new(recovery::Distinguish));
        r.register(Box::new(admissibility::Admissibility));
        r
    }
}

impl Registry {
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.experiments.insert(e.kind(), e);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.experiments.values().map(AsRef::as_ref)
    }

    pub fn get(&self, kind: &str) -> Result<&dyn Experiment> {
        self.experiments.get(kind).map(AsRef::as_ref).ok_or_else(|| {
            let known: Vec<_> = self.experiments.keys().copied().collect();
            Error::Config(format!("unknown experiment kind `{kind}` (known: {})", known.join(", ")))
        })
    }

    pub fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        self.get(&cfg.kind)?.validate(cfg)
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let e = self.get(&cfg.kind)?;
        e.validate(cfg)?;
        let mut out = Outcome::new(cfg);
        e.run(cfg, &mut out)?;
        Ok(out)
    }
}

/// Writes the artifacts, `summary.json` and `summary.txt` into `dir`.
pub fn write_outcome(out: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let summary = Artifact::json("summary", &serde_json::json!({
        "name": out.name,
        "kind": out.kind,
        "pass": out.pass(),
        "checks": out.checks,
        "summary": out.summary,
    }))?;
    let text = Artifact { file: "summary.txt".into(), contents: out.report() };
    for a in out.artifacts.iter().chain([&summary, &text]) {
        let path = dir.join(&a.file);
        std::fs::write(&path, &a.contents)?;
        files.push(path);
    }
    Ok(files)
}

pub(crate) fn config_error(what: impl Into<String>) -> Error {
    Error::Config(what.into())
}

/// Points of a log-spaced grid described in a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn check(&self, what: &str, min_points: usize) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) || self.points < min_points {
            return Err(config_error(format!(
                "{what} grid needs 0 < min < max and at least {min_points} points, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        crate::fit::log_space(self.min, self.max, self.points)
    }
}
