//! Experiment configuration (TOML: `key = value` with dotted sections).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::counting::{CountKind, CountMode};
use crate::error::{Error, Result};
use crate::local::WordMode;
use crate::report::{check_eps_ladder, check_n_ladder};
use crate::skew::Segment;
use crate::zoo::{ZooParams, PRESETS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Boxdim,
    Mdim,
    Cp,
    Localent,
    Skew,
    Glue,
    Irregular,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Boxdim => "boxdim",
            Experiment::Mdim => "mdim",
            Experiment::Cp => "cp",
            Experiment::Localent => "localent",
            Experiment::Skew => "skew",
            Experiment::Glue => "glue",
            Experiment::Irregular => "irregular",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ladders {
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
}

impl Default for Ladders {
    fn default() -> Self {
        Ladders {
            eps: vec![0.25, 0.125, 0.0625],
            n: vec![1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budget {
    /// exact word enumeration up to this many words, else this many Monte Carlo words
    pub words: usize,
    /// largest phase sample built from a shift preset
    pub materialize: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            words: 4096,
            materialize: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Estimator {
    pub kind: CountKind,
    pub mode: CountMode,
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator {
            kind: CountKind::Separated,
            mode: CountMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Full,
    Indices,
    RandomHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Target {
    pub kind: TargetKind,
    /// phase indices when kind = "indices"
    pub indices: Vec<usize>,
}

impl Default for Target {
    fn default() -> Self {
        Target {
            kind: TargetKind::Full,
            indices: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Localent {
    pub points: usize,
    pub mode: WordMode,
    pub tol: f64,
}

impl Default for Localent {
    fn default() -> Self {
        Localent {
            points: 4,
            mode: WordMode::Exhaustive,
            tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Skew {
    /// symbols carrying walk weight; empty means all
    pub support: Vec<usize>,
    pub tol: f64,
    pub slack: f64,
}

impl Default for Skew {
    fn default() -> Self {
        Skew {
            support: vec![],
            tol: 0.15,
            slack: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlueMode {
    Gluing,
    Specification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Glue {
    pub mode: GlueMode,
    /// JSON instance file, relative to the config file
    pub instance: Option<String>,
    pub segments: Vec<Segment>,
    pub eps: f64,
    pub p_max: usize,
    /// fixed gaps for specification mode
    pub gaps: Vec<usize>,
    pub m_eps: usize,
    pub gap_word_budget: usize,
    pub samples: usize,
    pub max_level: u32,
}

impl Default for Glue {
    fn default() -> Self {
        Glue {
            mode: GlueMode::Gluing,
            instance: None,
            segments: vec![],
            eps: 0.25,
            p_max: 4,
            gaps: vec![],
            m_eps: 0,
            gap_word_budget: 100_000,
            samples: 256,
            max_level: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Irregular {
    pub observable: String,
    pub n: usize,
    pub threshold: Option<f64>,
    pub candidates: usize,
    pub random_tails: usize,
    /// sampled points scored on sampled presets
    pub points: usize,
    pub tol: f64,
}

impl Default for Irregular {
    fn default() -> Self {
        Irregular {
            observable: "x0".into(),
            n: 4096,
            threshold: None,
            candidates: 4,
            random_tails: 4,
            points: 4,
            tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Verify {
    /// seeded instances per property
    pub instances: usize,
    pub tol: f64,
}

impl Default for Verify {
    fn default() -> Self {
        Verify {
            instances: 20,
            tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub preset: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub system: ZooParams,
    #[serde(default)]
    pub ladders: Ladders,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub target: Target,
    #[serde(default)]
    pub localent: Localent,
    #[serde(default)]
    pub skew: Skew,
    #[serde(default)]
    pub glue: Glue,
    #[serde(default)]
    pub irregular: Irregular,
    #[serde(default)]
    pub verify: Verify,
}

/// 1-based line of `key` inside `[section]` (top level when section is empty); 0 if absent.
pub fn locate(src: &str, field: &str) -> usize {
    let (section, key) = match field.rsplit_once('.') {
        Some((s, k)) => (s, k),
        None => ("", field),
    };
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = h.trim().to_string();
            continue;
        }
        let Some((k, _)) = t.split_once('=') else { continue };
        let k = k.trim();
        let full = if current.is_empty() {
            k.to_string()
        } else {
            format!("{current}.{k}")
        };
        if (current == section && k == key) || full == field {
            return i + 1;
        }
    }
    0
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Name of the field a parse error points at, from the error span.
fn field_at(src: &str, line: usize) -> String {
    let mut section = String::new();
    for (i, l) in src.lines().enumerate() {
        let t = l.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = h.trim().to_string();
        }
        if i + 1 == line {
            if let Some((k, _)) = t.split_once('=') {
                let k = k.trim();
                return if section.is_empty() {
                    k.to_string()
                } else {
                    format!("{section}.{k}")
                };
            }
            return section;
        }
    }
    String::new()
}

fn config_error(src: &str, field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        line: locate(src, field),
        msg: msg.into(),
    }
}

impl Config {
    pub fn parse(src: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(src, s.start)).unwrap_or(0);
            Error::Config {
                field: field_at(src, line),
                line,
                msg: e.message().to_string(),
            }
        })?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config {
            field: String::new(),
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
        Config::parse(&src)
    }

    fn validate(&self, src: &str) -> Result<()> {
        if !PRESETS.contains(&self.preset.as_str()) {
            return Err(config_error(
                src,
                "preset",
                format!("unknown preset '{}' (known: {})", self.preset, PRESETS.join(", ")),
            ));
        }
        if let Err(e) = check_eps_ladder(&self.ladders.eps) {
            return Err(config_error(src, "ladders.eps", e.to_string()));
        }
        if let Err(e) = check_n_ladder(&self.ladders.n, 1) {
            return Err(config_error(src, "ladders.n", e.to_string()));
        }
        if self.budget.words == 0 {
            return Err(config_error(src, "budget.words", "must be positive"));
        }
        if self.target.kind == TargetKind::Indices && self.target.indices.is_empty() {
            return Err(config_error(src, "target.indices", "indices target needs at least one index"));
        }
        if self.irregular.n == 0 {
            return Err(config_error(src, "irregular.n", "must be positive"));
        }
        if let Some(t) = self.irregular.threshold {
            if !(t > 0.0) {
                return Err(config_error(src, "irregular.threshold", "must be positive"));
            }
        }
        if crate::irregular::Observable::by_name(&self.irregular.observable).is_err() {
            return Err(config_error(src, "irregular.observable", "unknown observable"));
        }
        if !(self.glue.eps > 0.0) {
            return Err(config_error(src, "glue.eps", "must be positive"));
        }
        Ok(())
    }
}
