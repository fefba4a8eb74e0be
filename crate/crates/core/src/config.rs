//! Scenario, sweep and optimisation documents.
//!
//! Documents are JSON, or TOML when the file name ends in `.toml`. Every
//! physical key carries its unit as a suffix (`_m`, `_s`, `_hz`, ...) and
//! values are SI. Unknown keys are rejected with their full key path; keys
//! that are left out take the calibrated defaults shipped in
//! `config/defaults.toml`.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::optimize::{FreeParam, Objective, OptimizeSpec};
use crate::scenario::ScenarioParams;
use crate::sweep::{ParamPath, SweepAxis, SweepSpec};

/// The calibrated default scenario, with the origin of each value noted.
pub const DEFAULTS_TOML: &str = include_str!("../config/defaults.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocFormat {
    Json,
    Toml,
}

impl DocFormat {
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("toml") => DocFormat::Toml,
            _ => DocFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Io,
    Parse,
    Validation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    /// Dotted key path of the offending field, when known.
    pub path: Option<String>,
    /// 1-based line and column, when known.
    pub location: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConfigErrorKind::Io => "cannot read config",
            ConfigErrorKind::Parse => "parse error",
            ConfigErrorKind::Validation => "validation error",
        };
        write!(f, "{kind}")?;
        if let Some(p) = &self.path {
            write!(f, " at `{p}`")?;
        }
        if let Some((line, col)) = self.location {
            write!(f, " (line {line}, column {col})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn validation(e: impl fmt::Display) -> Self {
        ConfigError {
            kind: ConfigErrorKind::Validation,
            path: None,
            location: None,
            message: e.to_string(),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn display_path(path: &serde_path_to_error::Path) -> Option<String> {
    let s = path.to_string();
    (s != "." && !s.is_empty()).then_some(s)
}

fn deserialize<T: DeserializeOwned>(text: &str, format: DocFormat) -> Result<T, ConfigError> {
    match format {
        DocFormat::Json => {
            let mut de = serde_json::Deserializer::from_str(text);
            let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
                let inner = e.inner();
                ConfigError {
                    kind: ConfigErrorKind::Parse,
                    path: display_path(e.path()),
                    location: (inner.line() > 0).then(|| (inner.line(), inner.column())),
                    message: strip_position(&inner.to_string()),
                }
            })?;
            de.end().map_err(|e| ConfigError {
                kind: ConfigErrorKind::Parse,
                path: None,
                location: Some((e.line(), e.column())),
                message: strip_position(&e.to_string()),
            })?;
            Ok(value)
        }
        DocFormat::Toml => {
            let de = toml::Deserializer::new(text);
            serde_path_to_error::deserialize(de).map_err(|e| {
                let inner = e.inner();
                ConfigError {
                    kind: ConfigErrorKind::Parse,
                    path: display_path(e.path()),
                    location: inner.span().map(|s| line_col(text, s.start)),
                    message: inner.message().to_string(),
                }
            })
        }
    }
}

/// serde_json appends " at line L column C"; the location is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError {
        kind: ConfigErrorKind::Io,
        path: None,
        location: None,
        message: format!("{}: {e}", path.display()),
    })
}

pub fn parse_scenario(text: &str, format: DocFormat) -> Result<ScenarioParams, ConfigError> {
    let p: ScenarioParams = deserialize(text, format)?;
    p.validate().map_err(ConfigError::validation)?;
    Ok(p)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioParams, ConfigError> {
    parse_scenario(&read(path)?, DocFormat::for_path(path))
}

pub fn defaults() -> ScenarioParams {
    parse_scenario(DEFAULTS_TOML, DocFormat::Toml).expect("shipped defaults are valid")
}

pub fn to_json(p: &ScenarioParams) -> String {
    serde_json::to_string_pretty(p).expect("scenario serialises")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisDoc {
    param: ParamPath,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
}

impl AxisDoc {
    fn resolve(self, index: usize) -> Result<SweepAxis, ConfigError> {
        let err = |message: String| ConfigError {
            kind: ConfigErrorKind::Validation,
            path: Some(format!("axes[{index}]")),
            location: None,
            message,
        };
        match (self.values, self.start, self.stop, self.step) {
            (Some(values), None, None, None) => Ok(SweepAxis::values(self.param, values)),
            (None, Some(start), Some(stop), Some(step)) => {
                SweepAxis::range(self.param, start, stop, step).map_err(|e| err(e.to_string()))
            }
            _ => Err(err(
                "give either `values` or all of `start`, `stop`, `step`".to_string(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    #[serde(default)]
    scenario: ScenarioParams,
    axes: Vec<AxisDoc>,
}

pub fn parse_sweep(text: &str, format: DocFormat) -> Result<SweepSpec, ConfigError> {
    let doc: SweepDoc = deserialize(text, format)?;
    doc.scenario.validate().map_err(ConfigError::validation)?;
    let axes = doc
        .axes
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.resolve(i))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = SweepSpec {
        baseline: doc.scenario,
        axes,
    };
    spec.validate().map_err(ConfigError::validation)?;
    Ok(spec)
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec, ConfigError> {
    parse_sweep(&read(path)?, DocFormat::for_path(path))
}

fn default_floor() -> f64 {
    1e-6
}
fn default_weight() -> f64 {
    0.5
}
fn default_evaluations() -> usize {
    400
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_restarts() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizeDoc {
    #[serde(default)]
    scenario: ScenarioParams,
    free: Vec<FreeParam>,
    #[serde(default)]
    objective: Objective,
    #[serde(default = "default_floor")]
    eta_floor: f64,
    #[serde(default = "default_weight")]
    fidelity_weight: f64,
    #[serde(default = "default_evaluations")]
    max_evaluations: usize,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default = "default_restarts")]
    restarts: usize,
}

pub fn parse_optimize(text: &str, format: DocFormat) -> Result<OptimizeSpec, ConfigError> {
    let doc: OptimizeDoc = deserialize(text, format)?;
    doc.scenario.validate().map_err(ConfigError::validation)?;
    let spec = OptimizeSpec {
        baseline: doc.scenario,
        free: doc.free,
        objective: doc.objective,
        eta_floor: doc.eta_floor,
        fidelity_weight: doc.fidelity_weight,
        max_evaluations: doc.max_evaluations,
        tolerance: doc.tolerance,
        restarts: doc.restarts,
    };
    spec.validate().map_err(ConfigError::validation)?;
    Ok(spec)
}

pub fn load_optimize(path: &Path) -> Result<OptimizeSpec, ConfigError> {
    parse_optimize(&read(path)?, DocFormat::for_path(path))
}
