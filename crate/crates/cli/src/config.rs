//! Run configuration: schema, parsing with JSON-pointer diagnostics, emission.

use std::fmt;

use hb_core::gaussian::GroundFamily;
use hb_core::phase::Scale;
use hb_core::{ModelSpec, SolverOptions};
use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    PhaseScan,
    Critical,
    Qfi,
    Check,
    DumpMatrix,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::PhaseScan => "phase-scan",
            Task::Critical => "critical",
            Task::Qfi => "qfi",
            Task::Check => "check",
            Task::DumpMatrix => "dump-matrix",
        }
    }
}

/// Sweep of one named model parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub target: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub scale: Scale,
    /// Refinement tolerance; defaults to `1e-8 × (hi − lo)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn default_samples() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiConfig {
    /// Estimated parameter (`omega`, `chi_abs`, `theta` for a single mode;
    /// `omega`, `delta`, `g`, `j_hop`, `theta` for the ring).
    pub phi: String,
    /// Evaluation point; defaults to the model's current value of `phi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub richardson: bool,
    /// Scaling gaps (`Ω1` or `ε`); when present a `gap,F` table is written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
}

fn default_step() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Fock truncation for the gap comparison; defaults to 40 for one or
    /// two modes and 8 for three.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Include the fixed list of published claims in the report.
    #[serde(default = "default_true")]
    pub claims: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n_max: None,
            claims: true,
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving the artifacts.
    #[serde(default = "default_dir")]
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

fn default_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qfi: Option<QfiConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// One schema or semantic problem, located by a JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(pointer: &str, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() {
            "(root)"
        } else {
            &self.pointer
        };
        write!(f, "{at}: {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a JSON run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer = to_pointer(e.path());
        let message = e.inner().to_string();
        if pointer == "/model" {
            if let Some(field) = model_field(text, &message) {
                pointer.push('/');
                pointer.push_str(&field);
            }
        }
        ConfigError {
            issues: vec![ConfigIssue { pointer, message }],
        }
    })?;
    let issues = validate(&config);
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { issues })
    }
}

/// Pretty JSON accepted by [`parse_config`], with a trailing newline.
pub fn emit_config(config: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("configs serialize");
    s.push('\n');
    s
}

/// Field of the tagged `model` object responsible for `message`.
///
/// The tagged representation buffers the object, so the error path stops
/// at `/model`; the field is recovered from the message or by dropping one
/// field at a time until the error changes.
fn model_field(text: &str, message: &str) -> Option<String> {
    let message = message.split(" at line ").next().unwrap_or(message);
    if message.starts_with("unknown variant") {
        return Some("type".into());
    }
    for prefix in ["unknown field `", "missing field `", "duplicate field `"] {
        if let Some(rest) = message.strip_prefix(prefix) {
            return rest.split('`').next().map(str::to_string);
        }
    }
    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let model = root.get("model")?.as_object()?;
    model.keys().filter(|k| *k != "type").find_map(|k| {
        let mut probe = model.clone();
        probe.remove(k);
        match serde_json::from_value::<ModelSpec>(serde_json::Value::Object(probe)) {
            Ok(_) => Some(k.clone()),
            Err(e) if !e.to_string().starts_with(message) => Some(k.clone()),
            Err(_) => None,
        }
    })
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn finite(issues: &mut Vec<ConfigIssue>, pointer: &str, x: f64) {
    if !x.is_finite() {
        issues.push(ConfigIssue::new(pointer, format!("must be finite, got {x}")));
    }
}

/// Semantic checks that the schema cannot express.
pub fn validate(config: &RunConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    if let Err(e) = config.model.build() {
        issues.push(ConfigIssue::new("/model", e.to_string()));
    }

    let s = &config.solver;
    if !(s.tol_im.is_finite() && s.tol_im > 0.0) {
        issues.push(ConfigIssue::new("/solver/tol_im", "must be finite and positive"));
    }
    if s.max_sweeps == 0 {
        issues.push(ConfigIssue::new("/solver/max_sweeps", "must be at least 1"));
    }

    let needs_path = matches!(config.task, Task::PhaseScan | Task::Critical);
    match &config.path {
        None if needs_path => issues.push(ConfigIssue::new(
            "/path",
            format!("required for task {}", config.task.name()),
        )),
        None => {}
        Some(p) => validate_path(config, p, &mut issues),
    }

    match &config.qfi {
        None if config.task == Task::Qfi => issues.push(ConfigIssue::new("/qfi", "required for task qfi")),
        None => {}
        Some(q) => validate_qfi(config, q, &mut issues),
    }

    if let Some(c) = &config.check {
        if c.n_max.is_some_and(|n| n < 2) {
            issues.push(ConfigIssue::new("/check/n_max", "must be at least 2"));
        }
    }
    if config.output.dir.is_empty() {
        issues.push(ConfigIssue::new("/output/dir", "must not be empty"));
    }
    issues
}

fn validate_path(config: &RunConfig, p: &PathConfig, issues: &mut Vec<ConfigIssue>) {
    if config.model.param(&p.target).is_err() {
        issues.push(ConfigIssue::new(
            "/path/target",
            format!(
                "target not found: `{}` (expected one of {})",
                p.target,
                config.model.param_names().join(", ")
            ),
        ));
    }
    finite(issues, "/path/lo", p.lo);
    finite(issues, "/path/hi", p.hi);
    if p.lo.is_finite() && p.hi.is_finite() && !(p.lo < p.hi) {
        issues.push(ConfigIssue::new("/path/hi", format!("must exceed lo = {}", p.lo)));
    }
    if p.samples < 2 {
        issues.push(ConfigIssue::new("/path/samples", "must be at least 2"));
    }
    if p.scale == Scale::Log && !(p.lo > 0.0) {
        issues.push(ConfigIssue::new("/path/lo", "log scale needs lo > 0"));
    }
    if let Some(t) = p.tol {
        if !(t.is_finite() && t > 0.0) {
            issues.push(ConfigIssue::new("/path/tol", "must be finite and positive"));
        }
    }
}

fn validate_qfi(config: &RunConfig, q: &QfiConfig, issues: &mut Vec<ConfigIssue>) {
    match GroundFamily::from_spec(&config.model) {
        Err(e) => issues.push(ConfigIssue::new("/model/type", e.to_string())),
        Ok(fam) => {
            if fam.param(&q.phi).is_err() {
                issues.push(ConfigIssue::new(
                    "/qfi/phi",
                    format!(
                        "target not found: `{}` (expected one of {})",
                        q.phi,
                        fam.param_names().join(", ")
                    ),
                ));
            }
        }
    }
    if let Some(at) = q.at {
        finite(issues, "/qfi/at", at);
    }
    if !(q.step.is_finite() && q.step > 0.0) {
        issues.push(ConfigIssue::new("/qfi/step", "must be finite and positive"));
    }
    if q.n_max.is_some_and(|n| n < 2) {
        issues.push(ConfigIssue::new("/qfi/n_max", "must be at least 2"));
    }
    if let Some(gaps) = &q.gaps {
        if gaps.len() < 3 {
            issues.push(ConfigIssue::new("/qfi/gaps", "need at least 3 values"));
        }
        for (i, g) in gaps.iter().enumerate() {
            if !(g.is_finite() && *g > 0.0) {
                issues.push(ConfigIssue::new(
                    &format!("/qfi/gaps/{i}"),
                    "must be finite and positive",
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_valid() {
        let c = parse_config(r#"{"model":{"type":"single_mode","omega":1,"chi":0.6},"task":"spectrum"}"#).unwrap();
        assert_eq!(c.task, Task::Spectrum);
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.output.dir, "out");
    }

    #[test]
    fn unknown_model_type_names_the_field() {
        let err = parse_config(r#"{"model":{"type":"four_mode","omega":1},"task":"spectrum"}"#).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].pointer, "/model/type");
        assert!(err.issues[0].message.contains("four_mode"), "{err}");
    }

    #[test]
    fn unresolvable_target() {
        let text = r#"{"model":{"type":"two_mode","omega1":1,"omega2":1,"lambda":0.6},
            "task":"phase-scan","path":{"target":"chi3","lo":0,"hi":1}}"#;
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues[0].pointer, "/path/target");
        assert!(err.issues[0].message.contains("target not found"), "{err}");
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let err =
            parse_config(r#"{"model":{"type":"single_mode","omega":"x","chi":0},"task":"spectrum"}"#).unwrap_err();
        assert_eq!(err.issues[0].pointer, "/model/omega");
        let err = parse_config(r#"{"model":{"type":"single_mode","omega":1,"chi":0},"task":"fly"}"#).unwrap_err();
        assert_eq!(err.issues[0].pointer, "/task");
        let err = parse_config("{").unwrap_err();
        assert_eq!(err.issues.len(), 1);
    }

    #[test]
    fn semantic_errors_are_collected() {
        let text = r#"{"model":{"type":"single_mode","omega":1,"chi":0},"task":"critical",
            "path":{"target":"chi","lo":2,"hi":1,"samples":1},"solver":{"tol_im":-1}}"#;
        let err = parse_config(text).unwrap_err();
        let pointers: Vec<&str> = err.issues.iter().map(|i| i.pointer.as_str()).collect();
        assert_eq!(pointers, ["/solver/tol_im", "/path/hi", "/path/samples"]);
    }

    #[test]
    fn task_sections_are_required() {
        let err =
            parse_config(r#"{"model":{"type":"single_mode","omega":1,"chi":0},"task":"phase-scan"}"#).unwrap_err();
        assert_eq!(err.issues[0].pointer, "/path");
        let err = parse_config(
            r#"{"model":{"type":"rabi","omega0":1,"delta":1,"eta":0.1},"task":"qfi","qfi":{"phi":"omega"}}"#,
        )
        .unwrap_err();
        assert_eq!(err.issues[0].pointer, "/model/type");
    }

    #[test]
    fn emitted_config_parses_back() {
        let text = r#"{"model":{"type":"three_ring","omega":1,"delta":20,"g":1,"j_hop":0.3,"theta":3.141592653589793},
            "task":"qfi","qfi":{"phi":"omega","gaps":[0.01,0.001,0.0001]},"output":{"dir":"ring"}}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
    }
}
