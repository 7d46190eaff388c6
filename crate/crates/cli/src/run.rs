//! Task execution and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use hb_core::eigen::spectrum;
use hb_core::gaussian::{qfi, scaling_exponent, GroundFamily, QfiOptions};
use hb_core::phase::{analyze, classify, sequence_from, ScanOptions};
use hb_core::{CriticalPoint, ErrorClass, HBMatrix, ParamPath};
use serde_json::{json, Value};

use crate::check;
use crate::config::{ConfigError, ConfigIssue, RunConfig, Task};
use crate::format::{jnum, json_text, num, Csv};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] hb_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// The task ran and its artifacts were written, but it reports failures.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for configuration errors, 2 for numeric failures, 3 for violated
    /// preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::Numeric => 2,
                ErrorClass::Precondition => 3,
            },
            CliError::Io { .. } | CliError::Failed(_) => 2,
        }
    }
}

/// A named output file held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents,
        }
    }
}

/// Artifacts of a task, plus a failure message when the task completed
/// but found problems (failed checks).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<String>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            failure: None,
        }
    }
}

/// Runs `task` on a validated configuration. `threads` sizes the scan
/// worker pool; outputs do not depend on it.
pub fn execute(config: &RunConfig, task: Task, threads: usize) -> Result<Outcome, CliError> {
    match task {
        Task::Spectrum => spectrum_task(config).map(Outcome::from),
        Task::PhaseScan | Task::Critical => phase_task(config, task, threads).map(Outcome::from),
        Task::Qfi => qfi_task(config).map(Outcome::from),
        Task::Check => check_task(config),
        Task::DumpMatrix => dump_task(config).map(Outcome::from),
    }
}

/// Writes the artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(io(&path))?;
    }
    Ok(())
}

fn missing(pointer: &str, message: &str) -> CliError {
    CliError::Config(ConfigError {
        issues: vec![ConfigIssue {
            pointer: pointer.to_string(),
            message: message.to_string(),
        }],
    })
}

fn spectrum_task(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let h = config.model.build()?;
    let m = HBMatrix::build(&h)?;
    let s = spectrum(&h, &config.solver)?;

    let mut values = Csv::new(&["re", "im"]);
    for z in &s.values {
        values.row(&[num(z.re), num(z.im)]);
    }

    let mut pairs = Csv::new(&[
        "pair",
        "branch",
        "e_plus_re",
        "e_plus_im",
        "e_minus_re",
        "e_minus_im",
        "norm",
        "defect",
    ]);
    for (k, p) in s.pairs.iter().enumerate() {
        let branch = s
            .labels
            .as_ref()
            .and_then(|l| {
                let b = l.pair_of_branch.iter().position(|&q| q == k)?;
                l.ordered[b].then(|| b.to_string())
            })
            .unwrap_or_default();
        pairs.row(&[
            k.to_string(),
            branch,
            num(p.e_plus.re),
            num(p.e_plus.im),
            num(p.e_minus.re),
            num(p.e_minus.im),
            num(p.norm_plus),
            num(p.defect),
        ]);
    }

    let det = m.determinant().map(jnum).unwrap_or(Value::Null);
    let summary = json!({
        "model": config.model.type_name(),
        "n_modes": h.n_modes(),
        "phase": classify(&s.values, config.solver.tol_im).to_string(),
        "max_abs_im": jnum(s.max_abs_im()),
        "min_abs_e": jnum(s.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)),
        "gap": s.real_gap().map(jnum),
        "det": det,
        "pairing_defect": jnum(s.max_pair_defect()),
        "branches_valid_up_to": s.labels.as_ref().map(|l| jnum(l.valid_up_to)),
    });
    Ok(vec![
        Artifact::new("spectrum.csv", values.finish()),
        Artifact::new("pairs.csv", pairs.finish()),
        Artifact::new("spectrum.json", json_text(&summary)),
    ])
}

fn critical_json(points: &[CriticalPoint]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|c| {
                json!({
                    "kind": c.kind.to_string(),
                    "param": jnum(c.param),
                    "bracket": [jnum(c.bracket.0), jnum(c.bracket.1)],
                    "indicators": [jnum(c.indicators.0), jnum(c.indicators.1)],
                    "crossing": c.crossing,
                })
            })
            .collect(),
    )
}

fn phase_task(config: &RunConfig, task: Task, threads: usize) -> Result<Vec<Artifact>, CliError> {
    let pc = config
        .path
        .as_ref()
        .ok_or_else(|| missing("/path", &format!("required for task {}", task.name())))?;
    let path = ParamPath {
        model: config.model.clone(),
        target: pc.target.clone(),
        lo: pc.lo,
        hi: pc.hi,
        samples: pc.samples,
        scale: pc.scale,
    };
    path.validate()?;
    let opts = ScanOptions {
        solver: config.solver,
        tol: pc.tol,
        threads: threads.max(1),
    };
    let analysis = analyze(&path, &opts)?;
    let seq = sequence_from(&path, &analysis, &opts)?;
    let failed = analysis.points.iter().filter(|p| p.label.is_none()).count();
    if failed > 0 {
        log::warn!("{failed} of {} scan points failed", analysis.points.len());
    }
    let critical = Artifact::new("critical.json", json_text(&critical_json(&seq.critical)));

    if task == Task::PhaseScan {
        let mut csv = Csv::new(&["param", "label", "max_abs_im", "min_abs_e", "det"]);
        for p in &analysis.points {
            let label = p.label.map_or("FAILED".to_string(), |l| l.to_string());
            csv.row(&[num(p.param), label, num(p.max_abs_im), num(p.min_abs_e), num(p.det)]);
        }
        return Ok(vec![Artifact::new("scan.csv", csv.finish()), critical]);
    }

    let phases = json!({
        "target": pc.target,
        "lo": jnum(pc.lo),
        "hi": jnum(pc.hi),
        "intervals": seq.intervals.iter().map(|i| json!({
            "lo": jnum(i.lo),
            "hi": jnum(i.hi),
            "label": i.label.map_or("FAILED".to_string(), |l| l.to_string()),
        })).collect::<Vec<_>>(),
        "transitions": seq.transitions().iter().map(|&x| jnum(x)).collect::<Vec<_>>(),
        "warnings": seq.warnings,
    });
    Ok(vec![critical, Artifact::new("phases.json", json_text(&phases))])
}

fn qfi_task(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let q = config
        .qfi
        .as_ref()
        .ok_or_else(|| missing("/qfi", "required for task qfi"))?;
    let family = GroundFamily::from_spec(&config.model)?;
    let at = match q.at {
        Some(at) => at,
        None => family.param(&q.phi)?,
    };
    let opts = QfiOptions {
        step: q.step,
        n_max: q.n_max,
        richardson: q.richardson,
        phase_scramble: None,
    };
    let r = qfi(&family, &q.phi, at, &opts)?;
    let mut doc = json!({
        "phi": r.phi,
        "at": jnum(r.at),
        "F": jnum(r.f),
        "step": jnum(r.step),
        "n_max": r.n_max,
        "convergence": jnum(r.convergence),
        "gap": jnum(r.gap),
    });
    let mut out = Vec::new();
    if let Some(gaps) = &q.gaps {
        let fit = scaling_exponent(&family, &q.phi, gaps, &opts)?;
        let mut csv = Csv::new(&["gap", "F"]);
        for &(g, f) in &fit.points {
            csv.row(&[num(g), num(f)]);
        }
        out.push(Artifact::new("scaling.csv", csv.finish()));
        doc["scaling"] = json!({
            "slope": jnum(fit.slope),
            "intercept": jnum(fit.intercept),
            "r_squared": jnum(fit.r_squared),
            "linear": fit.is_linear(),
        });
    }
    out.insert(0, Artifact::new("qfi.json", json_text(&doc)));
    Ok(out)
}

fn check_task(config: &RunConfig) -> Result<Outcome, CliError> {
    let opts = config.check.clone().unwrap_or_default();
    let (doc, passed) = check::report(&config.model, &config.solver, opts.n_max, opts.claims)?;
    Ok(Outcome {
        artifacts: vec![Artifact::new("check.json", json_text(&doc))],
        failure: (!passed).then(|| "one or more checks failed; see check.json".to_string()),
    })
}

fn dump_task(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let m = HBMatrix::build(&config.model.build()?)?;
    let e = m.entries();
    let mut csv = Csv::new(&["row", "col", "re", "im"]);
    for r in 0..e.nrows() {
        for c in 0..e.ncols() {
            let z = e[(r, c)];
            csv.row(&[r.to_string(), c.to_string(), num(z.re), num(z.im)]);
        }
    }
    Ok(vec![Artifact::new("matrix.csv", csv.finish())])
}
