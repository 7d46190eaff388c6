//! Normal/superradiant classification along one-parameter paths
//!
//! A spectrum is superradiant (SP) when some eigenvalue has a non-negligible
//! imaginary part. Exceptional points (EP) are where the label flips;
//! degenerate points (DP) are zeros of `det M`. Both are bracketed on a
//! sampled scan and then refined: EPs by bisection on the label, DPs by
//! Brent's method on sign changes of `det M` and by golden-section search
//! on `min |E|` for zeros where `det M` only touches zero.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigenvalues, SolverOptions};
use crate::error::{Error, Result};
use crate::hbmatrix::HBMatrix;
use crate::model::{ModelSpec, QuadraticHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    NP,
    SP,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::NP => "NP",
            PhaseLabel::SP => "SP",
        })
    }
}

/// `max |Im E| - tol_im (1 + max |E|)`; positive exactly when superradiant.
pub fn indicator(values: &[Complex64], tol_im: f64) -> f64 {
    let im = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    im - tol_im * (1.0 + scale)
}

pub fn classify(values: &[Complex64], tol_im: f64) -> PhaseLabel {
    if indicator(values, tol_im) > 0.0 {
        PhaseLabel::SP
    } else {
        PhaseLabel::NP
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// A model with one named parameter swept over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPath {
    pub model: ModelSpec,
    pub target: String,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub scale: Scale,
}

impl ParamPath {
    pub fn new(model: ModelSpec, target: &str, lo: f64, hi: f64, samples: usize) -> Result<Self> {
        let path = Self {
            model,
            target: target.to_string(),
            lo,
            hi,
            samples,
            scale: Scale::Linear,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || !(self.lo < self.hi) {
            return Err(Error::param(
                "range",
                format!("need finite lo < hi, got [{}, {}]", self.lo, self.hi),
            ));
        }
        if self.samples < 2 {
            return Err(Error::param("samples", "need at least 2 samples"));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return Err(Error::param("range", "log scale needs lo > 0"));
        }
        self.model.param(&self.target)?;
        Ok(())
    }

    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }

    /// Sample positions, ascending; the endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == n - 1 {
                    return self.hi;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.lo + (self.hi - self.lo) * t,
                    Scale::Log => (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * t).exp(),
                }
            })
            .collect()
    }

    pub fn model_at(&self, p: f64) -> Result<QuadraticHamiltonian> {
        self.model.with_param(&self.target, p)?.build()
    }
}

/// Numerical settings shared by scans and refinements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub solver: SolverOptions,
    /// Parameter tolerance for refined critical points; `None` means
    /// `1e-8 × range`.
    pub tol: Option<f64>,
    /// Worker threads for independent evaluations; 1 runs inline.
    pub threads: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tol: None,
            threads: 1,
        }
    }
}

impl ScanOptions {
    fn tol_for(&self, path: &ParamPath) -> f64 {
        self.tol.unwrap_or(1e-8 * path.range())
    }
}

/// One sampled point; `label` is `None` when the evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub param: f64,
    pub label: Option<PhaseLabel>,
    pub max_abs_im: f64,
    pub min_abs_e: f64,
    pub det: f64,
    /// `‖M‖_F^(2N)`, the natural size of `det M`.
    pub det_scale: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    EP,
    DP,
    #[serde(rename = "EP_DP")]
    EpDp,
}

impl fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalKind::EP => "EP",
            CriticalKind::DP => "DP",
            CriticalKind::EpDp => "EP_DP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    pub param: f64,
    /// Final refinement bracket.
    pub bracket: (f64, f64),
    /// Indicator values at the bracket ends: the SP indicator for EPs,
    /// `det M` for DPs.
    pub indicators: (f64, f64),
    /// False for a DP where `det M` touches zero without changing sign.
    pub crossing: bool,
}

impl CriticalPoint {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Everything known about one parameter value.
#[derive(Debug, Clone)]
struct Eval {
    label: PhaseLabel,
    indicator: f64,
    max_abs_im: f64,
    min_abs_e: f64,
    det: f64,
    det_scale: f64,
}

fn evaluate(path: &ParamPath, p: f64, solver: &SolverOptions) -> Result<Eval> {
    let h = path.model_at(p)?;
    let m = HBMatrix::build(&h)?;
    let values = eigenvalues(&m, solver)?;
    let det = m.determinant()?;
    let ind = indicator(&values, solver.tol_im);
    Ok(Eval {
        label: if ind > 0.0 { PhaseLabel::SP } else { PhaseLabel::NP },
        indicator: ind,
        max_abs_im: values.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        min_abs_e: values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
        det,
        det_scale: m.frobenius_norm().powi(2 * h.n_modes() as i32),
    })
}

fn run_parallel<T, R, F>(threads: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Evaluates every sample. Failures are recorded per point; only an
/// invalid path is an error.
pub fn scan(path: &ParamPath, opts: &ScanOptions) -> Result<Vec<PhasePoint>> {
    path.validate()?;
    let params = path.values();
    run_parallel(opts.threads, &params, |&p| match evaluate(path, p, &opts.solver) {
        Ok(e) => PhasePoint {
            param: p,
            label: Some(e.label),
            max_abs_im: e.max_abs_im,
            min_abs_e: e.min_abs_e,
            det: e.det,
            det_scale: e.det_scale,
            error: None,
        },
        Err(err) => {
            log::warn!("evaluation at {} = {p} failed: {err}", path.target);
            PhasePoint {
                param: p,
                label: None,
                max_abs_im: f64::NAN,
                min_abs_e: f64::NAN,
                det: f64::NAN,
                det_scale: f64::NAN,
                error: Some(err.to_string()),
            }
        }
    })
}

/// Result of refining a completed scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub points: Vec<PhasePoint>,
    pub eps: Vec<CriticalPoint>,
    pub dps: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

/// Scans the path and refines all critical points.
pub fn analyze(path: &ParamPath, opts: &ScanOptions) -> Result<Analysis> {
    let points = scan(path, opts)?;
    analyze_points(path, points, opts)
}

pub fn locate_eps(path: &ParamPath, opts: &ScanOptions) -> Result<Vec<CriticalPoint>> {
    Ok(analyze(path, opts)?.eps)
}

pub fn locate_dps(path: &ParamPath, opts: &ScanOptions) -> Result<Vec<CriticalPoint>> {
    Ok(analyze(path, opts)?.dps)
}

/// Refines critical points from already sampled `points`.
pub fn analyze_points(path: &ParamPath, points: Vec<PhasePoint>, opts: &ScanOptions) -> Result<Analysis> {
    let tol = opts.tol_for(path);
    let solver = opts.solver;
    let mut warnings = Vec::new();

    // Degenerate points with a sign change of det M.
    // Samples whose |det M| is at roundoff level are left to the
    // tangential search below.
    let mut dp_brackets = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.label.is_none() || b.label.is_none() {
            continue;
        }
        if a.det * b.det < 0.0 && !det_is_noise(a) && !det_is_noise(b) {
            dp_brackets.push((a.param, b.param));
        }
    }
    let det_at = |p: f64| evaluate(path, p, &solver).map(|e| e.det);
    let crossing: Vec<Result<CriticalPoint>> = run_parallel(opts.threads, &dp_brackets, |&(a, b)| {
        let (lo, hi, fl, fh) = brent(&det_at, a, b, tol)?;
        Ok(CriticalPoint {
            kind: CriticalKind::DP,
            param: 0.5 * (lo + hi),
            bracket: (lo, hi),
            indicators: (fl, fh),
            crossing: true,
        })
    })?;
    let mut dps = Vec::new();
    for r in crossing {
        match r {
            Ok(c) => dps.push(c),
            Err(e) => warnings.push(format!("DP refinement failed: {e}")),
        }
    }

    // Degenerate points where det M only touches zero: local minima of
    // min |E| between samples, refined by golden-section search.
    let mut candidates = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        let (a, b, c) = (&points[i - 1], &points[i], &points[i + 1]);
        if a.label.is_none() || b.label.is_none() || c.label.is_none() {
            continue;
        }
        if b.min_abs_e <= a.min_abs_e && b.min_abs_e <= c.min_abs_e {
            candidates.push((a.param, c.param));
        }
    }
    let min_e_at = |p: f64| evaluate(path, p, &solver).map(|e| e.min_abs_e);
    let touching: Vec<Result<Option<CriticalPoint>>> = run_parallel(opts.threads, &candidates, |&(a, b)| {
        let (lo, hi) = golden_min(&min_e_at, a, b, 1e-3 * tol)?;
        let p = 0.5 * (lo + hi);
        let e = evaluate(path, p, &solver)?;
        if e.det.abs() > 1e-10 * e.det_scale {
            return Ok(None);
        }
        Ok(Some(CriticalPoint {
            kind: CriticalKind::DP,
            param: p,
            bracket: (lo, hi),
            indicators: (e.det, e.det),
            crossing: false,
        }))
    })?;
    for r in touching {
        match r {
            Ok(Some(c)) => {
                let step = sample_step(&points, c.param);
                if dps.iter().all(|d| (d.param - c.param).abs() > step.max(10.0 * tol)) {
                    dps.push(c);
                }
            }
            Ok(None) => {}
            Err(e) => warnings.push(format!("DP refinement failed: {e}")),
        }
    }
    dps.sort_by(|a, b| a.param.total_cmp(&b.param));
    dps.dedup_by(|b, a| (a.param - b.param).abs() <= 10.0 * tol);

    // Exceptional points: label changes between samples, plus label
    // changes hidden next to a degenerate point (windows narrower than
    // the sampling step border DPs in practice).
    let mut probes: Vec<(f64, Option<PhaseLabel>)> = points.iter().map(|p| (p.param, p.label)).collect();
    let delta = (10.0 * tol).max(1e-7 * path.range());
    for d in &dps {
        for q in [d.param - delta, d.param + delta] {
            if q > path.lo && q < path.hi {
                let label = evaluate(path, q, &solver).ok().map(|e| e.label);
                probes.push((q, label));
            }
        }
    }
    probes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ep_brackets = Vec::new();
    for w in probes.windows(2) {
        if let (Some(la), Some(lb)) = (w[0].1, w[1].1) {
            if la != lb {
                ep_brackets.push((w[0].0, w[1].0));
            }
        }
    }
    let ind_at = |p: f64| evaluate(path, p, &solver).map(|e| e.indicator);
    let refined: Vec<Result<CriticalPoint>> = run_parallel(opts.threads, &ep_brackets, |&(a, b)| {
        let (lo, hi, fl, fh) = bisect(&ind_at, a, b, tol)?;
        Ok(CriticalPoint {
            kind: CriticalKind::EP,
            param: 0.5 * (lo + hi),
            bracket: (lo, hi),
            indicators: (fl, fh),
            crossing: true,
        })
    })?;
    let mut eps = Vec::new();
    for r in refined {
        match r {
            Ok(c) => eps.push(c),
            Err(e) => warnings.push(format!("EP refinement failed: {e}")),
        }
    }
    eps.sort_by(|a, b| a.param.total_cmp(&b.param));

    let coincide = 10.0 * tol;
    for d in dps.iter_mut() {
        if eps.iter().any(|e| (e.param - d.param).abs() <= coincide) {
            d.kind = CriticalKind::EpDp;
        }
    }
    for e in eps.iter_mut() {
        if dps.iter().any(|d| (e.param - d.param).abs() <= coincide) {
            e.kind = CriticalKind::EpDp;
        }
    }

    // Sampling caveat.
    let mut bounds: Vec<f64> = eps.iter().map(|e| e.param).collect();
    bounds.dedup_by(|b, a| (*b - *a).abs() <= coincide);
    let step = points.windows(2).map(|w| w[1].param - w[0].param).fold(0.0, f64::max);
    let narrowest = bounds.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if narrowest < 2.0 * step {
        warnings.push(format!(
            "narrowest detected phase interval ({narrowest:.3e}) is below twice the sampling step ({step:.3e}); narrower intervals may be missed"
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Analysis {
        points,
        eps,
        dps,
        warnings,
    })
}

fn det_is_noise(p: &PhasePoint) -> bool {
    p.det.abs() <= 1e-10 * p.det_scale
}

fn sample_step(points: &[PhasePoint], p: f64) -> f64 {
    points
        .windows(2)
        .find(|w| w[0].param <= p && p <= w[1].param)
        .map(|w| w[1].param - w[0].param)
        .unwrap_or(0.0)
}

/// Bisection on the sign of `f`; returns the final bracket and its end values.
fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64, f64, f64)> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Ok((a, b, fa, fb))
}

/// Brent's method for a sign change of `f` on `[a, b]`. Returns a bracket
/// of width at most `tol` around the root with the function values at its
/// ends.
fn brent<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64, f64, f64)> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok((a, a, fa, fa));
    }
    if fb == 0.0 {
        return Ok((b, b, fb, fb));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    if fb == 0.0 {
        return Ok((b, b, fb, fb));
    }
    // Shrink the final bracket [b, c] to the requested width.
    let (mut lo, mut hi, mut flo, mut fhi) = if b < c { (b, c, fb, fc) } else { (c, b, fc, fb) };
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok((m, m, fm, fm));
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
            fhi = fm;
        }
    }
    Ok((lo, hi, flo, fhi))
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_min<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            if !(x1 > a && x1 < x2) {
                break;
            }
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            if !(x2 > x1 && x2 < b) {
                break;
            }
            f2 = f(x2)?;
        }
    }
    Ok((a, b))
}

/// Maximal parameter interval with one label.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInterval {
    pub lo: f64,
    pub hi: f64,
    pub label: Option<PhaseLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    pub intervals: Vec<PhaseInterval>,
    /// All refined critical points, ascending; an EP that coincides with a
    /// DP appears once, as `EP_DP`.
    pub critical: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

impl PhaseSequence {
    pub fn labels(&self) -> Vec<Option<PhaseLabel>> {
        self.intervals.iter().map(|i| i.label).collect()
    }

    /// Parameters where the label changes.
    pub fn transitions(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| w[0].hi).collect()
    }
}

pub fn phase_sequence(path: &ParamPath, opts: &ScanOptions) -> Result<PhaseSequence> {
    let analysis = analyze(path, opts)?;
    sequence_from(path, &analysis, opts)
}

/// Merges an [`Analysis`] into constant-label intervals.
pub fn sequence_from(path: &ParamPath, analysis: &Analysis, opts: &ScanOptions) -> Result<PhaseSequence> {
    let tol = opts.tol_for(path);
    let mut critical: Vec<CriticalPoint> = analysis.dps.clone();
    for e in &analysis.eps {
        if !analysis.dps.iter().any(|d| (d.param - e.param).abs() <= 10.0 * tol) {
            critical.push(e.clone());
        }
    }
    critical.sort_by(|a, b| a.param.total_cmp(&b.param));

    // Label changes happen only at EPs; DPs are kept as typed boundaries
    // but do not split intervals unless they carry an EP.
    // An EP that coincides with a DP is cut at the DP, which is refined
    // on det M and is the sharper estimate.
    let mut cuts: Vec<f64> = analysis
        .eps
        .iter()
        .map(|e| {
            analysis
                .dps
                .iter()
                .find(|d| (d.param - e.param).abs() <= 10.0 * tol)
                .map_or(e.param, |d| d.param)
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= 10.0 * tol);
    let mut edges = vec![path.lo];
    edges.extend(cuts.iter().copied().filter(|&c| c > path.lo && c < path.hi));
    edges.push(path.hi);

    let mids: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let labels: Vec<Option<PhaseLabel>> = run_parallel(opts.threads, &mids, |&(a, b)| {
        evaluate(path, 0.5 * (a + b), &opts.solver).ok().map(|e| e.label)
    })?;
    let mut intervals: Vec<PhaseInterval> = Vec::new();
    for ((lo, hi), label) in mids.into_iter().zip(labels) {
        match intervals.last_mut() {
            Some(last) if last.label == label => last.hi = hi,
            _ => intervals.push(PhaseInterval { lo, hi, label }),
        }
    }
    Ok(PhaseSequence {
        intervals,
        critical,
        warnings: analysis.warnings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_mode_spec(lambda: f64, g: f64) -> ModelSpec {
        ModelSpec::TwoMode {
            omega1: 1.0,
            omega2: 1.0,
            chi1: c(0.0),
            chi2: c(0.0),
            lambda: c(lambda),
            g: c(g),
        }
    }

    fn spectrum_of(h: &QuadraticHamiltonian) -> Vec<Complex64> {
        eigenvalues(&HBMatrix::build(h).unwrap(), &SolverOptions::default()).unwrap()
    }

    #[test]
    fn classification_examples() {
        use crate::model::{single_mode, two_mode};
        assert_eq!(classify(&spectrum_of(&single_mode(1.0, c(0.6))), 1e-8), PhaseLabel::NP);
        assert_eq!(classify(&spectrum_of(&single_mode(1.0, c(1.2))), 1e-8), PhaseLabel::SP);
        let h = two_mode(1.0, 1.0, c(3.0), c(0.0), c(3.0), c(0.0));
        assert_eq!(classify(&spectrum_of(&h), 1e-8), PhaseLabel::SP);
    }

    #[test]
    fn classification_is_monotone_in_tolerance() {
        let v = [Complex64::new(0.0, 1e-6), Complex64::new(0.0, -1e-6)];
        assert_eq!(classify(&v, 1e-8), PhaseLabel::SP);
        assert_eq!(classify(&v, 1e-5), PhaseLabel::NP);
    }

    #[test]
    fn path_validation() {
        let m = two_mode_spec(0.6, 0.6);
        assert!(ParamPath::new(m.clone(), "chi1", 1.0, 0.0, 10).is_err());
        assert!(ParamPath::new(m.clone(), "chi1", 0.0, 1.0, 1).is_err());
        assert!(matches!(
            ParamPath::new(m.clone(), "chi3", 0.0, 1.0, 10),
            Err(Error::UnknownTarget(_))
        ));
        let p = ParamPath::new(m, "chi1", 0.0, 1.0, 11).unwrap();
        let v = p.values();
        assert_eq!(v.len(), 11);
        assert_eq!((v[0], v[10]), (0.0, 1.0));
    }

    #[test]
    fn fig2_lambda_zero() {
        let path = ParamPath::new(two_mode_spec(0.0, 0.0), "chi1", 0.0, 1.0, 101).unwrap();
        let pts = scan(&path, &ScanOptions::default()).unwrap();
        for p in &pts {
            if p.param < 0.5 - 1e-12 {
                assert_eq!(p.max_abs_im, 0.0, "at {}", p.param);
            } else if p.param > 0.5 + 1e-12 {
                assert!(p.max_abs_im > 0.0);
            }
        }
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        assert_eq!(seq.labels(), vec![Some(PhaseLabel::NP), Some(PhaseLabel::SP)]);
        assert!((seq.transitions()[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn fig2_lambda_06_reentrant() {
        let path = ParamPath::new(two_mode_spec(0.6, 0.6), "chi1", 0.0, 1.0, 201).unwrap();
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        assert_eq!(
            seq.labels(),
            vec![Some(PhaseLabel::SP), Some(PhaseLabel::NP), Some(PhaseLabel::SP)]
        );
        let t = seq.transitions();
        assert!((t[0] - 0.22).abs() < 1e-6 && (t[1] - 0.5).abs() < 1e-6, "{t:?}");
    }

    #[test]
    fn rotating_only_dp_without_ep() {
        let m = ModelSpec::TwoMode {
            omega1: 1.0,
            omega2: 4.0,
            chi1: c(0.0),
            chi2: c(0.0),
            lambda: c(1.0),
            g: c(0.0),
        };
        let path = ParamPath::new(m, "lambda", 1.0, 3.0, 201).unwrap();
        let a = analyze(&path, &ScanOptions::default()).unwrap();
        assert!(a.eps.is_empty());
        assert_eq!(a.dps.len(), 1);
        assert_eq!(a.dps[0].kind, CriticalKind::DP);
        assert!(!a.dps[0].crossing);
        assert!((a.dps[0].param - 2.0).abs() < 1e-8);
        assert!(a.points.iter().all(|p| p.label == Some(PhaseLabel::NP)));
    }

    #[test]
    fn rabi_critical_coupling() {
        let m = ModelSpec::Rabi {
            omega0: 1.0,
            delta: 100.0,
            eta: 5.0,
        };
        let path = ParamPath::new(m, "eta", 8.0, 12.0, 41).unwrap();
        let eps = locate_eps(&path, &ScanOptions::default()).unwrap();
        assert_eq!(eps.len(), 1);
        assert!((eps[0].param - 10.0).abs() < 1e-6);
        assert_eq!(eps[0].kind, CriticalKind::EpDp);
    }

    #[test]
    fn perfect_symmetry_coincidence() {
        let spec = ModelSpec::Symmetric {
            n_modes: 2,
            omega: 1.0,
            chi: 0.0,
            lambda: 0.5,
            g: 0.0,
        };
        let path = ParamPath::new(spec, "chi", 0.0, 0.5, 51).unwrap();
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        let boundaries: Vec<&CriticalPoint> = seq.critical.iter().collect();
        assert!(!boundaries.is_empty());
        for b in boundaries {
            assert_eq!(b.kind, CriticalKind::EpDp);
        }
        assert!((seq.transitions()[0] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn four_phase_sequence() {
        let path = ParamPath::new(two_mode_spec(4.1f64.sqrt(), 0.0), "chi1", 0.0, 2.0, 201).unwrap();
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        use PhaseLabel::*;
        assert_eq!(seq.labels(), vec![Some(NP), Some(SP), Some(NP), Some(SP)]);
        let kinds: Vec<CriticalKind> = seq.critical.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![CriticalKind::EP, CriticalKind::EP, CriticalKind::EpDp]);
        let want = [1.31524, 1.53953, 1.55];
        for (c, w) in seq.critical.iter().zip(want) {
            assert!((c.param - w).abs() < 1e-5, "{} vs {w}", c.param);
        }
    }

    #[test]
    fn hidden_window_next_to_dp_is_found_with_coarse_sampling() {
        let path = ParamPath::new(two_mode_spec(4.1f64.sqrt(), 0.0), "chi1", 0.0, 2.0, 21).unwrap();
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        use PhaseLabel::*;
        assert_eq!(seq.labels(), vec![Some(NP), Some(SP), Some(NP), Some(SP)]);
    }

    #[test]
    fn hermitian_paths_are_normal() {
        let m = ModelSpec::TwoMode {
            omega1: 1.0,
            omega2: 2.0,
            chi1: c(0.0),
            chi2: c(0.0),
            lambda: Complex64::new(0.3, 0.2),
            g: c(0.0),
        };
        let path = ParamPath::new(m, "lambda", 0.0, 3.0, 61).unwrap();
        let a = analyze(&path, &ScanOptions::default()).unwrap();
        assert!(a.eps.is_empty());
        assert!(a.points.iter().all(|p| p.label == Some(PhaseLabel::NP)));
    }

    #[test]
    fn parallel_scan_is_identical() {
        let path = ParamPath::new(two_mode_spec(0.6, 0.6), "chi1", 0.0, 1.0, 57).unwrap();
        let a = scan(&path, &ScanOptions::default()).unwrap();
        let b = scan(
            &path,
            &ScanOptions {
                threads: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strong_counter_rotating_is_superradiant_throughout() {
        let path = ParamPath::new(two_mode_spec(5.0, 5.0), "chi1", 0.0, 1.0, 51).unwrap();
        let pts = scan(&path, &ScanOptions::default()).unwrap();
        assert!(pts.iter().all(|p| p.label == Some(PhaseLabel::SP)));
    }

    #[test]
    fn ep_brackets_straddle_the_transition_and_ep_only_points_have_nonzero_det() {
        let path = ParamPath::new(two_mode_spec(4.1f64.sqrt(), 0.0), "chi1", 0.0, 2.0, 201).unwrap();
        let opts = ScanOptions::default();
        let a = analyze(&path, &opts).unwrap();
        for ep in &a.eps {
            let (lo, hi) = ep.bracket;
            assert!(hi - lo <= 1e-8 * path.range());
            let l = evaluate(&path, lo, &opts.solver).unwrap().label;
            let r = evaluate(&path, hi, &opts.solver).unwrap().label;
            assert_ne!(l, r);
            if ep.kind == CriticalKind::EP {
                let e = evaluate(&path, ep.param, &opts.solver).unwrap();
                assert!(e.det.abs() > 1e-6 * e.det_scale);
            }
        }
    }

    #[test]
    fn three_mode_perfect_symmetry() {
        let spec = ModelSpec::Symmetric {
            n_modes: 3,
            omega: 1.0,
            chi: 0.0,
            lambda: 0.2,
            g: 0.1,
        };
        let path = ParamPath::new(spec, "chi", 0.0, 1.0, 101).unwrap();
        let seq = phase_sequence(&path, &ScanOptions::default()).unwrap();
        // Pair modes soften at 2χ - g = ω - λ; the symmetric mode only
        // reaches zero later, inside the superradiant phase.
        assert_eq!(seq.transitions().len(), 1);
        let t = seq.transitions()[0];
        assert!((t - 0.45).abs() < 1e-7);
        let at = seq.critical.iter().find(|c| (c.param - t).abs() < 1e-6).unwrap();
        assert_eq!(at.kind, CriticalKind::EpDp);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn hermitian_models_never_leave_the_normal_phase(
            w1 in 0.1f64..3.0, w2 in 0.1f64..3.0, re in -2.0f64..2.0, im in -2.0f64..2.0,
        ) {
            let m = ModelSpec::TwoMode {
                omega1: w1,
                omega2: w2,
                chi1: c(0.0),
                chi2: c(0.0),
                lambda: Complex64::new(re, im),
                g: c(0.0),
            };
            let path = ParamPath::new(m, "omega1", 0.1, 3.0, 21).unwrap();
            let a = analyze(&path, &ScanOptions::default()).unwrap();
            proptest::prop_assert!(a.eps.is_empty());
            proptest::prop_assert!(a.points.iter().all(|p| p.label == Some(PhaseLabel::NP)));
        }
    }

    #[test]
    fn root_finders() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let (lo, hi, _, _) = brent(&f, 0.0, 2.0, 1e-12).unwrap();
        assert!(hi - lo <= 1e-12);
        assert!((0.5 * (lo + hi) - 2f64.cbrt()).abs() < 1e-12);
        let g = |x: f64| Ok((x - 0.3).abs());
        let (lo, hi) = golden_min(&g, 0.0, 1.0, 1e-10).unwrap();
        assert!((0.5 * (lo + hi) - 0.3).abs() < 1e-9);
        let (lo, hi, _, _) = bisect(&|x: f64| Ok(x - 0.7), 0.0, 1.0, 1e-10).unwrap();
        assert!(lo <= 0.7 && 0.7 <= hi);
    }
}
