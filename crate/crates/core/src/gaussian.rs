//! Squeezed ground states and their quantum Fisher information
//!
//! Ground states are built in closed form (single-mode squeezed vacuum,
//! or the three-site ring's product of a `q = 0` squeezed vacuum and a
//! two-mode squeezed pair), materialized as truncated Fock vectors and
//! differentiated numerically. Fisher information is
//! `F = 4 (⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ThreeRingParams};

const TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundKind {
    SingleMode,
    Ring3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedGroundState {
    pub kind: GroundKind,
    /// Phase of the two-photon amplitude; `π` for the ring, whose
    /// effective amplitude `−g²/Δ` is negative.
    pub theta: f64,
    /// `|ξ| e^{iθ}`; zero for the ring.
    pub xi: Complex64,
    pub xi0: f64,
    pub xi_theta: f64,
    /// Smallest normal-mode frequency; negative when a ring pair mode is
    /// energetically unstable.
    pub omega_gap: f64,
    /// Smallest `√(ω² − |χ|²)`-type root, which vanishes at the
    /// exceptional point.
    pub ep_distance: f64,
}

/// Ground state of `ω a†a + (χ a² + χ* a†²)/2`.
pub fn single_mode_ground(omega: f64, chi: Complex64) -> Result<SqueezedGroundState> {
    if !omega.is_finite() || omega < 0.0 {
        return Err(Error::param(
            "omega",
            format!("need a finite non-negative frequency, got {omega}"),
        ));
    }
    if !(chi.re.is_finite() && chi.im.is_finite()) {
        return Err(Error::param("chi", "must be finite"));
    }
    let a = chi.norm();
    if omega * omega <= a * a {
        return Err(Error::ExceptionalPoint(format!(
            "omega^2 = {} <= |chi|^2 = {}",
            omega * omega,
            a * a
        )));
    }
    let theta = if a == 0.0 { 0.0 } else { chi.arg() };
    let r = 0.5 * (a / omega).atanh();
    Ok(SqueezedGroundState {
        kind: GroundKind::SingleMode,
        theta,
        xi: Complex64::from_polar(r, theta),
        xi0: 0.0,
        xi_theta: 0.0,
        omega_gap: (omega * omega - a * a).sqrt(),
        ep_distance: (omega * omega - a * a).sqrt(),
    })
}

/// `(ω + 2J cos θ, ω − J cos θ, 4g²/Δ)`: the `q = 0` and pair scales and
/// the dispersive pairing strength.
fn ring_scales(p: &ThreeRingParams) -> Result<(f64, f64, f64)> {
    if !(p.delta > 0.0) || !p.delta.is_finite() {
        return Err(Error::param("delta", "qubit splitting must be positive"));
    }
    let c = p.j_hop * p.theta.cos();
    Ok((p.omega + 2.0 * c, p.omega - c, 4.0 * p.g * p.g / p.delta))
}

/// Distance to the nearest soft mode, `min(ω + 2J cos θ, ω − J cos θ) − 4g²/Δ`.
pub fn ring_epsilon(p: &ThreeRingParams) -> Result<f64> {
    let (a, b, k) = ring_scales(p)?;
    Ok(a.min(b) - k)
}

pub fn ring3_ground(p: ThreeRingParams) -> Result<SqueezedGroundState> {
    let (a, b, k) = ring_scales(&p)?;
    if a - k <= 0.0 || b - k <= 0.0 {
        return Err(Error::ExceptionalPoint(format!(
            "omega + 2J cos(theta) - 4g^2/Delta = {}, omega - J cos(theta) - 4g^2/Delta = {}",
            a - k,
            b - k
        )));
    }
    let xi0 = (a / (a - k)).ln() / 8.0;
    let xi_theta = (b / (b - k)).ln() / 4.0;
    let w = p.mode_frequencies();
    let split = 0.5 * (w[1] - w[2]).abs();
    let (root0, root_pair) = ((a * (a - k)).sqrt(), (b * (b - k)).sqrt());
    Ok(SqueezedGroundState {
        kind: GroundKind::Ring3,
        theta: std::f64::consts::PI,
        xi: Complex64::new(0.0, 0.0),
        xi0,
        xi_theta,
        omega_gap: root0.min(root_pair - split),
        ep_distance: root0.min(root_pair),
    })
}

/// One tensor factor of a truncated ground state.
#[derive(Debug, Clone, PartialEq)]
pub enum FockFactor {
    /// Amplitudes on `|n⟩`, `n = 0..=n_max`.
    Single(Vec<Complex64>),
    /// Amplitudes on `|n, n⟩` of a mode pair, `n = 0..=n_max`.
    Pair(Vec<Complex64>),
}

impl FockFactor {
    pub fn amplitudes(&self) -> &[Complex64] {
        match self {
            FockFactor::Single(v) | FockFactor::Pair(v) => v,
        }
    }

    fn amplitudes_mut(&mut self) -> &mut Vec<Complex64> {
        match self {
            FockFactor::Single(v) | FockFactor::Pair(v) => v,
        }
    }
}

/// A truncated ground state stored as a product of factors. Each factor is
/// normalized; `tail` is the total probability lost to truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub n_max: usize,
    pub factors: Vec<FockFactor>,
    pub tail: f64,
}

impl FockVector {
    /// Amplitude on a product number state, one entry per mode: one mode
    /// for the single-mode state, `[n0, n+, n−]` for the ring.
    pub fn amplitude(&self, occupation: &[usize]) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let mut amp = Complex64::new(1.0, 0.0);
        let mut k = 0;
        for f in &self.factors {
            match f {
                FockFactor::Single(v) => {
                    let n = occupation[k];
                    amp *= v.get(n).copied().unwrap_or(zero);
                    k += 1;
                }
                FockFactor::Pair(v) => {
                    let (n, m) = (occupation[k], occupation[k + 1]);
                    amp *= if n == m {
                        v.get(n).copied().unwrap_or(zero)
                    } else {
                        zero
                    };
                    k += 2;
                }
            }
        }
        amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.amplitudes().iter().map(|z| z.norm_sqr()).sum::<f64>())
            .product()
    }
}

/// Squeezed vacuum with pair amplitude ratio `t`: `c_{2n+2} = t √((2n+1)/(2n+2)) c_{2n}`.
fn squeezed_vacuum(r: f64, t: Complex64, n_max: usize) -> (Vec<Complex64>, f64) {
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[0] = Complex64::from(1.0 / r.cosh().sqrt());
    let mut n = 0;
    while n + 2 <= n_max {
        let ratio = ((n + 1) as f64 / (n + 2) as f64).sqrt();
        c[n + 2] = c[n] * t * ratio;
        n += 2;
    }
    let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    (c, (1.0 - kept).max(0.0))
}

/// Two-mode squeezed vacuum `Σ tⁿ/cosh r |n, n⟩`.
fn two_mode_squeezed(r: f64, t: f64, n_max: usize) -> (Vec<Complex64>, f64) {
    let c0 = 1.0 / r.cosh();
    let c: Vec<Complex64> = (0..=n_max).map(|n| Complex64::from(c0 * t.powi(n as i32))).collect();
    let tail = t.abs().powi(2 * (n_max as i32 + 1));
    (c, tail)
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
}

fn raw_factors(s: &SqueezedGroundState, n_max: usize) -> (Vec<FockFactor>, f64) {
    match s.kind {
        GroundKind::SingleMode => {
            let r = s.xi.norm();
            let t = -Complex64::from_polar(r.tanh(), -s.theta);
            let (c, tail) = squeezed_vacuum(r, t, n_max);
            (vec![FockFactor::Single(c)], tail)
        }
        GroundKind::Ring3 => {
            let r0 = 2.0 * s.xi0;
            let t0 = -Complex64::from_polar(r0.tanh(), -s.theta);
            let (c0, tail0) = squeezed_vacuum(r0, t0, n_max);
            let (c1, tail1) = two_mode_squeezed(s.xi_theta, s.xi_theta.tanh(), n_max);
            let tail = 1.0 - (1.0 - tail0) * (1.0 - tail1);
            (vec![FockFactor::Single(c0), FockFactor::Pair(c1)], tail)
        }
    }
}

/// Truncates the ground state to `n_max` quanta per mode and renormalizes.
pub fn fock_vector(s: &SqueezedGroundState, n_max: usize) -> Result<FockVector> {
    if n_max < 2 {
        return Err(Error::param("n_max", "need n_max >= 2"));
    }
    let (mut factors, tail) = raw_factors(s, n_max);
    if tail > TAIL_TOL {
        return Err(Error::Truncation { n_max, tail });
    }
    for f in factors.iter_mut() {
        normalize(f.amplitudes_mut());
    }
    Ok(FockVector { n_max, factors, tail })
}

/// Smallest even truncation whose tail mass is at most `tol`.
pub fn auto_truncation(s: &SqueezedGroundState, tol: f64) -> usize {
    let mut n = 8;
    while raw_factors(s, n).1 > tol && n < 1 << 20 {
        n *= 2;
    }
    let (mut lo, mut hi) = (n / 2, n);
    while hi - lo > 2 {
        let mid = ((lo + hi) / 2) & !1;
        if raw_factors(s, mid).1 > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(2)
}

/// A parameterized family of ground states.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundFamily {
    /// `ω a†a + (χ a² + h.c.)/2`; parameters `omega`, `chi_abs`, `theta`.
    SingleMode { omega: f64, chi: Complex64 },
    /// Parameters `omega`, `delta`, `g`, `j_hop`, `theta`.
    Ring3(ThreeRingParams),
}

impl GroundFamily {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::SingleMode { omega, chi } => Ok(GroundFamily::SingleMode {
                omega: *omega,
                chi: *chi,
            }),
            ModelSpec::ThreeRing {
                omega,
                delta,
                g,
                j_hop,
                theta,
            } => Ok(GroundFamily::Ring3(ThreeRingParams {
                omega: *omega,
                delta: *delta,
                g: *g,
                j_hop: *j_hop,
                theta: *theta,
            })),
            other => Err(Error::param(
                "model",
                format!(
                    "ground states exist for single_mode and three_ring, not {}",
                    other.type_name()
                ),
            )),
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            GroundFamily::SingleMode { .. } => &["omega", "chi_abs", "theta"],
            GroundFamily::Ring3(_) => &["omega", "delta", "g", "j_hop", "theta"],
        }
    }

    pub fn param(&self, phi: &str) -> Result<f64> {
        match (self, phi) {
            (GroundFamily::SingleMode { omega, .. }, "omega") => Ok(*omega),
            (GroundFamily::SingleMode { chi, .. }, "chi_abs") => Ok(chi.norm()),
            (GroundFamily::SingleMode { chi, .. }, "theta") => Ok(chi.arg()),
            (GroundFamily::Ring3(p), "omega") => Ok(p.omega),
            (GroundFamily::Ring3(p), "delta") => Ok(p.delta),
            (GroundFamily::Ring3(p), "g") => Ok(p.g),
            (GroundFamily::Ring3(p), "j_hop") => Ok(p.j_hop),
            (GroundFamily::Ring3(p), "theta") => Ok(p.theta),
            _ => Err(Error::UnknownTarget(format!(
                "{phi} (expected one of {})",
                self.param_names().join(", ")
            ))),
        }
    }

    pub fn with_param(&self, phi: &str, v: f64) -> Result<Self> {
        self.param(phi)?;
        let mut out = self.clone();
        match &mut out {
            GroundFamily::SingleMode { omega, chi } => match phi {
                "omega" => *omega = v,
                "chi_abs" => *chi = Complex64::from_polar(v, chi.arg()),
                _ => *chi = Complex64::from_polar(chi.norm(), v),
            },
            GroundFamily::Ring3(p) => match phi {
                "omega" => p.omega = v,
                "delta" => p.delta = v,
                "g" => p.g = v,
                "j_hop" => p.j_hop = v,
                _ => p.theta = v,
            },
        }
        Ok(out)
    }

    pub fn ground(&self) -> Result<SqueezedGroundState> {
        match self {
            GroundFamily::SingleMode { omega, chi } => single_mode_ground(*omega, *chi),
            GroundFamily::Ring3(p) => ring3_ground(*p),
        }
    }

    /// Distance to criticality used for scaling: `Ω1` for a single mode,
    /// `ε` for the ring.
    pub fn scaling_gap(&self) -> Result<f64> {
        match self {
            GroundFamily::SingleMode { omega, chi } => Ok((omega * omega - chi.norm_sqr()).max(0.0).sqrt()),
            GroundFamily::Ring3(p) => ring_epsilon(p),
        }
    }

    /// Moves the family to the given scaling gap by tuning `|χ|` (single
    /// mode) or `g` (ring).
    pub fn at_gap(&self, gap: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::param("gap", "must be positive"));
        }
        match self {
            GroundFamily::SingleMode { omega, chi } => {
                if gap >= *omega {
                    return Err(Error::param("gap", format!("must be below omega = {omega}")));
                }
                Ok(GroundFamily::SingleMode {
                    omega: *omega,
                    chi: Complex64::from_polar((omega * omega - gap * gap).sqrt(), chi.arg()),
                })
            }
            GroundFamily::Ring3(p) => {
                let (a, b, _) = ring_scales(p)?;
                let room = a.min(b) - gap;
                if room < 0.0 {
                    return Err(Error::param("gap", format!("must be below {}", a.min(b))));
                }
                Ok(GroundFamily::Ring3(ThreeRingParams {
                    g: (room * p.delta / 4.0).sqrt(),
                    ..*p
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiOptions {
    /// Finite-difference step relative to `|at|` (absolute when `at = 0`).
    pub step: f64,
    /// Fock truncation per mode; `None` picks one with tail mass below 1e-12.
    pub n_max: Option<usize>,
    /// Combine steps `h` and `h/2` to cancel the leading error term.
    pub richardson: bool,
    /// Multiplies every evaluated state by a random global phase drawn from
    /// this seed before gauge fixing; a diagnostic for gauge independence.
    pub phase_scramble: Option<u64>,
}

impl Default for QfiOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            n_max: None,
            richardson: false,
            phase_scramble: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiResult {
    pub phi: String,
    pub at: f64,
    pub f: f64,
    /// Absolute finite-difference step.
    pub step: f64,
    pub n_max: usize,
    /// `|F(2 n_max) − F(n_max)|`.
    pub convergence: f64,
    /// Smallest normal-mode frequency at `at`.
    pub gap: f64,
}

/// Gauge-fixed, normalized factors of the state at one parameter value.
fn factors_at(
    family: &GroundFamily,
    phi: &str,
    v: f64,
    n_max: usize,
    rng: &mut Option<ChaCha8Rng>,
) -> Result<Vec<Vec<Complex64>>> {
    let s = family.with_param(phi, v)?.ground()?;
    let fv = fock_vector(&s, n_max)?;
    Ok(fv
        .factors
        .into_iter()
        .map(|f| {
            let mut v = match f {
                FockFactor::Single(v) | FockFactor::Pair(v) => v,
            };
            if let Some(rng) = rng.as_mut() {
                let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                v.iter_mut().for_each(|z| *z *= phase);
            }
            let g = v[0].conj() / v[0].norm();
            v.iter_mut().for_each(|z| *z *= g);
            v
        })
        .collect())
}

fn central_difference(
    family: &GroundFamily,
    phi: &str,
    at: f64,
    h: f64,
    n_max: usize,
    rng: &mut Option<ChaCha8Rng>,
) -> Result<Vec<Vec<Complex64>>> {
    let plus = factors_at(family, phi, at + h, n_max, rng)?;
    let minus = factors_at(family, phi, at - h, n_max, rng)?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| p.iter().zip(m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        .collect())
}

fn fisher_at(family: &GroundFamily, phi: &str, at: f64, h: f64, n_max: usize, opts: &QfiOptions) -> Result<f64> {
    let mut rng = opts.phase_scramble.map(ChaCha8Rng::seed_from_u64);
    let psi = factors_at(family, phi, at, n_max, &mut rng)?;
    let mut d = central_difference(family, phi, at, h, n_max, &mut rng)?;
    if opts.richardson {
        let half = central_difference(family, phi, at, 0.5 * h, n_max, &mut rng)?;
        for (df, hf) in d.iter_mut().zip(&half) {
            for (a, b) in df.iter_mut().zip(hf) {
                *a = (4.0 * b - *a) / 3.0;
            }
        }
    }
    // Product state: contributions of normalized factors add.
    let mut f = 0.0;
    for (p, dp) in psi.iter().zip(&d) {
        let dd: f64 = dp.iter().map(|z| z.norm_sqr()).sum();
        let overlap: Complex64 = p.iter().zip(dp).map(|(a, b)| a.conj() * b).sum();
        f += 4.0 * (dd - overlap.norm_sqr());
    }
    Ok(f.max(0.0))
}

/// Fisher information of the family's ground state with respect to `phi`,
/// evaluated at `phi = at`.
pub fn qfi(family: &GroundFamily, phi: &str, at: f64, opts: &QfiOptions) -> Result<QfiResult> {
    if !(opts.step > 0.0) {
        return Err(Error::param("step", "must be positive"));
    }
    let base = family.with_param(phi, at)?;
    let s = base.ground()?;
    let h = if at == 0.0 { opts.step } else { opts.step * at.abs() };
    if s.ep_distance < 10.0 * h {
        return Err(Error::NearExceptionalPoint {
            gap: s.ep_distance,
            step: h,
        });
    }
    for v in [at - h, at + h] {
        if let Err(Error::ExceptionalPoint(_)) = base.with_param(phi, v)?.ground() {
            return Err(Error::NearExceptionalPoint {
                gap: s.ep_distance,
                step: h,
            });
        }
    }
    let n_max = match opts.n_max {
        Some(n) if n < 2 => return Err(Error::param("n_max", "need n_max >= 2")),
        Some(n) => n,
        None => {
            let lo = base.with_param(phi, at - h)?.ground()?;
            let hi = base.with_param(phi, at + h)?.ground()?;
            [&s, &lo, &hi]
                .iter()
                .map(|g| auto_truncation(g, 1e-12))
                .max()
                .unwrap_or(2)
        }
    };
    let f = fisher_at(family, phi, at, h, n_max, opts)?;
    let f2 = fisher_at(family, phi, at, h, 2 * n_max, opts)?;
    Ok(QfiResult {
        phi: phi.to_string(),
        at,
        f,
        step: h,
        n_max,
        convergence: (f2 - f).abs(),
        gap: s.omega_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(gap, F)` per requested gap.
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn is_linear(&self) -> bool {
        self.r_squared >= 0.99
    }
}

/// Least-squares slope of `ln F` against `ln gap`, moving the family to
/// each gap with [`GroundFamily::at_gap`].
pub fn scaling_exponent(family: &GroundFamily, phi: &str, gaps: &[f64], opts: &QfiOptions) -> Result<ScalingFit> {
    if gaps.len() < 3 {
        return Err(Error::param("gaps", "need at least 3 gap values"));
    }
    let mut points = Vec::with_capacity(gaps.len());
    for &gap in gaps {
        let fam = family.at_gap(gap)?;
        let at = fam.param(phi)?;
        let r = qfi(&fam, phi, at, opts)?;
        points.push((gap, r.f));
    }
    if let Some(&(gap, _)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::param(
            "phi",
            format!("Fisher information vanishes at gap {gap}; no power law"),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let fit = ScalingFit {
        slope,
        intercept,
        r_squared,
        points,
    };
    if !fit.is_linear() {
        log::warn!("log-log fit for {phi} is not linear (R^2 = {r_squared:.4})");
    }
    Ok(fit)
}
