//! Spectra of HB matrices
//!
//! Eigenvalues come from an in-house dense complex QR solver; eigenvectors
//! from inverse iteration on the original matrix. Because `M` is similar to
//! `-Mᵀ`, eigenvalues are grouped into `±E` pairs, and branch labels `Ω_n`
//! are assigned by continuously switching the couplings on.

mod assign;
mod qr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hbmatrix::HBMatrix;
use crate::linalg::{frobenius, Lu};
use crate::model::QuadraticHamiltonian;

pub(crate) use assign::min_cost_assignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative threshold on `|Im E|` for calling a spectrum superradiant.
    pub tol_im: f64,
    /// QR iteration cap, in iterations per matrix row.
    pub max_sweeps: usize,
    /// Diagonal balancing before the Hessenberg reduction.
    pub balance: bool,
    /// Seed for inverse-iteration start vectors.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_im: 1e-8,
            max_sweeps: 100,
            balance: true,
            seed: 0,
        }
    }
}

/// Relative size below which QR roundoff in a real or imaginary part is
/// replaced by an exact zero.
const SNAP: f64 = 1e-13;

/// All `2N` eigenvalues, sorted by decreasing real part, then decreasing
/// imaginary part.
pub fn eigenvalues(m: &HBMatrix, opts: &SolverOptions) -> Result<Vec<Complex64>> {
    let mut values = raw_eigenvalues(m.entries(), opts)?;
    let scale = m.frobenius_norm();
    for z in values.iter_mut() {
        *z = snap(*z, scale);
    }
    sort_desc(&mut values);
    Ok(values)
}

pub(crate) fn raw_eigenvalues(a: &DMatrix<Complex64>, opts: &SolverOptions) -> Result<Vec<Complex64>> {
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::param("matrix", "entries must be finite"));
    }
    let mut h = a.clone();
    if opts.balance {
        qr::balance(&mut h);
    }
    qr::hessenberg(&mut h);
    let cap = opts.max_sweeps.saturating_mul(h.nrows()).max(1);
    qr::hessenberg_qr(&mut h, cap)
}

fn snap(z: Complex64, scale: f64) -> Complex64 {
    let tol = SNAP * scale;
    Complex64::new(
        if z.re.abs() <= tol { 0.0 } else { z.re },
        if z.im.abs() <= tol { 0.0 } else { z.im },
    )
}

pub(crate) fn sort_desc(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Eigenvector of an HB matrix, split as `v = (μ, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovVector {
    pub value: Complex64,
    pub mu: Vec<Complex64>,
    pub nu: Vec<Complex64>,
    /// `Σ |μ_i|² - |ν_i|²` of the unit-norm vector; positive on particle
    /// branches, negative on their partners.
    pub norm_sq: f64,
    /// `‖Mv - Ev‖ / ‖M‖_F`.
    pub residual: f64,
    /// Eigenvalue condition number `1 / |yᴴv|` with unit left vector `y`.
    pub condition: f64,
    /// Set when the condition number indicates a (near-)defective
    /// eigenvalue, i.e. an exceptional point.
    pub defective: bool,
}

/// Condition number above which an eigenvalue is reported as defective.
const DEFECTIVE_CONDITION: f64 = 1e6;

/// Inverse iteration with shift `e` from a seeded random start.
pub fn eigenvector(m: &HBMatrix, e: Complex64, opts: &SolverOptions) -> Result<BogoliubovVector> {
    let a = m.entries();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let (v, residual) = inverse_iteration(a, e, scale, opts.seed)?;
    let (y, _) = inverse_iteration(&a.adjoint(), e.conj(), scale, opts.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let overlap = y.dotc(&v).norm();
    let condition = if overlap > 0.0 { 1.0 / overlap } else { f64::INFINITY };
    let defective = condition > DEFECTIVE_CONDITION;
    if defective {
        log::warn!("eigenvalue {e} is ill-conditioned (condition {condition:.3e}); likely at an exceptional point");
    }
    let n = m.n_modes();
    let mu: Vec<Complex64> = v.iter().take(n).copied().collect();
    let nu: Vec<Complex64> = v.iter().skip(n).copied().collect();
    let norm_sq = mu.iter().map(|z| z.norm_sqr()).sum::<f64>() - nu.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(BogoliubovVector {
        value: e,
        mu,
        nu,
        norm_sq,
        residual: residual / scale,
        condition,
        defective,
    })
}

fn inverse_iteration(a: &DMatrix<Complex64>, e: Complex64, scale: f64, seed: u64) -> Result<(DVector<Complex64>, f64)> {
    const MAX_ITER: usize = 50;
    let d = a.nrows();
    let shifted = a - DMatrix::from_diagonal_element(d, d, e);
    let lu = Lu::new(&shifted, f64::EPSILON * scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    v /= Complex64::from(v.norm());
    let mut best = (v.clone(), f64::INFINITY);
    for _ in 0..MAX_ITER {
        let w = lu.solve(&v);
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = w / Complex64::from(norm);
        let r = (a * &v - &v * e).norm();
        if r < best.1 {
            best = (v.clone(), r);
        }
        if r <= 1e-14 * scale {
            break;
        }
    }
    let (mut v, r) = best;
    if !(r <= 1e-8 * scale) {
        return Err(Error::InverseIteration {
            value: e,
            residual: r / scale,
        });
    }
    // Fix the phase: largest component real and positive.
    let mut k = 0;
    for i in 1..v.len() {
        if v[i].norm() > v[k].norm() * (1.0 + 1e-12) {
            k = i;
        }
    }
    let p = v[k];
    if p.norm() > 0.0 {
        v *= p.conj() / p.norm();
    }
    Ok((v, r))
}

/// One `±E` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// `e_plus²`.
    pub omega_sq: Complex64,
    /// Bogoliubov norm of the `e_plus` eigenvector.
    pub norm_plus: f64,
    /// `|e_plus + e_minus|`.
    pub defect: f64,
    /// Positions of the two members in [`PairedSpectrum::values`].
    pub index_plus: usize,
    pub index_minus: usize,
}

/// Assignment of branches `Ω_n` (one per mode) to pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchLabels {
    /// `pair_of_branch[n]` is the pair continuously connected to `+ω_n` at
    /// zero coupling.
    pub pair_of_branch: Vec<usize>,
    /// False for branches that took part in a collision (exceptional
    /// point) along the way; their order is then not meaningful.
    pub ordered: Vec<bool>,
    /// Coupling fraction `s` of the first collision, or 1 when none.
    pub valid_up_to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSpectrum {
    pub values: Vec<Complex64>,
    /// Per eigenvalue `‖Mv - Ev‖ / ‖M‖_F`.
    pub residuals: Vec<f64>,
    /// Per eigenvalue condition number.
    pub conditions: Vec<f64>,
    pub pairs: Vec<EigenPair>,
    pub labels: Option<BranchLabels>,
}

impl PairedSpectrum {
    /// Pair assigned to branch `n`, if labels were computed.
    pub fn branch(&self, n: usize) -> Option<&EigenPair> {
        let labels = self.labels.as_ref()?;
        labels.pair_of_branch.get(n).map(|&p| &self.pairs[p])
    }

    pub fn max_abs_im(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_pair_defect(&self) -> f64 {
        self.pairs.iter().map(|p| p.defect).fold(0.0, f64::max)
    }

    /// Smallest excitation energy `min |e_plus|` over real pairs, or `None`
    /// when some pair is complex.
    pub fn real_gap(&self) -> Option<f64> {
        if self.pairs.iter().any(|p| p.e_plus.im != 0.0) {
            return None;
        }
        self.pairs.iter().map(|p| p.e_plus.re.abs()).reduce(f64::min)
    }
}

/// Relative pairing tolerance beyond which the input is rejected as not
/// having the HB symmetry.
const PAIR_TOL: f64 = 1e-6;
/// Bogoliubov norms smaller than this (for unit vectors) carry no sign
/// information.
const NORM_FLOOR: f64 = 1e-6;

/// Groups eigenvalues into `±E` pairs without branch labels.
pub fn pair(values: &[Complex64], m: &HBMatrix, opts: &SolverOptions) -> Result<PairedSpectrum> {
    if !values.len().is_multiple_of(2) {
        return Err(Error::param("eigenvalues", "expected an even number of values"));
    }
    let mut vectors = Vec::with_capacity(values.len());
    for &e in values {
        vectors.push(eigenvector(m, e, opts)?);
    }
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| lex(values[i], values[j]));
    let mut used = vec![false; values.len()];
    let mut pairs = Vec::with_capacity(values.len() / 2);
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut best: Option<usize> = None;
        for &j in &order {
            if used[j] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => (values[i] + values[j]).norm() < (values[i] + values[b]).norm(),
            };
            if better {
                best = Some(j);
            }
        }
        let j = best.expect("even number of values");
        used[j] = true;
        let defect = (values[i] + values[j]).norm();
        if defect > PAIR_TOL * (1.0 + scale) {
            return Err(Error::BrokenPairing {
                value: values[i],
                defect,
            });
        }
        let (p, q) = orient(i, j, values, &vectors, scale);
        pairs.push(EigenPair {
            e_plus: values[p],
            e_minus: values[q],
            omega_sq: values[p] * values[p],
            norm_plus: vectors[p].norm_sq,
            defect,
            index_plus: p,
            index_minus: q,
        });
    }
    pairs.sort_by(|a, b| lex(a.e_plus, b.e_plus));
    Ok(PairedSpectrum {
        values: values.to_vec(),
        residuals: vectors.iter().map(|v| v.residual).collect(),
        conditions: vectors.iter().map(|v| v.condition).collect(),
        pairs,
        labels: None,
    })
}

fn lex(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Chooses which member is `e_plus`: the positive-norm eigenvector when the
/// norms are informative, otherwise positive real part, then positive
/// imaginary part.
fn orient(i: usize, j: usize, values: &[Complex64], vectors: &[BogoliubovVector], scale: f64) -> (usize, usize) {
    let (ni, nj) = (vectors[i].norm_sq, vectors[j].norm_sq);
    if ni.abs() > NORM_FLOOR && nj.abs() > NORM_FLOOR && ni.signum() != nj.signum() {
        return if ni > 0.0 { (i, j) } else { (j, i) };
    }
    let key = |z: Complex64| if z.re.abs() > 1e-12 * scale { z.re } else { z.im };
    if key(values[i]) >= key(values[j]) {
        (i, j)
    } else {
        (j, i)
    }
}

/// Pairs the spectrum of `h` and labels branches by homotopy: all couplings
/// are scaled by `s` from 0 to 1, and eigenvalues are matched between
/// consecutive steps by minimum total displacement.
pub fn pair_and_label(values: &[Complex64], h: &QuadraticHamiltonian, opts: &SolverOptions) -> Result<PairedSpectrum> {
    let m = HBMatrix::build(h)?;
    let mut spectrum = pair(values, &m, opts)?;
    let (track, valid_up_to, collided) = homotopy(h, opts)?;
    let n = h.n_modes();

    // Map the tracked endpoint onto the given values.
    let cost: Vec<Vec<f64>> = track
        .iter()
        .map(|t| values.iter().map(|v| (t - v).norm()).collect())
        .collect();
    let col = min_cost_assignment(&cost);
    let mut pair_of_value = vec![0usize; values.len()];
    for (k, p) in spectrum.pairs.iter().enumerate() {
        pair_of_value[p.index_plus] = k;
        pair_of_value[p.index_minus] = k;
    }
    let pair_of_branch = (0..n).map(|b| pair_of_value[col[b]]).collect();
    let ordered = (0..n).map(|b| !(collided[b] || collided[n + b])).collect();
    spectrum.labels = Some(BranchLabels {
        pair_of_branch,
        ordered,
        valid_up_to,
    });
    Ok(spectrum)
}

/// Builds the matrix, solves, pairs and labels.
pub fn spectrum(h: &QuadraticHamiltonian, opts: &SolverOptions) -> Result<PairedSpectrum> {
    let m = HBMatrix::build(h)?;
    let values = eigenvalues(&m, opts)?;
    pair_and_label(&values, h, opts)
}

/// Tracks all `2N` eigenvalues from `s = 0` (where slot `n` holds `+ω_n`
/// and slot `N + n` holds `-ω_n`) to `s = 1`.
fn homotopy(h: &QuadraticHamiltonian, opts: &SolverOptions) -> Result<(Vec<Complex64>, f64, Vec<bool>)> {
    const DS_START: f64 = 1.0 / 32.0;
    const DS_MAX: f64 = 1.0 / 8.0;
    const DS_MIN: f64 = 1e-6;
    let n = h.n_modes();
    let mut track: Vec<Complex64> = h
        .omega
        .iter()
        .map(|&w| Complex64::from(w))
        .chain(h.omega.iter().map(|&w| Complex64::from(-w)))
        .collect();
    let mut collided = vec![false; 2 * n];
    let mut first_collision: Option<f64> = None;
    let mut s = 0.0;
    let mut ds = DS_START;
    while s < 1.0 {
        let s_new = (s + ds).min(1.0);
        let m = HBMatrix::build(&h.scaled_couplings(s_new))?;
        let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
        let next = eigenvalues(&m, opts)?;
        let cost: Vec<Vec<f64>> = track
            .iter()
            .map(|t| next.iter().map(|v| (t - v).norm()).collect())
            .collect();
        let col = min_cost_assignment(&cost);
        let moved: Vec<Complex64> = col.iter().map(|&j| next[j]).collect();
        let motion = track
            .iter()
            .zip(&moved)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        let mut approaching = false;
        for i in 0..moved.len() {
            for j in (i + 1)..moved.len() {
                let d_new = (moved[i] - moved[j]).norm();
                let d_old = (track[i] - track[j]).norm();
                if d_new < 10.0 * motion && d_new < d_old && d_new > 1e-9 * scale {
                    approaching = true;
                }
            }
        }
        if approaching && ds > DS_MIN {
            ds = (ds / 2.0).max(DS_MIN);
            continue;
        }

        track = moved;
        s = s_new;
        let bound = opts.tol_im * (1.0 + track.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let mut any = false;
        for (k, z) in track.iter().enumerate() {
            if z.im.abs() > bound {
                any = true;
                if first_collision.is_none() {
                    collided[k] = true;
                }
            }
        }
        if any && first_collision.is_none() {
            first_collision = Some(s);
        }
        if !approaching {
            ds = (ds * 2.0).min(DS_MAX);
        }
    }
    Ok((track, first_collision.unwrap_or(1.0), collided))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_mode, two_mode};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn build(h: &QuadraticHamiltonian) -> HBMatrix {
        HBMatrix::build(h).unwrap()
    }

    #[test]
    fn single_mode_values() {
        let m = build(&single_mode(1.0, c(0.6)));
        assert_eq!(eigenvalues(&m, &opts()).unwrap(), vec![c(0.8), c(-0.8)]);
        let m = build(&single_mode(1.0, Complex64::new(0.0, 0.6)));
        let e = eigenvalues(&m, &opts()).unwrap();
        assert!((e[0] - c(0.8)).norm() < 1e-15 && (e[1] + c(0.8)).norm() < 1e-15);
        let m = build(&single_mode(1.0, c(0.0)));
        assert_eq!(eigenvalues(&m, &opts()).unwrap(), vec![c(1.0), c(-1.0)]);
    }

    #[test]
    fn imaginary_quartet() {
        let m = build(&two_mode(1.0, 1.0, c(3.0), c(0.0), c(3.0), c(0.0)));
        let e = eigenvalues(&m, &opts()).unwrap();
        let mut im: Vec<f64> = e.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        let want = [-(14f64.sqrt()), -(2f64.sqrt()), 2f64.sqrt(), 14f64.sqrt()];
        for (a, b) in im.iter().zip(want) {
            assert!((a - b).abs() < 1e-12 * 14f64.sqrt(), "{a} vs {b}");
        }
        assert!(e.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn diagonal_matrix() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(4.0), c(-1.0), c(-4.0)]));
        let m = HBMatrix::from_entries(d).unwrap();
        assert_eq!(
            eigenvalues(&m, &opts()).unwrap(),
            vec![c(4.0), c(1.0), c(-1.0), c(-4.0)]
        );
    }

    #[test]
    fn bogoliubov_vectors() {
        let m = build(&single_mode(1.0, c(0.6)));
        let v = eigenvector(&m, c(0.8), &opts()).unwrap();
        let ratio = v.nu[0] / v.mu[0];
        assert!((ratio - c(1.0 / 3.0)).norm() < 1e-12);
        assert!(v.norm_sq > 0.0);
        assert!(v.residual < 1e-14);
        let w = eigenvector(&m, c(-0.8), &opts()).unwrap();
        assert!(w.norm_sq < 0.0);

        let m = build(&QuadraticHamiltonian::free(&[1.0, 4.0]));
        let v = eigenvector(&m, c(4.0), &opts()).unwrap();
        let want = [c(0.0), c(1.0), c(0.0), c(0.0)];
        for (got, w) in v.mu.iter().chain(&v.nu).zip(want) {
            assert!((got - w).norm() < 1e-14);
        }
    }

    #[test]
    fn defective_eigenvalue_is_flagged() {
        // Single mode exactly at the exceptional point: M = [[1, -1], [1, -1]].
        let m = build(&single_mode(1.0, c(1.0)));
        let v = eigenvector(&m, c(0.0), &opts()).unwrap();
        assert!(v.defective);
    }

    #[test]
    fn rotating_only_labels() {
        let h = two_mode(1.0, 4.0, c(0.0), c(0.0), c(2.0), c(0.0));
        let s = spectrum(&h, &opts()).unwrap();
        let b0 = s.branch(0).unwrap();
        let b1 = s.branch(1).unwrap();
        assert!(b0.e_plus.norm() < 1e-12);
        assert!((b1.e_plus - c(5.0)).norm() < 1e-12);
        let labels = s.labels.as_ref().unwrap();
        assert_eq!(labels.valid_up_to, 1.0);
        assert!(labels.ordered.iter().all(|&o| o));
    }

    #[test]
    fn free_labels_follow_frequencies() {
        let h = QuadraticHamiltonian::free(&[2.0, 0.5, 1.0]);
        let s = spectrum(&h, &opts()).unwrap();
        for (n, w) in [2.0, 0.5, 1.0].iter().enumerate() {
            assert_eq!(s.branch(n).unwrap().e_plus, c(*w));
        }
    }

    #[test]
    fn labels_past_a_collision_are_unordered() {
        let h = two_mode(1.0, 1.0, c(3.0), c(0.0), c(3.0), c(0.0));
        let s = spectrum(&h, &opts()).unwrap();
        let mut sq: Vec<f64> = s.pairs.iter().map(|p| p.omega_sq.re).collect();
        sq.sort_by(f64::total_cmp);
        assert!((sq[0] + 14.0).abs() < 1e-10 && (sq[1] + 2.0).abs() < 1e-10);
        let labels = s.labels.as_ref().unwrap();
        assert!(labels.valid_up_to < 1.0);
        assert!(labels.ordered.iter().any(|&o| !o));
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-2.0)]));
        let m = HBMatrix::from_entries(d).unwrap();
        let values = eigenvalues(&m, &opts()).unwrap();
        assert!(matches!(pair(&values, &m, &opts()), Err(Error::BrokenPairing { .. })));
    }

    #[test]
    fn unbalanced_matches_balanced() {
        let h = two_mode(1.0, 2.0, c(0.25), c(0.0), c(0.5), c(0.1));
        let m = build(&h);
        let a = eigenvalues(&m, &opts()).unwrap();
        let b = eigenvalues(
            &m,
            &SolverOptions {
                balance: false,
                ..opts()
            },
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn trace_identities_and_pairing(seed in any::<u64>(), n in 1usize..=5) {
            let h = QuadraticHamiltonian::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let m = build(&h);
            let e = eigenvalues(&m, &opts()).unwrap();
            let scale = m.frobenius_norm();
            let sum: Complex64 = e.iter().sum();
            prop_assert!(sum.norm() <= 1e-9 * scale);
            let sq: Complex64 = e.iter().map(|z| z * z).sum();
            let tr2 = (m.entries() * m.entries()).trace();
            prop_assert!((sq - tr2).norm() <= 1e-9 * tr2.norm().max(1.0));
            let p = pair(&e, &m, &opts()).unwrap();
            for pr in &p.pairs {
                prop_assert!(pr.defect <= 1e-8 * (1.0 + pr.e_plus.norm()));
            }
            for r in &p.residuals {
                prop_assert!(*r <= 1e-8);
            }
        }
    }
}
