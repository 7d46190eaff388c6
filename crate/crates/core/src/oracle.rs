//! Independent checks of the production solver
//!
//! * [`small_eigenvalues`]: characteristic polynomial by Faddeev–LeVerrier
//!   and closed-form roots, for one and two modes.
//! * [`fock_diagonalize`]: the Hamiltonian itself in a truncated number
//!   basis, split into connected blocks and diagonalized by cyclic Jacobi.
//! * [`gap_check`]: compares the two views of the excitation gap.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen::{pair, SolverOptions};
use crate::error::{Error, Result};
use crate::hbmatrix::HBMatrix;
use crate::model::QuadraticHamiltonian;
use crate::phase::{classify, PhaseLabel};

pub const FOCK_DIMENSION_CAP: usize = 20_000;
const JACOBI_MAX_SWEEPS: usize = 60;
/// Larger blocks go through tridiagonalization and Sturm bisection, whose
/// cost does not multiply by the number of sweeps.
const JACOBI_MAX_DIM: usize = 256;

/// Characteristic polynomial coefficients `c[0..=n]` (with `c[n] = 1`) of
/// `det(xI − A) = Σ c_k x^k`.
fn faddeev_leverrier(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut mk = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        mk = a * &mk;
        for i in 0..n {
            mk[(i, i)] += c[n - k + 1];
        }
        let amk = a * &mk;
        c[n - k] = -amk.trace() / k as f64;
    }
    c
}

/// Roots of `x² + b x + c` without cancellation.
fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return [q, q];
    }
    [q, c / q]
}

/// Roots of `x³ + a x² + b x + c` by Cardano's formula.
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    if u3.norm() == 0.0 {
        return [shift; 3];
    }
    let u = u3.cbrt();
    let mut out = [shift; 3];
    let mut uk = u;
    for r in out.iter_mut() {
        *r += uk - p / (3.0 * uk);
        uk *= omega;
    }
    out
}

/// Roots of the monic quartic `x⁴ + b x³ + c x² + d x + e` by Ferrari's
/// method.
fn quartic_roots(b: Complex64, c: Complex64, d: Complex64, e: Complex64) -> [Complex64; 4] {
    // Depressed form y⁴ + p y² + q y + r with x = y − b/4.
    let s = -b / 4.0;
    let p = c - 3.0 * b * b / 8.0;
    let q = d - b * c / 2.0 + b * b * b / 8.0;
    let r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b * b * b * b / 256.0;
    if q.norm() <= 1e-14 * (1.0 + p.norm() + r.norm().sqrt()) {
        let [y1, y2] = quadratic_roots(p, r);
        let (z1, z2) = (y1.sqrt(), y2.sqrt());
        return [s + z1, s - z1, s + z2, s - z2];
    }
    // Resolvent: m with (y² + p/2 + m)² = 2m y² − q y + (m² + m p + p²/4 − r).
    let roots = cubic_roots(p, p * p / 4.0 - r, -q * q / 8.0);
    let m = roots
        .into_iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(roots[0]);
    let w = (2.0 * m).sqrt();
    let [y1, y2] = quadratic_roots(w, p / 2.0 + m - q / (2.0 * w));
    let [y3, y4] = quadratic_roots(-w, p / 2.0 + m + q / (2.0 * w));
    [s + y1, s + y2, s + y3, s + y4]
}

fn sort_values(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Eigenvalues of a 2×2 or 4×4 HB matrix from its characteristic
/// polynomial, sorted by real part then imaginary part, descending.
pub fn small_eigenvalues(m: &HBMatrix) -> Result<Vec<Complex64>> {
    let n = m.n_modes();
    if n > 2 {
        return Err(Error::UnsupportedSize { got: n, max: 2 });
    }
    let c = faddeev_leverrier(m.entries());
    let mut roots = if n == 1 {
        quadratic_roots(c[1], c[0]).to_vec()
    } else {
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if c[3].norm() <= 1e-14 * scale && c[1].norm() <= 1e-14 * scale {
            // E ↦ E² reduces the ±E-symmetric quartic to a quadratic.
            let [y1, y2] = quadratic_roots(c[2], c[0]);
            let (z1, z2) = (y1.sqrt(), y2.sqrt());
            vec![z1, -z1, z2, -z2]
        } else {
            quartic_roots(c[3], c[2], c[1], c[0]).to_vec()
        }
    };
    sort_values(&mut roots);
    Ok(roots)
}

/// Scalars the Jacobi sweep can rotate.
trait JacobiScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + PartialEq
{
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn re(self) -> f64;
    fn from_re(x: f64) -> Self;
    /// `self · u` for a unit `u` of the same kind.
    fn mul_unit(self, u: Self) -> Self;
    /// `z / |z|` (`1` for zero).
    fn unit(self) -> Self;
}

impl JacobiScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn mul_unit(self, u: Self) -> Self {
        self * u
    }
    fn unit(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl JacobiScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn mul_unit(self, u: Self) -> Self {
        self * u
    }
    fn unit(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            self / n
        }
    }
}

/// Eigenvalues of a Hermitian matrix (row-major, `n × n`) by cyclic Jacobi
/// rotations. Returns them ascending.
fn jacobi_eigenvalues<T: JacobiScalar>(a: &mut [T], n: usize) -> Result<Vec<f64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let total: f64 = a.iter().map(|z| z.abs().powi(2)).sum::<f64>().sqrt();
    let off = |a: &[T]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[idx(i, j)].abs().powi(2);
            }
        }
        (2.0 * s).sqrt()
    };
    let target = 1e-15 * total.max(f64::MIN_POSITIVE);
    let mut row_p = vec![T::zero(); n];
    let mut row_q = vec![T::zero(); n];
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let o = off(a);
        if o <= target {
            return Ok(sorted_diagonal(a, n));
        }
        // Early sweeps skip small pivots; later sweeps rotate everything.
        let threshold = if sweep < 3 { 0.2 * o / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                let mag = apq.abs();
                if mag == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)].re();
                let aqq = a[idx(q, q)].re();
                if sweep > 3 && mag <= f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
                    a[idx(p, q)] = T::zero();
                    a[idx(q, p)] = T::zero();
                    continue;
                }
                if mag <= threshold {
                    continue;
                }
                // Rotate the phase of a_pq away, then a real rotation.
                let u = apq.unit();
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                row_p.copy_from_slice(&a[idx(p, 0)..idx(p, 0) + n]);
                for (k, z) in row_q.iter_mut().enumerate() {
                    // Row q of D^H A D with D = diag(1, ū) on (p, q).
                    *z = a[idx(q, k)].mul_unit(u);
                }
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let np = row_p[k] * c - row_q[k] * s;
                    let nq = row_p[k] * s + row_q[k] * c;
                    a[idx(p, k)] = np;
                    a[idx(q, k)] = nq;
                    a[idx(k, p)] = np.conj();
                    a[idx(k, q)] = nq.conj();
                }
                a[idx(p, p)] = T::from_re(app - t * mag);
                a[idx(q, q)] = T::from_re(aqq + t * mag);
                a[idx(p, q)] = T::zero();
                a[idx(q, p)] = T::zero();
            }
        }
    }
    let o = off(a);
    if o <= 1e-12 * total {
        log::warn!("Jacobi stopped at off-diagonal norm {o:.3e} after {JACOBI_MAX_SWEEPS} sweeps");
        return Ok(sorted_diagonal(a, n));
    }
    Err(Error::JacobiNonConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
        off_norm: o,
    })
}

/// Lowest `k` eigenvalues of a Hermitian matrix (row-major, `n × n`) by
/// Householder reduction to a real tridiagonal and Sturm-count bisection.
fn tridiagonal_lowest<T: JacobiScalar>(a: &mut [T], n: usize, k: usize) -> Vec<f64> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    for col in 0..n.saturating_sub(1) {
        let norm: f64 = ((col + 1)..n).map(|i| a[idx(i, col)].abs().powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 || col + 2 == n {
            offdiag[col] = a[idx(col + 1, col)].abs();
            continue;
        }
        let x0 = a[idx(col + 1, col)];
        let alpha = x0.unit() * (-norm);
        for i in (col + 1)..n {
            v[i] = a[idx(i, col)];
        }
        v[col + 1] = v[col + 1] - alpha;
        let vn: f64 = ((col + 1)..n).map(|i| v[i].abs().powi(2)).sum::<f64>().sqrt();
        if vn == 0.0 {
            offdiag[col] = norm;
            continue;
        }
        for z in v[(col + 1)..n].iter_mut() {
            *z = *z * (1.0 / vn);
        }
        // A ← A − 2 (v wᴴ + w vᴴ) with p = A v, w = p − (vᴴ p) v; only
        // the trailing block and the pivot column change.
        for i in col..n {
            let mut acc = T::zero();
            for j in (col + 1)..n {
                acc = acc + a[idx(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let mut kk = 0.0;
        for i in (col + 1)..n {
            kk += (v[i].conj() * p[i]).re();
        }
        for i in (col + 1)..n {
            p[i] = p[i] - v[i] * kk;
        }
        for i in (col + 1)..n {
            let (vi, wi) = (v[i], p[i]);
            for j in (col + 1)..n {
                a[idx(i, j)] = a[idx(i, j)] - (vi * p[j].conj() + wi * v[j].conj()) * 2.0;
            }
        }
        offdiag[col] = norm;
    }
    let d: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re()).collect();
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..n {
            let e2 = if i == 0 { 0.0 } else { offdiag[i - 1] * offdiag[i - 1] };
            q = d[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { offdiag[i - 1] } else { 0.0 } + if i + 1 < n { offdiag[i] } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    (0..k.min(n))
        .map(|m| {
            let (mut a, mut b) = (lo - 1e-12 * span, hi + 1e-12 * span);
            while b - a > 4.0 * f64::EPSILON * span {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if count_below(mid) > m {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvalues of one Hermitian block, all of them for small blocks and the
/// lowest `k` otherwise.
fn block_eigenvalues<T: JacobiScalar>(a: &mut [T], n: usize, k: usize) -> Result<Vec<f64>> {
    if n <= JACOBI_MAX_DIM {
        jacobi_eigenvalues(a, n)
    } else {
        Ok(tridiagonal_lowest(a, n, k))
    }
}

fn sorted_diagonal<T: JacobiScalar>(a: &[T], n: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re()).collect();
    d.sort_by(f64::total_cmp);
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpectrum {
    pub n_max: usize,
    /// Product basis dimension `(n_max + 1)^N`.
    pub dim: usize,
    /// Sizes of the connected blocks the matrix splits into.
    pub blocks: Vec<usize>,
    /// Lowest eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// `E1 − E0`.
    pub gap: f64,
}

/// Nonzero matrix elements of the truncated Hamiltonian, one triangle per
/// Hermitian pair plus the diagonal, keyed by `(row, col)`.
fn fock_elements(h: &QuadraticHamiltonian, n_max: usize) -> (usize, HashMap<(usize, usize), Complex64>) {
    let n = h.n_modes();
    let base = n_max + 1;
    let dim = base.pow(n as u32);
    let stride: Vec<usize> = (0..n).map(|i| base.pow(i as u32)).collect();
    let mut el: HashMap<(usize, usize), Complex64> = HashMap::new();
    let mut add = |row: usize, col: usize, v: Complex64| {
        if v != Complex64::new(0.0, 0.0) {
            *el.entry((row, col)).or_insert(Complex64::new(0.0, 0.0)) += v;
            if row != col {
                *el.entry((col, row)).or_insert(Complex64::new(0.0, 0.0)) += v.conj();
            }
        }
    };
    let mut occ = vec![0usize; n];
    for src in 0..dim {
        let mut rest = src;
        for o in occ.iter_mut() {
            *o = rest % base;
            rest /= base;
        }
        let diag: f64 = (0..n).map(|i| h.omega[i] * occ[i] as f64).sum();
        add(src, src, Complex64::from(diag));
        for i in 0..n {
            // χ a_i² (the conjugate a_i†² is the Hermitian partner).
            if occ[i] >= 2 {
                let amp = ((occ[i] * (occ[i] - 1)) as f64).sqrt();
                add(src - 2 * stride[i], src, h.chi[i] * amp);
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                // λ_ij a_j† a_i, both orders of (i, j) enumerated.
                if occ[i] >= 1 && occ[j] < n_max && i < j {
                    let amp = ((occ[i] * (occ[j] + 1)) as f64).sqrt();
                    add(src - stride[i] + stride[j], src, h.lam[(i, j)] * amp);
                }
                // g_ij a_i a_j for i < j.
                if i < j && occ[i] >= 1 && occ[j] >= 1 {
                    let amp = ((occ[i] * occ[j]) as f64).sqrt();
                    add(src - stride[i] - stride[j], src, h.g[(i, j)] * amp);
                }
            }
        }
    }
    (dim, el)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Lowest `k` eigenvalues of the Hamiltonian truncated to `n_max` quanta
/// per mode.
pub fn fock_diagonalize(h: &QuadraticHamiltonian, n_max: usize, k: usize) -> Result<FockSpectrum> {
    h.ensure_valid()?;
    if n_max < 1 {
        return Err(Error::param("n_max", "need n_max >= 1"));
    }
    let n = h.n_modes();
    let dim = (n_max + 1)
        .checked_pow(n as u32)
        .filter(|&d| d <= FOCK_DIMENSION_CAP)
        .ok_or(Error::DimensionCap {
            dim: (n_max + 1).saturating_pow(n as u32),
            cap: FOCK_DIMENSION_CAP,
        })?;
    if let Ok(values) = HBMatrix::build(h).and_then(|m| crate::eigen::eigenvalues(&m, &SolverOptions::default())) {
        if classify(&values, 1e-8) == PhaseLabel::SP {
            log::warn!("truncated spectrum of a superradiant model is a truncation artifact");
        }
    }
    let (_, el) = fock_elements(h, n_max);
    let mut parent: Vec<usize> = (0..dim).collect();
    for &(r, c) in el.keys() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for s in 0..dim {
        let root = find(&mut parent, s);
        members.entry(root).or_default().push(s);
    }
    let mut groups: Vec<Vec<usize>> = members.into_values().collect();
    groups.sort_by_key(|g| g[0]);
    let complex = el.values().any(|z| z.im != 0.0);
    let mut energies = Vec::with_capacity(dim);
    let mut blocks = Vec::with_capacity(groups.len());
    for g in &groups {
        let m = g.len();
        let pos: HashMap<usize, usize> = g.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        blocks.push(m);
        let ev = if complex {
            let mut a = vec![Complex64::new(0.0, 0.0); m * m];
            for (&(r, c), &v) in &el {
                if let (Some(&i), Some(&j)) = (pos.get(&r), pos.get(&c)) {
                    a[i * m + j] = v;
                }
            }
            block_eigenvalues(&mut a, m, k.max(2))?
        } else {
            let mut a = vec![0.0; m * m];
            for (&(r, c), &v) in &el {
                if let (Some(&i), Some(&j)) = (pos.get(&r), pos.get(&c)) {
                    a[i * m + j] = v.re;
                }
            }
            block_eigenvalues(&mut a, m, k.max(2))?
        };
        energies.extend(ev);
    }
    energies.sort_by(f64::total_cmp);
    energies.truncate(k.max(2));
    let gap = energies[1] - energies[0];
    energies.truncate(k.max(1));
    Ok(FockSpectrum {
        n_max,
        dim,
        blocks,
        energies,
        gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub n_max: usize,
    pub fock_gap: f64,
    /// Smallest positive-norm excitation energy `min Ω_n`.
    pub bogoliubov_gap: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub fock_e0: f64,
    /// `½ (Σ Ω_n − Σ ω_n)`.
    pub bogoliubov_e0: f64,
    pub e0_deviation: f64,
    /// Deviation above 1e-3 relative: the truncation does not resolve the
    /// state (typically close to a degenerate or exceptional point).
    pub truncation_limited: bool,
}

/// Compares the truncated-space gap and ground energy with the Bogoliubov
/// prediction.
pub fn gap_check(h: &QuadraticHamiltonian, n_max: usize) -> Result<GapReport> {
    let opts = SolverOptions::default();
    let m = HBMatrix::build(h)?;
    let values = crate::eigen::eigenvalues(&m, &opts)?;
    if classify(&values, opts.tol_im) == PhaseLabel::SP {
        return Err(Error::ExceptionalPoint(
            "the Bogoliubov spectrum is complex; no gap to compare".into(),
        ));
    }
    let spec = pair(&values, &m, &opts)?;
    let omegas: Vec<f64> = spec.pairs.iter().map(|p| p.e_plus.re).collect();
    let bog_gap = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    let bog_e0 = 0.5 * (omegas.iter().sum::<f64>() - h.omega.iter().sum::<f64>());
    let fock = fock_diagonalize(h, n_max, 2)?;
    let abs = (fock.gap - bog_gap).abs();
    let rel = abs / bog_gap.abs().max(f64::MIN_POSITIVE);
    let e0_dev = (fock.energies[0] - bog_e0).abs();
    Ok(GapReport {
        n_max,
        fock_gap: fock.gap,
        bogoliubov_gap: bog_gap,
        abs_deviation: abs,
        rel_deviation: rel,
        fock_e0: fock.energies[0],
        bogoliubov_e0: bog_e0,
        e0_deviation: e0_dev,
        truncation_limited: rel > 1e-3 || e0_dev > 1e-3,
    })
}
