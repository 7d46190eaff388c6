//! Balancing, Householder reduction to Hessenberg form and single-shift
//! complex QR iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const DEFLATE: f64 = 1e-14;

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms become comparable. Powers of two keep the transform exact.
pub(crate) fn balance(a: &mut DMatrix<Complex64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity transform).
pub(crate) fn hessenberg(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let norm: f64 = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for i in (k + 1)..n {
            v[i] /= vnorm;
        }
        // A <- (I - 2vv*) A
        for j in k..n {
            let mut dot = ZERO;
            for i in (k + 1)..n {
                dot += v[i].conj() * a[(i, j)];
            }
            dot *= 2.0;
            for i in (k + 1)..n {
                a[(i, j)] -= v[i] * dot;
            }
        }
        // A <- A (I - 2vv*)
        for i in 0..n {
            let mut dot = ZERO;
            for j in (k + 1)..n {
                dot += a[(i, j)] * v[j];
            }
            dot *= 2.0;
            for j in (k + 1)..n {
                a[(i, j)] -= dot * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Eigenvalues of `[[a, b], [c, d]]`, larger-magnitude root first.
pub(crate) fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let m = (a + d) * 0.5;
    let h = (a - d) * 0.5;
    let mut disc = (h * h + b * c).sqrt();
    if m.norm() == 0.0 {
        return (disc, -disc);
    }
    if (m.conj() * disc).re < 0.0 {
        disc = -disc;
    }
    let l1 = m + disc;
    let l2 = (a * d - b * c) / l1;
    (l1, l2)
}

/// Givens rotation `G = [[c, s], [-s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = na.hypot(nb);
    (na / rho, (a / na) * b.conj() / rho)
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR with deflation.
/// The matrix is overwritten. `max_iter` bounds the total number of QR
/// steps.
pub(crate) fn hessenberg_qr(h: &mut DMatrix<Complex64>, max_iter: usize) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut eig = vec![ZERO; n];
    let mut found = vec![false; n];
    let hnorm: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let floor = f64::EPSILON * hnorm;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n;
    while hi > 0 {
        let top = hi - 1;
        let mut l = top;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if sub <= DEFLATE * diag || sub <= floor {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == top {
            eig[top] = h[(top, top)];
            found[top] = true;
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == top {
            let (e1, e2) = eig2(h[(l, l)], h[(l, top)], h[(top, l)], h[(top, top)]);
            eig[l] = e1;
            eig[top] = e2;
            found[l] = true;
            found[top] = true;
            hi -= 2;
            its = 0;
            continue;
        }
        if total >= max_iter {
            return Err(Error::NonConvergence {
                iterations: total,
                dim: n,
                partial: (0..n).filter(|&i| found[i]).map(|i| eig[i]).collect(),
            });
        }
        let mu = if its > 0 && its.is_multiple_of(10) {
            // Exceptional shift to break cycles.
            h[(top, top)] + Complex64::new(1.5 * (h[(top, top - 1)].norm() + h[(top - 1, top - 2)].norm()), 0.0)
        } else {
            let d = h[(top, top)];
            let (e1, e2) = eig2(h[(top - 1, top - 1)], h[(top - 1, top)], h[(top, top - 1)], d);
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        qr_step(h, l, top, mu);
        its += 1;
        total += 1;
    }
    Ok(eig)
}

/// One explicit shifted QR step `H - μI = QR`, `H <- RQ + μI` on the
/// active window `lo..=hi`.
fn qr_step(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rot = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rot.push((c, s));
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rot[idx];
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + s.conj() * y;
            h[(i, k + 1)] = -s * x + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}
