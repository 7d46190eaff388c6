//! Small dense helpers shared by the determinant and inverse iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// LU factorization with partial pivoting, `P A = L U`, stored in place.
pub(crate) struct Lu {
    lu: DMatrix<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// Factors `a`. Exactly zero pivots are replaced by `floor` so that
    /// singular shifts in inverse iteration still produce a usable solve.
    pub(crate) fn new(a: &DMatrix<Complex64>, floor: f64) -> Self {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
                swaps += 1;
            }
            if lu[(k, k)].norm() == 0.0 {
                lu[(k, k)] = Complex64::new(floor, 0.0);
            }
            let pivot = lu[(k, k)];
            if pivot.norm() == 0.0 {
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.norm() == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self { lu, perm, swaps }
    }

    pub(crate) fn det(&self) -> Complex64 {
        let mut d = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.lu.nrows() {
            d *= self.lu[(k, k)];
        }
        d
    }

    pub(crate) fn solve(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.lu.nrows();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

pub(crate) fn frobenius(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_determinant() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 1.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(4.0, -1.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 2.0),
            ],
        );
        let lu = Lu::new(&a, 0.0);
        let b = DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ]);
        let x = lu.solve(&b);
        assert!((&a * &x - &b).norm() < 1e-13);
        let want = a.clone().determinant();
        assert!((lu.det() - want).norm() < 1e-12);
    }
}
