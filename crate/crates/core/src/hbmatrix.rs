//! The Hopfield-Bogoliubov matrix
//!
//! ```text
//! M = [  A    B  ]     A[n][n] = ω_n,     A[i][j] = λ_ij
//!     [ -B*  -A* ]     B[n][n] = -2χ_n,   B[i][j] = -g_ij
//! ```
//!
//! For `A` Hermitian and `B` symmetric, `C Mᵀ C⁻¹ = -M` with
//! `C = [[0, I], [-I, 0]]`, which forces the spectrum into `±E` pairs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, Lu};
use crate::model::QuadraticHamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct HBMatrix {
    n_modes: usize,
    entries: DMatrix<Complex64>,
}

impl HBMatrix {
    pub fn build(h: &QuadraticHamiltonian) -> Result<Self> {
        h.ensure_valid()?;
        let n = h.n_modes();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let a = if i == j {
                    Complex64::from(h.omega[i])
                } else {
                    h.lam[(i, j)]
                };
                let b = if i == j { -2.0 * h.chi[i] } else { -h.g[(i, j)] };
                m[(i, j)] = a;
                m[(i, n + j)] = b;
                m[(n + i, j)] = -b.conj();
                m[(n + i, n + j)] = -a.conj();
            }
        }
        Ok(Self { n_modes: n, entries: m })
    }

    /// Wraps an arbitrary even-sized square matrix, e.g. a hand-edited one.
    pub fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || d != entries.ncols() || !d.is_multiple_of(2) {
            return Err(Error::param(
                "entries",
                format!("expected a non-empty 2N×2N matrix, got {}×{}", d, entries.ncols()),
            ));
        }
        Ok(Self {
            n_modes: d / 2,
            entries,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn a_block(&self) -> DMatrix<Complex64> {
        let n = self.n_modes;
        self.entries.view((0, 0), (n, n)).into_owned()
    }

    pub fn b_block(&self) -> DMatrix<Complex64> {
        let n = self.n_modes;
        self.entries.view((0, n), (n, n)).into_owned()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.entries)
    }

    /// Trace, summed as `M[i][i] + M[n+i][n+i]` so that built matrices give
    /// an exact zero.
    pub fn trace(&self) -> Complex64 {
        let n = self.n_modes;
        (0..n)
            .map(|i| self.entries[(i, i)] + self.entries[(n + i, n + i)])
            .sum()
    }

    /// `max |C Mᵀ C⁻¹ + M|` over all entries.
    ///
    /// `C X C⁻¹` maps the blocks `[[P, Q], [R, S]]` to `[[S, -R], [-Q, P]]`,
    /// so the residual is evaluated entrywise without forming `C`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n_modes;
        let m = &self.entries;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                // Blocks of Mᵀ: P = Aᵀ, Q = (M21)ᵀ, R = (M12)ᵀ, S = (M22)ᵀ.
                let p = m[(j, i)];
                let q = m[(n + j, i)];
                let r = m[(j, n + i)];
                let s = m[(n + j, n + i)];
                let d = [
                    s + m[(i, j)],
                    -r + m[(i, n + j)],
                    -q + m[(n + i, j)],
                    p + m[(n + i, n + j)],
                ];
                for z in d {
                    worst = worst.max(z.re.abs()).max(z.im.abs());
                }
            }
        }
        worst
    }

    /// Complex determinant by LU with partial pivoting.
    pub fn complex_determinant(&self) -> Complex64 {
        Lu::new(&self.entries, 0.0).det()
    }

    /// Real determinant; `det M = Π(-E²)` over the `±E` pairs is real for
    /// any valid matrix, so a sizeable imaginary part signals broken input.
    pub fn determinant(&self) -> Result<f64> {
        let d = self.complex_determinant();
        if d.im.abs() > 1e-6 * (1.0 + d.norm()) {
            return Err(Error::ComplexDeterminant { re: d.re, im: d.im });
        }
        Ok(d.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_mode, two_mode, QuadraticHamiltonian};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rows(m: &HBMatrix) -> Vec<Vec<f64>> {
        let e = m.entries();
        (0..e.nrows())
            .map(|i| (0..e.ncols()).map(|j| e[(i, j)].re).collect())
            .collect()
    }

    #[test]
    fn single_mode_matrix() {
        let m = HBMatrix::build(&single_mode(1.0, c(0.6))).unwrap();
        assert_eq!(rows(&m), vec![vec![1.0, -0.6], vec![0.6, -1.0]]);
    }

    #[test]
    fn two_mode_matrix() {
        let m = HBMatrix::build(&two_mode(1.0, 2.0, c(0.25), c(0.0), c(0.5), c(0.1))).unwrap();
        assert_eq!(
            rows(&m),
            vec![
                vec![1.0, 0.5, -0.5, -0.1],
                vec![0.5, 2.0, -0.1, 0.0],
                vec![0.5, 0.1, -1.0, -0.5],
                vec![0.1, 0.0, -0.5, -2.0],
            ]
        );
    }

    #[test]
    fn complex_two_mode_matches_block_layout() {
        let l = Complex64::new(0.3, 0.4);
        let g = Complex64::new(-0.1, 0.2);
        let x = Complex64::new(0.05, -0.15);
        let m = HBMatrix::build(&two_mode(1.0, 2.0, x, c(0.0), l, g)).unwrap();
        let e = m.entries();
        assert_eq!(e[(0, 1)], l);
        assert_eq!(e[(1, 0)], l.conj());
        assert_eq!(e[(0, 2)], -2.0 * x);
        assert_eq!(e[(2, 0)], 2.0 * x.conj());
        assert_eq!(e[(2, 3)], -l.conj());
        assert_eq!(e[(3, 2)], -l);
        assert_eq!(e[(3, 0)], g.conj());
    }

    #[test]
    fn decoupled_is_diagonal() {
        let m = HBMatrix::build(&QuadraticHamiltonian::free(&[1.0, 4.0, 2.5])).unwrap();
        let want = [1.0, 4.0, 2.5, -1.0, -4.0, -2.5];
        for i in 0..6 {
            for j in 0..6 {
                let v = if i == j { c(want[i]) } else { c(0.0) };
                assert_eq!(m.entries()[(i, j)], v);
            }
        }
    }

    #[test]
    fn rejects_invalid() {
        let mut h = QuadraticHamiltonian::free(&[1.0, 1.0]);
        h.lam[(0, 1)] = c(1.0);
        assert!(matches!(HBMatrix::build(&h), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn residual_of_perturbed_matrix() {
        let m = HBMatrix::build(&single_mode(1.0, c(0.6))).unwrap();
        assert_eq!(m.symmetry_residual(), 0.0);
        let mut e = m.entries().clone();
        e[(0, 0)] += 1e-3;
        let r = HBMatrix::from_entries(e).unwrap().symmetry_residual();
        assert!((r - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn determinants() {
        let m = HBMatrix::build(&single_mode(1.0, c(0.6))).unwrap();
        assert!((m.determinant().unwrap() + 0.64).abs() < 1e-14);
        let m = HBMatrix::build(&two_mode(1.0, 1.0, c(3.0), c(0.0), c(3.0), c(0.0))).unwrap();
        assert!((m.determinant().unwrap() - 28.0).abs() < 1e-12);
        let m = HBMatrix::build(&two_mode(1.0, 4.0, c(0.0), c(0.0), c(2.0), c(0.0))).unwrap();
        assert!(m.determinant().unwrap().abs() < 1e-14);
    }

    #[test]
    fn complex_determinant_is_flagged() {
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 1.0), c(1.0)]));
        let m = HBMatrix::from_entries(e).unwrap();
        assert!(matches!(m.determinant(), Err(Error::ComplexDeterminant { .. })));
    }

    proptest! {
        #[test]
        fn built_matrices_are_exactly_symmetric(seed in any::<u64>(), n in 1usize..=5) {
            let h = QuadraticHamiltonian::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let m = HBMatrix::build(&h).unwrap();
            prop_assert_eq!(m.symmetry_residual(), 0.0);
            prop_assert_eq!(m.trace(), Complex64::new(0.0, 0.0));
            let d = m.complex_determinant();
            prop_assert!(d.im.abs() <= 1e-10 * d.norm().max(1e-300) + 1e-14);
        }
    }
}
