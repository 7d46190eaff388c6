//! Quadratic bosonic Hamiltonians
//!
//! ```text
//! H = Σ_n [ω_n a_n†a_n + (χ_n a_n² + h.c.)]
//!   + Σ_{i<j} [g_ij a_i a_j + λ_ij a_i a_j† + h.c.]
//! ```
//!
//! `chi[n]` is always the literal coefficient of `a_n²`. Constructors that
//! accept other conventions (the ½-normalised single-mode drive, the
//! dispersive Rabi maps) convert on the way in.

mod spec;

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub use spec::ModelSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Quasi-momenta of the three-site ring, in storage order.
pub const RING_MOMENTA: [f64; 3] = [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0];

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    pub omega: Vec<f64>,
    pub chi: Vec<Complex64>,
    /// Rotating-wave couplings; `lam[(i, j)]` multiplies `a_i a_j†`.
    pub lam: DMatrix<Complex64>,
    /// Counter-rotating couplings; `g[(i, j)]` multiplies `a_i a_j`.
    pub g: DMatrix<Complex64>,
}

/// One broken invariant of a [`QuadraticHamiltonian`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub index: Option<(usize, usize)>,
    pub magnitude: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    Shape,
    NonFinite,
    NotHermitian,
    NotSymmetric,
    NonzeroDiagonal,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Empty => "has no modes",
            ViolationKind::Shape => "has the wrong shape",
            ViolationKind::NonFinite => "is not finite",
            ViolationKind::NotHermitian => "not Hermitian",
            ViolationKind::NotSymmetric => "not symmetric",
            ViolationKind::NonzeroDiagonal => "has a nonzero diagonal",
        };
        write!(f, "{} {}", self.field, what)?;
        if let Some((i, j)) = self.index {
            if i == j {
                write!(f, " at ({i})")?;
            } else {
                write!(f, " at ({i},{j})")?;
            }
        }
        if self.magnitude > 0.0 && self.magnitude.is_finite() {
            write!(f, " (by {:.3e})", self.magnitude)?;
        }
        Ok(())
    }
}

impl QuadraticHamiltonian {
    /// Decoupled oscillators.
    pub fn free(omega: &[f64]) -> Self {
        let n = omega.len();
        Self {
            omega: omega.to_vec(),
            chi: vec![ZERO; n],
            lam: DMatrix::zeros(n, n),
            g: DMatrix::zeros(n, n),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// Sets `lam[(i, j)] = value` and its Hermitian partner.
    pub fn set_rotating(&mut self, i: usize, j: usize, value: Complex64) {
        self.lam[(i, j)] = value;
        self.lam[(j, i)] = value.conj();
    }

    /// Sets `g[(i, j)] = value` and its symmetric partner.
    pub fn set_counter_rotating(&mut self, i: usize, j: usize, value: Complex64) {
        self.g[(i, j)] = value;
        self.g[(j, i)] = value;
    }

    /// All couplings (`chi`, `lam`, `g`) multiplied by `s`; frequencies untouched.
    pub fn scaled_couplings(&self, s: f64) -> Self {
        Self {
            omega: self.omega.clone(),
            chi: self.chi.iter().map(|c| c * s).collect(),
            lam: &self.lam * Complex64::from(s),
            g: &self.g * Complex64::from(s),
        }
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.chi.iter().all(|c| c.im == 0.0)
            && self.lam.iter().all(|c| c.im == 0.0)
            && self.g.iter().all(|c| c.im == 0.0)
    }

    /// Lists every broken invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.omega.len();
        let mut out = Vec::new();
        let mut push = |field, index, magnitude, kind| {
            out.push(Violation {
                field,
                index,
                magnitude,
                kind,
            })
        };
        if n == 0 {
            push("omega", None, 0.0, ViolationKind::Empty);
            return out;
        }
        for (i, w) in self.omega.iter().enumerate() {
            if !w.is_finite() {
                push("omega", Some((i, i)), 0.0, ViolationKind::NonFinite);
            }
        }
        if self.chi.len() != n {
            push("chi", None, 0.0, ViolationKind::Shape);
        } else {
            for (i, c) in self.chi.iter().enumerate() {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    push("chi", Some((i, i)), 0.0, ViolationKind::NonFinite);
                }
            }
        }
        for (field, m, hermitian) in [("lam", &self.lam, true), ("g", &self.g, false)] {
            if m.nrows() != n || m.ncols() != n {
                push(field, None, 0.0, ViolationKind::Shape);
                continue;
            }
            for i in 0..n {
                let d = m[(i, i)];
                if d != ZERO {
                    push(field, Some((i, i)), d.norm(), ViolationKind::NonzeroDiagonal);
                }
                for j in (i + 1)..n {
                    let (a, b) = (m[(i, j)], m[(j, i)]);
                    if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
                        push(field, Some((i, j)), 0.0, ViolationKind::NonFinite);
                        continue;
                    }
                    let partner = if hermitian { b.conj() } else { b };
                    if a != partner {
                        let kind = if hermitian {
                            ViolationKind::NotHermitian
                        } else {
                            ViolationKind::NotSymmetric
                        };
                        push(field, Some((i, j)), (a - partner).norm(), kind);
                    }
                }
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }

    /// A random valid Hamiltonian with `ω ∈ [0.2, 2]` and couplings of
    /// magnitude below one; covers both phases.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut c = |scale: f64| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
        let chi: Vec<Complex64> = (0..n).map(|_| c(0.6)).collect();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j, c(0.7), c(0.7)));
            }
        }
        let omega = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect::<Vec<_>>();
        let mut h = Self::free(&omega);
        h.chi = chi;
        for (i, j, l, g) in pairs {
            h.set_rotating(i, j, l);
            h.set_counter_rotating(i, j, g);
        }
        h
    }
}

/// Single mode with the drive written as `(χ a² + h.c.)/2`; stores `χ/2`.
pub fn single_mode(omega: f64, chi_half_convention: Complex64) -> QuadraticHamiltonian {
    let mut h = QuadraticHamiltonian::free(&[omega]);
    h.chi[0] = chi_half_convention / 2.0;
    h
}

/// Two modes with drives `χ_n a_n²`, beam splitter `λ a_1 a_2†` and
/// two-mode squeezing `g a_1 a_2` (each plus h.c.).
pub fn two_mode(
    omega1: f64,
    omega2: f64,
    chi1: Complex64,
    chi2: Complex64,
    lambda: Complex64,
    g: Complex64,
) -> QuadraticHamiltonian {
    let mut h = QuadraticHamiltonian::free(&[omega1, omega2]);
    h.chi = vec![chi1, chi2];
    h.set_rotating(0, 1, lambda);
    h.set_counter_rotating(0, 1, g);
    h
}

/// Cavity coupled to a two-level system, `ω0 a†a + Δ/2 σ_z + η (a + a†) σ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams {
    pub omega0: f64,
    pub delta: f64,
    pub eta: f64,
}

impl RabiParams {
    fn dispersive(&self) -> Result<(f64, f64)> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::param("delta", "qubit splitting must be positive"));
        }
        let shift = self.eta * self.eta / (2.0 * self.delta);
        Ok((self.omega0 - shift, -shift / 2.0))
    }
}

/// Dispersive (large-Δ) reduction of the Rabi model: `ω = ω0 − η²/2Δ`,
/// `χ = −η²/4Δ`. The normal/superradiant boundary sits at `η = √(ω0 Δ)`.
pub fn from_rabi(p: RabiParams) -> Result<QuadraticHamiltonian> {
    let (omega, chi) = p.dispersive()?;
    let mut h = QuadraticHamiltonian::free(&[omega]);
    h.chi[0] = chi.into();
    Ok(h)
}

/// Two dispersively reduced Rabi cavities joined by photon hopping `λ`.
pub fn from_two_rabi(p1: RabiParams, p2: RabiParams, lambda_hop: Complex64) -> Result<QuadraticHamiltonian> {
    let (w1, c1) = p1.dispersive()?;
    let (w2, c2) = p2.dispersive()?;
    Ok(two_mode(w1, w2, c1.into(), c2.into(), lambda_hop, ZERO))
}

/// Three Rabi sites on a ring with complex hopping `J e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeRingParams {
    pub omega: f64,
    pub delta: f64,
    pub g: f64,
    pub j_hop: f64,
    pub theta: f64,
}

impl ThreeRingParams {
    /// Momentum-space frequencies `ω_q = ω − 2g²/Δ + 2J cos(θ − q)`.
    pub fn mode_frequencies(&self) -> [f64; 3] {
        let shift = 2.0 * self.g * self.g / self.delta;
        RING_MOMENTA.map(|q| self.omega - shift + 2.0 * self.j_hop * (self.theta - q).cos())
    }
}

/// Momentum-space Hamiltonian of the dispersively reduced three-site ring,
/// modes ordered `[q=0, q=+2π/3, q=−2π/3]`. The constant energy offset is
/// dropped.
pub fn from_three_ring(p: ThreeRingParams) -> Result<QuadraticHamiltonian> {
    if !(p.delta > 0.0) || !p.delta.is_finite() {
        return Err(Error::param("delta", "qubit splitting must be positive"));
    }
    if p.j_hop < 0.0 {
        return Err(Error::param("j_hop", "hopping magnitude must be non-negative"));
    }
    if p.j_hop > 0.0 && p.omega <= 2.0 * p.j_hop {
        log::warn!(
            "three-site ring with omega={} <= 2J={}: outside the omega > 2J regime",
            p.omega,
            2.0 * p.j_hop
        );
    }
    let pair = p.g * p.g / p.delta;
    let mut h = QuadraticHamiltonian::free(&p.mode_frequencies());
    h.chi[0] = Complex64::from(-pair);
    h.set_counter_rotating(1, 2, Complex64::from(-2.0 * pair));
    Ok(h)
}

/// `n` identical modes with identical real all-to-all couplings; invariant
/// under every mode permutation.
pub fn symmetric(n: usize, omega: f64, chi: f64, lambda: f64, g: f64) -> Result<QuadraticHamiltonian> {
    if n == 0 {
        return Err(Error::param("n_modes", "need at least one mode"));
    }
    let mut h = QuadraticHamiltonian::free(&vec![omega; n]);
    h.chi = vec![Complex64::from(chi); n];
    for i in 0..n {
        for j in (i + 1)..n {
            h.set_rotating(i, j, lambda.into());
            h.set_counter_rotating(i, j, g.into());
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn minimal_instance_is_valid() {
        let h = single_mode(1.0, c(0.6, 0.0));
        assert!(h.validate().is_empty());
        assert_eq!(h.chi[0], c(0.3, 0.0));
    }

    #[test]
    fn reports_non_hermitian_lam() {
        let mut h = QuadraticHamiltonian::free(&[1.0, 1.0]);
        h.lam[(0, 1)] = c(1.0, 0.0);
        let v = h.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NotHermitian);
        assert_eq!(v[0].index, Some((0, 1)));
        assert!(v[0].to_string().starts_with("lam not Hermitian at (0,1)"));
    }

    #[test]
    fn reports_non_symmetric_g() {
        let mut h = QuadraticHamiltonian::free(&[1.0, 1.0]);
        h.g[(0, 1)] = c(1.0, 0.0);
        h.g[(1, 0)] = c(-1.0, 0.0);
        let v = h.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("g not symmetric at (0,1)"));
        assert_eq!(v[0].magnitude, 2.0);
    }

    #[test]
    fn reports_diagonal_and_nonfinite() {
        let mut h = QuadraticHamiltonian::free(&[f64::NAN, 1.0]);
        h.g[(1, 1)] = c(0.5, 0.0);
        let kinds: Vec<_> = h.validate().iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::NonFinite));
        assert!(kinds.contains(&ViolationKind::NonzeroDiagonal));
        assert!(!QuadraticHamiltonian::free(&[]).validate().is_empty());
    }

    #[test]
    fn rabi_map() {
        let p = RabiParams {
            omega0: 1.0,
            delta: 100.0,
            eta: 5.0,
        };
        let h = from_rabi(p).unwrap();
        assert!(close(h.omega[0], 0.875, 1e-15));
        assert!(close(h.chi[0].re, -0.0625, 1e-15));
        assert!(h.omega[0].abs() > 2.0 * h.chi[0].norm());

        let h = from_rabi(RabiParams { eta: 10.0, ..p }).unwrap();
        assert!(close(h.omega[0], 0.5, 1e-15));
        assert!(close(2.0 * h.chi[0].norm(), 0.5, 1e-15));

        let h = from_rabi(RabiParams { eta: 0.0, ..p }).unwrap();
        assert_eq!(h.omega[0], 1.0);
        assert_eq!(h.chi[0].norm(), 0.0);

        assert!(from_rabi(RabiParams { delta: 0.0, ..p }).is_err());
    }

    #[test]
    fn two_rabi_map() {
        let p1 = RabiParams {
            omega0: 1.0,
            delta: 100.0,
            eta: 10.0,
        };
        let p2 = RabiParams {
            omega0: 1.0,
            delta: 100.0,
            eta: 0.0,
        };
        let h = from_two_rabi(p1, p2, c(0.3, 0.0)).unwrap();
        assert_eq!(h.omega, vec![0.5, 1.0]);
        assert_eq!(h.chi, vec![c(-0.25, 0.0), c(0.0, 0.0)]);
        assert_eq!(h.lam[(0, 1)], c(0.3, 0.0));
        assert!(h.g.iter().all(|x| *x == ZERO));

        let q1 = RabiParams {
            omega0: 1.0,
            delta: 100.0,
            eta: 0.0,
        };
        let q2 = RabiParams {
            omega0: 4.0,
            delta: 100.0,
            eta: 0.0,
        };
        let h = from_two_rabi(q1, q2, c(2.0, 0.0)).unwrap();
        assert_eq!(h, two_mode(1.0, 4.0, ZERO, ZERO, c(2.0, 0.0), ZERO));
    }

    #[test]
    fn two_rabi_symmetric_inputs_swap_invariant() {
        let p = RabiParams {
            omega0: 1.3,
            delta: 40.0,
            eta: 3.0,
        };
        let h = from_two_rabi(p, p, c(0.4, 0.0)).unwrap();
        assert_eq!(h.omega[0], h.omega[1]);
        assert_eq!(h.chi[0], h.chi[1]);
        assert_eq!(h.lam[(0, 1)], h.lam[(1, 0)]);
    }

    #[test]
    fn ring_map() {
        let p = ThreeRingParams {
            omega: 1.0,
            delta: 20.0,
            g: 1.0,
            j_hop: 0.3,
            theta: PI,
        };
        let h = from_three_ring(p).unwrap();
        assert!(h.validate().is_empty());
        let expect = [0.3, 1.2, 1.2];
        for (w, e) in h.omega.iter().zip(expect) {
            assert!(close(*w, e, 1e-12), "{w} vs {e}");
        }
        assert!(close(h.chi[0].re, -0.05, 1e-15));
        assert_eq!(h.chi[1], ZERO);
        assert!(close(h.g[(1, 2)].re, -0.1, 1e-15));
        assert_eq!(h.g[(1, 2)], h.g[(2, 1)]);
        assert!(h.lam.iter().all(|x| *x == ZERO));

        let h = from_three_ring(ThreeRingParams { g: 0.0, ..p }).unwrap();
        for (k, q) in RING_MOMENTA.iter().enumerate() {
            assert!(close(h.omega[k], 1.0 + 0.6 * (PI - q).cos(), 1e-15));
        }
        assert!(from_three_ring(ThreeRingParams { delta: 0.0, ..p }).is_err());
    }

    #[test]
    fn ring_frequency_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = ThreeRingParams {
                omega: rng.gen_range(0.5..3.0),
                delta: rng.gen_range(1.0..50.0),
                g: rng.gen_range(0.0..2.0),
                j_hop: rng.gen_range(0.0..0.25),
                theta: rng.gen_range(0.0..PI),
            };
            let w = p.mode_frequencies();
            let expect = 4.0 * p.j_hop * p.theta.sin() * (2.0 * PI / 3.0).sin();
            assert!(close(w[1] - w[2], expect, 1e-12));
        }
        for theta in [0.0, PI] {
            let w = ThreeRingParams {
                omega: 1.0,
                delta: 5.0,
                g: 0.7,
                j_hop: 0.3,
                theta,
            }
            .mode_frequencies();
            assert!(close(w[1], w[2], 1e-14));
        }
    }

    #[test]
    fn constructors_validate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            assert!(QuadraticHamiltonian::random(n, &mut rng).validate().is_empty());
        }
        assert!(symmetric(3, 1.0, 0.2, 0.3, 0.1).unwrap().validate().is_empty());
        assert!(two_mode(1.0, 2.0, c(0.25, 0.1), ZERO, c(0.5, -0.2), c(0.1, 0.3))
            .validate()
            .is_empty());
        assert!(symmetric(0, 1.0, 0.0, 0.0, 0.0).is_err());
    }
}
