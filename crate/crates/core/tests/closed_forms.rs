//! Eigensolver against closed-form normal-mode frequencies.

use std::f64::consts::PI;

use hb_core::eigen::{eigenvalues, spectrum};
use hb_core::model::{from_three_ring, single_mode, two_mode, ThreeRingParams};
use hb_core::{HBMatrix, SolverOptions};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Sorted squared excitation energies `E²` of the positive members of
/// each pair.
fn squared_energies(values: &[Complex64]) -> Vec<Complex64> {
    let mut sq: Vec<Complex64> = values.iter().map(|z| z * z).collect();
    sq.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    sq.dedup_by(|a, b| (*a - *b).norm() <= 1e-9 * (1.0 + b.norm()));
    sq
}

fn assert_squares_match(values: &[Complex64], want: &[Complex64], ctx: &str) {
    let got = squared_energies(values);
    let scale = 1.0 + want.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for w in want {
        assert!(
            got.iter().any(|g| (g - w).norm() <= 1e-9 * scale),
            "{ctx}: {w} not among {got:?}"
        );
    }
}

fn spectrum_of(h: &hb_core::QuadraticHamiltonian) -> Vec<Complex64> {
    eigenvalues(&HBMatrix::build(h).unwrap(), &SolverOptions::default()).unwrap()
}

#[test]
fn single_mode_grid() {
    for i in 0..40 {
        let omega = 0.1 + 1.9 * i as f64 / 39.0;
        for j in 0..40 {
            let chi = 2.0 * omega * j as f64 / 39.0;
            let e = spectrum_of(&single_mode(omega, c(chi)));
            let want = Complex64::from(omega * omega - chi * chi).sqrt();
            let scale = omega.max(chi);
            assert!(
                (e[0] - want).norm() <= 1e-9 * scale || (e[0] + want).norm() <= 1e-9 * scale,
                "omega={omega} chi={chi}: {e:?} vs ±{want}"
            );
        }
    }
}

#[test]
fn driven_rotating_family() {
    // ω1 = ω2 = ω, drive χ on mode 1, hopping λ, no counter-rotating term:
    // Ω² = ω² + λ² − 2χ² ∓ 2√(χ⁴ − χ²λ² + ω²λ²).
    let omega = 1.0;
    for i in 0..50 {
        let chi = 2.0 * i as f64 / 49.0;
        for lambda in [0.3, 1.0, 4.1f64.sqrt(), 3.0] {
            let h = two_mode(omega, omega, c(chi), c(0.0), c(lambda), c(0.0));
            let root =
                Complex64::from(chi.powi(4) - chi * chi * lambda * lambda + omega * omega * lambda * lambda).sqrt();
            let base = c(omega * omega + lambda * lambda - 2.0 * chi * chi);
            let want = [base - 2.0 * root, base + 2.0 * root];
            assert_squares_match(&spectrum_of(&h), &want, &format!("chi={chi} lambda={lambda}"));
        }
    }
}

#[test]
fn counter_rotating_family() {
    // g = λ: Ω² = ω² − 2χ² ∓ 2√(χ⁴ − 2χωλ² + ω²λ²).
    let omega = 1.0;
    for i in 0..50 {
        let chi = i as f64 / 49.0;
        for lambda in [0.0, 0.6, 1.2] {
            let h = two_mode(omega, omega, c(chi), c(0.0), c(lambda), c(lambda));
            let root =
                Complex64::from(chi.powi(4) - 2.0 * chi * omega * lambda * lambda + omega * omega * lambda * lambda)
                    .sqrt();
            let base = c(omega * omega - 2.0 * chi * chi);
            let want = [base - 2.0 * root, base + 2.0 * root];
            assert_squares_match(&spectrum_of(&h), &want, &format!("chi={chi} lambda={lambda}"));
        }
    }
}

#[test]
fn counter_rotating_spot_value() {
    let s = spectrum(
        &two_mode(1.0, 1.0, c(0.3), c(0.0), c(0.6), c(0.6)),
        &SolverOptions::default(),
    )
    .unwrap();
    let mut omegas: Vec<f64> = s.pairs.iter().map(|p| p.e_plus.re).collect();
    omegas.sort_by(f64::total_cmp);
    assert!((omegas[0] - 0.2).abs() < 1e-12);
    assert!((omegas[1] - 1.6f64.sqrt()).abs() < 1e-12);
}

/// `Ω_q = ½[√((ω_q + ω_−q)² − 16g⁴/Δ²) + ω_q − ω_−q]`.
fn ring_frequencies(p: &ThreeRingParams) -> [f64; 3] {
    let w = p.mode_frequencies();
    let k = 16.0 * p.g.powi(4) / (p.delta * p.delta);
    let partner = [0, 2, 1];
    let mut out = [0.0; 3];
    for q in 0..3 {
        let (a, b) = (w[q], w[partner[q]]);
        out[q] = 0.5 * (((a + b).powi(2) - k).sqrt() + a - b);
    }
    out
}

#[test]
fn ring_momentum_frequencies() {
    let p = ThreeRingParams {
        omega: 1.0,
        delta: 20.0,
        g: 1.0,
        j_hop: 0.3,
        theta: PI,
    };
    let want = ring_frequencies(&p);
    assert!((want[0] - 0.08f64.sqrt()).abs() < 1e-15);
    let s = spectrum(&from_three_ring(p).unwrap(), &SolverOptions::default()).unwrap();
    assert!((s.real_gap().unwrap() - 0.08f64.sqrt()).abs() < 1e-9);

    for i in 0..50 {
        let theta = PI * i as f64 / 49.0;
        for g in [0.3, 0.8, 1.2] {
            let p = ThreeRingParams {
                omega: 1.0,
                delta: 20.0,
                g,
                j_hop: 0.3,
                theta,
            };
            let want = ring_frequencies(&p);
            if want.iter().any(|w| !w.is_finite()) {
                continue;
            }
            let s = spectrum(&from_three_ring(p).unwrap(), &SolverOptions::default()).unwrap();
            let mut got: Vec<f64> = s.pairs.iter().map(|p| p.e_plus.re).collect();
            got.sort_by(f64::total_cmp);
            let mut want = want.to_vec();
            want.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9, "theta={theta} g={g}: {got:?} vs {want:?}");
            }
        }
    }
}
