use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use toposcope::complex::Complex;
use toposcope::hodge::complex_laplacian;
use toposcope::probe::{apply_edge_phases, dephase_average, random_phases, uniform_edge_state};
use toposcope::qcompile::EvolutionConfig;
use toposcope::spectro::*;
use toposcope::susy::{parse_letters, PauliHamiltonian, PauliTerm};

fn synth(freqs: &[f64], amps: &[f64], m: usize, dt: f64) -> CorrelatorSeries {
    let values = (0..m)
        .map(|k| freqs.iter().zip(amps).map(|(f, a)| Complex64::from_polar(*a, -f * dt * k as f64)).sum())
        .collect();
    CorrelatorSeries { dt, values, shots: 0, alpha: 1.0 }
}

/// Square 0-2-1-3 so that the harmonic cycle alternates in sign against
/// the low-to-high edge orientation.
fn c4() -> (Complex, DMatrix<f64>) {
    let c = Complex::new(4, vec![[0, 2], [0, 3], [1, 2], [1, 3]], vec![]).unwrap();
    let l = complex_laplacian(&c, 1);
    (c, l)
}

#[test]
fn off_grid_refinement_within_five_percent_of_a_bin() {
    let (m, dt) = (128, 0.1);
    let d = 2.0 * PI / (m as f64 * dt);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let off = k as f64 / 20.0;
        let w0 = (10.0 + off) * d;
        let s = synth(&[w0], &[1.0], m, dt);
        let r = refine_peaks(&periodogram(&s).unwrap(), &PeakConfig::default());
        let best = r.lines.iter().min_by(|a, b| (a.omega - w0).abs().total_cmp(&(b.omega - w0).abs())).unwrap();
        worst = worst.max((best.omega - w0).abs() / d);
    }
    assert!(worst < 0.05, "worst offset error {worst} bins");
}

#[test]
fn two_lines_three_bins_apart_are_resolved() {
    let (m, dt) = (128, 0.1);
    let d = 2.0 * PI / (m as f64 * dt);
    let s = synth(&[20.0 * d, 23.0 * d], &[1.0, 0.8], m, dt);
    let r = refine_peaks(&periodogram(&s).unwrap(), &PeakConfig::default());
    assert_eq!(r.lines.len(), 2);
}

#[test]
fn prony_recovers_two_lines() {
    let s = synth(&[0.7, 1.9], &[0.6, 0.4], 80, 0.3);
    let p = prony_esprit(&s, &PronyConfig::default()).unwrap();
    assert_eq!(p.frequencies.len(), 2);
    assert!((p.frequencies[0] - 0.7).abs() < 1e-9, "{:?}", p.frequencies);
    assert!((p.frequencies[1] - 1.9).abs() < 1e-9, "{:?}", p.frequencies);
}

#[test]
fn prony_discards_spurious_roots_when_overspecified() {
    let s = synth(&[1.3], &[1.0], 64, 0.2);
    let cfg = PronyConfig { rel_tol: 1e-20, ..Default::default() };
    let p = prony_esprit(&s, &cfg).unwrap();
    assert_eq!(p.frequencies.len(), 1, "{:?}", p.frequencies);
    assert!((p.frequencies[0] - 1.3).abs() < 1e-9);
}

#[test]
fn c4_correlator_matches_projection_weights() {
    let (_, l) = c4();
    let psi = uniform_edge_state(4).unwrap();
    let s = correlator_exact(&l, Ensemble::Pure(&psi), 16, 0.3, 1.0).unwrap();
    let (vals, w) = line_weights(&l, Ensemble::Pure(&psi)).unwrap();
    assert!((s.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    for (k, c) in s.values.iter().enumerate() {
        let t = 0.3 * k as f64;
        let want: Complex64 = vals.iter().zip(&w).map(|(l, a)| Complex64::from_polar(*a, -l * t)).sum();
        assert!((c - want).norm() < 1e-12);
    }
    // The uniform probe is orthogonal to the harmonic cycle.
    assert!(w[0] < 1e-12);
}

#[test]
fn aliasing_is_rejected_with_minimal_alpha() {
    let (_, l) = c4();
    let psi = uniform_edge_state(4).unwrap();
    match correlator_exact(&l, Ensemble::Pure(&psi), 16, 1.0, 1.0) {
        Err(toposcope::Error::Aliasing { min_alpha, .. }) => assert!((min_alpha - 4.0 / PI).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
}

fn c4_estimate(alpha: f64) -> SpectralEstimate {
    let (_, l) = c4();
    let pops = vec![0.25; 4];
    let s = correlator_exact(&l, Ensemble::Diagonal(&pops), 256, 0.25, alpha).unwrap();
    let cfg = EstimateConfig { count_dim: Some(4), bootstrap: 0, ..Default::default() };
    estimate(&s, None, &cfg).unwrap()
}

#[test]
fn c4_dephased_gives_one_zero_mode_and_gap_two() {
    let e = c4_estimate(1.0);
    assert!(e.zero_mode);
    assert_eq!(e.beta1_hat, 1);
    let gap = e.gap_hat.unwrap();
    assert!((gap - 2.0).abs() <= e.d_omega, "gap {gap}");
}

#[test]
fn alpha_sweep_keeps_beta_and_scaled_gap() {
    let es: Vec<SpectralEstimate> = [1.0, 1.5, 2.5].iter().map(|&a| c4_estimate(a)).collect();
    for e in &es {
        assert_eq!(e.beta1_hat, 1);
        let gap = e.gap_hat.unwrap();
        assert!((gap - 2.0).abs() <= 1e-3 * 2.0, "{gap}");
    }
}

#[test]
fn gradient_probe_has_no_zero_mode() {
    let (_, l) = c4();
    let psi = uniform_edge_state(4).unwrap();
    let s = correlator_exact(&l, Ensemble::Pure(&psi), 256, 0.25, 1.0).unwrap();
    let e = estimate(&s, None, &EstimateConfig { count_dim: Some(4), bootstrap: 0, ..Default::default() }).unwrap();
    assert!(!e.zero_mode, "R = {}", e.zero_mode_ratio);
    assert_eq!(e.beta1_hat, 0);
}

#[test]
fn random_phase_average_approaches_diagonal_ensemble() {
    let (c, l) = c4();
    let psi = uniform_edge_state(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<Vec<Complex64>> = (0..4000)
        .map(|_| {
            let ph = random_phases(4, &mut rng);
            let p = apply_edge_phases(&psi, &c.edges, &ph);
            correlator_exact(&l, Ensemble::Pure(&p), 32, 0.25, 1.0).unwrap().values
        })
        .collect();
    let avg = dephase_average(&draws).unwrap();
    let exact = correlator_exact(&l, Ensemble::Diagonal(&[0.25; 4]), 32, 0.25, 1.0).unwrap();
    let err = avg.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 0.05, "{err}");
}

#[test]
fn hadamard_with_zero_hamiltonian_is_one() {
    let h = PauliHamiltonian::from_terms(2, vec![]).unwrap();
    let probe = vec![Complex64::new(0.5, 0.0); 4];
    let cfg = HadamardConfig { evolution: EvolutionConfig { order: 1, steps: 1, alpha: 1.0 }, shots: 0 };
    let s = correlator_hadamard(&h, &probe, 8, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    for c in &s.values {
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn hadamard_matches_exact_on_commuting_hamiltonian() {
    let h = PauliHamiltonian::from_terms(
        3,
        vec![
            PauliTerm::new(0.8, parse_letters("ZII").unwrap()),
            PauliTerm::new(-0.5, parse_letters("IZz").unwrap()),
            PauliTerm::new(0.3, parse_letters("oIZ").unwrap()),
        ],
    )
    .unwrap();
    let probe: Vec<Complex64> = (0..8).map(|b| Complex64::new(1.0 + b as f64, 0.5 * b as f64)).collect();
    let nrm = probe.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let probe: Vec<Complex64> = probe.iter().map(|a| a / nrm).collect();
    let cfg = HadamardConfig { evolution: EvolutionConfig { order: 1, steps: 1, alpha: 1.0 }, shots: 0 };
    let s = correlator_hadamard(&h, &probe, 12, 0.4, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let hd = h.dense().unwrap();
    let ex = correlator_exact(&hd, Ensemble::Pure(&probe), 12, 0.4, 1.0).unwrap();
    for (a, b) in s.values.iter().zip(&ex.values) {
        assert!((a - b).norm() < 1e-10, "{a} {b}");
    }
}
