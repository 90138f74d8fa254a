use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toposcope::config::{header_comment, RunConfig};
use toposcope::fivepoint::{self, FIVE_POINT};
use toposcope::qcompile::{compile_report, EvolutionConfig};
use toposcope::spectro::CorrelatorSeries;
use toposcope::susy::{Letter, PauliHamiltonian, PauliTerm};
use toposcope::sweep::{
    correlate, curvature, fidelity, records_csv, resume_sweep, run_point, run_sweep, savgol5, spectral_entropy,
    subspace_fidelity, SweepConfig, SWEEP_COLUMNS,
};

#[test]
fn five_point_validation_passes_at_default_tolerance() {
    let cfg = RunConfig::default();
    let r = fivepoint::validate(&FIVE_POINT, cfg.eta, cfg.sweep.corr_samples, cfg.sweep.corr_dt).unwrap();
    assert!(r.pass, "{r:?}");
    let row = &r.rows[0];
    assert!((row.gap_hat.unwrap() - 2.0).abs() <= row.d_omega);
    let betti: Vec<usize> = r.rows.iter().map(|x| x.beta1_hat).collect();
    assert_eq!(betti, fivepoint::EXPECTED_BETTI1);
}

#[test]
fn five_point_validation_is_stable_under_jitter() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = RunConfig::default();
    for _ in 0..5 {
        let mut pts = FIVE_POINT;
        for p in pts.iter_mut() {
            p[0] += (rng.gen::<f64>() - 0.5) * 2e-3;
            p[1] += (rng.gen::<f64>() - 0.5) * 2e-3;
        }
        assert!(fivepoint::satisfies_targets(&pts));
        assert!(fivepoint::validate(&pts, cfg.eta, cfg.sweep.corr_samples, cfg.sweep.corr_dt).unwrap().pass);
    }
}

#[test]
fn five_point_validation_fails_with_zero_tolerance() {
    let cfg = RunConfig::default();
    assert!(!fivepoint::validate(&FIVE_POINT, 0.0, cfg.sweep.corr_samples, cfg.sweep.corr_dt).unwrap().pass);
}

#[test]
fn committed_fixture_meets_the_targets() {
    assert!(fivepoint::satisfies_targets(&FIVE_POINT));
    assert!(fivepoint::threshold_margin(&FIVE_POINT) > 0.04);
}

#[test]
fn fixture_search_reproduces_the_committed_cloud() {
    let found = fivepoint::search_fixture();
    for (a, b) in found.iter().zip(FIVE_POINT.iter()) {
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12, "{found:?}");
    }
}

#[test]
fn sweep_point_is_deterministic_and_sane() {
    let cfg = SweepConfig::default();
    let a = run_point(28.0, &cfg);
    let b = run_point(28.0, &cfg);
    assert_eq!(a, b);
    assert!(a.failed_stage.is_none(), "{:?}", a.failed_stage);
    assert!(a.gamma.unwrap() >= 0.0);
    assert!(a.lambda_max.unwrap() > 0.0);
    assert_eq!(a.n_points.unwrap(), a.ground.as_ref().map(|_| a.n_points.unwrap()).unwrap());
    assert!(a.beta1.unwrap() >= 1);
}

#[test]
fn sweep_cross_grid_columns_and_resume() {
    let cfg = SweepConfig::default();
    let grid = [38.0, 39.0, 40.0];
    let full = run_sweep(&grid, &cfg).unwrap();
    for r in &full.records {
        if let Some(f) = r.fidelity_to_next {
            assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
    assert!(full.records[2].fidelity_to_next.is_none());
    assert!(full.records[1].f_curvature.is_some());
    let resumed = resume_sweep(&grid, &cfg, &full.records[..2]).unwrap();
    assert_eq!(resumed, full);

    let csv = records_csv(&full.records);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), SWEEP_COLUMNS.len());
    assert_eq!(lines.count(), 3);
}

#[test]
fn empty_and_unordered_grids() {
    let r = run_sweep(&[], &SweepConfig::default()).unwrap();
    assert!(r.records.is_empty() && r.correlation.pearson.is_none());
    assert!(run_sweep(&[30.0, 29.0], &SweepConfig::default()).is_err());
}

#[test]
fn fidelity_rules() {
    assert!((fidelity(&[0.6, 0.8], &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
    assert!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap().abs() < 1e-15);
    assert!((fidelity(&[0.6, 0.8], &[-0.6, -0.8]).unwrap() - 1.0).abs() < 1e-15);
    let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let b = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
    assert!(subspace_fidelity(&a, &b).unwrap().abs() < 1e-15);
    let c = DMatrix::from_column_slice(3, 1, &[0.0, -1.0, 0.0]);
    assert!((subspace_fidelity(&a, &c).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn curvature_rules() {
    let lin: Vec<f64> = (0..6).map(|k| 3.0 - 0.5 * k as f64).collect();
    assert!(curvature(&lin, 0.5).iter().flatten().all(|c| c.abs() < 1e-12));
    let sq: Vec<f64> = (0..6).map(|k| (k as f64 * 0.5).powi(2)).collect();
    assert!(curvature(&sq, 0.5).iter().flatten().all(|c| (c - 2.0).abs() < 1e-9));
    let kink: Vec<f64> = (0..5).map(|k| (k as f64 - 2.0).abs()).collect();
    assert!((curvature(&kink, 1.0)[2].unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn correlation_of_constant_diagnostics_is_absent() {
    let c = correlate(&[1.0, 2.0, 3.0, 4.0], &[5.0; 4], 100, 0);
    assert!(c.pearson.is_none() && c.spearman.is_none() && c.pearson_ci.is_none());
    let d = correlate(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.1, 5.9, 8.2, 9.9], 200, 0);
    assert!(d.pearson.unwrap() > 0.99 && (d.spearman.unwrap() - 1.0).abs() < 1e-12);
    let (lo, hi) = d.pearson_ci.unwrap();
    assert!(lo <= d.pearson.unwrap() && d.pearson.unwrap() <= hi);
}

#[test]
fn entropy_orders_line_and_noise_spectra() {
    let m = 256;
    let line = CorrelatorSeries {
        dt: 0.25,
        values: (0..m).map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 8.0 * k as f64 / m as f64)).collect(),
        shots: 0,
        alpha: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let noise = CorrelatorSeries {
        values: (0..m).map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)).collect(),
        ..line.clone()
    };
    let h_line = spectral_entropy(&line).unwrap();
    let h_noise = spectral_entropy(&noise).unwrap();
    assert!(h_line < 2.0, "{h_line}");
    assert!(h_noise > (m as f64).ln() - 1.0, "{h_noise}");
}

fn one_term() -> PauliHamiltonian {
    PauliHamiltonian::from_terms(3, vec![PauliTerm::new(0.7, vec![Letter::X, Letter::Z, Letter::I])]).unwrap()
}

#[test]
fn single_readout_bit_gives_unit_ratio() {
    let cfg = EvolutionConfig { order: 1, steps: 1, alpha: 1.0 };
    let (_, r) = compile_report(&one_term(), 0.5, &cfg, 1).unwrap();
    assert_eq!(r.baseline_two_qubit, r.compiled_two_qubit);
    assert!((r.ratio - 1.0).abs() < 1e-12);
    let (_, r6) = compile_report(&one_term(), 0.5, &cfg, 6).unwrap();
    let c = r6.compiled_two_qubit;
    assert_eq!(r6.baseline_two_qubit, 63 * c + 30);
    assert!(r6.ratio > 63.0);
}

#[test]
fn compiled_count_is_linear_in_steps() {
    let h = PauliHamiltonian::from_terms(
        3,
        vec![
            PauliTerm::new(0.7, vec![Letter::X, Letter::Z, Letter::I]),
            PauliTerm::new(-0.4, vec![Letter::Z, Letter::X, Letter::Z]),
        ],
    )
    .unwrap();
    let count = |steps| compile_report(&h, 0.5, &EvolutionConfig { order: 1, steps, alpha: 1.0 }, 4).unwrap().1.compiled_two_qubit;
    assert_eq!(count(4), 2 * count(2));
}

#[test]
fn config_text_round_trip() {
    let text = "# example\nseed = 7\nlorenz.rho = 30   # trailing\nsweep.rho_min = 36\nsweep.rho_max = 38\n";
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.sweep.seed, 7);
    assert_eq!(cfg.grid(), vec![36.0, 37.0, 38.0]);
    let again = RunConfig::parse(&cfg.canonical()).unwrap();
    assert_eq!(again.digest(), cfg.digest());
    assert_ne!(cfg.digest(), RunConfig::default().digest());
    let header = header_comment(&cfg.digest());
    assert!(header.starts_with("# toposcope ") && header.trim_end().ends_with(&cfg.digest()));
}

#[test]
fn config_errors() {
    assert!(RunConfig::parse("nonsense.key = 1").is_err());
    assert!(RunConfig::parse("seed 7").is_err());
    assert!(RunConfig::parse("sweep.rho_step = 0").is_err());
    assert!(RunConfig::parse("select.r = 1.5").is_err());
}

proptest! {
    #[test]
    fn savgol_keeps_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, n in 5usize..20) {
        let y: Vec<f64> = (0..n).map(|k| a + b * k as f64 + c * (k * k) as f64).collect();
        for (s, t) in savgol5(&y).iter().zip(&y) {
            prop_assert!((s - t).abs() < 1e-9 * (1.0 + t.abs()));
        }
    }

    #[test]
    fn fidelity_is_bounded(v in prop::collection::vec(-1.0f64..1.0, 5), w in prop::collection::vec(-1.0f64..1.0, 5)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3) && w.iter().any(|x| x.abs() > 1e-3));
        let f = fidelity(&v, &w).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }
}
