use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toposcope::dynamics::{integrate, lyapunov_max, rk4_step, Axis, LorenzParams};
use toposcope::embedding::{choose_m, choose_tau, delay_embed, EmbeddingConfig, TauSource};
use toposcope::persistence::{compute_persistence, enclosing_radius, max_h1_persistence, rips_filtration};

fn lorenz_x(rho: f64, t_total: f64) -> Vec<f64> {
    integrate(&LorenzParams::classic(rho), [1.0, 1.0, 1.0], 0.01, 20.0, t_total).unwrap().observable(Axis::X)
}

#[test]
fn fixed_point_stays_put() {
    let c = 72f64.sqrt();
    let tr = integrate(&LorenzParams::classic(28.0), [c, c, 27.0], 0.01, 0.0, 10.0).unwrap();
    for s in &tr.states {
        assert!((s[0] - c).abs() < 1e-9 && (s[1] - c).abs() < 1e-9 && (s[2] - 27.0).abs() < 1e-9);
    }
}

#[test]
fn subcritical_trajectory_decays() {
    let x0 = [3.0, -2.0, 5.0];
    let tr = integrate(&LorenzParams::new(10.0, 0.5, 8.0 / 3.0).unwrap(), x0, 0.01, 0.0, 20.0).unwrap();
    let n = |s: &[f64; 3]| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    assert!(n(tr.states.last().unwrap()) < n(&x0));
}

#[test]
fn attractor_is_bounded_under_both_step_sizes() {
    let p = LorenzParams::classic(28.0);
    let coarse = integrate(&p, [1.0, 1.0, 1.0], 0.01, 0.0, 100.0).unwrap();
    let zmax = coarse.states.iter().fold(0.0f64, |a, s| a.max(s[2].abs()));
    assert!(zmax < 60.0, "max |z| = {zmax}");
    let mut s = [1.0, 1.0, 1.0];
    let mut fine_max = 0.0f64;
    for _ in 0..100_000 {
        s = rk4_step(&p, &s, 0.001);
        fine_max = fine_max.max(s[2].abs());
    }
    assert!(fine_max < 60.0);
    assert!((zmax - fine_max).abs() < 5.0);
}

#[test]
fn lyapunov_signs() {
    let l20 = lyapunov_max(&LorenzParams::classic(20.0), [1.0, 1.0, 1.0], 0.01, 300.0, 10).unwrap();
    let l28 = lyapunov_max(&LorenzParams::classic(28.0), [1.0, 1.0, 1.0], 0.01, 300.0, 10).unwrap();
    assert!(l20.lambda_max < 0.0, "{}", l20.lambda_max);
    assert!(l28.lambda_max > 0.5 && l28.lambda_max < 1.3, "{}", l28.lambda_max);
}

#[test]
fn sinusoid_delay_near_quarter_period() {
    let period = 40.0;
    let s: Vec<f64> = (0..4000).map(|k| (std::f64::consts::TAU * k as f64 / period).sin()).collect();
    let tau = choose_tau(&s, 100).tau as f64;
    assert!((tau - period / 4.0).abs() <= 1.0, "tau = {tau}");
}

#[test]
fn white_noise_delay_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
    let c = choose_tau(&s, 50);
    assert_eq!(c.tau, 1);
    assert_eq!(c.source, TauSource::MutualInformation);
}

#[test]
fn lorenz_delay_and_dimension() {
    let x = lorenz_x(28.0, 70.0);
    let tau = choose_tau(&x, 100).tau;
    let lag = tau as f64 * 0.01;
    assert!((0.05..=0.2).contains(&lag), "tau*dt = {lag}");
    let m = choose_m(&x, tau, 6, 0.01);
    assert!((3..=6).contains(&m.m), "m = {}", m.m);
}

#[test]
fn noise_never_settles_on_a_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s: Vec<f64> = (0..3000).map(|_| rng.gen::<f64>()).collect();
    let m = choose_m(&s, 1, 5, 0.01);
    assert_eq!(m.m, 5);
    assert!(m.warning);
}

#[test]
fn circle_needs_few_dimensions() {
    let s: Vec<f64> = (0..3000).map(|k| (k as f64 * 0.05).cos()).collect();
    let tau = choose_tau(&s, 100).tau;
    assert!(choose_m(&s, tau, 6, 0.01).m <= 3);
}

#[test]
fn lorenz_cloud_has_a_persistent_loop() {
    let x = lorenz_x(28.0, 70.0);
    let tau = choose_tau(&x, 100).tau;
    let cfg = EmbeddingConfig { tau, m: 3, observable: Axis::X, normalize: true };
    let full = delay_embed(&x, &cfg).unwrap();
    let idx: Vec<usize> = (0..full.len()).step_by(20).collect();
    let cloud = full.subset(&idx);
    let f = rips_filtration(&cloud, enclosing_radius(&cloud), 2).unwrap();
    let ell = max_h1_persistence(&compute_persistence(&f));
    assert!(ell > 0.1 * cloud.diameter(), "{ell} vs diameter {}", cloud.diameter());
}

#[test]
fn constant_series_normalization_fails() {
    let cfg = EmbeddingConfig { tau: 5, m: 3, observable: Axis::X, normalize: true };
    assert!(delay_embed(&[2.5; 40], &cfg).is_err());
    let raw = delay_embed(&[2.5; 40], &EmbeddingConfig { normalize: false, ..cfg }).unwrap();
    assert!(raw.data.iter().all(|v| *v == 2.5));
}

proptest! {
    #[test]
    fn embedding_rows_are_delayed_copies(series in prop::collection::vec(-10.0f64..10.0, 30..80), tau in 1usize..5, m in 2usize..5) {
        let cfg = EmbeddingConfig { tau, m, observable: Axis::X, normalize: false };
        let cloud = delay_embed(&series, &cfg).unwrap();
        prop_assert_eq!(cloud.len(), series.len() - (m - 1) * tau);
        for r in 0..cloud.len() {
            for j in 0..m {
                prop_assert_eq!(cloud.point(r)[j], series[r + j * tau]);
            }
        }
    }

    #[test]
    fn downsampling_keeps_every_stride(stride in 1usize..7) {
        let tr = integrate(&LorenzParams::classic(28.0), [1.0, 1.0, 1.0], 0.01, 0.0, 2.0).unwrap();
        let ds = tr.downsample(stride);
        prop_assert!((ds.dt - 0.01 * stride as f64).abs() < 1e-15);
        for (k, s) in ds.states.iter().enumerate() {
            prop_assert_eq!(*s, tr.states[k * stride]);
        }
    }
}
