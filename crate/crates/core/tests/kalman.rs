use palmnav_core::rng::rng_for;
use palmnav_core::track::{
    asymmetry, is_positive_definite, kf_init, kf_predict, kf_update, nis, TrackConfig,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Constant-velocity truth driven by the filter's own process model, with
/// measurement noise matched to `R`.
struct Run {
    filtered_rmse: f64,
    measured_rmse: f64,
    mean_nis: f64,
}

fn matched_run(seed: u64, steps: usize, dt: f64) -> Run {
    let cfg = TrackConfig::default();
    let mut rng = rng_for(seed, "kalman");
    let meas = Normal::new(0.0, cfg.r[0][0].sqrt()).unwrap();
    let accel = Normal::new(0.0, cfg.sigma_a * dt.sqrt()).unwrap();
    let prior_p = Normal::new(0.0, cfg.sigma_p).unwrap();
    let prior_v = Normal::new(0.0, cfg.sigma_v).unwrap();
    let mut truth = [
        320.0 + prior_p.sample(&mut rng),
        240.0 + prior_p.sample(&mut rng),
        prior_v.sample(&mut rng),
        prior_v.sample(&mut rng),
    ];
    let mut s = kf_init([320.0, 240.0], &cfg).unwrap();
    let (mut fe, mut me, mut nis_sum) = (0.0, 0.0, 0.0);
    for _ in 0..steps {
        truth = [
            truth[0] + dt * truth[2],
            truth[1] + dt * truth[3],
            truth[2] + accel.sample(&mut rng),
            truth[3] + accel.sample(&mut rng),
        ];
        let z = [
            truth[0] + meas.sample(&mut rng),
            truth[1] + meas.sample(&mut rng),
        ];
        s = kf_predict(&s, dt).unwrap();
        nis_sum += nis(&s, z).unwrap();
        s = kf_update(&s, z).unwrap();
        fe += (s.mean[0] - truth[0]).powi(2) + (s.mean[1] - truth[1]).powi(2);
        me += (z[0] - truth[0]).powi(2) + (z[1] - truth[1]).powi(2);
    }
    let n = steps as f64;
    Run {
        filtered_rmse: (fe / n).sqrt(),
        measured_rmse: (me / n).sqrt(),
        mean_nis: nis_sum / n,
    }
}

#[test]
fn matched_noise_filter_beats_raw_measurements() {
    for seed in 0..5 {
        let run = matched_run(seed, 500, 0.05);
        assert!(
            run.filtered_rmse <= run.measured_rmse,
            "seed {seed}: {} > {}",
            run.filtered_rmse,
            run.measured_rmse
        );
        assert!(
            (1.0..=3.5).contains(&run.mean_nis),
            "seed {seed}: nis {}",
            run.mean_nis
        );
    }
}

#[test]
fn repeated_updates_match_precision_weighted_mean() {
    let cfg = TrackConfig {
        sigma_a: 0.0,
        ..TrackConfig::default()
    };
    let mut rng = rng_for(3, "stationary");
    let noise = Normal::new(0.0, 2.0).unwrap();
    let p0 = [100.0, 50.0];
    let mut s = kf_init(p0, &cfg).unwrap();
    let (prior, r) = (cfg.sigma_p * cfg.sigma_p, cfg.r[0][0]);
    let mut sums = [0.0; 2];
    let mut last_var = f64::INFINITY;
    for n in 1..=200 {
        let z = [
            103.0 + noise.sample(&mut rng),
            47.0 + noise.sample(&mut rng),
        ];
        sums[0] += z[0];
        sums[1] += z[1];
        s = kf_update(&s, z).unwrap();
        let info = 1.0 / prior + n as f64 / r;
        for a in 0..2 {
            let expected = (p0[a] / prior + sums[a] / r) / info;
            assert!((s.mean[a] - expected).abs() < 1e-9, "step {n}");
            assert!((s.cov[a][a] - 1.0 / info).abs() < 1e-9);
        }
        assert!(s.cov[0][0] <= last_var);
        last_var = s.cov[0][0];
    }
    assert!((s.mean[0] - sums[0] / 200.0).abs() < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn covariance_stays_symmetric_positive_definite(seed in any::<u64>()) {
        let cfg = TrackConfig::default();
        let mut rng = rng_for(seed, "random-inputs");
        let mut s = kf_init([rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)], &cfg).unwrap();
        for _ in 0..1000 {
            s = kf_predict(&s, rng.random_range(0.001..0.5)).unwrap();
            if rng.random_bool(0.7) {
                s = kf_update(&s, [rng.random_range(-100.0..800.0), rng.random_range(-100.0..600.0)]).unwrap();
            }
            prop_assert!(asymmetry(&s.cov) <= 1e-9);
            prop_assert!(is_positive_definite(&s.cov));
            prop_assert!(s.age >= 0.0);
        }
    }
}
