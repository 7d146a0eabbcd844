use adelic_market::fit::{fit, forecast, resample, rmse, FitConfig};
use adelic_market::padic::Prime;
use adelic_market::series::PriceSeries;
use adelic_market::waves::{wave_generate, PriceAffine, TimeWindow, WaveSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn wave(dim: f64) -> WaveSpec {
    WaveSpec {
        time_window: TimeWindow { start: 0.0, end: 26.0 },
        price_affine: PriceAffine { offset: 100.0, scale: 10.0 },
        ..WaveSpec::new(Prime::new(3).unwrap(), dim, 3)
    }
}

#[test]
fn resampled_sine_stays_within_interpolation_error() {
    // irregular grid on [0, 2pi]; linear interpolation error is at most h^2/8 * max|f''|
    let times: Vec<f64> = (0..200)
        .map(|i| {
            let u = i as f64 / 199.0;
            std::f64::consts::TAU * (u + 0.3 * u * (1.0 - u))
        })
        .collect();
    let h = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let values: Vec<f64> = times.iter().map(|t| 2.0 + t.sin()).collect();
    let series = PriceSeries::new(times, values, "sine").unwrap();
    let r = resample(&series, 64).unwrap();
    assert_eq!(r.len(), 64);
    assert_eq!(r.first_time(), 0.0);
    assert!((r.last_time() - std::f64::consts::TAU).abs() < 1e-12);
    for (t, v) in r.timestamps().iter().zip(r.values()) {
        assert!((v - (2.0 + t.sin())).abs() <= h * h / 8.0 + 1e-15);
    }
}

#[test]
fn rmse_matches_definition() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let b = [1.5, 1.5, 3.5, 2.0];
    // squared errors 0.25, 0.25, 0.25, 4
    assert!((rmse(&a, &b).unwrap() - (4.75f64 / 4.0).sqrt()).abs() < 1e-15);
}

#[test]
fn noisy_wave_recovers_its_parameters() {
    let spec = wave(1.6);
    let curve = wave_generate(&spec).unwrap();
    let ys = curve.ys();
    let range = ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    let sigma = 0.01 * range;
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noisy: Vec<f64> = ys.iter().map(|y| y + noise.sample(&mut rng)).collect();
    let times = curve.points.iter().map(|p| p.0).collect();
    let series = PriceSeries::new(times, noisy, "close").unwrap();

    let result = fit(&series, &FitConfig::default()).unwrap();
    assert_eq!(result.spec.p.get(), 3);
    assert_eq!(result.spec.level, 3);
    assert!((result.spec.dim - 1.6).abs() <= 0.05, "dim {}", result.spec.dim);
    assert!(result.rmse <= 1.5 * sigma, "rmse {} sigma {sigma}", result.rmse);
}

#[test]
fn fit_is_deterministic_and_forecasts_continue() {
    let curve = wave_generate(&wave(0.8)).unwrap();
    let (times, ys): (Vec<f64>, Vec<f64>) = curve.points.iter().copied().unzip();
    let series = PriceSeries::new(times, ys, "close").unwrap();
    let cfg = FitConfig::default();
    let a = serde_json::to_string(&fit(&series, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&fit(&series, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);

    let result = fit(&series, &cfg).unwrap();
    assert_eq!(result.spec.dim, 0.8);
    let ahead = forecast(&result, 3).unwrap();
    assert_eq!(ahead.timestamps, vec![27.0, 28.0, 29.0]);
}

#[test]
fn constant_series_is_flagged() {
    let series = PriceSeries::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![5.0; 5], "close").unwrap();
    let result = fit(&series, &FitConfig::default()).unwrap();
    assert!(result.degenerate);
    assert!(!result.warnings.is_empty());
    assert_eq!(result.spec.price_affine.scale, 0.0);
    assert!(result.rmse < 1e-12);
}
