//! Seeded Monte-Carlo checks of the stochastic pieces against analytic references.

use hydrolink::clutter::{
    calibrate_from_frames, detect, gen_k_clutter, inject_target, raa_all_cells, roc_eval, RocConfig,
};
use hydrolink::dfe::{ber_sim, block_means, DfeConfig, DfeInit};
use hydrolink::seed::{derive_seed, rng_from_seed};
use hydrolink::sparse::{generate_sparse_channel, measure, median, DecayProfile, PilotMatrix};
use num_complex::Complex64;
use statrs::distribution::{Beta, ContinuousCDF};

/// Asymptotic Kolmogorov distribution tail, P(K > x).
fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p_value(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

fn clopper_pearson(k: usize, n: usize, alpha: f64) -> (f64, f64) {
    let lo = if k == 0 { 0.0 } else { Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(alpha / 2.0) };
    let hi = if k == n { 1.0 } else { Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}

#[test]
fn large_shape_amplitude_is_rayleigh() {
    let frame = gen_k_clutter(14, 4096, 1e6, 17).unwrap();
    let amps: Vec<f64> = frame.samples().iter().step_by(8).map(|z| z.norm() as f64).collect();
    let p = ks_p_value(amps, |r| 1.0 - (-r * r).exp());
    assert!(p > 0.01, "K-S p = {p}");
}

#[test]
fn spiky_clutter_has_heavier_tail_than_rayleigh() {
    let mut amps: Vec<f64> = (0..40)
        .flat_map(|i| {
            let f = gen_k_clutter(14, 2048, 0.5, derive_seed(5, "tail", i)).unwrap();
            f.samples().iter().map(|z| z.norm() as f64).collect::<Vec<_>>()
        })
        .collect();
    amps.sort_by(f64::total_cmp);
    let q = amps[(amps.len() as f64 * 0.999) as usize];
    let rayleigh = 1000f64.ln().sqrt();
    assert!(q > rayleigh, "99.9th percentile {q} vs Rayleigh {rayleigh}");
}

#[test]
fn calibrated_false_alarm_rate_matches_target() {
    let pfa = 0.01;
    for (i, nu) in [0.5, 1.0, 5.0, f64::INFINITY].into_iter().enumerate() {
        let cal: Vec<_> = (0..2000)
            .map(|j| gen_k_clutter(14, 32, nu, derive_seed(i as u64, "pfa-cal", j)).unwrap())
            .collect();
        let model = calibrate_from_frames(&cal, pfa, 1, 8).unwrap();
        let n = 20_000;
        let alarms = (0..n as u64)
            .filter(|&j| {
                let f = gen_k_clutter(14, 32, nu, derive_seed(i as u64, "pfa-test", j)).unwrap();
                detect(&f, 7, &model).unwrap()
            })
            .count();
        let (lo, hi) = clopper_pearson(alarms, n, 0.001);
        assert!(lo <= pfa && pfa <= hi, "nu {nu}: {alarms}/{n} alarms, CI [{lo}, {hi}]");
    }
}

#[test]
fn raa_median_near_one_for_mild_clutter() {
    for nu in [5.0, f64::INFINITY] {
        let f = gen_k_clutter(14, 1 << 17, nu, 23).unwrap();
        let mut raa = raa_all_cells(&f, 1, 8);
        let m = median(&mut raa);
        assert!((0.95..=1.05).contains(&m), "nu {nu}: median RAA {m}");
    }
}

#[test]
fn injected_target_adds_its_power() {
    let clutter = gen_k_clutter(14, 1 << 15, f64::INFINITY, 31).unwrap();
    for scr in [-10.0, 0.0, 10.0] {
        let f = inject_target(&clutter, 7, scr, 31).unwrap();
        let expected = clutter.cell_mean_power(7) + 10f64.powf(scr / 10.0);
        let got = f.cell_mean_power(7);
        assert!((got - expected).abs() < 0.02 * expected, "SCR {scr}: {got} vs {expected}");
    }
}

#[test]
fn measurement_noise_energy() {
    let (m, sigma) = (16, 0.3);
    let h = generate_sparse_channel(64, 4, DecayProfile::Flat, 2).unwrap();
    let phi = PilotMatrix::gaussian(m, 64, 3).unwrap();
    let clean = phi.apply(&h.taps).unwrap();
    let mut rng = rng_from_seed(4);
    let trials = 1000;
    let total: f64 = (0..trials)
        .map(|_| {
            let y = measure(&h.taps, &phi, sigma, &mut rng).unwrap();
            y.iter().zip(&clean).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
        })
        .sum();
    let mean = total / trials as f64;
    let expected = m as f64 * sigma * sigma;
    // chi-square with 2m dof: relative sd 1/sqrt(m trials)
    assert!((mean - expected).abs() < 4.0 * expected / ((m * trials) as f64).sqrt(), "{mean} vs {expected}");
}

fn test_channel() -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.4), Complex64::new(-0.2, 0.1)]
}

#[test]
fn ber_falls_with_snr() {
    let cfg = DfeConfig { n_ff: 8, n_fb: 4, mu: 0.01, decision_delay: 2 };
    let bers: Vec<f64> = [0.0, 4.0, 8.0, 12.0]
        .iter()
        .map(|&snr| ber_sim(&test_channel(), snr, 2000, 20_000, &cfg, &DfeInit::Cold { seed: 1 }, 8).unwrap().ber)
        .collect();
    assert!(bers.windows(2).all(|w| w[1] <= w[0]), "{bers:?}");
    assert!(bers[0] > bers[3]);
}

#[test]
fn training_error_settles() {
    let cfg = DfeConfig { n_ff: 8, n_fb: 4, mu: 0.01, decision_delay: 2 };
    let curves: Vec<Vec<f64>> = (0..8)
        .map(|s| {
            let r = ber_sim(&test_channel(), 15.0, 3000, 1000, &cfg, &DfeInit::Cold { seed: s }, 100 + s).unwrap();
            block_means(r.training_mse_curve(), 300)
        })
        .collect();
    let blocks: Vec<f64> = (0..curves[0].len())
        .map(|b| {
            let mut col: Vec<f64> = curves.iter().map(|c| c[b]).collect();
            median(&mut col)
        })
        .collect();
    for w in blocks.windows(2) {
        assert!(w[1] <= w[0] * 1.25 + 0.01, "{blocks:?}");
    }
    assert!(blocks.last().unwrap() < &(0.5 * blocks[0]), "{blocks:?}");
}

#[test]
fn no_target_detects_at_false_alarm_rate() {
    let cfg = RocConfig {
        scr_list: vec![f64::NEG_INFINITY],
        target_pfa: 0.01,
        trials: 4000,
        pulses: 32,
        calibration_samples: 10_000,
        ..RocConfig::default()
    };
    let report = roc_eval(&cfg, 77).unwrap();
    let row = report.rows[0];
    assert_eq!(row.empirical_pd, row.empirical_pfa);
    let sd = (0.01f64 * 0.99 / cfg.trials as f64).sqrt();
    assert!((row.empirical_pd - 0.01).abs() < 5.0 * sd, "Pd {}", row.empirical_pd);
}
