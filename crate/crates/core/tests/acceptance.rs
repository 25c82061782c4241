//! Acceptance criteria. Runs every check, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use hydrolink::acoustic::{Environment, FrequencyGrid};
use hydrolink::clutter::{self, gen_k_clutter, raa_all_cells, raa_feature, RocConfig};
use hydrolink::dfe::{ber_sim, convergence_study, ConvergenceConfig, DfeConfig, DfeInit};
use hydrolink::link_budget::link_budget;
use hydrolink::relay::{energy_argmin, midpoint_comparison, relaying_threshold, sweep_relays, ChainScenario};
use hydrolink::seed::derive_seed;
use hydrolink::sparse::{self, cs_trial, generate_sparse_channel, pilot_savings_curve, DecayProfile, PilotSavingsConfig};
use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::erf::erfc;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.1} s of {} s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn link_contrast() -> Outcome {
    let start = Instant::now();
    let env = Environment::default();
    let grid = FrequencyGrid::default();
    let near = link_budget(1e3, &env, 20.0, &grid).unwrap();
    let far = link_budget(1e5, &env, 20.0, &grid).unwrap();
    let (fast, time) = within(Duration::from_secs(5), start.elapsed());
    let b_near = near.bandwidth_hz / 1e3;
    let b_far = far.bandwidth_hz / 1e3;
    let checks = [
        b_near >= 10.0,
        near.tx_power_w < 1.0,
        (0.3..=3.0).contains(&b_far),
        far.tx_power_w >= 30.0 * near.tx_power_w,
        (3.0..=300.0).contains(&far.tx_power_w),
        fast,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "B(1 km) = {b_near:.1} kHz, P(1 km) = {:.3e} W, B(100 km) = {b_far:.2} kHz, P(100 km) = {:.2} W, ratio {:.0}; {time}",
            near.tx_power_w,
            far.tx_power_w,
            far.tx_power_w / near.tx_power_w
        ),
    )
}

fn delay_spreads(sc: &ChainScenario) -> Vec<f64> {
    [1e3, 1e4, 5e4, 1e5]
        .iter()
        .map(|&d| sweep_relays(&sc.with_distance(d), 10).unwrap().delay_spread())
        .collect()
}

fn delay_flatness() -> Outcome {
    let start = Instant::now();
    let sc = ChainScenario::default();
    let spreads = delay_spreads(&sc);
    let (fast, time) = within(Duration::from_secs(10), start.elapsed());
    let worst = spreads.iter().cloned().fold(0.0, f64::max);
    // largest packet for which every distance stays under 2 %
    let (mut lo, mut hi) = (1.0, sc.packet_bits);
    for _ in 0..30 {
        let mid = (lo * hi).sqrt();
        let ok = delay_spreads(&ChainScenario { packet_bits: mid, ..sc }).iter().all(|&s| s < 0.02);
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shown: Vec<String> = spreads.iter().map(|s| format!("{:.1}%", 100.0 * s)).collect();
    outcome(
        worst < 0.02 && fast,
        format!(
            "max delay spread over n = 0..10 at D = 1/10/50/100 km: {} (limit 2%); flat only for packets <= {lo:.0} bits; {time}",
            shown.join("/")
        ),
    )
}

fn best_midpoint(sc: &ChainScenario) -> (f64, f64, f64) {
    (1..=10)
        .map(|i| midpoint_comparison(&sc.with_distance(1e4 * i as f64)).unwrap())
        .filter(|m| m.delay_increase_pct <= 2.0)
        .map(|m| (m.energy_reduction_pct, m.delay_increase_pct, m.total_distance_m))
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

fn midpoint_relay() -> Outcome {
    let sc = ChainScenario::default();
    let (reduction, delay, at) = best_midpoint(&sc);
    let (mut lo, mut hi) = (1e-4, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if best_midpoint(&ChainScenario { efficiency: mid, ..sc }).0 >= 50.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    outcome(
        reduction >= 50.0,
        format!(
            "best midpoint reduction {reduction:.2}% with delay change {delay:+.2}% at {:.0} km (need >= 50%, <= 2%); reaching 50% needs efficiency <= {lo:.3}",
            at / 1e3
        ),
    )
}

fn relaying_threshold_check() -> Outcome {
    let start = Instant::now();
    let sc = ChainScenario::default();
    let n_max = 20;
    let d_star = relaying_threshold(&sc, 1e3, 1e5, n_max, 1.0).unwrap();
    let below = energy_argmin(&sc.with_distance(d_star - 50.0), n_max).unwrap();
    let above = energy_argmin(&sc.with_distance(d_star + 50.0), n_max).unwrap();
    let short = energy_argmin(&sc.with_distance(5e3), n_max).unwrap();
    let (fast, time) = within(Duration::from_secs(30), start.elapsed());
    outcome(
        d_star > 0.0 && d_star <= 1e5 && below == 0 && above >= 1 && short == 0 && fast,
        format!(
            "D* = {:.2} km; argmin n = {below} at D* - 50 m, {above} at D* + 50 m; {time}",
            d_star / 1e3
        ),
    )
}

fn sparsity_contract() -> Outcome {
    let start = Instant::now();
    let shapes = [(64, 3), (64, 6), (30, 3), (100, 10), (20, 1)];
    let decays = [DecayProfile::Flat, DecayProfile::Exponential { decay_taps: 8.0 }];
    let violations = (0..1000u64)
        .filter(|&i| {
            let (n, s) = shapes[i as usize % shapes.len()];
            let decay = decays[i as usize / shapes.len() % 2];
            let h = generate_sparse_channel(n, s, decay, derive_seed(SEED, "accept-sparse", i)).unwrap();
            let mut powers: Vec<f64> = h.taps.iter().map(|t| t.norm_sqr()).collect();
            let total: f64 = powers.iter().sum();
            let nonzero = powers.iter().filter(|&&p| p > 0.0).count();
            powers.sort_by(|a, b| b.total_cmp(a));
            let k = n / 10;
            let top: f64 = powers[..k].iter().sum();
            !(nonzero * 10 <= n && top >= 0.85 * total && (total - 1.0).abs() < 1e-9)
        })
        .count();
    let (fast, time) = within(Duration::from_secs(5), start.elapsed());
    outcome(violations == 0 && fast, format!("{violations} of 1000 channels violate the 10%/85% contract; {time}"))
}

fn cs_recovery() -> Outcome {
    let start = Instant::now();
    let cfg = PilotSavingsConfig { n: 64, s: 3, ..Default::default() };
    let exact = (0..500u64)
        .into_par_iter()
        .filter(|&t| cs_trial(&cfg, 20, SEED, t).unwrap() < 1e-8)
        .count();
    let curve = pilot_savings_curve(&cfg, SEED).unwrap();
    // medians at the exact-recovery floor differ only by rounding
    let monotone = curve
        .windows(2)
        .all(|w| w[1].median_nmse <= w[0].median_nmse * (1.0 + 1e-9) + 1e-20);
    let (fast, time) = within(Duration::from_secs(60), start.elapsed());
    let first_exact = curve.iter().find(|r| r.median_nmse < 1e-8).map_or(0, |r| r.m);
    let shown: Vec<String> = curve.iter().take(4).map(|r| format!("{}:{:.3}", r.m, r.median_nmse)).collect();
    let mut wide: Vec<f64> = (0..5000u64)
        .into_par_iter()
        .map(|t| cs_trial(&cfg, 4, derive_seed(SEED, "accept-cs-wide", 0), t).unwrap())
        .collect();
    let wide_median = sparse::median(&mut wide);
    outcome(
        exact >= 495 && monotone && fast,
        format!(
            "exact recovery in {exact}/500 trials at m = 20; median NMSE over 200 trials monotone in m: {monotone} (m:median {} ..., exact from m = {first_exact}; 5000-trial median at m = 4 is {wide_median:.3}); {time}",
            shown.join(" ")
        ),
    )
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

/// Minimum mean squared error of a finite-length DFE with correct past
/// decisions, solved directly from the channel statistics.
fn mmse_dfe_floor(h: &[Complex<f64>], n_ff: usize, n_fb: usize, delay: usize, n0: f64) -> f64 {
    let span = (n_ff + h.len() - 1).max(delay + 1 + n_fb);
    let rows = n_ff + n_fb;
    let mut a = DMatrix::<Complex<f64>>::zeros(rows, span);
    for j in 0..n_ff {
        for (l, &hl) in h.iter().enumerate() {
            a[(j, j + l)] = hl;
        }
    }
    for i in 0..n_fb {
        a[(n_ff + i, delay + 1 + i)] = Complex::new(-1.0, 0.0);
    }
    let mut r = &a * a.adjoint();
    for j in 0..n_ff {
        r[(j, j)] += Complex::new(n0, 0.0);
    }
    let p: DVector<Complex<f64>> = a.column(delay).into();
    let w = r.lu().solve(&p).expect("regular autocorrelation");
    1.0 - (p.adjoint() * w)[(0, 0)].re
}

fn dfe_checks() -> Outcome {
    let start = Instant::now();
    let snr_db = 8.0;
    let n_data = 1_000_000;
    let isi_free = DfeConfig { n_ff: 1, n_fb: 0, mu: 0.01, decision_delay: 0 };
    let one = [Complex::new(1.0, 0.0)];
    let r = ber_sim(&one, snr_db, 2000, n_data, &isi_free, &DfeInit::Cold { seed: SEED }, SEED).unwrap();
    let p = q_function((2.0 * 10f64.powf(snr_db / 10.0)).sqrt());
    let sigma = (p * (1.0 - p) / n_data as f64).sqrt();
    let ber_ok = (r.ber - p).abs() <= 3.0 * sigma;

    let cfg = ConvergenceConfig {
        dfe: DfeConfig { n_ff: 32, n_fb: 30, mu: 0.005, decision_delay: 30 },
        snr_db: 15.0,
        n_train: 4000,
        pilots: 20,
        max_sparsity: 3,
        mse_target: 0.05,
        window: 100,
        runs: 20,
    };
    let n0 = 10f64.powf(-cfg.snr_db / 10.0);
    // first seeded channel on which the target is reachable with margin
    let (index, channel, floor) = (0u64..)
        .map(|k| {
            let h = generate_sparse_channel(30, 3, DecayProfile::Exponential { decay_taps: 8.0 }, k).unwrap();
            let floor = mmse_dfe_floor(&h.taps, cfg.dfe.n_ff, cfg.dfe.n_fb, cfg.dfe.decision_delay, n0);
            (k, h, floor)
        })
        .find(|(_, _, floor)| *floor <= 0.8 * cfg.mse_target)
        .unwrap();
    let study = convergence_study(&channel.taps, &cfg, SEED).unwrap();
    let reduction = study.reduction();
    let (fast, time) = within(Duration::from_secs(300), start.elapsed());
    outcome(
        ber_ok && reduction >= 0.5 && fast,
        format!(
            "ISI-free BER {:.3e} vs Q = {p:.3e} (3 sigma {:.1e}); channel seed {index} (MMSE floor {floor:.4}): median symbols to MSE 0.05 cold {} vs CS {}, reduction {:.0}%; {time}",
            r.ber,
            3.0 * sigma,
            study.median_cold(),
            study.median_cs(),
            100.0 * reduction
        ),
    )
}

/// Two-sided Clopper-Pearson interval for `k` successes in `n` trials.
fn clopper_pearson(k: usize, n: usize, alpha: f64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let lo = if k == 0.0 { 0.0 } else { Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0) };
    let hi = if k == n { 1.0 } else { Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}

fn detector_calibration() -> Outcome {
    let start = Instant::now();
    let (cells, pulses, cut, pfa) = (14, 64, 7, 1e-3);
    let calibration_frames = 1_000_000usize.div_ceil(cells);
    let held_out = 100_000usize;
    let mut details = Vec::new();
    let mut pass = true;
    for (i, nu) in [0.5, 1.0, 5.0].into_iter().enumerate() {
        let seed = derive_seed(SEED, "accept-detector", i as u64);
        let samples: Vec<f64> = (0..calibration_frames as u64)
            .into_par_iter()
            .flat_map_iter(|f| raa_all_cells(&gen_k_clutter(cells, pulses, nu, derive_seed(seed, "cal", f)).unwrap(), 1, 8))
            .collect();
        let model = clutter::calibrate_threshold(&samples, pfa, 1, 8).unwrap();
        let alarms = (0..held_out as u64)
            .into_par_iter()
            .filter(|&f| {
                let frame = gen_k_clutter(cells, pulses, nu, derive_seed(seed, "test", f)).unwrap();
                clutter::detect(&frame, cut, &model).unwrap()
            })
            .count();
        let (lo, hi) = clopper_pearson(alarms, held_out, 0.05);
        let ok = lo <= pfa && pfa <= hi;
        pass &= ok;
        details.push(format!("nu {nu}: Pfa {:.2e} CI [{lo:.2e}, {hi:.2e}]", alarms as f64 / held_out as f64));
    }

    let roc = clutter::roc_eval(
        &RocConfig { nu: 1.0, scr_list: vec![-5.0, 0.0, 5.0, 10.0, 15.0], pulses, trials: 2000, ..Default::default() },
        SEED,
    )
    .unwrap();
    let pd: Vec<f64> = roc.rows.iter().map(|r| r.empirical_pd).collect();
    let monotone = pd.windows(2).all(|w| w[1] >= w[0]);
    pass &= monotone;
    details.push(format!("Pd over SCR -5..15 dB: {pd:?}"));

    let homogeneous = gen_k_clutter(cells, 1 << 17, f64::INFINITY, SEED).unwrap();
    let worst = (0..cells)
        .map(|c| (raa_feature(&homogeneous, c, 1, 8).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    pass &= worst <= 0.01;
    details.push(format!("homogeneous RAA max |RAA - 1| = {:.4}", worst));

    let (fast, time) = within(Duration::from_secs(300), start.elapsed());
    details.push(time);
    outcome(pass && fast, details.join("; "))
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_hydrolink");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let commands = ["link-budget", "relay-sweep", "cs-bench", "dfe-ber", "clutter-roc"];
    for dir in &dirs {
        for cmd in commands {
            let status = Command::new(exe)
                .args([cmd, "--seed", "11", "--out-dir"])
                .arg(dir.path())
                .env_remove("HYDROLINK_OUT_DIR")
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            if !status.success() {
                return outcome(false, format!("{cmd} exited with {status}"));
            }
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| read(&dirs[0].path().join(n)) != read(&dirs[1].path().join(n)))
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    outcome(
        differing.is_empty() && names.len() == 7,
        format!("{} CSV files from 5 commands, {} differ between runs", names.len(), differing.len()),
    )
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("bandwidth/power contrast", link_contrast),
        ("delay flatness", delay_flatness),
        ("midpoint relay", midpoint_relay),
        ("relaying threshold", relaying_threshold_check),
        ("sparsity contract", sparsity_contract),
        ("CS recovery", cs_recovery),
        ("DFE correctness", dfe_checks),
        ("detector calibration", detector_calibration),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked"));
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
