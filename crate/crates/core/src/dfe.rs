//! Adaptive decision feedback equalizer for BPSK.
//!
//! Symbol-spaced feedforward and feedback filters adapted by LMS. At time `k`
//! the feedforward window holds `x[k], x[k-1], ...` and the output estimates
//! the symbol `s[k - delay]`:
//!
//! ```text
//! z = sum_j ff[j] x[k-j]  -  sum_i fb[i] d[k-delay-1-i]
//! ```
//!
//! where `d` are the fed-back symbols (known symbols while training, slicer
//! decisions afterwards).

use crate::error::{domain, Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::sparse::{complex_gaussian, measure, omp_reconstruct, OmpStop, PilotMatrix};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfeConfig {
    pub n_ff: usize,
    pub n_fb: usize,
    pub mu: f64,
    /// Symbols between a sample entering the feedforward filter and the
    /// decision on the symbol that produced its main path.
    pub decision_delay: usize,
}

impl Default for DfeConfig {
    fn default() -> Self {
        DfeConfig {
            n_ff: 12,
            n_fb: 8,
            mu: 0.01,
            decision_delay: 0,
        }
    }
}

impl DfeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ff < 1 {
            return Err(domain("n_ff must be at least 1"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(domain(format!("step size mu = {} outside (0, 1)", self.mu)));
        }
        if self.decision_delay >= self.n_ff {
            return Err(domain(format!(
                "decision delay {} must be below n_ff = {}",
                self.decision_delay, self.n_ff
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfeMode {
    Training,
    DecisionDirected,
}

/// How the taps start out.
#[derive(Debug, Clone, PartialEq)]
pub enum DfeInit {
    /// Small seeded random taps.
    Cold { seed: u64 },
    /// Taps derived from a channel impulse response estimate.
    FromEstimate(Vec<Complex64>),
}

/// Standard deviation of cold-start taps.
pub const COLD_TAP_STD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DfeState {
    pub ff_taps: Vec<Complex64>,
    pub fb_taps: Vec<Complex64>,
    pub step_mu: f64,
    pub mode: DfeMode,
    pub decision_delay: usize,
    ff_window: VecDeque<Complex64>,
    fb_window: VecDeque<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub output: Complex64,
    /// BPSK slicer decision, `+1` for a non-negative real part.
    pub decision: Complex64,
    pub error: Complex64,
}

fn slice(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

/// Builds an equalizer in training mode.
///
/// From an estimate the strongest path becomes the cursor: the feedforward
/// filter is the one-tap matched filter `conj(h_c) / |h_c|^2` placed so the
/// cursor lines up with the decision delay, and feedback tap `i` cancels the
/// post-cursor path `h[c + 1 + i] / h_c`.
pub fn dfe_init(cfg: &DfeConfig, init: &DfeInit) -> Result<DfeState> {
    cfg.validate()?;
    let mut ff_taps = vec![ZERO; cfg.n_ff];
    let mut fb_taps = vec![ZERO; cfg.n_fb];
    match init {
        DfeInit::Cold { seed } => {
            let mut rng = rng_from_seed(*seed);
            ff_taps.iter_mut().chain(fb_taps.iter_mut()).for_each(|t| *t = complex_gaussian(&mut rng, COLD_TAP_STD));
        }
        DfeInit::FromEstimate(h) => {
            let (cursor, peak) = h
                .iter()
                .enumerate()
                .fold((0, 0.0), |(bi, bv), (i, v)| if v.norm() > bv { (i, v.norm()) } else { (bi, bv) });
            if peak == 0.0 {
                return Err(domain("channel estimate has no energy"));
            }
            if cfg.decision_delay < cursor || cfg.decision_delay - cursor >= cfg.n_ff {
                return Err(Error::Config(format!(
                    "strongest path at tap {cursor} cannot be aligned with decision delay {} and {} feedforward taps",
                    cfg.decision_delay, cfg.n_ff
                )));
            }
            let hc = h[cursor];
            ff_taps[cfg.decision_delay - cursor] = hc.conj() / hc.norm_sqr();
            for (i, fb) in fb_taps.iter_mut().enumerate() {
                if let Some(post) = h.get(cursor + 1 + i) {
                    *fb = post / hc;
                }
            }
        }
    }
    Ok(DfeState {
        ff_taps,
        fb_taps,
        step_mu: cfg.mu,
        mode: DfeMode::Training,
        decision_delay: cfg.decision_delay,
        ff_window: VecDeque::from(vec![ZERO; cfg.n_ff]),
        fb_window: VecDeque::from(vec![ZERO; cfg.n_fb]),
    })
}

impl DfeState {
    pub fn set_mode(&mut self, mode: DfeMode) {
        self.mode = mode;
    }

    /// Shifts a sample into the feedforward window without producing output.
    pub fn prime(&mut self, input: Complex64) {
        self.ff_window.pop_back();
        self.ff_window.push_front(input);
    }

    /// Filters one sample, slices, and adapts the taps by LMS.
    ///
    /// The error is taken against `desired` when given and against the
    /// decision otherwise; training mode requires `desired`.
    pub fn step(&mut self, input: Complex64, desired: Option<Complex64>) -> Result<StepOutput> {
        if self.mode == DfeMode::Training && desired.is_none() {
            return Err(domain("training mode needs the desired symbol"));
        }
        self.prime(input);
        let forward: Complex64 = self.ff_taps.iter().zip(&self.ff_window).map(|(w, x)| w * x).sum();
        let feedback: Complex64 = self.fb_taps.iter().zip(&self.fb_window).map(|(b, d)| b * d).sum();
        let output = forward - feedback;
        let decision = slice(output);
        let reference = desired.unwrap_or(decision);
        let error = reference - output;
        let g = error * self.step_mu;
        for (w, x) in self.ff_taps.iter_mut().zip(&self.ff_window) {
            *w += g * x.conj();
        }
        for (b, d) in self.fb_taps.iter_mut().zip(&self.fb_window) {
            *b -= g * d.conj();
        }
        if !self.fb_window.is_empty() {
            self.fb_window.pop_back();
            self.fb_window.push_front(reference);
        }
        Ok(StepOutput { output, decision, error })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub ber: f64,
    pub bit_errors: usize,
    pub n_data: usize,
    /// `|s - z|^2` against the transmitted symbol, for every training and
    /// data symbol in order.
    pub squared_errors: Vec<f64>,
    pub n_train: usize,
}

impl BerResult {
    pub fn training_mse_curve(&self) -> &[f64] {
        &self.squared_errors[..self.n_train]
    }
}

/// Noise variance per complex sample for unit-energy symbols at `snr_db`.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Passes random BPSK symbols through `channel` plus AWGN, trains the
/// equalizer on the first `n_train` symbols and counts decision errors over
/// the next `n_data`.
///
/// SNR is symbol energy over the complex noise variance, so an ideal channel
/// gives a bit error rate of `Q(sqrt(2 snr))`. Symbols and noise come from
/// streams derived from `seed` alone, so cold and initialized runs with the
/// same seed see identical inputs.
pub fn ber_sim(
    channel: &[Complex64],
    snr_db: f64,
    n_train: usize,
    n_data: usize,
    cfg: &DfeConfig,
    init: &DfeInit,
    seed: u64,
) -> Result<BerResult> {
    if channel.is_empty() {
        return Err(domain("empty channel"));
    }
    if n_data < 1000 {
        return Err(domain(format!("n_data = {n_data}, need at least 1000")));
    }
    let mut dfe = dfe_init(cfg, init)?;
    let delay = cfg.decision_delay;
    let total = n_train + n_data;
    let mut sym_rng = rng_from_seed(derive_seed(seed, "dfe-symbols", 0));
    let mut noise_rng = rng_from_seed(derive_seed(seed, "dfe-noise", 0));
    let symbols: Vec<Complex64> = (0..total + delay)
        .map(|_| if sym_rng.random::<bool>() { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) })
        .collect();
    let noise_std = if snr_db.is_finite() { noise_variance(snr_db).sqrt() } else { 0.0 };

    let mut squared_errors = Vec::with_capacity(total);
    let mut bit_errors = 0;
    for k in 0..total + delay {
        let mut x: Complex64 = channel
            .iter()
            .enumerate()
            .take(k + 1)
            .map(|(i, h)| h * symbols[k - i])
            .sum();
        if noise_std > 0.0 {
            x += complex_gaussian(&mut noise_rng, noise_std);
        }
        if k < delay {
            dfe.prime(x);
            continue;
        }
        let t = k - delay;
        let out = if t < n_train {
            dfe.step(x, Some(symbols[t]))?
        } else {
            if t == n_train {
                dfe.set_mode(DfeMode::DecisionDirected);
            }
            let out = dfe.step(x, None)?;
            if out.decision != symbols[t] {
                bit_errors += 1;
            }
            out
        };
        squared_errors.push((symbols[t] - out.output).norm_sqr());
    }
    Ok(BerResult {
        ber: bit_errors as f64 / n_data as f64,
        bit_errors,
        n_data,
        squared_errors,
        n_train,
    })
}

/// Number of symbols until the trailing `window`-symbol mean squared error
/// first drops to `target`.
pub fn symbols_to_reach_mse(squared_errors: &[f64], target: f64, window: usize) -> Option<usize> {
    if window == 0 {
        return None;
    }
    squared_errors
        .windows(window)
        .position(|w| w.iter().sum::<f64>() / window as f64 <= target)
        .map(|k| k + window)
}

/// Compressed-sensing channel estimate from `m_pilots` unit-energy pilot
/// symbols at `snr_db`, reconstructed by OMP with at most `max_sparsity`
/// paths and a noise-level residual stop.
pub fn cs_channel_estimate(
    channel: &[Complex64],
    m_pilots: usize,
    snr_db: f64,
    max_sparsity: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let n = channel.len();
    let phi = PilotMatrix::gaussian(m_pilots, n, derive_seed(seed, "dfe-pilots", 0))?;
    // unit-energy pilots give columns of norm sqrt(m); normalizing them
    // scales the noise down by the same factor
    let noise_std = if snr_db.is_finite() { (noise_variance(snr_db) / m_pilots as f64).sqrt() } else { 0.0 };
    let mut rng = rng_from_seed(derive_seed(seed, "dfe-pilot-noise", 0));
    let y = measure(channel, &phi, noise_std, &mut rng)?;
    let mut stop = OmpStop::default_for(n, &y);
    stop.max_sparsity = max_sparsity.max(1);
    stop.residual_tol = stop.residual_tol.max(noise_std * (m_pilots as f64).sqrt());
    Ok(omp_reconstruct(&y, &phi, stop)?.estimate)
}

/// Paired comparison of cold-start and CS-initialized training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub dfe: DfeConfig,
    pub snr_db: f64,
    pub n_train: usize,
    pub pilots: usize,
    pub max_sparsity: usize,
    pub mse_target: f64,
    pub window: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRun {
    /// Training symbols until the windowed MSE reaches the target; `None`
    /// when it never does within `n_train`.
    pub cold: Option<usize>,
    pub cs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub runs: Vec<ConvergenceRun>,
    /// Mean squared error per training block of `window` symbols, averaged
    /// over runs.
    pub cold_curve: Vec<f64>,
    pub cs_curve: Vec<f64>,
}

fn median_symbols(values: impl Iterator<Item = Option<usize>>) -> f64 {
    let mut v: Vec<f64> = values.map(|x| x.map_or(f64::INFINITY, |n| n as f64)).collect();
    crate::sparse::median(&mut v)
}

impl ConvergenceReport {
    /// Median symbols-to-target; runs that never converge count as infinite.
    pub fn median_cold(&self) -> f64 {
        median_symbols(self.runs.iter().map(|r| r.cold))
    }

    pub fn median_cs(&self) -> f64 {
        median_symbols(self.runs.iter().map(|r| r.cs))
    }

    /// `1 - median_cs / median_cold`; NaN when neither converges.
    pub fn reduction(&self) -> f64 {
        let (cold, cs) = (self.median_cold(), self.median_cs());
        if cold.is_infinite() {
            return if cs.is_finite() { 1.0 } else { f64::NAN };
        }
        1.0 - cs / cold
    }
}

/// Means of consecutive non-overlapping blocks of `window` values; a short
/// tail is dropped.
pub fn block_means(values: &[f64], window: usize) -> Vec<f64> {
    values
        .chunks_exact(window.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Trains a cold-start and a CS-initialized equalizer on the same symbols and
/// noise for every run. Each run draws its own pilots for the estimate.
pub fn convergence_study(channel: &[Complex64], cfg: &ConvergenceConfig, seed: u64) -> Result<ConvergenceReport> {
    if cfg.runs == 0 || cfg.window == 0 || cfg.n_train < cfg.window {
        return Err(domain("convergence study needs runs >= 1 and n_train >= window >= 1"));
    }
    let results = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|r| -> Result<(BerResult, BerResult)> {
            let run_seed = derive_seed(seed, "dfe-run", r);
            let estimate = cs_channel_estimate(
                channel,
                cfg.pilots,
                cfg.snr_db,
                cfg.max_sparsity,
                derive_seed(seed, "dfe-estimate", r),
            )?;
            let cold_init = DfeInit::Cold { seed: derive_seed(seed, "dfe-cold-taps", r) };
            let cold = ber_sim(channel, cfg.snr_db, cfg.n_train, 1000, &cfg.dfe, &cold_init, run_seed)?;
            let cs = ber_sim(channel, cfg.snr_db, cfg.n_train, 1000, &cfg.dfe, &DfeInit::FromEstimate(estimate), run_seed)?;
            Ok((cold, cs))
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = results
        .iter()
        .map(|(cold, cs)| ConvergenceRun {
            cold: symbols_to_reach_mse(cold.training_mse_curve(), cfg.mse_target, cfg.window),
            cs: symbols_to_reach_mse(cs.training_mse_curve(), cfg.mse_target, cfg.window),
        })
        .collect();
    let mean_curve = |pick: fn(&(BerResult, BerResult)) -> &BerResult| {
        let mut acc = vec![0.0; cfg.n_train];
        for r in &results {
            acc.iter_mut().zip(pick(r).training_mse_curve()).for_each(|(a, e)| *a += e);
        }
        acc.iter_mut().for_each(|a| *a /= results.len() as f64);
        block_means(&acc, cfg.window)
    };
    Ok(ConvergenceReport {
        runs,
        cold_curve: mean_curve(|r| &r.0),
        cs_curve: mean_curve(|r| &r.1),
    })
}
