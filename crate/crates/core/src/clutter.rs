//! Sea-clutter synthesis and relative-average-amplitude detection.
//!
//! Clutter is compound Gaussian: every range cell carries a Gamma texture
//! `tau ~ Gamma(nu, 1/nu)` (unit mean) that modulates circular Gaussian
//! speckle, so amplitudes are K-distributed with shape `nu`. The texture is
//! constant along a cell's time series. Frames are normalized to unit mean
//! power after synthesis.
//!
//! The detector feature is the relative average amplitude (RAA): the mean
//! amplitude of the cell under test over the mean amplitude of its reference
//! cells. A scalar threshold on RAA, calibrated as an empirical quantile of
//! clutter-only RAA values, decides target presence.

pub mod io;

use crate::error::{domain, Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use num_complex::{Complex, Complex32};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_CELLS: usize = 14;
pub const DEFAULT_PULSES: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Polarization {
    #[default]
    HH,
    HV,
    VH,
    VV,
}

impl Polarization {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Polarization::HH),
            1 => Some(Polarization::HV),
            2 => Some(Polarization::VH),
            3 => Some(Polarization::VV),
            _ => None,
        }
    }
}

/// Complex range-time samples, stored cell-major (all pulses of cell 0 first).
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterFrame {
    cells: usize,
    pulses: usize,
    data: Vec<Complex32>,
    /// Texture shape used for synthesis; `None` for imported frames.
    pub shape_nu: Option<f64>,
    pub seed: Option<u64>,
    pub polarization: Polarization,
}

impl ClutterFrame {
    pub fn from_samples(cells: usize, pulses: usize, data: Vec<Complex32>, polarization: Polarization) -> Result<Self> {
        if cells == 0 || pulses == 0 || data.len() != cells * pulses {
            return Err(Error::Dimension(format!(
                "{} samples for {cells} cells x {pulses} pulses",
                data.len()
            )));
        }
        Ok(ClutterFrame { cells, pulses, data, shape_nu: None, seed: None, polarization })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn pulses(&self) -> usize {
        self.pulses
    }

    pub fn samples(&self) -> &[Complex32] {
        &self.data
    }

    pub fn cell(&self, c: usize) -> &[Complex32] {
        &self.data[c * self.pulses..(c + 1) * self.pulses]
    }

    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr() as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn cell_mean_power(&self, c: usize) -> f64 {
        self.cell(c).iter().map(|v| v.norm_sqr() as f64).sum::<f64>() / self.pulses as f64
    }

    /// Mean amplitude of every cell.
    pub fn cell_mean_amplitudes(&self) -> Vec<f64> {
        self.data
            .chunks(self.pulses)
            .map(|cell| cell.iter().map(|v| v.norm() as f64).sum::<f64>() / self.pulses as f64)
            .collect()
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: Complex32) -> ClutterFrame {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// K-distributed clutter frame; `nu = inf` gives Rayleigh (pure speckle).
pub fn gen_k_clutter(cells: usize, pulses: usize, nu: f64, seed: u64) -> Result<ClutterFrame> {
    if !(nu > 0.0) {
        return Err(domain(format!("texture shape nu = {nu} must be positive")));
    }
    if cells == 0 || pulses == 0 {
        return Err(Error::Dimension("frame needs at least one cell and one pulse".into()));
    }
    let texture = if nu.is_finite() {
        Some(Gamma::new(nu, 1.0 / nu).map_err(|e| domain(e.to_string()))?)
    } else {
        None
    };
    let mut data = vec![Complex32::new(0.0, 0.0); cells * pulses];
    data.par_chunks_mut(pulses).enumerate().for_each(|(c, cell)| {
        let mut rng = rng_from_seed(derive_seed(seed, "clutter-cell", c as u64));
        let tau: f64 = texture.map_or(1.0, |g| g.sample(&mut rng));
        let amp = (tau / 2.0).sqrt();
        for v in cell.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = Complex32::new((re * amp) as f32, (im * amp) as f32);
        }
    });
    let power = data.iter().map(|v| v.norm_sqr() as f64).sum::<f64>() / data.len() as f64;
    if power > 0.0 {
        let scale = power.sqrt().recip() as f32;
        data.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(ClutterFrame {
        cells,
        pulses,
        data,
        shape_nu: Some(nu),
        seed: Some(seed),
        polarization: Polarization::HH,
    })
}

/// Adds a constant-amplitude return of power `10^(scr_db/10)` (relative to
/// the unit mean clutter power) with a seeded random phase to one cell.
pub fn inject_target(frame: &ClutterFrame, cell: usize, scr_db: f64, seed: u64) -> Result<ClutterFrame> {
    if cell >= frame.cells {
        return Err(domain(format!("cell {cell} outside 0..{}", frame.cells)));
    }
    let mut out = frame.clone();
    let amplitude = 10f64.powf(scr_db / 20.0);
    if amplitude == 0.0 || scr_db.is_nan() {
        return Ok(out);
    }
    let phase = rng_from_seed(derive_seed(seed, "target-phase", 0)).random::<f64>() * 2.0 * PI;
    let signal = Complex::from_polar(amplitude, phase);
    let signal = Complex32::new(signal.re as f32, signal.im as f32);
    let p = frame.pulses;
    out.data[cell * p..(cell + 1) * p].iter_mut().for_each(|v| *v += signal);
    Ok(out)
}

/// The `n_ref` nearest cells outside the guard band around `cut`, taken
/// symmetrically (left first at equal distance) while both sides have cells.
pub fn reference_cells(cells: usize, cut: usize, guard: usize, n_ref: usize) -> Result<Vec<usize>> {
    if cut >= cells {
        return Err(domain(format!("cell under test {cut} outside 0..{cells}")));
    }
    if n_ref == 0 {
        return Err(domain("need at least one reference cell"));
    }
    let mut refs = Vec::with_capacity(n_ref);
    let mut offset = guard + 1;
    while refs.len() < n_ref {
        let left = cut.checked_sub(offset);
        let right = Some(cut + offset).filter(|&r| r < cells);
        if left.is_none() && right.is_none() {
            return Err(domain(format!(
                "only {} reference cells available around cell {cut} (guard {guard}), need {n_ref}",
                refs.len()
            )));
        }
        for c in [left, right].into_iter().flatten() {
            if refs.len() < n_ref {
                refs.push(c);
            }
        }
        offset += 1;
    }
    refs.sort_unstable();
    Ok(refs)
}

fn raa_from_means(means: &[f64], cut: usize, guard: usize, n_ref: usize) -> Result<f64> {
    let refs = reference_cells(means.len(), cut, guard, n_ref)?;
    let reference = refs.iter().map(|&c| means[c]).sum::<f64>() / refs.len() as f64;
    if !(reference > 0.0) {
        return Err(domain("reference cells have zero mean amplitude"));
    }
    Ok(means[cut] / reference)
}

/// Relative average amplitude of `cut` against its reference cells.
pub fn raa_feature(frame: &ClutterFrame, cut: usize, guard: usize, n_ref: usize) -> Result<f64> {
    raa_from_means(&frame.cell_mean_amplitudes(), cut, guard, n_ref)
}

/// RAA of every cell of the frame that has enough reference cells.
pub fn raa_all_cells(frame: &ClutterFrame, guard: usize, n_ref: usize) -> Vec<f64> {
    let means = frame.cell_mean_amplitudes();
    (0..frame.cells)
        .filter_map(|cut| raa_from_means(&means, cut, guard, n_ref).ok())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub threshold_theta: f64,
    pub target_pfa: f64,
    pub guard_cells: usize,
    pub reference_cells: usize,
}

/// Linear-interpolation quantile of ascending `sorted` at probability `q`.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn required_calibration_samples(target_pfa: f64) -> usize {
    (10.0 / target_pfa).ceil() as usize
}

/// Threshold at the `(1 - target_pfa)` quantile of clutter-only RAA values.
pub fn calibrate_threshold(raa_samples: &[f64], target_pfa: f64, guard: usize, n_ref: usize) -> Result<DetectorModel> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(domain(format!("target Pfa {target_pfa} outside (0, 1)")));
    }
    let needed = required_calibration_samples(target_pfa);
    if raa_samples.len() < needed {
        return Err(Error::Calibration(format!(
            "{} clutter-only samples, need at least {needed} for Pfa {target_pfa}",
            raa_samples.len()
        )));
    }
    let mut sorted = raa_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let theta = empirical_quantile(&sorted, 1.0 - target_pfa);
    if !(theta > 0.0) {
        return Err(Error::Calibration(format!("non-positive threshold {theta}")));
    }
    Ok(DetectorModel {
        threshold_theta: theta,
        target_pfa,
        guard_cells: guard,
        reference_cells: n_ref,
    })
}

/// Calibrates on every usable cell of clutter-only frames.
pub fn calibrate_from_frames(frames: &[ClutterFrame], target_pfa: f64, guard: usize, n_ref: usize) -> Result<DetectorModel> {
    let samples: Vec<f64> = frames.par_iter().flat_map_iter(|f| raa_all_cells(f, guard, n_ref)).collect();
    calibrate_threshold(&samples, target_pfa, guard, n_ref)
}

/// Target declared iff the RAA strictly exceeds the threshold.
pub fn detect(frame: &ClutterFrame, cut: usize, model: &DetectorModel) -> Result<bool> {
    Ok(raa_feature(frame, cut, model.guard_cells, model.reference_cells)? > model.threshold_theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocConfig {
    pub nu: f64,
    pub scr_list: Vec<f64>,
    pub target_pfa: f64,
    pub trials: usize,
    pub cells: usize,
    pub pulses: usize,
    pub guard_cells: usize,
    pub reference_cells: usize,
    pub cut: usize,
    /// Clutter-only RAA samples drawn to calibrate the threshold; raised to
    /// `ceil(10 / target_pfa)` when smaller.
    pub calibration_samples: usize,
}

impl Default for RocConfig {
    fn default() -> Self {
        RocConfig {
            nu: 1.0,
            scr_list: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            target_pfa: 1e-3,
            trials: 2000,
            cells: DEFAULT_CELLS,
            pulses: 128,
            guard_cells: 1,
            reference_cells: 8,
            cut: DEFAULT_CELLS / 2,
            calibration_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocRow {
    pub scr_db: f64,
    pub empirical_pd: f64,
    pub empirical_pfa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocReport {
    pub model: DetectorModel,
    pub rows: Vec<RocRow>,
}

/// Calibrates a fresh detector on clutter-only frames, then estimates Pfa on
/// held-out clutter and Pd per SCR with the target injected at the cell under
/// test. Every SCR reuses the same held-out frames and target phases.
pub fn roc_eval(cfg: &RocConfig, seed: u64) -> Result<RocReport> {
    if cfg.trials < 1000 {
        return Err(domain(format!("{} trials, need at least 1000", cfg.trials)));
    }
    reference_cells(cfg.cells, cfg.cut, cfg.guard_cells, cfg.reference_cells)?;
    let per_frame = (0..cfg.cells)
        .filter(|&c| reference_cells(cfg.cells, c, cfg.guard_cells, cfg.reference_cells).is_ok())
        .count();
    let wanted = cfg.calibration_samples.max(required_calibration_samples(cfg.target_pfa));
    let n_cal = wanted.div_ceil(per_frame);
    let cal_samples: Vec<f64> = (0..n_cal as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let f = gen_k_clutter(cfg.cells, cfg.pulses, cfg.nu, derive_seed(seed, "roc-calibration", i))?;
            Ok(raa_all_cells(&f, cfg.guard_cells, cfg.reference_cells))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let model = calibrate_threshold(&cal_samples, cfg.target_pfa, cfg.guard_cells, cfg.reference_cells)?;

    // per trial: false alarm flag, then detection flags per SCR
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(bool, Vec<bool>)> {
            let frame = gen_k_clutter(cfg.cells, cfg.pulses, cfg.nu, derive_seed(seed, "roc-trial", t))?;
            let false_alarm = detect(&frame, cfg.cut, &model)?;
            let target_seed = derive_seed(seed, "roc-target", t);
            let hits = cfg
                .scr_list
                .iter()
                .map(|&scr| detect(&inject_target(&frame, cfg.cut, scr, target_seed)?, cfg.cut, &model))
                .collect::<Result<Vec<_>>>()?;
            Ok((false_alarm, hits))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.trials as f64;
    let pfa = outcomes.iter().filter(|o| o.0).count() as f64 / n;
    let rows = cfg
        .scr_list
        .iter()
        .enumerate()
        .map(|(i, &scr_db)| RocRow {
            scr_db,
            empirical_pd: outcomes.iter().filter(|o| o.1[i]).count() as f64 / n,
            empirical_pfa: pfa,
        })
        .collect();
    Ok(RocReport { model, rows })
}

/// Phase-rotates a frame by `angle` radians.
pub fn rotate(frame: &ClutterFrame, angle: f64) -> ClutterFrame {
    let r = Complex::from_polar(1.0, angle);
    frame.scaled(Complex32::new(r.re as f32, r.im as f32))
}
