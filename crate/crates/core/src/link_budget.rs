//! Per-hop link budget: optimal band, source level, transmit power, bit rate.
//!
//! The target SNR is met in aggregate over the 3-dB band: the source level is
//! `snr + 10 log10(integral of A(l,f) N(f) df)` with the integral taken by the
//! trapezoid rule over the grid points of the band (f in Hz).

use crate::acoustic::{an_product_db, band_from_profile, an_profile_db, Band, Environment, FrequencyGrid};
use crate::error::{domain, Error, Result};
use serde::Serialize;

/// Source level (dB re uPa at 1 m) radiating one acoustic watt from an
/// omnidirectional projector in seawater.
pub const SOURCE_LEVEL_PER_WATT_DB: f64 = 170.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub f_opt_khz: f64,
    pub f_lo_khz: f64,
    pub f_hi_khz: f64,
    pub bandwidth_hz: f64,
    pub source_level_db: f64,
    /// Electrical transmit power, i.e. acoustic power over the efficiency.
    pub tx_power_w: f64,
    /// BPSK at 1 bit/s/Hz, so this equals the bandwidth.
    pub bit_rate_bps: f64,
    pub narrow_band: bool,
}

/// Trapezoid integral of a dB-valued spectral profile sampled at `freqs_khz`,
/// returned in dB. A single sample is integrated over `single_width_hz`.
pub fn integrate_profile_db(values_db: &[f64], freqs_khz: &[f64], single_width_hz: f64) -> Result<f64> {
    if values_db.len() != freqs_khz.len() {
        return Err(Error::Dimension(format!(
            "{} profile values for {} frequencies",
            values_db.len(),
            freqs_khz.len()
        )));
    }
    match values_db.len() {
        0 => Err(Error::Config("empty band".into())),
        1 => Ok(values_db[0] + 10.0 * single_width_hz.log10()),
        _ => {
            let lin: Vec<f64> = values_db.iter().map(|v| 10f64.powf(v / 10.0)).collect();
            let integral: f64 = lin
                .windows(2)
                .zip(freqs_khz.windows(2))
                .map(|(v, f)| 0.5 * (v[0] + v[1]) * (f[1] - f[0]) * 1000.0)
                .sum();
            Ok(10.0 * integral.log10())
        }
    }
}

/// Source level that meets `snr_db` over `band` at distance `l_m`.
pub fn required_source_level(
    l_m: f64,
    env: &Environment,
    band: &Band,
    snr_db: f64,
    grid: &FrequencyGrid,
) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(domain(format!("snr {snr_db} dB is not finite")));
    }
    if band.hi_index < band.lo_index || band.hi_index >= grid.len() {
        return Err(Error::Config("empty band".into()));
    }
    let freqs: Vec<f64> = (band.lo_index..=band.hi_index).map(|i| grid.at(i)).collect();
    let values = freqs
        .iter()
        .map(|&f| an_product_db(l_m, f, env))
        .collect::<Result<Vec<_>>>()?;
    Ok(snr_db + integrate_profile_db(&values, &freqs, grid.step_khz * 1000.0)?)
}

/// Acoustic power in watts radiated at source level `sl_db`.
pub fn acoustic_power_watts(sl_db: f64) -> f64 {
    10f64.powf((sl_db - SOURCE_LEVEL_PER_WATT_DB) / 10.0)
}

/// Link budget with unit electroacoustic efficiency.
pub fn link_budget(l_m: f64, env: &Environment, snr_db: f64, grid: &FrequencyGrid) -> Result<LinkBudget> {
    link_budget_with_efficiency(l_m, env, snr_db, 1.0, grid)
}

pub fn link_budget_with_efficiency(
    l_m: f64,
    env: &Environment,
    snr_db: f64,
    efficiency: f64,
    grid: &FrequencyGrid,
) -> Result<LinkBudget> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(domain(format!("efficiency {efficiency} outside (0, 1]")));
    }
    let profile = an_profile_db(l_m, env, grid)?;
    let band = band_from_profile(&profile, grid)?;
    let sl = required_source_level(l_m, env, &band, snr_db, grid)?;
    let bandwidth_hz = band.bandwidth_hz();
    Ok(LinkBudget {
        distance_m: l_m,
        f_opt_khz: band.f_opt_khz,
        f_lo_khz: band.f_lo_khz,
        f_hi_khz: band.f_hi_khz,
        bandwidth_hz,
        source_level_db: sl,
        tx_power_w: acoustic_power_watts(sl) / efficiency,
        bit_rate_bps: bandwidth_hz,
        narrow_band: band.narrow,
    })
}
