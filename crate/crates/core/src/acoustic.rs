//! Frequency- and distance-dependent attenuation and ambient noise.
//!
//! Attenuation uses the Thorp absorption polynomial on top of a
//! `k * 10 log10(l)` spreading term referenced to 1 m. Ambient noise is the
//! power sum of turbulence, shipping, wind and thermal components. Distances
//! are in meters, frequencies in kHz, absorption is applied per km.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// Propagation environment: spreading exponent, shipping activity, wind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub spreading_k: f64,
    pub shipping_s: f64,
    pub wind_w: f64,
}

impl Default for Environment {
    /// Practical spreading (k = 1.5), moderate shipping (s = 0.5), no wind.
    fn default() -> Self {
        Environment {
            spreading_k: 1.5,
            shipping_s: 0.5,
            wind_w: 0.0,
        }
    }
}

impl Environment {
    pub fn new(spreading_k: f64, shipping_s: f64, wind_w: f64) -> Result<Self> {
        let env = Environment {
            spreading_k,
            shipping_s,
            wind_w,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.spreading_k) {
            return Err(domain(format!(
                "spreading_k = {} outside [1, 2]",
                self.spreading_k
            )));
        }
        if !(0.0..=1.0).contains(&self.shipping_s) {
            return Err(domain(format!(
                "shipping_s = {} outside [0, 1]",
                self.shipping_s
            )));
        }
        if !(self.wind_w >= 0.0 && self.wind_w.is_finite()) {
            return Err(domain(format!("wind_w = {} must be >= 0", self.wind_w)));
        }
        Ok(())
    }
}

/// Uniform search grid over frequency, in kHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_min_khz: f64,
    pub f_max_khz: f64,
    pub step_khz: f64,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            f_min_khz: 0.1,
            f_max_khz: 200.0,
            step_khz: 0.1,
        }
    }
}

impl FrequencyGrid {
    pub const MIN_POINTS: usize = 10;

    pub fn new(f_min_khz: f64, f_max_khz: f64, step_khz: f64) -> Result<Self> {
        let grid = FrequencyGrid {
            f_min_khz,
            f_max_khz,
            step_khz,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.f_min_khz.is_finite() && self.f_max_khz.is_finite() && self.step_khz.is_finite();
        if !finite || self.f_min_khz <= 0.0 || self.f_max_khz <= self.f_min_khz || self.step_khz <= 0.0 {
            return Err(Error::Config(format!(
                "invalid frequency grid [{}, {}] step {}",
                self.f_min_khz, self.f_max_khz, self.step_khz
            )));
        }
        if self.len() < Self::MIN_POINTS {
            return Err(Error::Config(format!(
                "frequency grid has {} points, need at least {}",
                self.len(),
                Self::MIN_POINTS
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.f_max_khz - self.f_min_khz) / self.step_khz + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid frequency at `i`, computed without accumulating rounding error.
    pub fn at(&self, i: usize) -> f64 {
        self.f_min_khz + i as f64 * self.step_khz
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }
}

fn check_freq(f_khz: f64) -> Result<()> {
    if !f_khz.is_finite() || f_khz <= 0.0 {
        return Err(domain(format!("frequency {f_khz} kHz must be positive and finite")));
    }
    Ok(())
}

/// Thorp absorption coefficient in dB/km for `f_khz` in kHz.
pub fn thorp_absorption(f_khz: f64) -> Result<f64> {
    check_freq(f_khz)?;
    let f2 = f_khz * f_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Path loss in dB over `l_m` meters, referenced to 1 m.
pub fn path_loss_db(l_m: f64, f_khz: f64, env: &Environment) -> Result<f64> {
    if !(l_m >= 1.0) || !l_m.is_finite() {
        return Err(domain(format!(
            "distance {l_m} m is below the 1 m reference distance"
        )));
    }
    let absorption = thorp_absorption(f_khz)?;
    Ok(env.spreading_k * 10.0 * l_m.log10() + l_m / 1000.0 * absorption)
}

/// Individual noise components at `f_khz`, in dB re uPa^2/Hz:
/// turbulence, shipping, wind, thermal.
pub fn noise_components_db(f_khz: f64, env: &Environment) -> Result<[f64; 4]> {
    check_freq(f_khz)?;
    let lf = f_khz.log10();
    let turbulence = 17.0 - 30.0 * lf;
    let shipping = 40.0 + 20.0 * (env.shipping_s - 0.5) + 26.0 * lf - 60.0 * (f_khz + 0.03).log10();
    let wind = 50.0 + 7.5 * env.wind_w.sqrt() + 20.0 * lf - 40.0 * (f_khz + 0.4).log10();
    let thermal = -15.0 + 20.0 * lf;
    Ok([turbulence, shipping, wind, thermal])
}

/// Ambient noise power spectral density in dB re uPa^2/Hz.
pub fn noise_psd_db(f_khz: f64, env: &Environment) -> Result<f64> {
    let linear: f64 = noise_components_db(f_khz, env)?
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .sum();
    Ok(10.0 * linear.log10())
}

/// Attenuation-noise product `A(l, f) N(f)` in dB.
pub fn an_product_db(l_m: f64, f_khz: f64, env: &Environment) -> Result<f64> {
    Ok(path_loss_db(l_m, f_khz, env)? + noise_psd_db(f_khz, env)?)
}

/// AN product evaluated at every grid point.
pub fn an_profile_db(l_m: f64, env: &Environment, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    (0..grid.len())
        .map(|i| an_product_db(l_m, grid.at(i), env))
        .collect()
}

fn argmin(values: &[f64]) -> Option<usize> {
    // strict `<` keeps the lowest index on ties
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] <= *v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Grid frequency minimizing the AN product; ties go to the lower frequency.
pub fn optimal_frequency(l_m: f64, env: &Environment, grid: &FrequencyGrid) -> Result<f64> {
    let profile = an_profile_db(l_m, env, grid)?;
    let i = argmin(&profile).ok_or_else(|| Error::Config("empty frequency grid".into()))?;
    Ok(grid.at(i))
}

/// Operating band around the AN-product minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub f_lo_khz: f64,
    pub f_opt_khz: f64,
    pub f_hi_khz: f64,
    /// Grid indices bounding the band (inclusive).
    pub lo_index: usize,
    pub opt_index: usize,
    pub hi_index: usize,
    /// Set when only the minimizer itself is within 3 dB; the band is then
    /// reported as one grid step centred on it.
    pub narrow: bool,
}

impl Band {
    pub fn bandwidth_khz(&self) -> f64 {
        self.f_hi_khz - self.f_lo_khz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_khz() * 1000.0
    }
}

/// Maximal contiguous grid interval around the optimum where the AN product
/// stays within 3 dB of its minimum.
pub fn band_3db(l_m: f64, env: &Environment, grid: &FrequencyGrid) -> Result<Band> {
    let profile = an_profile_db(l_m, env, grid)?;
    band_from_profile(&profile, grid)
}

pub(crate) fn band_from_profile(profile: &[f64], grid: &FrequencyGrid) -> Result<Band> {
    let opt = argmin(profile).ok_or_else(|| Error::Config("empty frequency grid".into()))?;
    let limit = profile[opt] + 3.0;
    let mut lo = opt;
    while lo > 0 && profile[lo - 1] <= limit {
        lo -= 1;
    }
    let mut hi = opt;
    while hi + 1 < profile.len() && profile[hi + 1] <= limit {
        hi += 1;
    }
    let f_opt = grid.at(opt);
    if lo == hi {
        return Ok(Band {
            f_lo_khz: f_opt - grid.step_khz / 2.0,
            f_opt_khz: f_opt,
            f_hi_khz: f_opt + grid.step_khz / 2.0,
            lo_index: lo,
            opt_index: opt,
            hi_index: hi,
            narrow: true,
        });
    }
    Ok(Band {
        f_lo_khz: grid.at(lo),
        f_opt_khz: f_opt,
        f_hi_khz: grid.at(hi),
        lo_index: lo,
        opt_index: opt,
        hi_index: hi,
        narrow: false,
    })
}
