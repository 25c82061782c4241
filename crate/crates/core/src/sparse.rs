//! Sparse multipath channels and compressed-sensing reconstruction.
//!
//! A channel is a length-`n` tap vector with at most 10 % non-zero taps that
//! carry at least 85 % of the energy. Pilots are modelled as an `m x n`
//! measurement operator with unit-norm columns; the channel is recovered from
//! `y = phi h + w` by orthogonal matching pursuit.

use crate::error::{domain, Error, Result};
use crate::seed::{derive_seed, rng_from_seed, SimRng};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest fraction of taps a sparse channel may occupy.
pub const MAX_SUPPORT_FRACTION: f64 = 0.10;
/// Smallest fraction of energy the support must carry.
pub const MIN_SUPPORT_ENERGY: f64 = 0.85;

pub(crate) fn complex_gaussian(rng: &mut SimRng, std: f64) -> Complex64 {
    let s = std / std::f64::consts::SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Power-delay profile used to shape tap variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayProfile {
    Flat,
    /// Tap variance proportional to `exp(-index / decay_taps)`.
    Exponential { decay_taps: f64 },
}

impl DecayProfile {
    fn variance(&self, index: usize) -> f64 {
        match *self {
            DecayProfile::Flat => 1.0,
            DecayProfile::Exponential { decay_taps } => (-(index as f64) / decay_taps).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseChannel {
    /// Full tap vector, zero off the support.
    pub taps: Vec<Complex64>,
    /// Sorted support indices.
    pub support: Vec<usize>,
    pub seed: u64,
}

impl SparseChannel {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.support.iter().map(|&i| self.taps[i]).collect()
    }

    /// Checks the 10 % support / 85 % energy sparsity contract.
    pub fn check_sparsity(&self) -> Result<()> {
        check_sparsity(&self.taps, &self.support)
    }
}

/// Checks that `support` covers at most 10 % of `taps` and at least 85 % of
/// their energy.
pub fn check_sparsity(taps: &[Complex64], support: &[usize]) -> Result<()> {
    let n = taps.len();
    if support.len() as f64 > MAX_SUPPORT_FRACTION * n as f64 {
        return Err(domain(format!(
            "support of {} taps exceeds 10% of {n}",
            support.len()
        )));
    }
    let total = energy(taps);
    let on_support: f64 = support.iter().map(|&i| taps[i].norm_sqr()).sum();
    if total <= 0.0 || on_support < MIN_SUPPORT_ENERGY * total {
        return Err(domain(format!(
            "support carries {:.3} of the energy, need {MIN_SUPPORT_ENERGY}",
            if total > 0.0 { on_support / total } else { 0.0 }
        )));
    }
    Ok(())
}

/// Draws an `s_taps`-sparse channel of length `n`, normalized to unit energy.
pub fn generate_sparse_channel(n: usize, s_taps: usize, decay: DecayProfile, seed: u64) -> Result<SparseChannel> {
    if s_taps < 1 || s_taps as f64 > MAX_SUPPORT_FRACTION * n as f64 {
        return Err(domain(format!(
            "{s_taps} taps violates 1 <= s <= 0.10 * {n}"
        )));
    }
    if let DecayProfile::Exponential { decay_taps } = decay {
        if !(decay_taps > 0.0) {
            return Err(domain("decay_taps must be positive"));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut support = sample(&mut rng, n, s_taps).into_vec();
    support.sort_unstable();
    let mut taps = vec![Complex64::new(0.0, 0.0); n];
    loop {
        for &i in &support {
            taps[i] = complex_gaussian(&mut rng, decay.variance(i).sqrt());
        }
        let e = energy(&taps);
        if e > 0.0 {
            let scale = e.sqrt().recip();
            taps.iter_mut().for_each(|t| *t *= scale);
            break;
        }
    }
    Ok(SparseChannel { taps, support, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotScheme {
    Gaussian,
    PartialFourier,
    Identity,
}

/// Measurement operator, row-major, columns normalized to unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    pub scheme: PilotScheme,
    pub seed: u64,
}

impl PilotMatrix {
    pub fn new(m: usize, n: usize, scheme: PilotScheme, seed: u64) -> Result<Self> {
        if m > n {
            return Err(Error::Dimension(format!("{m} pilot rows exceed {n} taps")));
        }
        if n == 0 {
            return Err(Error::Dimension("zero taps".into()));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); m * n];
        match scheme {
            PilotScheme::Gaussian => {
                // row by row, so a smaller m draws a prefix of a larger one
                let mut rng = rng_from_seed(seed);
                data.iter_mut().for_each(|v| *v = complex_gaussian(&mut rng, 1.0));
            }
            PilotScheme::PartialFourier => {
                let mut rng = rng_from_seed(seed);
                let mut rows = sample(&mut rng, n, m).into_vec();
                rows.sort_unstable();
                for (r, &k) in rows.iter().enumerate() {
                    for c in 0..n {
                        let angle = -2.0 * PI * ((k * c) % n) as f64 / n as f64;
                        data[r * n + c] = Complex64::from_polar(1.0, angle);
                    }
                }
            }
            PilotScheme::Identity => {
                if m != n {
                    return Err(Error::Dimension(format!("identity pilots need m = n, got {m} x {n}")));
                }
                for i in 0..n {
                    data[i * n + i] = Complex64::new(1.0, 0.0);
                }
            }
        }
        let mut phi = PilotMatrix { rows: m, cols: n, data, scheme, seed };
        phi.normalize_columns();
        Ok(phi)
    }

    pub fn gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        Self::new(m, n, PilotScheme::Gaussian, seed)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, PilotScheme::Identity, 0).expect("square identity")
    }

    /// Builds a matrix from explicit row-major entries and normalizes columns.
    pub fn from_rows(m: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::Dimension(format!("{} entries for {m} x {n}", data.len())));
        }
        let mut phi = PilotMatrix { rows: m, cols: n, data, scheme: PilotScheme::Gaussian, seed: 0 };
        phi.normalize_columns();
        Ok(phi)
    }

    fn normalize_columns(&mut self) {
        for c in 0..self.cols {
            let norm: f64 = (0..self.rows).map(|r| self.data[r * self.cols + c].norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for r in 0..self.rows {
                    self.data[r * self.cols + c] /= norm;
                }
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn apply(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        if h.len() != self.cols {
            return Err(Error::Dimension(format!(
                "channel of length {} for {} pilot columns",
                h.len(),
                self.cols
            )));
        }
        Ok(self
            .data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(h).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `phi^H r` restricted to one column.
    fn correlate(&self, c: usize, r: &[Complex64]) -> Complex64 {
        (0..self.rows).map(|i| self.get(i, c).conj() * r[i]).sum()
    }
}

/// `y = phi h + w` with circular complex Gaussian `w`, `E|w_i|^2 = noise_std^2`.
pub fn measure(h: &[Complex64], phi: &PilotMatrix, noise_std: f64, rng: &mut SimRng) -> Result<Vec<Complex64>> {
    if !(noise_std >= 0.0) {
        return Err(domain("noise_std must be non-negative"));
    }
    let mut y = phi.apply(h)?;
    if noise_std > 0.0 {
        y.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_std));
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmpStop {
    pub max_sparsity: usize,
    /// Absolute residual norm at which to stop.
    pub residual_tol: f64,
}

impl OmpStop {
    /// `max_sparsity = 0.10 n`, but no more than half the measurements and
    /// at least 1; `residual_tol = 1e-6 ||y||`.
    ///
    /// Past `m / 2` paths a sparse solution is no longer unique and OMP just
    /// interpolates the measurements on a wrong support.
    pub fn default_for(n: usize, y: &[Complex64]) -> Self {
        let by_length = (MAX_SUPPORT_FRACTION * n as f64).floor() as usize;
        OmpStop {
            max_sparsity: by_length.min(y.len() / 2).max(1),
            residual_tol: 1e-6 * energy(y).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult {
    pub estimate: Vec<Complex64>,
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// Residual norm before the first and after every iteration.
    pub residual_norms: Vec<f64>,
    /// Set when the next selected column was linearly dependent on the
    /// support; the estimate is the least-squares fit on the support so far.
    pub rank_deficient: bool,
}

/// Orthogonal matching pursuit.
///
/// Each iteration picks the unselected column most correlated with the
/// residual (lowest index on ties), extends an orthonormal basis of the
/// support by Gram-Schmidt and projects it out of the residual. The final
/// coefficients solve the least-squares problem on the support.
pub fn omp_reconstruct(y: &[Complex64], phi: &PilotMatrix, stop: OmpStop) -> Result<OmpResult> {
    if y.len() != phi.rows() {
        return Err(Error::Dimension(format!(
            "{} observations for {} pilot rows",
            y.len(),
            phi.rows()
        )));
    }
    if stop.max_sparsity == 0 || !(stop.residual_tol >= 0.0) {
        return Err(Error::Config("OMP stop criteria must be positive".into()));
    }
    let n = phi.cols();
    let m = phi.rows();
    let mut residual = y.to_vec();
    let mut residual_norms = vec![energy(&residual).sqrt()];
    let mut support: Vec<usize> = vec![];
    let mut selected = vec![false; n];
    let mut basis: Vec<Vec<Complex64>> = vec![];
    // r_factor[k][j] = <q_j, phi_{support[k]}> for j <= k
    let mut r_factor: Vec<Vec<Complex64>> = vec![];
    let mut rank_deficient = false;

    while support.len() < stop.max_sparsity && *residual_norms.last().unwrap() > stop.residual_tol {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..n).filter(|&c| !selected[c]) {
            let corr = phi.correlate(c, &residual).norm();
            if best.is_none_or(|(_, b)| corr > b) {
                best = Some((c, corr));
            }
        }
        let Some((col, _)) = best else { break };

        let atom = phi.column(col);
        let mut v = atom.clone();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.len()];
        for _ in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let p: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                coeffs[j] += p;
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= p * qi);
            }
        }
        let norm = energy(&v).sqrt();
        let atom_norm = energy(&atom).sqrt();
        if m == 0 || norm <= 1e-10 * atom_norm.max(f64::MIN_POSITIVE) {
            rank_deficient = true;
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        coeffs.push(Complex64::new(norm, 0.0));
        let p: Complex64 = v.iter().zip(&residual).map(|(a, b)| a.conj() * b).sum();
        residual.iter_mut().zip(&v).for_each(|(r, q)| *r -= p * q);
        basis.push(v);
        r_factor.push(coeffs);
        support.push(col);
        selected[col] = true;
        residual_norms.push(energy(&residual).sqrt());
    }

    // back-substitution on R x = Q^H y
    let k = support.len();
    let qy: Vec<Complex64> = basis
        .iter()
        .map(|q| q.iter().zip(y).map(|(a, b)| a.conj() * b).sum())
        .collect();
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut acc = qy[i];
        for j in i + 1..k {
            acc -= r_factor[j][i] * x[j];
        }
        x[i] = acc / r_factor[i][i];
    }
    let mut estimate = vec![Complex64::new(0.0, 0.0); n];
    for (idx, &c) in support.iter().enumerate() {
        estimate[c] = x[idx];
    }
    Ok(OmpResult {
        estimate,
        iterations: k,
        support,
        residual_norms,
        rank_deficient,
    })
}

/// Normalized mean-squared error `||h - h_est||^2 / ||h||^2`.
pub fn nmse(h_true: &[Complex64], h_est: &[Complex64]) -> Result<f64> {
    if h_true.len() != h_est.len() {
        return Err(Error::Dimension(format!(
            "lengths {} and {} differ",
            h_true.len(),
            h_est.len()
        )));
    }
    let reference = energy(h_true);
    if reference == 0.0 {
        return Err(domain("true channel has zero energy"));
    }
    let err: f64 = h_true.iter().zip(h_est).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(err / reference)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotSavingsConfig {
    pub n: usize,
    pub s: usize,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub noise_std: f64,
    pub decay: DecayProfile,
    pub scheme: PilotScheme,
}

impl Default for PilotSavingsConfig {
    fn default() -> Self {
        PilotSavingsConfig {
            n: 64,
            s: 3,
            m_list: (0..=16).map(|i| i * 4).collect(),
            trials: 200,
            noise_std: 0.0,
            decay: DecayProfile::Exponential { decay_taps: 16.0 },
            scheme: PilotScheme::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PilotSavingsRow {
    pub m: usize,
    pub median_nmse: f64,
}

/// NMSE of one OMP reconstruction from `m` pilots of a freshly drawn channel.
/// Channel and pilot seeds depend only on `(seed, trial)`, so every `m` of a
/// trial sees the same channel and nested pilot rows.
pub fn cs_trial(cfg: &PilotSavingsConfig, m: usize, seed: u64, trial: u64) -> Result<f64> {
    let h = generate_sparse_channel(cfg.n, cfg.s, cfg.decay, derive_seed(seed, "cs-channel", trial))?;
    if m == 0 {
        return nmse(&h.taps, &vec![Complex64::new(0.0, 0.0); cfg.n]);
    }
    let phi = PilotMatrix::new(m, cfg.n, cfg.scheme, derive_seed(seed, "cs-pilots", trial))?;
    let mut noise_rng = rng_from_seed(derive_seed(seed, "cs-noise", trial));
    let y = measure(&h.taps, &phi, cfg.noise_std, &mut noise_rng)?;
    let mut stop = OmpStop::default_for(cfg.n, &y);
    if cfg.noise_std > 0.0 {
        stop.residual_tol = stop.residual_tol.max(cfg.noise_std * (m as f64).sqrt());
    }
    let est = omp_reconstruct(&y, &phi, stop)?;
    nmse(&h.taps, &est.estimate)
}

/// Median NMSE against pilot count over Monte-Carlo trials.
pub fn pilot_savings_curve(cfg: &PilotSavingsConfig, seed: u64) -> Result<Vec<PilotSavingsRow>> {
    if cfg.m_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("m_list must be ascending".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    cfg.m_list
        .iter()
        .map(|&m| {
            let mut values = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| cs_trial(cfg, m, seed, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(PilotSavingsRow { m, median_nmse: median(&mut values) })
        })
        .collect()
}
