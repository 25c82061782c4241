//! Linear relay chains: store-and-forward delay and energy versus relay count.
//!
//! Relays sit uniformly on the line between source and sink, so every hop has
//! length `D / (n + 1)` and the same link budget. Each hop costs its transmit
//! energy plus the receiver's energy for the same packet duration. Relays add
//! no processing delay and no idle power.

use crate::acoustic::{Environment, FrequencyGrid};
use crate::error::{domain, Error, Result};
use crate::link_budget::link_budget_with_efficiency;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainScenario {
    pub total_distance_m: f64,
    pub n_relays: usize,
    pub packet_bits: f64,
    pub snr_db: f64,
    pub rx_power_w: f64,
    pub sound_speed_mps: f64,
    pub efficiency: f64,
    pub env: Environment,
    pub grid: FrequencyGrid,
}

impl Default for ChainScenario {
    /// BPSK at a 10 dB target SNR, 2 W receive power, 10^4-bit packets.
    fn default() -> Self {
        ChainScenario {
            total_distance_m: 100_000.0,
            n_relays: 0,
            packet_bits: 1e4,
            snr_db: 10.0,
            rx_power_w: 2.0,
            sound_speed_mps: 1500.0,
            efficiency: 1.0,
            env: Environment::default(),
            grid: FrequencyGrid::default(),
        }
    }
}

impl ChainScenario {
    pub fn with_distance(mut self, d_m: f64) -> Self {
        self.total_distance_m = d_m;
        self
    }

    pub fn with_relays(mut self, n: usize) -> Self {
        self.n_relays = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.grid.validate()?;
        if !(self.packet_bits > 0.0) {
            return Err(domain("packet_bits must be positive"));
        }
        if !(self.rx_power_w >= 0.0) {
            return Err(domain("rx_power_w must be non-negative"));
        }
        if !(self.sound_speed_mps > 0.0) {
            return Err(domain("sound_speed_mps must be positive"));
        }
        if !(self.total_distance_m >= 1.0) {
            return Err(domain("total distance must be at least 1 m"));
        }
        Ok(())
    }

    pub fn hop_distance_m(&self) -> f64 {
        self.total_distance_m / (self.n_relays as f64 + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopMetrics {
    pub distance_m: f64,
    pub tx_time_s: f64,
    /// Propagation plus transmission time.
    pub delay_s: f64,
    pub energy_j: f64,
    pub tx_power_w: f64,
    pub bit_rate_bps: f64,
}

/// Time, delay and energy to move one packet across a hop of `d_m` meters.
pub fn hop_metrics(d_m: f64, sc: &ChainScenario) -> Result<HopMetrics> {
    if !(d_m >= 1.0) {
        return Err(domain(format!("hop distance {d_m} m below 1 m")));
    }
    let lb = link_budget_with_efficiency(d_m, &sc.env, sc.snr_db, sc.efficiency, &sc.grid)?;
    let tx_time_s = sc.packet_bits / lb.bit_rate_bps;
    Ok(HopMetrics {
        distance_m: d_m,
        tx_time_s,
        delay_s: d_m / sc.sound_speed_mps + tx_time_s,
        energy_j: (lb.tx_power_w + sc.rx_power_w) * tx_time_s,
        tx_power_w: lb.tx_power_w,
        bit_rate_bps: lb.bit_rate_bps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayRow {
    pub n_relays: usize,
    pub hop_distance_m: f64,
    pub end_to_end_delay_s: f64,
    pub total_energy_j: f64,
    pub hop_tx_power_w: f64,
    pub hop_bit_rate_bps: f64,
}

fn chain_row(sc: &ChainScenario) -> Result<RelayRow> {
    sc.validate()?;
    let hops = sc.n_relays as f64 + 1.0;
    let hop = hop_metrics(sc.hop_distance_m(), sc)?;
    Ok(RelayRow {
        n_relays: sc.n_relays,
        hop_distance_m: hop.distance_m,
        end_to_end_delay_s: hops * hop.delay_s,
        total_energy_j: hops * hop.energy_j,
        hop_tx_power_w: hop.tx_power_w,
        hop_bit_rate_bps: hop.bit_rate_bps,
    })
}

/// End-to-end store-and-forward delay, `D/c + (n+1) t_tx(D/(n+1))`.
pub fn chain_delay(sc: &ChainScenario) -> Result<f64> {
    Ok(chain_row(sc)?.end_to_end_delay_s)
}

/// Total energy over all `n + 1` hops.
pub fn chain_energy(sc: &ChainScenario) -> Result<f64> {
    Ok(chain_row(sc)?.total_energy_j)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelayChainReport {
    pub total_distance_m: f64,
    pub rows: Vec<RelayRow>,
}

impl RelayChainReport {
    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total_energy_j).collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.end_to_end_delay_s).collect()
    }

    /// Relay count with the least total energy (lowest count on ties).
    pub fn energy_argmin(&self) -> usize {
        let mut best = 0;
        for (i, r) in self.rows.iter().enumerate() {
            if r.total_energy_j < self.rows[best].total_energy_j {
                best = i;
            }
        }
        self.rows[best].n_relays
    }

    /// `(max - min) / value at n = 0` of the delay column.
    pub fn delay_spread(&self) -> f64 {
        let d = self.delays();
        let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / d[0]
    }
}

/// Rows for `n = 0..=n_max` relays at the scenario's total distance.
pub fn sweep_relays(sc: &ChainScenario, n_max: usize) -> Result<RelayChainReport> {
    let rows = (0..=n_max)
        .into_par_iter()
        .map(|n| chain_row(&sc.with_relays(n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RelayChainReport {
        total_distance_m: sc.total_distance_m,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MidpointComparison {
    pub total_distance_m: f64,
    /// `100 (1 - E(1)/E(0))`; negative when the relay costs energy.
    pub energy_reduction_pct: f64,
    pub delay_increase_pct: f64,
}

/// One relay at the midpoint against direct transmission.
pub fn midpoint_comparison(sc: &ChainScenario) -> Result<MidpointComparison> {
    let direct = chain_row(&sc.with_relays(0))?;
    let relayed = chain_row(&sc.with_relays(1))?;
    Ok(MidpointComparison {
        total_distance_m: sc.total_distance_m,
        energy_reduction_pct: 100.0 * (1.0 - relayed.total_energy_j / direct.total_energy_j),
        delay_increase_pct: 100.0 * (relayed.end_to_end_delay_s - direct.end_to_end_delay_s)
            / direct.end_to_end_delay_s,
    })
}

/// Energy-optimal relay count over `0..=n_max`.
pub fn energy_argmin(sc: &ChainScenario, n_max: usize) -> Result<usize> {
    Ok(sweep_relays(sc, n_max)?.energy_argmin())
}

/// Bisects for the distance above which relaying starts to save energy.
///
/// Requires the energy-optimal relay count to be zero at `lo_m` and positive
/// at `hi_m`; returns the upper end of the final bracket.
pub fn relaying_threshold(sc: &ChainScenario, lo_m: f64, hi_m: f64, n_max: usize, tol_m: f64) -> Result<f64> {
    let relays_at = |d: f64| energy_argmin(&sc.with_distance(d), n_max);
    if relays_at(lo_m)? != 0 {
        return Err(Error::Config(format!("relaying already pays off at {lo_m} m")));
    }
    if relays_at(hi_m)? == 0 {
        return Err(Error::Config(format!("relaying never pays off up to {hi_m} m")));
    }
    let (mut lo, mut hi) = (lo_m, hi_m);
    while hi - lo > tol_m {
        let mid = 0.5 * (lo + hi);
        if relays_at(mid)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Indices where a curve drops again after it has started to rise.
/// Empty for monotone or single-valley curves.
pub fn unimodality_violations(values: &[f64]) -> Vec<usize> {
    let mut rising = false;
    let mut out = vec![];
    for i in 1..values.len() {
        if values[i] > values[i - 1] {
            rising = true;
        } else if values[i] < values[i - 1] && rising {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sc(d_km: f64) -> ChainScenario {
        ChainScenario::default().with_distance(d_km * 1e3)
    }

    #[test]
    fn direct_transmission_is_single_hop() {
        let s = sc(20.0);
        let hop = hop_metrics(20e3, &s).unwrap();
        assert_eq!(chain_energy(&s).unwrap(), hop.energy_j);
        assert_eq!(chain_delay(&s).unwrap(), hop.delay_s);
        assert_abs_diff_eq!(hop.delay_s, 20e3 / 1500.0 + 1e4 / hop.bit_rate_bps, epsilon = 1e-12);
    }

    #[test]
    fn shorter_hops_are_faster() {
        let s = ChainScenario::default();
        let mut prev = hop_metrics(100e3, &s).unwrap();
        for d in [50e3, 25e3, 12.5e3, 6.25e3] {
            let h = hop_metrics(d, &s).unwrap();
            assert!(h.bit_rate_bps > prev.bit_rate_bps);
            assert!(h.tx_time_s < prev.tx_time_s);
            assert!(h.energy_j > s.rx_power_w * h.tx_time_s);
            prev = h;
        }
    }

    #[test]
    fn delay_has_fixed_propagation_part() {
        let report = sweep_relays(&sc(100.0), 10).unwrap();
        for row in &report.rows {
            let hops = row.n_relays as f64 + 1.0;
            let forwarding = row.end_to_end_delay_s - 100e3 / 1500.0;
            assert!(forwarding > 0.0);
            assert_abs_diff_eq!(forwarding, hops * 1e4 / row.hop_bit_rate_bps, epsilon = 1e-9);
        }
    }

    #[test]
    fn short_range_relaying_never_helps() {
        let e = sweep_relays(&sc(1.0), 10).unwrap().energies();
        assert!(e.windows(2).all(|w| w[1] >= w[0]), "{e:?}");
    }

    #[test]
    fn long_range_has_interior_minimum() {
        let report = sweep_relays(&sc(100.0), 50).unwrap();
        let n = report.energy_argmin();
        assert!(n > 0 && n < 50, "argmin {n}");
    }

    #[test]
    fn sweep_rows_match_pointwise() {
        let base = sc(40.0);
        let report = sweep_relays(&base, 6).unwrap();
        assert_eq!(report.rows.len(), 7);
        for row in &report.rows {
            let e = chain_energy(&base.with_relays(row.n_relays)).unwrap();
            assert_eq!(e, row.total_energy_j);
        }
        assert_eq!(report, sweep_relays(&base, 6).unwrap());
        let direct = sweep_relays(&base, 0).unwrap();
        assert_eq!(direct.rows.len(), 1);
        assert_eq!(direct.rows[0].total_energy_j, chain_energy(&base).unwrap());
    }

    #[test]
    fn midpoint_below_threshold_costs_energy() {
        let m = midpoint_comparison(&sc(2.0)).unwrap();
        assert!(m.energy_reduction_pct <= 0.0);
    }

    #[test]
    fn threshold_bisection_brackets() {
        let base = ChainScenario::default();
        let d = relaying_threshold(&base, 1e3, 100e3, 20, 100.0).unwrap();
        assert!(d > 1e3 && d <= 100e3);
        assert_eq!(energy_argmin(&base.with_distance(d - 200.0), 20).unwrap(), 0);
        assert!(energy_argmin(&base.with_distance(d), 20).unwrap() >= 1);
    }

    #[test]
    fn unimodality_checker() {
        assert!(unimodality_violations(&[3.0, 2.0, 1.0, 2.0, 3.0]).is_empty());
        assert!(unimodality_violations(&[1.0, 2.0, 3.0]).is_empty());
        assert_eq!(unimodality_violations(&[1.0, 2.0, 1.5, 3.0]), vec![2]);
    }

    #[test]
    fn invalid_scenarios() {
        let s = ChainScenario { packet_bits: 0.0, ..Default::default() };
        assert!(chain_energy(&s).is_err());
        let s = ChainScenario::default().with_distance(5.0).with_relays(10);
        assert!(matches!(chain_energy(&s), Err(Error::Domain(_))));
    }
}
