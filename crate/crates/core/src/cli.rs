//! Command-line front end: loads a scenario, runs one experiment and writes
//! its CSV tables.
//!
//! Every CSV starts with `#` metadata lines naming the command, the seed and
//! the SHA-256 of the effective configuration, followed by an RFC 4180 table.

use crate::config::{self, LoadError, LoadedConfig, ScenarioConfig};
use crate::dfe::{ber_sim, convergence_study, cs_channel_estimate, DfeInit};
use crate::link_budget::link_budget;
use crate::relay::{midpoint_comparison, relaying_threshold, sweep_relays};
use crate::seed::derive_seed;
use crate::sparse::{generate_sparse_channel, pilot_savings_curve};
use crate::{clutter, Error};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG_UNREADABLE: i32 = 3;
pub const EXIT_CONFIG_INVALID: i32 = 4;

pub const OUT_DIR_ENV: &str = "HYDROLINK_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "hydrolink", version, about = "Underwater link, relay, equalizer and sea-clutter experiments")]
pub struct Cli {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Global seed, overriding the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: config `out_dir`, else "out"].
    #[arg(long, global = true, env = OUT_DIR_ENV, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Override a config value, e.g. `--set chain.n_max=20`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Optimal band, source level and transmit power over a distance sweep.
    LinkBudget,
    /// Delay and energy versus relay count, plus the one-relay comparison.
    RelaySweep,
    /// Median OMP reconstruction error versus pilot count.
    CsBench,
    /// Equalizer BER versus SNR and training MSE, cold start versus CS start.
    DfeBer,
    /// Detection and false-alarm rates of the calibrated RAA detector.
    ClutterRoc,
    /// Check a config file without running anything.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::LinkBudget => "link-budget",
            Command::RelaySweep => "relay-sweep",
            Command::CsBench => "cs-bench",
            Command::DfeBer => "dfe-ber",
            Command::ClutterRoc => "clutter-roc",
            Command::Validate => "validate",
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> i32 {
    if cli.command == Command::Validate {
        return validate(cli);
    }
    let loaded = match load(cli) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let mut cfg = loaded.config;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    match run_command(cli.command, &cfg, &out_dir) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn load(cli: &Cli) -> Result<LoadedConfig, i32> {
    let result = match &cli.config {
        Some(path) => config::load_file(path, &cli.overrides),
        None => config::load_defaults(&cli.overrides),
    };
    result.map_err(|e| report_load_error(cli.config.as_deref(), &e))
}

fn report_load_error(path: Option<&Path>, err: &LoadError) -> i32 {
    let origin = path.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
    match err {
        LoadError::Unreadable(msg) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG_UNREADABLE
        }
        LoadError::Invalid(diags) => {
            for d in diags {
                eprintln!("error: {origin}: {d}");
            }
            EXIT_CONFIG_INVALID
        }
    }
}

fn validate(cli: &Cli) -> i32 {
    let Some(path) = &cli.config else {
        eprintln!("error: validate needs --config <PATH>");
        return EXIT_USAGE;
    };
    match config::load_file(path, &cli.overrides) {
        Ok(loaded) => {
            let values = serde_json::to_value(&loaded.config).expect("config serializes");
            for field in &loaded.defaulted {
                let (block, key) = field.split_once('.').expect("dotted path");
                println!("note: {field} defaulted to {}", values[block][key]);
            }
            println!("{}: 0 diagnostics", path.display());
            EXIT_OK
        }
        Err(e) => report_load_error(Some(path), &e),
    }
}

/// Runs one experiment command and returns the files written.
pub fn run_command(command: Command, cfg: &ScenarioConfig, out_dir: &Path) -> crate::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let writer = CsvOut { dir: out_dir, command, seed: cfg.seed, hash: cfg.hash() };
    match command {
        Command::LinkBudget => link_budget_cmd(cfg, &writer),
        Command::RelaySweep => relay_sweep_cmd(cfg, &writer),
        Command::CsBench => cs_bench_cmd(cfg, &writer),
        Command::DfeBer => dfe_ber_cmd(cfg, &writer),
        Command::ClutterRoc => clutter_roc_cmd(cfg, &writer),
        Command::Validate => Ok(Vec::new()),
    }
}

struct CsvOut<'a> {
    dir: &'a Path,
    command: Command,
    seed: u64,
    hash: String,
}

impl CsvOut<'_> {
    fn write<R: Serialize>(&self, name: &str, rows: &[R]) -> crate::Result<PathBuf> {
        let mut buf = format!(
            "# command: {}\n# seed: {}\n# config_sha256: {}\n",
            self.command.name(),
            self.seed,
            self.hash
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in rows {
                w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
            }
            w.flush()?;
        }
        let path = self.dir.join(name);
        std::fs::write(&path, buf)?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct LinkRow {
    distance_km: f64,
    f_opt_khz: f64,
    f_lo_khz: f64,
    f_hi_khz: f64,
    bandwidth_hz: f64,
    source_level_db: f64,
    tx_power_w: f64,
    bit_rate_bps: f64,
    narrow_band: bool,
}

fn link_budget_cmd(cfg: &ScenarioConfig, out: &CsvOut) -> crate::Result<Vec<PathBuf>> {
    let env = cfg.environment.environment();
    let grid = cfg.environment.grid();
    let rows = cfg
        .environment
        .link_distances_km
        .par_iter()
        .map(|&km| {
            let b = link_budget(km * 1e3, &env, cfg.environment.link_snr_db, &grid)?;
            Ok(LinkRow {
                distance_km: km,
                f_opt_khz: b.f_opt_khz,
                f_lo_khz: b.f_lo_khz,
                f_hi_khz: b.f_hi_khz,
                bandwidth_hz: b.bandwidth_hz,
                source_level_db: b.source_level_db,
                tx_power_w: b.tx_power_w,
                bit_rate_bps: b.bit_rate_bps,
                narrow_band: b.narrow_band,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(vec![out.write("link_budget.csv", &rows)?])
}

#[derive(Serialize)]
struct SweepRow {
    distance_km: f64,
    n_relays: usize,
    hop_distance_m: f64,
    end_to_end_delay_s: f64,
    total_energy_j: f64,
    hop_tx_power_w: f64,
    hop_bit_rate_bps: f64,
}

#[derive(Serialize)]
struct MidpointRow {
    distance_km: f64,
    energy_reduction_pct: f64,
    delay_increase_pct: f64,
}

fn relay_sweep_cmd(cfg: &ScenarioConfig, out: &CsvOut) -> crate::Result<Vec<PathBuf>> {
    let base = cfg.chain.scenario(&cfg.environment);
    let mut rows = Vec::new();
    for &km in &cfg.chain.distances_km {
        let report = sweep_relays(&base.with_distance(km * 1e3), cfg.chain.n_max)?;
        println!(
            "D = {km} km: energy argmin n = {}, delay spread {:.2}%",
            report.energy_argmin(),
            100.0 * report.delay_spread()
        );
        rows.extend(report.rows.iter().map(|r| SweepRow {
            distance_km: km,
            n_relays: r.n_relays,
            hop_distance_m: r.hop_distance_m,
            end_to_end_delay_s: r.end_to_end_delay_s,
            total_energy_j: r.total_energy_j,
            hop_tx_power_w: r.hop_tx_power_w,
            hop_bit_rate_bps: r.hop_bit_rate_bps,
        }));
    }
    let midpoints = cfg
        .chain
        .midpoint_distances_km
        .par_iter()
        .map(|&km| {
            let m = midpoint_comparison(&base.with_distance(km * 1e3))?;
            Ok(MidpointRow {
                distance_km: km,
                energy_reduction_pct: m.energy_reduction_pct,
                delay_increase_pct: m.delay_increase_pct,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    if let Some(best) = midpoints.iter().max_by(|a, b| a.energy_reduction_pct.total_cmp(&b.energy_reduction_pct)) {
        println!(
            "best midpoint relay: {:.2}% less energy, {:.2}% more delay at {} km",
            best.energy_reduction_pct, best.delay_increase_pct, best.distance_km
        );
    }
    if let Ok(d) = relaying_threshold(&base, 1e3, 1e5, cfg.chain.n_max.max(1), 10.0) {
        println!("relaying pays off beyond {:.2} km", d / 1e3);
    }
    Ok(vec![
        out.write("relay_sweep.csv", &rows)?,
        out.write("relay_midpoint.csv", &midpoints)?,
    ])
}

fn cs_bench_cmd(cfg: &ScenarioConfig, out: &CsvOut) -> crate::Result<Vec<PathBuf>> {
    let rows = pilot_savings_curve(&cfg.cs.savings_config(), cfg.seed)?;
    Ok(vec![out.write("cs_pilot_savings.csv", &rows)?])
}

#[derive(Serialize)]
struct BerRow {
    snr_db: f64,
    init: &'static str,
    ber: f64,
    bit_errors: usize,
    n_data: usize,
}

#[derive(Serialize)]
struct MseRow {
    symbols: usize,
    cold_mse: f64,
    cs_mse: f64,
}

fn dfe_ber_cmd(cfg: &ScenarioConfig, out: &CsvOut) -> crate::Result<Vec<PathBuf>> {
    let d = &cfg.dfe;
    let dfe = d.dfe_config();
    let channel = generate_sparse_channel(d.channel_len, d.sparsity, d.decay(), derive_seed(cfg.seed, "dfe-channel", 0))?;
    let h = &channel.taps;
    let ber_rows = d
        .snr_db_list
        .par_iter()
        .enumerate()
        .map(|(i, &snr)| {
            let i = i as u64;
            let run_seed = derive_seed(cfg.seed, "dfe-ber", i);
            let estimate = cs_channel_estimate(h, d.cs_pilots, snr, d.sparsity, derive_seed(cfg.seed, "dfe-ber-estimate", i))?;
            let cold_init = DfeInit::Cold { seed: derive_seed(cfg.seed, "dfe-ber-cold", i) };
            let cold = ber_sim(h, snr, d.n_train, d.n_data, &dfe, &cold_init, run_seed)?;
            let cs = ber_sim(h, snr, d.n_train, d.n_data, &dfe, &DfeInit::FromEstimate(estimate), run_seed)?;
            Ok([("cold", cold), ("cs", cs)].map(|(init, r)| BerRow {
                snr_db: snr,
                init,
                ber: r.ber,
                bit_errors: r.bit_errors,
                n_data: r.n_data,
            }))
        })
        .collect::<crate::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let study = convergence_study(h, &d.convergence_config(), cfg.seed)?;
    println!(
        "median training symbols to MSE {}: cold {}, CS-initialized {}",
        d.mse_target,
        study.median_cold(),
        study.median_cs()
    );
    let mse_rows: Vec<MseRow> = study
        .cold_curve
        .iter()
        .zip(&study.cs_curve)
        .enumerate()
        .map(|(k, (&cold_mse, &cs_mse))| MseRow { symbols: (k + 1) * d.mse_window, cold_mse, cs_mse })
        .collect();
    Ok(vec![out.write("dfe_ber.csv", &ber_rows)?, out.write("dfe_mse.csv", &mse_rows)?])
}

#[derive(Serialize)]
struct RocCsvRow {
    scr_db: f64,
    empirical_pd: f64,
    empirical_pfa: f64,
    threshold_theta: f64,
}

fn clutter_roc_cmd(cfg: &ScenarioConfig, out: &CsvOut) -> crate::Result<Vec<PathBuf>> {
    let report = clutter::roc_eval(&cfg.detector.roc_config(), cfg.seed)?;
    let rows: Vec<RocCsvRow> = report
        .rows
        .iter()
        .map(|r| RocCsvRow {
            scr_db: r.scr_db,
            empirical_pd: r.empirical_pd,
            empirical_pfa: r.empirical_pfa,
            threshold_theta: report.model.threshold_theta,
        })
        .collect();
    Ok(vec![out.write("clutter_roc.csv", &rows)?])
}
