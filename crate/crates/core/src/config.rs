//! TOML scenario configuration for the command-line front end.
//!
//! A config file must contain the five parameter blocks (`environment`,
//! `chain`, `cs`, `dfe`, `detector`), but any field inside a block may be
//! omitted and takes its default. `seed` and `out_dir` are optional top-level
//! keys. Unknown keys anywhere are rejected.

use crate::acoustic::{Environment, FrequencyGrid};
use crate::clutter::{reference_cells, RocConfig};
use crate::dfe::{ConvergenceConfig, DfeConfig};
use crate::relay::ChainScenario;
use crate::sparse::{DecayProfile, PilotSavingsConfig, PilotScheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;

pub const BLOCKS: [&str; 5] = ["environment", "chain", "cs", "dfe", "detector"];
const TOP_LEVEL_KEYS: [&str; 2] = ["seed", "out_dir"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub environment: EnvironmentBlock,
    pub chain: ChainBlock,
    pub cs: CsBlock,
    pub dfe: DfeBlock,
    pub detector: DetectorBlock,
}

/// Propagation environment, frequency grid and the `link-budget` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentBlock {
    /// Geometric spreading exponent, 1 (cylindrical) to 2 (spherical).
    pub spreading_k: f64,
    /// Shipping activity, 0 (none) to 1 (heavy).
    pub shipping_s: f64,
    /// Wind speed in m/s.
    pub wind_w: f64,
    pub f_min_khz: f64,
    pub f_max_khz: f64,
    pub f_step_khz: f64,
    /// Target SNR for the `link-budget` table.
    pub link_snr_db: f64,
    pub link_distances_km: Vec<f64>,
}

impl Default for EnvironmentBlock {
    fn default() -> Self {
        let env = Environment::default();
        let grid = FrequencyGrid::default();
        EnvironmentBlock {
            spreading_k: env.spreading_k,
            shipping_s: env.shipping_s,
            wind_w: env.wind_w,
            f_min_khz: grid.f_min_khz,
            f_max_khz: grid.f_max_khz,
            f_step_khz: grid.step_khz,
            link_snr_db: 20.0,
            link_distances_km: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        }
    }
}

impl EnvironmentBlock {
    pub fn environment(&self) -> Environment {
        Environment {
            spreading_k: self.spreading_k,
            shipping_s: self.shipping_s,
            wind_w: self.wind_w,
        }
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            f_min_khz: self.f_min_khz,
            f_max_khz: self.f_max_khz,
            step_khz: self.f_step_khz,
        }
    }
}

/// Relay chain settings for `relay-sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainBlock {
    pub distances_km: Vec<f64>,
    pub n_max: usize,
    pub packet_bits: f64,
    pub snr_db: f64,
    pub rx_power_w: f64,
    pub sound_speed_mps: f64,
    /// Electro-acoustic conversion efficiency of the transmitter.
    pub efficiency: f64,
    /// Distances for the one-relay midpoint comparison.
    pub midpoint_distances_km: Vec<f64>,
}

impl Default for ChainBlock {
    fn default() -> Self {
        let sc = ChainScenario::default();
        ChainBlock {
            distances_km: vec![1.0, 10.0, 50.0, 100.0],
            n_max: 10,
            packet_bits: sc.packet_bits,
            snr_db: sc.snr_db,
            rx_power_w: sc.rx_power_w,
            sound_speed_mps: sc.sound_speed_mps,
            efficiency: sc.efficiency,
            midpoint_distances_km: (1..=10).map(|i| 10.0 * i as f64).collect(),
        }
    }
}

impl ChainBlock {
    pub fn scenario(&self, env: &EnvironmentBlock) -> ChainScenario {
        ChainScenario {
            total_distance_m: self.distances_km.first().copied().unwrap_or(1.0) * 1e3,
            n_relays: 0,
            packet_bits: self.packet_bits,
            snr_db: self.snr_db,
            rx_power_w: self.rx_power_w,
            sound_speed_mps: self.sound_speed_mps,
            efficiency: self.efficiency,
            env: env.environment(),
            grid: env.grid(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    Flat,
    Exponential,
}

fn decay_profile(kind: DecayKind, decay_taps: f64) -> DecayProfile {
    match kind {
        DecayKind::Flat => DecayProfile::Flat,
        DecayKind::Exponential => DecayProfile::Exponential { decay_taps },
    }
}

/// Pilot-savings benchmark for `cs-bench`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsBlock {
    pub channel_len: usize,
    pub sparsity: usize,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub noise_std: f64,
    pub decay_profile: DecayKind,
    pub decay_taps: f64,
    pub pilot_scheme: PilotScheme,
}

impl Default for CsBlock {
    fn default() -> Self {
        let d = PilotSavingsConfig::default();
        CsBlock {
            channel_len: d.n,
            sparsity: d.s,
            m_list: d.m_list,
            trials: d.trials,
            noise_std: d.noise_std,
            decay_profile: DecayKind::Exponential,
            decay_taps: 16.0,
            pilot_scheme: d.scheme,
        }
    }
}

impl CsBlock {
    pub fn savings_config(&self) -> PilotSavingsConfig {
        PilotSavingsConfig {
            n: self.channel_len,
            s: self.sparsity,
            m_list: self.m_list.clone(),
            trials: self.trials,
            noise_std: self.noise_std,
            decay: decay_profile(self.decay_profile, self.decay_taps),
            scheme: self.pilot_scheme,
        }
    }
}

/// Equalizer experiments for `dfe-ber`. The defaults size the filters for
/// the default 30-tap channel so any path can serve as the cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfeBlock {
    pub channel_len: usize,
    pub sparsity: usize,
    pub decay_profile: DecayKind,
    pub decay_taps: f64,
    pub n_ff: usize,
    pub n_fb: usize,
    pub mu: f64,
    pub decision_delay: usize,
    pub snr_db_list: Vec<f64>,
    pub n_train: usize,
    pub n_data: usize,
    pub cs_pilots: usize,
    /// SNR of the cold-versus-CS training comparison.
    pub convergence_snr_db: f64,
    pub convergence_train: usize,
    pub mse_target: f64,
    pub mse_window: usize,
    pub runs: usize,
}

impl Default for DfeBlock {
    fn default() -> Self {
        DfeBlock {
            channel_len: 30,
            sparsity: 3,
            decay_profile: DecayKind::Exponential,
            decay_taps: 8.0,
            n_ff: 32,
            n_fb: 30,
            mu: 0.005,
            decision_delay: 30,
            snr_db_list: vec![0.0, 4.0, 8.0, 12.0, 16.0],
            n_train: 2000,
            n_data: 10_000,
            cs_pilots: 20,
            convergence_snr_db: 15.0,
            convergence_train: 4000,
            mse_target: 0.05,
            mse_window: 100,
            runs: 20,
        }
    }
}

impl DfeBlock {
    pub fn dfe_config(&self) -> DfeConfig {
        DfeConfig {
            n_ff: self.n_ff,
            n_fb: self.n_fb,
            mu: self.mu,
            decision_delay: self.decision_delay,
        }
    }

    pub fn decay(&self) -> DecayProfile {
        decay_profile(self.decay_profile, self.decay_taps)
    }

    pub fn convergence_config(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            dfe: self.dfe_config(),
            snr_db: self.convergence_snr_db,
            n_train: self.convergence_train,
            pilots: self.cs_pilots,
            max_sparsity: self.sparsity,
            mse_target: self.mse_target,
            window: self.mse_window,
            runs: self.runs,
        }
    }
}

/// Clutter detector ROC settings for `clutter-roc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorBlock {
    /// K-texture shape; `inf` gives Rayleigh clutter.
    pub nu: f64,
    pub scr_db_list: Vec<f64>,
    pub target_pfa: f64,
    pub trials: usize,
    pub cells: usize,
    pub pulses: usize,
    pub guard_cells: usize,
    pub reference_cells: usize,
    pub cut: usize,
    pub calibration_samples: usize,
}

impl Default for DetectorBlock {
    fn default() -> Self {
        let r = RocConfig::default();
        DetectorBlock {
            nu: r.nu,
            scr_db_list: r.scr_list,
            target_pfa: r.target_pfa,
            trials: r.trials,
            cells: r.cells,
            pulses: r.pulses,
            guard_cells: r.guard_cells,
            reference_cells: r.reference_cells,
            cut: r.cut,
            calibration_samples: r.calibration_samples,
        }
    }
}

impl DetectorBlock {
    pub fn roc_config(&self) -> RocConfig {
        RocConfig {
            nu: self.nu,
            scr_list: self.scr_db_list.clone(),
            target_pfa: self.target_pfa,
            trials: self.trials,
            cells: self.cells,
            pulses: self.pulses,
            guard_cells: self.guard_cells,
            reference_cells: self.reference_cells,
            cut: self.cut,
            calibration_samples: self.calibration_samples,
        }
    }
}

/// One problem found while loading or checking a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    /// Dotted key path, empty for file-level problems.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    /// The file could not be read.
    Unreadable(String),
    Invalid(Vec<Diagnostic>),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Unreadable(msg) => write!(f, "{msg}"),
            LoadError::Invalid(diags) => {
                for (i, d) in diags.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    /// Dotted paths of block fields that took their default value.
    pub defaulted: Vec<String>,
}

/// Reads and checks a config file, then applies `key=value` overrides.
pub fn load_file(path: &Path, overrides: &[String]) -> Result<LoadedConfig, LoadError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Unreadable(format!("cannot read {}: {e}", path.display())))?;
    load_str(&source, overrides).map_err(LoadError::Invalid)
}

/// Built-in defaults with overrides applied.
pub fn load_defaults(overrides: &[String]) -> Result<LoadedConfig, LoadError> {
    let table = match toml::Value::try_from(ScenarioConfig::default()) {
        Ok(toml::Value::Table(t)) => t,
        _ => unreachable!("config serializes to a table"),
    };
    let mut loaded = finish(table, "", overrides).map_err(LoadError::Invalid)?;
    loaded.defaulted.clear();
    Ok(loaded)
}

pub fn load_str(source: &str, overrides: &[String]) -> Result<LoadedConfig, Vec<Diagnostic>> {
    let table: toml::Table = source.parse().map_err(|e: toml::de::Error| {
        vec![Diagnostic {
            line: e.span().map(|s| line_of(source, s.start)),
            field: String::new(),
            message: e.message().trim().to_string(),
        }]
    })?;
    finish(table, source, overrides)
}

fn finish(mut table: toml::Table, source: &str, overrides: &[String]) -> Result<LoadedConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    for ov in overrides {
        if let Err(d) = apply_override(&mut table, ov) {
            diags.push(d);
        }
    }
    let missing: Vec<&str> = BLOCKS
        .iter()
        .copied()
        .filter(|b| !table.get(*b).is_some_and(toml::Value::is_table))
        .collect();
    if !missing.is_empty() {
        diags.push(Diagnostic {
            line: None,
            field: String::new(),
            message: format!("missing required blocks: {}", missing.join(", ")),
        });
    }

    let known = known_fields();
    for (key, value) in &table {
        if BLOCKS.contains(&key.as_str()) {
            let Some(block) = value.as_table() else { continue };
            for field in block.keys() {
                if !known.iter().any(|(b, f)| b == key && f == field) {
                    diags.push(Diagnostic {
                        line: locate(source, key, field),
                        field: format!("{key}.{field}"),
                        message: "unknown key".into(),
                    });
                }
            }
        } else if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            diags.push(Diagnostic {
                line: locate(source, "", key),
                field: key.clone(),
                message: "unknown key".into(),
            });
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let defaulted = known
        .iter()
        .filter(|(b, f)| !table[b.as_str()].as_table().is_some_and(|t| t.contains_key(f.as_str())))
        .map(|(b, f)| format!("{b}.{f}"))
        .collect();

    let config: ScenarioConfig = toml::Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| {
        let field = type_error_field(&table);
        vec![Diagnostic {
            line: field.as_ref().and_then(|(b, f)| locate(source, b, f)),
            field: field.map(|(b, f)| format!("{b}.{f}")).unwrap_or_default(),
            message: e.message().trim().to_string(),
        }]
    })?;

    let mut range = config.check();
    for d in &mut range {
        if let Some((b, f)) = d.field.split_once('.') {
            d.line = locate(source, b, f);
        }
    }
    if !range.is_empty() {
        return Err(range);
    }
    Ok(LoadedConfig { config, defaulted })
}

/// Every `(block, field)` pair the schema knows.
pub fn known_fields() -> Vec<(String, String)> {
    let Ok(serde_json::Value::Object(top)) = serde_json::to_value(ScenarioConfig::default()) else {
        unreachable!("config serializes to an object")
    };
    let mut out = Vec::new();
    for block in BLOCKS {
        if let Some(serde_json::Value::Object(fields)) = top.get(block) {
            out.extend(fields.keys().map(|f| (block.to_string(), f.clone())));
        }
    }
    out
}

fn type_error_field(table: &toml::Table) -> Option<(String, String)> {
    fn parses<T: serde::de::DeserializeOwned>(t: toml::Table) -> bool {
        toml::Value::Table(t).try_into::<T>().is_ok()
    }
    known_fields().into_iter().find(|(b, f)| {
        let Some(v) = table.get(b).and_then(|t| t.get(f)) else { return false };
        let single = toml::Table::from_iter([(f.clone(), v.clone())]);
        !match b.as_str() {
            "environment" => parses::<EnvironmentBlock>(single),
            "chain" => parses::<ChainBlock>(single),
            "cs" => parses::<CsBlock>(single),
            "dfe" => parses::<DfeBlock>(single),
            _ => parses::<DetectorBlock>(single),
        }
    })
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[block]` (or at top level for an empty block).
fn locate(source: &str, block: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = header.trim().to_string();
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        let k = k.trim().trim_matches('"');
        if current == block && k == key {
            return Some(i + 1);
        }
        if current.is_empty() && k == format!("{block}.{key}") {
            return Some(i + 1);
        }
    }
    None
}

/// Applies one `block.field=value` override; the value is read as a TOML
/// literal, falling back to a plain string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), Diagnostic> {
    let bad = |message: String| Diagnostic { line: None, field: spec.to_string(), message };
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| bad("override must look like key=value".into()))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    match parts.as_slice() {
        [top] if TOP_LEVEL_KEYS.contains(top) => {
            table.insert(top.to_string(), value);
        }
        [block, field] if BLOCKS.contains(block) => {
            let entry = table
                .entry(block.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let Some(t) = entry.as_table_mut() else {
                return Err(bad(format!("`{block}` is not a table")));
            };
            t.insert(field.to_string(), value);
        }
        _ => return Err(bad(format!("unknown key `{key}`"))),
    }
    Ok(())
}

fn diag(field: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line: None, field: field.to_string(), message: message.into() }
}

macro_rules! require {
    ($out:expr, $cond:expr, $field:expr, $($msg:tt)+) => {
        if !$cond {
            $out.push(diag($field, format!($($msg)+)));
        }
    };
}

impl ScenarioConfig {
    /// Range checks; every diagnostic names its field.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let e = &self.environment;
        require!(d, (1.0..=2.0).contains(&e.spreading_k), "environment.spreading_k", "{} outside [1, 2]", e.spreading_k);
        require!(d, (0.0..=1.0).contains(&e.shipping_s), "environment.shipping_s", "{} outside [0, 1]", e.shipping_s);
        require!(d, e.wind_w >= 0.0 && e.wind_w.is_finite(), "environment.wind_w", "{} must be non-negative", e.wind_w);
        require!(d, e.f_min_khz > 0.0, "environment.f_min_khz", "{} must be positive", e.f_min_khz);
        require!(d, e.f_max_khz > e.f_min_khz && e.f_max_khz.is_finite(), "environment.f_max_khz", "{} must exceed f_min_khz", e.f_max_khz);
        require!(d, e.f_step_khz > 0.0, "environment.f_step_khz", "{} must be positive", e.f_step_khz);
        if d.is_empty() {
            if let Err(err) = e.grid().validate() {
                d.push(diag("environment.f_step_khz", err.to_string()));
            }
        }
        require!(d, e.link_snr_db.is_finite(), "environment.link_snr_db", "must be finite");
        check_distances(&mut d, "environment.link_distances_km", &e.link_distances_km);

        let c = &self.chain;
        check_distances(&mut d, "chain.distances_km", &c.distances_km);
        check_distances(&mut d, "chain.midpoint_distances_km", &c.midpoint_distances_km);
        require!(d, c.n_max <= 1000, "chain.n_max", "{} exceeds 1000", c.n_max);
        require!(d, c.packet_bits > 0.0 && c.packet_bits.is_finite(), "chain.packet_bits", "{} must be positive", c.packet_bits);
        require!(d, c.snr_db.is_finite(), "chain.snr_db", "must be finite");
        require!(d, c.rx_power_w >= 0.0 && c.rx_power_w.is_finite(), "chain.rx_power_w", "{} must be non-negative", c.rx_power_w);
        require!(d, c.sound_speed_mps > 0.0 && c.sound_speed_mps.is_finite(), "chain.sound_speed_mps", "{} must be positive", c.sound_speed_mps);
        require!(d, c.efficiency > 0.0 && c.efficiency <= 1.0, "chain.efficiency", "{} outside (0, 1]", c.efficiency);

        let s = &self.cs;
        require!(d, s.channel_len >= 1, "cs.channel_len", "must be at least 1");
        require!(d, s.sparsity >= 1 && s.sparsity * 10 <= s.channel_len, "cs.sparsity", "{} outside [1, channel_len / 10]", s.sparsity);
        require!(d, !s.m_list.is_empty() && s.m_list.windows(2).all(|w| w[0] < w[1]), "cs.m_list", "must be non-empty and strictly ascending");
        require!(d, s.m_list.iter().all(|&m| m <= s.channel_len), "cs.m_list", "pilot counts cannot exceed channel_len");
        require!(d, s.trials >= 1, "cs.trials", "must be at least 1");
        require!(d, s.noise_std >= 0.0 && s.noise_std.is_finite(), "cs.noise_std", "{} must be non-negative", s.noise_std);
        require!(d, s.decay_taps > 0.0, "cs.decay_taps", "{} must be positive", s.decay_taps);

        let q = &self.dfe;
        require!(d, q.channel_len >= 1, "dfe.channel_len", "must be at least 1");
        require!(d, q.sparsity >= 1 && q.sparsity * 10 <= q.channel_len, "dfe.sparsity", "{} outside [1, channel_len / 10]", q.sparsity);
        require!(d, q.decay_taps > 0.0, "dfe.decay_taps", "{} must be positive", q.decay_taps);
        require!(d, q.n_ff >= 1, "dfe.n_ff", "must be at least 1");
        require!(d, q.mu > 0.0 && q.mu < 1.0, "dfe.mu", "{} outside (0, 1)", q.mu);
        require!(d, q.decision_delay < q.n_ff, "dfe.decision_delay", "{} must be below n_ff = {}", q.decision_delay, q.n_ff);
        require!(d, !q.snr_db_list.is_empty() && q.snr_db_list.iter().all(|v| !v.is_nan()), "dfe.snr_db_list", "must be non-empty");
        require!(d, q.n_data >= 1000, "dfe.n_data", "{} below 1000", q.n_data);
        require!(d, q.cs_pilots >= 1 && q.cs_pilots <= q.channel_len, "dfe.cs_pilots", "{} outside [1, channel_len]", q.cs_pilots);
        require!(d, q.mse_target > 0.0, "dfe.mse_target", "{} must be positive", q.mse_target);
        require!(d, q.mse_window >= 1, "dfe.mse_window", "must be at least 1");
        require!(d, q.convergence_train >= q.mse_window, "dfe.convergence_train", "must be at least mse_window");
        require!(d, q.runs >= 1, "dfe.runs", "must be at least 1");

        let t = &self.detector;
        require!(d, t.nu > 0.0, "detector.nu", "{} must be positive", t.nu);
        require!(d, t.target_pfa > 0.0 && t.target_pfa < 1.0, "detector.target_pfa", "{} outside (0, 1)", t.target_pfa);
        require!(d, t.trials >= 1000, "detector.trials", "{} below 1000", t.trials);
        require!(d, !t.scr_db_list.is_empty() && t.scr_db_list.iter().all(|v| !v.is_nan()), "detector.scr_db_list", "must be non-empty");
        require!(d, t.pulses >= 1, "detector.pulses", "must be at least 1");
        require!(d, t.cut < t.cells, "detector.cut", "{} outside 0..{}", t.cut, t.cells);
        if t.cut < t.cells {
            if let Err(err) = reference_cells(t.cells, t.cut, t.guard_cells, t.reference_cells) {
                d.push(diag("detector.reference_cells", err.to_string()));
            }
        }
        d
    }

    /// SHA-256 of the canonical JSON form, ignoring `out_dir`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn check_distances(d: &mut Vec<Diagnostic>, field: &str, km: &[f64]) {
    require!(d, !km.is_empty(), field, "must be non-empty");
    require!(d, km.iter().all(|&v| v >= 1e-3 && v.is_finite()), field, "distances must be at least 0.001 km");
}
