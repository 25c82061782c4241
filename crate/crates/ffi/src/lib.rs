//! C ABI for `hydrolink`.
//!
//! Every fallible function returns an [`HlStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be fetched with [`hl_last_error_message`]. Handles (`HlRelayReport`,
//! `HlSparseChannel`, `HlClutterFrame`) are opaque and must be released with
//! their `*_free` function; passing NULL to a free function is a no-op.
//!
//! Complex vectors cross the boundary as interleaved real/imaginary pairs.

use hydrolink::acoustic::{self, Environment, FrequencyGrid};
use hydrolink::clutter::{self, io as frame_io, ClutterFrame};
use hydrolink::link_budget;
use hydrolink::relay::{self, ChainScenario, RelayChainReport};
use hydrolink::sparse::{self, DecayProfile, OmpStop, PilotMatrix, SparseChannel};
use hydrolink::Error;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Dimension = 4,
    Calibration = 5,
    Format = 6,
    Io = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(HlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => HlStatus::Domain,
            Error::Config(_) => HlStatus::Config,
            Error::Dimension(_) => HlStatus::Dimension,
            Error::Calibration(_) => HlStatus::Calibration,
            Error::Format(_) => HlStatus::Format,
            Error::Io(_) => HlStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(HlStatus::NullPointer, format!("`{name}` is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            HlStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or valid for reads.
unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

/// # Safety
/// `p` must be NULL or valid for writes.
unsafe fn write_out<T>(p: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    unsafe { p.write(value) };
    Ok(())
}

/// # Safety
/// `p` must be NULL or valid for reads of `2 * n` doubles.
unsafe fn read_complex(p: *const f64, n: usize, name: &str) -> Result<Vec<Complex64>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(name));
    }
    let raw = unsafe { std::slice::from_raw_parts(p, 2 * n) };
    Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

/// # Safety
/// `p` must be NULL or valid for writes of `2 * values.len()` doubles.
unsafe fn write_complex(p: *mut f64, values: &[Complex64], name: &str) -> Result<(), Failure> {
    if values.is_empty() {
        return Ok(());
    }
    if p.is_null() {
        return Err(null(name));
    }
    let out = unsafe { std::slice::from_raw_parts_mut(p, 2 * values.len()) };
    for (o, v) in out.chunks_exact_mut(2).zip(values) {
        o[0] = v.re;
        o[1] = v.im;
    }
    Ok(())
}

/// # Safety
/// `p` must be NULL or a NUL-terminated string.
unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(HlStatus::InvalidUtf8, "path is not valid UTF-8".into()))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// there is no message.
///
/// # Safety
/// `buf` must be NULL or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HlEnvironment {
    pub spreading_k: f64,
    pub shipping_s: f64,
    pub wind_w: f64,
}

impl From<HlEnvironment> for Environment {
    fn from(e: HlEnvironment) -> Self {
        Environment { spreading_k: e.spreading_k, shipping_s: e.shipping_s, wind_w: e.wind_w }
    }
}

#[no_mangle]
pub extern "C" fn hl_environment_default() -> HlEnvironment {
    let e = Environment::default();
    HlEnvironment { spreading_k: e.spreading_k, shipping_s: e.shipping_s, wind_w: e.wind_w }
}

fn environment(env: &HlEnvironment) -> Result<Environment, Failure> {
    let e = Environment::from(*env);
    e.validate()?;
    Ok(e)
}

/// Absorption in dB/km at `f_khz`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_thorp_absorption(f_khz: f64, out: *mut f64) -> HlStatus {
    guard(|| unsafe { write_out(out, "out", acoustic::thorp_absorption(f_khz)?) })
}

/// Ambient noise power spectral density in dB re uPa per Hz.
///
/// # Safety
/// `env` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_noise_psd_db(env: *const HlEnvironment, f_khz: f64, out: *mut f64) -> HlStatus {
    guard(|| unsafe {
        let env = environment(as_ref(env, "env")?)?;
        write_out(out, "out", acoustic::noise_psd_db(f_khz, &env)?)
    })
}

/// Path loss in dB over `l_m` metres at `f_khz`.
///
/// # Safety
/// `env` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_path_loss_db(env: *const HlEnvironment, l_m: f64, f_khz: f64, out: *mut f64) -> HlStatus {
    guard(|| unsafe {
        let env = environment(as_ref(env, "env")?)?;
        write_out(out, "out", acoustic::path_loss_db(l_m, f_khz, &env)?)
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HlLinkBudget {
    pub distance_m: f64,
    pub f_opt_khz: f64,
    pub f_lo_khz: f64,
    pub f_hi_khz: f64,
    pub bandwidth_hz: f64,
    pub source_level_db: f64,
    pub tx_power_w: f64,
    pub bit_rate_bps: f64,
    /// Non-zero when only one grid point lies within 3 dB of the optimum.
    pub narrow_band: u8,
}

/// Single-hop link budget on the default frequency grid.
///
/// # Safety
/// `env` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_link_budget(env: *const HlEnvironment, l_m: f64, snr_db: f64, out: *mut HlLinkBudget) -> HlStatus {
    guard(|| unsafe {
        let env = environment(as_ref(env, "env")?)?;
        let b = link_budget::link_budget(l_m, &env, snr_db, &FrequencyGrid::default())?;
        write_out(
            out,
            "out",
            HlLinkBudget {
                distance_m: b.distance_m,
                f_opt_khz: b.f_opt_khz,
                f_lo_khz: b.f_lo_khz,
                f_hi_khz: b.f_hi_khz,
                bandwidth_hz: b.bandwidth_hz,
                source_level_db: b.source_level_db,
                tx_power_w: b.tx_power_w,
                bit_rate_bps: b.bit_rate_bps,
                narrow_band: b.narrow_band as u8,
            },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HlChainParams {
    pub packet_bits: f64,
    pub snr_db: f64,
    pub rx_power_w: f64,
    pub sound_speed_mps: f64,
    pub efficiency: f64,
    pub env: HlEnvironment,
}

#[no_mangle]
pub extern "C" fn hl_chain_params_default() -> HlChainParams {
    let sc = ChainScenario::default();
    HlChainParams {
        packet_bits: sc.packet_bits,
        snr_db: sc.snr_db,
        rx_power_w: sc.rx_power_w,
        sound_speed_mps: sc.sound_speed_mps,
        efficiency: sc.efficiency,
        env: hl_environment_default(),
    }
}

fn scenario(p: &HlChainParams, distance_m: f64) -> ChainScenario {
    ChainScenario {
        total_distance_m: distance_m,
        packet_bits: p.packet_bits,
        snr_db: p.snr_db,
        rx_power_w: p.rx_power_w,
        sound_speed_mps: p.sound_speed_mps,
        efficiency: p.efficiency,
        env: p.env.into(),
        ..ChainScenario::default()
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HlRelayRow {
    pub n_relays: usize,
    pub hop_distance_m: f64,
    pub end_to_end_delay_s: f64,
    pub total_energy_j: f64,
    pub hop_tx_power_w: f64,
    pub hop_bit_rate_bps: f64,
}

/// Delay and energy rows for 0..=n_max relays.
pub struct HlRelayReport(RelayChainReport);

/// # Safety
/// `params` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_relay_sweep(
    params: *const HlChainParams,
    distance_m: f64,
    n_max: usize,
    out: *mut *mut HlRelayReport,
) -> HlStatus {
    guard(|| unsafe {
        let sc = scenario(as_ref(params, "params")?, distance_m);
        let report = relay::sweep_relays(&sc, n_max)?;
        write_out(out, "out", boxed(HlRelayReport(report)))
    })
}

/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_relay_report_len(report: *const HlRelayReport) -> usize {
    unsafe { report.as_ref() }.map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_relay_report_row(report: *const HlRelayReport, index: usize, out: *mut HlRelayRow) -> HlStatus {
    guard(|| unsafe {
        let report = as_ref(report, "report")?;
        let r = report.0.rows.get(index).ok_or_else(|| {
            Failure(HlStatus::Dimension, format!("row {index} outside 0..{}", report.0.rows.len()))
        })?;
        write_out(
            out,
            "out",
            HlRelayRow {
                n_relays: r.n_relays,
                hop_distance_m: r.hop_distance_m,
                end_to_end_delay_s: r.end_to_end_delay_s,
                total_energy_j: r.total_energy_j,
                hop_tx_power_w: r.hop_tx_power_w,
                hop_bit_rate_bps: r.hop_bit_rate_bps,
            },
        )
    })
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_relay_report_free(report: *mut HlRelayReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Seeded sparse channel impulse response.
pub struct HlSparseChannel(SparseChannel);

/// Draws `s_taps` paths over `n` taps; `decay_taps <= 0` gives a flat
/// power profile.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_sparse_channel_generate(
    n: usize,
    s_taps: usize,
    decay_taps: f64,
    seed: u64,
    out: *mut *mut HlSparseChannel,
) -> HlStatus {
    guard(|| unsafe {
        let decay = if decay_taps > 0.0 { DecayProfile::Exponential { decay_taps } } else { DecayProfile::Flat };
        let h = sparse::generate_sparse_channel(n, s_taps, decay, seed)?;
        write_out(out, "out", boxed(HlSparseChannel(h)))
    })
}

/// # Safety
/// `channel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_sparse_channel_len(channel: *const HlSparseChannel) -> usize {
    unsafe { channel.as_ref() }.map_or(0, |h| h.0.len())
}

/// Copies the taps into `out` (`2 * len` doubles).
///
/// # Safety
/// `channel` must be a live handle and `out` valid for `2 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_sparse_channel_taps(channel: *const HlSparseChannel, out: *mut f64, len: usize) -> HlStatus {
    guard(|| unsafe {
        let h = as_ref(channel, "channel")?;
        if len != h.0.len() {
            return Err(Failure(HlStatus::Dimension, format!("buffer for {len} taps, channel has {}", h.0.len())));
        }
        write_complex(out, &h.0.taps, "out")
    })
}

/// # Safety
/// `channel` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_sparse_channel_free(channel: *mut HlSparseChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Orthogonal matching pursuit on `y = phi h`. `phi` is row-major `m x n`
/// and is column-normalized before use. Writes the `n`-tap estimate and the
/// number of iterations; `rank_deficient` is set non-zero when the search
/// stopped on a singular support.
///
/// # Safety
/// `phi` must hold `2 * m * n` doubles, `y` `2 * m`, `estimate` room for
/// `2 * n`; the scalar out-pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hl_omp_reconstruct(
    phi: *const f64,
    m: usize,
    n: usize,
    y: *const f64,
    max_sparsity: usize,
    residual_tol: f64,
    estimate: *mut f64,
    iterations: *mut usize,
    rank_deficient: *mut u8,
) -> HlStatus {
    guard(|| unsafe {
        let phi = PilotMatrix::from_rows(m, n, read_complex(phi, m * n, "phi")?)?;
        let y = read_complex(y, m, "y")?;
        let result = sparse::omp_reconstruct(&y, &phi, OmpStop { max_sparsity, residual_tol })?;
        write_complex(estimate, &result.estimate, "estimate")?;
        if !iterations.is_null() {
            iterations.write(result.iterations);
        }
        if !rank_deficient.is_null() {
            rank_deficient.write(result.rank_deficient as u8);
        }
        Ok(())
    })
}

/// # Safety
/// `truth` and `estimate` must each hold `2 * n` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_nmse(truth: *const f64, estimate: *const f64, n: usize, out: *mut f64) -> HlStatus {
    guard(|| unsafe {
        let t = read_complex(truth, n, "truth")?;
        let e = read_complex(estimate, n, "estimate")?;
        write_out(out, "out", sparse::nmse(&t, &e)?)
    })
}

/// Complex clutter samples over range cells and pulses.
pub struct HlClutterFrame(ClutterFrame);

/// K-distributed clutter normalized to unit mean power; `nu` may be +inf.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_generate(
    cells: usize,
    pulses: usize,
    nu: f64,
    seed: u64,
    out: *mut *mut HlClutterFrame,
) -> HlStatus {
    guard(|| unsafe {
        let f = clutter::gen_k_clutter(cells, pulses, nu, seed)?;
        write_out(out, "out", boxed(HlClutterFrame(f)))
    })
}

/// # Safety
/// `frame` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_cells(frame: *const HlClutterFrame) -> usize {
    unsafe { frame.as_ref() }.map_or(0, |f| f.0.cells())
}

/// # Safety
/// `frame` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_pulses(frame: *const HlClutterFrame) -> usize {
    unsafe { frame.as_ref() }.map_or(0, |f| f.0.pulses())
}

/// Copies the cell-major samples as interleaved floats (`2 * cells * pulses`).
///
/// # Safety
/// `frame` must be a live handle and `out` valid for `len` floats.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_samples(frame: *const HlClutterFrame, out: *mut f32, len: usize) -> HlStatus {
    guard(|| unsafe {
        let f = as_ref(frame, "frame")?;
        let samples = f.0.samples();
        if len != 2 * samples.len() {
            return Err(Failure(HlStatus::Dimension, format!("buffer of {len} floats, frame needs {}", 2 * samples.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (o, v) in dst.chunks_exact_mut(2).zip(samples) {
            o[0] = v.re;
            o[1] = v.im;
        }
        Ok(())
    })
}

/// New frame with a constant-amplitude target added at `cell`.
///
/// # Safety
/// `frame` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_inject_target(
    frame: *const HlClutterFrame,
    cell: usize,
    scr_db: f64,
    seed: u64,
    out: *mut *mut HlClutterFrame,
) -> HlStatus {
    guard(|| unsafe {
        let f = as_ref(frame, "frame")?;
        let g = clutter::inject_target(&f.0, cell, scr_db, seed)?;
        write_out(out, "out", boxed(HlClutterFrame(g)))
    })
}

/// Relative average amplitude of cell `cut`.
///
/// # Safety
/// `frame` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_raa(
    frame: *const HlClutterFrame,
    cut: usize,
    guard_cells: usize,
    reference_cells: usize,
    out: *mut f64,
) -> HlStatus {
    guard(|| unsafe {
        let f = as_ref(frame, "frame")?;
        write_out(out, "out", clutter::raa_feature(&f.0, cut, guard_cells, reference_cells)?)
    })
}

/// # Safety
/// `frame` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_write(frame: *const HlClutterFrame, path: *const c_char) -> HlStatus {
    guard(|| unsafe {
        let f = as_ref(frame, "frame")?;
        frame_io::save_frame(&f.0, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_read(path: *const c_char, out: *mut *mut HlClutterFrame) -> HlStatus {
    guard(|| unsafe {
        let f = frame_io::load_frame(path_arg(path)?)?;
        write_out(out, "out", boxed(HlClutterFrame(f)))
    })
}

/// # Safety
/// `frame` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_clutter_free(frame: *mut HlClutterFrame) {
    if !frame.is_null() {
        drop(unsafe { Box::from_raw(frame) });
    }
}
