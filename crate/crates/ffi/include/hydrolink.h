#ifndef HYDROLINK_H
#define HYDROLINK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_DOMAIN = 2,
  HL_STATUS_CONFIG = 3,
  HL_STATUS_DIMENSION = 4,
  HL_STATUS_CALIBRATION = 5,
  HL_STATUS_FORMAT = 6,
  HL_STATUS_IO = 7,
  HL_STATUS_INVALID_UTF8 = 8,
  HL_STATUS_PANIC = 9,
} HlStatus;

/**
 * Complex clutter samples over range cells and pulses.
 */
typedef struct HlClutterFrame HlClutterFrame;

/**
 * Delay and energy rows for 0..=n_max relays.
 */
typedef struct HlRelayReport HlRelayReport;

/**
 * Seeded sparse channel impulse response.
 */
typedef struct HlSparseChannel HlSparseChannel;

typedef struct HlEnvironment {
  double spreading_k;
  double shipping_s;
  double wind_w;
} HlEnvironment;

typedef struct HlLinkBudget {
  double distance_m;
  double f_opt_khz;
  double f_lo_khz;
  double f_hi_khz;
  double bandwidth_hz;
  double source_level_db;
  double tx_power_w;
  double bit_rate_bps;
  /**
   * Non-zero when only one grid point lies within 3 dB of the optimum.
   */
  uint8_t narrow_band;
} HlLinkBudget;

typedef struct HlChainParams {
  double packet_bits;
  double snr_db;
  double rx_power_w;
  double sound_speed_mps;
  double efficiency;
  struct HlEnvironment env;
} HlChainParams;

typedef struct HlRelayRow {
  size_t n_relays;
  double hop_distance_m;
  double end_to_end_delay_s;
  double total_energy_j;
  double hop_tx_power_w;
  double hop_bit_rate_bps;
} HlRelayRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 when
 * there is no message.
 *
 * # Safety
 * `buf` must be NULL or valid for writes of `len` bytes.
 */
size_t hl_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

struct HlEnvironment hl_environment_default(void);

/**
 * Absorption in dB/km at `f_khz`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HlStatus hl_thorp_absorption(double f_khz, double *out);

/**
 * Ambient noise power spectral density in dB re uPa per Hz.
 *
 * # Safety
 * `env` must be valid for reads and `out` for writes.
 */
enum HlStatus hl_noise_psd_db(const struct HlEnvironment *env, double f_khz, double *out);

/**
 * Path loss in dB over `l_m` metres at `f_khz`.
 *
 * # Safety
 * `env` must be valid for reads and `out` for writes.
 */
enum HlStatus hl_path_loss_db(const struct HlEnvironment *env,
                              double l_m,
                              double f_khz,
                              double *out);

/**
 * Single-hop link budget on the default frequency grid.
 *
 * # Safety
 * `env` must be valid for reads and `out` for writes.
 */
enum HlStatus hl_link_budget(const struct HlEnvironment *env,
                             double l_m,
                             double snr_db,
                             struct HlLinkBudget *out);

struct HlChainParams hl_chain_params_default(void);

/**
 * # Safety
 * `params` must be valid for reads and `out` for writes.
 */
enum HlStatus hl_relay_sweep(const struct HlChainParams *params,
                             double distance_m,
                             size_t n_max,
                             struct HlRelayReport **out);

/**
 * # Safety
 * `report` must be NULL or a live handle.
 */
size_t hl_relay_report_len(const struct HlRelayReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_relay_report_row(const struct HlRelayReport *report,
                                  size_t index,
                                  struct HlRelayRow *out);

/**
 * # Safety
 * `report` must be NULL or a handle not yet freed.
 */
void hl_relay_report_free(struct HlRelayReport *report);

/**
 * Draws `s_taps` paths over `n` taps; `decay_taps <= 0` gives a flat
 * power profile.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HlStatus hl_sparse_channel_generate(size_t n,
                                         size_t s_taps,
                                         double decay_taps,
                                         uint64_t seed,
                                         struct HlSparseChannel **out);

/**
 * # Safety
 * `channel` must be NULL or a live handle.
 */
size_t hl_sparse_channel_len(const struct HlSparseChannel *channel);

/**
 * Copies the taps into `out` (`2 * len` doubles).
 *
 * # Safety
 * `channel` must be a live handle and `out` valid for `2 * len` doubles.
 */
enum HlStatus hl_sparse_channel_taps(const struct HlSparseChannel *channel,
                                     double *out,
                                     size_t len);

/**
 * # Safety
 * `channel` must be NULL or a handle not yet freed.
 */
void hl_sparse_channel_free(struct HlSparseChannel *channel);

/**
 * Orthogonal matching pursuit on `y = phi h`. `phi` is row-major `m x n`
 * and is column-normalized before use. Writes the `n`-tap estimate and the
 * number of iterations; `rank_deficient` is set non-zero when the search
 * stopped on a singular support.
 *
 * # Safety
 * `phi` must hold `2 * m * n` doubles, `y` `2 * m`, `estimate` room for
 * `2 * n`; the scalar out-pointers may be NULL.
 */
enum HlStatus hl_omp_reconstruct(const double *phi,
                                 size_t m,
                                 size_t n,
                                 const double *y,
                                 size_t max_sparsity,
                                 double residual_tol,
                                 double *estimate,
                                 size_t *iterations,
                                 uint8_t *rank_deficient);

/**
 * # Safety
 * `truth` and `estimate` must each hold `2 * n` doubles; `out` valid for writes.
 */
enum HlStatus hl_nmse(const double *truth, const double *estimate, size_t n, double *out);

/**
 * K-distributed clutter normalized to unit mean power; `nu` may be +inf.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HlStatus hl_clutter_generate(size_t cells,
                                  size_t pulses,
                                  double nu,
                                  uint64_t seed,
                                  struct HlClutterFrame **out);

/**
 * # Safety
 * `frame` must be NULL or a live handle.
 */
size_t hl_clutter_cells(const struct HlClutterFrame *frame);

/**
 * # Safety
 * `frame` must be NULL or a live handle.
 */
size_t hl_clutter_pulses(const struct HlClutterFrame *frame);

/**
 * Copies the cell-major samples as interleaved floats (`2 * cells * pulses`).
 *
 * # Safety
 * `frame` must be a live handle and `out` valid for `len` floats.
 */
enum HlStatus hl_clutter_samples(const struct HlClutterFrame *frame, float *out, size_t len);

/**
 * New frame with a constant-amplitude target added at `cell`.
 *
 * # Safety
 * `frame` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_clutter_inject_target(const struct HlClutterFrame *frame,
                                       size_t cell,
                                       double scr_db,
                                       uint64_t seed,
                                       struct HlClutterFrame **out);

/**
 * Relative average amplitude of cell `cut`.
 *
 * # Safety
 * `frame` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_clutter_raa(const struct HlClutterFrame *frame,
                             size_t cut,
                             size_t guard_cells,
                             size_t reference_cells,
                             double *out);

/**
 * # Safety
 * `frame` must be a live handle and `path` a NUL-terminated string.
 */
enum HlStatus hl_clutter_write(const struct HlClutterFrame *frame, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum HlStatus hl_clutter_read(const char *path, struct HlClutterFrame **out);

/**
 * # Safety
 * `frame` must be NULL or a handle not yet freed.
 */
void hl_clutter_free(struct HlClutterFrame *frame);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYDROLINK_H */
