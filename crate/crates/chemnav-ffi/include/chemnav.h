/* C interface to the chemnav navigation simulator. */

#ifndef CHEMNAV_H
#define CHEMNAV_H

/* Generated by cbindgen from crates/chemnav-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum ChemnavStatus {
  /**
   * Success.
   */
  CHEMNAV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CHEMNAV_STATUS_NULL_ARGUMENT = 1,
  /**
   * The configuration failed validation.
   */
  CHEMNAV_STATUS_INVALID_CONFIG = 2,
  /**
   * Malformed JSON or an invalid runtime argument.
   */
  CHEMNAV_STATUS_INVALID_ARGUMENT = 3,
  /**
   * An internal simulation error.
   */
  CHEMNAV_STATUS_INTERNAL = 4,
  /**
   * A panic was caught at the FFI boundary.
   */
  CHEMNAV_STATUS_PANIC = 5,
} ChemnavStatus;

/**
 * Opaque experiment configuration handle.
 */
typedef struct ChemnavConfig ChemnavConfig;

/**
 * Scalar results of one simulated episode.
 */
typedef struct ChemnavEpisodeResult {
  /**
   * 1 if the agent reached the target band, else 0.
   */
  uint8_t success;
  /**
   * 1 if the network issued a terminal halt (obstacle mode), else 0.
   */
  uint8_t halted;
  /**
   * Seconds until first target contact; negative when never reached.
   */
  double time_to_target_s;
  /**
   * Mean absolute deviation from the target after first contact, mM.
   */
  double deviation_mean_mm;
  /**
   * Standard deviation of the tracking deviation, mM.
   */
  double deviation_std_mm;
  /**
   * Behavioral steps spent inside a forbidden region (obstacle mode).
   */
  uint64_t obstacle_violations;
} ChemnavEpisodeResult;

/**
 * Aggregate results of a batch.
 */
typedef struct ChemnavBatchResult {
  uint64_t n_episodes;
  /**
   * Fraction of episodes that reached the target band.
   */
  double success_rate;
  /**
   * Mean time-to-target over successful episodes, s.
   */
  double time_mean_s;
  /**
   * Standard deviation of time-to-target over successful episodes, s.
   */
  double time_std_s;
  /**
   * Pooled tracking deviation mean, mM.
   */
  double deviation_mean_mm;
  /**
   * Pooled tracking deviation standard deviation, mM.
   */
  double deviation_std_mm;
  /**
   * Deviation mean as a percentage of the arena concentration range.
   */
  double deviation_pct_of_range;
  /**
   * Fraction of episodes with zero forbidden-region entries.
   */
  double clean_avoidance_rate;
} ChemnavBatchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread, or null if no error occurred yet.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *chemnav_last_error_message(void);

/**
 * Create a configuration with the default contour-tracking protocol.
 */
struct ChemnavConfig *chemnav_config_new_default(void);

/**
 * Create a configuration with the obstacle-avoidance protocol.
 */
struct ChemnavConfig *chemnav_config_new_obstacle(void);

/**
 * Create a configuration from a JSON document (same schema as the CLI's
 * `--config` file). Returns null on error; inspect
 * `chemnav_last_error_message()`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated C string.
 */
struct ChemnavConfig *chemnav_config_from_json(const char *json);

/**
 * Release a configuration handle. Null is a no-op.
 *
 * # Safety
 * `config` must be null or a pointer returned by a `chemnav_config_new*`
 * function that has not been freed yet.
 */
void chemnav_config_free(struct ChemnavConfig *config);

/**
 * Set the base RNG seed (episode i uses seed + i).
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum ChemnavStatus chemnav_config_set_seed(struct ChemnavConfig *config, uint64_t seed);

/**
 * Set the batch episode count (must be >= 1).
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum ChemnavStatus chemnav_config_set_episodes(struct ChemnavConfig *config, uint64_t n_episodes);

/**
 * Select the navigation strategy: 0 = spiking network, 1 = graded network,
 * 2 = truncated-Levy forager.
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum ChemnavStatus chemnav_config_set_strategy(struct ChemnavConfig *config, uint32_t strategy);

/**
 * Enable impulse sensor noise with the given per-sample corruption
 * probability (0 disables noise; impulses are 0-12 mM with random sign).
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum ChemnavStatus chemnav_config_set_noise(struct ChemnavConfig *config,
                                            double corruption_probability);

/**
 * Run a single episode with the given seed.
 *
 * # Safety
 * `config` must be a live configuration handle and `out` a valid pointer.
 */
enum ChemnavStatus chemnav_run_episode(const struct ChemnavConfig *config,
                                       uint64_t seed,
                                       struct ChemnavEpisodeResult *out);

/**
 * Run the configured batch; fills the aggregate statistics and optionally
 * per-episode results.
 *
 * `episodes_out` may be null; when non-null it must have room for
 * `episodes_capacity` entries, and `episodes_written` (also optional)
 * receives the number filled in.
 *
 * # Safety
 * `config` must be a live configuration handle, `out` a valid pointer, and
 * `episodes_out` null or valid for `episodes_capacity` writes.
 */
enum ChemnavStatus chemnav_run_batch(const struct ChemnavConfig *config,
                                     struct ChemnavBatchResult *out,
                                     struct ChemnavEpisodeResult *episodes_out,
                                     uint64_t episodes_capacity,
                                     uint64_t *episodes_written);

/**
 * Library version as a static NUL-terminated string.
 */
const char *chemnav_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMNAV_H */
