//! C ABI for the navigation simulator.
//!
//! Conventions:
//! - Every object is an opaque handle created by a `*_new*` function and
//!   released by the matching `*_free` function.
//! - Functions return `ChemnavStatus`; on any non-OK status a human-readable
//!   message is available from `chemnav_last_error_message()` until the next
//!   call on the same thread.
//! - Output structs are plain C structs filled in by the callee.
//! - All panics are caught at the boundary and reported as
//!   `CHEMNAV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chemnav::arena::NoiseModel;
use chemnav::experiment::{
    run_batch_detailed, run_episode, ExperimentConfig, RunMetrics, Strategy,
};
use chemnav::Error;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let cstring = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemnavStatus {
    /// Success.
    ChemnavStatusOk = 0,
    /// A required pointer argument was null.
    ChemnavStatusNullArgument = 1,
    /// The configuration failed validation.
    ChemnavStatusInvalidConfig = 2,
    /// Malformed JSON or an invalid runtime argument.
    ChemnavStatusInvalidArgument = 3,
    /// An internal simulation error.
    ChemnavStatusInternal = 4,
    /// A panic was caught at the FFI boundary.
    ChemnavStatusPanic = 5,
}

fn status_of(err: &Error) -> ChemnavStatus {
    match err {
        Error::Config { .. } => ChemnavStatus::ChemnavStatusInvalidConfig,
        Error::InvalidArgument(_) | Error::Serde(_) => {
            ChemnavStatus::ChemnavStatusInvalidArgument
        }
        _ => ChemnavStatus::ChemnavStatusInternal,
    }
}

fn guard<F: FnOnce() -> ChemnavStatus>(f: F) -> ChemnavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic caught at FFI boundary");
            ChemnavStatus::ChemnavStatusPanic
        }
    }
}

/// Opaque experiment configuration handle.
pub struct ChemnavConfig {
    inner: ExperimentConfig,
}

/// Scalar results of one simulated episode.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChemnavEpisodeResult {
    /// 1 if the agent reached the target band, else 0.
    pub success: u8,
    /// 1 if the network issued a terminal halt (obstacle mode), else 0.
    pub halted: u8,
    /// Seconds until first target contact; negative when never reached.
    pub time_to_target_s: f64,
    /// Mean absolute deviation from the target after first contact, mM.
    pub deviation_mean_mm: f64,
    /// Standard deviation of the tracking deviation, mM.
    pub deviation_std_mm: f64,
    /// Behavioral steps spent inside a forbidden region (obstacle mode).
    pub obstacle_violations: u64,
}

/// Aggregate results of a batch.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChemnavBatchResult {
    pub n_episodes: u64,
    /// Fraction of episodes that reached the target band.
    pub success_rate: f64,
    /// Mean time-to-target over successful episodes, s.
    pub time_mean_s: f64,
    /// Standard deviation of time-to-target over successful episodes, s.
    pub time_std_s: f64,
    /// Pooled tracking deviation mean, mM.
    pub deviation_mean_mm: f64,
    /// Pooled tracking deviation standard deviation, mM.
    pub deviation_std_mm: f64,
    /// Deviation mean as a percentage of the arena concentration range.
    pub deviation_pct_of_range: f64,
    /// Fraction of episodes with zero forbidden-region entries.
    pub clean_avoidance_rate: f64,
}

fn fill_episode(out: &mut ChemnavEpisodeResult, m: &RunMetrics) {
    out.success = m.success as u8;
    out.halted = m.halted as u8;
    out.time_to_target_s = m.time_to_target.unwrap_or(-1.0);
    out.deviation_mean_mm = m.deviation_mean;
    out.deviation_std_mm = m.deviation_std;
    out.obstacle_violations = m.obstacle_violations;
}

/// Last error message for this thread, or null if no error occurred yet.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chemnav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Create a configuration with the default contour-tracking protocol.
#[no_mangle]
pub extern "C" fn chemnav_config_new_default() -> *mut ChemnavConfig {
    Box::into_raw(Box::new(ChemnavConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Create a configuration with the obstacle-avoidance protocol.
#[no_mangle]
pub extern "C" fn chemnav_config_new_obstacle() -> *mut ChemnavConfig {
    Box::into_raw(Box::new(ChemnavConfig {
        inner: ExperimentConfig::obstacle_default(),
    }))
}

/// Create a configuration from a JSON document (same schema as the CLI's
/// `--config` file). Returns null on error; inspect
/// `chemnav_last_error_message()`.
///
/// # Safety
/// `json` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_from_json(json: *const c_char) -> *mut ChemnavConfig {
    if json.is_null() {
        set_last_error("json argument is null");
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("json argument is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    match serde_json::from_str::<ExperimentConfig>(text) {
        Ok(inner) => match inner.validate() {
            Ok(()) => Box::into_raw(Box::new(ChemnavConfig { inner })),
            Err(e) => {
                set_last_error(&e.to_string());
                ptr::null_mut()
            }
        },
        Err(e) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Release a configuration handle. Null is a no-op.
///
/// # Safety
/// `config` must be null or a pointer returned by a `chemnav_config_new*`
/// function that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_free(config: *mut ChemnavConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Set the base RNG seed (episode i uses seed + i).
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_set_seed(
    config: *mut ChemnavConfig,
    seed: u64,
) -> ChemnavStatus {
    let Some(cfg) = config.as_mut() else {
        set_last_error("config is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    cfg.inner.seed = seed;
    ChemnavStatus::ChemnavStatusOk
}

/// Set the batch episode count (must be >= 1).
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_set_episodes(
    config: *mut ChemnavConfig,
    n_episodes: u64,
) -> ChemnavStatus {
    let Some(cfg) = config.as_mut() else {
        set_last_error("config is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    if n_episodes == 0 {
        set_last_error("n_episodes must be >= 1");
        return ChemnavStatus::ChemnavStatusInvalidConfig;
    }
    cfg.inner.n_episodes = n_episodes as usize;
    ChemnavStatus::ChemnavStatusOk
}

/// Select the navigation strategy: 0 = spiking network, 1 = graded network,
/// 2 = truncated-Levy forager.
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_set_strategy(
    config: *mut ChemnavConfig,
    strategy: u32,
) -> ChemnavStatus {
    let Some(cfg) = config.as_mut() else {
        set_last_error("config is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    cfg.inner.strategy = match strategy {
        0 => Strategy::Snn,
        1 => Strategy::Graded,
        2 => Strategy::Levy,
        _ => {
            set_last_error("strategy must be 0 (snn), 1 (graded) or 2 (levy)");
            return ChemnavStatus::ChemnavStatusInvalidArgument;
        }
    };
    ChemnavStatus::ChemnavStatusOk
}

/// Enable impulse sensor noise with the given per-sample corruption
/// probability (0 disables noise; impulses are 0-12 mM with random sign).
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn chemnav_config_set_noise(
    config: *mut ChemnavConfig,
    corruption_probability: f64,
) -> ChemnavStatus {
    let Some(cfg) = config.as_mut() else {
        set_last_error("config is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    if !(0.0..=1.0).contains(&corruption_probability) {
        set_last_error("corruption_probability must be in [0, 1]");
        return ChemnavStatus::ChemnavStatusInvalidArgument;
    }
    cfg.inner.noise = if corruption_probability == 0.0 {
        NoiseModel::none()
    } else {
        NoiseModel {
            corruption_probability,
            ..NoiseModel::salt_pepper()
        }
    };
    ChemnavStatus::ChemnavStatusOk
}

/// Run a single episode with the given seed.
///
/// # Safety
/// `config` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chemnav_run_episode(
    config: *const ChemnavConfig,
    seed: u64,
    out: *mut ChemnavEpisodeResult,
) -> ChemnavStatus {
    let (Some(cfg), Some(out)) = (config.as_ref(), out.as_mut()) else {
        set_last_error("config or out is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    guard(|| match run_episode(&cfg.inner, seed) {
        Ok(metrics) => {
            fill_episode(out, &metrics);
            ChemnavStatus::ChemnavStatusOk
        }
        Err(e) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
    })
}

/// Run the configured batch; fills the aggregate statistics and optionally
/// per-episode results.
///
/// `episodes_out` may be null; when non-null it must have room for
/// `episodes_capacity` entries, and `episodes_written` (also optional)
/// receives the number filled in.
///
/// # Safety
/// `config` must be a live configuration handle, `out` a valid pointer, and
/// `episodes_out` null or valid for `episodes_capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn chemnav_run_batch(
    config: *const ChemnavConfig,
    out: *mut ChemnavBatchResult,
    episodes_out: *mut ChemnavEpisodeResult,
    episodes_capacity: u64,
    episodes_written: *mut u64,
) -> ChemnavStatus {
    let (Some(cfg), Some(out)) = (config.as_ref(), out.as_mut()) else {
        set_last_error("config or out is null");
        return ChemnavStatus::ChemnavStatusNullArgument;
    };
    guard(|| match run_batch_detailed(&cfg.inner) {
        Ok((stats, metrics)) => {
            *out = ChemnavBatchResult {
                n_episodes: stats.n_episodes as u64,
                success_rate: stats.success_rate,
                time_mean_s: stats.time_mean,
                time_std_s: stats.time_std,
                deviation_mean_mm: stats.deviation_mean,
                deviation_std_mm: stats.deviation_std,
                deviation_pct_of_range: stats.deviation_pct_of_range,
                clean_avoidance_rate: stats.clean_avoidance_rate,
            };
            let mut written = 0u64;
            if !episodes_out.is_null() {
                for (i, m) in metrics.iter().take(episodes_capacity as usize).enumerate() {
                    fill_episode(&mut *episodes_out.add(i), m);
                    written += 1;
                }
            }
            if let Some(w) = episodes_written.as_mut() {
                *w = written;
            }
            ChemnavStatus::ChemnavStatusOk
        }
        Err(e) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chemnav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
