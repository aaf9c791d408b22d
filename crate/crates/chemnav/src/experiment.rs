//! Monte-Carlo experiment harness: seeded episodes, batch statistics,
//! weight-drift corner analysis, and result export.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arena::{NoiseModel, ScalarField};
use crate::baselines::{
    graded_network_step, levy_forager_step, GradedNetworkState, GradedParams, LevyForagerState,
    LevyParams,
};
use crate::error::{Error, Result};
use crate::kinematics::{apply_command, integrate_position, AgentState, KinematicsParams};
use crate::network::{network_step, NetworkConfig, NetworkMode, NetworkState, Turn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Snn,
    Graded,
    Levy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub arena: ScalarField,
    pub network: NetworkConfig,
    pub kinematics: KinematicsParams,
    pub strategy: Strategy,
    pub levy: LevyParams,
    pub graded: GradedParams,
    /// Episode length, s.
    pub episode_duration: f64,
    pub n_episodes: usize,
    /// Success when the clean concentration is within this of the target, mM.
    pub success_tolerance: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    /// Neuron integration step, s.
    pub dt_neural: f64,
    /// Sensor/decision/kinematics step, s.
    pub dt_behavior: f64,
    pub start_position: (f64, f64),
    pub record_trajectory: bool,
    pub record_raster: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            arena: ScalarField::default_plate(),
            network: NetworkConfig::tracking(55.0),
            kinematics: KinematicsParams::tracking(),
            strategy: Strategy::Snn,
            levy: LevyParams::default(),
            graded: GradedParams::default(),
            episode_duration: 1500.0,
            n_episodes: 200,
            success_tolerance: 0.5,
            noise: NoiseModel::none(),
            seed: 1,
            dt_neural: 1e-3,
            dt_behavior: 0.1,
            start_position: (20.0, 80.0),
            record_trajectory: false,
            record_raster: false,
        }
    }
}

impl ExperimentConfig {
    /// The obstacle-avoidance protocol: obstacle arena, obstacle network,
    /// reduced tracking speed and random-turn range.
    pub fn obstacle_default() -> Self {
        ExperimentConfig {
            arena: ScalarField::obstacle_course(),
            network: NetworkConfig::obstacle(65.0, 20.0),
            kinematics: KinematicsParams::obstacle(),
            start_position: (12.0, 12.0),
            ..ExperimentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arena.validate()?;
        self.network.validate()?;
        self.kinematics.validate()?;
        self.levy.validate()?;
        self.noise.validate()?;
        if self.n_episodes < 1 {
            return Err(Error::config("n_episodes", "must be >= 1"));
        }
        if !(self.success_tolerance > 0.0) {
            return Err(Error::config("success_tolerance", "must be > 0"));
        }
        if !(self.episode_duration >= 0.0) {
            return Err(Error::config("episode_duration", "must be >= 0"));
        }
        if !(self.dt_neural > 0.0 && self.dt_behavior >= self.dt_neural) {
            return Err(Error::config(
                "dt_behavior",
                "requires dt_behavior >= dt_neural > 0",
            ));
        }
        if !self.arena.bounds.contains(self.start_position) {
            return Err(Error::config("start_position", "outside arena bounds"));
        }
        Ok(())
    }

    fn target_level(&self) -> f64 {
        match self.network.mode {
            NetworkMode::Tracking => self.network.set_point,
            NetworkMode::Obstacle => self.network.obstacle_goal_level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub c_sensed: f64,
}

/// One spike-raster row: flags for N1..N7 at a neuron step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterRow {
    pub t: f64,
    pub c: f64,
    pub spikes: [bool; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub success: bool,
    /// First time the clean concentration entered the success band, s.
    pub time_to_target: Option<f64>,
    /// Mean |C_clean - target| over the tracking window, mM.
    pub deviation_mean: f64,
    /// Population standard deviation over the tracking window, mM.
    pub deviation_std: f64,
    /// Number of behavioral steps in the tracking window.
    pub deviation_samples: u64,
    /// Obstacle mode: behavioral steps spent above the avoid level.
    pub obstacle_violations: u64,
    /// True if the episode ended in a terminal halt.
    pub halted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<Vec<TrajectorySample>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raster: Option<Vec<RasterRow>>,
}

#[derive(Debug, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).sqrt()
        }
    }
}

enum Controller {
    Snn(NetworkState),
    Graded(GradedNetworkState),
    Levy(LevyForagerState),
}

/// Simulate one closed-loop episode with its own RNG stream.
pub fn run_episode(config: &ExperimentConfig, seed: u64) -> Result<RunMetrics> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ambient = config.arena.value_unchecked(config.start_position);
    let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut agent = AgentState::new(config.start_position, heading);

    let mut controller = match config.strategy {
        Strategy::Snn => Controller::Snn(NetworkState::new(
            &config.network,
            ambient,
            config.dt_neural,
        )),
        Strategy::Graded => Controller::Graded(GradedNetworkState::new(
            &config.network,
            ambient,
            config.graded,
        )),
        Strategy::Levy => Controller::Levy(LevyForagerState::new()),
    };

    let target = config.target_level();
    let n_steps = (config.episode_duration / config.dt_behavior).round() as u64;
    let substeps = (config.dt_behavior / config.dt_neural).round() as u64;

    let mut deviation = Welford::default();
    let mut time_to_target = None;
    let mut violations = 0u64;
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut raster = config.record_raster.then(Vec::new);

    for step in 0..n_steps {
        if !agent.alive {
            break;
        }
        let t = step as f64 * config.dt_behavior;
        // the concentration field is smooth at behavioral step scales, but the
        // sensor itself samples (and is corrupted) at the neural rate
        let clean = config.arena.concentration_at(agent.position)?;
        if let Some(rows) = trajectory.as_mut() {
            rows.push(TrajectorySample {
                t,
                x: agent.position.0,
                y: agent.position.1,
                heading: agent.heading,
                speed: agent.speed,
                c_sensed: clean,
            });
        }

        match &mut controller {
            Controller::Snn(state) => {
                for k in 0..substeps {
                    let reading = config.noise.corrupt(clean, &mut rng);
                    let cmd = network_step(state, &config.network, reading, config.dt_neural)?;
                    if let Some(rows) = raster.as_mut() {
                        let spikes = state.spikes();
                        if spikes.iter().any(|&s| s) {
                            rows.push(RasterRow {
                                t: t + (k + 1) as f64 * config.dt_neural,
                                c: reading,
                                spikes,
                            });
                        }
                    }
                    agent = apply_command(agent, cmd, &config.kinematics, &mut rng)?;
                    if !agent.alive {
                        break;
                    }
                    if cmd.turn == Turn::Halt {
                        break;
                    }
                }
                if agent.alive && agent.speed > 0.0 {
                    agent = integrate_position(agent, config.dt_behavior, &config.arena.bounds)?;
                }
            }
            Controller::Graded(state) => {
                for _ in 0..substeps {
                    let reading = config.noise.corrupt(clean, &mut rng);
                    let cmd = graded_network_step(state, &config.network, reading, config.dt_neural)?;
                    agent = apply_command(agent, cmd, &config.kinematics, &mut rng)?;
                }
                if agent.speed > 0.0 {
                    agent = integrate_position(agent, config.dt_behavior, &config.arena.bounds)?;
                }
            }
            Controller::Levy(state) => {
                agent = levy_forager_step(
                    agent,
                    state,
                    &config.levy,
                    &config.arena.bounds,
                    &mut rng,
                    config.dt_behavior,
                )?;
            }
        }

        let c_clean = config.arena.value_unchecked(agent.position);
        let in_band = match config.network.mode {
            NetworkMode::Tracking => (c_clean - target).abs() <= config.success_tolerance,
            NetworkMode::Obstacle => c_clean <= target,
        };
        if in_band && time_to_target.is_none() {
            time_to_target = Some((step + 1) as f64 * config.dt_behavior);
        }
        if time_to_target.is_some() {
            deviation.push((c_clean - target).abs());
        }
        if config.network.mode == NetworkMode::Obstacle
            && c_clean > config.network.obstacle_avoid_level
        {
            violations += 1;
        }
    }

    Ok(RunMetrics {
        success: time_to_target.is_some(),
        time_to_target,
        deviation_mean: deviation.mean,
        deviation_std: deviation.std(),
        deviation_samples: deviation.n,
        obstacle_violations: violations,
        halted: !agent.alive,
        trajectory,
        raster,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n_episodes: usize,
    pub success_rate: f64,
    /// Mean/std of time-to-target over successful episodes, s.
    pub time_mean: f64,
    pub time_std: f64,
    /// Tracking deviation pooled over every in-window sample, mM.
    pub deviation_mean: f64,
    pub deviation_std: f64,
    /// Deviation mean as a percentage of the arena concentration range.
    pub deviation_pct_of_range: f64,
    /// Arena concentration range (max - min on a 200x200 grid), mM.
    pub concentration_range: f64,
    /// Obstacle mode: fraction of episodes with zero avoid-level entries.
    pub clean_avoidance_rate: f64,
}

pub fn aggregate(config: &ExperimentConfig, metrics: &[RunMetrics]) -> BatchStats {
    let n = metrics.len();
    let successes: Vec<&RunMetrics> = metrics.iter().filter(|m| m.success).collect();
    let mut time = Welford::default();
    for m in &successes {
        time.push(m.time_to_target.unwrap());
    }
    // pooled deviation moments over every sample of every window
    let total: u64 = metrics.iter().map(|m| m.deviation_samples).sum();
    let (mut mean, mut second) = (0.0, 0.0);
    if total > 0 {
        for m in metrics {
            let w = m.deviation_samples as f64 / total as f64;
            mean += w * m.deviation_mean;
            second += w * (m.deviation_std.powi(2) + m.deviation_mean.powi(2));
        }
    }
    let (lo, hi) = config.arena.grid_range(200);
    let range = hi - lo;
    BatchStats {
        n_episodes: n,
        success_rate: successes.len() as f64 / n.max(1) as f64,
        time_mean: time.mean,
        time_std: time.std(),
        deviation_mean: mean,
        deviation_std: (second - mean * mean).max(0.0).sqrt(),
        deviation_pct_of_range: 100.0 * mean / range,
        concentration_range: range,
        clean_avoidance_rate: metrics
            .iter()
            .filter(|m| m.obstacle_violations == 0)
            .count() as f64
            / n.max(1) as f64,
    }
}

/// Run `n_episodes` independent episodes with seeds seed+i and aggregate.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchStats> {
    run_batch_detailed(config).map(|(stats, _)| stats)
}

pub fn run_batch_detailed(config: &ExperimentConfig) -> Result<(BatchStats, Vec<RunMetrics>)> {
    config.validate()?;
    let metrics: Result<Vec<RunMetrics>> = (0..config.n_episodes)
        .into_par_iter()
        .map(|i| run_episode(config, config.seed + i as u64))
        .collect();
    let metrics = metrics?;
    Ok((aggregate(config, &metrics), metrics))
}

/// The drift direction of one output neuron in a sensitivity corner.
fn corner_label(more: [bool; 3]) -> String {
    format!(
        "N5{} N6{} N7{}",
        if more[0] { "+" } else { "-" },
        if more[1] { "+" } else { "-" },
        if more[2] { "+" } else { "-" }
    )
}

/// Scale a config's synaptic weights so each of N5, N6, N7 becomes maximally
/// more (+) or less (-) sensitive by the drift fraction.
pub fn corner_config(config: &ExperimentConfig, drift: f64, more: [bool; 3]) -> ExperimentConfig {
    let mut cfg = config.clone();
    let up = 1.0 + drift;
    let down = 1.0 - drift;
    let scale = |m: bool| if m { up } else { down };
    let w = &mut cfg.network.weights;
    w.w_15 *= scale(more[0]);
    w.w_35 *= scale(more[0]);
    w.w_26 *= scale(more[1]);
    w.w_46 *= scale(more[1]);
    w.w_17 *= scale(more[2]);
    w.w_27 *= scale(more[2]);
    // inhibitory synapses move the opposite way
    w.w_37 *= scale(!more[2]);
    w.w_47 *= scale(!more[2]);
    cfg
}

/// Run the 8 maximum-sensitivity drift corners, reusing the baseline seeds
/// so corner comparisons are paired.
pub fn corner_analysis(
    config: &ExperimentConfig,
    drift: f64,
) -> Result<Vec<(String, BatchStats)>> {
    if !(0.0..1.0).contains(&drift) {
        return Err(Error::InvalidArgument(format!(
            "drift must be in [0, 1), got {drift}"
        )));
    }
    let mut out = Vec::with_capacity(9);
    out.push(("baseline".to_string(), run_batch(config)?));
    for bits in 0..8u8 {
        let more = [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0];
        let cfg = corner_config(config, drift, more);
        out.push((corner_label(more), run_batch(&cfg)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub stats: BatchStats,
    pub episodes: Vec<RunMetrics>,
}

/// Write batch results with deterministic field ordering.
pub fn export_results(
    stats: &BatchStats,
    metrics: &[RunMetrics],
    format: ExportFormat,
    path: &Path,
) -> Result<()> {
    match format {
        ExportFormat::Csv => {
            let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
            writeln!(file, "episode,success,time_to_target_s,dev_mean_mM,dev_std_mM")
                .map_err(|e| Error::io(path, e))?;
            for (i, m) in metrics.iter().enumerate() {
                let t = m
                    .time_to_target
                    .map(|t| format!("{t}"))
                    .unwrap_or_default();
                writeln!(
                    file,
                    "{},{},{},{},{}",
                    i, m.success, t, m.deviation_mean, m.deviation_std
                )
                .map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        }
        ExportFormat::Json => {
            let doc = ResultsDocument {
                stats: stats.clone(),
                episodes: metrics
                    .iter()
                    .map(|m| RunMetrics {
                        trajectory: None,
                        raster: None,
                        ..m.clone()
                    })
                    .collect(),
            };
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            serde_json::to_writer_pretty(file, &doc)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            episode_duration: 30.0,
            n_episodes: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_duration_episode_degenerates() {
        let config = ExperimentConfig {
            episode_duration: 0.0,
            ..quick_config()
        };
        let m = run_episode(&config, 3).unwrap();
        assert!(!m.success);
        assert_eq!(m.time_to_target, None);
        assert_eq!(m.deviation_samples, 0);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let config = quick_config();
        let a = run_episode(&config, 9).unwrap();
        let b = run_episode(&config, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_episode_batch_is_that_episode() {
        let config = ExperimentConfig {
            n_episodes: 1,
            ..quick_config()
        };
        let (stats, metrics) = run_batch_detailed(&config).unwrap();
        let single = run_episode(&config, config.seed).unwrap();
        assert_eq!(metrics[0], single);
        assert_eq!(stats.success_rate, if single.success { 1.0 } else { 0.0 });
        assert_eq!(stats.deviation_mean, single.deviation_mean);
    }

    #[test]
    fn zero_drift_corners_equal_baseline() {
        let config = ExperimentConfig {
            episode_duration: 20.0,
            n_episodes: 2,
            ..ExperimentConfig::default()
        };
        let corners = corner_analysis(&config, 0.0).unwrap();
        assert_eq!(corners.len(), 9);
        let baseline = &corners[0].1;
        for (label, stats) in &corners[1..] {
            assert_eq!(stats, baseline, "corner {label} differs at zero drift");
        }
    }

    #[test]
    fn corner_scaling_directions() {
        let config = ExperimentConfig::default();
        let more = corner_config(&config, 0.10, [true, true, true]);
        let w0 = &config.network.weights;
        let w = &more.network.weights;
        assert!((w.w_15 - w0.w_15 * 1.10).abs() < 1e-12);
        assert!((w.w_35 - w0.w_35 * 1.10).abs() < 1e-12);
        // inhibitory synapses into N7 weaken when N7 is made more sensitive
        assert!((w.w_37 - w0.w_37 * 0.90).abs() < 1e-12);
    }

    #[test]
    fn invalid_config_names_the_field() {
        let config = ExperimentConfig {
            n_episodes: 0,
            ..ExperimentConfig::default()
        };
        match run_batch(&config) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "n_episodes"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn export_csv_header_and_json_roundtrip() {
        let config = quick_config();
        let (stats, metrics) = run_batch_detailed(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let csv_path = dir.path().join("results.csv");
        export_results(&stats, &metrics, ExportFormat::Csv, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("episode,success,time_to_target_s,dev_mean_mM,dev_std_mM\n"));
        assert_eq!(text.lines().count(), 1 + metrics.len());

        let json_path = dir.path().join("results.json");
        export_results(&stats, &metrics, ExportFormat::Json, &json_path).unwrap();
        let doc: ResultsDocument =
            serde_json::from_reader(File::open(&json_path).unwrap()).unwrap();
        assert_eq!(doc.stats, stats);

        // empty metrics -> header-only CSV
        let empty_path = dir.path().join("empty.csv");
        export_results(&stats, &[], ExportFormat::Csv, &empty_path).unwrap();
        let text = std::fs::read_to_string(&empty_path).unwrap();
        assert_eq!(text, "episode,success,time_to_target_s,dev_mean_mM,dev_std_mM\n");
    }
}
