//! Command-line front end for the navigation simulator.
//!
//! Every subcommand accepts a JSON experiment config (`--config`) plus a few
//! common overrides. Config errors exit nonzero with a machine-readable JSON
//! object on stderr.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use chemnav::arena::NoiseModel;
use chemnav::ase::{spike_rate_vs_gradient, AseParams, AseSide};
use chemnav::error::Error;
use chemnav::experiment::{
    corner_analysis, run_batch_detailed, run_episode, ExperimentConfig, ExportFormat, Strategy,
};
use chemnav::network::{calibrate_coincidence_bias, CalibrationInputs, NetworkConfig};

#[derive(Parser)]
#[command(
    name = "chemnav",
    about = "Spiking-neuron gradient navigation simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON experiment configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed (episode i uses seed + i).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of episodes in a batch.
    #[arg(long, global = true)]
    episodes: Option<usize>,

    /// Sensor corruption probability per 1 kHz sample (0 disables noise;
    /// impulses are 0-12 mM, random sign).
    #[arg(long, global = true)]
    noise: Option<f64>,

    /// Navigation strategy.
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,

    /// Directory for emitted CSV/JSON files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for batch runs (0 = one per core).
    #[arg(long, global = true)]
    parallel: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Snn,
    Graded,
    Levy,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and emit its trajectory and spike raster.
    Simulate(CommonOpts),
    /// Run a Monte-Carlo batch and emit per-episode metrics plus summary.
    Batch(CommonOpts),
    /// Run the 8 synaptic-drift corners and emit their batch statistics.
    Corners {
        #[command(flatten)]
        common: CommonOpts,
        /// Drift fraction applied to each neuron's incoming weights.
        #[arg(long, default_value_t = 0.1)]
        drift: f64,
    },
    /// Run the obstacle-avoidance protocol (goal-seeking with forbidden
    /// high-signal regions).
    Obstacle(CommonOpts),
    /// Sweep sensory-neuron spike rate against ramp gradient at several
    /// spike thresholds, and report the calibrated coincidence bias.
    Calibrate {
        #[command(flatten)]
        common: CommonOpts,
        /// Ramp gradients to probe, mM/s.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.02, 0.05, 0.1, 0.2])]
        gradients: Vec<f64>,
        /// Spike thresholds to probe, mV.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = vec![-55.0, -50.0, -45.0])]
        thresholds: Vec<f64>,
    },
    /// Export the arena concentration field on a regular grid.
    Field {
        #[command(flatten)]
        common: CommonOpts,
        /// Grid spacing, mm.
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            let (kind, field) = match &err {
                Error::Config { field, .. } => ("config", Some(field.clone())),
                Error::InvalidArgument(_) => ("invalid_argument", None),
                Error::InvalidState(_) => ("invalid_state", None),
                Error::Calibration(_) => ("calibration", None),
                Error::OutOfBounds(..) => ("out_of_bounds", None),
                Error::Io { path, .. } => ("io", Some(path.clone())),
                Error::Serde(_) => ("serde", None),
            };
            let body = serde_json::json!({
                "error": { "kind": kind, "field": field, "message": err.to_string() }
            });
            eprintln!("{body}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> chemnav::Result<()> {
    match cli.command {
        Command::Simulate(common) => simulate(&common),
        Command::Batch(common) => batch(&common, false),
        Command::Obstacle(common) => batch(&common, true),
        Command::Corners { common, drift } => corners(&common, drift),
        Command::Calibrate {
            common,
            gradients,
            thresholds,
        } => calibrate(&common, &gradients, &thresholds),
        Command::Field { common, resolution } => field(&common, resolution),
    }
}

/// Build the effective config: file (or defaults), then CLI overrides.
fn load_config(common: &CommonOpts, obstacle: bool) -> chemnav::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_reader(file)?
        }
        None if obstacle => ExperimentConfig::obstacle_default(),
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(n) = common.episodes {
        cfg.n_episodes = n;
    }
    if let Some(p) = common.noise {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config("noise", "probability must be in [0, 1]"));
        }
        cfg.noise = if p == 0.0 {
            NoiseModel::none()
        } else {
            NoiseModel {
                corruption_probability: p,
                ..NoiseModel::salt_pepper()
            }
        };
    }
    if let Some(strategy) = common.strategy {
        cfg.strategy = match strategy {
            StrategyArg::Snn => Strategy::Snn,
            StrategyArg::Graded => Strategy::Graded,
            StrategyArg::Levy => Strategy::Levy,
        };
    }
    cfg.validate()?;
    if let Some(threads) = common.parallel {
        // Ignore failure: the global pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    std::fs::create_dir_all(&common.out_dir).map_err(|e| Error::io(&common.out_dir, e))?;
    Ok(cfg)
}

fn out_path(common: &CommonOpts, name: &str) -> PathBuf {
    common.out_dir.join(name)
}

fn write_file(path: &Path, body: &str) -> chemnav::Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(body.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn simulate(common: &CommonOpts) -> chemnav::Result<()> {
    let mut cfg = load_config(common, false)?;
    cfg.record_trajectory = true;
    cfg.record_raster = true;
    let metrics = run_episode(&cfg, cfg.seed)?;

    let mut traj = String::from("t_s,x_mm,y_mm,heading_rad,speed_mm_s,c_sensed_mM\n");
    for s in metrics.trajectory.as_deref().unwrap_or_default() {
        traj.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.t, s.x, s.y, s.heading, s.speed, s.c_sensed
        ));
    }
    write_file(&out_path(common, "trajectory.csv"), &traj)?;

    let mut raster = String::from("t_s,c_sensed_mM,n1,n2,n3,n4,n5,n6,n7\n");
    for r in metrics.raster.as_deref().unwrap_or_default() {
        raster.push_str(&format!("{},{}", r.t, r.c));
        for spiked in r.spikes {
            raster.push_str(if spiked { ",1" } else { ",0" });
        }
        raster.push('\n');
    }
    write_file(&out_path(common, "raster.csv"), &raster)?;

    let summary = serde_json::json!({
        "success": metrics.success,
        "time_to_target_s": metrics.time_to_target,
        "deviation_mean_mM": metrics.deviation_mean,
        "deviation_std_mM": metrics.deviation_std,
        "obstacle_violations": metrics.obstacle_violations,
        "halted": metrics.halted,
    });
    println!("{summary:#}");
    Ok(())
}

fn batch(common: &CommonOpts, obstacle: bool) -> chemnav::Result<()> {
    let cfg = load_config(common, obstacle)?;
    let (stats, episodes) = run_batch_detailed(&cfg)?;
    chemnav::experiment::export_results(
        &stats,
        &episodes,
        ExportFormat::Csv,
        &out_path(common, "results.csv"),
    )?;
    chemnav::experiment::export_results(
        &stats,
        &episodes,
        ExportFormat::Json,
        &out_path(common, "results.json"),
    )?;
    println!("{:#}", serde_json::to_value(&stats)?);
    Ok(())
}

fn corners(common: &CommonOpts, drift: f64) -> chemnav::Result<()> {
    let cfg = load_config(common, false)?;
    let report = corner_analysis(&cfg, drift)?;
    let mut csv = String::from(
        "label,success_rate,time_mean_s,time_std_s,dev_mean_mM,dev_std_mM\n",
    );
    for (label, stats) in &report {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            label,
            stats.success_rate,
            stats.time_mean,
            stats.time_std,
            stats.deviation_mean,
            stats.deviation_std
        ));
    }
    write_file(&out_path(common, "corners.csv"), &csv)?;
    let doc: Vec<_> = report
        .iter()
        .map(|(label, stats)| serde_json::json!({ "label": label, "stats": stats }))
        .collect();
    println!("{:#}", serde_json::Value::Array(doc));
    Ok(())
}

fn calibrate(
    common: &CommonOpts,
    gradients: &[f64],
    thresholds: &[f64],
) -> chemnav::Result<()> {
    let cfg = load_config(common, false)?;
    let mut csv = String::from("spike_threshold_mV,gradient_mM_s,rate_hz\n");
    let mut rows = Vec::new();
    for &v_t in thresholds {
        for &g in gradients {
            let params = AseParams {
                spike_threshold: v_t,
                ..AseParams::defaults(AseSide::Asel)
            };
            let rate = spike_rate_vs_gradient(&params, 40.0, g, 60.0, cfg.dt_neural)?;
            csv.push_str(&format!("{v_t},{g},{rate}\n"));
            rows.push(serde_json::json!({
                "spike_threshold_mV": v_t,
                "gradient_mM_s": g,
                "rate_hz": rate,
            }));
        }
    }
    write_file(&out_path(common, "calibration.csv"), &csv)?;

    let net = NetworkConfig::tracking(cfg.network.set_point);
    let bias = calibrate_coincidence_bias(
        &net.lif,
        &net.kernel,
        (net.weights.w_15, net.weights.w_35),
        &CalibrationInputs::default(),
    )?;
    let summary = serde_json::json!({
        "sweep": rows,
        "coincidence_bias_boundary_nA": bias,
        "default_bias_nA": net.bias_5,
    });
    println!("{summary:#}");
    Ok(())
}

fn field(common: &CommonOpts, resolution: f64) -> chemnav::Result<()> {
    if !(resolution > 0.0) {
        return Err(Error::config("resolution", "must be > 0"));
    }
    let cfg = load_config(common, false)?;
    let bounds = cfg.arena.bounds;
    let mut csv = String::from("x_mm,y_mm,concentration_mM\n");
    let mut y = bounds.y_min;
    while y <= bounds.y_max {
        let mut x = bounds.x_min;
        while x <= bounds.x_max {
            let c = cfg.arena.concentration_at((x, y))?;
            csv.push_str(&format!("{x},{y},{c}\n"));
            x += resolution;
        }
        y += resolution;
    }
    write_file(&out_path(common, "field.csv"), &csv)?;
    println!(
        "{:#}",
        serde_json::json!({ "file": out_path(common, "field.csv"), "resolution_mm": resolution })
    );
    Ok(())
}
