//! The 7-neuron contour-tracking circuit and its obstacle-avoidance variant.
//!
//! N1/N2 are fixed-rate comparators against the set-point, N3/N4 the ASE
//! gradient detectors, N5/N6 coincidence detectors driving deterministic
//! turns, and N7 the gated random-walk neuron.

use serde::{Deserialize, Serialize};

use crate::ase::{ase_membrane_step, AseParams, AseSide, AseState};
use crate::dynamics::{
    lif_step, LifParams, LifState, SynapseAccumulator, SynapseKernelParams,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkMode {
    Tracking,
    Obstacle,
}

/// Signed synaptic weights of the circuit (w_ij: presynaptic i, postsynaptic j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapticWeights {
    pub w_15: f64,
    pub w_35: f64,
    pub w_26: f64,
    pub w_46: f64,
    pub w_17: f64,
    pub w_27: f64,
    pub w_37: f64,
    pub w_47: f64,
}

impl SynapticWeights {
    pub fn tracking_defaults() -> Self {
        SynapticWeights {
            w_15: 1.0,
            w_35: 1.0,
            w_26: 1.0,
            w_46: 1.0,
            w_17: 2.0,
            w_27: 2.0,
            w_37: -2.0,
            w_47: -2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Tracking set-point NaCl_track, mM (ignored in obstacle mode).
    pub set_point: f64,
    /// Comparator drive current I_app,0, nA.
    pub i_app0: f64,
    pub weights: SynapticWeights,
    /// Coincidence bias for N5, nA (negative).
    pub bias_5: f64,
    /// Coincidence bias for N6, nA (negative).
    pub bias_6: f64,
    /// Random-walk bias for N7, nA (negative when tracking, +1.36 in
    /// obstacle mode).
    pub bias_7: f64,
    pub mode: NetworkMode,
    /// Obstacle mode: signal level that must never be entered, S_avoid.
    pub obstacle_avoid_level: f64,
    /// Obstacle mode: destination level, S_desired.
    pub obstacle_goal_level: f64,
    /// Obstacle mode: N1 triggers this far below S_avoid so the turn
    /// happens before the forbidden region is entered.
    pub obstacle_avoid_margin: f64,
    /// Shared LIF parameters for N1, N2, N5, N6.
    pub lif: LifParams,
    /// N7 uses a slower membrane so its random-walk rate stays in the
    /// few-Hz band instead of sitting on the steep part of the f-I curve.
    pub lif_n7: LifParams,
    pub kernel: SynapseKernelParams,
    pub asel: AseParams,
    pub aser: AseParams,
}

impl NetworkConfig {
    pub fn tracking(set_point: f64) -> Self {
        NetworkConfig {
            set_point,
            i_app0: 1.02,
            weights: SynapticWeights::tracking_defaults(),
            // calibrate_coincidence_bias puts the single-input rejection
            // boundary near -0.84 at the default rates; the default sits
            // deeper so single-stream input stays rejected even with every
            // incoming weight drifted +10%.
            bias_5: -0.95,
            bias_6: -0.95,
            bias_7: -1.1,
            mode: NetworkMode::Tracking,
            obstacle_avoid_level: 65.0,
            obstacle_goal_level: 20.0,
            obstacle_avoid_margin: 5.0,
            lif: LifParams::default(),
            lif_n7: LifParams {
                capacitance: 10.0,
                ..LifParams::default()
            },
            kernel: SynapseKernelParams::default(),
            asel: AseParams::defaults(AseSide::Asel),
            aser: AseParams::defaults(AseSide::Aser),
        }
    }

    pub fn obstacle(avoid_level: f64, goal_level: f64) -> Self {
        let mut cfg = NetworkConfig::tracking(0.0);
        cfg.mode = NetworkMode::Obstacle;
        cfg.obstacle_avoid_level = avoid_level;
        cfg.obstacle_goal_level = goal_level;
        cfg.bias_7 = 1.36;
        // The three inhibitory synapses into N7 (from N2, N4 and N5) are
        // fixed at -1 in obstacle mode.
        cfg.weights.w_27 = -1.0;
        cfg.weights.w_47 = -1.0;
        cfg.weights.w_37 = -1.0; // unused: N3 does not project to N7 here
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        self.lif_n7.validate()?;
        self.kernel.validate()?;
        self.asel.validate()?;
        self.aser.validate()?;
        let w = &self.weights;
        if !(w.w_15 > 0.0 && w.w_35 > 0.0 && w.w_26 > 0.0 && w.w_46 > 0.0) {
            return Err(Error::config("weights", "coincidence inputs must be excitatory"));
        }
        match self.mode {
            NetworkMode::Tracking => {
                if !(w.w_17 > 0.0 && w.w_27 > 0.0) {
                    return Err(Error::config("weights", "w_17, w_27 must be > 0"));
                }
                if !(w.w_37 < 0.0 && w.w_47 < 0.0) {
                    return Err(Error::config("weights", "w_37, w_47 must be < 0"));
                }
                if !(self.bias_7 < 0.0) {
                    return Err(Error::config("bias_7", "must be negative when tracking"));
                }
            }
            NetworkMode::Obstacle => {
                if !(self.obstacle_avoid_level > self.obstacle_goal_level) {
                    return Err(Error::config(
                        "obstacle_avoid_level",
                        "must exceed obstacle_goal_level",
                    ));
                }
                if !(self.obstacle_avoid_margin >= 0.0) {
                    return Err(Error::config("obstacle_avoid_margin", "must be >= 0"));
                }
            }
        }
        if !(self.bias_5 < 0.0 && self.bias_6 < 0.0) {
            return Err(Error::config("bias_5", "coincidence biases must be negative"));
        }
        if !(self.i_app0 > 0.0) {
            return Err(Error::config("i_app0", "must be > 0"));
        }
        Ok(())
    }
}

/// Turn component of a decoded motion command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turn {
    None,
    CwFixed,
    CcwFixed,
    RandomUniform,
    Halt,
}

/// Speed component of a decoded motion command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speed {
    Explore,
    Track,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionCommand {
    pub turn: Turn,
    pub speed: Speed,
}

impl MotionCommand {
    pub const fn coast(speed: Speed) -> Self {
        MotionCommand {
            turn: Turn::None,
            speed,
        }
    }
}

/// Which decision neuron set the speed most recently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeedSetter {
    NoneYet,
    Tracker,
    Explorer,
}

/// Comparator identity for the applied-current rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    N1,
    N2,
}

/// Applied current for a comparator neuron: N1 is driven when the reading
/// exceeds the set-point, N2 when it falls below; both are silent at the
/// set-point exactly.
pub fn comparator_current(set_point: f64, concentration: f64, which: Comparator, i_app0: f64) -> f64 {
    match which {
        Comparator::N1 => {
            if concentration > set_point {
                i_app0
            } else {
                0.0
            }
        }
        Comparator::N2 => {
            if concentration < set_point {
                i_app0
            } else {
                0.0
            }
        }
    }
}

/// Runtime state of the full network.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub n1: LifState,
    pub n2: LifState,
    pub n3: AseState,
    pub n4: AseState,
    pub n5: LifState,
    pub n6: LifState,
    pub n7: LifState,
    /// Kernel accumulators for the presynaptic neurons N1..N5.
    acc: [SynapseAccumulator; 5],
    pub last_speed_setter: SpeedSetter,
    /// Latched once N2 fires in obstacle mode.
    pub halted: bool,
    dt: f64,
}

impl NetworkState {
    /// A network adapted to `ambient` mM, all neurons at rest.
    pub fn new(config: &NetworkConfig, ambient: f64, dt: f64) -> Self {
        NetworkState {
            n1: LifState::at_rest(&config.lif),
            n2: LifState::at_rest(&config.lif),
            n3: AseState::adapted(&config.asel, ambient),
            n4: AseState::adapted(&config.aser, ambient),
            n5: LifState::at_rest(&config.lif),
            n6: LifState::at_rest(&config.lif),
            n7: LifState::at_rest(&config.lif_n7),
            acc: [SynapseAccumulator::new(&config.kernel, dt); 5],
            last_speed_setter: SpeedSetter::NoneYet,
            halted: false,
            dt,
        }
    }

    /// Spike flags (N1..N7) for the step just taken, for raster export.
    pub fn spikes(&self) -> [bool; 7] {
        [
            self.n1.spiked_now,
            self.n2.spiked_now,
            self.n3.spiked_now,
            self.n4.spiked_now,
            self.n5.spiked_now,
            self.n6.spiked_now,
            self.n7.spiked_now,
        ]
    }

    fn coast_speed(&self) -> Speed {
        match self.last_speed_setter {
            SpeedSetter::NoneYet => Speed::Zero,
            SpeedSetter::Tracker => Speed::Track,
            SpeedSetter::Explorer => Speed::Explore,
        }
    }
}

/// Advance every neuron one step from the current sensor reading and decode
/// the spikes into a motion command.
pub fn network_step(
    state: &mut NetworkState,
    config: &NetworkConfig,
    concentration: f64,
    dt: f64,
) -> Result<MotionCommand> {
    if dt != state.dt {
        return Err(Error::InvalidArgument(format!(
            "network state was built for dt = {}, stepped with {}",
            state.dt, dt
        )));
    }
    if state.halted {
        return Ok(MotionCommand {
            turn: Turn::Halt,
            speed: Speed::Zero,
        });
    }

    let (n1_level, n2_level) = match config.mode {
        NetworkMode::Tracking => (config.set_point, config.set_point),
        NetworkMode::Obstacle => (
            config.obstacle_avoid_level - config.obstacle_avoid_margin,
            config.obstacle_goal_level,
        ),
    };
    let i1 = comparator_current(n1_level, concentration, Comparator::N1, config.i_app0);
    let i2 = comparator_current(n2_level, concentration, Comparator::N2, config.i_app0);

    state.n1 = lif_step(state.n1, &config.lif, i1, 0.0, dt)?;
    state.n2 = lif_step(state.n2, &config.lif, i2, 0.0, dt)?;
    state.n3 = ase_membrane_step(state.n3, &config.asel, concentration, dt)?;
    state.n4 = ase_membrane_step(state.n4, &config.aser, concentration, dt)?;

    state.acc[0].step(state.n1.spiked_now);
    state.acc[1].step(state.n2.spiked_now);
    state.acc[2].step(state.n3.spiked_now);
    state.acc[3].step(state.n4.spiked_now);

    let i0 = config.kernel.peak_scale;
    let w = &config.weights;
    let syn5 = i0 * (w.w_15 * state.acc[0].value() + w.w_35 * state.acc[2].value());
    state.n5 = lif_step(state.n5, &config.lif, config.bias_5, syn5, dt)?;
    state.acc[4].step(state.n5.spiked_now);

    match config.mode {
        NetworkMode::Tracking => {
            let syn6 = i0 * (w.w_26 * state.acc[1].value() + w.w_46 * state.acc[3].value());
            state.n6 = lif_step(state.n6, &config.lif, config.bias_6, syn6, dt)?;
            let syn7 = i0
                * (w.w_17 * state.acc[0].value()
                    + w.w_27 * state.acc[1].value()
                    + w.w_37 * state.acc[2].value()
                    + w.w_47 * state.acc[3].value());
            state.n7 = lif_step(state.n7, &config.lif_n7, config.bias_7, syn7, dt)?;

            // Gradient information supersedes exploration on ties.
            let cmd = if state.n5.spiked_now {
                state.last_speed_setter = SpeedSetter::Tracker;
                MotionCommand {
                    turn: Turn::CwFixed,
                    speed: Speed::Track,
                }
            } else if state.n6.spiked_now {
                state.last_speed_setter = SpeedSetter::Tracker;
                MotionCommand {
                    turn: Turn::CcwFixed,
                    speed: Speed::Track,
                }
            } else if state.n7.spiked_now {
                state.last_speed_setter = SpeedSetter::Explorer;
                MotionCommand {
                    turn: Turn::RandomUniform,
                    speed: Speed::Explore,
                }
            } else {
                MotionCommand::coast(state.coast_speed())
            };
            Ok(cmd)
        }
        NetworkMode::Obstacle => {
            // N6 is not instantiated; N7 is inhibited by N2, N4 and N5.
            let syn7 = i0
                * (w.w_27 * state.acc[1].value()
                    + w.w_47 * state.acc[3].value()
                    + -1.0 * state.acc[4].value());
            state.n7 = lif_step(state.n7, &config.lif_n7, config.bias_7, syn7, dt)?;

            if state.n2.spiked_now {
                state.halted = true;
                return Ok(MotionCommand {
                    turn: Turn::Halt,
                    speed: Speed::Zero,
                });
            }
            let cmd = if state.n5.spiked_now {
                state.last_speed_setter = SpeedSetter::Tracker;
                MotionCommand {
                    turn: Turn::CwFixed,
                    speed: Speed::Track,
                }
            } else if state.n7.spiked_now {
                state.last_speed_setter = SpeedSetter::Explorer;
                MotionCommand {
                    turn: Turn::RandomUniform,
                    speed: Speed::Explore,
                }
            } else {
                // Unlike the contour tracker, the obstacle network only slows
                // down while N5 is actively steering around a hill; once the
                // avoidance burst ends, coasting resumes at explore speed so
                // a downhill run (N7 silenced by N4) is not stuck crawling.
                let speed = match state.last_speed_setter {
                    SpeedSetter::NoneYet => Speed::Zero,
                    _ => Speed::Explore,
                };
                MotionCommand::coast(speed)
            };
            Ok(cmd)
        }
    }
}

/// Nominal presynaptic rates used by the bias calibration probes.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationInputs {
    /// Fixed comparator rate, Hz.
    pub rate_comparator: f64,
    /// Weakest sustained detector rate that must still open the gate, Hz.
    pub rate_detector_min: f64,
    /// Strongest detector rate that alone must never fire the neuron, Hz.
    pub rate_detector_max: f64,
}

impl Default for CalibrationInputs {
    fn default() -> Self {
        CalibrationInputs {
            rate_comparator: 12.8,
            rate_detector_min: 8.0,
            rate_detector_max: 16.7,
        }
    }
}

pub fn probe_spike_count(
    lif: &LifParams,
    kernel: &SynapseKernelParams,
    weights_and_rates: &[(f64, f64)],
    bias: f64,
    duration: f64,
    dt: f64,
) -> Result<(u32, Option<f64>)> {
    let mut accs: Vec<(f64, SynapseAccumulator, f64)> = weights_and_rates
        .iter()
        .map(|&(w, rate)| (w, SynapseAccumulator::new(kernel, dt), 1.0 / rate))
        .collect();
    let mut next_spike: Vec<f64> = accs.iter().map(|&(_, _, isi)| isi).collect();
    let mut state = LifState::at_rest(lif);
    let mut spikes = 0;
    let mut first = None;
    let steps = (duration / dt).round() as usize;
    for step in 0..steps {
        let t = step as f64 * dt;
        let mut syn = 0.0;
        for (idx, (w, acc, isi)) in accs.iter_mut().enumerate() {
            let fired = t + 0.5 * dt >= next_spike[idx];
            if fired {
                next_spike[idx] += *isi;
            }
            acc.step(fired);
            syn += *w * kernel.peak_scale * acc.value();
        }
        state = lif_step(state, lif, bias, syn, dt)?;
        if state.spiked_now {
            spikes += 1;
            first.get_or_insert(t);
        }
    }
    Ok((spikes, first))
}

/// Find the most negative bias at which a coincidence neuron still fires
/// when both of its excitatory streams are active, and verify that either
/// stream alone never fires it. Bisection over simulated probes.
pub fn calibrate_coincidence_bias(
    lif: &LifParams,
    kernel: &SynapseKernelParams,
    w_excite_pair: (f64, f64),
    inputs: &CalibrationInputs,
) -> Result<f64> {
    let dt = 1e-3;
    let probe_duration = 10.0;
    let deadline = 3.0 * kernel.tau_slow * 1e-3;
    let (w_cmp, w_det) = w_excite_pair;

    let dual_fires = |bias: f64| -> Result<bool> {
        let (count, first) = probe_spike_count(
            lif,
            kernel,
            &[
                (w_cmp, inputs.rate_comparator),
                (w_det, inputs.rate_detector_min),
            ],
            bias,
            probe_duration,
            dt,
        )?;
        // at least one spike per 1 s window, first within the deadline
        Ok(count >= probe_duration as u32 && first.map_or(false, |t| t <= deadline))
    };

    if !dual_fires(0.0)? {
        return Err(Error::Calibration(
            "dual-stream drive cannot fire the neuron even with zero bias".into(),
        ));
    }
    let mut lo = -10.0; // dual silent
    let mut hi = 0.0; // dual fires
    if dual_fires(lo)? {
        return Err(Error::Calibration("bias search range exhausted".into()));
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if dual_fires(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Step back inside the firing region by a small safety margin.
    let bias = hi + 0.02;

    for (w, rate) in [
        (w_cmp, inputs.rate_comparator),
        (w_det, inputs.rate_detector_max),
        (w_det, inputs.rate_detector_min),
    ] {
        let (count, _) = probe_spike_count(lif, kernel, &[(w, rate)], bias, probe_duration, dt)?;
        if count > 0 {
            return Err(Error::Calibration(format!(
                "single stream at {rate} Hz fires the neuron at bias {bias:.3} nA; \
                 weights are inconsistent with coincidence detection"
            )));
        }
    }
    Ok(bias)
}
