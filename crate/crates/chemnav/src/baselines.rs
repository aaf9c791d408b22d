//! Comparison strategies: the truncated-Lévy memoryless forager and a
//! graded-potential reconstruction of the network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arena::Rect;
use crate::ase::{ase_membrane_step, AseParams, AseSide, AseState};
use crate::error::{Error, Result};
use crate::kinematics::{integrate_position, wrap_angle, AgentState};
use crate::network::{MotionCommand, NetworkConfig, Speed, SpeedSetter, Turn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyParams {
    /// Shortest run length, mm.
    pub s_min: f64,
    /// Longest run length, mm.
    pub s_max: f64,
    /// Power-law exponent of P(l) ∝ l^-exponent.
    pub exponent: f64,
    /// Constant travel speed, mm/s.
    pub speed: f64,
}

impl Default for LevyParams {
    fn default() -> Self {
        LevyParams {
            s_min: 0.2649,
            s_max: 40.0,
            exponent: 2.0,
            speed: 0.3,
        }
    }
}

impl LevyParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.s_min && self.s_min < self.s_max) {
            return Err(Error::config("s_min", "requires 0 < s_min < s_max"));
        }
        if !(self.exponent > 1.0) {
            return Err(Error::config("exponent", "must be > 1"));
        }
        Ok(())
    }

    /// Analytic mean run length of the truncated l^-2 density.
    pub fn analytic_mean(&self) -> f64 {
        (self.s_max / self.s_min).ln() / (1.0 / self.s_min - 1.0 / self.s_max)
    }
}

/// Inverse-CDF sample from the truncated l^-2 density on [s_min, s_max].
pub fn levy_sample_length<R: Rng>(params: &LevyParams, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    params.s_min * params.s_max / (params.s_max - u * (params.s_max - params.s_min))
}

/// Memoryless Lévy forager: straight runs of sampled length separated by
/// uniform random reorientations.
#[derive(Debug, Clone, Copy)]
pub struct LevyForagerState {
    /// Distance left in the current run, mm.
    pub remaining_run: f64,
}

impl LevyForagerState {
    pub fn new() -> Self {
        LevyForagerState { remaining_run: 0.0 }
    }
}

impl Default for LevyForagerState {
    fn default() -> Self {
        Self::new()
    }
}

pub fn levy_forager_step<R: Rng>(
    agent: AgentState,
    forager: &mut LevyForagerState,
    params: &LevyParams,
    bounds: &Rect,
    rng: &mut R,
    dt: f64,
) -> Result<AgentState> {
    let mut next = agent;
    if forager.remaining_run <= 0.0 {
        next.heading = wrap_angle(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
        forager.remaining_run = levy_sample_length(params, rng);
    }
    next.speed = params.speed;
    forager.remaining_run -= params.speed * dt;
    integrate_position(next, dt, bounds)
}

/// Tunables of the graded (non-spiking) decision layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedParams {
    /// Sigmoid sharpness of the comparator units, 1/mM.
    pub comparator_gain: f64,
    /// Low-pass time constant of the decision activities, s.
    pub tau_lowpass: f64,
    /// Activity level at which a decision unit issues commands.
    pub decision_level: f64,
    /// Minimum interval between issued turn commands, s.
    pub turn_period: f64,
    /// Soft-AND offset for the coincidence units.
    pub and_offset: f64,
    /// Gain of the gradient-detector inhibition into the explore unit.
    pub inhibition_gain: f64,
    /// Binding-rate scale of the graded sensory channels, 1/(mM s).
    /// Kept lower than the spiking network's scale so the analog units
    /// operate in their linear range rather than saturating.
    pub sensor_alpha0: f64,
}

impl Default for GradedParams {
    fn default() -> Self {
        GradedParams {
            comparator_gain: 0.3,
            tau_lowpass: 2.0,
            decision_level: 0.5,
            turn_period: 0.06,
            and_offset: 1.3,
            inhibition_gain: 2.0,
            sensor_alpha0: 6.0,
        }
    }
}

/// Analog state of the 7-unit graded network.
#[derive(Debug, Clone)]
pub struct GradedNetworkState {
    pub asel: AseState,
    pub aser: AseState,
    asel_params: AseParams,
    aser_params: AseParams,
    pub params: GradedParams,
    /// Low-pass decision activities of the turn-cw, turn-ccw and explore units.
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub last_speed_setter: SpeedSetter,
    since_turn_5: f64,
    since_turn_6: f64,
    since_turn_7: f64,
}

impl GradedNetworkState {
    pub fn new(config: &NetworkConfig, ambient: f64, params: GradedParams) -> Self {
        let mut asel_params = AseParams::graded(AseSide::Asel);
        let mut aser_params = AseParams::graded(AseSide::Aser);
        asel_params.alpha0_d = params.sensor_alpha0;
        aser_params.alpha0_d = params.sensor_alpha0;
        let _ = config;
        GradedNetworkState {
            asel: AseState::adapted(&asel_params, ambient),
            aser: AseState::adapted(&aser_params, ambient),
            asel_params,
            aser_params,
            params,
            a5: 0.0,
            a6: 0.0,
            a7: 0.0,
            last_speed_setter: SpeedSetter::NoneYet,
            since_turn_5: f64::INFINITY,
            since_turn_6: f64::INFINITY,
            since_turn_7: f64::INFINITY,
        }
    }

    fn coast_speed(&self) -> Speed {
        match self.last_speed_setter {
            SpeedSetter::NoneYet => Speed::Zero,
            SpeedSetter::Tracker => Speed::Track,
            SpeedSetter::Explorer => Speed::Explore,
        }
    }

    /// Membrane excursion normalized by the spiking variant's threshold gap.
    fn detector_activity(state: &AseState, params: &AseParams) -> f64 {
        let gap = -50.0 - params.rest_potential;
        ((state.potential - params.rest_potential) / gap).clamp(0.0, 1.0)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Advance the graded network one step and decode the analog activities
/// into the same command alphabet as the spiking network.
pub fn graded_network_step(
    state: &mut GradedNetworkState,
    config: &NetworkConfig,
    concentration: f64,
    dt: f64,
) -> Result<MotionCommand> {
    state.asel = ase_membrane_step(state.asel, &state.asel_params, concentration, dt)?;
    state.aser = ase_membrane_step(state.aser, &state.aser_params, concentration, dt)?;

    let p = state.params;
    let a1 = sigmoid(p.comparator_gain * (concentration - config.set_point));
    let a2 = sigmoid(p.comparator_gain * (config.set_point - concentration));
    let v3 = GradedNetworkState::detector_activity(&state.asel, &state.asel_params);
    let v4 = GradedNetworkState::detector_activity(&state.aser, &state.aser_params);

    let d5 = sigmoid(8.0 * (a1 + v3 - p.and_offset));
    let d6 = sigmoid(8.0 * (a2 + v4 - p.and_offset));
    // exploration drive: distance of the comparator pair from balance, which
    // is 0 at the set point and saturates to 1 on either side of it
    let imbalance = (2.0 * a1 - 1.0).abs();
    let d7 = sigmoid(8.0 * (imbalance - p.inhibition_gain * (v3 + v4) - 0.45));

    let k = dt / p.tau_lowpass;
    state.a5 += (d5 - state.a5) * k;
    state.a6 += (d6 - state.a6) * k;
    state.a7 += (d7 - state.a7) * k;

    state.since_turn_5 += dt;
    state.since_turn_6 += dt;
    state.since_turn_7 += dt;

    let cmd = if state.a5 >= p.decision_level && state.since_turn_5 >= p.turn_period {
        state.since_turn_5 = 0.0;
        state.last_speed_setter = SpeedSetter::Tracker;
        MotionCommand {
            turn: Turn::CwFixed,
            speed: Speed::Track,
        }
    } else if state.a6 >= p.decision_level && state.since_turn_6 >= p.turn_period {
        state.since_turn_6 = 0.0;
        state.last_speed_setter = SpeedSetter::Tracker;
        MotionCommand {
            turn: Turn::CcwFixed,
            speed: Speed::Track,
        }
    } else if state.a7 >= p.decision_level && state.since_turn_7 >= 0.26 {
        state.since_turn_7 = 0.0;
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
