//! Agent motion: turn commands, the two-speed model, and boundary handling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arena::Rect;
use crate::error::{Error, Result};
use crate::network::{MotionCommand, Speed, Turn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicsParams {
    /// Exploration speed v_1, mm/s.
    pub v_explore: f64,
    /// Tracking speed v_2, mm/s.
    pub v_track: f64,
    /// Deterministic turn quantum, radians.
    pub fixed_turn: f64,
    /// Half-width of the random-walk turn interval, radians.
    pub random_turn_halfwidth: f64,
}

impl KinematicsParams {
    pub fn tracking() -> Self {
        KinematicsParams {
            v_explore: 0.3,
            v_track: 0.09,
            fixed_turn: 3.33f64.to_radians(),
            random_turn_halfwidth: 22.5f64.to_radians(),
        }
    }

    pub fn obstacle() -> Self {
        KinematicsParams {
            v_track: 0.04,
            random_turn_halfwidth: 15.0f64.to_radians(),
            ..KinematicsParams::tracking()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_explore > self.v_track && self.v_track > 0.0) {
            return Err(Error::config("v_explore", "requires v_explore > v_track > 0"));
        }
        if !(self.fixed_turn > 0.0 && self.random_turn_halfwidth > 0.0) {
            return Err(Error::config("fixed_turn", "turn angles must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// Position, mm.
    pub position: (f64, f64),
    /// Heading, radians, wrapped to [-π, π).
    pub heading: f64,
    /// Current speed, mm/s; one of {v_1, v_2, 0}.
    pub speed: f64,
    /// False once an obstacle-mode halt has fired.
    pub alive: bool,
}

impl AgentState {
    pub fn new(position: (f64, f64), heading: f64) -> Self {
        AgentState {
            position,
            heading: wrap_angle(heading),
            speed: 0.0,
            alive: true,
        }
    }
}

/// Wrap an angle to [-π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if w >= std::f64::consts::PI {
        w = -std::f64::consts::PI;
    }
    w
}

/// Apply one motion command to heading and speed.
pub fn apply_command<R: Rng>(
    state: AgentState,
    cmd: MotionCommand,
    params: &KinematicsParams,
    rng: &mut R,
) -> Result<AgentState> {
    if !state.alive {
        return Err(Error::InvalidState("command applied to halted agent".into()));
    }
    let mut next = state;
    match cmd.turn {
        Turn::None => {}
        Turn::CwFixed => {
            next.heading = wrap_angle(next.heading - params.fixed_turn);
        }
        Turn::CcwFixed => {
            next.heading = wrap_angle(next.heading + params.fixed_turn);
        }
        Turn::RandomUniform => {
            let delta =
                rng.gen_range(-params.random_turn_halfwidth..=params.random_turn_halfwidth);
            next.heading = wrap_angle(next.heading + delta);
        }
        Turn::Halt => {
            next.speed = 0.0;
            next.alive = false;
            return Ok(next);
        }
    }
    next.speed = match cmd.speed {
        Speed::Explore => params.v_explore,
        Speed::Track => params.v_track,
        Speed::Zero => 0.0,
    };
    Ok(next)
}

/// Move the agent for `dt` seconds along its heading, reflecting specularly
/// off arena walls.
pub fn integrate_position(state: AgentState, dt: f64, bounds: &Rect) -> Result<AgentState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let mut next = state;
    let mut x = state.position.0 + state.speed * dt * state.heading.cos();
    let mut y = state.position.1 + state.speed * dt * state.heading.sin();
    let mut dir_x = state.heading.cos();
    let mut dir_y = state.heading.sin();

    if x < bounds.x_min {
        x = bounds.x_min + (bounds.x_min - x);
        dir_x = -dir_x;
    } else if x > bounds.x_max {
        x = bounds.x_max - (x - bounds.x_max);
        dir_x = -dir_x;
    }
    if y < bounds.y_min {
        y = bounds.y_min + (bounds.y_min - y);
        dir_y = -dir_y;
    } else if y > bounds.y_max {
        y = bounds.y_max - (y - bounds.y_max);
        dir_y = -dir_y;
    }
    // Re-project in the degenerate case of a step longer than the arena.
    x = x.clamp(bounds.x_min, bounds.x_max);
    y = y.clamp(bounds.y_min, bounds.y_max);

    next.position = (x, y);
    next.heading = wrap_angle(dir_y.atan2(dir_x));
    Ok(next)
}
