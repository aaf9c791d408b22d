//! A spiking-neural-network controller for chemotaxis-style gradient
//! navigation, with the arena, sensor, and kinematics models needed to run
//! closed-loop foraging experiments, plus Lévy-walk and graded-network
//! baselines.

pub mod arena;
pub mod ase;
pub mod baselines;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod kinematics;
pub mod network;

pub use error::{Error, Result};
