//! The 2D concentration landscape and the sensor noise model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x_min && p.0 <= self.x_max && p.1 >= self.y_min && p.1 <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// One Gaussian hill (positive amplitude) or valley (negative amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: (f64, f64),
    /// Peak deviation from baseline, mM (signed).
    pub amplitude: f64,
    /// Gaussian width σ, mm.
    pub width: f64,
}

/// Static analytic concentration landscape: baseline plus Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub bumps: Vec<Bump>,
    /// Ambient concentration, mM.
    pub baseline: f64,
    pub bounds: Rect,
}

impl ScalarField {
    /// The 10 cm square plate: one hill to 70 mM, one valley to 10 mM on a
    /// 40 mM baseline, with closed 55 mM and 20 mM contours.
    pub fn default_plate() -> Self {
        ScalarField {
            bumps: vec![
                Bump {
                    center: (70.0, 70.0),
                    amplitude: 30.0,
                    width: 15.0,
                },
                Bump {
                    center: (65.0, 25.0),
                    amplitude: -30.0,
                    width: 15.0,
                },
            ],
            baseline: 40.0,
            bounds: Rect {
                x_min: 0.0,
                x_max: 100.0,
                y_min: 0.0,
                y_max: 100.0,
            },
        }
    }

    /// Obstacle-avoidance arena: a broad valley slopes toward the
    /// destination in the far corner, so a downhill drift is sensed from
    /// anywhere in the arena, while sharp hills along the way are the
    /// forbidden regions the agent must skirt.
    pub fn obstacle_course() -> Self {
        ScalarField {
            bumps: vec![
                // Goal funnel: minimum 14 mM at (85, 85); the S <= 20
                // destination disc has radius ~33 mm around it.
                Bump {
                    center: (85.0, 85.0),
                    amplitude: -26.0,
                    width: 45.0,
                },
                // Obstacle hills; each peak exceeds the 65 mM avoid level.
                Bump {
                    center: (40.0, 40.0),
                    amplitude: 45.0,
                    width: 7.0,
                },
                Bump {
                    center: (70.0, 52.0),
                    amplitude: 50.0,
                    width: 7.0,
                },
                Bump {
                    center: (58.0, 70.0),
                    amplitude: 50.0,
                    width: 7.0,
                },
            ],
            baseline: 40.0,
            bounds: Rect {
                x_min: 0.0,
                x_max: 100.0,
                y_min: 0.0,
                y_max: 100.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bumps.iter().any(|b| !(b.width > 0.0)) {
            return Err(Error::config("bumps", "every bump needs width > 0"));
        }
        if !(self.bounds.width() > 0.0 && self.bounds.height() > 0.0) {
            return Err(Error::config("bounds", "degenerate arena rectangle"));
        }
        Ok(())
    }

    /// Clean concentration (mM) at a position inside the arena.
    pub fn concentration_at(&self, position: (f64, f64)) -> Result<f64> {
        if !self.bounds.contains(position) {
            return Err(Error::OutOfBounds(position.0, position.1));
        }
        Ok(self.value_unchecked(position))
    }

    pub(crate) fn value_unchecked(&self, position: (f64, f64)) -> f64 {
        let mut c = self.baseline;
        for b in &self.bumps {
            let dx = position.0 - b.center.0;
            let dy = position.1 - b.center.1;
            c += b.amplitude * (-(dx * dx + dy * dy) / (2.0 * b.width * b.width)).exp();
        }
        c
    }

    /// Analytic spatial gradient, mM/mm.
    pub fn gradient_at(&self, position: (f64, f64)) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for b in &self.bumps {
            let dx = position.0 - b.center.0;
            let dy = position.1 - b.center.1;
            let w2 = b.width * b.width;
            let g = b.amplitude * (-(dx * dx + dy * dy) / (2.0 * w2)).exp() / w2;
            gx -= g * dx;
            gy -= g * dy;
        }
        (gx, gy)
    }

    /// Field extrema sampled on an n×n grid.
    pub fn grid_range(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let x = self.bounds.x_min + self.bounds.width() * i as f64 / (n - 1) as f64;
                let y = self.bounds.y_min + self.bounds.height() * j as f64 / (n - 1) as f64;
                let c = self.value_unchecked((x, y));
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    SaltPepper,
}

/// Impulsive sensor corruption: with some probability per reading, add a
/// uniformly sized perturbation of random sign. Each reading is one sensor
/// sample, so a corrupted sample is an impulse lasting a single sample
/// interval, not a sustained offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub corruption_probability: f64,
    /// Maximum perturbation magnitude, mM.
    pub max_magnitude: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            corruption_probability: 0.0,
            max_magnitude: 0.0,
        }
    }

    /// 0-12 mM impulses at a density of 0.001 per sample, which at the 1 kHz
    /// sensor rate works out to about one corrupted millisecond per second
    /// (0.1 expected impulses per 0.1 s behavioral sensing window).
    pub fn salt_pepper() -> Self {
        NoiseModel {
            kind: NoiseKind::SaltPepper,
            corruption_probability: 0.001,
            max_magnitude: 12.0,
        }
    }

    /// Corrupt one clean sample.
    pub fn corrupt<R: Rng>(&self, clean: f64, rng: &mut R) -> f64 {
        let reading = match self.kind {
            NoiseKind::None => clean,
            NoiseKind::SaltPepper => {
                if rng.gen::<f64>() < self.corruption_probability {
                    let magnitude = rng.gen_range(0.0..self.max_magnitude);
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    clean + sign * magnitude
                } else {
                    clean
                }
            }
        };
        reading.max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.corruption_probability) {
            return Err(Error::config(
                "corruption_probability",
                "must lie in [0, 1]",
            ));
        }
        if !(self.max_magnitude >= 0.0) {
            return Err(Error::config("max_magnitude", "must be >= 0"));
        }
        Ok(())
    }
}

/// One (possibly corrupted) sensor reading, clamped at 0 mM from below.
pub fn sense<R: Rng>(
    field: &ScalarField,
    noise: &NoiseModel,
    position: (f64, f64),
    rng: &mut R,
) -> Result<f64> {
    let clean = field.concentration_at(position)?;
    Ok(noise.corrupt(clean, rng))
}
