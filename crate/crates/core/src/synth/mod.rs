//! Synthetic event streams from an idealized sensor, used as ground truth.

mod generator;
mod reference;
mod scene;

pub use self::generator::{generate, EventGenerator, PixelEvents};
pub use self::reference::{reconstruct_calibrated, reconstruct_simple};
pub use self::scene::{SceneKind, SceneSignal};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use thiserror::Error;

use crate::types::SensorGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("invalid sensor: {0}")]
    Sensor(String),
    #[error(
        "sample rate too low: brightness step per sample {step} must stay below a quarter of the smallest threshold {min_threshold}"
    )]
    AntiAliasing { step: f64, min_threshold: f64 },
}

/// Per-pixel contrast thresholds of an ideal sensor (log-intensity units).
#[derive(Clone, Debug, PartialEq)]
pub struct IdealSensorConfig {
    pub geometry: SensorGeometry,
    pub c_on: Vec<f64>,
    pub c_off: Vec<f64>,
    pub refractory_us: u64,
    /// Seed the threshold maps were drawn with; 0 for deterministic maps.
    pub seed: u64,
}

impl IdealSensorConfig {
    pub fn uniform(geometry: SensorGeometry, c_on: f64, c_off: f64) -> Self {
        let n = geometry.n_pix();
        IdealSensorConfig {
            geometry,
            c_on: vec![c_on; n],
            c_off: vec![c_off; n],
            refractory_us: 0,
            seed: 0,
        }
    }

    /// Each pixel's ON and OFF thresholds share one factor drawn from
    /// lognormal(0, sigma).
    pub fn lognormal(geometry: SensorGeometry, c_on: f64, c_off: f64, sigma: f64, seed: u64) -> Result<Self, SynthError> {
        let dist = LogNormal::new(0.0, sigma).map_err(|e| SynthError::Sensor(format!("sigma {sigma}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..geometry.n_pix()).map(|_| dist.sample(&mut rng)).collect();
        Ok(IdealSensorConfig {
            geometry,
            c_on: f.iter().map(|f| c_on * f).collect(),
            c_off: f.iter().map(|f| c_off * f).collect(),
            refractory_us: 0,
            seed,
        })
    }

    /// ON/OFF imbalance per pixel: `c_on = c e^eps`, `c_off = c e^-eps` with
    /// `eps ~ N(0, imbalance)`.
    pub fn anticorrelated(geometry: SensorGeometry, c: f64, imbalance: f64, seed: u64) -> Result<Self, SynthError> {
        let dist = Normal::new(0.0, imbalance).map_err(|e| SynthError::Sensor(format!("imbalance {imbalance}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps: Vec<f64> = (0..geometry.n_pix()).map(|_| dist.sample(&mut rng)).collect();
        Ok(IdealSensorConfig {
            geometry,
            c_on: eps.iter().map(|e| c * e.exp()).collect(),
            c_off: eps.iter().map(|e| c * (-e).exp()).collect(),
            refractory_us: 0,
            seed,
        })
    }

    pub fn with_refractory(mut self, us: u64) -> Self {
        self.refractory_us = us;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let n = self.geometry.n_pix();
        if self.c_on.len() != n || self.c_off.len() != n {
            return Err(SynthError::Sensor(format!(
                "threshold maps have {} / {} entries, sensor has {n} pixels",
                self.c_on.len(),
                self.c_off.len()
            )));
        }
        if let Some(c) = self.c_on.iter().chain(&self.c_off).find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(SynthError::Sensor(format!("thresholds must be positive, found {c}")));
        }
        Ok(())
    }

    pub fn min_threshold(&self) -> f64 {
        self.c_on.iter().chain(&self.c_off).copied().fold(f64::INFINITY, f64::min)
    }

    /// Harmonic mean of the pixel's ON and OFF thresholds.
    pub fn pixel_threshold(&self, i: usize) -> f64 {
        2.0 / (1.0 / self.c_on[i] + 1.0 / self.c_off[i])
    }

    /// Harmonic mean of [`Self::pixel_threshold`] over `pixels`.
    pub fn global_threshold<I: IntoIterator<Item = usize>>(&self, pixels: I) -> f64 {
        let (n, s) = pixels
            .into_iter()
            .fold((0usize, 0.0), |(n, s), i| (n + 1, s + 1.0 / self.pixel_threshold(i)));
        n as f64 / s
    }
}
