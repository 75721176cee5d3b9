use thiserror::Error;

use crate::params::FilterParams;
use crate::scalar::Real;
use crate::spatial::{SpatialFilter, SpatialStats};
use crate::temporal::{PixelState, TemporalCoeffs};
use crate::types::{Event, SensorGeometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("event {index} at ({x}, {y}) outside {geometry}")]
    OutOfBounds { index: u64, x: u16, y: u16, geometry: SensorGeometry },
    #[error("event {index} time {t} precedes previous event time {prev}")]
    TimeRegression { index: u64, t: u64, prev: u64 },
    #[error("threshold map has {got} entries, sensor has {expected} pixels")]
    ThresholdMapSize { got: usize, expected: usize },
    #[error("threshold map entry {index} is not a positive finite number: {value}")]
    ThresholdMapValue { index: usize, value: f64 },
}

/// Complete reconstruction state for one sensor.
///
/// Owned by a single streaming worker; reads (rendering, snapshots) never
/// mutate it.
#[derive(Clone, Debug)]
pub struct ReconstructionEngine<S> {
    geometry: SensorGeometry,
    params: FilterParams,
    coeffs: TemporalCoeffs<S>,
    pixels: Vec<PixelState<S>>,
    spatial: SpatialFilter,
    threshold_map: Option<Vec<S>>,
    strict: bool,
    events_processed: u64,
    events_rejected: u64,
    last_t: Option<u64>,
}

impl<S: Real> ReconstructionEngine<S> {
    pub fn new(geometry: SensorGeometry, params: FilterParams) -> Self {
        ReconstructionEngine {
            geometry,
            coeffs: TemporalCoeffs::from_params(&params),
            pixels: vec![PixelState::default(); geometry.n_pix()],
            spatial: SpatialFilter::new(&params, geometry),
            params,
            threshold_map: None,
            strict: false,
            events_processed: 0,
            events_rejected: 0,
            last_t: None,
        }
    }

    /// Strict engines fail on out-of-bounds events and time regressions
    /// instead of counting and skipping them.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Installs per-pixel relative thresholds that scale every detrended
    /// increment of that pixel.
    pub fn with_threshold_map(mut self, c_prime: &[f64]) -> Result<Self, EngineError> {
        if c_prime.len() != self.geometry.n_pix() {
            return Err(EngineError::ThresholdMapSize {
                got: c_prime.len(),
                expected: self.geometry.n_pix(),
            });
        }
        if let Some((index, &value)) = c_prime.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(EngineError::ThresholdMapValue { index, value });
        }
        self.threshold_map = Some(c_prime.iter().map(|&v| S::lit(v)).collect());
        Ok(self)
    }

    /// Feeds one event. Non-strict engines skip and count invalid events.
    #[inline]
    pub fn process(&mut self, e: &Event) -> Result<(), EngineError> {
        self.process_with(e, |_, _| {})
    }

    /// Like [`process`](Self::process), reporting every pixel that goes stale.
    #[inline]
    pub fn process_with(&mut self, e: &Event, on_stale: impl FnMut(u16, u16)) -> Result<(), EngineError> {
        let index = self.events_processed + self.events_rejected;
        if !self.geometry.contains(e.x, e.y) {
            self.events_rejected += 1;
            if self.strict {
                return Err(EngineError::OutOfBounds { index, x: e.x, y: e.y, geometry: self.geometry });
            }
            return Ok(());
        }
        if let Some(prev) = self.last_t {
            if e.t < prev && self.strict {
                self.events_rejected += 1;
                return Err(EngineError::TimeRegression { index, t: e.t, prev });
            }
        }
        self.last_t = Some(e.t);
        self.apply(e.x, e.y, e, on_stale);
        Ok(())
    }

    #[inline(always)]
    fn apply(&mut self, x: u16, y: u16, e: &Event, on_stale: impl FnMut(u16, u16)) {
        let idx = self.geometry.index(x, y);
        match &self.threshold_map {
            None => {
                self.pixels[idx].update(e.polarity, &self.coeffs);
            }
            Some(map) => {
                let c = map[idx];
                self.pixels[idx].update_scaled(e.polarity, &self.coeffs, c);
            }
        }
        if self.params.spatial_enabled {
            self.spatial.on_event(&mut self.pixels, self.geometry, x, y, on_stale);
        }
        self.events_processed += 1;
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn pixels(&self) -> &[PixelState<S>] {
        &self.pixels
    }

    pub fn pixel(&self, x: u16, y: u16) -> &PixelState<S> {
        &self.pixels[self.geometry.index(x, y)]
    }

    /// Reconstructed brightness, row-major.
    pub fn brightness(&self) -> Vec<S> {
        self.pixels.iter().map(|p| p.l).collect()
    }

    pub fn spatial(&self) -> &SpatialFilter {
        &self.spatial
    }

    pub fn spatial_stats(&self) -> SpatialStats {
        self.spatial.stats()
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    pub fn events_rejected(&self) -> u64 {
        self.events_rejected
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.last_t
    }

    /// Bytes held by the pixel grid, the queue and the optional threshold map.
    pub fn resident_bytes(&self) -> usize {
        std::mem::size_of::<Self>()
            + self.pixels.capacity() * std::mem::size_of::<PixelState<S>>()
            + self.spatial.heap_bytes()
            + self.threshold_map.as_ref().map_or(0, |m| m.capacity() * std::mem::size_of::<S>())
    }

    /// Full rescan of the spatial bookkeeping.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.spatial.check_invariants(&self.pixels, self.geometry)
    }

    /// Order-sensitive digest of the complete per-pixel state and counters.
    pub fn state_digest(&self) -> u64 {
        use std::hash::Hasher;
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for p in &self.pixels {
            h.write_u64(p.p_bar.to_f64_lossy().to_bits());
            h.write_u64(p.l.to_f64_lossy().to_bits());
            h.write_u16(p.active_count);
            h.write_u8(p.tile_active);
        }
        let s = self.spatial.stats();
        h.write_u32(s.q_target);
        h.write_u32(s.queue_len);
        h.write_u64(s.blur_count);
        for e in self.spatial.queue().iter() {
            h.write_u16(e.x);
            h.write_u16(e.y);
        }
        h.write_u64(self.events_processed);
        h.finish()
    }
}
