//! Stale-pixel detection and blurring.
//!
//! Every event is appended to a global queue of active events. Events are
//! trimmed from the front until the queue is no longer than its target; a
//! pixel whose last queued event leaves becomes stale and receives a single
//! 3x3 Gaussian blur. The target length follows the fill ratio of the image of
//! active pixels, measured on square tiles: `r = n_pix_act / (n_tiles_act * A)`.
//! Nothing here looks at timestamps.

mod blur;
mod queue;

pub use blur::{blur_pixel, blurred_value, kernel_weight_sum, TAPS};
pub use queue::{ActiveQueue, QueueEntry};

use num_rational::Ratio;

use crate::params::FilterParams;
use crate::scalar::Real;
use crate::temporal::PixelState;
use crate::types::SensorGeometry;

/// Observed fill ratio, `None` when no tile is active.
#[inline]
pub fn fill_ratio(n_pix_act: u32, n_tiles_act: u32, tile_area: u32) -> Option<Ratio<u64>> {
    if n_tiles_act == 0 {
        return None;
    }
    Some(Ratio::new(n_pix_act as u64, n_tiles_act as u64 * tile_area as u64))
}

/// Next queue target: `floor(q * r_target / r_observed)` in integer arithmetic,
/// clamped to `[q_min, q_max]`. `None` when no pixel is active.
#[inline(always)]
pub fn regulate_queue(
    q_current: u32,
    r_target: Ratio<u32>,
    n_pix_act: u32,
    n_tiles_act: u32,
    tile_area: u32,
    q_min: u32,
    q_max: u32,
) -> Option<u32> {
    if n_pix_act == 0 {
        return None;
    }
    let num = q_current as u128 * *r_target.numer() as u128 * n_tiles_act as u128 * tile_area as u128;
    let den = *r_target.denom() as u128 * n_pix_act as u128;
    let q = (num / den).min(u32::MAX as u128) as u32;
    Some(q.clamp(q_min, q_max))
}

/// Snapshot of the spatial filter's counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpatialStats {
    pub q_target: u32,
    pub queue_len: u32,
    pub n_pix_act: u32,
    pub n_tiles_act: u32,
    pub blur_count: u64,
    /// Events not enqueued because the pixel's counter was saturated.
    pub saturated: u64,
}

impl SpatialStats {
    pub fn fill_ratio(&self, tile_area: u32) -> Option<Ratio<u64>> {
        fill_ratio(self.n_pix_act, self.n_tiles_act, tile_area)
    }
}

/// Active-event queue, tile totals and regulation state.
///
/// Per-pixel counters live in [`PixelState`]: `active_count` on every pixel
/// and `tile_active` on each tile's top-left pixel.
#[derive(Clone, Debug)]
pub struct SpatialFilter {
    queue: ActiveQueue,
    q_target: u32,
    q_min: u32,
    q_max: u32,
    r_target: Ratio<u32>,
    tile_side: u16,
    tile_area: u32,
    n_pix_act: u32,
    n_tiles_act: u32,
    regulate_every: u32,
    since_regulation: u32,
    blur_enabled: bool,
    blur_count: u64,
    saturated: u64,
}

impl SpatialFilter {
    pub fn new(params: &FilterParams, geometry: SensorGeometry) -> Self {
        // One slot above n_pix: the new event is pushed before trimming.
        let capacity = geometry.n_pix() + 1;
        SpatialFilter {
            queue: ActiveQueue::with_capacity(capacity),
            q_target: params.q_init,
            q_min: params.q_min,
            q_max: params.q_max,
            r_target: params.fill_ratio_target,
            tile_side: params.tile_side,
            tile_area: params.tile_area(),
            n_pix_act: 0,
            n_tiles_act: 0,
            regulate_every: params.regulate_every.max(1),
            since_regulation: 0,
            blur_enabled: params.blur_enabled,
            blur_count: 0,
            saturated: 0,
        }
    }

    #[inline(always)]
    fn tile_anchor(&self, geometry: SensorGeometry, x: u16, y: u16) -> usize {
        let s = self.tile_side;
        geometry.index(x - x % s, y - y % s)
    }

    /// Handles the spatial side of one event whose temporal update has already
    /// been applied. Calls `on_stale` for each pixel that goes stale and returns
    /// how many did.
    #[inline]
    pub fn on_event<S: Real>(
        &mut self,
        pixels: &mut [PixelState<S>],
        geometry: SensorGeometry,
        x: u16,
        y: u16,
        mut on_stale: impl FnMut(u16, u16),
    ) -> u32 {
        let idx = geometry.index(x, y);
        let count = pixels[idx].active_count;
        if count == u16::MAX {
            // Enqueuing would overflow the counter; the pixel is active anyway.
            debug_assert!(self.queue.len() >= u16::MAX as usize);
            self.saturated += 1;
        } else {
            let pushed = self.queue.push_back(QueueEntry { x, y });
            debug_assert!(pushed, "active queue overflow");
            if count == 0 {
                self.activate(pixels, geometry, x, y);
            }
            pixels[idx].active_count = count + 1;
        }

        let mut stale = 0;
        while self.queue.len() > self.q_target as usize {
            let e = match self.queue.pop_front() {
                Some(e) => e,
                None => break,
            };
            let i = geometry.index(e.x, e.y);
            let c = pixels[i].active_count;
            debug_assert!(c > 0, "active count underflow at ({}, {})", e.x, e.y);
            let c = c.saturating_sub(1);
            pixels[i].active_count = c;
            if c == 0 {
                if self.blur_enabled {
                    blur_pixel(pixels, geometry, e.x, e.y);
                    self.blur_count += 1;
                }
                self.deactivate(pixels, geometry, e.x, e.y);
                on_stale(e.x, e.y);
                stale += 1;
            }
        }

        self.since_regulation += 1;
        if self.since_regulation >= self.regulate_every {
            self.since_regulation = 0;
            self.regulate();
        }
        stale
    }

    #[inline(always)]
    fn activate<S>(&mut self, pixels: &mut [PixelState<S>], geometry: SensorGeometry, x: u16, y: u16) {
        let t = self.tile_anchor(geometry, x, y);
        let tc = &mut pixels[t].tile_active;
        if *tc == 0 {
            self.n_tiles_act += 1;
        }
        debug_assert!((*tc as u32) < self.tile_area);
        *tc += 1;
        self.n_pix_act += 1;
    }

    #[inline(always)]
    fn deactivate<S>(&mut self, pixels: &mut [PixelState<S>], geometry: SensorGeometry, x: u16, y: u16) {
        let t = self.tile_anchor(geometry, x, y);
        let tc = &mut pixels[t].tile_active;
        debug_assert!(*tc > 0);
        *tc -= 1;
        if *tc == 0 {
            self.n_tiles_act -= 1;
        }
        self.n_pix_act -= 1;
    }

    #[inline(always)]
    fn regulate(&mut self) {
        if let Some(q) = regulate_queue(
            self.queue.len() as u32,
            self.r_target,
            self.n_pix_act,
            self.n_tiles_act,
            self.tile_area,
            self.q_min,
            self.q_max,
        ) {
            self.q_target = q;
        }
    }

    pub fn q_target(&self) -> u32 {
        self.q_target
    }

    pub fn queue(&self) -> &ActiveQueue {
        &self.queue
    }

    pub fn tile_area(&self) -> u32 {
        self.tile_area
    }

    pub fn blur_count(&self) -> u64 {
        self.blur_count
    }

    pub fn stats(&self) -> SpatialStats {
        SpatialStats {
            q_target: self.q_target,
            queue_len: self.queue.len() as u32,
            n_pix_act: self.n_pix_act,
            n_tiles_act: self.n_tiles_act,
            blur_count: self.blur_count,
            saturated: self.saturated,
        }
    }

    pub fn heap_bytes(&self) -> usize {
        self.queue.heap_bytes()
    }

    /// Rescans the grid and the queue and reports the first inconsistency.
    pub fn check_invariants<S>(&self, pixels: &[PixelState<S>], geometry: SensorGeometry) -> Result<(), String> {
        let sum: u64 = pixels.iter().map(|p| p.active_count as u64).sum();
        if sum != self.queue.len() as u64 {
            return Err(format!("sum of active counts {sum} != queue length {}", self.queue.len()));
        }
        let mut queued = vec![0u32; pixels.len()];
        for e in self.queue.iter() {
            queued[geometry.index(e.x, e.y)] += 1;
        }
        if let Some(i) = (0..pixels.len()).find(|&i| queued[i] != pixels[i].active_count as u32) {
            return Err(format!("pixel {i}: {} queued, counter {}", queued[i], pixels[i].active_count));
        }
        let n_act = pixels.iter().filter(|p| p.active_count > 0).count() as u32;
        if n_act != self.n_pix_act {
            return Err(format!("active pixels {n_act} != n_pix_act {}", self.n_pix_act));
        }
        let mut tiles = vec![0u32; pixels.len()];
        for (i, p) in pixels.iter().enumerate() {
            if p.active_count > 0 {
                let (x, y) = geometry.coords(i);
                tiles[self.tile_anchor(geometry, x, y)] += 1;
            }
        }
        let mut n_tiles = 0;
        for (i, p) in pixels.iter().enumerate() {
            if tiles[i] != p.tile_active as u32 {
                return Err(format!("tile at {i}: {} active, counter {}", tiles[i], p.tile_active));
            }
            if tiles[i] > self.tile_area {
                return Err(format!("tile at {i} exceeds area"));
            }
            n_tiles += (tiles[i] > 0) as u32;
        }
        if n_tiles != self.n_tiles_act {
            return Err(format!("active tiles {n_tiles} != n_tiles_act {}", self.n_tiles_act));
        }
        if self.q_target < self.q_min || self.q_target > self.q_max {
            return Err(format!("q_target {} outside [{}, {}]", self.q_target, self.q_min, self.q_max));
        }
        Ok(())
    }
}

/// Image of active pixels: each value is the pixel's number of queued events.
pub fn active_pixel_image<S>(pixels: &[PixelState<S>]) -> Vec<u16> {
    pixels.iter().map(|p| p.active_count).collect()
}
