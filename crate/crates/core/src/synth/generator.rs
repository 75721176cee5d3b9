//! Ideal reference-crossing event generation.
//!
//! Every pixel keeps a reference level. Whenever its brightness rises to
//! `ref + c_on` an ON event fires and the reference moves up by `c_on`; a fall
//! to `ref - c_off` fires an OFF event and moves it down by `c_off`. Crossings
//! are solved exactly on the piecewise-linear signal between breakpoints, and
//! the per-pixel streams are merged in time order (ties by pixel index).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::types::{Event, Polarity};

use super::scene::SceneSignal;
use super::{IdealSensorConfig, SynthError};

/// Event generator for a single pixel, yielding `(time_s, polarity)`.
#[derive(Clone, Debug)]
pub struct PixelEvents<'a> {
    scene: &'a SceneSignal,
    x: u16,
    y: u16,
    c_on: f64,
    c_off: f64,
    refractory_s: f64,
    l_ref: f64,
    t0: f64,
    l0: f64,
    t1: f64,
    l1: f64,
    last: f64,
}

impl<'a> PixelEvents<'a> {
    pub fn new(scene: &'a SceneSignal, x: u16, y: u16, c_on: f64, c_off: f64, refractory_s: f64) -> Self {
        let l0 = scene.brightness(x, y, 0.0);
        let t1 = scene.next_breakpoint(x, y, 0.0);
        PixelEvents {
            scene,
            x,
            y,
            c_on,
            c_off,
            refractory_s,
            l_ref: l0,
            t0: 0.0,
            l0,
            t1,
            l1: scene.brightness(x, y, t1),
            last: f64::NEG_INFINITY,
        }
    }

    fn advance_segment(&mut self) {
        self.t0 = self.t1;
        self.l0 = self.l1;
        self.t1 = self.scene.next_breakpoint(self.x, self.y, self.t0);
        self.l1 = self.scene.brightness(self.x, self.y, self.t1);
    }

    #[inline]
    fn value_at(&self, t: f64) -> f64 {
        if self.t1 > self.t0 {
            self.l0 + (self.l1 - self.l0) * ((t - self.t0) / (self.t1 - self.t0))
        } else {
            self.l1
        }
    }

    fn crossing(&self, level: f64, rising: bool) -> Option<f64> {
        let beyond = |v: f64| if rising { v >= level } else { v <= level };
        if beyond(self.l0) {
            return Some(self.t0);
        }
        if !beyond(self.l1) {
            return None;
        }
        let frac = (level - self.l0) / (self.l1 - self.l0);
        Some((self.t0 + frac * (self.t1 - self.t0)).clamp(self.t0, self.t1))
    }
}

impl Iterator for PixelEvents<'_> {
    type Item = (f64, Polarity);

    fn next(&mut self) -> Option<(f64, Polarity)> {
        let end = self.scene.duration_s;
        loop {
            if self.t0 >= end {
                return None;
            }
            let on = self.crossing(self.l_ref + self.c_on, true);
            let off = self.crossing(self.l_ref - self.c_off, false);
            let (t, p) = match (on, off) {
                (Some(a), Some(b)) if b < a => (b, Polarity::Off),
                (Some(a), _) => (a, Polarity::On),
                (None, Some(b)) => (b, Polarity::Off),
                (None, None) => {
                    self.advance_segment();
                    continue;
                }
            };
            let ready = self.last + self.refractory_s;
            if t < ready {
                // suppressed; resume from the end of the refractory period
                if ready >= self.t1 {
                    self.advance_segment();
                } else {
                    self.l0 = self.value_at(ready);
                    self.t0 = ready;
                }
                continue;
            }
            match p {
                Polarity::On => self.l_ref += self.c_on,
                Polarity::Off => self.l_ref -= self.c_off,
            }
            self.l0 = self.value_at(t);
            self.t0 = t;
            self.last = t;
            return Some((t, p));
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    t: f64,
    pixel: u32,
    polarity: Polarity,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then_with(|| other.pixel.cmp(&self.pixel))
    }
}

/// Time-ordered events of the whole sensor.
pub struct EventGenerator<'a> {
    pixels: Vec<PixelEvents<'a>>,
    heap: BinaryHeap<Pending>,
    width: u16,
}

impl<'a> EventGenerator<'a> {
    pub fn new(scene: &'a SceneSignal, sensor: &IdealSensorConfig) -> Result<Self, SynthError> {
        scene.validate()?;
        sensor.validate()?;
        let min_c = sensor.min_threshold();
        let step = scene.max_step();
        if step >= min_c / 4.0 {
            return Err(SynthError::AntiAliasing { step, min_threshold: min_c });
        }
        let g = sensor.geometry;
        let refractory_s = sensor.refractory_us as f64 * 1e-6;
        let mut pixels = Vec::with_capacity(g.n_pix());
        let mut heap = BinaryHeap::with_capacity(g.n_pix());
        for i in 0..g.n_pix() {
            let (x, y) = g.coords(i);
            let mut p = PixelEvents::new(scene, x, y, sensor.c_on[i], sensor.c_off[i], refractory_s);
            if let Some((t, polarity)) = p.next() {
                heap.push(Pending { t, pixel: i as u32, polarity });
            }
            pixels.push(p);
        }
        Ok(EventGenerator {
            pixels,
            heap,
            width: g.width(),
        })
    }
}

impl Iterator for EventGenerator<'_> {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let top = self.heap.pop()?;
        let i = top.pixel as usize;
        if let Some((t, polarity)) = self.pixels[i].next() {
            self.heap.push(Pending { t, pixel: top.pixel, polarity });
        }
        let w = self.width as usize;
        Some(Event {
            t: (top.t * 1e6).round() as u64,
            x: (i % w) as u16,
            y: (i / w) as u16,
            polarity: top.polarity,
        })
    }
}

/// Generates the merged event stream for `scene` as seen by `sensor`.
pub fn generate<'a>(scene: &'a SceneSignal, sensor: &IdealSensorConfig) -> Result<EventGenerator<'a>, SynthError> {
    EventGenerator::new(scene, sensor)
}
