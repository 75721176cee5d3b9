//! Mapping reconstructed brightness to 8-bit frames.

use std::fmt;
use std::str::FromStr;

use crate::scalar::Real;
use crate::types::SensorGeometry;

use super::engine::ReconstructionEngine;

/// Value used for frames without contrast.
pub const MID_GRAY: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleMode {
    /// 1st and 99th percentile of the brightness map to 0 and 255.
    Robust,
    /// `[-a, a]` maps affinely to `[0, 255]`, values outside are clamped.
    Fixed(f64),
}

impl Default for ScaleMode {
    fn default() -> Self {
        ScaleMode::Robust
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleMode::Robust => write!(f, "robust"),
            ScaleMode::Fixed(a) => write!(f, "fixed:{a}"),
        }
    }
}

impl FromStr for ScaleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "robust" {
            return Ok(ScaleMode::Robust);
        }
        if let Some(a) = s.strip_prefix("fixed:") {
            let a: f64 = a.parse().map_err(|_| format!("bad fixed scale {a:?}"))?;
            if !(a.is_finite() && a > 0.0) {
                return Err(format!("fixed scale must be positive, got {a}"));
            }
            return Ok(ScaleMode::Fixed(a));
        }
        Err(format!("unknown scale mode {s:?}, expected robust or fixed:<a>"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderMeta {
    pub mode: ScaleMode,
    /// Brightness mapped to 0.
    pub lo: f64,
    /// Brightness mapped to 255.
    pub hi: f64,
    /// Set when `lo == hi` and the frame was filled with mid-gray.
    pub degenerate: bool,
}

/// An 8-bit grayscale image read out at `readout_time` microseconds.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: u16,
    pub height: u16,
    pub pixels: Vec<u8>,
    pub readout_time: u64,
    pub meta: RenderMeta,
}

/// Nearest-rank percentile of sorted data, `q` in [0, 1].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).floor() as usize;
    sorted[idx]
}

#[inline]
fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    let s = (v - lo) / (hi - lo) * 255.0;
    // round half up
    (s + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Renders a brightness grid. Pure function of its inputs.
pub fn render_values<S: Real>(values: &[S], geometry: SensorGeometry, mode: ScaleMode, readout_time: u64) -> Frame {
    let (lo, hi) = match mode {
        ScaleMode::Fixed(a) => (-a, a),
        ScaleMode::Robust => {
            let mut sorted: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
            sorted.sort_unstable_by(f64::total_cmp);
            (percentile(&sorted, 0.01), percentile(&sorted, 0.99))
        }
    };
    let degenerate = !(hi > lo);
    let pixels = if degenerate {
        vec![MID_GRAY; values.len()]
    } else {
        values.iter().map(|v| quantize(v.to_f64_lossy(), lo, hi)).collect()
    };
    Frame {
        width: geometry.width(),
        height: geometry.height(),
        pixels,
        readout_time,
        meta: RenderMeta { mode, lo, hi, degenerate },
    }
}

impl<S: Real> ReconstructionEngine<S> {
    /// Reads out the current image without touching the engine state.
    pub fn render(&self, mode: ScaleMode, readout_time: u64) -> Frame {
        let values: Vec<S> = self.pixels().iter().map(|p| p.l).collect();
        render_values(&values, self.geometry(), mode, readout_time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(w: u32, h: u32) -> SensorGeometry {
        SensorGeometry::new(w, h).unwrap()
    }

    #[test]
    fn fixed_mapping() {
        let f = render_values(&[-1.0f64, 0.0, 1.0, 5.0], geom(2, 2), ScaleMode::Fixed(1.0), 0);
        assert_eq!(f.pixels, vec![0, 128, 255, 255]);
        assert!(!f.meta.degenerate);
    }

    #[test]
    fn flat_grid_is_mid_gray() {
        let f = render_values(&[0.0f32; 6], geom(3, 2), ScaleMode::Robust, 7);
        assert_eq!(f.pixels, vec![MID_GRAY; 6]);
        assert!(f.meta.degenerate);
        assert_eq!(f.readout_time, 7);
    }

    #[test]
    fn robust_bounds_ignore_outliers() {
        let mut v: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        v[10] = 1e6;
        v[11] = -1e6;
        let f = render_values(&v, geom(20, 10), ScaleMode::Robust, 0);
        assert_eq!(f.pixels[10], 255);
        assert_eq!(f.pixels[11], 0);
        assert!(f.meta.hi < 2.0 && f.meta.lo > -1.0);
    }

    #[test]
    fn scale_mode_parsing() {
        assert_eq!("robust".parse::<ScaleMode>().unwrap(), ScaleMode::Robust);
        assert_eq!("fixed:2.5".parse::<ScaleMode>().unwrap(), ScaleMode::Fixed(2.5));
        assert!("fixed:-1".parse::<ScaleMode>().is_err());
        assert!("fixed".parse::<ScaleMode>().is_err());
        assert!("linear".parse::<ScaleMode>().is_err());
    }
}
