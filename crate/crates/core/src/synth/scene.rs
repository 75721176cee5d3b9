//! Synthetic log-brightness signals.

use std::f64::consts::PI;

use super::SynthError;

#[derive(Clone, Debug, PartialEq)]
pub enum SceneKind {
    /// Spatially uniform triangle wave starting at its minimum.
    /// `amplitude` is peak-to-peak.
    TriangleGlobal { amplitude: f64, period_s: f64 },
    /// Periodic bar pattern with linear ramps of `edge_width` pixels, sliding
    /// along direction `angle` at `speed` pixels per second. Brightness is 0
    /// in dark bars and `contrast` in bright ones; each period holds one rising
    /// and one falling edge.
    MovingEdge {
        contrast: f64,
        speed: f64,
        edge_width: f64,
        period_px: f64,
        angle: f64,
    },
    /// `amplitude * sin(2 pi (u - speed t) / wavelength)` with `u` the pixel
    /// coordinate along `angle`.
    TranslatingSinusoid {
        amplitude: f64,
        wavelength_px: f64,
        speed: f64,
        angle: f64,
    },
}

/// A scene plus the time base it is generated over.
///
/// `sample_rate_hz` bounds the per-sample brightness change; the sinusoid is
/// linearly interpolated between samples, the piecewise-linear scenes are
/// generated exactly at their kinks.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSignal {
    pub kind: SceneKind,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

fn positive(name: &str, v: f64) -> Result<(), SynthError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SynthError::Scene(format!("{name} must be positive, got {v}")))
    }
}

impl SceneSignal {
    pub fn triangle(amplitude: f64, period_s: f64, cycles: f64, sample_rate_hz: f64) -> Self {
        SceneSignal {
            kind: SceneKind::TriangleGlobal { amplitude, period_s },
            duration_s: period_s * cycles,
            sample_rate_hz,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        positive("duration", self.duration_s)?;
        positive("sample rate", self.sample_rate_hz)?;
        match self.kind {
            SceneKind::TriangleGlobal { amplitude, period_s } => {
                positive("amplitude", amplitude)?;
                positive("period", period_s)
            }
            SceneKind::MovingEdge { contrast, speed, edge_width, period_px, angle } => {
                positive("contrast", contrast)?;
                positive("speed", speed)?;
                positive("edge width", edge_width)?;
                positive("pattern period", period_px)?;
                if !angle.is_finite() {
                    return Err(SynthError::Scene("angle must be finite".into()));
                }
                if 2.0 * edge_width >= period_px {
                    return Err(SynthError::Scene(format!(
                        "edge width {edge_width} must be below half the pattern period {period_px}"
                    )));
                }
                Ok(())
            }
            SceneKind::TranslatingSinusoid { amplitude, wavelength_px, speed, angle } => {
                positive("amplitude", amplitude)?;
                positive("wavelength", wavelength_px)?;
                positive("speed", speed)?;
                if !angle.is_finite() {
                    return Err(SynthError::Scene("angle must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Largest |dL/dt| anywhere in the scene, per second.
    pub fn max_slope(&self) -> f64 {
        match self.kind {
            SceneKind::TriangleGlobal { amplitude, period_s } => 2.0 * amplitude / period_s,
            SceneKind::MovingEdge { contrast, speed, edge_width, .. } => contrast * speed / edge_width,
            SceneKind::TranslatingSinusoid { amplitude, wavelength_px, speed, .. } => {
                amplitude * 2.0 * PI * speed / wavelength_px
            }
        }
    }

    /// Largest brightness change between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.max_slope() / self.sample_rate_hz
    }

    #[inline]
    fn along(x: u16, y: u16, angle: f64) -> f64 {
        x as f64 * angle.cos() + y as f64 * angle.sin()
    }

    /// Log brightness at pixel `(x, y)` and time `t` seconds.
    pub fn brightness(&self, x: u16, y: u16, t: f64) -> f64 {
        match self.kind {
            SceneKind::TriangleGlobal { amplitude, period_s } => {
                let f = (t / period_s).rem_euclid(1.0);
                let tri = if f < 0.5 { 2.0 * f } else { 2.0 - 2.0 * f };
                amplitude * (tri - 0.5)
            }
            SceneKind::MovingEdge { contrast, speed, edge_width, period_px, angle } => {
                let ph = (Self::along(x, y, angle) - speed * t).rem_euclid(period_px);
                let half = 0.5 * period_px;
                let v = if ph < edge_width {
                    ph / edge_width
                } else if ph < half {
                    1.0
                } else if ph < half + edge_width {
                    1.0 - (ph - half) / edge_width
                } else {
                    0.0
                };
                contrast * v
            }
            SceneKind::TranslatingSinusoid { amplitude, wavelength_px, speed, angle } => {
                amplitude * (2.0 * PI * (Self::along(x, y, angle) - speed * t) / wavelength_px).sin()
            }
        }
    }

    /// First time after `t` at which the brightness of `(x, y)` may change
    /// slope. Between consecutive breakpoints the generator treats the signal
    /// as linear. Never returns more than the duration.
    pub fn next_breakpoint(&self, x: u16, y: u16, t: f64) -> f64 {
        let next = match self.kind {
            SceneKind::TriangleGlobal { period_s, .. } => {
                let half = 0.5 * period_s;
                ((t / half).floor() + 1.0) * half
            }
            SceneKind::MovingEdge { speed, edge_width, period_px, angle, .. } => {
                let ph = (Self::along(x, y, angle) - speed * t).rem_euclid(period_px);
                let half = 0.5 * period_px;
                // phase decreases with time; find the next kink below it
                let kinks = [0.0, edge_width, half, half + edge_width];
                let below = kinks.iter().rev().find(|&&k| k < ph).copied();
                let dist = match below {
                    Some(k) => ph - k,
                    None => ph - (half + edge_width - period_px),
                };
                t + dist / speed
            }
            SceneKind::TranslatingSinusoid { .. } => ((t * self.sample_rate_hz).floor() + 1.0) / self.sample_rate_hz,
        };
        let next = if next > t { next } else { next_up(t) };
        next.min(self.duration_s)
    }
}

fn next_up(t: f64) -> f64 {
    if t >= 0.0 {
        f64::from_bits(t.to_bits() + 1)
    } else {
        -f64::from_bits((-t).to_bits() - 1)
    }
}
