//! Event records and sensor geometry.

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

/// Sign of a brightness change. There is no zero polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Polarity {
    Off = -1,
    On = 1,
}

impl Polarity {
    #[inline(always)]
    pub fn from_bit(on: bool) -> Self {
        if on {
            Polarity::On
        } else {
            Polarity::Off
        }
    }

    #[inline(always)]
    pub fn is_on(self) -> bool {
        self == Polarity::On
    }

    #[inline(always)]
    pub fn sign(self) -> i8 {
        self as i8
    }

    #[inline(always)]
    pub fn value<S: Real>(self) -> S {
        match self {
            Polarity::On => S::ONE,
            Polarity::Off => -S::ONE,
        }
    }
}

impl TryFrom<i32> for Polarity {
    type Error = i32;

    fn try_from(v: i32) -> Result<Self, i32> {
        match v {
            1 => Ok(Polarity::On),
            -1 => Ok(Polarity::Off),
            other => Err(other),
        }
    }
}

/// One pixel change reported by the sensor. `t` is in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub t: u64,
    pub x: u16,
    pub y: u16,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(t: u64, x: u16, y: u16, polarity: Polarity) -> Self {
        Event { t, x, y, polarity }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("sensor must be at least 2x2 pixels, got {width}x{height}")]
    TooSmall { width: u32, height: u32 },
    #[error("sensor {width}x{height} exceeds the supported size")]
    TooLarge { width: u32, height: u32 },
}

/// Sensor dimensions in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SensorGeometry {
    width: u16,
    height: u16,
}

impl SensorGeometry {
    /// Largest column/row count encodable in the 15-bit x field of the binary format.
    pub const MAX_SIDE: u32 = 1 << 15;

    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width < 2 || height < 2 {
            return Err(GeometryError::TooSmall { width, height });
        }
        if width > Self::MAX_SIDE || height > u16::MAX as u32 {
            return Err(GeometryError::TooLarge { width, height });
        }
        Ok(SensorGeometry {
            width: width as u16,
            height: height as u16,
        })
    }

    /// 640x480, the resolution used for all VGA-scale budgets.
    pub fn vga() -> Self {
        SensorGeometry {
            width: 640,
            height: 480,
        }
    }

    #[inline(always)]
    pub fn width(&self) -> u16 {
        self.width
    }

    #[inline(always)]
    pub fn height(&self) -> u16 {
        self.height
    }

    #[inline(always)]
    pub fn n_pix(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline(always)]
    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major pixel index.
    #[inline(always)]
    pub fn index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline(always)]
    pub fn coords(&self, index: usize) -> (u16, u16) {
        let w = self.width as usize;
        ((index % w) as u16, (index / w) as u16)
    }
}

impl fmt::Display for SensorGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}
