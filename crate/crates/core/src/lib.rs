//! Filter-based asynchronous reconstruction of intensity images from
//! event-camera streams.
//!
//! Every event updates one pixel through a two-stage temporal filter: an
//! exponential moving average removes the ON/OFF imbalance, a leaky
//! integrator turns the detrended polarity into brightness. A global queue of
//! recent events marks pixels as active; a pixel that drops out of the queue
//! is blurred once with its neighbours. Frames can be read out at any time.

pub mod bench;
pub mod bode;
pub mod calib;
pub mod event_io;
pub mod params;
pub mod pipeline;
pub mod scalar;
pub mod spatial;
pub mod synth;
pub mod temporal;
pub mod types;

pub use params::{compute_params, FilterParams, ParamsError};
pub use pipeline::{ReconstructionEngine, ScaleMode};
pub use scalar::Real;
pub use types::{Event, Polarity, SensorGeometry};

/// Engine with the 32-bit state the throughput figures refer to.
pub type Engine = pipeline::ReconstructionEngine<f32>;
/// Engine with 64-bit state, for reference computations.
pub type Engine64 = pipeline::ReconstructionEngine<f64>;
pub type PixelState32 = temporal::PixelState<f32>;
pub type PixelState64 = temporal::PixelState<f64>;
/// Exact fill ratios.
pub type FillRatio = num_rational::Ratio<u32>;
