//! Per-pixel temporal filter.
//!
//! Each pixel runs on its own event clock: one tick per event at that pixel,
//! timestamps are never consulted. An event of polarity `p` updates
//!
//! ```text
//! p_bar <- a * p_bar + (1 - a) * p        moving average of polarity
//! delta  = p - p_bar                      detrended increment
//! l     <- b * l + (1 + b) / 2 * delta    high-pass of the integrated increments
//! ```
//!
//! `p_bar` absorbs the ON/OFF threshold imbalance, the second recursion forgets
//! the unknown initial brightness and accumulated noise.

use thiserror::Error;

use crate::params::FilterParams;
use crate::scalar::Real;
use crate::types::Polarity;

/// Filter memory of one pixel.
///
/// Two reals plus the spatial filter's queue counter. For `f32` the struct is
/// 12 bytes; `tile_active` lives in the padding and is only meaningful on the
/// top-left pixel of each tile.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[repr(C)]
pub struct PixelState<S> {
    pub p_bar: S,
    pub l: S,
    /// Number of this pixel's events currently in the active queue.
    pub active_count: u16,
    /// Active pixels in the tile anchored at this pixel.
    pub tile_active: u8,
}

/// Coefficients converted once to the state's scalar type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemporalCoeffs<S> {
    pub alpha: S,
    pub one_minus_alpha: S,
    pub beta: S,
    /// `(1 + beta) / 2`
    pub gain: S,
}

impl<S: Real> TemporalCoeffs<S> {
    pub fn new(alpha: f64, beta: f64) -> Self {
        TemporalCoeffs {
            alpha: S::lit(alpha),
            one_minus_alpha: S::lit(1.0 - alpha),
            beta: S::lit(beta),
            gain: S::lit(0.5 * (1.0 + beta)),
        }
    }

    pub fn from_params(params: &FilterParams) -> Self {
        Self::new(params.alpha, params.beta)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemporalError {
    #[error("relative threshold must be finite and positive, got {0}")]
    BadThreshold(f64),
}

impl<S: Real> PixelState<S> {
    /// Applies one event and returns the detrended increment.
    #[inline(always)]
    pub fn update(&mut self, p: Polarity, c: &TemporalCoeffs<S>) -> S {
        let p = p.value::<S>();
        self.p_bar = c.alpha * self.p_bar + c.one_minus_alpha * p;
        let delta = p - self.p_bar;
        self.l = c.beta * self.l + c.gain * delta;
        delta
    }

    /// Same as [`update`](Self::update) with the increment scaled by the pixel's
    /// relative threshold before integration. `c_prime` must be positive.
    #[inline(always)]
    pub fn update_scaled(&mut self, p: Polarity, c: &TemporalCoeffs<S>, c_prime: S) -> S {
        let p = p.value::<S>();
        self.p_bar = c.alpha * self.p_bar + c.one_minus_alpha * p;
        let delta = p - self.p_bar;
        self.l = c.beta * self.l + c.gain * (delta * c_prime);
        delta
    }
}

/// Functional form of a single pixel update.
pub fn update_pixel<S: Real>(
    state: PixelState<S>,
    p: Polarity,
    coeffs: &TemporalCoeffs<S>,
) -> (PixelState<S>, S) {
    let mut next = state;
    let delta = next.update(p, coeffs);
    (next, delta)
}

/// Scales a detrended increment by a per-pixel relative threshold.
pub fn apply_threshold_map<S: Real>(delta: S, c_prime: S) -> Result<S, TemporalError> {
    if !(c_prime.is_finite() && c_prime > S::ZERO) {
        return Err(TemporalError::BadThreshold(c_prime.to_f64_lossy()));
    }
    Ok(delta * c_prime)
}

/// Upper bound on `|l|` for any polarity sequence: `|delta| <= 2a`, summed
/// through the geometric series of the `b` recursion.
pub fn output_bound(alpha: f64, beta: f64) -> f64 {
    alpha * (1.0 + beta) / (1.0 - beta)
}

/// The two stages folded into one second-order recursion:
///
/// `l_k = (a + b) l_{k-1} - a b l_{k-2} + a/2 (1 + b)(p_k - p_{k-1})`.
///
/// Equivalent to [`PixelState::update`] up to rounding. Not used for
/// streaming because the spatial blur has to modify `l` without touching the
/// polarity average, which this form does not expose.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SingleIir<S> {
    l1: S,
    l2: S,
    p_prev: S,
    a_plus_b: S,
    ab: S,
    k: S,
}

impl<S: Real> SingleIir<S> {
    pub fn new(alpha: f64, beta: f64) -> Self {
        SingleIir {
            l1: S::ZERO,
            l2: S::ZERO,
            p_prev: S::ZERO,
            a_plus_b: S::lit(alpha + beta),
            ab: S::lit(alpha * beta),
            k: S::lit(0.5 * alpha * (1.0 + beta)),
        }
    }

    #[inline]
    pub fn update(&mut self, p: Polarity) -> S {
        let p = p.value::<S>();
        let l = self.a_plus_b * self.l1 - self.ab * self.l2 + self.k * (p - self.p_prev);
        self.l2 = self.l1;
        self.l1 = l;
        self.p_prev = p;
        l
    }

    pub fn output(&self) -> S {
        self.l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{compute_params, default_fill_ratio};
    use crate::types::SensorGeometry;
    use proptest::prelude::*;

    use Polarity::{Off, On};

    #[test]
    fn layout_is_twelve_bytes() {
        assert_eq!(std::mem::size_of::<PixelState<f32>>(), 12);
    }

    #[test]
    fn first_event_hand_evaluated() {
        let c = TemporalCoeffs::<f64>::new(0.9, 0.9);
        let (s, delta) = update_pixel(PixelState::default(), On, &c);
        assert!((s.p_bar - 0.1).abs() < 1e-12);
        assert!((delta - 0.9).abs() < 1e-12);
        assert!((s.l - 0.855).abs() < 1e-12);
        assert_eq!(s.active_count, 0);
    }

    #[test]
    fn impulse_response_matches_recursion() {
        let p = compute_params(100.0, default_fill_ratio(), SensorGeometry::vga()).unwrap();
        let mut iir = SingleIir::<f64>::new(p.alpha, p.beta);
        let l1 = iir.update(On);
        assert!((l1 - 0.5 * p.alpha * (1.0 + p.beta)).abs() < 1e-15);
        let mut s = PixelState::<f64>::default();
        s.update(On, &TemporalCoeffs::from_params(&p));
        assert!((s.l - l1).abs() < 1e-15);
    }

    #[test]
    fn idle_single_iir_stays_zero() {
        let iir = SingleIir::<f32>::new(0.9, 0.9);
        assert_eq!(iir.output(), 0.0);
    }

    #[test]
    fn constant_input_is_rejected() {
        let p = compute_params(40.0, default_fill_ratio(), SensorGeometry::vga()).unwrap();
        let c = TemporalCoeffs::<f64>::from_params(&p);
        let mut s = PixelState::default();
        for _ in 0..4000 {
            s.update(On, &c);
        }
        assert!((s.p_bar - 1.0).abs() < 1e-12);
        assert!(s.l.abs() < 1e-12);
    }

    #[test]
    fn threshold_map_scaling() {
        assert_eq!(apply_threshold_map(0.9f64, 1.0).unwrap(), 0.9);
        assert!((apply_threshold_map(0.9f64, 1.2).unwrap() - 1.08).abs() < 1e-15);
        assert!(apply_threshold_map(0.9f64, 0.0).is_err());
        assert!(apply_threshold_map(0.9f64, -1.0).is_err());
        assert!(apply_threshold_map(0.9f64, f64::NAN).is_err());
    }

    #[test]
    fn unity_scale_is_bit_identical() {
        let c = TemporalCoeffs::<f32>::new(0.93, 0.94);
        let mut a = PixelState::default();
        let mut b = PixelState::default();
        for i in 0..1000u32 {
            let p = if (i * 7919) % 5 < 2 { On } else { Off };
            a.update(p, &c);
            b.update_scaled(p, &c, 1.0);
        }
        assert_eq!(a, b);
    }

    fn polarity() -> impl Strategy<Value = Polarity> {
        prop_oneof![Just(On), Just(Off)]
    }

    proptest! {
        #[test]
        fn average_stays_in_unit_interval(seq in prop::collection::vec(polarity(), 1..500), t in 5.0f64..2000.0) {
            let p = compute_params(t, default_fill_ratio(), SensorGeometry::vga()).unwrap();
            let c = TemporalCoeffs::<f32>::from_params(&p);
            let bound = output_bound(p.alpha, p.beta) as f32 * (1.0 + 1e-5);
            let mut s = PixelState::default();
            for q in seq {
                s.update(q, &c);
                prop_assert!(s.p_bar.abs() <= 1.0);
                prop_assert!(s.l.abs() <= bound);
            }
        }

        #[test]
        fn two_stage_equals_single_iir(seq in prop::collection::vec(polarity(), 1..2000), t in 5.0f64..500.0) {
            let p = compute_params(t, default_fill_ratio(), SensorGeometry::vga()).unwrap();
            let c = TemporalCoeffs::<f64>::from_params(&p);
            let mut s = PixelState::default();
            let mut iir = SingleIir::<f64>::new(p.alpha, p.beta);
            for q in seq {
                s.update(q, &c);
                let l = iir.update(q);
                prop_assert!((s.l - l).abs() < 1e-9);
            }
        }
    }
}
