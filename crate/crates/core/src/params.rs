//! Filter coefficients and spatial-filter targets derived from the cutoff period.

use std::f64::consts::PI;

use num_rational::Ratio;
use thiserror::Error;

use crate::types::SensorGeometry;

/// Default cutoff period in events.
pub const DEFAULT_T_CUT: f64 = 40.0;
/// Smallest cutoff period accepted; below it the cutoff frequency approaches pi/2.
pub const MIN_T_CUT: f64 = 4.0;
pub const DEFAULT_TILE_SIDE: u16 = 2;
pub const DEFAULT_Q_MIN: u32 = 256;

pub fn default_fill_ratio() -> Ratio<u32> {
    Ratio::new(1, 2)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("cutoff period must be finite and greater than {MIN_T_CUT} events, got {0}")]
    CutoffTooSmall(f64),
    #[error("fill ratio {num}/{den} outside [1/{area}, 1]")]
    FillRatioOutOfRange { num: u32, den: u32, area: u32 },
    #[error("tile side must be in 1..=15, got {0}")]
    TileSide(u16),
    #[error("queue bounds invalid: q_min={q_min}, q_max={q_max}, n_pix={n_pix}")]
    QueueBounds { q_min: u32, q_max: u32, n_pix: usize },
    #[error("regulation interval must be at least 1")]
    RegulationInterval,
    #[error("no events counted, cannot suggest a cutoff period")]
    NoSignal,
    #[error("cannot parse fill ratio {0:?}")]
    ParseRatio(String),
}

/// Coefficients for the temporal filter and the targets for the spatial filter.
///
/// Coefficients are computed in `f64`; the streaming state converts them once
/// to its own scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterParams {
    pub t_cut: f64,
    pub omega_cut: f64,
    pub alpha: f64,
    pub beta: f64,
    pub fill_ratio_target: Ratio<u32>,
    pub tile_side: u16,
    pub q_min: u32,
    pub q_max: u32,
    /// Queue target before the first regulation step.
    pub q_init: u32,
    pub spatial_enabled: bool,
    /// Only switched off by the benchmark harness to isolate blur cost.
    pub blur_enabled: bool,
    /// Regulate the queue target every N events.
    pub regulate_every: u32,
}

/// Cutoff frequency in radians per event for a cutoff period in events.
pub fn omega_cut(t_cut: f64) -> f64 {
    2.0 * PI / t_cut
}

/// First-stage coefficient placing the half-power point of the high pass at `omega`.
///
/// Evaluates `(1 - sin w) / cos w` as `cos w / (1 + sin w)`, which is the same
/// value without the cancellation near `w = 0`.
pub fn alpha_cut(omega: f64) -> f64 {
    omega.cos() / (1.0 + omega.sin())
}

/// Second-stage coefficient placing the half-power point of the low pass at `omega`.
///
/// `c - sqrt(c^2 - 1)` with `c = 2 - cos w` is evaluated as its reciprocal
/// partner `1 / (c + sqrt(c^2 - 1))`, with `c - 1 = 2 sin^2(w/2)`.
pub fn beta_cut(omega: f64) -> f64 {
    let s = (0.5 * omega).sin();
    let d = 2.0 * s * s;
    1.0 / (1.0 + d + (d * (2.0 + d)).sqrt())
}

/// Derives all filter parameters for a cutoff period and fill ratio target.
pub fn compute_params(
    t_cut: f64,
    fill_ratio_target: Ratio<u32>,
    geometry: SensorGeometry,
) -> Result<FilterParams, ParamsError> {
    if !(t_cut.is_finite() && t_cut > MIN_T_CUT) {
        return Err(ParamsError::CutoffTooSmall(t_cut));
    }
    check_fill_ratio(fill_ratio_target, DEFAULT_TILE_SIDE)?;
    let omega = omega_cut(t_cut);
    let n_pix = geometry.n_pix() as u32;
    let q_max = n_pix;
    let q_min = DEFAULT_Q_MIN.min(q_max);
    let q_init = (n_pix / 16).clamp(q_min, q_max);
    Ok(FilterParams {
        t_cut,
        omega_cut: omega,
        alpha: alpha_cut(omega),
        beta: beta_cut(omega),
        fill_ratio_target,
        tile_side: DEFAULT_TILE_SIDE,
        q_min,
        q_max,
        q_init,
        spatial_enabled: true,
        blur_enabled: true,
        regulate_every: 1,
    })
}

fn check_fill_ratio(r: Ratio<u32>, tile_side: u16) -> Result<(), ParamsError> {
    let area = tile_side as u32 * tile_side as u32;
    let (num, den) = (*r.numer(), *r.denom());
    // 1/A <= num/den <= 1
    let ok = den > 0 && (num as u64) * (area as u64) >= den as u64 && num <= den;
    if ok {
        Ok(())
    } else {
        Err(ParamsError::FillRatioOutOfRange { num, den, area })
    }
}

impl FilterParams {
    /// Tile area `A`.
    #[inline(always)]
    pub fn tile_area(&self) -> u32 {
        self.tile_side as u32 * self.tile_side as u32
    }

    pub fn without_spatial(mut self) -> Self {
        self.spatial_enabled = false;
        self
    }

    pub fn with_tile_side(mut self, side: u16) -> Result<Self, ParamsError> {
        if side == 0 || side > 15 {
            return Err(ParamsError::TileSide(side));
        }
        check_fill_ratio(self.fill_ratio_target, side)?;
        self.tile_side = side;
        Ok(self)
    }

    /// Overrides the queue bounds; `q_init` is clamped into the new range.
    pub fn with_queue_bounds(mut self, q_min: u32, q_max: u32, n_pix: usize) -> Result<Self, ParamsError> {
        if q_min < 1 || q_min > q_max || q_max as usize > n_pix {
            return Err(ParamsError::QueueBounds { q_min, q_max, n_pix });
        }
        self.q_min = q_min;
        self.q_max = q_max;
        self.q_init = self.q_init.clamp(q_min, q_max);
        Ok(self)
    }

    pub fn with_q_init(mut self, q_init: u32) -> Self {
        self.q_init = q_init.clamp(self.q_min, self.q_max);
        self
    }

    pub fn with_regulate_every(mut self, n: u32) -> Result<Self, ParamsError> {
        if n == 0 {
            return Err(ParamsError::RegulationInterval);
        }
        self.regulate_every = n;
        Ok(self)
    }
}

/// Cutoff period recommended for a signal producing `n_on` ON and `n_off` OFF
/// events per sweep of the dynamic range: four times the larger count.
pub fn suggest_tcut(n_on: u64, n_off: u64) -> Result<f64, ParamsError> {
    if n_on == 0 && n_off == 0 {
        return Err(ParamsError::NoSignal);
    }
    Ok(4.0 * n_on.max(n_off) as f64)
}

/// Parses `"a/b"` or a plain decimal such as `"0.5"` into an exact ratio.
pub fn parse_fill_ratio(s: &str) -> Result<Ratio<u32>, ParamsError> {
    let err = || ParamsError::ParseRatio(s.to_string());
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u32 = n.trim().parse().map_err(|_| err())?;
        let d: u32 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 9 || (int.is_empty() && frac.is_empty()) {
        return Err(err());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
    let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
    let den = 10u64.pow(frac.len() as u32);
    let num = int.checked_mul(den).and_then(|v| v.checked_add(frac_val)).ok_or_else(err)?;
    let r = Ratio::new(num, den);
    let (n, d) = (u32::try_from(*r.numer()), u32::try_from(*r.denom()));
    match (n, d) {
        (Ok(n), Ok(d)) => Ok(Ratio::new(n, d)),
        _ => Err(err()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vga() -> SensorGeometry {
        SensorGeometry::vga()
    }

    #[test]
    fn tcut_100_coefficients() {
        let p = compute_params(100.0, default_fill_ratio(), vga()).unwrap();
        assert!((p.omega_cut - 0.02 * PI).abs() < 1e-15);
        assert!((p.omega_cut - 0.06283).abs() < 1e-5);
        // frozen from the literal closed forms evaluated in f64
        assert!((p.alpha - 0.939_062_505_817_492_4).abs() < 1e-12);
        assert!((p.beta - 0.939_120_770_076_937_1).abs() < 1e-12);
        assert!((p.alpha - p.beta).abs() < 6e-5);
    }

    #[test]
    fn stable_forms_match_literal_forms() {
        for t in [5.0, 10.0, 40.0, 100.0, 1000.0] {
            let w = omega_cut(t);
            let a_lit = (1.0 - w.sin()) / w.cos();
            let c = 2.0 - w.cos();
            let b_lit = c - (c * c - 1.0).sqrt();
            assert!((alpha_cut(w) - a_lit).abs() < 1e-12, "alpha at {t}");
            assert!((beta_cut(w) - b_lit).abs() < 1e-10, "beta at {t}");
        }
    }

    #[test]
    fn large_tcut_limit() {
        let p = compute_params(1e9, default_fill_ratio(), vga()).unwrap();
        assert!(p.alpha < 1.0 && p.alpha > 1.0 - 1e-8);
        assert!(p.beta < 1.0 && p.beta > 1.0 - 1e-8);
    }

    #[test]
    fn rejects_small_tcut() {
        for t in [4.0, 3.0, 0.0, -1.0, f64::NAN] {
            assert!(matches!(
                compute_params(t, default_fill_ratio(), vga()),
                Err(ParamsError::CutoffTooSmall(_))
            ));
        }
        assert!(compute_params(4.0001, default_fill_ratio(), vga()).is_ok());
    }

    #[test]
    fn fill_ratio_range() {
        assert!(compute_params(40.0, Ratio::new(1, 4), vga()).is_ok());
        assert!(compute_params(40.0, Ratio::new(1, 1), vga()).is_ok());
        assert!(compute_params(40.0, Ratio::new(1, 5), vga()).is_err());
        assert!(compute_params(40.0, Ratio::new(5, 4), vga()).is_err());
        let p = compute_params(40.0, Ratio::new(1, 4), vga()).unwrap();
        assert!(p.clone().with_tile_side(3).is_ok());
        let p = compute_params(40.0, Ratio::new(1, 8), vga());
        assert!(p.is_err());
    }

    #[test]
    fn queue_defaults() {
        let p = compute_params(40.0, default_fill_ratio(), vga()).unwrap();
        assert_eq!(p.q_min, 256);
        assert_eq!(p.q_max, 307_200);
        assert_eq!(p.q_init, 19_200);
        let small = SensorGeometry::new(8, 8).unwrap();
        let p = compute_params(40.0, default_fill_ratio(), small).unwrap();
        assert_eq!((p.q_min, p.q_max, p.q_init), (64, 64, 64));
        assert!(p.clone().with_queue_bounds(0, 10, 64).is_err());
        assert!(p.clone().with_queue_bounds(4, 65, 64).is_err());
        assert_eq!(p.with_queue_bounds(4, 32, 64).unwrap().q_init, 32);
    }

    #[test]
    fn suggest() {
        assert_eq!(suggest_tcut(10, 25).unwrap(), 100.0);
        assert_eq!(suggest_tcut(25, 10).unwrap(), 100.0);
        assert_eq!(suggest_tcut(10, 10).unwrap(), 40.0);
        assert_eq!(suggest_tcut(0, 0), Err(ParamsError::NoSignal));
    }

    #[test]
    fn parse_ratio() {
        assert_eq!(parse_fill_ratio("0.5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_fill_ratio("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_fill_ratio("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_fill_ratio("1").unwrap(), Ratio::new(1, 1));
        assert_eq!(parse_fill_ratio(".3").unwrap(), Ratio::new(3, 10));
        for bad in ["", "x", "1/0", "-0.5", "0.5.1", "."] {
            assert!(parse_fill_ratio(bad).is_err(), "{bad}");
        }
    }
}
