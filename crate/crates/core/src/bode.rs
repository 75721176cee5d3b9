//! Magnitude response of the two filter stages on the unit circle.
//!
//! The high pass `H_a(z) = a (z - 1) / (z - a)` and the low pass
//! `H_b(z) = z (1 + b) / (2 (z - b))` multiply to the band pass that maps event
//! polarities to reconstructed brightness.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::params::FilterParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodeGain {
    pub omega: f64,
    pub total: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[inline]
fn stage_alpha(z: Complex64, a: f64) -> Complex64 {
    a * (z - 1.0) / (z - a)
}

#[inline]
fn stage_beta(z: Complex64, b: f64) -> Complex64 {
    z * (1.0 + b) / (2.0 * (z - b))
}

/// Evaluates |H_a|, |H_b| and |H| at `z = exp(j omega)`.
pub fn bode_gain(omega: f64, params: &FilterParams) -> BodeGain {
    bode_gain_coeffs(omega, params.alpha, params.beta)
}

pub fn bode_gain_coeffs(omega: f64, alpha: f64, beta: f64) -> BodeGain {
    let z = Complex64::from_polar(1.0, omega);
    let ha = stage_alpha(z, alpha);
    let hb = stage_beta(z, beta);
    BodeGain {
        omega,
        total: (ha * hb).norm(),
        alpha: ha.norm(),
        beta: hb.norm(),
    }
}

/// `n` frequencies log-spaced over `[1e-4 pi, pi]`, both ends included.
pub fn log_spaced_omegas(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![PI],
        _ => {
            let lo = (1e-4 * PI).ln();
            let hi = PI.ln();
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        PI
                    } else {
                        (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Bode table for `n` log-spaced frequencies.
pub fn bode_table(params: &FilterParams, n: usize) -> Vec<BodeGain> {
    log_spaced_omegas(n)
        .into_iter()
        .map(|w| bode_gain(w, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{compute_params, default_fill_ratio};
    use crate::types::SensorGeometry;

    fn params(t_cut: f64) -> FilterParams {
        compute_params(t_cut, default_fill_ratio(), SensorGeometry::vga()).unwrap()
    }

    // Real-valued magnitudes, independent of the complex evaluation.
    fn gain_alpha_sq(w: f64, a: f64) -> f64 {
        a * a * (2.0 - 2.0 * w.cos()) / (1.0 - 2.0 * a * w.cos() + a * a)
    }

    fn gain_beta_sq(w: f64, b: f64) -> f64 {
        (1.0 + b) * (1.0 + b) / (4.0 * (1.0 - 2.0 * b * w.cos() + b * b))
    }

    #[test]
    fn dc_is_rejected() {
        for t in [5.0, 40.0, 100.0, 1e6] {
            let g = bode_gain(0.0, &params(t));
            assert!(g.total.abs() < 1e-12);
            assert!(g.alpha.abs() < 1e-12);
        }
    }

    #[test]
    fn matches_closed_form_magnitudes() {
        let p = params(100.0);
        for w in log_spaced_omegas(200) {
            let g = bode_gain(w, &p);
            assert!((g.alpha * g.alpha - gain_alpha_sq(w, p.alpha)).abs() < 1e-12);
            assert!((g.beta * g.beta - gain_beta_sq(w, p.beta)).abs() < 1e-9);
            assert!((g.total - g.alpha * g.beta).abs() < 1e-12);
        }
    }

    #[test]
    fn half_power_at_cutoff() {
        for t in [5.0, 40.0, 100.0, 1000.0] {
            let p = params(t);
            // |H_a|^2 increases monotonically to its supremum at pi,
            // |H_b|^2 decreases monotonically from its supremum at 0.
            let sup_a = gain_alpha_sq(PI, p.alpha);
            let sup_b = gain_beta_sq(0.0, p.beta);
            let g = bode_gain(p.omega_cut, &p);
            assert!((g.alpha * g.alpha / sup_a - 0.5).abs() < 1e-6, "t_cut={t}");
            assert!((g.beta * g.beta / sup_b - 0.5).abs() < 1e-6, "t_cut={t}");
        }
    }

    #[test]
    fn omega_grid() {
        let w = log_spaced_omegas(5);
        assert_eq!(w.len(), 5);
        assert!((w[0] - 1e-4 * PI).abs() < 1e-15);
        assert_eq!(w[4], PI);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
    }
}
