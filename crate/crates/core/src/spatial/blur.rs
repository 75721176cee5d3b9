//! One-shot 3x3 Gaussian blur of a single pixel.

use crate::scalar::Real;
use crate::temporal::PixelState;
use crate::types::SensorGeometry;

/// Binomial taps `[1, 2, 1]`, the kernel is their outer product over 16.
pub const TAPS: [u32; 3] = [1, 2, 1];

/// Blurred value at `(x, y)` of the grid exposed through `l_at(index)`.
///
/// Out-of-bounds taps are dropped and the remaining weights renormalized, so
/// the kernel always sums to one. Neighbours enter as differences from the
/// center, which keeps a uniform field exactly unchanged.
#[inline(always)]
pub fn blurred_value<S: Real, F: Fn(usize) -> S>(
    l_at: F,
    width: usize,
    height: usize,
    x: usize,
    y: usize,
) -> S {
    let w = width;
    let c = y * w + x;
    let lc = l_at(c);
    if x > 0 && y > 0 && x + 1 < width && y + 1 < height {
        let (n, s) = (c - w, c + w);
        let d = |i: usize| l_at(i) - lc;
        let corners = d(n - 1) + d(n + 1) + d(s - 1) + d(s + 1);
        let edges = d(n) + d(s) + d(c - 1) + d(c + 1);
        return lc + (corners + S::lit(2.0) * edges) * S::lit(1.0 / 16.0);
    }
    let mut sum = S::ZERO;
    let mut weight = 0u32;
    for (dy, wy) in TAPS.iter().enumerate() {
        let yy = y as isize + dy as isize - 1;
        if yy < 0 || yy >= height as isize {
            continue;
        }
        for (dx, wx) in TAPS.iter().enumerate() {
            let xx = x as isize + dx as isize - 1;
            if xx < 0 || xx >= width as isize {
                continue;
            }
            let wgt = wx * wy;
            weight += wgt;
            sum = sum + S::lit(wgt as f64) * (l_at(yy as usize * w + xx as usize) - lc);
        }
    }
    lc + sum / S::lit(weight as f64)
}

/// Replaces the brightness at `(x, y)` with its blurred value and returns it.
/// Only the center changes; the polarity average is untouched.
#[inline]
pub fn blur_pixel<S: Real>(pixels: &mut [PixelState<S>], geometry: SensorGeometry, x: u16, y: u16) -> S {
    let (w, h) = (geometry.width() as usize, geometry.height() as usize);
    let v = blurred_value(|i| pixels[i].l, w, h, x as usize, y as usize);
    pixels[geometry.index(x, y)].l = v;
    v
}

/// Sum of the renormalized kernel weights at `(x, y)`, for verification.
pub fn kernel_weight_sum(width: usize, height: usize, x: usize, y: usize) -> f64 {
    let mut total = 0u32;
    let mut kept = 0.0f64;
    let mut weights = Vec::with_capacity(9);
    for (dy, wy) in TAPS.iter().enumerate() {
        for (dx, wx) in TAPS.iter().enumerate() {
            let xx = x as isize + dx as isize - 1;
            let yy = y as isize + dy as isize - 1;
            if xx >= 0 && yy >= 0 && (xx as usize) < width && (yy as usize) < height {
                total += wx * wy;
                weights.push((wx * wy) as f64);
            }
        }
    }
    for w in weights {
        kept += w / total as f64;
    }
    kept
}
