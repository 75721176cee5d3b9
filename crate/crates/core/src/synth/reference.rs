//! Naive per-pixel reconstructions used to compare against the filter.

use crate::types::Polarity;

/// Running sum of polarities starting from 0.
pub fn reconstruct_simple(polarities: &[Polarity]) -> Vec<i64> {
    polarities
        .iter()
        .scan(0i64, |acc, p| {
            *acc += p.sign() as i64;
            Some(*acc)
        })
        .collect()
}

/// Running sum of signed thresholds: `+c_on` per ON event, `-c_off` per OFF.
pub fn reconstruct_calibrated(polarities: &[Polarity], c_on: f64, c_off: f64) -> Vec<f64> {
    polarities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += match p {
                Polarity::On => c_on,
                Polarity::Off => -c_off,
            };
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{PixelEvents, SceneSignal};
    use Polarity::{Off, On};

    fn cycle_means(trace: &[f64], per_cycle: usize) -> Vec<f64> {
        trace
            .chunks_exact(per_cycle)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    }

    fn pixel(c_on: f64, c_off: f64, cycles: f64) -> Vec<Polarity> {
        let scene = SceneSignal::triangle(1.0, 1.0, cycles, 1000.0);
        PixelEvents::new(&scene, 0, 0, c_on, c_off, 0.0).map(|(_, p)| p).collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(reconstruct_simple(&[On, On, Off]), vec![1, 2, 1]);
        assert_eq!(reconstruct_calibrated(&[On], 0.1, 0.2), vec![0.1]);
        assert!(reconstruct_simple(&[]).is_empty());
    }

    #[test]
    fn balanced_stream_has_no_drift() {
        // 10 ON then 10 OFF per cycle
        let p = pixel(0.1, 0.1, 20.0);
        let simple: Vec<f64> = reconstruct_simple(&p).into_iter().map(|v| v as f64).collect();
        let m = cycle_means(&simple, 20);
        let (lo, hi) = m.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo <= 1.0, "{m:?}");
    }

    #[test]
    fn imbalanced_stream_drifts_unless_calibrated() {
        let (c_on, c_off) = (0.1, 0.125);
        let p = pixel(c_on, c_off, 30.0);
        let simple = reconstruct_simple(&p);
        // every cycle has two more ON than OFF events
        let last = *simple.last().unwrap();
        assert!(last > 40, "{last}");
        let calib = reconstruct_calibrated(&p, c_on, c_off);
        let max = calib.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max <= 1.0 + c_on, "{max}");
        let wrong = reconstruct_calibrated(&p, c_on, 1.2 * c_off);
        assert!(*wrong.last().unwrap() < -1.0);
    }
}
