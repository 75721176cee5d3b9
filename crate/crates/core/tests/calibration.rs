use fibar::calib::{count_events, estimate_thresholds, histogram, EventCounts, Histogram, Which};
use fibar::synth::{generate, IdealSensorConfig, SceneSignal};
use fibar::{Event, SensorGeometry};

fn geometry() -> SensorGeometry {
    SensorGeometry::new(16, 12).unwrap()
}

fn counts(sensor: &IdealSensorConfig, amplitude: f64, cycles: f64) -> EventCounts {
    let scene = SceneSignal::triangle(amplitude, 1.0, cycles, 20_000.0);
    count_events(sensor.geometry, generate(&scene, sensor).unwrap())
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

#[test]
fn uniform_thresholds_give_equal_counts() {
    let c = counts(&IdealSensorConfig::uniform(geometry(), 0.1, 0.1), 2.0, 3.0);
    let tot: Vec<u64> = (0..geometry().n_pix()).map(|i| c.n_tot(i)).collect();
    let (lo, hi) = (tot.iter().min().unwrap(), tot.iter().max().unwrap());
    assert!(hi - lo <= 1, "{lo}..{hi}");
}

#[test]
fn counts_ignore_event_order() {
    let sensor = IdealSensorConfig::lognormal(geometry(), 0.1, 0.1, 0.2, 3).unwrap();
    let scene = SceneSignal::triangle(1.0, 1.0, 2.0, 1000.0);
    let ev: Vec<Event> = generate(&scene, &sensor).unwrap().collect();
    let mut rev = ev.clone();
    rev.reverse();
    assert_eq!(count_events(geometry(), ev), count_events(geometry(), rev));
}

#[test]
fn stationarity_relation() {
    let sensor = IdealSensorConfig::anticorrelated(geometry(), 0.1, 0.2, 6).unwrap();
    let cycles = 10.0;
    let c = counts(&sensor, 2.0, cycles);
    for i in 0..geometry().n_pix() {
        let (c_on, c_off) = (sensor.c_on[i], sensor.c_off[i]);
        let up = c.n_on[i] as f64 * c_on;
        let down = c.n_off[i] as f64 * c_off;
        // the scene ends where it started, so the reference ends within one threshold of it
        assert!((up - down).abs() < c_on.max(c_off) + 1e-9, "pixel {i}: {up} vs {down}");
        // each half cycle starts up to one opposite threshold from the extreme
        assert!((up / cycles - 2.0).abs() <= c_on + c_off, "pixel {i}: {up}");
        assert!((down / cycles - 2.0).abs() <= c_on + c_off, "pixel {i}: {down}");
    }
}

#[test]
fn relative_thresholds_are_scale_free() {
    let a = IdealSensorConfig::lognormal(geometry(), 0.1, 0.1, 0.1, 12).unwrap();
    let mut b = a.clone();
    for v in b.c_on.iter_mut().chain(b.c_off.iter_mut()) {
        *v *= 1.5;
    }
    let ma = estimate_thresholds(&counts(&a, 10.0, 20.0), 0.0).unwrap();
    let mb = estimate_thresholds(&counts(&b, 10.0, 20.0), 0.0).unwrap();
    for i in 0..geometry().n_pix() {
        // count quantization: at most one event per half cycle out of >= 60
        assert!((ma.c_prime[i] - mb.c_prime[i]).abs() / ma.c_prime[i] < 0.04, "pixel {i}");
    }
}

#[test]
fn exact_identity_and_harmonic_mean() {
    let sensor = IdealSensorConfig::lognormal(geometry(), 0.1, 0.1, 0.3, 1).unwrap();
    let map = estimate_thresholds(&counts(&sensor, 2.0, 5.0), 0.05).unwrap();
    for i in map.included() {
        let n = map.n_on[i] + map.n_off[i];
        assert_eq!(map.c_prime_exact(i).unwrap() * n, map.n_bar_tot);
        let rel = (map.c_prime[i] * n as f64 - *map.n_bar_tot.numer() as f64 / *map.n_bar_tot.denom() as f64).abs();
        assert!(rel < 1e-9);
    }
    assert!((map.harmonic_mean() - 1.0).abs() < 1e-12);
    assert_eq!(map.excluded.iter().filter(|&&e| e).count(), 2 * 9);
}

#[test]
fn estimated_histogram_matches_ground_truth() {
    let g = SensorGeometry::new(24, 24).unwrap();
    let sensor = IdealSensorConfig::lognormal(g, 0.1, 0.1, 0.1, 77).unwrap();
    let map = estimate_thresholds(&counts(&sensor, 10.0, 20.0), 0.01).unwrap();
    let inc: Vec<usize> = map.included().collect();
    let c = sensor.global_threshold(inc.iter().copied());
    let truth: Vec<f64> = inc.iter().map(|&i| sensor.pixel_threshold(i) / c).collect();
    let range = Some((0.6, 1.6));
    let he = histogram(&map, Which::CPrime, 10, range).unwrap();
    let ht = Histogram::new(&truth, 10, range).unwrap();
    for (a, b) in he.counts.iter().zip(&ht.counts) {
        assert!((*a as f64 - *b as f64).abs() <= 0.05 * inc.len() as f64, "{:?} vs {:?}", he.counts, ht.counts);
    }
}

#[test]
fn polarity_estimates_are_broader_under_imbalance() {
    let sensor = IdealSensorConfig::anticorrelated(geometry(), 0.1, 0.15, 21).unwrap();
    let map = estimate_thresholds(&counts(&sensor, 10.0, 10.0), 0.01).unwrap();
    let pick = |w: Which| -> Vec<f64> { map.included().map(|i| map.values(w)[i]).collect() };
    let (vc, von, voff) = (variance(&pick(Which::CPrime)), variance(&pick(Which::COnPrime)), variance(&pick(Which::COffPrime)));
    assert!(von >= vc && voff >= vc, "{vc} {von} {voff}");
}
