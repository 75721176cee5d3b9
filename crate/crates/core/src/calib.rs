//! Relative contrast-threshold estimation from event counts.
//!
//! Under a stationary, spatially uniform periodic stimulus every pixel sees
//! the same total brightness excursion, so its event count is inversely
//! proportional to its threshold. The excursion itself cancels out: only
//! counts are needed.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::types::{Event, Polarity, SensorGeometry};

pub const MAP_CSV_HEADER: &str = "x,y,c_prime,c_on_prime,c_off_prime,n_on,n_off,excluded";
pub const DEFAULT_EXCLUDE_QUANTILE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum CalibError {
    #[error("every pixel was excluded; nothing to estimate from")]
    NoPixels,
    #[error("no values to histogram")]
    Empty,
    #[error("exclusion quantile must lie in [0, 0.5), got {0}")]
    BadQuantile(f64),
    #[error("histogram needs at least one bin and a non-empty range")]
    BadBins,
    #[error("unknown threshold kind {0:?}; expected c_prime, c_on_prime or c_off_prime")]
    BadWhich(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("threshold map does not match sensor: {0}")]
    Geometry(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Per-pixel ON/OFF event counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventCounts {
    pub geometry: SensorGeometry,
    pub n_on: Vec<u64>,
    pub n_off: Vec<u64>,
}

impl EventCounts {
    pub fn new(geometry: SensorGeometry) -> Self {
        let n = geometry.n_pix();
        EventCounts {
            geometry,
            n_on: vec![0; n],
            n_off: vec![0; n],
        }
    }

    /// Counts one event; returns false (and ignores it) if it lies outside the sensor.
    pub fn add(&mut self, e: &Event) -> bool {
        if !self.geometry.contains(e.x, e.y) {
            return false;
        }
        let i = self.geometry.index(e.x, e.y);
        match e.polarity {
            Polarity::On => self.n_on[i] += 1,
            Polarity::Off => self.n_off[i] += 1,
        }
        true
    }

    /// Adds partial counts from another pass over the same sensor.
    pub fn merge(&mut self, other: &EventCounts) {
        assert_eq!(self.geometry, other.geometry, "merging counts of different sensors");
        for (a, b) in self.n_on.iter_mut().zip(&other.n_on) {
            *a += b;
        }
        for (a, b) in self.n_off.iter_mut().zip(&other.n_off) {
            *a += b;
        }
    }

    pub fn n_tot(&self, i: usize) -> u64 {
        self.n_on[i] + self.n_off[i]
    }

    pub fn total_on(&self) -> u64 {
        self.n_on.iter().sum()
    }

    pub fn total_off(&self) -> u64 {
        self.n_off.iter().sum()
    }
}

pub fn count_events<I: IntoIterator<Item = Event>>(geometry: SensorGeometry, events: I) -> EventCounts {
    let mut c = EventCounts::new(geometry);
    for e in events {
        c.add(&e);
    }
    c
}

/// Estimated relative thresholds. Excluded pixels carry the neutral value 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdMap {
    pub geometry: SensorGeometry,
    pub c_prime: Vec<f64>,
    pub c_on_prime: Vec<f64>,
    pub c_off_prime: Vec<f64>,
    pub n_on: Vec<u64>,
    pub n_off: Vec<u64>,
    pub excluded: Vec<bool>,
    /// Mean total count over included pixels.
    pub n_bar_tot: Ratio<u64>,
}

/// Pixels dropped before estimation: the `floor(q n)` lowest and highest by
/// total count (ties broken by pixel index), plus every pixel without events.
pub fn exclusion_mask(counts: &EventCounts, quantile: f64) -> Result<Vec<bool>, CalibError> {
    if !(0.0..0.5).contains(&quantile) {
        return Err(CalibError::BadQuantile(quantile));
    }
    let n = counts.geometry.n_pix();
    let k = (quantile * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (counts.n_tot(i), i));
    let mut excluded = vec![false; n];
    for &i in order[..k].iter().chain(&order[n - k..]) {
        excluded[i] = true;
    }
    for (i, ex) in excluded.iter_mut().enumerate() {
        if counts.n_tot(i) == 0 {
            *ex = true;
        }
    }
    Ok(excluded)
}

pub fn estimate_thresholds(counts: &EventCounts, exclusion_quantile: f64) -> Result<ThresholdMap, CalibError> {
    let excluded = exclusion_mask(counts, exclusion_quantile)?;
    let (n_inc, sum) = (0..excluded.len())
        .filter(|&i| !excluded[i])
        .fold((0u64, 0u64), |(n, s), i| (n + 1, s + counts.n_tot(i)));
    if n_inc == 0 {
        return Err(CalibError::NoPixels);
    }
    let n_bar_tot = Ratio::new(sum, n_inc);
    // n_bar / N = sum / (n_inc N): one rounding step
    let rel = |count: u64, scale: u64| -> f64 {
        if count == 0 {
            f64::INFINITY
        } else {
            sum as f64 / (scale as f64 * n_inc as f64 * count as f64)
        }
    };
    let n = excluded.len();
    let mut map = ThresholdMap {
        geometry: counts.geometry,
        c_prime: vec![1.0; n],
        c_on_prime: vec![1.0; n],
        c_off_prime: vec![1.0; n],
        n_on: counts.n_on.clone(),
        n_off: counts.n_off.clone(),
        excluded,
        n_bar_tot,
    };
    for i in 0..n {
        if !map.excluded[i] {
            map.c_prime[i] = rel(counts.n_tot(i), 1);
            map.c_on_prime[i] = rel(counts.n_on[i], 2);
            map.c_off_prime[i] = rel(counts.n_off[i], 2);
        }
    }
    Ok(map)
}

impl ThresholdMap {
    /// All-ones map with no counts.
    pub fn uniform(geometry: SensorGeometry) -> Self {
        let n = geometry.n_pix();
        ThresholdMap {
            geometry,
            c_prime: vec![1.0; n],
            c_on_prime: vec![1.0; n],
            c_off_prime: vec![1.0; n],
            n_on: vec![0; n],
            n_off: vec![0; n],
            excluded: vec![false; n],
            n_bar_tot: Ratio::from_integer(0),
        }
    }

    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.excluded.len()).filter(move |&i| !self.excluded[i])
    }

    /// `C'` as an exact ratio, `None` for excluded or silent pixels.
    pub fn c_prime_exact(&self, i: usize) -> Option<Ratio<u64>> {
        let n = self.n_on[i] + self.n_off[i];
        (!self.excluded[i] && n > 0).then(|| self.n_bar_tot / n)
    }

    pub fn harmonic_mean(&self) -> f64 {
        let (n, s) = self.included().fold((0usize, 0.0), |(n, s), i| (n + 1, s + 1.0 / self.c_prime[i]));
        n as f64 / s
    }

    /// Values to scale the filter increments with, row-major.
    pub fn correction(&self) -> &[f64] {
        &self.c_prime
    }

    pub fn values(&self, which: Which) -> &[f64] {
        match which {
            Which::CPrime => &self.c_prime,
            Which::COnPrime => &self.c_on_prime,
            Which::COffPrime => &self.c_off_prime,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{MAP_CSV_HEADER}")?;
        for i in 0..self.c_prime.len() {
            let (x, y) = self.geometry.coords(i);
            writeln!(
                out,
                "{x},{y},{},{},{},{},{},{}",
                self.c_prime[i],
                self.c_on_prime[i],
                self.c_off_prime[i],
                self.n_on[i],
                self.n_off[i],
                self.excluded[i] as u8
            )?;
        }
        out.flush()
    }

    /// Reads a map written by [`ThresholdMap::write_csv`]. Every pixel of
    /// `geometry` must appear exactly once.
    pub fn read_csv<R: BufRead>(source: R, geometry: SensorGeometry) -> Result<Self, CalibError> {
        let n = geometry.n_pix();
        let mut map = ThresholdMap::uniform(geometry);
        let mut seen = vec![false; n];
        for (k, line) in source.lines().enumerate() {
            let line_no = k as u64 + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() || (line_no == 1 && text == MAP_CSV_HEADER) {
                continue;
            }
            let err = |msg: String| CalibError::Parse { line: line_no, msg };
            let f: Vec<&str> = text.split(',').map(str::trim).collect();
            if f.len() != 8 {
                return Err(err(format!("expected 8 fields, got {}", f.len())));
            }
            fn num<T: FromStr>(s: &str, name: &str) -> Result<T, String> {
                s.parse().map_err(|_| format!("bad {name} {s:?}"))
            }
            let parsed = (|| -> Result<_, String> {
                Ok((
                    num::<u16>(f[0], "x")?,
                    num::<u16>(f[1], "y")?,
                    num::<f64>(f[2], "c_prime")?,
                    num::<f64>(f[3], "c_on_prime")?,
                    num::<f64>(f[4], "c_off_prime")?,
                    num::<u64>(f[5], "n_on")?,
                    num::<u64>(f[6], "n_off")?,
                    match f[7] {
                        "0" => false,
                        "1" => true,
                        other => return Err(format!("excluded must be 0 or 1, got {other:?}")),
                    },
                ))
            })();
            let (x, y, c, con, coff, non, noff, ex) = parsed.map_err(err)?;
            if !geometry.contains(x, y) {
                return Err(CalibError::Geometry(format!("pixel ({x}, {y}) outside {geometry}")));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(err(format!("c_prime must be positive and finite, got {c}")));
            }
            let i = geometry.index(x, y);
            if std::mem::replace(&mut seen[i], true) {
                return Err(err(format!("pixel ({x}, {y}) listed twice")));
            }
            map.c_prime[i] = c;
            map.c_on_prime[i] = con;
            map.c_off_prime[i] = coff;
            map.n_on[i] = non;
            map.n_off[i] = noff;
            map.excluded[i] = ex;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            let (x, y) = geometry.coords(i);
            return Err(CalibError::Geometry(format!("pixel ({x}, {y}) missing")));
        }
        let (cnt, sum) = map
            .included()
            .fold((0u64, 0u64), |(c, s), i| (c + 1, s + map.n_on[i] + map.n_off[i]));
        if cnt > 0 {
            map.n_bar_tot = Ratio::new(sum, cnt);
        }
        Ok(map)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Which {
    #[default]
    CPrime,
    COnPrime,
    COffPrime,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::CPrime => "c_prime",
            Which::COnPrime => "c_on_prime",
            Which::COffPrime => "c_off_prime",
        })
    }
}

impl FromStr for Which {
    type Err = CalibError;

    fn from_str(s: &str) -> Result<Self, CalibError> {
        match s {
            "c_prime" => Ok(Which::CPrime),
            "c_on_prime" => Ok(Which::COnPrime),
            "c_off_prime" => Ok(Which::COffPrime),
            other => Err(CalibError::BadWhich(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// `bins + 1` ascending edges; bin `k` is `[edges[k], edges[k+1])`, the
    /// last bin also holds its upper edge.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Finite values outside the edges.
    pub outside: u64,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Self, CalibError> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Err(CalibError::Empty);
        }
        let (lo, hi) = match range {
            Some(r) => r,
            None => {
                let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    (lo - 0.5, hi + 0.5)
                } else {
                    (lo, hi)
                }
            }
        };
        if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CalibError::BadBins);
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
        let mut counts = vec![0u64; bins];
        let mut outside = 0;
        for v in finite {
            if v < lo || v > hi {
                outside += 1;
                continue;
            }
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Histogram { edges, counts, outside })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{},{c}", self.edges[k], self.edges[k + 1])?;
        }
        out.flush()
    }
}

/// Histogram of the included pixels' values of kind `which`.
pub fn histogram(map: &ThresholdMap, which: Which, bins: usize, range: Option<(f64, f64)>) -> Result<Histogram, CalibError> {
    let v = map.values(which);
    let values: Vec<f64> = map.included().map(|i| v[i]).collect();
    Histogram::new(&values, bins, range)
}
