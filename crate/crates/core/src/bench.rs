//! Throughput measurement of the reconstruction stages.
//!
//! Stages are timed by subtraction: the decoder alone, decoder plus temporal
//! filter, plus active-pixel tracking without blur, and the full pipeline are
//! each run over the same in-memory EVF1 buffer. A stage's cost is the
//! difference between consecutive cumulative runs, so no timer sits inside the
//! per-event loop. The result is an approximation: the stages share caches
//! and branch predictors when run together. `nsf` and `full` time whole
//! paths, decode included.

use std::fmt;
use std::hint::black_box;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::event_io::{read_stream, EventIoError};
use crate::params::FilterParams;
use crate::pipeline::ReconstructionEngine;
use crate::types::SensorGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Decode,
    Temporal,
    Tracking,
    Blur,
    /// Decode plus temporal filter: the whole path without spatial filtering.
    Nsf,
    Full,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Decode, Stage::Temporal, Stage::Tracking, Stage::Blur, Stage::Nsf, Stage::Full];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Decode => "decode",
            Stage::Temporal => "temporal",
            Stage::Tracking => "tracking",
            Stage::Blur => "blur",
            Stage::Nsf => "nsf",
            Stage::Full => "full",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStage(pub String);

impl fmt::Display for UnknownStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown stage {:?}; expected decode, temporal, tracking, blur, nsf or full", self.0)
    }
}

impl std::error::Error for UnknownStage {}

impl FromStr for Stage {
    type Err = UnknownStage;

    fn from_str(s: &str) -> Result<Self, UnknownStage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStage(s.to_string()))
    }
}

/// Cumulative pipeline prefixes that are actually executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Prefix {
    Decode,
    Temporal,
    Tracking,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub stage: Stage,
    pub events: u64,
    /// Median wall time attributed to the stage (zero if the subtraction went negative).
    pub wall: Duration,
    /// Signed per-event cost; may be slightly negative for cheap stages.
    pub ns_per_event: f64,
    pub geometry: SensorGeometry,
    pub params: String,
    pub repeat: usize,
}

impl BenchReport {
    pub fn mev_per_s(&self) -> f64 {
        if self.ns_per_event > 0.0 {
            1000.0 / self.ns_per_event
        } else {
            f64::INFINITY
        }
    }

    pub const CSV_HEADER: &'static str = "stage,events,wall_s,ns_per_event,mev_per_s,geometry,repeat,params";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.3},{:.3},{},{},\"{}\"",
            self.stage,
            self.events,
            self.wall.as_secs_f64(),
            self.ns_per_event,
            self.mev_per_s(),
            self.geometry,
            self.repeat,
            self.params
        )
    }

    pub fn write_csv<W: Write>(reports: &[BenchReport], mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in reports {
            writeln!(out, "{}", r.csv_row())?;
        }
        out.flush()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<9} {:>8.2} ns/ev {:>9.1} Mev/s  ({} events, {} sensor, median of {})",
            self.stage.name(),
            self.ns_per_event,
            self.mev_per_s(),
            self.events,
            self.geometry,
            self.repeat
        )
    }
}

fn params_summary(p: &FilterParams) -> String {
    format!(
        "t_cut={} fill_ratio={} tile={} q=[{},{}] regulate_every={}",
        p.t_cut, p.fill_ratio_target, p.tile_side, p.q_min, p.q_max, p.regulate_every
    )
}

fn run_prefix(data: &[u8], params: &FilterParams, prefix: Prefix) -> Result<(Duration, u64), EventIoError> {
    let (geometry, _) = read_stream(data)?;
    let mut params = params.clone();
    match prefix {
        Prefix::Temporal => params.spatial_enabled = false,
        Prefix::Tracking => {
            params.spatial_enabled = true;
            params.blur_enabled = false;
        }
        Prefix::Full => {
            params.spatial_enabled = true;
            params.blur_enabled = true;
        }
        Prefix::Decode => {}
    }
    let mut engine = ReconstructionEngine::<f32>::new(geometry, params);
    let (_, reader) = read_stream(data)?;
    let mut n = 0u64;
    let start = Instant::now();
    if prefix == Prefix::Decode {
        let mut acc = 0u64;
        for e in reader {
            let e = e?;
            acc = acc.wrapping_add(e.t ^ e.x as u64 ^ ((e.y as u64) << 16) ^ e.polarity.is_on() as u64);
            n += 1;
        }
        black_box(acc);
    } else {
        for e in reader {
            let e = e?;
            // in-bounds by construction: the decoder checks geometry
            let _ = engine.process(&e);
            n += 1;
        }
        black_box(engine.pixels());
    }
    Ok((start.elapsed(), n))
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2
    }
}

fn timed(data: &[u8], params: &FilterParams, prefix: Prefix, repeat: usize) -> Result<(Duration, u64), EventIoError> {
    let mut times = Vec::with_capacity(repeat);
    let mut n = 0;
    for _ in 0..repeat.max(1) {
        let (d, k) = run_prefix(data, params, prefix)?;
        times.push(d);
        n = k;
    }
    Ok((median(times), n))
}

/// Measures `stage` over the EVF1 bytes in `data`, taking the median of
/// `repeat` runs of every cumulative prefix involved.
pub fn bench_stage(data: &[u8], params: &FilterParams, stage: Stage, repeat: usize) -> Result<BenchReport, EventIoError> {
    let (geometry, _) = read_stream(data)?;
    let pair = |hi: Prefix, lo: Option<Prefix>| -> Result<(f64, u64), EventIoError> {
        let (a, n) = timed(data, params, hi, repeat)?;
        let b = match lo {
            Some(lo) => timed(data, params, lo, repeat)?.0,
            None => Duration::ZERO,
        };
        Ok((a.as_secs_f64() - b.as_secs_f64(), n))
    };
    let (secs, events) = match stage {
        Stage::Decode => pair(Prefix::Decode, None)?,
        Stage::Temporal => pair(Prefix::Temporal, Some(Prefix::Decode))?,
        Stage::Tracking => pair(Prefix::Tracking, Some(Prefix::Temporal))?,
        Stage::Blur => pair(Prefix::Full, Some(Prefix::Tracking))?,
        Stage::Nsf => pair(Prefix::Temporal, None)?,
        Stage::Full => pair(Prefix::Full, None)?,
    };
    let ns_per_event = if events > 0 { secs * 1e9 / events as f64 } else { 0.0 };
    Ok(BenchReport {
        stage,
        events,
        wall: Duration::from_secs_f64(secs.max(0.0)),
        ns_per_event,
        geometry,
        params: params_summary(params),
        repeat: repeat.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_io::write_stream;
    use crate::params::{compute_params, default_fill_ratio};
    use crate::types::{Event, Polarity};

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("gpu".parse::<Stage>().is_err());
    }

    #[test]
    fn report_is_self_consistent() {
        let g = SensorGeometry::new(16, 16).unwrap();
        let ev: Vec<Event> = (0..5000u64)
            .map(|i| Event::new(i, (i * 7 % 16) as u16, (i * 3 % 16) as u16, Polarity::from_bit(i % 3 == 0)))
            .collect();
        let mut data = Vec::new();
        write_stream(g, ev, &mut data).unwrap();
        let p = compute_params(40.0, default_fill_ratio(), g).unwrap();
        for s in Stage::ALL {
            let r = bench_stage(&data, &p, s, 3).unwrap();
            assert_eq!(r.events, 5000);
            if r.ns_per_event > 0.0 {
                assert!((r.mev_per_s() * r.ns_per_event - 1000.0).abs() < 1e-9);
            }
            assert!(r.csv_row().starts_with(s.name()));
        }
    }

    #[test]
    fn median_of_durations() {
        let ms = Duration::from_millis;
        assert_eq!(median(vec![ms(3), ms(1), ms(2)]), ms(2));
        assert_eq!(median(vec![ms(4), ms(1), ms(2), ms(3)]), Duration::from_micros(2500));
    }
}
