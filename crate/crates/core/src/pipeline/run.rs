//! Streaming driver: feeds events, reads out frames on a schedule.
//!
//! A frame for read-out time `T` shows the state after every event with
//! `t < T` and before the first event with `t >= T`. Read-out times after the
//! last event render the final state.

use std::error::Error as StdError;
use std::io::{self, Write};

use thiserror::Error;

use crate::scalar::Real;
use crate::spatial::SpatialStats;
use crate::types::Event;

use super::engine::{EngineError, ReconstructionEngine};
use super::render::{Frame, ScaleMode};

#[derive(Clone, Debug, PartialEq)]
pub enum ReadoutSchedule {
    /// Read-outs at `n * 1e6 / fps` microseconds for `n = 1, 2, ...`; the
    /// stream's trailing read-out is the first one at or after the last event.
    Fps(f64),
    /// Explicit non-decreasing read-out times in microseconds.
    Times(Vec<u64>),
}

impl ReadoutSchedule {
    pub fn validate(&self) -> Result<(), RunError> {
        match self {
            ReadoutSchedule::Fps(f) if !(f.is_finite() && *f > 0.0) => Err(RunError::Schedule(format!("fps must be positive, got {f}"))),
            ReadoutSchedule::Times(t) if t.windows(2).any(|w| w[1] < w[0]) => {
                Err(RunError::Schedule("read-out times must be non-decreasing".into()))
            }
            _ => Ok(()),
        }
    }
}

struct Readouts<'a> {
    schedule: &'a ReadoutSchedule,
    n: usize,
    last: Option<u64>,
}

impl Readouts<'_> {
    fn peek(&self) -> Option<u64> {
        match self.schedule {
            ReadoutSchedule::Fps(fps) => Some(((self.n + 1) as f64 * 1e6 / fps).round() as u64),
            ReadoutSchedule::Times(t) => t.get(self.n).copied(),
        }
    }

    fn advance(&mut self) {
        self.last = self.peek();
        self.n += 1;
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("reading event {index}: {source}")]
    Input {
        index: u64,
        #[source]
        source: Box<dyn StdError + Send + Sync>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("writing frame {frame}: {source}")]
    Sink {
        frame: u64,
        #[source]
        source: io::Error,
    },
    #[error("invalid read-out schedule: {0}")]
    Schedule(String),
}

/// A rendered frame plus the spatial counters at read-out.
#[derive(Clone, Debug)]
pub struct FrameRecord {
    pub index: u64,
    pub frame: Frame,
    pub stats: SpatialStats,
    pub tile_area: u32,
}

impl FrameRecord {
    pub fn fill_ratio(&self) -> Option<f64> {
        self.stats
            .fill_ratio(self.tile_area)
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub events: u64,
    pub rejected: u64,
    pub frames: u64,
}

/// Processes `events` in order and hands each read-out to `sink`.
pub fn run<S, I, E, F>(
    engine: &mut ReconstructionEngine<S>,
    events: I,
    schedule: &ReadoutSchedule,
    mode: ScaleMode,
    mut sink: F,
) -> Result<RunSummary, RunError>
where
    S: Real,
    I: IntoIterator<Item = Result<Event, E>>,
    E: StdError + Send + Sync + 'static,
    F: FnMut(FrameRecord) -> io::Result<()>,
{
    schedule.validate()?;
    let mut readouts = Readouts { schedule, n: 0, last: None };
    let mut frames = 0u64;
    let mut emit = |engine: &ReconstructionEngine<S>, t: u64, frames: &mut u64| -> Result<(), RunError> {
        let record = FrameRecord {
            index: *frames,
            frame: engine.render(mode, t),
            stats: engine.spatial_stats(),
            tile_area: engine.spatial().tile_area(),
        };
        sink(record).map_err(|source| RunError::Sink { frame: *frames, source })?;
        *frames += 1;
        Ok(())
    };

    let mut index = 0u64;
    let mut last_t = None;
    for item in events {
        let e = item.map_err(|source| RunError::Input { index, source: Box::new(source) })?;
        while let Some(t) = readouts.peek() {
            if t > e.t {
                break;
            }
            emit(engine, t, &mut frames)?;
            readouts.advance();
        }
        engine.process(&e)?;
        last_t = Some(e.t);
        index += 1;
    }

    match schedule {
        ReadoutSchedule::Fps(_) => {
            if let Some(last) = last_t {
                while let Some(t) = readouts.peek() {
                    if readouts.last.is_some_and(|r| r >= last) {
                        break;
                    }
                    emit(engine, t, &mut frames)?;
                    readouts.advance();
                }
            }
        }
        ReadoutSchedule::Times(_) => {
            while let Some(t) = readouts.peek() {
                emit(engine, t, &mut frames)?;
                readouts.advance();
            }
        }
    }

    Ok(RunSummary {
        events: engine.events_processed(),
        rejected: engine.events_rejected(),
        frames,
    })
}

/// Per-frame diagnostics in CSV form.
pub struct DiagnosticsWriter<W: Write> {
    out: W,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub const HEADER: &'static str = "frame,readout_us,q_target,fill_ratio,n_pix_act,n_tiles_act,blur_count";

    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "{}", Self::HEADER)?;
        Ok(DiagnosticsWriter { out })
    }

    pub fn write(&mut self, r: &FrameRecord) -> io::Result<()> {
        let fill = r.fill_ratio().map_or(String::new(), |f| format!("{f:.6}"));
        writeln!(
            self.out,
            "{},{},{},{},{},{},{}",
            r.index, r.frame.readout_time, r.stats.q_target, fill, r.stats.n_pix_act, r.stats.n_tiles_act, r.stats.blur_count
        )
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{compute_params, default_fill_ratio};
    use crate::types::{Polarity, SensorGeometry};
    use std::convert::Infallible;

    fn engine() -> ReconstructionEngine<f32> {
        let g = SensorGeometry::new(8, 8).unwrap();
        ReconstructionEngine::new(g, compute_params(40.0, default_fill_ratio(), g).unwrap())
    }

    fn events(ts: &[u64]) -> Vec<Result<Event, Infallible>> {
        ts.iter()
            .enumerate()
            .map(|(i, &t)| Ok(Event::new(t, (i % 8) as u16, (i / 8 % 8) as u16, Polarity::On)))
            .collect()
    }

    fn collect(ts: &[u64], schedule: ReadoutSchedule) -> Vec<FrameRecord> {
        let mut out = Vec::new();
        run(&mut engine(), events(ts), &schedule, ScaleMode::Fixed(1.0), |r| {
            out.push(r);
            Ok(())
        })
        .unwrap();
        out
    }

    #[test]
    fn forty_frames_per_second() {
        let ts: Vec<u64> = (0..1000).map(|i| i * 1000).collect();
        let frames = collect(&ts, ReadoutSchedule::Fps(40.0));
        assert_eq!(frames.len(), 40);
        assert_eq!(frames[0].frame.readout_time, 25_000);
        assert_eq!(frames.last().unwrap().frame.readout_time, 1_000_000);
        let ts: Vec<u64> = (0..=1000).map(|i| i * 1000).collect();
        assert_eq!(collect(&ts, ReadoutSchedule::Fps(40.0)).len(), 40);
    }

    #[test]
    fn boundary_renders_state_before_event() {
        let frames = collect(&[0, 10, 20], ReadoutSchedule::Times(vec![0, 10, 15, 15, 100]));
        assert_eq!(frames.len(), 5);
        assert!(frames[0].frame.pixels.iter().all(|&p| p == 128));
        // read-out at 10 precedes the event at 10
        assert_eq!(frames[1].frame.pixels.iter().filter(|&&p| p != 128).count(), 1);
        assert_eq!(frames[2].frame.pixels, frames[3].frame.pixels);
        assert_eq!(frames[4].frame.pixels.iter().filter(|&&p| p != 128).count(), 3);
    }

    #[test]
    fn empty_stream() {
        assert!(collect(&[], ReadoutSchedule::Fps(40.0)).is_empty());
        assert_eq!(collect(&[], ReadoutSchedule::Times(vec![5, 6])).len(), 2);
    }

    #[test]
    fn bad_schedules() {
        for s in [ReadoutSchedule::Fps(0.0), ReadoutSchedule::Times(vec![3, 2])] {
            let r = run(&mut engine(), events(&[1]), &s, ScaleMode::Robust, |_| Ok(()));
            assert!(matches!(r, Err(RunError::Schedule(_))));
        }
    }

    #[test]
    fn diagnostics_rows() {
        let frames = collect(&[0, 10, 20], ReadoutSchedule::Times(vec![30]));
        let mut w = DiagnosticsWriter::new(Vec::new()).unwrap();
        w.write(&frames[0]).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], DiagnosticsWriter::<Vec<u8>>::HEADER);
        assert_eq!(lines[1], "0,30,64,0.375000,3,2,0");
    }
}
