//! Event stream codecs: the binary EVF1 format and a CSV text format.
//!
//! All readers are single-pass iterators, so streams larger than memory can
//! be processed.

mod csv;
mod evf;

pub use self::csv::{read_csv, write_csv, CsvReader, CSV_HEADER};
pub use self::evf::{
    decode_header, decode_record, encode_header, encode_record, read_stream, write_stream, EvfReader, EvfWriter,
    HEADER_LEN, MAGIC, RECORD_LEN,
};

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::types::{Event, SensorGeometry};

#[derive(Debug, Error)]
pub enum EventIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected \"EVF1\"")]
    BadMagic([u8; 4]),
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("truncated input at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("event {index} at ({x}, {y}) is outside the sensor")]
    OutOfBounds { index: u64, x: u16, y: u16 },
    #[error("event {index} time {t} precedes previous time {prev}")]
    TimeRegression { index: u64, t: u64, prev: u64 },
    #[error("event {index}: time step {dt} us does not fit in 32 bits")]
    DtOverflow { index: u64, dt: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("cannot infer sensor geometry: {0}")]
    Geometry(String),
}

impl EventIoError {
    /// True for malformed input as opposed to I/O failures.
    pub fn is_format_error(&self) -> bool {
        !matches!(self, EventIoError::Io(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventFormat {
    Evf,
    Csv,
}

impl EventFormat {
    /// `.csv` files are text, everything else is EVF1.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => EventFormat::Csv,
            _ => EventFormat::Evf,
        }
    }
}

pub type EventStream = Box<dyn Iterator<Item = Result<Event, EventIoError>>>;

/// Opens an event file of either format. CSV files carry no geometry; when
/// none is supplied it is inferred from the largest coordinates with an extra
/// pass over the file.
pub fn open_event_file(path: &Path, geometry: Option<SensorGeometry>) -> Result<(SensorGeometry, EventStream), EventIoError> {
    match EventFormat::from_path(path) {
        EventFormat::Evf => {
            let (g, r) = read_stream(BufReader::with_capacity(1 << 16, File::open(path)?))?;
            if let Some(want) = geometry {
                if want != g {
                    return Err(EventIoError::Geometry(format!("file is {g}, expected {want}")));
                }
            }
            Ok((g, Box::new(r)))
        }
        EventFormat::Csv => {
            let g = match geometry {
                Some(g) => g,
                None => infer_csv_geometry(BufReader::new(File::open(path)?))?,
            };
            let r = read_csv(BufReader::with_capacity(1 << 16, File::open(path)?), Some(g));
            Ok((g, Box::new(r)))
        }
    }
}

fn infer_csv_geometry<R: BufRead>(source: R) -> Result<SensorGeometry, EventIoError> {
    let (mut w, mut h) = (0u32, 0u32);
    for e in read_csv(source, None) {
        let e = e?;
        w = w.max(e.x as u32 + 1);
        h = h.max(e.y as u32 + 1);
    }
    SensorGeometry::new(w.max(2), h.max(2)).map_err(|e| EventIoError::Geometry(e.to_string()))
}

/// Writes events to `path`, choosing the format from the extension.
pub fn write_event_file<I: IntoIterator<Item = Event>>(
    path: &Path,
    geometry: SensorGeometry,
    events: I,
) -> Result<u64, EventIoError> {
    let out = BufWriter::with_capacity(1 << 16, File::create(path)?);
    match EventFormat::from_path(path) {
        EventFormat::Evf => write_stream(geometry, events, out),
        EventFormat::Csv => write_csv(events, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Polarity;

    #[test]
    fn file_round_trip_both_formats() {
        let dir = std::env::temp_dir().join(format!("fibar-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let g = SensorGeometry::new(10, 6).unwrap();
        let ev = vec![Event::new(3, 9, 5, Polarity::On), Event::new(3, 0, 0, Polarity::Off)];
        for name in ["a.evf", "a.csv"] {
            let p = dir.join(name);
            assert_eq!(write_event_file(&p, g, ev.clone()).unwrap(), 2);
            let (g2, it) = open_event_file(&p, Some(g)).unwrap();
            assert_eq!(g2, g);
            assert_eq!(it.map(Result::unwrap).collect::<Vec<_>>(), ev);
        }
        let (inferred, _) = open_event_file(&dir.join("a.csv"), None).unwrap();
        assert_eq!(inferred, g);
        assert!(open_event_file(&dir.join("a.evf"), Some(SensorGeometry::vga())).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
