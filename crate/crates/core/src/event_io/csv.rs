//! Text event format: one `t_us,x,y,p` line per event, `p` is 1 (ON) or 0 (OFF).

use std::io::{BufRead, Write};

use crate::types::{Event, Polarity, SensorGeometry};

use super::EventIoError;

pub const CSV_HEADER: &str = "t_us,x,y,p";

fn parse_line(line: &str, line_no: u64) -> Result<Event, EventIoError> {
    let err = |msg: String| EventIoError::Parse { line: line_no, msg };
    let mut fields = line.split(',').map(str::trim);
    let mut next = |name: &str| fields.next().ok_or_else(|| err(format!("missing field {name}")));
    let t = next("t_us")?;
    let x = next("x")?;
    let y = next("y")?;
    let p = next("p")?;
    if fields.next().is_some() {
        return Err(err("too many fields".into()));
    }
    let t: u64 = t.parse().map_err(|_| err(format!("bad timestamp {t:?}")))?;
    let x: u16 = x.parse().map_err(|_| err(format!("bad x {x:?}")))?;
    let y: u16 = y.parse().map_err(|_| err(format!("bad y {y:?}")))?;
    let polarity = match p {
        "1" => Polarity::On,
        "0" => Polarity::Off,
        other => return Err(err(format!("polarity must be 0 or 1, got {other:?}"))),
    };
    Ok(Event { t, x, y, polarity })
}

/// Line-oriented reader. A leading `t_us,x,y,p` header is skipped, as are blank lines.
pub struct CsvReader<R> {
    inner: R,
    geometry: Option<SensorGeometry>,
    line: String,
    line_no: u64,
    index: u64,
    prev_t: u64,
    done: bool,
}

impl<R: BufRead> CsvReader<R> {
    /// When `geometry` is given, events outside it are reported as errors.
    pub fn new(inner: R, geometry: Option<SensorGeometry>) -> Self {
        CsvReader {
            inner,
            geometry,
            line: String::new(),
            line_no: 0,
            index: 0,
            prev_t: 0,
            done: false,
        }
    }

    fn next_event(&mut self) -> Result<Option<Event>, EventIoError> {
        loop {
            self.line.clear();
            if self.inner.read_line(&mut self.line)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let text = self.line.trim();
            if text.is_empty() || (self.line_no == 1 && text == CSV_HEADER) {
                continue;
            }
            let e = parse_line(text, self.line_no)?;
            if let Some(g) = self.geometry {
                if !g.contains(e.x, e.y) {
                    return Err(EventIoError::OutOfBounds { index: self.index, x: e.x, y: e.y });
                }
            }
            if e.t < self.prev_t {
                return Err(EventIoError::TimeRegression {
                    index: self.index,
                    t: e.t,
                    prev: self.prev_t,
                });
            }
            self.prev_t = e.t;
            self.index += 1;
            return Ok(Some(e));
        }
    }
}

impl<R: BufRead> Iterator for CsvReader<R> {
    type Item = Result<Event, EventIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_event() {
            Ok(Some(e)) => Some(Ok(e)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn read_csv<R: BufRead>(source: R, geometry: Option<SensorGeometry>) -> CsvReader<R> {
    CsvReader::new(source, geometry)
}

/// Writes the header and one line per event; returns the number of events.
pub fn write_csv<W: Write, I: IntoIterator<Item = Event>>(events: I, mut sink: W) -> Result<u64, EventIoError> {
    writeln!(sink, "{CSV_HEADER}")?;
    let mut n = 0u64;
    let mut prev = 0u64;
    for e in events {
        if e.t < prev {
            return Err(EventIoError::TimeRegression { index: n, t: e.t, prev });
        }
        prev = e.t;
        writeln!(sink, "{},{},{},{}", e.t, e.x, e.y, e.polarity.is_on() as u8)?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}
