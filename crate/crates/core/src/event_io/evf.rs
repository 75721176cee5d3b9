//! EVF1: 16-byte header followed by 8-byte little-endian event records.
//!
//! ```text
//! header  "EVF1" | width u16 | height u16 | 8 zero bytes
//! record  dt u32 | xp u16 (bit 15 polarity, bits 0-14 x) | y u16
//! ```
//!
//! `dt` is the time since the previous event (the first record counts from 0).

use std::io::{self, Read, Write};

use crate::types::{Event, Polarity, SensorGeometry};

use super::EventIoError;

pub const MAGIC: [u8; 4] = *b"EVF1";
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 8;

const POLARITY_BIT: u16 = 1 << 15;

pub fn encode_header(geometry: SensorGeometry) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(&MAGIC);
    h[4..6].copy_from_slice(&geometry.width().to_le_bytes());
    h[6..8].copy_from_slice(&geometry.height().to_le_bytes());
    h
}

pub fn decode_header(h: &[u8; HEADER_LEN]) -> Result<SensorGeometry, EventIoError> {
    if h[..4] != MAGIC {
        return Err(EventIoError::BadMagic([h[0], h[1], h[2], h[3]]));
    }
    if h[8..].iter().any(|&b| b != 0) {
        return Err(EventIoError::BadHeader("reserved bytes are not zero".into()));
    }
    let w = u16::from_le_bytes([h[4], h[5]]);
    let hh = u16::from_le_bytes([h[6], h[7]]);
    SensorGeometry::new(w as u32, hh as u32).map_err(|e| EventIoError::BadHeader(e.to_string()))
}

#[inline(always)]
pub fn encode_record(dt: u32, e: &Event) -> [u8; RECORD_LEN] {
    let xp = e.x | if e.polarity.is_on() { POLARITY_BIT } else { 0 };
    let mut r = [0u8; RECORD_LEN];
    r[..4].copy_from_slice(&dt.to_le_bytes());
    r[4..6].copy_from_slice(&xp.to_le_bytes());
    r[6..].copy_from_slice(&e.y.to_le_bytes());
    r
}

/// Returns `(dt, x, y, polarity)`.
#[inline(always)]
pub fn decode_record(r: &[u8; RECORD_LEN]) -> (u32, u16, u16, Polarity) {
    let dt = u32::from_le_bytes([r[0], r[1], r[2], r[3]]);
    let xp = u16::from_le_bytes([r[4], r[5]]);
    let y = u16::from_le_bytes([r[6], r[7]]);
    (dt, xp & !POLARITY_BIT, y, Polarity::from_bit(xp & POLARITY_BIT != 0))
}

/// Reads as many bytes as available up to `buf.len()`; short only at end of input.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..]) {
            Ok(0) => break,
            Ok(k) => n += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(n)
}

/// Single-pass decoder. Wrap unbuffered sources in a `BufReader`.
pub struct EvfReader<R> {
    inner: R,
    geometry: SensorGeometry,
    t: u64,
    index: u64,
    done: bool,
}

impl<R: Read> EvfReader<R> {
    pub fn new(mut inner: R) -> Result<Self, EventIoError> {
        let mut h = [0u8; HEADER_LEN];
        let n = read_full(&mut inner, &mut h)?;
        if n < 4 || h[..4] != MAGIC {
            if n >= 4 {
                return Err(EventIoError::BadMagic([h[0], h[1], h[2], h[3]]));
            }
            return Err(EventIoError::Truncated { offset: n as u64 });
        }
        if n < HEADER_LEN {
            return Err(EventIoError::Truncated { offset: n as u64 });
        }
        let geometry = decode_header(&h)?;
        Ok(EvfReader {
            inner,
            geometry,
            t: 0,
            index: 0,
            done: false,
        })
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    fn next_event(&mut self) -> Result<Option<Event>, EventIoError> {
        let mut r = [0u8; RECORD_LEN];
        let n = read_full(&mut self.inner, &mut r)?;
        if n == 0 {
            return Ok(None);
        }
        if n < RECORD_LEN {
            return Err(EventIoError::Truncated {
                offset: HEADER_LEN as u64 + self.index * RECORD_LEN as u64 + n as u64,
            });
        }
        let (dt, x, y, polarity) = decode_record(&r);
        if !self.geometry.contains(x, y) {
            return Err(EventIoError::OutOfBounds { index: self.index, x, y });
        }
        self.t += dt as u64;
        self.index += 1;
        Ok(Some(Event { t: self.t, x, y, polarity }))
    }
}

impl<R: Read> Iterator for EvfReader<R> {
    type Item = Result<Event, EventIoError>;

    #[inline]
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

/// Opens an EVF1 stream and returns its geometry with the event iterator.
pub fn read_stream<R: Read>(source: R) -> Result<(SensorGeometry, EvfReader<R>), EventIoError> {
    let r = EvfReader::new(source)?;
    Ok((r.geometry(), r))
}

/// Incremental encoder.
pub struct EvfWriter<W: Write> {
    out: W,
    geometry: SensorGeometry,
    prev_t: u64,
    count: u64,
}

impl<W: Write> EvfWriter<W> {
    pub fn new(geometry: SensorGeometry, mut out: W) -> Result<Self, EventIoError> {
        out.write_all(&encode_header(geometry))?;
        Ok(EvfWriter {
            out,
            geometry,
            prev_t: 0,
            count: 0,
        })
    }

    pub fn write(&mut self, e: &Event) -> Result<(), EventIoError> {
        if !self.geometry.contains(e.x, e.y) {
            return Err(EventIoError::OutOfBounds { index: self.count, x: e.x, y: e.y });
        }
        if e.t < self.prev_t {
            return Err(EventIoError::TimeRegression {
                index: self.count,
                t: e.t,
                prev: self.prev_t,
            });
        }
        let dt = e.t - self.prev_t;
        let dt = u32::try_from(dt).map_err(|_| EventIoError::DtOverflow { index: self.count, dt })?;
        self.out.write_all(&encode_record(dt, e))?;
        self.prev_t = e.t;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Flushes and returns the sink with the number of records written.
    pub fn finish(mut self) -> Result<(W, u64), EventIoError> {
        self.out.flush()?;
        Ok((self.out, self.count))
    }
}

/// Writes the header and every event; returns the number of records.
pub fn write_stream<W: Write, I: IntoIterator<Item = Event>>(
    geometry: SensorGeometry,
    events: I,
    sink: W,
) -> Result<u64, EventIoError> {
    let mut w = EvfWriter::new(geometry, sink)?;
    for e in events {
        w.write(&e)?;
    }
    Ok(w.finish()?.1)
}
