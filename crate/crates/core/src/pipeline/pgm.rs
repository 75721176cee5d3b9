//! Binary PGM (P5, maxval 255) output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::render::Frame;

pub fn write_pgm<W: Write>(frame: &Frame, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", frame.width, frame.height)?;
    out.write_all(&frame.pixels)
}

/// `frame_000042.pgm`
pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.pgm")
}

/// Writes `frame` into `dir` under its indexed name and returns the path.
pub fn save_frame(dir: &Path, index: u64, frame: &Frame) -> io::Result<PathBuf> {
    let path = dir.join(frame_file_name(index));
    let mut w = BufWriter::new(File::create(&path)?);
    write_pgm(frame, &mut w)?;
    w.flush()?;
    Ok(path)
}
