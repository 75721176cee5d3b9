//! Helpers shared by several subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args as ClapArgs;
use fibar::event_io::{open_event_file, EventStream};
use fibar::params::{compute_params, parse_fill_ratio, DEFAULT_T_CUT};
use fibar::{FilterParams, SensorGeometry};

use crate::failure::Failure;

/// Input file plus the geometry override for CSV files.
#[derive(Debug, Clone, ClapArgs)]
pub struct InputArgs {
    /// Event file; `.csv` is read as text, anything else as EVF1
    #[arg(long, short)]
    pub input: PathBuf,
    /// Sensor width for CSV input (inferred from the data if omitted)
    #[arg(long, requires = "height")]
    pub width: Option<u32>,
    /// Sensor height for CSV input
    #[arg(long, requires = "width")]
    pub height: Option<u32>,
}

impl InputArgs {
    pub fn open(&self) -> Result<(SensorGeometry, EventStream), Failure> {
        let geometry = match (self.width, self.height) {
            (Some(w), Some(h)) => Some(SensorGeometry::new(w, h).map_err(Failure::usage)?),
            _ => None,
        };
        if !self.input.exists() {
            return Err(Failure::usage(anyhow!("input {} does not exist", self.input.display())));
        }
        open_event_file(&self.input, geometry)
            .map_err(|e| Failure::from(e).context(format!("opening {}", self.input.display())))
    }
}

/// Temporal and spatial filter settings.
#[derive(Debug, Clone, ClapArgs)]
pub struct FilterArgs {
    /// Cutoff period in events (must exceed 4)
    #[arg(long, default_value_t = DEFAULT_T_CUT)]
    pub tcut: f64,
    /// Target fill ratio of active tiles, as a decimal or a fraction
    #[arg(long, default_value = "0.5")]
    pub fill_ratio: String,
    /// Disable the spatial staleness filter
    #[arg(long)]
    pub no_spatial: bool,
}

impl FilterArgs {
    pub fn params(&self, geometry: SensorGeometry) -> Result<FilterParams, Failure> {
        let r = parse_fill_ratio(&self.fill_ratio).map_err(Failure::usage)?;
        let p = compute_params(self.tcut, r, geometry).map_err(Failure::usage)?;
        Ok(if self.no_spatial { p.without_spatial() } else { p })
    }
}

/// Buffered writer to `path`, or stdout when absent or `-`.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f = File::create(p).map_err(|e| Failure::usage(anyhow!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn write_failed(e: io::Error) -> Failure {
    Failure::runtime(anyhow!("write failed: {e}"))
}

/// Parses `a,b` into two values.
pub fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad value {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad value {b:?}"))?;
    Ok((a, b))
}
