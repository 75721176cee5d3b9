use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args as ClapArgs;
use fibar::calib::ThresholdMap;
use fibar::pipeline::{run as run_pipeline, save_frame, DiagnosticsWriter, ReadoutSchedule};
use fibar::{Engine, ScaleMode};
use log::info;

use crate::common::{write_failed, FilterArgs, InputArgs};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for frame_NNNNNN.pgm files (created if missing)
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    /// Read-out rate in frames per second
    #[arg(long, default_value_t = 40.0, conflicts_with = "times")]
    fps: f64,
    /// Explicit read-out times in microseconds, comma separated
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<u64>>,
    /// Brightness to gray mapping: robust (1st/99th percentile) or fixed:<a> for [-a, a]
    #[arg(long, default_value = "robust")]
    scale: ScaleMode,
    /// Per-pixel relative thresholds from `fibar calib`
    #[arg(long)]
    threshold_map: Option<PathBuf>,
    /// Per-frame spatial filter diagnostics CSV
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Abort on out-of-bounds events and time regressions instead of skipping them
    #[arg(long)]
    strict: bool,
}

pub fn run(a: Args) -> CmdResult {
    let (geometry, events) = a.input.open()?;
    let params = a.filter.params(geometry)?;
    let schedule = match a.times {
        Some(t) => ReadoutSchedule::Times(t),
        None => ReadoutSchedule::Fps(a.fps),
    };
    schedule.validate().map_err(Failure::usage)?;

    let mut engine = Engine::new(geometry, params).strict(a.strict);
    if let Some(path) = &a.threshold_map {
        let f = File::open(path).map_err(|e| Failure::usage(anyhow!("cannot open {}: {e}", path.display())))?;
        let map = ThresholdMap::read_csv(std::io::BufReader::new(f), geometry)
            .map_err(|e| Failure::from(e).context(format!("reading {}", path.display())))?;
        engine = engine.with_threshold_map(map.correction())?;
    }

    fs::create_dir_all(&a.out).map_err(|e| Failure::usage(anyhow!("cannot create {}: {e}", a.out.display())))?;
    let mut diag = match &a.diagnostics {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::usage(anyhow!("cannot create {}: {e}", p.display())))?;
            Some(DiagnosticsWriter::new(BufWriter::new(f)).map_err(write_failed)?)
        }
        None => None,
    };

    let out = a.out.clone();
    let summary = run_pipeline(&mut engine, events, &schedule, a.scale, |record| {
        save_frame(&out, record.index, &record.frame)?;
        if let Some(d) = diag.as_mut() {
            d.write(&record)?;
        }
        Ok(())
    })?;
    if let Some(d) = diag {
        use std::io::Write;
        d.into_inner().flush().map_err(write_failed)?;
    }
    engine
        .check_invariants()
        .map_err(|e| Failure::runtime(anyhow!("spatial bookkeeping inconsistent: {e}")))?;
    info!(
        "{} events ({} rejected), {} frames written to {}",
        summary.events,
        summary.rejected,
        summary.frames,
        a.out.display()
    );
    if summary.rejected > 0 {
        log::warn!("{} events outside the sensor were skipped", summary.rejected);
    }
    Ok(())
}
