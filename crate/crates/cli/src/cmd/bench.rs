use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args as ClapArgs;
use fibar::bench::{bench_stage, BenchReport, Stage};
use fibar::event_io::{write_stream, EventFormat};
use log::warn;

use crate::common::{output, write_failed, FilterArgs, InputArgs};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    input: InputArgs,
    /// Stage to measure: decode, temporal, tracking, blur, nsf (decode + temporal), full or all
    #[arg(long, default_value = "all")]
    stage: String,
    /// Runs per measurement; the median is reported
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    #[command(flatten)]
    filter: FilterArgs,
    /// Also write the reports as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn run(a: Args) -> CmdResult {
    let stages: Vec<Stage> = if a.stage == "all" {
        Stage::ALL.to_vec()
    } else {
        vec![a.stage.parse().map_err(Failure::usage)?]
    };
    if a.filter.no_spatial && stages.iter().any(|s| matches!(s, Stage::Tracking | Stage::Blur | Stage::Full)) {
        warn!("--no-spatial is ignored; stage selection decides which filters run");
    }
    // the harness decodes EVF1 from memory, so text input is converted first
    let data = if EventFormat::from_path(&a.input.input) == EventFormat::Csv {
        let (g, events) = a.input.open()?;
        let events: Vec<_> = events.collect::<Result<_, _>>()?;
        let mut buf = Vec::with_capacity(16 + 8 * events.len());
        write_stream(g, events, &mut buf)?;
        buf
    } else {
        std::fs::read(&a.input.input).map_err(|e| Failure::usage(anyhow!("cannot read {}: {e}", a.input.input.display())))?
    };
    let (geometry, _) = fibar::event_io::read_stream(&data[..])?;
    let params = a.filter.params(geometry)?;

    if std::thread::available_parallelism().map_or(true, |n| n.get() < 2) {
        warn!("single-core host: timings may include interference from other processes");
    }
    println!("single worker; stage costs are differences of cumulative runs (decode, +temporal, +tracking, +blur)");
    let mut reports = Vec::new();
    for stage in stages {
        let r = bench_stage(&data, &params, stage, a.repeat as usize)?;
        println!("{r}");
        reports.push(r);
    }
    if let Some(path) = &a.csv {
        let out = output(Some(path))?;
        BenchReport::write_csv(&reports, out).map_err(write_failed)?;
    }
    Ok(())
}
