use std::path::PathBuf;

use clap::Args as ClapArgs;
use fibar::calib::{estimate_thresholds, histogram, EventCounts, Which, DEFAULT_EXCLUDE_QUANTILE};
use log::info;

use crate::common::{output, parse_pair, write_failed, InputArgs};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    input: InputArgs,
    /// Threshold map CSV (x,y,c_prime,c_on_prime,c_off_prime,n_on,n_off,excluded)
    #[arg(long, short)]
    out: PathBuf,
    /// Fraction of lowest- and highest-count pixels to exclude
    #[arg(long, default_value_t = DEFAULT_EXCLUDE_QUANTILE)]
    exclude_quantile: f64,
    /// Histogram CSV of the estimated thresholds
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Which estimate to histogram: c_prime, c_on_prime or c_off_prime
    #[arg(long, default_value = "c_prime")]
    which: Which,
    /// Number of histogram bins
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    bins: u32,
    /// Histogram range as lo,hi (data range if omitted)
    #[arg(long, value_parser = parse_pair::<f64>)]
    range: Option<(f64, f64)>,
}

pub fn run(a: Args) -> CmdResult {
    let (geometry, events) = a.input.open()?;
    let mut counts = EventCounts::new(geometry);
    for e in events {
        counts.add(&e?);
    }
    let map = estimate_thresholds(&counts, a.exclude_quantile)?;
    let mut out = output(Some(&a.out))?;
    map.write_csv(&mut out).map_err(write_failed)?;
    info!(
        "{} of {} pixels included, mean count {:.3}, harmonic mean of c' {:.9}",
        map.included().count(),
        geometry.n_pix(),
        *map.n_bar_tot.numer() as f64 / *map.n_bar_tot.denom() as f64,
        map.harmonic_mean()
    );
    if let Some(path) = &a.histogram {
        let h = histogram(&map, a.which, a.bins as usize, a.range).map_err(Failure::from)?;
        let mut out = output(Some(path))?;
        h.write_csv(&mut out).map_err(write_failed)?;
    }
    Ok(())
}
