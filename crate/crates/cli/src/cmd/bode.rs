use std::io::Write;
use std::path::PathBuf;

use clap::Args as ClapArgs;
use fibar::bode::bode_table;
use fibar::params::{compute_params, default_fill_ratio, DEFAULT_T_CUT};
use fibar::SensorGeometry;

use crate::common::{output, write_failed};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Cutoff period in events (must exceed 4)
    #[arg(long, default_value_t = DEFAULT_T_CUT)]
    tcut: f64,
    /// Number of log-spaced frequencies between 1e-4 pi and pi
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..))]
    points: u32,
    /// Output CSV (stdout if omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn run(a: Args) -> CmdResult {
    // geometry does not affect the temporal coefficients
    let g = SensorGeometry::new(2, 2).expect("2x2 sensor");
    let params = compute_params(a.tcut, default_fill_ratio(), g).map_err(Failure::usage)?;
    let mut out = output(a.out.as_deref())?;
    let rows = bode_table(&params, a.points as usize);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "omega,gain_alpha,gain_beta,gain_total")?;
        for r in &rows {
            writeln!(out, "{:.9e},{:.9e},{:.9e},{:.9e}", r.omega, r.alpha, r.beta, r.total)?;
        }
        out.flush()
    };
    write().map_err(write_failed)
}
