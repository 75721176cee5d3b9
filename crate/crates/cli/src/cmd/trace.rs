use std::io::Write;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args as ClapArgs;
use fibar::Engine64;

use crate::common::{output, parse_pair, write_failed, FilterArgs, InputArgs};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    input: InputArgs,
    /// Pixel to trace, as x,y
    #[arg(long, value_parser = parse_pair::<u16>)]
    pixel: (u16, u16),
    #[command(flatten)]
    filter: FilterArgs,
    /// True ON threshold of the pixel; with --c-off adds an l_calib column
    #[arg(long, requires = "c_off")]
    c_on: Option<f64>,
    /// True OFF threshold of the pixel
    #[arg(long, requires = "c_on")]
    c_off: Option<f64>,
    /// Output CSV (stdout if omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn run(a: Args) -> CmdResult {
    let (geometry, events) = a.input.open()?;
    let (x, y) = a.pixel;
    if !geometry.contains(x, y) {
        return Err(Failure::usage(anyhow!("pixel ({x}, {y}) outside {geometry} sensor")));
    }
    let calib = match (a.c_on, a.c_off) {
        (Some(on), Some(off)) if on > 0.0 && off > 0.0 => Some((on, off)),
        (Some(_), Some(_)) => return Err(Failure::usage(anyhow!("thresholds must be positive"))),
        _ => None,
    };
    let mut engine = Engine64::new(geometry, a.filter.params(geometry)?);
    let mut out = output(a.out.as_deref())?;
    let mut header = String::from("k,t,p,p_bar,delta,l,l_simple");
    if calib.is_some() {
        header.push_str(",l_calib");
    }
    writeln!(out, "{header}").map_err(write_failed)?;

    let (mut k, mut simple, mut l_calib) = (0u64, 0i64, 0.0f64);
    for e in events {
        let e = e?;
        engine.process(&e)?;
        if (e.x, e.y) != (x, y) {
            continue;
        }
        k += 1;
        let p = e.polarity.sign() as i64;
        simple += p;
        let s = engine.pixel(x, y);
        let mut row = format!("{k},{},{p},{},{},{},{simple}", e.t, s.p_bar, p as f64 - s.p_bar, s.l);
        if let Some((on, off)) = calib {
            l_calib += if p > 0 { on } else { -off };
            row.push_str(&format!(",{l_calib}"));
        }
        writeln!(out, "{row}").map_err(write_failed)?;
    }
    out.flush().map_err(write_failed)
}
