use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::anyhow;
use clap::{Args as ClapArgs, ValueEnum};
use fibar::event_io::write_event_file;
use fibar::synth::{generate, IdealSensorConfig, SceneKind, SceneSignal};
use fibar::SensorGeometry;
use log::info;

use crate::common::{output, write_failed};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scene {
    Triangle,
    Edge,
    Sinusoid,
}

impl FromStr for Scene {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Scene as ValueEnum>::from_str(s, false)
    }
}

/// Scene and sensor settings. Each one may also come from `--config`;
/// flags given on the command line win.
#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Output event file; `.csv` writes text, anything else EVF1
    #[arg(long, short)]
    out: PathBuf,
    /// Flat `key = value` file using the long flag names as keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the ground-truth thresholds as CSV (x,y,c_on,c_off)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Scene kind [default: triangle]
    #[arg(long)]
    scene: Option<Scene>,
    /// Sensor width in pixels [default: 64]
    #[arg(long)]
    width: Option<u32>,
    /// Sensor height in pixels [default: 48]
    #[arg(long)]
    height: Option<u32>,
    /// Triangle peak-to-peak, sinusoid amplitude or edge contrast, in log intensity [default: 1.0]
    #[arg(long)]
    amplitude: Option<f64>,
    /// Triangle period in seconds [default: 1.0]
    #[arg(long)]
    period: Option<f64>,
    /// Pattern speed in pixels per second [default: 20]
    #[arg(long)]
    speed: Option<f64>,
    /// Sinusoid wavelength and edge pattern period in pixels [default: 32]
    #[arg(long)]
    wavelength: Option<f64>,
    /// Direction of motion in radians [default: 0]
    #[arg(long)]
    angle: Option<f64>,
    /// Width of the edge ramps in pixels [default: 2]
    #[arg(long)]
    edge_width: Option<f64>,
    /// Duration in seconds [default: 1.0]
    #[arg(long)]
    duration: Option<f64>,
    /// Scene sample rate in Hz [default: 1000]
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Mean ON threshold [default: 0.1]
    #[arg(long)]
    c_on: Option<f64>,
    /// Mean OFF threshold [default: 0.1]
    #[arg(long)]
    c_off: Option<f64>,
    /// Lognormal spread of per-pixel thresholds [default: 0]
    #[arg(long)]
    sigma: Option<f64>,
    /// Spread of per-pixel ON/OFF imbalance, c_on = c e^eps, c_off = c e^-eps [default: 0]
    #[arg(long)]
    imbalance: Option<f64>,
    /// Refractory period in microseconds [default: 0]
    #[arg(long)]
    refractory: Option<u64>,
    /// Seed for the threshold maps [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

const KEYS: &[&str] = &[
    "scene", "width", "height", "amplitude", "period", "speed", "wavelength", "angle", "edge-width", "duration",
    "sample-rate", "c-on", "c-off", "sigma", "imbalance", "refractory", "seed",
];

fn read_config(path: &Path) -> Result<HashMap<String, String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(anyhow!("cannot read {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(anyhow!("{}:{}: expected key = value", path.display(), k + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Failure::usage(anyhow!("{}:{}: unknown key {key:?}", path.display(), k + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

struct Settings {
    config: HashMap<String, String>,
}

impl Settings {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Failure::usage(anyhow!("config value {s:?} for {key} is invalid"))),
            None => Ok(default),
        }
    }
}

pub fn run(a: Args) -> CmdResult {
    let s = Settings {
        config: match &a.config {
            Some(p) => read_config(p)?,
            None => HashMap::new(),
        },
    };
    let geometry = SensorGeometry::new(s.get(a.width, "width", 64)?, s.get(a.height, "height", 48)?).map_err(Failure::usage)?;
    let amplitude = s.get(a.amplitude, "amplitude", 1.0)?;
    let speed = s.get(a.speed, "speed", 20.0)?;
    let wavelength = s.get(a.wavelength, "wavelength", 32.0)?;
    let angle = s.get(a.angle, "angle", 0.0)?;
    let kind = match s.get(a.scene, "scene", Scene::Triangle)? {
        Scene::Triangle => SceneKind::TriangleGlobal {
            amplitude,
            period_s: s.get(a.period, "period", 1.0)?,
        },
        Scene::Edge => SceneKind::MovingEdge {
            contrast: amplitude,
            speed,
            edge_width: s.get(a.edge_width, "edge-width", 2.0)?,
            period_px: wavelength,
            angle,
        },
        Scene::Sinusoid => SceneKind::TranslatingSinusoid { amplitude, wavelength_px: wavelength, speed, angle },
    };
    let scene = SceneSignal {
        kind,
        duration_s: s.get(a.duration, "duration", 1.0)?,
        sample_rate_hz: s.get(a.sample_rate, "sample-rate", 1000.0)?,
    };
    let c_on = s.get(a.c_on, "c-on", 0.1)?;
    let c_off = s.get(a.c_off, "c-off", 0.1)?;
    let sigma = s.get(a.sigma, "sigma", 0.0)?;
    let imbalance = s.get(a.imbalance, "imbalance", 0.0)?;
    let seed = s.get(a.seed, "seed", 0)?;
    let sensor = match (sigma > 0.0, imbalance > 0.0) {
        (true, true) => return Err(Failure::usage(anyhow!("--sigma and --imbalance cannot be combined"))),
        (true, false) => IdealSensorConfig::lognormal(geometry, c_on, c_off, sigma, seed),
        (false, true) => {
            if c_on != c_off {
                return Err(Failure::usage(anyhow!("--imbalance needs --c-on equal to --c-off")));
            }
            IdealSensorConfig::anticorrelated(geometry, c_on, imbalance, seed)
        }
        (false, false) => {
            let mut u = IdealSensorConfig::uniform(geometry, c_on, c_off);
            u.seed = seed;
            Ok(u)
        }
    }
    .map_err(Failure::usage)?
    .with_refractory(s.get(a.refractory, "refractory", 0)?);

    let events = generate(&scene, &sensor).map_err(Failure::usage)?;
    let n = write_event_file(&a.out, geometry, events).map_err(|e| Failure::from(e).context(format!("writing {}", a.out.display())))?;
    info!("{n} events written to {}", a.out.display());

    if let Some(path) = &a.truth {
        let mut out = output(Some(path))?;
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "x,y,c_on,c_off")?;
            for i in 0..geometry.n_pix() {
                let (x, y) = geometry.coords(i);
                writeln!(out, "{x},{y},{},{}", sensor.c_on[i], sensor.c_off[i])?;
            }
            out.flush()
        };
        write().map_err(write_failed)?;
    }
    Ok(())
}
