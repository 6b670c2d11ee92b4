//! Experiment scenarios and the line-oriented `key = value` file format.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the names
//! accepted by [`Scenario::set`]; later assignments override earlier ones.

use std::path::PathBuf;

use super::Mode;
use crate::channel::Mask2D;
use crate::error::{Error, Result};
use crate::mrf::IsingParams;
use crate::mrf_detector::AnnealSchedule;
use crate::plane::BinaryImage;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// Fresh MRF sample per trial.
    GeneratedMrf,
    /// Independent pixels with `P(0) = p0`.
    Iid,
    /// The same bitmap in every trial.
    Pbm(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub source: SourceKind,
    pub height: usize,
    pub width: usize,
    /// MRF generation parameters.
    pub beta_true: f64,
    pub p0: f64,
    /// Receiver-side MRF parameters.
    pub beta_assumed: f64,
    pub p0_assumed: f64,
    /// Pixel priors of the ISI detector; defaults to `p0_assumed`.
    pub isi_p0: Option<f64>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    /// Stop a point once this many errors have been counted.
    pub min_errors: Option<u64>,
    pub mode: Mode,
    pub bsc_p: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub weight: f64,
    pub mask: Mask2D,
    pub schedule: AnnealSchedule,
    pub t_out: Option<f64>,
    /// Exchange sweeps used to generate each MRF source image.
    pub mrf_sweeps: usize,
    pub seed: u64,
    pub workers: usize,
    /// Record wall-clock seconds in CSV output; zero otherwise.
    pub timing: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            source: SourceKind::GeneratedMrf,
            height: 64,
            width: 64,
            beta_true: -3.0,
            p0: 0.5,
            beta_assumed: -3.0,
            p0_assumed: 0.5,
            isi_p0: None,
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            trials: 200,
            min_errors: Some(100),
            mode: Mode::Concatenated,
            bsc_p: 0.0,
            outer_iterations: 5,
            inner_iterations: 1,
            weight: 0.5,
            mask: Mask2D::averaging(),
            schedule: AnnealSchedule::default(),
            t_out: None,
            mrf_sweeps: 200,
            seed: 1,
            workers: 1,
            timing: true,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid value '{value}' for {key}"))),
    }
}

/// Parses `a,b,c` or a range `start:stop:step` (inclusive of `stop`).
pub(crate) fn parse_grid(value: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("invalid SNR grid '{value}'"));
    if value.contains(':') {
        let parts: Vec<f64> = value
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            return Err(bad());
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    value
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_mask(value: &str) -> Result<Mask2D> {
    let c: Vec<f64> = value
        .split(',')
        .map(|p| parse_num("mask", p.trim()))
        .collect::<Result<_>>()?;
    match c[..] {
        [a, b, d, e] => Mask2D::new([[a, b], [d, e]]),
        _ => Err(Error::Config("mask needs four comma-separated coefficients".into())),
    }
}

impl Scenario {
    pub fn true_params(&self) -> Result<IsingParams> {
        IsingParams::from_priors(self.p0, self.beta_true)
    }

    pub fn assumed_params(&self) -> Result<IsingParams> {
        IsingParams::from_priors(self.p0_assumed, self.beta_assumed)
    }

    /// Pixels per trial.
    pub(crate) fn pixels(&self, image: Option<&BinaryImage>) -> usize {
        image.map_or(self.height * self.width, |i| i.len())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "source" => {
                self.source = match value {
                    "mrf" => SourceKind::GeneratedMrf,
                    "iid" => SourceKind::Iid,
                    _ => match value.strip_prefix("pbm:") {
                        Some(path) => SourceKind::Pbm(PathBuf::from(path)),
                        None => {
                            return Err(Error::Config(format!(
                                "unknown source '{value}' (expected mrf, iid or pbm:PATH)"
                            )))
                        }
                    },
                }
            }
            "pbm" => self.source = SourceKind::Pbm(PathBuf::from(value)),
            "size" => {
                let n = parse_num(key, value)?;
                self.height = n;
                self.width = n;
            }
            "height" => self.height = parse_num(key, value)?,
            "width" => self.width = parse_num(key, value)?,
            "beta" => {
                self.beta_true = parse_num(key, value)?;
                self.beta_assumed = self.beta_true;
            }
            "beta_true" => self.beta_true = parse_num(key, value)?,
            "beta_assumed" => self.beta_assumed = parse_num(key, value)?,
            "p0" => {
                self.p0 = parse_num(key, value)?;
                self.p0_assumed = self.p0;
            }
            "p0_assumed" => self.p0_assumed = parse_num(key, value)?,
            "isi_p0" => self.isi_p0 = Some(parse_num(key, value)?),
            "snr" => self.snr_db = parse_grid(value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "min_errors" => {
                let n: u64 = parse_num(key, value)?;
                self.min_errors = (n > 0).then_some(n);
            }
            "mode" => self.mode = value.parse()?,
            "bsc_p" => self.bsc_p = parse_num(key, value)?,
            "outer" => self.outer_iterations = parse_num(key, value)?,
            "inner" => self.inner_iterations = parse_num(key, value)?,
            "weight" => self.weight = parse_num(key, value)?,
            "mask" => self.mask = parse_mask(value)?,
            "c" => self.schedule.c = parse_num(key, value)?,
            "t_max" => self.schedule.t_max = parse_num(key, value)?,
            "t_out" => self.t_out = Some(parse_num(key, value)?),
            "sweeps" => self.mrf_sweeps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.snr_db.is_empty() {
            return bad("SNR grid is empty".into());
        }
        if let Some(x) = self.snr_db.iter().find(|x| !x.is_finite()) {
            return bad(format!("SNR point {x} is not finite"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !matches!(self.source, SourceKind::Pbm(_)) && (self.height < 2 || self.width < 2) {
            return bad(format!("image size {}x{} below 2x2", self.height, self.width));
        }
        if self.outer_iterations == 0 || self.inner_iterations == 0 {
            return bad("iteration counts must be positive".into());
        }
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return bad(format!("weight {} not in (0, 1]", self.weight));
        }
        if !(0.0..=1.0).contains(&self.bsc_p) {
            return bad(format!("bsc_p {} not in [0, 1]", self.bsc_p));
        }
        if self.mrf_sweeps == 0 {
            return bad("sweeps must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if !(self.schedule.c > 0.0) || !self.schedule.c.is_finite() {
            return bad(format!("annealing constant {} must be positive", self.schedule.c));
        }
        if let Some(t) = self.t_out {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("t_out {t} must be positive"));
            }
        }
        if let Some(p) = self.isi_p0 {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("isi_p0 {p} not in (0, 1)"));
            }
        }
        self.true_params()?;
        self.assumed_params()?;
        Ok(())
    }
}

/// Parses a `key = value` file into assignments, with line-numbered errors.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.trim();
        if !line.is_empty() && !line.starts_with('#') {
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    offset,
                    msg: format!("expected key = value, got '{line}'"),
                });
            };
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        offset += raw.len() + 1;
    }
    Ok(out)
}

impl Scenario {
    /// Applies every assignment of a config file on top of `self`.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_config(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }
}
