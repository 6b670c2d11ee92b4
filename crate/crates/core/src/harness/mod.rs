//! Monte-Carlo BER experiments, PBM image I/O, CSV output and scenario files.
//!
//! Trials are identified by `(snr index, trial index)`. Every random quantity
//! of a trial is drawn from a stream derived from the master seed and that
//! pair, so a trial's outcome does not depend on which worker ran it. Trials
//! run in batches on a thread pool and are merged in trial order; the point
//! stops at the first trial whose cumulative error count reaches the minimum
//! number of error events, so results are identical for any worker count.
//!
//! The source image of trial `j` depends only on `j`, so all SNR points of a
//! sweep see the same images.

mod config;
mod csv;
mod pbm;

pub use config::{parse_config, Scenario, SourceKind};
pub use csv::{append_csv, write_csv, CSV_HEADER};
pub use pbm::{load_pbm, parse_pbm, save_pbm, write_pbm, PbmFormat};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{
    add_awgn, bsc_corrupt, convolve2d, interleave, level_shift, make_interleaver, sigma_for_snr,
};
use crate::error::{Error, Result};
use crate::isi::SisoConfig;
use crate::mrf::generate_mrf;
use crate::mrf_detector::stochastic_relaxation;
use crate::plane::{BinaryImage, RealPlane};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::turbo::{detect, detect_isi_only, gg_alone, SystemConfig};

/// Hamming distance between two equally sized images.
pub fn count_bit_errors(a: &BinaryImage, b: &BinaryImage) -> Result<usize> {
    b.ensure_shape(a.shape())?;
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .filter(|(x, y)| x != y)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Interleaved ISI channel, ISI and MRF detectors exchanging extrinsic LLRs.
    Concatenated,
    /// Interleaved ISI channel, ISI detector only.
    IsiOnly,
    /// Non-interleaved ISI channel, stochastic relaxation on the raw samples.
    GgAlone,
    /// MRF through a BSC and AWGN without ISI, restored by stochastic relaxation.
    MrfBscAwgn,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Concatenated => "concatenated",
            Mode::IsiOnly => "isi-only",
            Mode::GgAlone => "gg-alone",
            Mode::MrfBscAwgn => "mrf-bsc-awgn",
        }
    }

    /// Number of per-iteration error counts a trial reports.
    fn reported_iterations(self, outer: usize) -> usize {
        match self {
            Mode::Concatenated | Mode::IsiOnly => outer,
            Mode::GgAlone | Mode::MrfBscAwgn => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concatenated" => Ok(Mode::Concatenated),
            "isi-only" => Ok(Mode::IsiOnly),
            "gg-alone" => Ok(Mode::GgAlone),
            "mrf-bsc-awgn" => Ok(Mode::MrfBscAwgn),
            _ => Err(Error::Config(format!(
                "unknown mode '{s}' (expected concatenated, isi-only, gg-alone or mrf-bsc-awgn)"
            ))),
        }
    }
}

/// Result of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub mode: Mode,
    pub beta_true: Option<f64>,
    pub beta_assumed: f64,
    pub p0: Option<f64>,
    pub trials: usize,
    pub bits_simulated: u64,
    /// Errors after the last iteration.
    pub bit_errors: u64,
    pub ber: f64,
    pub per_iteration_errors: Vec<u64>,
    pub per_iteration_ber: Vec<f64>,
    pub wall_time: Duration,
}

/// Per-iteration error counts of one trial.
type TrialOutcome = Vec<u64>;

fn draw_source(s: &Scenario, image: Option<&BinaryImage>, trial: u64) -> Result<BinaryImage> {
    let mut rng = stream_rng(s.seed, Stream::Source, &[trial]);
    match &s.source {
        SourceKind::Pbm(_) => Ok(image.expect("image loaded").clone()),
        SourceKind::GeneratedMrf => generate_mrf(s.height, s.width, &s.true_params()?, s.mrf_sweeps, &mut rng),
        SourceKind::Iid => {
            let p1 = 1.0 - s.p0;
            Ok(BinaryImage::from_fn(s.height, s.width, |_, _| {
                u8::from(rng.gen::<f64>() < p1)
            }))
        }
    }
}

fn system_config(s: &Scenario, sigma_w: f64, interleaver_seed: u64, relax_seed: u64) -> Result<SystemConfig> {
    let mut siso = SisoConfig::new(sigma_w, s.isi_p0.unwrap_or(s.p0_assumed));
    siso.weight = s.weight;
    siso.inner_iterations = s.inner_iterations;
    siso.mask = s.mask;
    let mut cfg = SystemConfig::new(siso, s.assumed_params()?, interleaver_seed, relax_seed);
    cfg.outer_iterations = s.outer_iterations;
    cfg.inner_isi_iterations = s.inner_iterations;
    cfg.schedule = s.schedule;
    cfg.t_out = s.t_out;
    Ok(cfg)
}

/// Receiver noise variance of the scaled image for a BSC(p) followed by AWGN.
///
/// The BSC flip reliability `ln((1 - p) / p)` is converted into the variance of
/// a Gaussian with the same log-likelihood ratio between levels 0 and 1.
pub fn bsc_awgn_variance(sigma_w: f64, p: f64) -> f64 {
    let base = sigma_w * sigma_w;
    if p <= 0.0 {
        base
    } else if p >= 0.5 {
        f64::INFINITY
    } else {
        base + 1.0 / (2.0 * ((1.0 - p) / p).ln())
    }
}

/// Estimate and per-iteration error counts of one simulated transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub estimate: BinaryImage,
    pub per_iteration_errors: Vec<u64>,
}

fn simulate(s: &Scenario, truth: &BinaryImage, snr_index: u64, snr_db: f64, trial: u64) -> Result<TrialResult> {
    let (h, w) = truth.shape();
    let relax_seed = derive_seed(s.seed, Stream::Relaxation, &[snr_index, trial]);
    let mut noise = stream_rng(s.seed, Stream::Noise, &[snr_index, trial]);
    let single = |estimate: BinaryImage| -> Result<TrialResult> {
        let e = count_bit_errors(truth, &estimate)? as u64;
        Ok(TrialResult {
            estimate,
            per_iteration_errors: vec![e],
        })
    };

    match s.mode {
        Mode::Concatenated | Mode::IsiOnly => {
            let perm_seed = derive_seed(s.seed, Stream::Interleaver, &[trial]);
            let perm = make_interleaver(h, w, perm_seed);
            let filtered = convolve2d(&level_shift(&interleave(truth, &perm)?), &s.mask);
            let sigma = sigma_for_snr(snr_db, &filtered)?;
            let received = add_awgn(&filtered, sigma, &mut noise)?;
            let cfg = system_config(s, sigma, perm_seed, relax_seed)?;
            let mut trace = if s.mode == Mode::Concatenated {
                detect(&received, &cfg, Some(truth))?
            } else {
                detect_isi_only(&received, &cfg, Some(truth))?
            };
            let per_iteration_errors = trace
                .bit_errors()
                .into_iter()
                .map(|e| e.expect("truth supplied") as u64)
                .collect();
            let last = trace.iterations.pop().expect("at least one iteration");
            Ok(TrialResult {
                estimate: last.estimate,
                per_iteration_errors,
            })
        }
        Mode::GgAlone => {
            let filtered = convolve2d(&level_shift(truth), &s.mask);
            let sigma = sigma_for_snr(snr_db, &filtered)?;
            let received = add_awgn(&filtered, sigma, &mut noise)?;
            let cfg = system_config(s, sigma, 0, relax_seed)?;
            single(gg_alone(&received, &cfg)?)
        }
        Mode::MrfBscAwgn => {
            let mut bsc = stream_rng(s.seed, Stream::Bsc, &[snr_index, trial]);
            let flipped = bsc_corrupt(truth, s.bsc_p, &mut bsc)?;
            let clean: RealPlane = truth.map(f64::from);
            let sigma = sigma_for_snr(snr_db, &clean)?;
            let g = add_awgn(&flipped.map(f64::from), sigma, &mut noise)?;
            let sigma_g2 = bsc_awgn_variance(sigma, s.bsc_p).max(1e-12);
            let zero = RealPlane::zeros(h, w);
            let mut rng = stream_rng(s.seed, Stream::Relaxation, &[snr_index, trial]);
            single(stochastic_relaxation(&g, sigma_g2, &zero, &s.assumed_params()?, &s.schedule, &mut rng)?)
        }
    }
}

fn run_trial(
    s: &Scenario,
    image: Option<&BinaryImage>,
    snr_index: u64,
    snr_db: f64,
    trial: u64,
) -> Result<TrialOutcome> {
    let truth = draw_source(s, image, trial)?;
    Ok(simulate(s, &truth, snr_index, snr_db, trial)?.per_iteration_errors)
}

/// Sends `image` once through the scenario's channel at `snr_db` and detects it.
pub fn detect_image(s: &Scenario, image: &BinaryImage, snr_db: f64) -> Result<TrialResult> {
    let mut single = s.clone();
    single.snr_db = vec![snr_db];
    single.validate()?;
    if image.height() < 2 || image.width() < 2 {
        return Err(Error::Domain("image must be at least 2x2".into()));
    }
    simulate(&single, image, 0, snr_db, 0)
}

fn run_point(
    s: &Scenario,
    image: Option<&BinaryImage>,
    pool: &rayon::ThreadPool,
    snr_index: usize,
    snr_db: f64,
) -> Result<BerRecord> {
    let started = Instant::now();
    let iters = s.mode.reported_iterations(s.outer_iterations);
    let batch = (s.workers.max(1) * 2) as u64;
    let mut totals = vec![0u64; iters];
    let mut done = 0u64;
    let mut stop = false;

    while !stop && done < s.trials as u64 {
        let end = (done + batch).min(s.trials as u64);
        let outcomes: Vec<Result<TrialOutcome>> = pool.install(|| {
            (done..end)
                .into_par_iter()
                .map(|j| run_trial(s, image, snr_index as u64, snr_db, j))
                .collect()
        });
        for outcome in outcomes {
            let errs = outcome?;
            debug_assert_eq!(errs.len(), iters);
            for (t, e) in totals.iter_mut().zip(&errs) {
                *t += e;
            }
            done += 1;
            if let Some(min) = s.min_errors {
                if totals[iters - 1] >= min {
                    stop = true;
                    break;
                }
            }
        }
    }

    let bits = done * s.pixels(image) as u64;
    let per_iteration_ber: Vec<f64> = totals.iter().map(|&e| e as f64 / bits as f64).collect();
    let (true_beta, true_p0) = match s.source {
        SourceKind::GeneratedMrf => (Some(s.beta_true), Some(s.p0)),
        SourceKind::Iid => (None, Some(s.p0)),
        SourceKind::Pbm(_) => (None, None),
    };
    Ok(BerRecord {
        snr_db,
        mode: s.mode,
        beta_true: true_beta,
        beta_assumed: s.beta_assumed,
        p0: true_p0,
        trials: done as usize,
        bits_simulated: bits,
        bit_errors: totals[iters - 1],
        ber: per_iteration_ber[iters - 1],
        per_iteration_errors: totals,
        per_iteration_ber,
        wall_time: started.elapsed(),
    })
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn load_source(s: &Scenario) -> Result<Option<BinaryImage>> {
    match &s.source {
        SourceKind::Pbm(path) => load_pbm(path).map(Some),
        _ => Ok(None),
    }
}

/// Runs every SNR point of the scenario and returns one record per point.
pub fn run_ber_sweep(s: &Scenario) -> Result<Vec<BerRecord>> {
    s.validate()?;
    let image = load_source(s)?;
    if let Some(img) = &image {
        if img.height() < 2 || img.width() < 2 {
            return Err(Error::Domain("source image must be at least 2x2".into()));
        }
    }
    let pool = build_pool(s.workers)?;
    s.snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| run_point(s, image.as_ref(), &pool, i, snr))
        .collect()
}

/// BSC + AWGN restoration experiment; the scenario mode must be `mrf-bsc-awgn`.
pub fn run_bsc_awgn(s: &Scenario) -> Result<Vec<BerRecord>> {
    if s.mode != Mode::MrfBscAwgn {
        return Err(Error::Config(format!(
            "BSC experiment needs mode mrf-bsc-awgn, got {}",
            s.mode
        )));
    }
    run_ber_sweep(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> Scenario {
        Scenario {
            mode,
            height: 16,
            width: 16,
            snr_db: vec![4.0, 8.0],
            trials: 3,
            min_errors: None,
            outer_iterations: 2,
            schedule: crate::mrf_detector::AnnealSchedule { c: 3.0, t_max: 20 },
            mrf_sweeps: 20,
            ..Scenario::default()
        }
    }

    #[test]
    fn bit_error_examples() {
        let a = BinaryImage::from_bits(2, 2, vec![1, 0, 0, 1]).unwrap();
        let b = BinaryImage::from_bits(2, 2, vec![1, 1, 0, 0]).unwrap();
        assert_eq!(count_bit_errors(&a, &b).unwrap(), 2);
        assert_eq!(count_bit_errors(&a, &a).unwrap(), 0);
        assert_eq!(count_bit_errors(&a, &a.complement()).unwrap(), 4);
        let c = BinaryImage::filled(2, 3, 0);
        assert!(count_bit_errors(&a, &c).is_err());
    }

    #[test]
    fn records_are_consistent() {
        for mode in [Mode::Concatenated, Mode::IsiOnly, Mode::GgAlone, Mode::MrfBscAwgn] {
            let recs = run_ber_sweep(&small(mode)).unwrap();
            assert_eq!(recs.len(), 2);
            for r in &recs {
                assert_eq!(r.trials, 3);
                assert_eq!(r.bits_simulated, 3 * 256);
                assert_eq!(r.ber, r.bit_errors as f64 / r.bits_simulated as f64);
                assert_eq!(r.per_iteration_ber.len(), mode.reported_iterations(2));
                assert_eq!(*r.per_iteration_errors.last().unwrap(), r.bit_errors);
            }
        }
    }

    #[test]
    fn huge_snr_single_trial() {
        let mut s = small(Mode::Concatenated);
        s.trials = 1;
        s.snr_db = vec![200.0];
        let r = &run_ber_sweep(&s).unwrap()[0];
        assert_eq!(r.bit_errors, 0);
        assert_eq!(r.ber, 0.0);
        assert_eq!(r.bits_simulated, 256);
    }

    #[test]
    fn early_stop_is_independent_of_workers() {
        let mut s = small(Mode::IsiOnly);
        s.snr_db = vec![0.0];
        s.trials = 20;
        s.min_errors = Some(30);
        let mut runs = Vec::new();
        for workers in [1, 3, 4] {
            s.workers = workers;
            let r = run_ber_sweep(&s).unwrap().remove(0);
            runs.push((r.trials, r.per_iteration_errors));
        }
        assert!(runs[0].0 < 20, "should stop early: {runs:?}");
        assert!(runs.iter().all(|r| *r == runs[0]));
        let last = runs[0].1.last().copied().unwrap();
        assert!(last >= 30);
    }

    #[test]
    fn sweep_is_reproducible() {
        let s = small(Mode::Concatenated);
        let a = run_ber_sweep(&s).unwrap();
        let b = run_ber_sweep(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.per_iteration_errors, y.per_iteration_errors);
        }
    }

    #[test]
    fn bsc_variance_cases() {
        assert_eq!(bsc_awgn_variance(0.3, 0.0), 0.09);
        assert!(bsc_awgn_variance(0.3, 0.5).is_infinite());
        let v = bsc_awgn_variance(0.0, 0.05);
        assert!((v - 1.0 / (2.0 * 19f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn bsc_without_flips_recovers_at_high_snr() {
        let mut s = small(Mode::MrfBscAwgn);
        s.bsc_p = 0.0;
        s.snr_db = vec![30.0];
        s.schedule.t_max = 50;
        let r = &run_bsc_awgn(&s).unwrap()[0];
        assert_eq!(r.bit_errors, 0);
    }

    #[test]
    fn detect_image_matches_sweep_trial() {
        let s = small(Mode::Concatenated);
        let truth = draw_source(&s, None, 0).unwrap();
        let r = detect_image(&s, &truth, 8.0).unwrap();
        assert_eq!(r.per_iteration_errors.len(), 2);
        assert_eq!(
            count_bit_errors(&truth, &r.estimate).unwrap() as u64,
            *r.per_iteration_errors.last().unwrap()
        );
        assert_eq!(r, detect_image(&s, &truth, 8.0).unwrap());
    }

    #[test]
    fn bsc_requires_matching_mode() {
        assert!(run_bsc_awgn(&small(Mode::IsiOnly)).is_err());
    }

    #[test]
    fn missing_pbm_is_an_error() {
        let mut s = small(Mode::IsiOnly);
        s.source = SourceKind::Pbm("/nonexistent/image.pbm".into());
        assert!(run_ber_sweep(&s).is_err());
    }

    #[test]
    fn invalid_grid_is_rejected() {
        let mut s = small(Mode::IsiOnly);
        s.snr_db.clear();
        assert!(run_ber_sweep(&s).is_err());
        let mut s = small(Mode::IsiOnly);
        s.trials = 0;
        assert!(run_ber_sweep(&s).is_err());
        let mut s = small(Mode::IsiOnly);
        s.snr_db = vec![f64::NAN];
        assert!(run_ber_sweep(&s).is_err());
    }
}
