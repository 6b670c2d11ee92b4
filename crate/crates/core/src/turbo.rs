//! Concatenated ISI/MRF detector with extrinsic LLR exchange.
//!
//! The ISI detector works in channel (interleaved) pixel order and the MRF
//! detector in image order. Each outer iteration:
//!
//! 1. runs the IRCSDFA with the interleaved MRF extrinsic as its prior
//!    (zeros on the first iteration),
//! 2. deinterleaves the ISI extrinsic output into the MRF detector's input,
//! 3. runs the MRF detector, whose relaxation output is the current estimate
//!    and whose extrinsic output feeds the next iteration.
//!
//! The ISI detector keeps its row/column exchange state across outer
//! iterations, so `k` outer iterations with one inner iteration each perform
//! `k` row+column passes in total.

use crate::channel::{deinterleave, interleave, make_interleaver, Permutation};
use crate::error::{Error, Result};
use crate::harness::count_bit_errors;
use crate::isi::{Ircsdfa, SisoConfig};
use crate::mrf::IsingParams;
use crate::mrf_detector::{
    conditional_stats, run_mrf_detector, scale_to_noisy_image, stochastic_relaxation, AnnealSchedule,
};
use crate::plane::{BinaryImage, RealPlane};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub outer_iterations: usize,
    pub inner_isi_iterations: usize,
    pub siso: SisoConfig,
    /// MRF parameters assumed at the receiver.
    pub ising: IsingParams,
    pub schedule: AnnealSchedule,
    /// Temperature for the soft output; defaults to the final annealing temperature.
    pub t_out: Option<f64>,
    pub interleaver_seed: u64,
    /// Seed of the relaxation stream.
    pub seed: u64,
}

impl SystemConfig {
    /// Five outer iterations, one inner ISI iteration each, `C = 3`, 300 sweeps.
    pub fn new(siso: SisoConfig, ising: IsingParams, interleaver_seed: u64, seed: u64) -> Self {
        SystemConfig {
            outer_iterations: 5,
            inner_isi_iterations: 1,
            siso,
            ising,
            schedule: AnnealSchedule::default(),
            t_out: None,
            interleaver_seed,
            seed,
        }
    }

    pub fn output_temperature(&self) -> f64 {
        self.t_out.unwrap_or_else(|| self.schedule.final_temperature())
    }

    fn validate(&self) -> Result<()> {
        if self.outer_iterations == 0 || self.inner_isi_iterations == 0 {
            return Err(Error::Domain("iteration counts must be positive".into()));
        }
        self.siso.validate()
    }
}

/// Diagnostics of one outer iteration. Planes are in image (deinterleaved) order.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Deinterleaved ISI extrinsic output, i.e. the MRF detector's input.
    pub isi_extrinsic: RealPlane,
    /// MRF extrinsic output before interleaving (zeros for ISI-only detection).
    pub mrf_extrinsic: RealPlane,
    pub estimate: BinaryImage,
    pub bit_errors: Option<usize>,
}

impl IterationRecord {
    pub fn ber(&self) -> Option<f64> {
        self.bit_errors
            .map(|e| e as f64 / self.estimate.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionTrace {
    pub iterations: Vec<IterationRecord>,
}

impl DetectionTrace {
    pub fn final_estimate(&self) -> Option<&BinaryImage> {
        self.iterations.last().map(|r| &r.estimate)
    }

    pub fn bit_errors(&self) -> Vec<Option<usize>> {
        self.iterations.iter().map(|r| r.bit_errors).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    Concatenated,
    IsiOnly,
}

/// Resumable concatenated detector.
#[derive(Debug, Clone)]
pub struct TurboDetector {
    received: RealPlane,
    cfg: SystemConfig,
    mode: LoopMode,
    perm: Permutation,
    isi: Ircsdfa,
    /// Interleaved MRF extrinsic fed to the ISI detector next.
    feedback: RealPlane,
    trace: DetectionTrace,
}

impl TurboDetector {
    pub fn new(received: &RealPlane, cfg: &SystemConfig, mode: LoopMode) -> Result<Self> {
        cfg.validate()?;
        if !received.all_finite() {
            return Err(Error::Contract("received plane must be finite".into()));
        }
        let (h, w) = received.shape();
        Ok(TurboDetector {
            received: received.clone(),
            cfg: *cfg,
            mode,
            perm: make_interleaver(h, w, cfg.interleaver_seed),
            isi: Ircsdfa::new(cfg.siso, h, w)?,
            feedback: RealPlane::zeros(h, w),
            trace: DetectionTrace::default(),
        })
    }

    pub fn trace(&self) -> &DetectionTrace {
        &self.trace
    }

    pub fn into_trace(self) -> DetectionTrace {
        self.trace
    }

    /// Runs one outer iteration and appends its record.
    pub fn step(&mut self, truth: Option<&BinaryImage>) -> Result<&IterationRecord> {
        if let Some(t) = truth {
            t.ensure_shape(self.received.shape())?;
        }
        let k = self.trace.iterations.len();
        let isi_out = self
            .isi
            .iterate(&self.received, &self.feedback, self.cfg.inner_isi_iterations)?;
        let l_in = deinterleave(&isi_out.extrinsic, &self.perm)?;

        let (estimate, mrf_extrinsic) = match self.mode {
            LoopMode::Concatenated => {
                let mut rng = stream_rng(self.cfg.seed, Stream::Relaxation, &[k as u64]);
                let out = run_mrf_detector(
                    &l_in,
                    &self.cfg.ising,
                    &self.cfg.schedule,
                    self.cfg.output_temperature(),
                    &mut rng,
                )?;
                (out.estimate, out.extrinsic)
            }
            LoopMode::IsiOnly => {
                let (h, w) = l_in.shape();
                let total = deinterleave(&isi_out.total, &self.perm)?;
                (total.hard_decision(), RealPlane::zeros(h, w))
            }
        };
        self.feedback = interleave(&mrf_extrinsic, &self.perm)?;
        let bit_errors = truth.map(|t| count_bit_errors(&estimate, t)).transpose()?;
        self.trace.iterations.push(IterationRecord {
            isi_extrinsic: l_in,
            mrf_extrinsic,
            estimate,
            bit_errors,
        });
        Ok(self.trace.iterations.last().expect("just pushed"))
    }

    pub fn run(&mut self, iterations: usize, truth: Option<&BinaryImage>) -> Result<()> {
        for _ in 0..iterations {
            self.step(truth)?;
        }
        Ok(())
    }
}

/// Concatenated ISI + MRF detection for `cfg.outer_iterations` iterations.
pub fn detect(received: &RealPlane, cfg: &SystemConfig, truth: Option<&BinaryImage>) -> Result<DetectionTrace> {
    let mut det = TurboDetector::new(received, cfg, LoopMode::Concatenated)?;
    det.run(cfg.outer_iterations, truth)?;
    Ok(det.into_trace())
}

/// Baseline: the same loop with the MRF stage replaced by zero feedback. Hard
/// decisions come from the sign of the ISI detector's a posteriori LLRs.
pub fn detect_isi_only(
    received: &RealPlane,
    cfg: &SystemConfig,
    truth: Option<&BinaryImage>,
) -> Result<DetectionTrace> {
    let mut det = TurboDetector::new(received, cfg, LoopMode::IsiOnly)?;
    det.run(cfg.outer_iterations, truth)?;
    Ok(det.into_trace())
}

/// Plain stochastic relaxation applied directly to a non-interleaved received
/// image, ignoring the blur.
///
/// The received samples are split by sign and rescaled onto `[0, 1]` exactly as
/// the MRF detector does with LLRs, and relaxation runs with no extrinsic input.
pub fn gg_alone(received: &RealPlane, cfg: &SystemConfig) -> Result<BinaryImage> {
    let stats = conditional_stats(received);
    let (g, sigma_g2) = scale_to_noisy_image(received, &stats)?;
    let zero = RealPlane::zeros(received.height(), received.width());
    let mut rng = stream_rng(cfg.seed, Stream::Relaxation, &[0]);
    stochastic_relaxation(&g, sigma_g2, &zero, &cfg.ising, &cfg.schedule, &mut rng)
}
