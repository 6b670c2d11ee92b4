//! Soft-input/soft-output MRF detector built on annealed stochastic relaxation.
//!
//! Incoming extrinsic LLRs are normalised into a "noisy image" `G` whose two
//! conditional means sit at 0 and 1. Relaxation then searches for the minimum
//! of the posterior energy
//!
//! ```text
//! E_P(F) = H(F; alpha - L_in) + |G - F|^2 / (2 sigma_G^2)
//! ```
//!
//! and the converged estimate is turned back into LLRs from the Gibbs
//! conditionals of each pixel's neighbourhood.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mrf::{flip_delta_at, neighbor_sum_at, neighbor_table, IsingParams};
use crate::plane::{BinaryImage, RealPlane};

/// Lower bound on the noisy-image variance; keeps the data weight finite when
/// every input LLR of a class is identical.
const MIN_SIGMA_G2: f64 = 1e-12;

/// Per-class sample statistics of the input LLRs, split by sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalStats {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub var_plus: f64,
    pub var_minus: f64,
    pub n_plus: usize,
    pub n_minus: usize,
}

/// Logarithmic annealing schedule `T(t) = C / ln(1 + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub c: f64,
    /// Number of relaxation sweeps; 0 returns the thresholded initial estimate.
    pub t_max: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { c: 3.0, t_max: 300 }
    }
}

impl AnnealSchedule {
    pub fn temperature(&self, t: usize) -> Result<f64> {
        anneal_temperature(t, self)
    }

    /// `T(t_max)`, or `T(1)` when no sweeps are run.
    pub fn final_temperature(&self) -> f64 {
        self.c / (1.0 + self.t_max.max(1) as f64).ln()
    }
}

pub fn anneal_temperature(t: usize, schedule: &AnnealSchedule) -> Result<f64> {
    if t < 1 {
        return Err(Error::Domain("annealing time starts at 1".into()));
    }
    if !(schedule.c > 0.0) {
        return Err(Error::Domain(format!("schedule constant {} must be positive", schedule.c)));
    }
    Ok(schedule.c / (1.0 + t as f64).ln())
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Sample mean and population variance of the positive and non-positive LLRs.
///
/// An empty class mirrors the other one (`mu = -mu_other`, same variance).
pub fn conditional_stats(l_in: &RealPlane) -> ConditionalStats {
    let (plus, minus): (Vec<f64>, Vec<f64>) = l_in.as_slice().iter().partition(|&&x| x > 0.0);
    let (mut mu_plus, mut var_plus) = if plus.is_empty() { (0.0, 0.0) } else { mean_var(&plus) };
    let (mut mu_minus, mut var_minus) = if minus.is_empty() { (0.0, 0.0) } else { mean_var(&minus) };
    if plus.is_empty() {
        mu_plus = -mu_minus;
        var_plus = var_minus;
    }
    if minus.is_empty() {
        mu_minus = -mu_plus;
        var_minus = var_plus;
    }
    ConditionalStats {
        mu_plus,
        mu_minus,
        var_plus,
        var_minus,
        n_plus: plus.len(),
        n_minus: minus.len(),
    }
}

/// Maps LLRs onto the noisy image `G = (L - mu_-) / (mu_+ - mu_-)` and returns
/// the pooled conditional variance of `G`.
pub fn scale_to_noisy_image(l_in: &RealPlane, stats: &ConditionalStats) -> Result<(RealPlane, f64)> {
    let spread = stats.mu_plus - stats.mu_minus;
    if !(spread.abs() > 0.0) || !spread.is_finite() {
        return Err(Error::Domain("class means coincide; input carries no information".into()));
    }
    let g = l_in.map(|l| (l - stats.mu_minus) / spread);
    let (np, nm) = (stats.n_plus as f64, stats.n_minus as f64);
    let sigma_g2 =
        (np * stats.var_plus + nm * stats.var_minus) / ((np + nm) * spread * spread);
    Ok((g, sigma_g2.max(MIN_SIGMA_G2)))
}

fn check_sigma(sigma_g2: f64) -> Result<()> {
    if !(sigma_g2 > 0.0) {
        return Err(Error::Domain(format!("sigma_G^2 = {sigma_g2} must be positive")));
    }
    Ok(())
}

/// Posterior energy change when pixel `site` of `estimate` is flipped.
///
/// `alpha_eff` is the site's effective field `alpha - L_in(site)`.
pub fn posterior_flip_delta(
    estimate: &BinaryImage,
    g: &RealPlane,
    site: (usize, usize),
    alpha_eff: f64,
    beta: f64,
    sigma_g2: f64,
) -> Result<f64> {
    check_sigma(sigma_g2)?;
    g.ensure_shape(estimate.shape())?;
    estimate.check_index(site.0, site.1)?;
    let (m, n) = site;
    let f = f64::from(estimate.get(m, n));
    let gv = g.get(m, n);
    let data = ((gv - (1.0 - f)).powi(2) - (gv - f).powi(2)) / (2.0 * sigma_g2);
    Ok(flip_delta_at(estimate, m, n, alpha_eff, beta) + data)
}

/// Initial estimate: `[G > 1/2]`.
pub fn threshold_half(g: &RealPlane) -> BinaryImage {
    g.map(|x| u8::from(x > 0.5))
}

/// Annealed Metropolis search for the posterior-energy minimum.
///
/// Each sweep visits `M * N` sites drawn with replacement; a visited site
/// proposes 0 or 1 with equal probability and a differing proposal is accepted
/// with probability `min(1, exp(-dE / T(t + 1)))`.
pub fn stochastic_relaxation<R: Rng + ?Sized>(
    g: &RealPlane,
    sigma_g2: f64,
    l_in: &RealPlane,
    params: &IsingParams,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<BinaryImage> {
    check_sigma(sigma_g2)?;
    l_in.ensure_shape(g.shape())?;
    if !g.all_finite() || !l_in.all_finite() {
        return Err(Error::Contract("relaxation inputs must be finite".into()));
    }
    let (h, w) = g.shape();
    let total = h * w;
    let data_weight = 1.0 / (2.0 * sigma_g2);
    // Flipping f changes the energy by (1 - 2f) * (field + beta * v).
    let field: Vec<f64> = g
        .as_slice()
        .iter()
        .zip(l_in.as_slice())
        .map(|(&gv, &l)| params.alpha - l + data_weight * (1.0 - 2.0 * gv))
        .collect();

    let mut estimate = threshold_half(g);
    let table = neighbor_table(h, w);
    let bits = estimate.as_mut_slice();
    for t in 0..schedule.t_max {
        let temp = anneal_temperature(t + 1, schedule)?;
        for _ in 0..total {
            let idx = rng.gen_range(0..total);
            let proposal = u8::from(rng.gen::<bool>());
            let f = bits[idx];
            if proposal == f {
                continue;
            }
            let v: u8 = table[idx].iter().map(|&j| bits[j]).sum();
            let delta = (1.0 - 2.0 * f64::from(f)) * (field[idx] + params.beta * f64::from(v));
            if delta < 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                bits[idx] = proposal;
            }
        }
    }
    Ok(estimate)
}

/// Extrinsic output `L_out(m, n) = -(alpha + beta * v(m, n)) / T_out`.
pub fn mrf_soft_output(
    estimate: &BinaryImage,
    l_in: &RealPlane,
    params: &IsingParams,
    t_out: f64,
) -> Result<RealPlane> {
    if !(t_out > 0.0) {
        return Err(Error::Domain(format!("output temperature {t_out} must be positive")));
    }
    l_in.ensure_shape(estimate.shape())?;
    let (h, w) = estimate.shape();
    Ok(RealPlane::from_fn(h, w, |m, n| {
        let v = f64::from(neighbor_sum_at(estimate, m, n));
        -(params.alpha + params.beta * v) / t_out
    }))
}

/// Everything one MRF-detector activation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfOutput {
    pub estimate: BinaryImage,
    pub extrinsic: RealPlane,
    pub stats: ConditionalStats,
    pub noisy_image: RealPlane,
    pub sigma_g2: f64,
}

/// Full SISO MRF detector: stats, noisy image, relaxation, soft output.
pub fn run_mrf_detector<R: Rng + ?Sized>(
    l_in: &RealPlane,
    params: &IsingParams,
    schedule: &AnnealSchedule,
    t_out: f64,
    rng: &mut R,
) -> Result<MrfOutput> {
    let stats = conditional_stats(l_in);
    let (g, sigma_g2) = scale_to_noisy_image(l_in, &stats)?;
    let estimate = stochastic_relaxation(&g, sigma_g2, l_in, params, schedule, rng)?;
    let extrinsic = mrf_soft_output(&estimate, l_in, params, t_out)?;
    Ok(MrfOutput {
        estimate,
        extrinsic,
        stats,
        noisy_image: g,
        sigma_g2,
    })
}
