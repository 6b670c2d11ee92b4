//! Iterative row-column soft-decision-feedback ISI detector.
//!
//! Each line SISO runs BCJR over an 8-state trellis spanning three lines at
//! once. For the row pass on row `m`, the state at column `n` holds the pixels
//! of column `n - 1` in rows `m, m+1, m+2` and the input holds the same rows at
//! column `n`, so the next state is always the current input. The branch
//! likelihood is the product of three Gaussian terms, one per received sample
//! `r(m, n)`, `r(m+1, n)`, `r(m+2, n)`. The first of these also overlaps row
//! `m - 1`, which has already been decided; its two pixels enter through their
//! LLRs (soft decision feedback) by marginalising the likelihood over their
//! values.
//!
//! Only row `m` is decided per trellis; rows past the bottom edge are the
//! channel's zero padding and take bipolar value 0 with certainty. Column
//! passes run the same machinery on the transposed geometry.
//!
//! LLRs are `ln(Pr{+1} / Pr{-1})`, i.e. `ln(Pr{bit = 1} / Pr{bit = 0})`.

use crate::channel::Mask2D;
use crate::error::{Error, Result};
use crate::plane::RealPlane;

/// Input LLRs are clamped to this magnitude before they are exponentiated.
pub const LLR_CLAMP: f64 = 50.0;

pub const STATES: usize = 8;
pub const BRANCHES: usize = STATES * STATES;

/// Configuration of the line SISOs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoConfig {
    /// Attenuation applied to LLRs exchanged between row and column SISOs.
    pub weight: f64,
    /// Channel noise standard deviation (known to the receiver).
    pub sigma_w: f64,
    pub p0: f64,
    pub p1: f64,
    /// Row+column iterations performed by [`run_ircsdfa`].
    pub inner_iterations: usize,
    pub mask: Mask2D,
}

impl SisoConfig {
    /// Averaging mask, `w = 0.5`, one inner iteration.
    pub fn new(sigma_w: f64, p0: f64) -> Self {
        SisoConfig {
            weight: 0.5,
            sigma_w,
            p0,
            p1: 1.0 - p0,
            inner_iterations: 1,
            mask: Mask2D::averaging(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(Error::Domain(format!("weight {} not in (0, 1]", self.weight)));
        }
        if !(self.sigma_w > 0.0) || !self.sigma_w.is_finite() {
            return Err(Error::Domain(format!("sigma_w {} must be positive", self.sigma_w)));
        }
        if !(self.p0 > 0.0 && self.p0 < 1.0) || (self.p0 + self.p1 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "priors ({}, {}) do not form a distribution",
                self.p0, self.p1
            )));
        }
        if self.inner_iterations == 0 {
            return Err(Error::Domain("at least one inner iteration is required".into()));
        }
        Ok(())
    }
}

/// Which way a line SISO scans the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Row,
    Column,
}

/// Information about the previously processed line.
#[derive(Debug, Clone, Copy)]
pub enum Feedback<'a> {
    /// No previous line: the channel's zero padding.
    Padding,
    /// LLRs of the previous line.
    Soft(&'a [f64]),
    /// Exactly known bipolar values of the previous line.
    Known(&'a [i8]),
}

/// Distribution of one feedback pixel over bipolar values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedbackPixel {
    /// Fixed value (0 for padding, or +-1 when known).
    Known(f64),
    /// Soft value with the given LLR.
    Soft(f64),
}

impl FeedbackPixel {
    /// `(value, ln probability)` pairs.
    fn support(self) -> ([(f64, f64); 2], usize) {
        match self {
            FeedbackPixel::Known(v) => ([(v, 0.0), (0.0, f64::NEG_INFINITY)], 1),
            FeedbackPixel::Soft(llr) => {
                let l = clamp_llr(llr);
                ([(1.0, log_sigmoid(l)), (-1.0, log_sigmoid(-l))], 2)
            }
        }
    }
}

#[inline]
fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// `ln(1 / (1 + e^{-x}))` without overflow.
#[inline]
pub(crate) fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Feedback pixels `(x(m-1, n), x(m-1, n-1))` entering inner product 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackPair {
    pub above: FeedbackPixel,
    pub above_left: FeedbackPixel,
}

/// Log of the modified channel likelihood `p'(r | state, input, feedback)`,
/// up to the Gaussian normalising constant.
///
/// `r[j]` is `None` when line `m + j` lies past the image edge. `state` and
/// `input` hold bipolar values of rows `m..m+3` at columns `n - 1` and `n`
/// (0 for padding).
pub fn log_branch_metric(
    r: &[Option<f64>; 3],
    state: [f64; 3],
    input: [f64; 3],
    feedback: &FeedbackPair,
    mask: &Mask2D,
    sigma_w: f64,
) -> Result<f64> {
    if !(sigma_w > 0.0) {
        return Err(Error::Domain(format!("sigma_w {sigma_w} must be positive")));
    }
    let inv = 1.0 / (2.0 * sigma_w * sigma_w);
    let h = |k, l| mask.coeff(k, l);
    let mut total = 0.0;
    if let Some(r0) = r[0] {
        let base = h(0, 0) * input[0] + h(0, 1) * state[0];
        let (above, na) = feedback.above.support();
        let (left, nl) = feedback.above_left.support();
        let mut acc = f64::NEG_INFINITY;
        for &(a, lpa) in &above[..na] {
            for &(b, lpb) in &left[..nl] {
                let ip = base + h(1, 0) * a + h(1, 1) * b;
                acc = log_add(acc, lpa + lpb - (r0 - ip).powi(2) * inv);
            }
        }
        total += acc;
    }
    for j in 1..3 {
        if let Some(rj) = r[j] {
            let ip = h(0, 0) * input[j] + h(0, 1) * state[j] + h(1, 0) * input[j - 1] + h(1, 1) * state[j - 1];
            total -= (rj - ip).powi(2) * inv;
        }
    }
    Ok(total)
}

/// Linear-domain [`log_branch_metric`].
pub fn branch_metric(
    r: &[Option<f64>; 3],
    state: [f64; 3],
    input: [f64; 3],
    feedback: &FeedbackPair,
    mask: &Mask2D,
    sigma_w: f64,
) -> Result<f64> {
    log_branch_metric(r, state, input, feedback, mask, sigma_w).map(f64::exp)
}

/// Log of the modified transition weight
/// `gamma = p' * P(u = i | s, s') * P(s | s') * P(u = i | L~)`.
///
/// `consistent` is the trellis indicator `P(u = i | s, s')`; the a priori
/// factor multiplies `p0`/`p1` over the three input pixels and the extrinsic
/// factor multiplies `sigmoid(i_j * L~_j)`.
pub fn log_modified_gamma(
    log_p_prime: f64,
    consistent: bool,
    input_bits: [bool; 3],
    extrinsic: [f64; 3],
    p0: f64,
    p1: f64,
) -> f64 {
    if !consistent {
        return f64::NEG_INFINITY;
    }
    let mut g = log_p_prime;
    for j in 0..3 {
        let l = clamp_llr(extrinsic[j]);
        g += if input_bits[j] {
            p1.ln() + log_sigmoid(l)
        } else {
            p0.ln() + log_sigmoid(-l)
        };
    }
    g
}

pub fn modified_gamma(
    p_prime: f64,
    consistent: bool,
    input_bits: [bool; 3],
    extrinsic: [f64; 3],
    p0: f64,
    p1: f64,
) -> f64 {
    log_modified_gamma(p_prime.ln(), consistent, input_bits, extrinsic, p0, p1).exp()
}

/// Read-only view of a plane as a sequence of lines in either direction.
#[derive(Clone, Copy)]
struct Lines<'a> {
    plane: &'a RealPlane,
    dir: Direction,
}

impl<'a> Lines<'a> {
    fn count(&self) -> usize {
        match self.dir {
            Direction::Row => self.plane.height(),
            Direction::Column => self.plane.width(),
        }
    }

    fn len(&self) -> usize {
        match self.dir {
            Direction::Row => self.plane.width(),
            Direction::Column => self.plane.height(),
        }
    }

    #[inline]
    fn get(&self, line: usize, pos: usize) -> f64 {
        match self.dir {
            Direction::Row => self.plane.get(line, pos),
            Direction::Column => self.plane.get(pos, line),
        }
    }
}

#[inline]
fn bit(index: usize, j: usize) -> usize {
    (index >> j) & 1
}

/// Per-section log transition weights, `[s * 8 + i]`.
fn line_log_gammas(
    received: Lines<'_>,
    priors: Lines<'_>,
    line: usize,
    feedback: Feedback<'_>,
    mask: &Mask2D,
    cfg: &SisoConfig,
) -> Vec<[f64; BRANCHES]> {
    let lines = received.count();
    let len = received.len();
    let valid = [true, line + 1 < lines, line + 2 < lines];
    let inv = 1.0 / (2.0 * cfg.sigma_w * cfg.sigma_w);
    let (ln_p0, ln_p1) = (cfg.p0.ln(), cfg.p1.ln());
    let h00 = mask.coeff(0, 0);
    let h01 = mask.coeff(0, 1);
    let h10 = mask.coeff(1, 0);
    let h11 = mask.coeff(1, 1);

    let feedback_at = |pos: isize| -> FeedbackPixel {
        if pos < 0 {
            return FeedbackPixel::Known(0.0);
        }
        let p = pos as usize;
        match feedback {
            Feedback::Padding => FeedbackPixel::Known(0.0),
            Feedback::Soft(llrs) => FeedbackPixel::Soft(llrs[p]),
            Feedback::Known(vals) => FeedbackPixel::Known(f64::from(vals[p])),
        }
    };

    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        // Bipolar value of bit `b` on trellis row `j` at column n (input) or n-1 (state).
        let in_val = |j: usize, b: usize| -> f64 {
            if !valid[j] {
                0.0
            } else if b == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let st_val = |j: usize, b: usize| -> f64 { if n == 0 { 0.0 } else { in_val(j, b) } };

        let mut log_prior = [[0.0f64; 2]; 3];
        for j in 0..3 {
            if valid[j] {
                let l = clamp_llr(priors.get(line + j, n));
                log_prior[j] = [ln_p0 + log_sigmoid(-l), ln_p1 + log_sigmoid(l)];
            } else {
                log_prior[j] = [0.0, f64::NEG_INFINITY];
            }
        }

        // Inner product 1: r(m, n) with feedback from line m-1.
        let mut t1 = [[0.0f64; 2]; 2];
        {
            let r0 = received.get(line, n);
            let (above, na) = feedback_at(n as isize).support();
            let (left, nl) = feedback_at(n as isize - 1).support();
            for s0 in 0..2 {
                for i0 in 0..2 {
                    let base = h00 * in_val(0, i0) + h01 * st_val(0, s0);
                    let mut acc = f64::NEG_INFINITY;
                    for &(a, lpa) in &above[..na] {
                        for &(b, lpb) in &left[..nl] {
                            let ip = base + h10 * a + h11 * b;
                            acc = log_add(acc, lpa + lpb - (r0 - ip).powi(2) * inv);
                        }
                    }
                    t1[s0][i0] = acc;
                }
            }
        }
        // Inner products 2 and 3: r(m+j, n), j = 1, 2, entirely from state and input.
        let mut t23 = [[[[0.0f64; 2]; 2]; 2]; 2];
        let mut tables = [t23; 2];
        for j in 1..3 {
            if !valid[j] {
                continue;
            }
            let rj = received.get(line + j, n);
            for sa in 0..2 {
                for sb in 0..2 {
                    for ia in 0..2 {
                        for ib in 0..2 {
                            // a = row j-1, b = row j
                            let ip = h00 * in_val(j, ib)
                                + h01 * st_val(j, sb)
                                + h10 * in_val(j - 1, ia)
                                + h11 * st_val(j - 1, sa);
                            t23[sa][sb][ia][ib] = -(rj - ip).powi(2) * inv;
                        }
                    }
                }
            }
            tables[j - 1] = t23;
        }

        let mut g = [0.0f64; BRANCHES];
        for s in 0..STATES {
            let (s0, s1, s2) = (bit(s, 0), bit(s, 1), bit(s, 2));
            for i in 0..STATES {
                let (i0, i1, i2) = (bit(i, 0), bit(i, 1), bit(i, 2));
                g[s * STATES + i] = t1[s0][i0]
                    + tables[0][s0][s1][i0][i1]
                    + tables[1][s1][s2][i1][i2]
                    + log_prior[0][i0]
                    + log_prior[1][i1]
                    + log_prior[2][i2];
            }
        }
        out.push(g);
    }
    out
}

/// Forward/backward state distributions and the decided-row LLRs of one trellis.
#[derive(Debug, Clone)]
pub(crate) struct BcjrResult {
    pub llr: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub alphas: Vec<[f64; STATES]>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub betas: Vec<[f64; STATES]>,
}

/// Probability-domain BCJR with per-step renormalisation. Returns `None` if
/// the scaled recursions underflow, in which case the caller falls back to
/// [`bcjr_log`].
fn bcjr_prob(log_gammas: &[[f64; BRANCHES]]) -> Option<BcjrResult> {
    let len = log_gammas.len();
    let mut gammas = Vec::with_capacity(len);
    for lg in log_gammas {
        let max = lg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return None;
        }
        let mut g = [0.0f64; BRANCHES];
        for (o, &l) in g.iter_mut().zip(lg) {
            *o = (l - max).exp();
        }
        gammas.push(g);
    }

    let mut alphas = Vec::with_capacity(len + 1);
    let mut alpha = [0.0f64; STATES];
    alpha[0] = 1.0;
    alphas.push(alpha);
    for g in &gammas {
        let mut next = [0.0f64; STATES];
        for s in 0..STATES {
            let a = alpha[s];
            if a == 0.0 {
                continue;
            }
            for i in 0..STATES {
                next[i] += a * g[s * STATES + i];
            }
        }
        let sum: f64 = next.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return None;
        }
        next.iter_mut().for_each(|x| *x /= sum);
        alpha = next;
        alphas.push(alpha);
    }

    let mut betas = vec![[0.0f64; STATES]; len + 1];
    betas[len] = [1.0 / STATES as f64; STATES];
    for n in (0..len).rev() {
        let g = &gammas[n];
        let nb = betas[n + 1];
        let mut cur = [0.0f64; STATES];
        for s in 0..STATES {
            let mut acc = 0.0;
            for i in 0..STATES {
                acc += g[s * STATES + i] * nb[i];
            }
            cur[s] = acc;
        }
        let sum: f64 = cur.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return None;
        }
        cur.iter_mut().for_each(|x| *x /= sum);
        betas[n] = cur;
    }

    let mut llr = Vec::with_capacity(len);
    for n in 0..len {
        let (a, g, b) = (&alphas[n], &gammas[n], &betas[n + 1]);
        let mut p = [0.0f64; 2];
        for s in 0..STATES {
            if a[s] == 0.0 {
                continue;
            }
            for i in 0..STATES {
                p[i & 1] += a[s] * g[s * STATES + i] * b[i];
            }
        }
        if !(p[0] > 0.0 && p[1] > 0.0) {
            return None;
        }
        llr.push((p[1] / p[0]).ln());
    }
    Some(BcjrResult { llr, alphas, betas })
}

/// Log-domain BCJR (exact log-sum-exp), used when the scaled recursions underflow.
fn bcjr_log(log_gammas: &[[f64; BRANCHES]]) -> BcjrResult {
    let len = log_gammas.len();
    let lse = |xs: &[f64]| -> f64 { xs.iter().copied().fold(f64::NEG_INFINITY, log_add) };
    let normalise = |v: &mut [f64; STATES]| {
        let z = lse(v);
        v.iter_mut().for_each(|x| *x -= z);
    };

    let mut la = vec![[f64::NEG_INFINITY; STATES]; len + 1];
    la[0][0] = 0.0;
    for n in 0..len {
        let mut next = [f64::NEG_INFINITY; STATES];
        for s in 0..STATES {
            if la[n][s] == f64::NEG_INFINITY {
                continue;
            }
            for i in 0..STATES {
                next[i] = log_add(next[i], la[n][s] + log_gammas[n][s * STATES + i]);
            }
        }
        normalise(&mut next);
        la[n + 1] = next;
    }
    let mut lb = vec![[0.0f64; STATES]; len + 1];
    lb[len] = [-(STATES as f64).ln(); STATES];
    for n in (0..len).rev() {
        let mut cur = [f64::NEG_INFINITY; STATES];
        for s in 0..STATES {
            for i in 0..STATES {
                cur[s] = log_add(cur[s], log_gammas[n][s * STATES + i] + lb[n + 1][i]);
            }
        }
        normalise(&mut cur);
        lb[n] = cur;
    }
    let llr = (0..len)
        .map(|n| {
            let mut p = [f64::NEG_INFINITY; 2];
            for s in 0..STATES {
                for i in 0..STATES {
                    p[i & 1] = log_add(p[i & 1], la[n][s] + log_gammas[n][s * STATES + i] + lb[n + 1][i]);
                }
            }
            p[1] - p[0]
        })
        .collect();
    let exp_all = |v: Vec<[f64; STATES]>| v.into_iter().map(|a| a.map(f64::exp)).collect();
    BcjrResult {
        llr,
        alphas: exp_all(la),
        betas: exp_all(lb),
    }
}

pub(crate) fn bcjr(log_gammas: &[[f64; BRANCHES]]) -> BcjrResult {
    bcjr_prob(log_gammas).unwrap_or_else(|| bcjr_log(log_gammas))
}

fn check_inputs(received: &RealPlane, extrinsic: &RealPlane, cfg: &SisoConfig) -> Result<()> {
    cfg.validate()?;
    extrinsic.ensure_shape(received.shape())?;
    if !received.all_finite() || !extrinsic.all_finite() {
        return Err(Error::Contract("received and extrinsic planes must be finite".into()));
    }
    Ok(())
}

fn oriented_mask(mask: &Mask2D, dir: Direction) -> Mask2D {
    match dir {
        Direction::Row => *mask,
        Direction::Column => mask.transpose(),
    }
}

pub(crate) fn line_bcjr(
    received: &RealPlane,
    line: usize,
    dir: Direction,
    prior_llr: &RealPlane,
    feedback: Feedback<'_>,
    cfg: &SisoConfig,
) -> BcjrResult {
    let mask = oriented_mask(&cfg.mask, dir);
    let gammas = line_log_gammas(
        Lines { plane: received, dir },
        Lines { plane: prior_llr, dir },
        line,
        feedback,
        &mask,
        cfg,
    );
    bcjr(&gammas)
}

/// One line SISO: a posteriori LLRs of every pixel on `line`.
///
/// `prior_llr` carries the extrinsic LLRs used as `P(u = i | L~)` for every
/// pixel in the three trellis lines. `feedback` describes line `line - 1` in
/// the scan direction.
pub fn siso_line_pass(
    received: &RealPlane,
    line: usize,
    dir: Direction,
    prior_llr: &RealPlane,
    feedback: Feedback<'_>,
    cfg: &SisoConfig,
) -> Result<Vec<f64>> {
    check_inputs(received, prior_llr, cfg)?;
    let view = Lines { plane: received, dir };
    if line >= view.count() {
        return Err(Error::Contract(format!("line {line} outside image")));
    }
    let fb_len = match feedback {
        Feedback::Padding => None,
        Feedback::Soft(v) => {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Contract("feedback LLRs must be finite".into()));
            }
            Some(v.len())
        }
        Feedback::Known(v) => Some(v.len()),
    };
    if let Some(l) = fb_len {
        if l != view.len() {
            return Err(Error::Contract(format!(
                "feedback has {l} entries, line has {}",
                view.len()
            )));
        }
    }
    Ok(line_bcjr(received, line, dir, prior_llr, feedback, cfg).llr)
}

/// Runs the SISO over every line in order, each line fed back into the next.
fn sweep(received: &RealPlane, priors: &RealPlane, dir: Direction, cfg: &SisoConfig) -> RealPlane {
    let (h, w) = received.shape();
    let mut total = RealPlane::zeros(h, w);
    let lines = Lines { plane: received, dir }.count();
    let mut prev: Vec<f64> = Vec::new();
    for line in 0..lines {
        let feedback = if line == 0 {
            Feedback::Padding
        } else {
            Feedback::Soft(&prev)
        };
        let llr = line_bcjr(received, line, dir, priors, feedback, cfg).llr;
        for (pos, &l) in llr.iter().enumerate() {
            match dir {
                Direction::Row => total.set(line, pos, l),
                Direction::Column => total.set(pos, line, l),
            }
        }
        prev = llr;
    }
    total
}

/// Output of one or more IRCSDFA iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiOutput {
    /// A posteriori LLRs after the last column pass.
    pub total: RealPlane,
    /// `total - extrinsic_in`, for the peer detector.
    pub extrinsic: RealPlane,
}

/// Stateful IRCSDFA: keeps the column SISO's extrinsic output so that
/// successive calls continue the row/column iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Ircsdfa {
    cfg: SisoConfig,
    column_extrinsic: RealPlane,
    iterations: usize,
}

impl Ircsdfa {
    pub fn new(cfg: SisoConfig, height: usize, width: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Ircsdfa {
            cfg,
            column_extrinsic: RealPlane::zeros(height, width),
            iterations: 0,
        })
    }

    pub fn config(&self) -> &SisoConfig {
        &self.cfg
    }

    /// Total row+column iterations run so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Runs `iterations` row+column passes with `extrinsic_in` as the prior from
    /// the peer detector.
    pub fn iterate(
        &mut self,
        received: &RealPlane,
        extrinsic_in: &RealPlane,
        iterations: usize,
    ) -> Result<IsiOutput> {
        check_inputs(received, extrinsic_in, &self.cfg)?;
        self.column_extrinsic.ensure_shape(received.shape())?;
        if iterations == 0 {
            return Err(Error::Domain("at least one iteration is required".into()));
        }
        let w = self.cfg.weight;
        let mut total = RealPlane::zeros(received.height(), received.width());
        for _ in 0..iterations {
            let row_prior = extrinsic_in.zip_map(&self.column_extrinsic, |e, c| e + w * c)?;
            let row_total = sweep(received, &row_prior, Direction::Row, &self.cfg);
            let row_ext = row_total.zip_map(&row_prior, |t, p| t - p)?;

            let col_prior = extrinsic_in.zip_map(&row_ext, |e, r| e + w * r)?;
            total = sweep(received, &col_prior, Direction::Column, &self.cfg);
            self.column_extrinsic = total.zip_map(&col_prior, |t, p| t - p)?;
            self.iterations += 1;
        }
        let extrinsic = total.zip_map(extrinsic_in, |t, e| t - e)?;
        Ok(IsiOutput { total, extrinsic })
    }
}

/// Stateless IRCSDFA run of `cfg.inner_iterations`; returns the extrinsic output.
pub fn run_ircsdfa(received: &RealPlane, extrinsic_in: &RealPlane, cfg: &SisoConfig) -> Result<RealPlane> {
    let mut det = Ircsdfa::new(*cfg, received.height(), received.width())?;
    Ok(det.iterate(received, extrinsic_in, cfg.inner_iterations)?.extrinsic)
}
