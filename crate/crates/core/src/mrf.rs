//! First-order binary Markov random field with Ising energy.
//!
//! The local energy of pixel `(m, n)` holding value `f` is `f * (alpha + beta * v)`
//! where `v` is the number of first-order neighbours equal to one. Neighbourhoods
//! wrap around the image edges (toroidal boundary). The global energy whose
//! single-site conditionals are these local energies counts every neighbour
//! bond once:
//!
//! ```text
//! H(F) = alpha * sum f + beta * sum_{bonds} f_i f_j
//! ```
//!
//! Samples are drawn with pairwise exchange dynamics, which conserve the number
//! of ones and therefore pin the empirical pixel prior exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::plane::BinaryImage;

/// Parameters of the Ising source model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub alpha: f64,
    pub beta: f64,
    pub p0: f64,
    pub p1: f64,
}

impl IsingParams {
    /// Builds the parameter set for pixel prior `p0 = Pr{F = 0}` and interaction
    /// `beta`, with `alpha` from [`alpha_from_priors`].
    pub fn from_priors(p0: f64, beta: f64) -> Result<Self> {
        let alpha = alpha_from_priors(p0, beta)?;
        Ok(IsingParams {
            alpha,
            beta,
            p0,
            p1: 1.0 - p0,
        })
    }

    /// Equiprobable model, `alpha = -2 beta`.
    pub fn equiprobable(beta: f64) -> Self {
        IsingParams {
            alpha: -2.0 * beta,
            beta,
            p0: 0.5,
            p1: 0.5,
        }
    }
}

/// Number of first-order neighbours equal to one, in `0..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NeighborSum(u8);

impl NeighborSum {
    pub fn new(v: u8) -> Result<Self> {
        if v > 4 {
            return Err(Error::Domain(format!("neighbour sum {v} exceeds 4")));
        }
        Ok(NeighborSum(v))
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

/// `alpha = ln(p0 / p1) / 4 - 2 beta`.
pub fn alpha_from_priors(p0: f64, beta: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Domain(format!("prior p0 = {p0} not in (0, 1)")));
    }
    Ok(0.25 * (p0 / (1.0 - p0)).ln() - 2.0 * beta)
}

/// Coordinates of the four toroidal neighbours of `(m, n)`: left, right, up, down.
#[inline]
pub(crate) fn neighbors(height: usize, width: usize, m: usize, n: usize) -> [(usize, usize); 4] {
    [
        (m, (n + width - 1) % width),
        (m, (n + 1) % width),
        ((m + height - 1) % height, n),
        ((m + 1) % height, n),
    ]
}

/// Flat indices of every pixel's four toroidal neighbours.
pub(crate) fn neighbor_table(height: usize, width: usize) -> Vec<[usize; 4]> {
    (0..height * width)
        .map(|i| neighbors(height, width, i / width, i % width).map(|(a, b)| a * width + b))
        .collect()
}

#[inline]
pub(crate) fn neighbor_sum_at(image: &BinaryImage, m: usize, n: usize) -> u8 {
    let (h, w) = image.shape();
    neighbors(h, w, m, n)
        .iter()
        .map(|&(a, b)| image.get(a, b))
        .sum()
}

pub fn neighbor_sum(image: &BinaryImage, m: usize, n: usize) -> Result<NeighborSum> {
    image.check_index(m, n)?;
    Ok(NeighborSum(neighbor_sum_at(image, m, n)))
}

/// Local Ising energy `f * (alpha + beta * v)`.
pub fn ising_energy(f: u8, v: NeighborSum, params: &IsingParams) -> f64 {
    f64::from(f) * (params.alpha + params.beta * v.as_f64())
}

/// Logistic function evaluated without overflow for large `|x|`.
#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gibbs conditional `Pr{f = 1 | v}` at temperature `t`.
pub fn conditional_prob_one(v: NeighborSum, alpha_eff: f64, beta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("temperature {t} must be positive")));
    }
    Ok(logistic(-(alpha_eff + beta * v.as_f64()) / t))
}

/// Change in total energy when the pixel at `site` is flipped.
#[inline]
pub(crate) fn flip_delta_at(image: &BinaryImage, m: usize, n: usize, alpha_eff: f64, beta: f64) -> f64 {
    let f = f64::from(image.get(m, n));
    let v = f64::from(neighbor_sum_at(image, m, n));
    (1.0 - 2.0 * f) * (alpha_eff + beta * v)
}

pub fn flip_energy_delta(
    image: &BinaryImage,
    site: (usize, usize),
    alpha_eff: f64,
    beta: f64,
) -> Result<f64> {
    image.check_index(site.0, site.1)?;
    Ok(flip_delta_at(image, site.0, site.1, alpha_eff, beta))
}

/// Change in total energy when the values at `a` and `b` are exchanged.
///
/// A swap of unequal values is two flips; the second flip sees the first
/// through however many times `a` occurs among `b`'s neighbours (up to twice on
/// two-pixel-wide tori).
pub fn swap_energy_delta(
    image: &BinaryImage,
    a: (usize, usize),
    b: (usize, usize),
    params: &IsingParams,
) -> Result<f64> {
    image.check_index(a.0, a.1)?;
    image.check_index(b.0, b.1)?;
    if a == b {
        return Err(Error::Contract("swap sites must differ".into()));
    }
    Ok(swap_delta_at(image, a, b, params.beta))
}

#[inline]
fn swap_delta_at(image: &BinaryImage, a: (usize, usize), b: (usize, usize), beta: f64) -> f64 {
    let fa = image.get(a.0, a.1);
    let fb = image.get(b.0, b.1);
    if fa == fb {
        return 0.0;
    }
    let (h, w) = image.shape();
    let va = f64::from(neighbor_sum_at(image, a.0, a.1));
    let vb = f64::from(neighbor_sum_at(image, b.0, b.1));
    let mult = neighbors(h, w, b.0, b.1).iter().filter(|&&p| p == a).count() as f64;
    // a: fa -> fb, so b's neighbour sum shifts by mult * (fb - fa).
    let vb_after = vb + mult * (f64::from(fb) - f64::from(fa));
    // alpha terms cancel because one pixel gains a one and the other loses it.
    let da = (1.0 - 2.0 * f64::from(fa)) * beta * va;
    let db = (1.0 - 2.0 * f64::from(fb)) * beta * vb_after;
    da + db
}

/// Fraction of neighbour bonds (toroidal) joining equal pixels.
pub fn neighbor_agreement(image: &BinaryImage) -> f64 {
    let (h, w) = image.shape();
    let mut agree = 0usize;
    for m in 0..h {
        for n in 0..w {
            let f = image.get(m, n);
            agree += usize::from(f == image.get(m, (n + 1) % w));
            agree += usize::from(f == image.get((m + 1) % h, n));
        }
    }
    agree as f64 / (2 * h * w) as f64
}

/// Draws an MRF sample by exchange dynamics at unit temperature.
///
/// Starts from exactly `round(p1 * M * N)` ones at uniformly random positions
/// and performs `sweeps * M * N` Metropolis swap proposals.
pub fn generate_mrf<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    params: &IsingParams,
    sweeps: usize,
    rng: &mut R,
) -> Result<BinaryImage> {
    if height < 2 || width < 2 {
        return Err(Error::Domain(format!(
            "MRF needs at least 2x2 pixels, got {height}x{width}"
        )));
    }
    if sweeps == 0 {
        return Err(Error::Domain("at least one sweep is required".into()));
    }
    let total = height * width;
    let ones = (params.p1 * total as f64).round() as usize;
    let mut bits = vec![0u8; total];
    bits[..ones].iter_mut().for_each(|b| *b = 1);
    rand::seq::SliceRandom::shuffle(bits.as_mut_slice(), rng);
    let mut image = BinaryImage::from_vec(height, width, bits)?;

    for _ in 0..sweeps * total {
        let i = rng.gen_range(0..total);
        let mut j = rng.gen_range(0..total - 1);
        if j >= i {
            j += 1;
        }
        let a = (i / width, i % width);
        let b = (j / width, j % width);
        let fa = image.get(a.0, a.1);
        let fb = image.get(b.0, b.1);
        if fa == fb {
            continue;
        }
        let delta = swap_delta_at(&image, a, b, params.beta);
        if delta < 0.0 || rng.gen::<f64>() < (-delta).exp() {
            image.set(a.0, a.1, fb);
            image.set(b.0, b.1, fa);
        }
    }
    Ok(image)
}
