//! Storage channel: interleaving, level shifting, 2D blur, AWGN and BSC.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::plane::{BinaryImage, BipolarImage, Plane, RealPlane};
use crate::rng::SimRng;

/// Blurring mask `h(k, l)` with support inside `{0, 1} x {0, 1}`.
///
/// `coefficients[k][l]` weighs the input pixel `k` rows above and `l` columns
/// to the left of the output pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mask2D {
    coefficients: [[f64; 2]; 2],
}

impl Mask2D {
    pub fn new(coefficients: [[f64; 2]; 2]) -> Result<Self> {
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Domain("mask coefficients must be finite".into()));
        }
        if coefficients.iter().flatten().all(|&c| c == 0.0) {
            return Err(Error::Domain("mask support is empty".into()));
        }
        Ok(Mask2D { coefficients })
    }

    /// The 2x2 averaging mask, `h(k, l) = 1/4`.
    pub fn averaging() -> Self {
        Mask2D {
            coefficients: [[0.25; 2]; 2],
        }
    }

    /// Single-tap mask `h = [1]` (no intersymbol interference).
    pub fn identity() -> Self {
        Mask2D {
            coefficients: [[1.0, 0.0], [0.0, 0.0]],
        }
    }

    #[inline]
    pub fn coeff(&self, k: usize, l: usize) -> f64 {
        self.coefficients[k][l]
    }

    pub fn coefficients(&self) -> [[f64; 2]; 2] {
        self.coefficients
    }

    /// Support set `{(k, l) : h(k, l) != 0}`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut s = Vec::with_capacity(4);
        for k in 0..2 {
            for l in 0..2 {
                if self.coefficients[k][l] != 0.0 {
                    s.push((k, l));
                }
            }
        }
        s
    }

    /// Mask seen when rows and columns are exchanged.
    pub fn transpose(&self) -> Self {
        let c = self.coefficients;
        Mask2D {
            coefficients: [[c[0][0], c[1][0]], [c[0][1], c[1][1]]],
        }
    }

    /// `sum h(k, l)^2`, the output variance for i.i.d. equiprobable bipolar input.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().flatten().map(|c| c * c).sum()
    }
}

impl Default for Mask2D {
    fn default() -> Self {
        Mask2D::averaging()
    }
}

/// Image interleaver: a bijection on row-major pixel indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
    seed: u64,
}

impl Permutation {
    pub fn from_forward(forward: Vec<usize>, seed: u64) -> Result<Self> {
        let mut inverse = vec![usize::MAX; forward.len()];
        for (i, &f) in forward.iter().enumerate() {
            if f >= forward.len() || inverse[f] != usize::MAX {
                return Err(Error::Contract("forward map is not a bijection".into()));
            }
            inverse[f] = i;
        }
        Ok(Permutation {
            forward,
            inverse,
            seed,
        })
    }

    pub fn identity(size: usize) -> Self {
        let forward: Vec<usize> = (0..size).collect();
        Permutation {
            inverse: forward.clone(),
            forward,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Uniformly random permutation of `height * width` indices, deterministic in `seed`.
pub fn make_interleaver(height: usize, width: usize, seed: u64) -> Permutation {
    let mut forward: Vec<usize> = (0..height * width).collect();
    forward.shuffle(&mut SimRng::seed_from_u64(seed));
    let mut inverse = vec![0; forward.len()];
    for (i, &f) in forward.iter().enumerate() {
        inverse[f] = i;
    }
    Permutation {
        forward,
        inverse,
        seed,
    }
}

fn check_perm<T>(plane: &Plane<T>, perm: &Permutation) -> Result<()>
where
    T: Copy,
{
    if plane.len() != perm.len() {
        return Err(Error::Contract(format!(
            "plane has {} pixels but interleaver covers {}",
            plane.len(),
            perm.len()
        )));
    }
    Ok(())
}

/// Output pixel `i` is input pixel `perm(i)`.
pub fn interleave<T: Copy>(plane: &Plane<T>, perm: &Permutation) -> Result<Plane<T>> {
    check_perm(plane, perm)?;
    let src = plane.as_slice();
    let data = perm.forward.iter().map(|&j| src[j]).collect();
    Plane::from_vec(plane.height(), plane.width(), data)
}

/// Inverse of [`interleave`]: output pixel `perm(i)` is input pixel `i`.
pub fn deinterleave<T: Copy>(plane: &Plane<T>, perm: &Permutation) -> Result<Plane<T>> {
    check_perm(plane, perm)?;
    let src = plane.as_slice();
    let data = perm.inverse.iter().map(|&j| src[j]).collect();
    Plane::from_vec(plane.height(), plane.width(), data)
}

/// Maps `0 -> -1`, `1 -> +1`.
pub fn level_shift(image: &BinaryImage) -> BipolarImage {
    image.map(|b| if b == 1 { 1 } else { -1 })
}

/// Maps positive symbols to 1 and the rest to 0.
pub fn level_unshift(image: &BipolarImage) -> BinaryImage {
    image.map(|s| u8::from(s > 0))
}

/// `r(m, n) = sum h(k, l) x(m - k, n - l)` with zero padding outside the image.
pub fn convolve2d<T>(x: &Plane<T>, mask: &Mask2D) -> RealPlane
where
    T: Copy + Into<f64>,
{
    let (h, w) = x.shape();
    let support = mask.support();
    RealPlane::from_fn(h, w, |m, n| {
        support
            .iter()
            .filter(|&&(k, l)| m >= k && n >= l)
            .map(|&(k, l)| mask.coeff(k, l) * x.get(m - k, n - l).into())
            .sum()
    })
}

/// Noise standard deviation giving `snr_db = 10 log10(var[filtered] / sigma^2)`,
/// with the variance measured on this realisation.
pub fn sigma_for_snr(snr_db: f64, filtered: &RealPlane) -> Result<f64> {
    if filtered.is_empty() {
        return Err(Error::Domain("empty plane".into()));
    }
    let var = filtered.variance();
    if !(var > 0.0) {
        return Err(Error::Domain("filtered plane has zero variance".into()));
    }
    if snr_db.is_nan() {
        return Err(Error::Domain("SNR is NaN".into()));
    }
    Ok((var * 10f64.powf(-snr_db / 10.0)).sqrt())
}

pub fn add_awgn<R: Rng + ?Sized>(x: &RealPlane, sigma: f64, rng: &mut R) -> Result<RealPlane> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("noise sigma {sigma} is invalid")));
    }
    Ok(x.map(|v| {
        let z: f64 = rng.sample(StandardNormal);
        v + sigma * z
    }))
}

/// Binary symmetric channel with crossover probability `p`.
pub fn bsc_corrupt<R: Rng + ?Sized>(b: &BinaryImage, p: f64, rng: &mut R) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("crossover probability {p} not in [0, 1]")));
    }
    Ok(b.map(|bit| if rng.gen::<f64>() < p { 1 - bit } else { bit }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_bits(h: usize, w: usize, seed: u64) -> BinaryImage {
        let mut rng = SimRng::seed_from_u64(seed);
        BinaryImage::from_fn(h, w, |_, _| rng.gen_range(0..=1))
    }

    #[test]
    fn interleaver_is_deterministic_bijection() {
        let a = make_interleaver(8, 9, 42);
        assert_eq!(a, make_interleaver(8, 9, 42));
        assert_ne!(a, make_interleaver(8, 9, 43));
        for i in 0..a.len() {
            assert_eq!(a.inverse(a.forward(i)), i);
            assert_eq!(a.forward(a.inverse(i)), i);
        }
        assert!(Permutation::from_forward(vec![0, 0, 1], 0).is_err());
    }

    #[test]
    fn hand_permutation() {
        let plane = RealPlane::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let perm = Permutation::from_forward(vec![3, 2, 1, 0], 0).unwrap();
        let out = interleave(&plane, &perm).unwrap();
        assert_eq!(out.as_slice(), &[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(deinterleave(&out, &perm).unwrap(), plane);
        let id = Permutation::identity(4);
        assert_eq!(interleave(&plane, &id).unwrap(), plane);
        assert!(interleave(&plane, &Permutation::identity(5)).is_err());
    }

    #[test]
    fn interleaving_decorrelates_mrf() {
        use crate::mrf::{generate_mrf, IsingParams};
        let src = generate_mrf(
            64,
            64,
            &IsingParams::equiprobable(-3.0),
            100,
            &mut SimRng::seed_from_u64(1),
        )
        .unwrap();
        let mixed = interleave(&src, &make_interleaver(64, 64, 77)).unwrap();
        let x = level_shift(&mixed).map(f64::from);
        let mut acc = 0.0;
        let mut count = 0.0;
        for m in 0..64 {
            for n in 0..63 {
                acc += x.get(m, n) * x.get(m, n + 1);
                count += 1.0;
            }
        }
        let mean = x.mean();
        let rho = (acc / count - mean * mean) / x.variance();
        assert!(rho.abs() < 0.05, "rho = {rho}");
    }

    #[test]
    fn level_shift_cases() {
        let z = BinaryImage::filled(3, 3, 0);
        assert!(level_shift(&z).as_slice().iter().all(|&s| s == -1));
        let b = BinaryImage::from_bits(2, 2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(level_shift(&b).as_slice(), &[-1, 1, 1, -1]);
        assert_eq!(level_unshift(&level_shift(&b)), b);
    }

    #[test]
    fn convolution_cases() {
        let mask = Mask2D::averaging();
        let ones = BipolarImage::filled(5, 5, 1);
        let r = convolve2d(&ones, &mask);
        assert_eq!(r.get(2, 3), 1.0);
        assert_eq!(r.get(0, 0), 0.25);
        assert_eq!(r.get(0, 3), 0.5);
        let checker = BipolarImage::from_fn(5, 5, |m, n| if (m + n) % 2 == 0 { 1 } else { -1 });
        assert_eq!(convolve2d(&checker, &mask).get(3, 3), 0.0);
        let id = convolve2d(&checker, &Mask2D::identity());
        assert_eq!(id, checker.map(f64::from));
    }

    #[test]
    fn mask_validation_and_transpose() {
        assert!(Mask2D::new([[0.0; 2]; 2]).is_err());
        let m = Mask2D::new([[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.transpose().coefficients(), [[1.0, 3.0], [2.0, 4.0]]);
        assert_eq!(Mask2D::identity().support(), vec![(0, 0)]);
        assert_eq!(Mask2D::averaging().energy(), 0.25);
        // Convolving the transposed image with the transposed mask transposes the output.
        let x = RealPlane::from_fn(4, 6, |a, b| (a * 7 + b * 3) as f64 % 5.0 - 2.0);
        let lhs = convolve2d(&x, &m).transpose();
        let rhs = convolve2d(&x.transpose(), &m.transpose());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn filtered_variance_matches_mask_energy() {
        let mut rng = SimRng::seed_from_u64(8);
        let x = BipolarImage::from_fn(256, 256, |_, _| if rng.gen::<bool>() { 1 } else { -1 });
        let var = convolve2d(&x, &Mask2D::averaging()).variance();
        assert!((var - 0.25).abs() / 0.25 < 0.02, "var = {var}");
    }

    #[test]
    fn sigma_examples() {
        let mut rng = SimRng::seed_from_u64(3);
        let x = BipolarImage::from_fn(128, 128, |_, _| if rng.gen::<bool>() { 1 } else { -1 });
        let r = convolve2d(&x, &Mask2D::averaging());
        let s0 = sigma_for_snr(0.0, &r).unwrap();
        assert!((s0 - 0.5).abs() < 0.01, "{s0}");
        let s10 = sigma_for_snr(10.0, &r).unwrap();
        assert!((s10 - 0.158).abs() < 0.003, "{s10}");
        assert_eq!(sigma_for_snr(f64::INFINITY, &r).unwrap(), 0.0);
        assert!(sigma_for_snr(40.0, &r).unwrap() < sigma_for_snr(30.0, &r).unwrap());
        assert!(sigma_for_snr(0.0, &RealPlane::zeros(4, 4)).is_err());
    }

    #[test]
    fn awgn_statistics() {
        let x = RealPlane::zeros(1000, 1000);
        assert_eq!(add_awgn(&x, 0.0, &mut SimRng::seed_from_u64(1)).unwrap(), x);
        let sigma = 0.7;
        let y = add_awgn(&x, sigma, &mut SimRng::seed_from_u64(2)).unwrap();
        assert!(y.mean().abs() < 4.0 * sigma / 1000.0);
        assert!((y.variance() - sigma * sigma).abs() / (sigma * sigma) < 0.01);
        assert!(add_awgn(&x, -1.0, &mut SimRng::seed_from_u64(2)).is_err());
    }

    #[test]
    fn bsc_cases() {
        let b = random_bits(64, 64, 4);
        let mut rng = SimRng::seed_from_u64(5);
        assert_eq!(bsc_corrupt(&b, 0.0, &mut rng).unwrap(), b);
        assert_eq!(bsc_corrupt(&b, 1.0, &mut rng).unwrap(), b.complement());
        let c = bsc_corrupt(&b, 0.05, &mut rng).unwrap();
        let flips = b.as_slice().iter().zip(c.as_slice()).filter(|(x, y)| x != y).count() as f64;
        let sd = (4096.0f64 * 0.05 * 0.95).sqrt();
        assert!((flips - 204.8).abs() < 5.0 * sd, "{flips}");
        assert!(bsc_corrupt(&b, 1.5, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn interleave_round_trip(seed in any::<u64>(), h in 1usize..12, w in 1usize..12) {
            let perm = make_interleaver(h, w, seed);
            let bits = random_bits(h, w, seed ^ 1);
            prop_assert_eq!(deinterleave(&interleave(&bits, &perm).unwrap(), &perm).unwrap(), bits.clone());
            let llr = bits.map(|b| f64::from(b) * 1.5 - 0.3);
            prop_assert_eq!(interleave(&deinterleave(&llr, &perm).unwrap(), &perm).unwrap(), llr);
        }

        #[test]
        fn convolution_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = SimRng::seed_from_u64(seed);
            let x = RealPlane::from_fn(6, 5, |_, _| rng.gen_range(-2.0..2.0));
            let y = RealPlane::from_fn(6, 5, |_, _| rng.gen_range(-2.0..2.0));
            let mask = Mask2D::new([[rng.gen(), rng.gen()], [rng.gen(), 0.3]]).unwrap();
            let combo = x.zip_map(&y, |p, q| a * p + b * q).unwrap();
            let lhs = convolve2d(&combo, &mask);
            let rhs = convolve2d(&x, &mask).zip_map(&convolve2d(&y, &mask), |p, q| a * p + b * q).unwrap();
            for (l, r) in lhs.as_slice().iter().zip(rhs.as_slice()) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }
    }
}
