//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use mrfisi::{BinaryImage, RealPlane};

/// 2x2 causal blur with zero padding, written out directly.
pub fn blur(x: &[Vec<f64>], h: [[f64; 2]; 2]) -> Vec<Vec<f64>> {
    let rows = x.len();
    let cols = x[0].len();
    let at = |m: isize, n: isize| -> f64 {
        if m < 0 || n < 0 {
            0.0
        } else {
            x[m as usize][n as usize]
        }
    };
    (0..rows as isize)
        .map(|m| {
            (0..cols as isize)
                .map(|n| {
                    h[0][0] * at(m, n) + h[0][1] * at(m, n - 1) + h[1][0] * at(m - 1, n) + h[1][1] * at(m - 1, n - 1)
                })
                .collect()
        })
        .collect()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Exact a posteriori LLRs of row `line` by enumerating every bipolar image.
///
/// The observation is `received` on rows `line..line + 3` (those inside the
/// image). Row `line - 1`, when it exists, is fixed to `known_above`. Each
/// pixel has prior `P(1) = p1 * s(L) / (p1 * s(L) + p0 * s(-L))` with `L`
/// taken from `prior_llr`.
pub fn enumerate_row_posterior(
    received: &[Vec<f64>],
    line: usize,
    known_above: Option<&[i8]>,
    prior_llr: &[Vec<f64>],
    p0: f64,
    sigma: f64,
    mask: [[f64; 2]; 2],
) -> Vec<f64> {
    let rows = received.len();
    let cols = received[0].len();
    let pixels = rows * cols;
    assert!(pixels <= 20);
    let p1 = 1.0 - p0;
    let obs_rows: Vec<usize> = (line..(line + 3).min(rows)).collect();
    let mut num = vec![Vec::new(); cols];
    let mut den = vec![Vec::new(); cols];

    for code in 0u32..(1 << pixels) {
        let x: Vec<Vec<f64>> = (0..rows)
            .map(|m| {
                (0..cols)
                    .map(|n| if code >> (m * cols + n) & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        if line > 0 {
            let above = known_above.expect("feedback row");
            if (0..cols).any(|n| x[line - 1][n] != f64::from(above[n])) {
                continue;
            }
        }
        let mut logw = 0.0;
        for m in line..rows {
            for n in 0..cols {
                let l = prior_llr[m][n];
                let (a, b) = (p1.ln() - (-l).exp().ln_1p(), p0.ln() - l.exp().ln_1p());
                logw += if x[m][n] > 0.0 { a } else { b };
            }
        }
        let y = blur(&x, mask);
        for &m in &obs_rows {
            for n in 0..cols {
                logw -= (received[m][n] - y[m][n]).powi(2) / (2.0 * sigma * sigma);
            }
        }
        for n in 0..cols {
            if x[line][n] > 0.0 {
                num[n].push(logw);
            } else {
                den[n].push(logw);
            }
        }
    }
    (0..cols).map(|n| log_sum_exp(&num[n]) - log_sum_exp(&den[n])).collect()
}

/// Toroidal prior energy `alpha * sum f + beta * sum_bonds f_i f_j`, each
/// right and down bond counted once.
pub fn prior_energy(f: &BinaryImage, alpha: f64, beta: f64) -> f64 {
    let (h, w) = f.shape();
    let mut e = 0.0;
    for m in 0..h {
        for n in 0..w {
            let v = f64::from(f.get(m, n));
            e += alpha * v;
            e += beta * v * f64::from(f.get(m, (n + 1) % w));
            e += beta * v * f64::from(f.get((m + 1) % h, n));
        }
    }
    e
}

/// Posterior energy of `f` given the noisy image `g`, its variance and
/// extrinsic LLRs `l_in`.
pub fn posterior_energy(
    f: &BinaryImage,
    g: &RealPlane,
    sigma_g2: f64,
    l_in: &RealPlane,
    alpha: f64,
    beta: f64,
) -> f64 {
    let mut e = prior_energy(f, alpha, beta);
    for (i, &b) in f.as_slice().iter().enumerate() {
        let v = f64::from(b);
        e -= l_in.as_slice()[i] * v;
        e += (v - g.as_slice()[i]).powi(2) / (2.0 * sigma_g2);
    }
    e
}

/// Minimum posterior energy over all binary images of the given size.
pub fn exhaustive_minimum(g: &RealPlane, sigma_g2: f64, l_in: &RealPlane, alpha: f64, beta: f64) -> (BinaryImage, f64) {
    let (h, w) = g.shape();
    let pixels = h * w;
    assert!(pixels <= 20);
    let mut best = (BinaryImage::filled(h, w, 0), f64::INFINITY);
    for code in 0u32..(1 << pixels) {
        let bits = (0..pixels).map(|i| (code >> i & 1) as u8).collect();
        let f = BinaryImage::from_bits(h, w, bits).unwrap();
        let e = posterior_energy(&f, g, sigma_g2, l_in, alpha, beta);
        if e < best.1 {
            best = (f, e);
        }
    }
    best
}

/// Exact draw from the toroidal Gibbs distribution `exp(-prior_energy)` by
/// enumerating every configuration.
pub fn sample_gibbs<R: rand::Rng>(h: usize, w: usize, alpha: f64, beta: f64, rng: &mut R) -> BinaryImage {
    let pixels = h * w;
    assert!(pixels <= 20);
    let configs: Vec<BinaryImage> = (0u32..(1 << pixels))
        .map(|code| BinaryImage::from_bits(h, w, (0..pixels).map(|i| (code >> i & 1) as u8).collect()).unwrap())
        .collect();
    let energies: Vec<f64> = configs.iter().map(|f| prior_energy(f, alpha, beta)).collect();
    let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (min - e).exp()).collect();
    let mut u = rng.gen::<f64>() * weights.iter().sum::<f64>();
    for (f, wgt) in configs.iter().zip(&weights) {
        if u < *wgt {
            return f.clone();
        }
        u -= wgt;
    }
    configs.last().unwrap().clone()
}
