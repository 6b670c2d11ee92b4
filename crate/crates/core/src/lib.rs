//! Iterative detection of binary Markov random field images on
//! two-dimensional intersymbol-interference channels.
//!
//! The transmit chain is MRF source, pixel interleaver, `0/1 -> -1/+1`
//! level shift, 2x2 blur and additive white Gaussian noise. The receiver
//! alternates between a row/column BCJR detector for the blur
//! ([`isi`]) and a stochastic-relaxation MAP detector for the image prior
//! ([`mrf_detector`]), exchanging extrinsic log-likelihood ratios through
//! the interleaver ([`turbo`]).
//!
//! LLRs are `ln P(bit = 1) - ln P(bit = 0)` throughout.

pub mod channel;
pub mod error;
pub mod harness;
pub mod isi;
pub mod mrf;
pub mod mrf_detector;
pub mod plane;
pub mod rng;
pub mod turbo;

pub use error::{Error, Result};
pub use plane::{BinaryImage, BipolarImage, Plane, RealPlane};
