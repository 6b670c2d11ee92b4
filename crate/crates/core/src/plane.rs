//! Row-major 2D planes used for images, received signals and LLR fields.

use crate::error::{Error, Result};

/// An `height x width` array stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

/// Binary image with pixels in `{0, 1}`.
pub type BinaryImage = Plane<u8>;
/// Level-shifted image with pixels in `{-1, +1}`.
pub type BipolarImage = Plane<i8>;
/// Real-valued plane: received samples, noisy images and LLRs.
pub type RealPlane = Plane<f64>;

impl<T: Copy> Plane<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Plane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::Contract(format!(
                "buffer of {} elements cannot form a {height}x{width} plane",
                data.len()
            )));
        }
        Ok(Plane {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for m in 0..height {
            for n in 0..width {
                data.push(f(m, n));
            }
        }
        Plane {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> T {
        self.data[m * self.width + n]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, value: T) {
        self.data[m * self.width + n] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, m: usize) -> &[T] {
        &self.data[m * self.width..(m + 1) * self.width]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Plane<U> {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn zip_map<U: Copy, V: Copy>(
        &self,
        other: &Plane<U>,
        mut f: impl FnMut(T, U) -> V,
    ) -> Result<Plane<V>> {
        self.ensure_shape(other.shape())?;
        Ok(Plane {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        Plane::from_fn(self.width, self.height, |m, n| self.get(n, m))
    }

    pub fn ensure_shape(&self, expected: (usize, usize)) -> Result<()> {
        if self.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: self.shape(),
            });
        }
        Ok(())
    }

    pub fn check_index(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.height || n >= self.width {
            return Err(Error::Index {
                row: m,
                col: n,
                height: self.height,
                width: self.width,
            });
        }
        Ok(())
    }
}

impl BinaryImage {
    /// Builds a binary image, rejecting any value other than 0 or 1.
    pub fn from_bits(height: usize, width: usize, bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("pixel value {bad} is not binary")));
        }
        Plane::from_vec(height, width, bits)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        self.map(|b| 1 - b)
    }
}

impl RealPlane {
    pub fn zeros(height: usize, width: usize) -> Self {
        Plane::filled(height, width, 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population variance over all entries.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / self.data.len() as f64
    }

    /// Hard decision: 1 where the value is strictly positive.
    pub fn hard_decision(&self) -> BinaryImage {
        self.map(|x| u8::from(x > 0.0))
    }
}
