//! Channelled real-valued 2D grids.

use std::fmt;

use crate::error::{Error, Result};

/// Channels, rows and columns of a field or spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn new(channels: usize, height: usize, width: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidInput("channel count must be at least 1".into()));
        }
        if height < 2 || width < 2 {
            return Err(Error::InvalidDimension { height, width });
        }
        Ok(Self { channels, height, width })
    }

    /// Bins in one channel plane.
    pub fn plane(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.channels * self.plane()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn ensure_eq(&self, other: &Shape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.to_string(),
                got: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

/// A latent grid stored channel-major, then row-major. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    shape: Shape,
    data: Vec<f64>,
}

impl RealField {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "{} values supplied for shape {shape}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at flat index {pos}")));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::filled(shape, 0.0)
    }

    /// # Panics
    /// If `value` is not finite.
    pub fn filled(shape: Shape, value: f64) -> Self {
        assert!(value.is_finite(), "fill value must be finite");
        Self { shape, data: vec![value; shape.len()] }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..shape.channels {
            for r in 0..shape.height {
                for col in 0..shape.width {
                    data.push(f(c, r, col));
                }
            }
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.shape.plane();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, row: usize, col: usize) -> f64 {
        self.data[(c * self.shape.height + row) * self.shape.width + col]
    }

    /// `a * self + b * other`, elementwise.
    pub fn lin_comb(&self, a: f64, other: &RealField, b: f64) -> Result<RealField> {
        self.shape.ensure_eq(&other.shape)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        RealField::new(self.shape, data)
    }

    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.shape.ensure_eq(&other.shape)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + y).collect();
        RealField::new(self.shape, data)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.shape.ensure_eq(&other.shape)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect();
        RealField::new(self.shape, data)
    }

    pub fn scale(&self, k: f64) -> Result<RealField> {
        RealField::new(self.shape, self.data.iter().map(|x| k * x).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<RealField> {
        RealField::new(self.shape, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn rms(&self) -> f64 {
        (self.sum_squares() / self.data.len() as f64).sqrt()
    }

    pub fn max_abs_diff(&self, other: &RealField) -> Result<f64> {
        self.shape.ensure_eq(&other.shape)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    /// Largest minus smallest value.
    pub fn peak_to_peak(&self) -> f64 {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    }
}
