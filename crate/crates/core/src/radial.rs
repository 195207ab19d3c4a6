use crate::error::{Error, Result};

/// Euclidean distance of every centered bin from the zero-frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMap {
    height: usize,
    width: usize,
    distances: Vec<f64>,
    d_max: f64,
}

pub fn radial_distance_map(height: usize, width: usize) -> Result<RadialMap> {
    RadialMap::new(height, width)
}

impl RadialMap {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::InvalidDimension { height, width });
        }
        let (cu, cv) = ((height / 2) as i64, (width / 2) as i64);
        let mut distances = Vec::with_capacity(height * width);
        for u in 0..height as i64 {
            for v in 0..width as i64 {
                // squared radius is an exact integer, so equal radii give equal bits
                distances.push((((u - cu).pow(2) + (v - cv).pow(2)) as f64).sqrt());
            }
        }
        let d_max = distances.iter().copied().fold(0.0, f64::max);
        Ok(Self { height, width, distances, d_max })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.distances[u * self.width + v]
    }

    /// Row-major distances, one per bin.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Per-bin 0/1 mask of `d < fraction * d_max`.
    pub fn low_mask(&self, fraction: f64) -> Vec<bool> {
        let cut = fraction * self.d_max;
        self.distances.iter().map(|&d| d < cut).collect()
    }
}
