//! Seeded Gaussian draws. Every consumer uses its own ChaCha stream so that
//! adding a draw in one place never shifts another's numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::field::{RealField, Shape};

pub(crate) const STREAM_INITIAL: u64 = 1;
pub(crate) const STREAM_INITIAL_ALT: u64 = 2;
pub(crate) const STREAM_PRIOR: u64 = 3;
pub(crate) const STREAM_NOISE: u64 = 4;
pub(crate) const STREAM_LAYOUT: u64 = 5;
pub(crate) const STREAM_TEXTURE: u64 = 6;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Field of independent standard normal values.
pub fn gaussian_field(shape: Shape, seed: u64, stream: u64) -> RealField {
    let mut rng = stream_rng(seed, stream);
    let data = (0..shape.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    RealField::new(shape, data).expect("normal draws are finite")
}

/// White noise for general use (e.g. test fixtures and metric ladders).
pub fn white_noise(shape: Shape, seed: u64) -> RealField {
    gaussian_field(shape, seed, STREAM_NOISE)
}
