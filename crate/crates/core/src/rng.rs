//! The one random source used throughout the crate.
//!
//! Streams are produced by ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`),
//! keyed from a `u64` seed through `SeedableRng::seed_from_u64` (PCG32
//! expansion of the seed into the 32-byte key). Normal variates come from
//! `rand_distr::StandardNormal` and are always drawn as `f64` then converted,
//! so `f32` and `f64` runs consume identical streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Scalar;

/// Name recorded in reports and sidecar files.
pub const GENERATOR_NAME: &str = "chacha8/seed_from_u64";

pub type WlraRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> WlraRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<T: Scalar>(rng: &mut WlraRng) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::of(z)
}

pub fn uniform<T: Scalar>(rng: &mut WlraRng, lo: f64, hi: f64) -> T {
    T::of(rng.random_range(lo..hi))
}
