//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by the user
//! seed. Independent consumers get disjoint ChaCha streams: stream id
//! `domain · 2⁴⁰ + index`, where `index` is the trial, restart or sample
//! number. Work split across threads therefore reproduces the sequential
//! results bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    SdpInit = 1,
    Hyperplane = 2,
    Biased = 3,
    Sampling = 4,
    Generator = 5,
    RatioSearch = 6,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 40) + index);
    rng
}

/// Uniform point on the unit sphere in `dim` dimensions.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}
