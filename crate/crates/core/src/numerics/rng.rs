use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trials per Monte Carlo work unit. Each unit draws from its own substream,
/// so results do not depend on how units are spread over threads.
pub const CHUNK_TRIALS: usize = 1 << 16;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for distinct `stream_id` values under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Deterministically derived child stream, used to split work.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(1))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unit-variance circularly-symmetric complex Gaussian draw.
#[inline]
pub(crate) fn draw_cn01<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n` i.i.d. CN(0, 1) samples from the start of `stream`.
pub fn sample_cn01(stream: &RngStream, n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample_cn01: n must be >= 1".into()));
    }
    let mut rng = stream.generator();
    Ok((0..n).map(|_| draw_cn01(&mut rng)).collect())
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// Monte Carlo mean of `f` over `trials` draws.
///
/// Trials are cut into fixed-size chunks, chunk `k` drawing from
/// `stream.substream(k)`. Chunks run on the current rayon pool and their
/// moments are merged in chunk order, so the estimate is bitwise identical
/// for any worker count.
pub fn parallel_mean<F>(stream: &RngStream, trials: usize, f: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if trials == 0 {
        return McEstimate { mean: f64::NAN, std_error: f64::NAN, trials };
    }
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_TRIALS.min(trials - k * CHUNK_TRIALS);
            let mut rng = stream.substream(k as u64).generator();
            let mut m = Moments { n: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..len {
                let x = f(&mut rng);
                m.n += 1.0;
                let delta = x - m.mean;
                m.mean += delta / m.n;
                m.m2 += delta * (x - m.mean);
            }
            m
        })
        .collect();
    let total = parts
        .into_iter()
        .fold(Moments { n: 0.0, mean: 0.0, m2: 0.0 }, Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    McEstimate {
        mean: total.mean,
        std_error: (var / total.n).sqrt(),
        trials,
    }
}
