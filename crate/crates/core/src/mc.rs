//! Seeded Monte-Carlo plumbing.
//!
//! A run is described by a master seed, a sample count and a shard count.
//! Each shard draws from its own ChaCha stream derived from `(seed, stream
//! label)` with the shard index as the ChaCha stream id, and shard results
//! are merged in shard order. The numbers therefore depend on the shard
//! count but not on how shards are scheduled.

use alloc::vec::Vec;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type McRng = ChaCha8Rng;

/// Fixed stream labels so independent estimators never share random numbers.
pub mod streams {
    pub const HAAR: u64 = 1;
    pub const INTEGRAL: u64 = 2;
    pub const PANEL: u64 = 3;
    pub const ITERATE: u64 = 4;
    pub const ESCAPE: u64 = 5;
    pub const EQUIDIST: u64 = 6;
    pub const MEASURE: u64 = 7;
    pub const AUDIT: u64 = 8;
    pub const BASE_POINTS: u64 = 9;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: u64,
    pub shards: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl McConfig {
    pub fn new(seed: u64, samples: u64) -> Self {
        McConfig { seed, samples, shards: 1 }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    /// A configuration with an independent seed, for nested estimators.
    pub fn derive(&self, label: u64) -> Self {
        McConfig { seed: splitmix64(self.seed ^ splitmix64(label.wrapping_add(0x5151))), ..*self }
    }

    /// Generator for one shard of one stream.
    pub fn rng(&self, stream: u64, shard: u64) -> McRng {
        let mut key = [0u8; 32];
        let mut state = self.seed ^ stream.wrapping_mul(0xa076_1d64_78bd_642f);
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(shard);
        rng
    }

    /// Samples assigned to each shard; earlier shards absorb the remainder.
    pub fn shard_sizes(&self) -> Vec<u64> {
        let k = self.shards.max(1) as u64;
        let base = self.samples / k;
        let extra = self.samples % k;
        (0..k).map(|i| base + u64::from(i < extra)).collect()
    }
}

/// Runs independent shards, possibly in parallel. Implementations must
/// return results in shard order.
pub trait Executor: Sync {
    fn map_shards<T, F>(&self, shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs shards one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_shards<T, F>(&self, shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..shards).map(f).collect()
    }
}

/// Streaming mean/variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Accumulator) -> Accumulator {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Accumulator { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        let std_err = if self.n > 0 { (var.max(0.0) / self.n as f64).sqrt() } else { f64::NAN };
        Estimate { mean: self.mean, std_err, n: self.n }
    }
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, std_err: 0.0, n: 0 }
    }

    /// Multiplies mean and standard error by a known constant.
    pub fn scaled(self, factor: f64) -> Self {
        Estimate { mean: self.mean * factor, std_err: self.std_err * factor.abs(), n: self.n }
    }
}

/// Sharded Monte-Carlo mean of `f`, which draws whatever it needs from the
/// shard's generator and returns one observation.
pub fn mc_mean<E, F>(exec: &E, cfg: &McConfig, stream: u64, f: F) -> Estimate
where
    E: Executor,
    F: Fn(&mut McRng) -> f64 + Sync + Send,
{
    let sizes = cfg.shard_sizes();
    let parts = exec.map_shards(sizes.len(), |shard| {
        let mut rng = cfg.rng(stream, shard as u64);
        let mut acc = Accumulator::default();
        for _ in 0..sizes[shard] {
            acc.push(f(&mut rng));
        }
        acc
    });
    parts.into_iter().fold(Accumulator::default(), Accumulator::merge).estimate()
}

/// Like [`mc_mean`] but each draw yields several observations that are
/// accumulated separately (common random numbers across the outputs).
pub fn mc_mean_multi<E, F>(exec: &E, cfg: &McConfig, stream: u64, width: usize, f: F) -> Vec<Estimate>
where
    E: Executor,
    F: Fn(&mut McRng, &mut [f64]) + Sync + Send,
{
    let sizes = cfg.shard_sizes();
    let parts = exec.map_shards(sizes.len(), |shard| {
        let mut rng = cfg.rng(stream, shard as u64);
        let mut accs = alloc::vec![Accumulator::default(); width];
        let mut buf = alloc::vec![0.0; width];
        for _ in 0..sizes[shard] {
            f(&mut rng, &mut buf);
            for (a, &x) in accs.iter_mut().zip(buf.iter()) {
                a.push(x);
            }
        }
        accs
    });
    let mut total = alloc::vec![Accumulator::default(); width];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t = t.merge(p);
        }
    }
    total.iter().map(Accumulator::estimate).collect()
}

/// Evaluates `f` on `0..n` in contiguous chunks, one chunk per shard, and
/// concatenates the results in index order.
pub fn map_indexed<E, T, F>(exec: &E, n: usize, shards: usize, f: F) -> Vec<T>
where
    E: Executor,
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let shards = shards.clamp(1, n.max(1));
    let chunk = n.div_ceil(shards);
    let parts = exec.map_shards(shards, |s| {
        let lo = (s * chunk).min(n);
        let hi = ((s + 1) * chunk).min(n);
        (lo..hi).map(&f).collect::<Vec<T>>()
    });
    parts.into_iter().flatten().collect()
}
