//! Seeded random streams and deterministic sharded Monte Carlo.
//!
//! Every batch is cut into fixed-size shards. Shard `k` of a job with
//! stream base `b` draws from ChaCha8 seeded with the master seed and stream
//! id `(b << 32) | k`, so merged results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad::KahanSum;

/// Samples per shard.
pub const SHARD: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }

    /// Sub-stream for shard `k` of this stream.
    pub fn shard(&self, k: u64) -> RngStream {
        RngStream { master_seed: self.master_seed, stream_id: (self.stream_id << 32) | k }
    }

    /// A derived stream for a named purpose (hashing the label into the id).
    pub fn derive(&self, label: &str) -> RngStream {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        RngStream { master_seed: self.master_seed, stream_id: (self.stream_id ^ h) & 0xFFFF_FFFF }
    }
}

/// Running moments of a scalar sample with compensated sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    pub n: u64,
    sum: KahanSum,
    sumsq: KahanSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sumsq.add(x * x);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum.add(other.sum.value());
        self.sumsq.add(other.sumsq.value());
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sumsq.value() - self.n as f64 * m * m) / (self.n as f64 - 1.0)).max(0.0)
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

fn shard_sizes(n: usize) -> Vec<(u64, usize)> {
    let full = n / SHARD;
    let rest = n % SHARD;
    let mut v: Vec<(u64, usize)> = (0..full as u64).map(|k| (k, SHARD)).collect();
    if rest > 0 {
        v.push((full as u64, rest));
    }
    v
}

/// Mean and standard error of `f(rng, index)` over `n` draws.
pub fn mc_mean<F>(stream: RngStream, n: usize, f: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts: Vec<Moments> = shard_sizes(n)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = stream.shard(k).rng();
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Several running moments at once (one per output of `f`).
pub fn mc_means<F>(stream: RngStream, n: usize, k: usize, f: F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let parts: Vec<Vec<Moments>> = shard_sizes(n)
        .into_par_iter()
        .map(|(s, len)| {
            let mut rng = stream.shard(s).rng();
            let mut m = vec![Moments::default(); k];
            let mut buf = vec![0.0; k];
            for _ in 0..len {
                f(&mut rng, &mut buf);
                for (mi, b) in m.iter_mut().zip(&buf) {
                    mi.push(*b);
                }
            }
            m
        })
        .collect();
    let mut total = vec![Moments::default(); k];
    for p in &parts {
        for (t, m) in total.iter_mut().zip(p) {
            t.merge(m);
        }
    }
    total
}

/// Draws `n` items in deterministic shard order.
pub fn mc_collect<T, F>(stream: RngStream, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let parts: Vec<Vec<T>> = shard_sizes(n)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = stream.shard(k).rng();
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Runs `f` with a rayon pool of the given size (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(|p| p.install(f))
        .expect("thread pool")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merged_statistics_do_not_depend_on_workers() {
        let s = RngStream::new(42, 3);
        let f = |r: &mut ChaCha8Rng| r.random::<f64>();
        let a = with_workers(1, || mc_mean(s, 200_000, f));
        let b = with_workers(3, || mc_mean(s, 200_000, f));
        assert_eq!(a.mean().to_bits(), b.mean().to_bits());
        assert_eq!(a.std_err().to_bits(), b.std_err().to_bits());
        let v1 = with_workers(1, || mc_collect(s, 70_000, |r| r.random::<u32>()));
        let v2 = with_workers(4, || mc_collect(s, 70_000, |r| r.random::<u32>()));
        assert_eq!(v1, v2);
    }

    #[test]
    fn streams_are_distinct() {
        let a: u64 = RngStream::new(1, 0).rng().random();
        let b: u64 = RngStream::new(1, 1).rng().random();
        let c: u64 = RngStream::new(1, 0).rng().random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn uniform_mean_within_error() {
        let m = mc_mean(RngStream::new(9, 0), 100_000, |r| r.random::<f64>());
        assert!((m.mean() - 0.5).abs() < 4.0 * m.std_err());
    }
}
