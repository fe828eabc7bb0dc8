//! Reproducible per-trajectory random streams.
//!
//! Every trajectory owns independent ChaCha streams keyed by the master seed
//! and its index, one per purpose, so a trajectory's noise does not depend on
//! how many trajectories run, in which order, or on which worker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Purpose of a stream. Each purpose gets its own ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKind {
    InitialState,
    Wiener,
    Jumps,
    Resample,
}

impl StreamKind {
    fn id(self) -> u64 {
        match self {
            StreamKind::InitialState => 1,
            StreamKind::Wiener => 2,
            StreamKind::Jumps => 3,
            StreamKind::Resample => 4,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random stream for one (seed, trajectory, purpose) triple.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, trajectory: u64, kind: StreamKind) -> Self {
        let words = [
            splitmix64(master_seed),
            splitmix64(master_seed ^ 0x5851_F42D_4C95_7F2D),
            splitmix64(trajectory),
            splitmix64(trajectory.wrapping_add(splitmix64(master_seed))),
        ];
        let mut key = [0u8; 32];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(kind.id());
        Self { rng }
    }

    /// Wiener increment with mean 0 and variance `dt`.
    pub fn wiener(&mut self, dt: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        z * dt.sqrt()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`, safe to use as a norm threshold.
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Index drawn from a discrete distribution given by (unnormalized) weights.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.uniform() * total;
        for (k, &w) in weights.iter().enumerate() {
            if u < w {
                return k;
            }
            u -= w;
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_numbers() {
        let mut a = RngStream::new(7, 42, StreamKind::Wiener);
        let mut b = RngStream::new(7, 42, StreamKind::Wiener);
        for _ in 0..100 {
            assert_eq!(a.wiener(0.01).to_bits(), b.wiener(0.01).to_bits());
        }
    }

    #[test]
    fn different_keys_differ() {
        let first = |seed, idx, kind| RngStream::new(seed, idx, kind).uniform();
        let base = first(7, 42, StreamKind::Wiener);
        assert_ne!(base, first(7, 43, StreamKind::Wiener));
        assert_ne!(base, first(8, 42, StreamKind::Wiener));
        assert_ne!(base, first(7, 42, StreamKind::Jumps));
    }

    #[test]
    fn categorical_respects_weights() {
        let mut r = RngStream::new(1, 0, StreamKind::Jumps);
        let mut counts = [0usize; 3];
        for _ in 0..30000 {
            counts[r.categorical(&[1.0, 0.0, 3.0])] += 1;
        }
        assert_eq!(counts[1], 0);
        let frac = counts[0] as f64 / 30000.0;
        assert!((frac - 0.25).abs() < 0.015, "{frac}");
    }
}
