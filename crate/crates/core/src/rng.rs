//! Counter-based random streams and deterministic parallel reductions.
//!
//! Sample `i` of a run seeded with `s` always draws from ChaCha8 stream `i`
//! under a key derived from `s`. Work is split into fixed-size chunks whose
//! partial results are combined in chunk order, so results never depend on
//! how many threads rayon uses.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use rayon::prelude::*;

use crate::scalar::Scalar;

/// Samples per reduction chunk.
pub const CHUNK: u64 = 4096;

/// Derives one independent stream per sample index.
#[derive(Clone, Debug)]
pub struct Streams {
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Streams for a named sub-experiment sharing the caller's seed.
    pub fn with_domain(seed: u64, domain: u64) -> Self {
        Self::new(splitmix64(seed ^ splitmix64(domain.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chunks(samples: u64) -> impl ParallelIterator<Item = std::ops::Range<u64>> {
    let n_chunks = samples.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(move |c| c * CHUNK..((c + 1) * CHUNK).min(samples))
}

/// Number of sample indices in `0..samples` for which `trial` returns true.
pub fn count_hits<F>(streams: &Streams, samples: u64, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    chunks(samples)
        .map(|range| {
            range
                .filter(|&i| {
                    let mut rng = streams.stream(i);
                    trial(&mut rng)
                })
                .count() as u64
        })
        .sum()
}

/// [`count_hits`] with per-chunk scratch state built by `init`.
pub fn count_hits_with<S, I, F>(streams: &Streams, samples: u64, init: I, trial: F) -> u64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng) -> bool + Sync,
{
    chunks(samples)
        .map(|range| {
            let mut scratch = init();
            range
                .filter(|&i| {
                    let mut rng = streams.stream(i);
                    trial(&mut scratch, &mut rng)
                })
                .count() as u64
        })
        .sum()
}

/// Ordered sum and sum of squares of `value` over `0..samples`.
pub fn sum_moments<F>(streams: &Streams, samples: u64, value: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    sum_moments_with(streams, samples, || (), |_, rng| value(rng))
}

/// [`sum_moments`] with per-chunk scratch state built by `init`.
pub fn sum_moments_with<S, I, F>(streams: &Streams, samples: u64, init: I, value: F) -> (f64, f64)
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng) -> f64 + Sync,
{
    let partials: Vec<(f64, f64)> = chunks(samples)
        .map(|range| {
            let mut scratch = init();
            let mut s = 0.0;
            let mut s2 = 0.0;
            for i in range {
                let mut rng = streams.stream(i);
                let v = value(&mut scratch, &mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
}

/// Ordered per-chunk reduction of vector-valued samples of length `width`.
pub fn sum_vectors<F>(streams: &Streams, samples: u64, width: usize, value: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<f64>> = chunks(samples)
        .map(|range| {
            let mut acc = vec![0.0; width];
            let mut buf = vec![0.0; width];
            for i in range {
                let mut rng = streams.stream(i);
                buf.fill(0.0);
                value(&mut rng, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += *b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; width];
    for p in partials {
        for (a, b) in total.iter_mut().zip(p) {
            *a += b;
        }
    }
    total
}

/// Runs `op` on a dedicated rayon pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(op)
}

/// Fills `x` with independent uniform ±1 values.
pub fn fill_signs<T: Scalar, R: RngCore>(rng: &mut R, x: &mut [T]) {
    for block in x.chunks_mut(64) {
        let bits = rng.next_u64();
        for (b, v) in block.iter_mut().enumerate() {
            *v = if (bits >> b) & 1 == 1 { T::one() } else { -T::one() };
        }
    }
}

/// Calls `flip(i)` for each `i < n` independently with probability `delta`.
pub fn for_each_flip<R: Rng>(rng: &mut R, n: usize, delta: f64, mut flip: impl FnMut(usize)) {
    if delta >= 1.0 {
        (0..n).for_each(flip);
        return;
    }
    if delta <= 0.0 {
        return;
    }
    let gap = Geometric::new(delta).expect("delta in (0,1)");
    let mut pos: u64 = 0;
    loop {
        pos = pos.saturating_add(gap.sample(rng));
        if pos >= n as u64 {
            break;
        }
        flip(pos as usize);
        pos += 1;
    }
}

pub fn fill_normals<T: Scalar, R: Rng>(rng: &mut R, x: &mut [T]) {
    for v in x.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *v = T::from_f64_lossy(g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = Streams::new(42);
        let a: Vec<u64> = (0..4).map(|_| s.stream(7).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(s.stream(7).next_u64(), s.stream(8).next_u64());
        assert_ne!(Streams::new(1).stream(0).next_u64(), Streams::new(2).stream(0).next_u64());
    }

    #[test]
    fn reductions_do_not_depend_on_worker_count() {
        let s = Streams::new(9);
        let one = with_workers(1, || sum_moments(&s, 20_000, |r| r.random::<f64>()));
        let many = with_workers(8, || sum_moments(&s, 20_000, |r| r.random::<f64>()));
        assert_eq!(one.0.to_bits(), many.0.to_bits());
        assert_eq!(one.1.to_bits(), many.1.to_bits());
        let c1 = with_workers(1, || count_hits(&s, 10_001, |r| r.random::<bool>()));
        let c8 = with_workers(8, || count_hits(&s, 10_001, |r| r.random::<bool>()));
        assert_eq!(c1, c8);
    }

    #[test]
    fn flip_rate_matches_delta() {
        let s = Streams::new(3);
        let mut flips = 0usize;
        for i in 0..2000 {
            let mut r = s.stream(i);
            for_each_flip(&mut r, 100, 0.1, |_| flips += 1);
        }
        let rate = flips as f64 / 200_000.0;
        assert!((rate - 0.1).abs() < 0.005, "rate {rate}");
    }
}
