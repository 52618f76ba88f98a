//! Seed derivation, counter-addressed random streams and reproducible reductions.
//!
//! Every parallel loop in the crate is split into chunks whose boundaries do
//! not depend on the thread count. Each chunk draws from its own ChaCha8
//! stream and produces a partial result; partial results are then combined in
//! chunk order. This makes every reported number independent of how rayon
//! schedules the work.
//!
//! Replicate `r` of an experiment with master seed `s` uses the seed
//! `derive_seed(s, r)`, a SplitMix64 finalizer applied to `s` and `r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate (or sub-task) `index` of a run with master seed `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_mul(GOLDEN).wrapping_add(1)))
}

/// A generator for the path or replicate identified by `seed`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator positioned at draw `index` of a counter-addressed stream in
/// which every draw consumes exactly `words_per_draw` 32-bit words.
pub fn rng_at(seed: u64, index: u64, words_per_draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * words_per_draw as u128);
    rng
}

/// Uniform on the open interval (0, 1) from exactly one `u64`.
#[inline]
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Fills `out` with draws `offset..offset + out.len()` of a counter-addressed
/// stream, in parallel chunks. `draw` must consume exactly `words_per_draw`
/// words, so the result does not depend on the chunking.
pub fn fill_counter_stream<F>(seed: u64, offset: u64, words_per_draw: u64, out: &mut [f64], draw: F)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    const CHUNK: usize = 1 << 14;
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = rng_at(seed, offset + (c * CHUNK) as u64, words_per_draw);
        for v in chunk.iter_mut() {
            *v = draw(&mut rng);
        }
    });
}

/// Runs `f` for chunk indices `0..chunks` in parallel and returns the results
/// in chunk order.
pub fn par_chunks<T, F>(chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..chunks).into_par_iter().map(f).collect()
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running mean and variance with compensated sums; mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAccumulator {
    n: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum.value() / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq.value() - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean assuming independent observations.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn merged(parts: &[MeanAccumulator]) -> MeanAccumulator {
        let mut acc = MeanAccumulator::new();
        for p in parts {
            acc.merge(p);
        }
        acc
    }
}

/// Standard error of an overall mean from equally weighted batch means
/// (robust to dependence inside a batch). Returns `None` with fewer than two
/// non-empty batches.
pub fn batch_means_se(parts: &[MeanAccumulator]) -> Option<f64> {
    let means: Vec<(f64, f64)> = parts
        .iter()
        .filter(|p| p.count() > 0)
        .map(|p| (p.mean(), p.count() as f64))
        .collect();
    if means.len() < 2 {
        return None;
    }
    let total: f64 = means.iter().map(|(_, w)| w).sum();
    let grand: f64 = means.iter().map(|(m, w)| m * w).sum::<f64>() / total;
    let k = means.len() as f64;
    // weighted batch means: var(grand) ≈ Σ w_i² (m_i − grand)² / W² · k/(k−1)
    let s: f64 = means.iter().map(|(m, w)| (w * (m - grand)).powi(2)).sum();
    Some((s / (total * total) * k / (k - 1.0)).sqrt())
}

/// Standard error of the ratio `Σ num / Σ den` from per-chunk totals
/// (linearized ratio estimator). Infinite when it cannot be estimated.
pub fn ratio_se(num: &[f64], den: &[f64]) -> f64 {
    let k = num.len() as f64;
    let (tn, td): (f64, f64) = (num.iter().sum(), den.iter().sum());
    if td <= 0.0 || k < 2.0 {
        return f64::INFINITY;
    }
    let r = tn / td;
    let mean_den = td / k;
    let ss: f64 = num.iter().zip(den).map(|(n, d)| (n - r * d).powi(2)).sum();
    (ss / (k * (k - 1.0))).sqrt() / mean_den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_and_are_stable() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn counter_stream_is_chunking_independent() {
        let mut whole = vec![0.0; 40_000];
        fill_counter_stream(3, 0, 2, &mut whole, |r| open01(r));
        let mut tail = vec![0.0; 10_000];
        fill_counter_stream(3, 30_000, 2, &mut tail, |r| open01(r));
        assert_eq!(&whole[30_000..], &tail[..]);
        let mut rng = rng_at(3, 12_345, 2);
        assert_eq!(open01(&mut rng), whole[12_345]);
    }

    #[test]
    fn open01_never_hits_endpoints() {
        struct Fixed(u64);
        impl rand::RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        assert!(open01(&mut Fixed(0)) > 0.0);
        assert!(open01(&mut Fixed(u64::MAX)) < 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn batch_means_match_iid_se_roughly() {
        let mut rng = rng_from_seed(1);
        let parts: Vec<MeanAccumulator> = (0..100)
            .map(|_| {
                let mut a = MeanAccumulator::new();
                for _ in 0..1000 {
                    a.push(open01(&mut rng));
                }
                a
            })
            .collect();
        let iid = MeanAccumulator::merged(&parts).std_error();
        let bm = batch_means_se(&parts).unwrap();
        assert!((bm / iid - 1.0).abs() < 0.35, "{bm} vs {iid}");
    }
}
