//! Seeded, worker-count-independent sampling.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, index)`,
//! so a parallel map over sample indices yields identical results no matter
//! how rayon splits the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
}

impl SamplerConfig {
    pub const fn new(seed: u64, samples: usize) -> Self {
        SamplerConfig { seed, samples }
    }

    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        sample_rng(self.seed, index as u64)
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            samples: 2000,
        }
    }
}

pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Best `(value, payload)` over all samples; ties go to the lowest index.
pub fn par_argmax<T, F>(config: &SamplerConfig, eval: F) -> Option<(f64, usize, T)>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> (f64, T) + Sync,
{
    (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = config.rng(k);
            let (v, t) = eval(&mut rng, k);
            (v, k, t)
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
}

fn better<T>(a: &(f64, usize, T), b: &(f64, usize, T)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Walks all `k`-subsets of `0..n` as sorted index lists, in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_subset(n, k, |s| out.push(s.to_vec()));
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// A uniformly random `k`-subset of `0..n`, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut out = rand::seq::index::sample(rng, n, k.min(n)).into_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_walk_matches_binomial() {
        for n in 0..9 {
            for k in 0..=n {
                let all = subsets(n, k);
                assert_eq!(all.len() as u128, binomial(n, k), "n={n} k={k}");
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn argmax_is_independent_of_thread_count() {
        let cfg = SamplerConfig::new(11, 500);
        let run = || par_argmax(&cfg, |rng, _| (rng.random::<f64>(), ())).map(|(v, k, _)| (v, k));
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(one, many);
    }
}
