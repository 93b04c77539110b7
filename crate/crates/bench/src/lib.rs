//! Seeded inputs shared by the benchmarks.

use gbl_core::construction::{BasisElementId, BuildOptions, ConstructionParams};
use gbl_core::sampling::{gaussian, random_subset, sample_rng};
use gbl_core::{MixedIndex, SparseVector};
use rand::Rng;

/// Minimal parameters for `q = 2`, `ε = 0.9`, two levels.
pub fn desk_params() -> ConstructionParams {
    ConstructionParams::build(2.0, 0.9, 2, BuildOptions::default()).expect("fits the default capacity")
}

/// `count` distinct family elements.
pub fn random_ids(params: &ConstructionParams, count: usize, seed: u64) -> Vec<BasisElementId> {
    let mut rng = sample_rng(seed, 0);
    random_subset(&mut rng, params.family_size() as usize, count)
        .into_iter()
        .map(|k| params.id_at(k as u64).expect("in range"))
        .collect()
}

/// Gaussian entries on `blocks` outer blocks of inner dimension `inner`.
pub fn random_vector(inner: usize, blocks: u64, seed: u64) -> SparseVector {
    let mut rng = sample_rng(seed, 1);
    let mut v = SparseVector::new();
    for n in 1..=blocks {
        for i in 1..=inner {
            v.set(MixedIndex::new(i, n), gaussian(&mut rng));
        }
    }
    v
}

pub fn random_sequence(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = sample_rng(seed, 2);
    (0..len).map(|_| if rng.random_bool(0.2) { 0.0 } else { gaussian(&mut rng) }).collect()
}
