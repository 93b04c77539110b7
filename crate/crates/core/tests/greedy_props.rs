use gbl_core::analysis::random_lattice_basis;
use gbl_core::greedy::{greedy_approximant, greedy_order_coeffs, greedy_residual, sigma_n_exact, EngineOptions};
use gbl_core::sampling::sample_rng;
use gbl_core::{Exponent, FiniteBasis, MixedIndex, SpaceSpec, SparseVector, TieMode};
use proptest::prelude::*;

fn lattice(seed: u64) -> FiniteBasis {
    random_lattice_basis(&mut sample_rng(seed, 0), 10)
}

fn coefficients(dim: usize, raw: &[f64], zeros: &[bool]) -> Vec<f64> {
    (0..dim).map(|k| if zeros[k % zeros.len()] { 0.0 } else { raw[k % raw.len()] }).collect()
}

/// Normalized dense vectors in `ℓ_p^dim`; `None` if they are dependent.
fn general(p: Exponent, dim: usize, raw: &[f64]) -> Option<FiniteBasis> {
    let spec = SpaceSpec::flat(p, dim).unwrap();
    let vectors: Vec<SparseVector> = (0..dim)
        .map(|k| (0..dim).map(|i| (MixedIndex::new(i + 1, 1), raw[(k * dim + i) % raw.len()])).collect())
        .collect();
    FiniteBasis::normalized(vectors, spec).ok()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::ONE), Just(Exponent::TWO), Just(Exponent::Infinite), (1.2..5.0f64).prop_map(Exponent::Finite)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lattice_residuals_decrease(seed in any::<u64>(), raw in prop::collection::vec(-4.0..4.0f64, 1..12), zeros in prop::collection::vec(any::<bool>(), 1..6)) {
        let basis = lattice(seed);
        let c = coefficients(gbl_core::BasisNorm::dim(&basis), &raw, &zeros);
        let mut prev = f64::INFINITY;
        for n in 0..=c.len() {
            let r = greedy_residual(&basis, &c, n, TieMode::Deterministic).unwrap();
            prop_assert!(r <= prev * (1.0 + 1e-12) || r <= prev + 1e-15);
            prev = r;
        }
    }

    #[test]
    fn sigma_is_at_most_the_greedy_residual_lattice(seed in any::<u64>(), raw in prop::collection::vec(-4.0..4.0f64, 1..12), zeros in prop::collection::vec(any::<bool>(), 1..6), n in 0..10usize) {
        let basis = lattice(seed);
        let c = coefficients(gbl_core::BasisNorm::dim(&basis), &raw, &zeros);
        let n = n.min(c.len());
        let opts = EngineOptions::default();
        let sigma = sigma_n_exact(&basis, &c, n, &opts).unwrap();
        for ties in [TieMode::Deterministic, TieMode::WorstCase] {
            prop_assert!(sigma <= greedy_residual(&basis, &c, n, ties).unwrap() * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn sigma_is_at_most_the_greedy_residual_general(p in exponent(), dim in 2..=4usize, raw in prop::collection::vec(-2.0..2.0f64, 16), c in prop::collection::vec(-3.0..3.0f64, 4), n in 0..=3usize) {
        let Some(basis) = general(p, dim, &raw) else { return Ok(()); };
        let c = &c[..dim];
        let n = n.min(dim);
        let sigma = sigma_n_exact(&basis, c, n, &EngineOptions::default()).unwrap();
        let residual = greedy_residual(&basis, c, n, TieMode::Deterministic).unwrap();
        prop_assert!(sigma <= residual * (1.0 + 1e-12) + 1e-300, "sigma {sigma} residual {residual}");
    }

    #[test]
    fn relabeling_permutes_the_greedy_set(seed in any::<u64>(), raw in prop::collection::vec(-4.0..4.0f64, 12), shuffle in any::<u64>(), n in 0..12usize) {
        use rand::seq::SliceRandom;
        let basis = lattice(seed);
        let dim = gbl_core::BasisNorm::dim(&basis);
        let c: Vec<f64> = raw[..dim].to_vec();
        prop_assume!(!greedy_order_coeffs(&c).ties);
        let n = n.min(dim);
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(&mut sample_rng(shuffle, 1));
        // element k of the relabeled basis is element perm[k] of the original
        let relabeled = FiniteBasis::new(perm.iter().map(|&k| basis.elements()[k].clone()).collect(), basis.spec().clone()).unwrap();
        let x = basis.synthesize(&c);
        let g = greedy_approximant(&x, n, &basis).unwrap();
        let h = greedy_approximant(&x, n, &relabeled).unwrap();
        let mapped: Vec<usize> = h.a_n.iter().map(|&k| perm[k]).collect();
        prop_assert_eq!(mapped, g.a_n);
        prop_assert!(g.g_n.max_abs_diff(&h.g_n) <= 1e-12);
    }
}
