use gbl_core::analysis::{
    democracy_constant, fundamental_function, kt_check, property_a_check, property_a_vectors, random_lattice_basis,
    KtOptions, Method, Mode,
};
use gbl_core::sampling::{sample_rng, SamplerConfig};
use gbl_core::{BasisNorm, Exponent, FiniteBasis, SpaceSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;

const TOL: f64 = 1e-9;

fn lattice(seed: u64, max_dim: usize) -> FiniteBasis {
    random_lattice_basis(&mut sample_rng(seed, 0), max_dim)
}

fn relabeled(basis: &FiniteBasis, perm: &[usize]) -> FiniteBasis {
    FiniteBasis::new(perm.iter().map(|&k| basis.elements()[k].clone()).collect(), basis.spec().clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constants_are_ordered(seed in any::<u64>()) {
        let basis = lattice(seed, 6);
        let r = kt_check(&basis, &KtOptions::default()).unwrap();
        prop_assert_eq!(r.methods.k_uncond, Method::Exact);
        prop_assert!(r.k_suppression <= r.k_uncond + TOL);
        prop_assert!(r.k_uncond <= r.c_greedy_lower + TOL, "{r:?}");
        prop_assert!(r.c_greedy_lower <= r.kt_upper + TOL);
        prop_assert!(r.delta_democracy <= r.c_greedy_lower.powi(2) + TOL);
        prop_assert!(r.all_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn democracy_ignores_element_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let basis = lattice(seed, 9);
        let mut perm: Vec<usize> = (0..basis.dim()).collect();
        perm.shuffle(&mut sample_rng(shuffle, 1));
        let config = SamplerConfig::new(0, 10);
        let a = democracy_constant(&basis, basis.dim(), Mode::Exact, &config, &[]).unwrap();
        let b = democracy_constant(&relabeled(&basis, &perm), basis.dim(), Mode::Exact, &config, &[]).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value);
    }

    #[test]
    fn fundamental_function_is_nondecreasing(seed in any::<u64>(), picks in prop::collection::vec(any::<bool>(), 10), extra in any::<usize>()) {
        let basis = lattice(seed, 10);
        let dim = basis.dim();
        let config = SamplerConfig::new(0, 10);
        let values: Vec<_> = (1..=dim).map(|m| fundamental_function(&basis, m, &config, &[]).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[0].phi_max <= w[1].phi_max * (1.0 + 1e-12));
            prop_assert!(w[0].phi_min <= w[1].phi_min * (1.0 + 1e-12));
        }
        let set: Vec<usize> = (0..dim).filter(|&k| picks[k % picks.len()]).collect();
        let j = extra % dim;
        if !set.contains(&j) {
            let mut bigger = set.clone();
            bigger.push(j);
            prop_assert!(basis.indicator_norm(&set) <= basis.indicator_norm(&bigger) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn property_a_ignores_free_index_labels(seed in any::<u64>(), shuffle in any::<u64>(), which in 0..2usize) {
        let basis = if which == 0 {
            lattice(seed, 6)
        } else {
            let spec = SpaceSpec::explicit(Exponent::ONE, Exponent::Infinite, vec![1, 2, 2]).unwrap();
            FiniteBasis::canonical_blocks(spec, 3).unwrap()
        };
        let dim = basis.dim();
        let vectors = property_a_vectors(dim, &SamplerConfig::new(seed, 12));
        for x in vectors {
            // permute only the indices outside the support
            let free: Vec<usize> = (0..dim).filter(|&k| x[k] == 0.0).collect();
            let mut shuffled = free.clone();
            shuffled.shuffle(&mut sample_rng(shuffle, 2));
            let mut perm: Vec<usize> = (0..dim).collect();
            for (a, b) in free.iter().zip(&shuffled) {
                perm[*a] = *b;
            }
            let y: Vec<f64> = perm.iter().map(|&k| x[k]).collect();
            let a = property_a_check(&basis, std::slice::from_ref(&x), Some(dim), 1e-12).unwrap();
            let b = property_a_check(&relabeled(&basis, &perm), &[y], Some(dim), 1e-12).unwrap();
            prop_assert_eq!(a.pass, b.pass);
            prop_assert_eq!(a.permutations, b.permutations);
            prop_assert!((a.max_deviation - b.max_deviation).abs() <= 1e-12);
        }
    }
}
