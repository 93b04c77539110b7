use gbl_core::space::{lp_norm, norm, norming_functional};
use gbl_core::{Exponent, MixedIndex, SpaceSpec, SparseVector};
use proptest::prelude::*;

const INNER: usize = 3;

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::TWO),
        Just(Exponent::Infinite),
        (1.0..8.0f64).prop_map(Exponent::Finite),
    ]
}

fn entries() -> impl Strategy<Value = Vec<((usize, u64), f64)>> {
    prop::collection::vec(((1..=INNER, 1..=6u64), -10.0..10.0f64), 0..14)
}

fn vector(entries: &[((usize, u64), f64)]) -> SparseVector {
    let mut v = SparseVector::new();
    for &((i, n), c) in entries {
        v.set(MixedIndex::new(i, n), c);
    }
    v
}

fn spec(p: Exponent, q: Exponent) -> SpaceSpec {
    SpaceSpec::uniform(p, q, INNER).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn triangle_and_homogeneity(p in exponent(), q in exponent(), a in entries(), b in entries(), lambda in -5.0..5.0f64) {
        let s = spec(p, q);
        let (u, v) = (vector(&a), vector(&b));
        let (nu, nv) = (norm(&u, &s).unwrap(), norm(&v, &s).unwrap());
        prop_assert!(norm(&u.plus(&v), &s).unwrap() <= (nu + nv) * (1.0 + 1e-12));
        let scaled = norm(&u.scaled(lambda), &s).unwrap();
        prop_assert!((scaled - lambda.abs() * nu).abs() <= 1e-12 * nu.max(1e-300) * lambda.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn lattice_monotonicity(p in exponent(), q in exponent(), a in entries(), shrink in prop::collection::vec(0.0..=1.0f64, 14)) {
        let s = spec(p, q);
        let v = vector(&a);
        let u: SparseVector = v.iter().zip(&shrink).map(|((idx, c), t)| (idx, c * t)).collect();
        prop_assert!(norm(&u, &s).unwrap() <= norm(&v, &s).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn equal_exponents_give_the_flat_norm(p in exponent(), a in entries()) {
        let v = vector(&a);
        let values: Vec<f64> = v.iter().map(|(_, c)| c).collect();
        let flat = lp_norm(&values, p);
        prop_assert!((norm(&v, &spec(p, p)).unwrap() - flat).abs() <= 1e-12 * flat.max(1.0));
    }

    #[test]
    fn duality_pairing(p in exponent(), q in exponent(), a in entries(), b in entries(), radius in 0.0..=1.0f64) {
        let s = spec(p, q);
        let dual = s.dual();
        let v = vector(&a);
        let nv = norm(&v, &s).unwrap();
        let raw = vector(&b);
        let nw = norm(&raw, &dual).unwrap();
        if nw > 0.0 {
            let w = raw.scaled(radius / nw);
            prop_assert!(w.dot(&v).abs() <= nv * (1.0 + 1e-12) + 1e-300);
        }
        // the norming functional attains the bound
        let w = norming_functional(&v, p, q);
        prop_assert!(norm(&w, &dual).unwrap() <= 1.0 + 1e-12);
        prop_assert!((w.dot(&v) - nv).abs() <= 1e-12 * nv.max(1.0));
    }
}
