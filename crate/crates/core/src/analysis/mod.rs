//! Unconditional, suppression and democracy constants of finite bases, the
//! Konyagin–Temlyakov comparison, property (A) and the non-democracy demo.

mod demo;
mod property_a;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::greedy::{
    greedy_constant_estimate, BasisNorm, EngineOptions, FiniteBasis, GreedyError, GreedySampler, TieMode,
};
use crate::sampling::{binomial, for_each_subset, gaussian, par_argmax, random_subset, SamplerConfig};

pub use demo::{nondemocracy_demo, DemoReport, SumType, DEMO_BUDGET};
pub use property_a::{
    argmax_set, greedy_permutations, one_greedy_check, property_a_check, property_a_sampled, property_a_vectors,
    GreedyPermutation, Leg, OneGreedyReport, PropertyAReport, PropertyAWitness,
};

/// Largest basis whose sign patterns or subsets are enumerated.
pub const UNCONDITIONAL_CAP: usize = 20;
/// Largest basis whose democracy constant is computed over all subsets.
pub const DEMOCRACY_CAP: usize = 18;
/// Largest `binom(dim, m)` enumerated by [`fundamental_function`].
pub const FUNDAMENTAL_CAP: u128 = 200_000;
/// Slack on every Konyagin–Temlyakov comparison.
pub const KT_TOL: f64 = 1e-9;

/// Sign or subset evaluations spent per sampled coefficient vector in exact
/// mode, summed over all samples.
const ENUMERATION_BUDGET: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("exact {what} needs at most {cap} elements, basis has {elements}; use sampled mode")]
    Cap {
        what: &'static str,
        elements: usize,
        cap: usize,
    },
    #[error("set size {m} must lie in 1..={dim}")]
    InvalidSize { m: usize, dim: usize },
    #[error("ambient size {ambient} is smaller than the support ({support}) or larger than the basis ({dim})")]
    Ambient { ambient: usize, support: usize, dim: usize },
    #[error("m = {m} exceeds the block budget {budget}")]
    Budget { m: usize, budget: usize },
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

/// Requested evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

/// How a reported constant was obtained. `Sampled` values are lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub config: SamplerConfig,
    /// Halvings of the step in the local ascent that polishes the best sample.
    pub refine_levels: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            config: SamplerConfig::new(0, 400),
            refine_levels: 40,
        }
    }
}

fn check_cap(mode: Mode, what: &'static str, dim: usize, cap: usize) -> Result<(), AnalysisError> {
    if mode == Mode::Exact && dim > cap {
        Err(AnalysisError::Cap { what, elements: dim, cap })
    } else {
        Ok(())
    }
}

/// Largest support of a coefficient vector drawn in sampled mode.
const SAMPLED_SUPPORT: usize = 32;

fn sample_coefficients<R: Rng + ?Sized>(rng: &mut R, k: usize, dim: usize, mode: Mode) -> Vec<f64> {
    let mut a = vec![0.0; dim];
    let cap = if mode == Mode::Sampled { SAMPLED_SUPPORT } else { dim };
    if (k % 3 == 2 && dim > 1) || dim > cap {
        let s = rng.random_range(1..=dim.min(cap));
        for j in random_subset(rng, dim, s) {
            a[j] = gaussian(rng);
        }
    } else {
        a.iter_mut().for_each(|v| *v = gaussian(rng));
    }
    a
}

/// Local ascent on a homogeneous ratio by coordinate and random moves with a
/// halving step.
fn refine<F: Fn(&[f64]) -> f64>(f: F, mut a: Vec<f64>, levels: usize, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f(&a);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut step = 0.5 * scale;
    let dim = a.len();
    for _ in 0..levels {
        for _ in 0..20 {
            let mut improved = false;
            for j in 0..dim {
                for s in [step, -step] {
                    let old = a[j];
                    a[j] += s;
                    let v = f(&a);
                    if v > best {
                        best = v;
                        improved = true;
                    } else {
                        a[j] = old;
                    }
                }
            }
            let d: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng) * step).collect();
            let trial: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
            let v = f(&trial);
            if v > best {
                best = v;
                a = trial;
                improved = true;
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    (a, best)
}

fn support(a: &[f64]) -> Vec<usize> {
    (0..a.len()).filter(|&k| a[k] != 0.0).collect()
}

fn terms(a: &[f64], idx: &[usize], sign: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    idx.iter().enumerate().map(|(s, &k)| (k, sign(s) * a[k])).collect()
}

/// `(ratio, mask)` maximizing `‖Σ_{k} f(mask, k) a_k x_k‖ / ‖Σ a_k x_k‖` over
/// masks of the support, enumerated or sampled.
fn best_mask<B: BasisNorm + ?Sized>(
    basis: &B,
    a: &[f64],
    mode: Mode,
    rng: &mut ChaCha8Rng,
    apply: &(dyn Fn(u64, usize) -> f64 + Sync),
    skip_top: bool,
) -> (f64, u64) {
    let idx = support(a);
    let denom = basis.combination_norm(&terms(a, &idx, |_| 1.0));
    if denom == 0.0 {
        return (1.0, 0);
    }
    let s = idx.len();
    let eval = |mask: u64| basis.combination_norm(&terms(a, &idx, |j| apply(mask, j))) / denom;
    match mode {
        Mode::Exact => {
            // the top bit is redundant for sign patterns (‖−x‖ = ‖x‖)
            let bits = if skip_top { s.saturating_sub(1) } else { s };
            (0..1u64 << bits)
                .into_par_iter()
                .map(|mask| (eval(mask), mask))
                .reduce(|| (f64::NEG_INFINITY, 0), |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        }
        Mode::Sampled => {
            let mut best = (eval(0), 0);
            for _ in 0..64 {
                let mask = rng.random::<u64>() & ((1u64 << s) - 1);
                let v = eval(mask);
                if v > best.0 {
                    best = (v, mask);
                }
            }
            best
        }
    }
}

fn mask_constant<B: BasisNorm + ?Sized>(
    basis: &B,
    mode: Mode,
    opts: &AnalysisOptions,
    apply: &(dyn Fn(u64, usize) -> f64 + Sync),
    skip_top: bool,
) -> f64 {
    let dim = basis.dim();
    if dim == 0 {
        return 1.0;
    }
    let per_vector = 1u64 << dim.min(40).saturating_sub(usize::from(skip_top));
    let samples = match mode {
        Mode::Exact => opts.config.samples.min((ENUMERATION_BUDGET / per_vector).max(4) as usize),
        Mode::Sampled => opts.config.samples,
    };
    let config = SamplerConfig::new(opts.config.seed, samples);
    let best = par_argmax(&config, |rng, k| {
        let a = sample_coefficients(rng, k, dim, mode);
        let (ratio, mask) = best_mask(basis, &a, mode, rng, apply, skip_top);
        (ratio, (a, mask))
    });
    let Some((ratio, _, (a, mask))) = best else {
        return 1.0;
    };
    // polish the coefficients for the winning pattern
    let idx = support(&a);
    let (_, polished) = refine(
        |b: &[f64]| {
            let full: Vec<f64> = {
                let mut v = vec![0.0; dim];
                idx.iter().zip(b).for_each(|(&k, &c)| v[k] = c);
                v
            };
            let denom = basis.combination_norm(&terms(&full, &idx, |_| 1.0));
            if denom == 0.0 {
                return 0.0;
            }
            basis.combination_norm(&terms(&full, &idx, |j| apply(mask, j))) / denom
        },
        idx.iter().map(|&k| a[k]).collect(),
        opts.refine_levels,
        opts.config.seed ^ 0x9e37_79b9,
    );
    ratio.max(polished).max(1.0)
}

fn method_for<B: BasisNorm + ?Sized>(basis: &B, mode: Mode) -> Method {
    // the supremum over coefficients is only settled analytically, which is
    // the case for lattice norms: sign changes are isometries there
    if mode == Mode::Exact && basis.is_lattice() {
        Method::Exact
    } else {
        Method::Sampled
    }
}

/// `sup ‖Σ θ_k a_k x_k‖ / ‖Σ a_k x_k‖` over signs `θ` and sampled `a`.
pub fn unconditionality_constant<B: BasisNorm + ?Sized>(
    basis: &B,
    mode: Mode,
    opts: &AnalysisOptions,
) -> Result<Measured, AnalysisError> {
    check_cap(mode, "unconditionality", basis.dim(), UNCONDITIONAL_CAP)?;
    let flip = |mask: u64, j: usize| if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
    Ok(Measured {
        value: mask_constant(basis, mode, opts, &flip, true),
        method: method_for(basis, mode),
    })
}

/// `sup ‖Σ_{k∈A} a_k x_k‖ / ‖Σ a_k x_k‖` over subsets `A` and sampled `a`.
pub fn suppression_constant<B: BasisNorm + ?Sized>(
    basis: &B,
    mode: Mode,
    opts: &AnalysisOptions,
) -> Result<Measured, AnalysisError> {
    check_cap(mode, "suppression", basis.dim(), UNCONDITIONAL_CAP)?;
    let keep = |mask: u64, j: usize| if mask >> j & 1 == 1 { 0.0 } else { 1.0 };
    Ok(Measured {
        value: mask_constant(basis, mode, opts, &keep, false),
        method: method_for(basis, mode),
    })
}

/// Extremes of `‖Σ_{k∈A} x_k‖` over `|A| = m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalValue {
    pub m: usize,
    pub phi_max: f64,
    pub phi_min: f64,
    pub method: Method,
    pub argmax: Vec<usize>,
    pub argmin: Vec<usize>,
}

/// `(φ_max(m), φ_min(m))`, by enumeration when `binom(dim, m)` is at most
/// [`FUNDAMENTAL_CAP`] and otherwise from random sets plus the `hints` of
/// size `m`.
pub fn fundamental_function<B: BasisNorm + ?Sized>(
    basis: &B,
    m: usize,
    config: &SamplerConfig,
    hints: &[Vec<usize>],
) -> Result<FundamentalValue, AnalysisError> {
    let dim = basis.dim();
    if m == 0 || m > dim {
        return Err(AnalysisError::InvalidSize { m, dim });
    }
    let exact = binomial(dim, m) <= FUNDAMENTAL_CAP;
    let mut sets: Vec<Vec<usize>> = hints.iter().filter(|h| h.len() == m).cloned().collect();
    if exact {
        for_each_subset(dim, m, |s| sets.push(s.to_vec()));
    } else {
        sets.extend((0..config.samples).map(|k| {
            let mut rng = config.rng(k);
            random_subset(&mut rng, dim, m)
        }));
    }
    let values: Vec<f64> = sets.par_iter().map(|s| basis.indicator_norm(s)).collect();
    let (mut hi, mut lo) = (0, 0);
    for (k, v) in values.iter().enumerate() {
        if *v > values[hi] {
            hi = k;
        }
        if *v < values[lo] {
            lo = k;
        }
    }
    Ok(FundamentalValue {
        m,
        phi_max: values[hi],
        phi_min: values[lo],
        method: if exact { Method::Exact } else { Method::Sampled },
        argmax: sets[hi].clone(),
        argmin: sets[lo].clone(),
    })
}

/// CSV with columns `m,phi_max,phi_min`.
pub fn fundamental_table_csv(rows: &[FundamentalValue]) -> String {
    let mut out = String::from("m,phi_max,phi_min\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.m, r.phi_max, r.phi_min));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemocracyReport {
    pub value: f64,
    pub method: Method,
    /// Heavy and light sets of the worst size.
    pub heavy: Vec<usize>,
    pub light: Vec<usize>,
}

/// `max_{m ≤ m_max} φ_max(m) / φ_min(m)`.
pub fn democracy_constant<B: BasisNorm + ?Sized>(
    basis: &B,
    m_max: usize,
    mode: Mode,
    config: &SamplerConfig,
    hints: &[Vec<usize>],
) -> Result<DemocracyReport, AnalysisError> {
    let dim = basis.dim();
    check_cap(mode, "democracy", dim, DEMOCRACY_CAP)?;
    if m_max == 0 || m_max > dim {
        return Err(AnalysisError::InvalidSize { m: m_max, dim });
    }
    let mut report = DemocracyReport {
        value: 1.0,
        method: Method::Exact,
        heavy: vec![0],
        light: vec![0],
    };
    for m in 1..=m_max {
        let cfg = SamplerConfig::new(config.seed.wrapping_add(m as u64), config.samples);
        let f = fundamental_function(basis, m, &cfg, hints)?;
        if f.method == Method::Sampled {
            report.method = Method::Sampled;
        }
        let ratio = f.phi_max / f.phi_min;
        if ratio > report.value {
            report.value = ratio;
            report.heavy = f.argmax;
            report.light = f.argmin;
        }
    }
    Ok(report)
}

/// Groups of element indices by the outer block of their first coordinate;
/// for canonical bases these are exactly the blocks.
pub fn element_blocks(basis: &FiniteBasis) -> Vec<Vec<usize>> {
    let mut groups: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for (k, e) in basis.elements().iter().enumerate() {
        if let Some(first) = e.support().next() {
            groups.entry(first.n).or_default().push(k);
        }
    }
    groups.into_values().collect()
}

/// Within-group and across-group candidate sets of every size up to `m_max`.
pub fn block_hints(groups: &[Vec<usize>], m_max: usize) -> Vec<Vec<usize>> {
    let mut hints = Vec::new();
    for m in 1..=m_max {
        if let Some(g) = groups.iter().find(|g| g.len() >= m) {
            hints.push(g[..m].to_vec());
        }
        if groups.len() >= m {
            let mut across: Vec<usize> = groups[..m].iter().map(|g| g[0]).collect();
            across.sort_unstable();
            hints.push(across);
        }
    }
    hints
}

/// A normalized basis of disjointly supported vectors in a random mixed-norm
/// space: `dim ≤ max_dim` elements, each spread over one or two coordinates
/// with weights drawn from `[1, 2]`.
pub fn random_lattice_basis<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> FiniteBasis {
    use rand::seq::SliceRandom;

    use crate::space::{Exponent, MixedIndex, SpaceSpec, SparseVector};
    const EXPONENTS: [Exponent; 5] = [
        Exponent::ONE,
        Exponent::Finite(1.5),
        Exponent::TWO,
        Exponent::Finite(3.0),
        Exponent::Infinite,
    ];
    let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
    let q = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
    let inner = rng.random_range(1..=3);
    let spec = SpaceSpec::uniform(p, q, inner).expect("inner dimension is positive");
    let dim = rng.random_range(2..=max_dim.max(2));
    let mut coords = Vec::new();
    let mut n = 1u64;
    while coords.len() < 2 * dim {
        for i in 1..=inner {
            coords.push(MixedIndex::new(i, n));
        }
        n += 1;
    }
    // shuffle so elements mix blocks and inner coordinates
    coords.shuffle(rng);
    let mut next = coords.into_iter();
    let elements = (0..dim)
        .map(|_| {
            let width = rng.random_range(1..=2);
            (0..width)
                .map(|_| (next.next().expect("two coordinates per element"), rng.random_range(1.0..=2.0)))
                .collect::<SparseVector>()
        })
        .collect();
    FiniteBasis::normalized(elements, spec).expect("disjoint nonzero vectors form a basis")
}

/// Measured constants and the Konyagin–Temlyakov comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(rename = "K_uncond")]
    pub k_uncond: f64,
    #[serde(rename = "K_suppression")]
    pub k_suppression: f64,
    #[serde(rename = "Delta_democracy")]
    pub delta_democracy: f64,
    #[serde(rename = "C_greedy_lower")]
    pub c_greedy_lower: f64,
    pub kt_upper: f64,
    pub kt_forward_ok: bool,
    /// `None` unless `K` and `Δ` are exact: a lower bound for `C` cannot
    /// falsify the converse.
    pub kt_converse_k_ok: Option<bool>,
    pub kt_converse_delta_ok: Option<bool>,
    pub methods: ConstantMethods,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantMethods {
    #[serde(rename = "K_uncond")]
    pub k_uncond: Method,
    #[serde(rename = "K_suppression")]
    pub k_suppression: Method,
    #[serde(rename = "Delta_democracy")]
    pub delta_democracy: Method,
    #[serde(rename = "C_greedy_lower")]
    pub c_greedy: Method,
}

impl ConstantsReport {
    /// Every asserted comparison holds, plus `K_suppression ≤ K_uncond`.
    pub fn all_ok(&self) -> bool {
        self.kt_forward_ok
            && self.kt_converse_k_ok.unwrap_or(true)
            && self.kt_converse_delta_ok.unwrap_or(true)
            && self.k_suppression <= self.k_uncond + KT_TOL
    }
}

/// `K + K³Δ`.
pub fn kt_upper_bound(k: f64, delta: f64) -> f64 {
    k + k.powi(3) * delta
}

#[derive(Debug, Clone)]
pub struct KtOptions {
    pub analysis: AnalysisOptions,
    pub greedy: GreedySampler,
    /// Largest set size examined for democracy on bases above the exact cap.
    pub sampled_m_max: usize,
    pub hints: Vec<Vec<usize>>,
}

impl Default for KtOptions {
    fn default() -> Self {
        KtOptions {
            analysis: AnalysisOptions::default(),
            greedy: GreedySampler {
                config: SamplerConfig::new(0, 400),
                engine: EngineOptions {
                    ties: TieMode::WorstCase,
                    ..EngineOptions::default()
                },
                ..GreedySampler::default()
            },
            sampled_m_max: 8,
            hints: Vec::new(),
        }
    }
}

/// Fills a [`ConstantsReport`]. Constants are exact where the caps allow.
///
/// The greedy estimate always includes the democracy witness
/// `x = 1_{H ∪ L}`, `n = |L \ H|` with worst-case ties: greedy may delete
/// `L \ H` and leave `1_H`, while deleting `H \ L` leaves `1_L`, so the
/// estimate is at least `‖1_H‖ / ‖1_L‖`.
pub fn kt_check<B: BasisNorm + ?Sized>(basis: &B, opts: &KtOptions) -> Result<ConstantsReport, AnalysisError> {
    let dim = basis.dim();
    let mode_k = if dim <= UNCONDITIONAL_CAP { Mode::Exact } else { Mode::Sampled };
    let mode_d = if dim <= DEMOCRACY_CAP { Mode::Exact } else { Mode::Sampled };
    let k = unconditionality_constant(basis, mode_k, &opts.analysis)?;
    let ks = suppression_constant(basis, mode_k, &opts.analysis)?;
    let m_max = if mode_d == Mode::Exact { dim } else { opts.sampled_m_max.min(dim) };
    let delta = democracy_constant(basis, m_max, mode_d, &opts.analysis.config, &opts.hints)?;

    let mut greedy = opts.greedy.clone();
    let mut witness = vec![0.0; dim];
    for &h in delta.heavy.iter().chain(&delta.light) {
        witness[h] = 1.0;
    }
    let n = delta.light.iter().filter(|l| !delta.heavy.contains(l)).count();
    greedy.probes.push((witness, n));
    let c = greedy_constant_estimate(basis, &greedy)?.lower_bound;

    let upper = kt_upper_bound(k.value, delta.value);
    let exact = k.method == Method::Exact && delta.method == Method::Exact;
    Ok(ConstantsReport {
        k_uncond: k.value,
        k_suppression: ks.value,
        delta_democracy: delta.value,
        c_greedy_lower: c,
        kt_upper: upper,
        kt_forward_ok: c <= upper + KT_TOL,
        kt_converse_k_ok: exact.then_some(k.value <= c + KT_TOL),
        kt_converse_delta_ok: exact.then_some(delta.value <= c * c + KT_TOL),
        methods: ConstantMethods {
            k_uncond: k.method,
            k_suppression: ks.method,
            delta_democracy: delta.method,
            c_greedy: Method::Sampled,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Exponent, MixedIndex, SpaceSpec, SparseVector};

    /// `{e_1, (e_1 + e_2)/√2}` in `ℓ_2^2`.
    pub(crate) fn skewed_pair() -> FiniteBasis {
        let spec = SpaceSpec::flat(Exponent::TWO, 2).unwrap();
        let e1 = SparseVector::unit(1, 1);
        let f = SparseVector::from_entries([(MixedIndex::new(1, 1), 1.0), (MixedIndex::new(2, 1), 1.0)]);
        FiniteBasis::normalized(vec![e1, f], spec).unwrap()
    }

    fn opts() -> AnalysisOptions {
        AnalysisOptions {
            config: SamplerConfig::new(3, 200),
            ..AnalysisOptions::default()
        }
    }

    #[test]
    fn canonical_constants_are_one() {
        for p in [Exponent::ONE, Exponent::Finite(3.0), Exponent::Infinite] {
            let spec = SpaceSpec::uniform(p, Exponent::TWO, 2).unwrap();
            let b = FiniteBasis::canonical_blocks(spec, 3).unwrap();
            let k = unconditionality_constant(&b, Mode::Exact, &opts()).unwrap();
            assert!((k.value - 1.0).abs() < 1e-12 && k.method == Method::Exact);
            let s = suppression_constant(&b, Mode::Exact, &opts()).unwrap();
            assert!((s.value - 1.0).abs() < 1e-12);
        }
        let flat = FiniteBasis::canonical_flat(Exponent::Finite(1.5), 6).unwrap();
        let d = democracy_constant(&flat, 6, Mode::Exact, &SamplerConfig::default(), &[]).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_pair_constants() {
        // ⟨e1, f⟩ = c = 1/√2: K = √((1+c)/(1−c)) = 1 + √2, suppression 1/√(1−c²) = √2
        let b = skewed_pair();
        let k = unconditionality_constant(&b, Mode::Exact, &opts()).unwrap();
        assert!((k.value - (1.0 + 2f64.sqrt())).abs() < 1e-6, "{k:?}");
        assert_eq!(k.method, Method::Sampled);
        let s = suppression_constant(&b, Mode::Exact, &opts()).unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-6, "{s:?}");
        assert!(s.value <= k.value);
    }

    #[test]
    fn caps_are_enforced() {
        let b = FiniteBasis::canonical_flat(Exponent::TWO, 21).unwrap();
        assert!(matches!(
            unconditionality_constant(&b, Mode::Exact, &opts()),
            Err(AnalysisError::Cap { cap: 20, .. })
        ));
        let b = FiniteBasis::canonical_flat(Exponent::TWO, 19).unwrap();
        assert!(democracy_constant(&b, 3, Mode::Exact, &SamplerConfig::default(), &[]).is_err());
        assert!(democracy_constant(&b, 3, Mode::Sampled, &SamplerConfig::new(0, 20), &[]).is_ok());
    }

    #[test]
    fn fundamental_function_examples() {
        let b = FiniteBasis::canonical_flat(Exponent::TWO, 6).unwrap();
        let f = fundamental_function(&b, 4, &SamplerConfig::default(), &[]).unwrap();
        assert!((f.phi_max - 2.0).abs() < 1e-15 && (f.phi_min - 2.0).abs() < 1e-15);

        // (⊕ ℓ_2^n)_{ℓ_1}: nine coordinates in block 9 vs one in each of nine blocks
        let spec = SpaceSpec::growing(Exponent::TWO, Exponent::ONE);
        let b = FiniteBasis::canonical_blocks(spec, 9).unwrap();
        let groups = element_blocks(&b);
        assert_eq!(groups.len(), 9);
        let within = groups[8].clone();
        let across: Vec<usize> = groups.iter().map(|g| g[0]).collect();
        assert!((b.indicator_norm(&within) - 3.0).abs() < 1e-15);
        assert!((b.indicator_norm(&across) - 9.0).abs() < 1e-15);
        let f = fundamental_function(&b, 9, &SamplerConfig::new(0, 50), &block_hints(&groups, 9)).unwrap();
        assert_eq!(f.method, Method::Sampled);
        assert!((f.phi_max - 9.0).abs() < 1e-15 && (f.phi_min - 3.0).abs() < 1e-15);
    }

    #[test]
    fn fourteen_blocks_democracy_at_least_sqrt_m() {
        let spec = SpaceSpec::growing(Exponent::TWO, Exponent::ONE);
        let b = FiniteBasis::canonical_blocks(spec, 14).unwrap();
        let hints = block_hints(&element_blocks(&b), 14);
        let d = democracy_constant(&b, 14, Mode::Sampled, &SamplerConfig::new(1, 20), &hints).unwrap();
        assert!(d.value >= 14f64.sqrt() - 1e-12, "{d:?}");
    }

    #[test]
    fn democracy_is_permutation_invariant() {
        let spec = SpaceSpec::explicit(Exponent::TWO, Exponent::ONE, vec![1, 3, 2]).unwrap();
        let idx = [
            MixedIndex::new(1, 1),
            MixedIndex::new(1, 2),
            MixedIndex::new(2, 2),
            MixedIndex::new(3, 2),
            MixedIndex::new(1, 3),
            MixedIndex::new(2, 3),
        ];
        let a = FiniteBasis::canonical(spec.clone(), &idx).unwrap();
        let mut rev = idx;
        rev.reverse();
        let b = FiniteBasis::canonical(spec, &rev).unwrap();
        let cfg = SamplerConfig::default();
        let da = democracy_constant(&a, 6, Mode::Exact, &cfg, &[]).unwrap().value;
        let db = democracy_constant(&b, 6, Mode::Exact, &cfg, &[]).unwrap().value;
        assert!((da - db).abs() < 1e-14 && da > 1.0);
    }

    #[test]
    fn kt_on_canonical_and_weighted() {
        let b = FiniteBasis::canonical_flat(Exponent::Finite(3.0), 5).unwrap();
        let r = kt_check(&b, &KtOptions::default()).unwrap();
        assert!((r.k_uncond - 1.0).abs() < 1e-12);
        assert!((r.delta_democracy - 1.0).abs() < 1e-12);
        assert!((r.c_greedy_lower - 1.0).abs() < 1e-9);
        assert!(r.all_ok() && r.kt_converse_delta_ok == Some(true));

        let spec = SpaceSpec::explicit(Exponent::TWO, Exponent::ONE, vec![1, 2, 3]).unwrap();
        let b = FiniteBasis::canonical_blocks(spec, 3).unwrap();
        let r = kt_check(&b, &KtOptions::default()).unwrap();
        assert!(r.delta_democracy > 1.0);
        assert!(r.c_greedy_lower >= r.delta_democracy - 1e-12);
        assert!(r.all_ok(), "{r:?}");
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["K_uncond", "K_suppression", "Delta_democracy", "C_greedy_lower", "kt_upper"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn random_lattice_bases_pass_kt() {
        let opts = KtOptions {
            analysis: AnalysisOptions { config: SamplerConfig::new(9, 60), ..AnalysisOptions::default() },
            ..KtOptions::default()
        };
        for k in 0..5 {
            let b = random_lattice_basis(&mut crate::sampling::sample_rng(4, k), 8);
            assert!(b.disjoint_supports() && b.dim() <= 8);
            let r = kt_check(&b, &opts).unwrap();
            assert!(r.all_ok() && r.kt_converse_k_ok.is_some(), "{r:?}");
        }
    }

    #[test]
    fn kt_upper_formula() {
        assert_eq!(kt_upper_bound(1.0, 1.0), 2.0);
        assert_eq!(kt_upper_bound(2.0, 1.5), 14.0);
    }

    #[test]
    fn csv_layout() {
        let row = FundamentalValue {
            m: 2,
            phi_max: 2.0,
            phi_min: 1.5,
            method: Method::Exact,
            argmax: vec![],
            argmin: vec![],
        };
        assert_eq!(fundamental_table_csv(&[row]), "m,phi_max,phi_min\n2,2,1.5\n");
    }
}
