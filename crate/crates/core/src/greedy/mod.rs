//! Thresholding greedy approximation against a finite basis.
//!
//! `G_n(x)` keeps the `n` largest coefficients of `x`; `σ_n(x)` is the best
//! error of any `n`-term expansion. Their ratio is the Lebesgue-type ratio,
//! whose supremum is the greedy constant of the basis.

mod basis;
mod solve;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{binomial, for_each_subset, gaussian, par_argmax, random_subset, SamplerConfig};
use crate::space::{MixedIndex, SpaceError, SparseVector};

pub use basis::{BasisNorm, FiniteBasis, BASIS_TOL};
pub use solve::{minimize_convex, minimize_convex_cut, CutResult, SolveOptions};

/// Magnitudes closer than this (relative) count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Default brute-force cap on the number of candidate coordinates for `σ_n`.
pub const SUBSET_CAP: usize = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreedyError {
    #[error("a basis needs at least one nonzero element")]
    EmptyBasis,
    #[error("basis element {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("the basis vectors are linearly dependent")]
    Singular,
    #[error("coefficient functionals are not biorthogonal (defect {0})")]
    NotBiorthogonal(f64),
    #[error("vector is not in the span of the basis (coordinate {0})")]
    NotInSpan(MixedIndex),
    #[error("n = {n} exceeds the basis dimension {dim}")]
    InvalidCount { n: usize, dim: usize },
    #[error("coefficient vector has length {got}, basis has {dim} elements")]
    DimensionMismatch { got: usize, dim: usize },
    #[error(
        "brute force over {candidates} coordinates exceeds the cap of {cap}; \
         use the sampled estimators instead"
    )]
    BruteForceCap { candidates: usize, cap: usize },
    #[error("sigma_n is zero but the greedy residual is {residual}")]
    Inconsistent { residual: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// How `A_n(x)` is chosen among tied coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Ties broken by ascending element index.
    #[default]
    Deterministic,
    /// Every admissible choice is tried and the largest residual kept.
    WorstCase,
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub ties: TieMode,
    pub subset_cap: usize,
    pub solve: SolveOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            ties: TieMode::Deterministic,
            subset_cap: SUBSET_CAP,
            solve: SolveOptions::default(),
        }
    }
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOrder {
    pub order: Vec<usize>,
    pub ties: bool,
}

/// Indices by decreasing `|c_k|`, ties by ascending index. `ties` reports
/// adjacent nonzero magnitudes within [`TIE_TOL`].
pub fn greedy_order_coeffs(coeffs: &[f64]) -> GreedyOrder {
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()).then(a.cmp(&b)));
    let ties = order.windows(2).any(|w| {
        let (a, b) = (coeffs[w[0]].abs(), coeffs[w[1]].abs());
        a != 0.0 && tied(a, b)
    });
    GreedyOrder { order, ties }
}

pub fn greedy_order(x: &SparseVector, basis: &FiniteBasis) -> Result<GreedyOrder, GreedyError> {
    Ok(greedy_order_coeffs(&basis.coefficients(x)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedySelection {
    pub x: SparseVector,
    pub n: usize,
    /// `A_n(x)` in greedy order.
    pub a_n: Vec<usize>,
    pub g_n: SparseVector,
    pub residual_norm: f64,
    pub tie_flag: bool,
}

/// `G_n(x) = Σ_{k ∈ A_n(x)} x_k^*(x) x_k` with deterministic tie-breaking.
pub fn greedy_approximant(
    x: &SparseVector,
    n: usize,
    basis: &FiniteBasis,
) -> Result<GreedySelection, GreedyError> {
    let coeffs = basis.coefficients(x)?;
    check_count(n, coeffs.len())?;
    let GreedyOrder { order, ties } = greedy_order_coeffs(&coeffs);
    let a_n = order[..n].to_vec();
    let mut kept = vec![0.0; coeffs.len()];
    for &k in &a_n {
        kept[k] = coeffs[k];
    }
    let g_n = basis.synthesize(&kept);
    let residual_norm = basis.spec().norm(&x.minus(&g_n))?;
    Ok(GreedySelection {
        x: x.clone(),
        n,
        a_n,
        g_n,
        residual_norm,
        tie_flag: ties,
    })
}

fn check_count(n: usize, dim: usize) -> Result<(), GreedyError> {
    if n > dim {
        Err(GreedyError::InvalidCount { n, dim })
    } else {
        Ok(())
    }
}

fn check_len<B: BasisNorm + ?Sized>(basis: &B, coeffs: &[f64]) -> Result<(), GreedyError> {
    if coeffs.len() != basis.dim() {
        Err(GreedyError::DimensionMismatch {
            got: coeffs.len(),
            dim: basis.dim(),
        })
    } else {
        Ok(())
    }
}

fn terms_without(coeffs: &[f64], support: &[usize], removed: &[usize]) -> Vec<(usize, f64)> {
    support
        .iter()
        .filter(|k| !removed.contains(k))
        .map(|&k| (k, coeffs[k]))
        .collect()
}

fn support_of(coeffs: &[f64]) -> Vec<usize> {
    (0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).collect()
}

/// `‖x − G_n(x)‖` on coefficients; in worst-case mode the maximum over every
/// admissible `A_n(x)`.
pub fn greedy_residual<B: BasisNorm + ?Sized>(
    basis: &B,
    coeffs: &[f64],
    n: usize,
    ties: TieMode,
) -> Result<f64, GreedyError> {
    check_len(basis, coeffs)?;
    check_count(n, coeffs.len())?;
    let support = support_of(coeffs);
    if n >= support.len() {
        return Ok(0.0);
    }
    let GreedyOrder { order, .. } = greedy_order_coeffs(coeffs);
    let head: Vec<usize> = order[..n].to_vec();
    let deterministic = basis.combination_norm(&terms_without(coeffs, &support, &head));
    if ties == TieMode::Deterministic || n == 0 {
        return Ok(deterministic);
    }
    // magnitudes tied with the n-th largest may be swapped freely
    let threshold = coeffs[order[n - 1]].abs();
    let group: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| coeffs[k] != 0.0 && tied(coeffs[k].abs(), threshold))
        .collect();
    let fixed: Vec<usize> = head.iter().copied().filter(|k| !group.contains(k)).collect();
    let need = n - fixed.len();
    if group.len() <= need || binomial(group.len(), need) > 1 << 16 {
        return Ok(deterministic);
    }
    let mut worst = deterministic;
    for_each_subset(group.len(), need, |pick| {
        let mut removed = fixed.clone();
        removed.extend(pick.iter().map(|&s| group[s]));
        worst = worst.max(basis.combination_norm(&terms_without(coeffs, &support, &removed)));
    });
    Ok(worst)
}

/// Best `n`-term error `σ_n(x)` by exhaustive search over supports.
///
/// Lattice bases: `σ_n` is the smallest norm left after deleting `n`
/// coefficients of `x`. Otherwise every `n`-subset of the basis is tried and
/// the coefficients on it are optimized by [`minimize_convex`], then by the
/// certified [`minimize_convex_cut`] when the basis provides subgradients.
pub fn sigma_n_exact<B: BasisNorm + ?Sized>(
    basis: &B,
    coeffs: &[f64],
    n: usize,
    opts: &EngineOptions,
) -> Result<f64, GreedyError> {
    check_len(basis, coeffs)?;
    check_count(n, coeffs.len())?;
    let support = support_of(coeffs);
    if n >= support.len() && basis.is_lattice() {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(basis.combination_norm(&terms_without(coeffs, &support, &[])));
    }
    if basis.is_lattice() {
        if support.len() > opts.subset_cap {
            return Err(GreedyError::BruteForceCap {
                candidates: support.len(),
                cap: opts.subset_cap,
            });
        }
        let s = support.len();
        let best = (0..=s - n)
            .into_par_iter()
            .map(|first| {
                let mut best = f64::INFINITY;
                let rest = s - first - 1;
                for_each_subset(rest, n - 1, |tail| {
                    let mut removed = Vec::with_capacity(n);
                    removed.push(support[first]);
                    removed.extend(tail.iter().map(|&t| support[first + 1 + t]));
                    best = best.min(basis.combination_norm(&terms_without(coeffs, &support, &removed)));
                });
                best
            })
            .reduce(|| f64::INFINITY, f64::min);
        return Ok(best);
    }

    let dim = coeffs.len();
    if dim > opts.subset_cap {
        return Err(GreedyError::BruteForceCap {
            candidates: dim,
            cap: opts.subset_cap,
        });
    }
    let mut sets = Vec::new();
    for_each_subset(dim, n.min(dim), |s| sets.push(s.to_vec()));
    let best = sets
        .par_iter()
        .map(|set| {
            let objective = |a: &[f64]| {
                let mut c = coeffs.to_vec();
                for (slot, &k) in set.iter().enumerate() {
                    c[k] -= a[slot];
                }
                basis.coefficient_norm(&c)
            };
            let start: Vec<f64> = set.iter().map(|&k| coeffs[k]).collect();
            let deleted = objective(&start);
            let (_, descent) = minimize_convex(objective, start.clone(), opts.solve);
            // the minimizer a* has ‖Σ (a*_k − c_k) x_k‖ ≤ 2‖x − Σ_{set} c_k x_k‖
            let radius = basis.coefficient_radius(set, 2.0 * deleted);
            let probe = basis.coefficient_subgradient(coeffs);
            match (radius, probe) {
                (Some(radius), Some(_)) => {
                    let f_grad = |a: &[f64]| {
                        let mut c = coeffs.to_vec();
                        for (slot, &k) in set.iter().enumerate() {
                            c[k] -= a[slot];
                        }
                        let g = basis.coefficient_subgradient(&c).expect("probed above");
                        (basis.coefficient_norm(&c), set.iter().map(|&k| -g[k]).collect())
                    };
                    let cut = minimize_convex_cut(f_grad, start, radius * (1.0 + 1e-9), descent, opts.solve.tol);
                    cut.value.min(descent)
                }
                _ => descent,
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// One `(x, n)` evaluation of the greedy algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LebesgueRecord {
    pub n: usize,
    pub residual: f64,
    pub sigma: f64,
    pub ratio: f64,
    pub ties: bool,
}

impl LebesgueRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

/// `‖x − G_n(x)‖ / σ_n(x)` on coefficients.
pub fn lebesgue_ratio_coeffs<B: BasisNorm + ?Sized>(
    basis: &B,
    coeffs: &[f64],
    n: usize,
    opts: &EngineOptions,
) -> Result<LebesgueRecord, GreedyError> {
    let residual = greedy_residual(basis, coeffs, n, opts.ties)?;
    let sigma = sigma_n_exact(basis, coeffs, n, opts)?;
    let scale = basis.coefficient_norm(coeffs).max(f64::MIN_POSITIVE);
    let ratio = if sigma <= 1e-14 * scale {
        if residual > 1e-12 * scale {
            return Err(GreedyError::Inconsistent { residual });
        }
        1.0
    } else {
        residual / sigma
    };
    Ok(LebesgueRecord {
        n,
        residual,
        sigma,
        ratio,
        ties: greedy_order_coeffs(coeffs).ties,
    })
}

pub fn lebesgue_ratio(
    x: &SparseVector,
    n: usize,
    basis: &FiniteBasis,
    opts: &EngineOptions,
) -> Result<LebesgueRecord, GreedyError> {
    let coeffs = basis.coefficients(x)?;
    lebesgue_ratio_coeffs(basis, &coeffs, n, opts)
}

/// Configuration of [`greedy_constant_estimate`].
#[derive(Debug, Clone)]
pub struct GreedySampler {
    pub config: SamplerConfig,
    pub engine: EngineOptions,
    /// Largest support of a sampled coefficient vector.
    pub max_support: usize,
    /// Extra `(coefficients, n)` inputs evaluated before sampling.
    pub probes: Vec<(Vec<f64>, usize)>,
}

impl Default for GreedySampler {
    fn default() -> Self {
        GreedySampler {
            config: SamplerConfig::default(),
            engine: EngineOptions::default(),
            max_support: 10,
            probes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConstantEstimate {
    /// Largest observed Lebesgue ratio: a lower bound for the greedy constant.
    pub lower_bound: f64,
    pub evaluated: usize,
    pub witness: Option<(Vec<f64>, usize)>,
}

/// Sup of the Lebesgue ratio over probes and sampled inputs: Gaussian
/// coefficients, a few spikes over a small floor, near-tie plateaus and
/// two-level `{1, t}` patterns.
pub fn greedy_constant_estimate<B: BasisNorm + ?Sized>(
    basis: &B,
    sampler: &GreedySampler,
) -> Result<GreedyConstantEstimate, GreedyError> {
    let dim = basis.dim();
    let mut best = (1.0_f64, None);
    for (coeffs, n) in &sampler.probes {
        let rec = lebesgue_ratio_coeffs(basis, coeffs, *n, &sampler.engine)?;
        if rec.ratio > best.0 {
            best = (rec.ratio, Some((coeffs.clone(), *n)));
        }
    }
    let support_cap = sampler.max_support.min(dim).min(sampler.engine.subset_cap);
    if support_cap == 0 || (!basis.is_lattice() && dim > sampler.engine.subset_cap) {
        return Ok(GreedyConstantEstimate {
            lower_bound: best.0,
            evaluated: sampler.probes.len(),
            witness: best.1,
        });
    }
    let sampled = par_argmax(&sampler.config, |rng, k| {
        let (coeffs, n) = sample_input(rng, k, dim, support_cap);
        match lebesgue_ratio_coeffs(basis, &coeffs, n, &sampler.engine) {
            Ok(rec) => (rec.ratio, Ok((coeffs, n))),
            Err(e) => (f64::INFINITY, Err(e)),
        }
    });
    if let Some((ratio, _, payload)) = sampled {
        let witness = payload?;
        if ratio > best.0 {
            best = (ratio, Some(witness));
        }
    }
    Ok(GreedyConstantEstimate {
        lower_bound: best.0,
        evaluated: sampler.probes.len() + sampler.config.samples,
        witness: best.1,
    })
}

fn sample_input<R: Rng + ?Sized>(rng: &mut R, k: usize, dim: usize, support_cap: usize) -> (Vec<f64>, usize) {
    let size = rng.random_range(1..=support_cap);
    let support = random_subset(rng, dim, size);
    let mut coeffs = vec![0.0; dim];
    match k % 4 {
        0 => support.iter().for_each(|&s| coeffs[s] = gaussian(rng)),
        1 => {
            for &s in &support {
                coeffs[s] = if rng.random_bool(0.3) { 1.0 + rng.random::<f64>() } else { 0.1 * rng.random::<f64>() };
            }
        }
        2 => {
            for &s in &support {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                coeffs[s] = sign * (1.0 + 1e-9 * rng.random::<f64>());
            }
        }
        _ => {
            let t = rng.random::<f64>();
            for &s in &support {
                coeffs[s] = if rng.random_bool(0.6) { 1.0 } else { t };
            }
        }
    }
    let n = rng.random_range(0..=size);
    (coeffs, n)
}
