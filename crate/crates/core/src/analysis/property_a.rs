//! Property (A): the norm of an expansion is unchanged when its largest
//! coefficients move to fresh indices, with arbitrary signs on the moved ones.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{suppression_constant, AnalysisError, AnalysisOptions, Measured, Mode, UNCONDITIONAL_CAP};
use crate::greedy::{BasisNorm, TIE_TOL};
use crate::sampling::{gaussian, random_subset, SamplerConfig};

/// Default number of indices outside the support a greedy permutation may use.
pub const EXTRA_SLOTS: usize = 4;

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 8;

/// `M(x)`: indices whose magnitude ties the maximum (relative [`TIE_TOL`]),
/// and the number of near ties, i.e. magnitudes within `1e-6` of the
/// maximum but outside the tie rule.
pub fn argmax_set(coeffs: &[f64]) -> (Vec<usize>, usize) {
    let top = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if top == 0.0 {
        return (Vec::new(), 0);
    }
    let mut m = Vec::new();
    let mut near = 0;
    for (k, c) in coeffs.iter().enumerate() {
        let gap = (top - c.abs()) / top;
        if gap <= TIE_TOL {
            m.push(k);
        } else if gap <= 1e-6 {
            near += 1;
        }
    }
    (m, near)
}

/// `π` restricted to `M(x)`: pairs `(j, π(j))`, identity pairs included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyPermutation {
    pub moves: Vec<(usize, usize)>,
}

impl GreedyPermutation {
    pub fn is_identity(&self) -> bool {
        self.moves.iter().all(|(a, b)| a == b)
    }

    pub fn moved(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.moves.iter().copied().filter(|(a, b)| a != b)
    }
}

/// All greedy permutations of `x` over an ambient set made of `supp(x)` and
/// the first `ambient - |supp(x)|` indices outside it: injections fixing
/// `supp(x) \ M(x)` that send each `j ∈ M(x)` to itself or to a free index.
pub fn greedy_permutations(coeffs: &[f64], ambient: usize) -> Result<Vec<GreedyPermutation>, AnalysisError> {
    let support: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).collect();
    if ambient < support.len() || ambient > coeffs.len() {
        return Err(AnalysisError::Ambient {
            ambient,
            support: support.len(),
            dim: coeffs.len(),
        });
    }
    let free: Vec<usize> = (0..coeffs.len())
        .filter(|&k| coeffs[k] == 0.0)
        .take(ambient - support.len())
        .collect();
    let (m, _) = argmax_set(coeffs);
    let mut out = Vec::new();
    let mut used = vec![false; free.len()];
    let mut current = Vec::with_capacity(m.len());
    assign(&m, &free, &mut used, &mut current, &mut out);
    Ok(out)
}

fn assign(
    m: &[usize],
    free: &[usize],
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<GreedyPermutation>,
) {
    let Some((&j, rest)) = m.split_first() else {
        out.push(GreedyPermutation { moves: current.clone() });
        return;
    };
    current.push((j, j));
    assign(rest, free, used, current, out);
    current.pop();
    for s in 0..free.len() {
        if !used[s] {
            used[s] = true;
            current.push((j, free[s]));
            assign(rest, free, used, current, out);
            current.pop();
            used[s] = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyAWitness {
    pub x: Vec<f64>,
    pub permutation: GreedyPermutation,
    /// Signs of the moved indices, in the order of [`GreedyPermutation::moved`].
    pub signs: Vec<i8>,
    pub norm_before: f64,
    pub norm_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyAReport {
    pub tested: usize,
    pub permutations: usize,
    /// Largest `|‖πx‖ − ‖x‖| / ‖x‖`.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub near_ties: usize,
    pub witnesses: Vec<PropertyAWitness>,
    pub pass: bool,
}

/// Enumerates every greedy permutation and moved-index sign pattern of each
/// vector. `ambient` defaults to `|supp(x)| +` [`EXTRA_SLOTS`], clipped to the
/// basis.
pub fn property_a_check<B: BasisNorm + ?Sized>(
    basis: &B,
    vectors: &[Vec<f64>],
    ambient: Option<usize>,
    tol: f64,
) -> Result<PropertyAReport, AnalysisError> {
    let mut report = PropertyAReport {
        tested: 0,
        permutations: 0,
        max_deviation: 0.0,
        tolerance: tol,
        near_ties: 0,
        witnesses: Vec::new(),
        pass: true,
    };
    for x in vectors {
        if x.len() != basis.dim() {
            return Err(crate::greedy::GreedyError::DimensionMismatch {
                got: x.len(),
                dim: basis.dim(),
            }
            .into());
        }
        let support = x.iter().filter(|c| **c != 0.0).count();
        let amb = ambient.unwrap_or((support + EXTRA_SLOTS).min(x.len()));
        report.tested += 1;
        report.near_ties += argmax_set(x).1;
        let before = basis.coefficient_norm(x);
        if before == 0.0 {
            continue;
        }
        for perm in greedy_permutations(x, amb)? {
            report.permutations += 1;
            let moved: Vec<(usize, usize)> = perm.moved().collect();
            for pattern in 0..1u32 << moved.len() {
                let mut y = x.clone();
                let mut signs = Vec::with_capacity(moved.len());
                for (b, &(from, _)) in moved.iter().enumerate() {
                    y[from] = 0.0;
                    signs.push(if pattern >> b & 1 == 1 { -1i8 } else { 1 });
                }
                for (&(from, to), &s) in moved.iter().zip(&signs) {
                    y[to] = f64::from(s) * x[from];
                }
                let after = basis.coefficient_norm(&y);
                let dev = (after - before).abs() / before;
                report.max_deviation = report.max_deviation.max(dev);
                if dev > tol && report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(PropertyAWitness {
                        x: x.clone(),
                        permutation: perm.clone(),
                        signs,
                        norm_before: before,
                        norm_after: after,
                    });
                }
            }
        }
    }
    report.pass = report.max_deviation <= tol;
    Ok(report)
}

/// Random test vectors with planted ties at the top: a tied group of one to
/// three maxima, smaller coefficients elsewhere, and room for free slots.
pub fn property_a_vectors(dim: usize, config: &SamplerConfig) -> Vec<Vec<f64>> {
    (0..config.samples)
        .map(|k| {
            let mut rng = config.rng(k);
            let mut x = vec![0.0; dim];
            if dim == 0 {
                return x;
            }
            let s = rng.random_range(1..=dim);
            let support = random_subset(&mut rng, dim, s);
            let ties = rng.random_range(1..=s.min(3));
            let top = 0.5 + rng.random::<f64>();
            for (r, &j) in support.iter().enumerate() {
                let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                x[j] = if r < ties {
                    sign * top
                } else {
                    sign * top * rng.random_range(0.05..0.95) * (1.0 + 0.01 * gaussian(&mut rng)).clamp(0.5, 1.0)
                };
            }
            x
        })
        .collect()
}

pub fn property_a_sampled<B: BasisNorm + ?Sized>(
    basis: &B,
    config: &SamplerConfig,
    tol: f64,
) -> Result<PropertyAReport, AnalysisError> {
    property_a_check(basis, &property_a_vectors(basis.dim(), config), None, tol)
}

/// Leg of the 1-greedy characterization that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    Suppression,
    PropertyA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneGreedyReport {
    pub pass: bool,
    pub suppression: Measured,
    pub property_a: PropertyAReport,
    pub failed: Vec<Leg>,
}

/// 1-greedy iff 1-suppression unconditional and property (A).
pub fn one_greedy_check<B: BasisNorm + ?Sized>(
    basis: &B,
    opts: &AnalysisOptions,
    extra_vectors: &[Vec<f64>],
    tol: f64,
) -> Result<OneGreedyReport, AnalysisError> {
    let mode = if basis.dim() <= UNCONDITIONAL_CAP { Mode::Exact } else { Mode::Sampled };
    let suppression = suppression_constant(basis, mode, opts)?;
    let mut vectors = extra_vectors.to_vec();
    vectors.extend(property_a_vectors(basis.dim(), &opts.config));
    let property_a = property_a_check(basis, &vectors, None, tol)?;
    let mut failed = Vec::new();
    if suppression.value > 1.0 + tol {
        failed.push(Leg::Suppression);
    }
    if !property_a.pass {
        failed.push(Leg::PropertyA);
    }
    Ok(OneGreedyReport {
        pass: failed.is_empty(),
        suppression,
        property_a,
        failed,
    })
}
