//! The averaging projections `T_X` (onto the span of the family) and `T_Y`
//! (onto the span of the `y_i`), and sampled lower bounds for their norms.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConstructionError, ConstructionParams, DENSE_CAP};
use crate::sampling::{gaussian, par_argmax, SamplerConfig};
use crate::space::{extreme_points, norm_unchecked, Exponent, IndexBox, MixedIndex, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// Averages every level over its own windows of length `n_i`.
    X,
    /// Averages every level over all `n_N` blocks.
    Y,
}

impl ConstructionParams {
    fn check_rectangle(&self, v: &SparseVector) -> Result<(), ConstructionError> {
        if self.blocks() > DENSE_CAP / self.levels as u64 {
            return Err(ConstructionError::DenseCap {
                coords: self.blocks() * self.levels as u64,
                cap: DENSE_CAP,
            });
        }
        match v
            .support()
            .find(|k| k.i == 0 || k.i > self.levels || k.n == 0 || k.n > self.blocks())
        {
            Some(index) => Err(ConstructionError::OutsideRectangle(index)),
            None => Ok(()),
        }
    }
}

fn average_over_windows(
    params: &ConstructionParams,
    v: &SparseVector,
    window_len: impl Fn(usize) -> u64,
) -> Result<SparseVector, ConstructionError> {
    params.check_rectangle(v)?;
    let mut sums: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    for (k, c) in v.iter() {
        let len = window_len(k.i);
        *sums.entry((k.i, (k.n - 1) / len)).or_insert(0.0) += c;
    }
    let mut out = SparseVector::new();
    for ((level, w), sum) in sums {
        let len = window_len(level);
        let avg = sum / len as f64;
        for n in w * len + 1..=(w + 1) * len {
            out.set(MixedIndex::new(level, n), avg);
        }
    }
    Ok(out)
}

/// `T_X`: replaces the coefficients of level `i` on each window
/// `[(j-1)n_i+1, j n_i]` by their average.
pub fn apply_t_x(params: &ConstructionParams, v: &SparseVector) -> Result<SparseVector, ConstructionError> {
    average_over_windows(params, v, |level| params.block_len(level))
}

/// `T_Y`: replaces the coefficients of each level by their average over all
/// `n_N` outer blocks.
pub fn apply_t_y(params: &ConstructionParams, v: &SparseVector) -> Result<SparseVector, ConstructionError> {
    let nn = params.blocks();
    average_over_windows(params, v, |_| nn)
}

pub fn apply(
    params: &ConstructionParams,
    which: Projection,
    v: &SparseVector,
) -> Result<SparseVector, ConstructionError> {
    match which {
        Projection::X => apply_t_x(params, v),
        Projection::Y => apply_t_y(params, v),
    }
}

/// Which sampling family produced the largest ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Dense,
    ExtremePoint,
    Spike,
    SharedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub which: Projection,
    pub p: Exponent,
    pub lower_bound: f64,
    pub samples: usize,
    pub best_kind: SampleKind,
    #[serde(skip)]
    pub best_input: SparseVector,
}

/// `max ‖T v‖ / ‖v‖` over sampled `v`: dense Gaussian vectors, extreme points
/// of `B_{ℓ_q(ℓ_∞^N)}` when `p = ∞`, spikes straddling window boundaries, and
/// one outer profile shared by every level.
pub fn operator_norm_lower_bound(
    params: &ConstructionParams,
    which: Projection,
    p: Exponent,
    config: &SamplerConfig,
) -> Result<OperatorNormEstimate, ConstructionError> {
    params.check_rectangle(&SparseVector::new())?;
    let q = Exponent::Finite(params.q);
    let levels = params.levels();
    let nn = params.blocks();
    let family = if p.is_infinite() {
        let spec = params.space(p);
        Some(extreme_points(&spec, IndexBox::leading_blocks(&spec, nn)?)?)
    } else {
        None
    };

    let best = par_argmax(config, |rng, k| {
        let kind = match k % 4 {
            0 => SampleKind::Dense,
            1 if family.is_some() => SampleKind::ExtremePoint,
            1 | 2 => SampleKind::Spike,
            _ => SampleKind::SharedProfile,
        };
        let v = match kind {
            SampleKind::Dense => dense_sample(rng, levels, nn),
            SampleKind::ExtremePoint => family.as_ref().expect("p = inf").sample(rng).to_vector(),
            SampleKind::Spike => spike_sample(rng, params),
            SampleKind::SharedProfile => shared_profile_sample(rng, levels, nn),
        };
        let denom = norm_unchecked(&v, p, q);
        if denom == 0.0 {
            return (0.0, (kind, v));
        }
        let image = apply(params, which, &v).expect("samples stay inside the rectangle");
        (norm_unchecked(&image, p, q) / denom, (kind, v))
    });
    let (lower_bound, _, (best_kind, best_input)) = best.unwrap_or((0.0, 0, (SampleKind::Dense, SparseVector::new())));
    Ok(OperatorNormEstimate {
        which,
        p,
        lower_bound,
        samples: config.samples,
        best_kind,
        best_input,
    })
}

fn dense_sample<R: Rng + ?Sized>(rng: &mut R, levels: usize, nn: u64) -> SparseVector {
    let mut v = SparseVector::new();
    for n in 1..=nn {
        for i in 1..=levels {
            v.set(MixedIndex::new(i, n), gaussian(rng));
        }
    }
    v
}

/// A short run of equal-sign mass, usually placed across a window boundary.
fn spike_sample<R: Rng + ?Sized>(rng: &mut R, params: &ConstructionParams) -> SparseVector {
    let nn = params.blocks();
    let level = rng.random_range(1..=params.levels());
    let len = params.block_len(rng.random_range(1..=params.levels()));
    let width = rng.random_range(1..=len.max(1)).min(nn);
    let boundary = len * rng.random_range(0..=nn / len);
    let start = boundary
        .saturating_sub(rng.random_range(0..width))
        .clamp(1, nn + 1 - width);
    let all_levels = rng.random_bool(0.5);
    let mut v = SparseVector::new();
    for n in start..start + width {
        for i in 1..=params.levels() {
            if all_levels || i == level {
                v.set(MixedIndex::new(i, n), 1.0);
            }
        }
    }
    v
}

fn shared_profile_sample<R: Rng + ?Sized>(rng: &mut R, levels: usize, nn: u64) -> SparseVector {
    let mut v = SparseVector::new();
    let centre = rng.random_range(1..=nn) as f64;
    let decay = rng.random_range(0.05..2.0);
    for n in 1..=nn {
        let a = (-(n as f64 - centre).abs() * decay).exp();
        for i in 1..=levels {
            v.set(MixedIndex::new(i, n), a);
        }
    }
    v
}
