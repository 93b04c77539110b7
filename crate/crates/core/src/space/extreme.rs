//! Extreme points of the unit ball of `ℓ_q(ℓ_∞^N)`.
//!
//! Every extreme point has the form `Σ_j a_j Σ_i ε_(i,j) e_(i,j)` with signs
//! `ε = ±1` on every coordinate and a nonnegative outer profile `(a_j)` of
//! unit `ℓ_q` norm. The family is parametrized, never materialized: signs
//! can be enumerated for a fixed profile on small boxes, or sampled.

use rand::Rng;

use super::{lp_norm, Exponent, MixedIndex, SpaceError, SpaceSpec, SparseVector};

/// Largest number of coordinates whose sign patterns may be enumerated.
pub const SIGN_ENUMERATION_CAP: usize = 24;

const PROFILE_TOL: f64 = 1e-12;

/// Finite rectangle of outer blocks `1..=len` with their dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexBox {
    dims: Vec<usize>,
}

impl IndexBox {
    pub fn new(dims: Vec<usize>) -> Result<Self, SpaceError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(SpaceError::InvalidBlocks(
                "box needs at least one block, each of dimension >= 1".into(),
            ));
        }
        Ok(IndexBox { dims })
    }

    /// The first `blocks` outer blocks of `spec`, at their full dimension.
    pub fn leading_blocks(spec: &SpaceSpec, blocks: u64) -> Result<Self, SpaceError> {
        let dims = (1..=blocks)
            .map(|n| {
                spec.block_dim(n).ok_or(SpaceError::InvalidIndex {
                    index: MixedIndex::new(1, n),
                    dim: 0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dims)
    }

    pub fn blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coordinates(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// One extreme point: `signs[j][i]` is `ε_(i+1, j+1)`, `profile[j]` is `a_(j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint {
    pub profile: Vec<f64>,
    pub signs: Vec<Vec<i8>>,
}

impl ExtremePoint {
    pub fn to_vector(&self) -> SparseVector {
        let mut v = SparseVector::new();
        for (j, (a, signs)) in self.profile.iter().zip(&self.signs).enumerate() {
            for (i, s) in signs.iter().enumerate() {
                v.set(MixedIndex::new(i + 1, j as u64 + 1), a * f64::from(*s));
            }
        }
        v
    }
}

/// The extreme-point family of `B_{ℓ_q(ℓ_∞)}` restricted to a box.
#[derive(Debug, Clone)]
pub struct ExtremeFamily {
    q: f64,
    index_box: IndexBox,
}

/// Enumerator/sampler for the extreme points of `B_{ℓ_q(ℓ_∞)}` on `index_box`.
pub fn extreme_points(spec: &SpaceSpec, index_box: IndexBox) -> Result<ExtremeFamily, SpaceError> {
    if !spec.inner_p().is_infinite() {
        return Err(SpaceError::Unsupported(format!(
            "extreme points are only parametrized for inner p = inf, got p = {}",
            spec.inner_p()
        )));
    }
    let q = spec.outer_q().finite().ok_or_else(|| {
        SpaceError::Unsupported("extreme points need a finite outer exponent".into())
    })?;
    for (j, &d) in index_box.dims().iter().enumerate() {
        let n = j as u64 + 1;
        match spec.block_dim(n) {
            Some(dim) if d <= dim => {}
            dim => {
                return Err(SpaceError::InvalidIndex {
                    index: MixedIndex::new(d, n),
                    dim: dim.unwrap_or(0),
                })
            }
        }
    }
    Ok(ExtremeFamily { q, index_box })
}

impl ExtremeFamily {
    pub fn index_box(&self) -> &IndexBox {
        &self.index_box
    }

    fn check_profile(&self, profile: &[f64]) -> Result<(), SpaceError> {
        if profile.len() != self.index_box.blocks() {
            return Err(SpaceError::InvalidProfile(format!(
                "expected {} weights, got {}",
                self.index_box.blocks(),
                profile.len()
            )));
        }
        if profile.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(SpaceError::InvalidProfile("weights must be >= 0".into()));
        }
        let norm = lp_norm(profile, Exponent::Finite(self.q));
        if (norm - 1.0).abs() > PROFILE_TOL {
            return Err(SpaceError::InvalidProfile(format!(
                "profile has l_q norm {norm}, expected 1"
            )));
        }
        Ok(())
    }

    /// Whether `point` is a member of the family.
    pub fn contains(&self, point: &ExtremePoint) -> bool {
        self.check_profile(&point.profile).is_ok()
            && point.signs.len() == self.index_box.blocks()
            && point
                .signs
                .iter()
                .zip(self.index_box.dims())
                .all(|(s, &d)| s.len() == d && s.iter().all(|&e| e == 1 || e == -1))
    }

    /// All `2^coords` sign patterns for a fixed unit profile.
    pub fn points(&self, profile: &[f64]) -> Result<SignPatterns, SpaceError> {
        self.check_profile(profile)?;
        let coords = self.index_box.coordinates();
        if coords > SIGN_ENUMERATION_CAP {
            return Err(SpaceError::EnumerationCap {
                coords,
                cap: SIGN_ENUMERATION_CAP,
            });
        }
        Ok(SignPatterns {
            profile: profile.to_vec(),
            dims: self.index_box.dims().to_vec(),
            next: 0,
            end: 1u64 << coords,
        })
    }

    /// A random member: uniform signs and a random nonnegative unit profile.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ExtremePoint {
        let mut profile: Vec<f64> = (0..self.index_box.blocks())
            .map(|_| rng.random::<f64>())
            .collect();
        // sparse profiles concentrate mass and are the interesting ones
        if profile.len() > 1 && rng.random_bool(0.5) {
            let keep = rng.random_range(1..=profile.len());
            let start = rng.random_range(0..=profile.len() - keep);
            for (j, a) in profile.iter_mut().enumerate() {
                if j < start || j >= start + keep {
                    *a = 0.0;
                }
            }
        }
        normalize_profile(&mut profile, self.q);
        let signs = self
            .index_box
            .dims()
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
                    .collect()
            })
            .collect();
        ExtremePoint { profile, signs }
    }
}

/// Rescales a nonnegative profile to unit `ℓ_q` norm (all-zero becomes `e_1`).
pub(crate) fn normalize_profile(profile: &mut [f64], q: f64) {
    let norm = lp_norm(profile, Exponent::Finite(q));
    if norm == 0.0 {
        profile[0] = 1.0;
        return;
    }
    for a in profile.iter_mut() {
        *a /= norm;
    }
}

/// Iterator over the sign patterns of one profile.
#[derive(Debug, Clone)]
pub struct SignPatterns {
    profile: Vec<f64>,
    dims: Vec<usize>,
    next: u64,
    end: u64,
}

impl Iterator for SignPatterns {
    type Item = ExtremePoint;

    fn next(&mut self) -> Option<ExtremePoint> {
        if self.next == self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let mut bit = 0;
        let signs = self
            .dims
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| {
                        let s = if mask >> bit & 1 == 1 { -1 } else { 1 };
                        bit += 1;
                        s
                    })
                    .collect()
            })
            .collect();
        Some(ExtremePoint {
            profile: self.profile.clone(),
            signs,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for SignPatterns {}
