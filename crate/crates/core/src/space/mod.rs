//! Mixed-norm sequence spaces `ℓ_q(ℓ_p^N)` and `(⊕ ℓ_p^n)_{ℓ_q}`.
//!
//! A [`SpaceSpec`] fixes the inner exponent `p`, the outer exponent `q` and
//! the dimension of every outer block. Vectors are [`SparseVector`]s indexed
//! by [`MixedIndex`] `(i, n)` = (inner coordinate, outer block), and the norm
//! is the outer `ℓ_q` norm of the inner `ℓ_p` block norms.

mod exponent;
mod extreme;
mod vector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exponent::{dual_exponent, lp_dual, lp_norm, Exponent};
pub use extreme::{extreme_points, ExtremeFamily, ExtremePoint, IndexBox, SignPatterns};
pub use vector::{project, MixedIndex, SparseVector};

/// Comparison tolerance used for norm identities throughout the crate.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("invalid exponent {0}: must be >= 1 or inf")]
    InvalidExponent(f64),
    #[error("cannot parse exponent {0:?}")]
    InvalidExponentText(String),
    #[error("invalid block rule: {0}")]
    InvalidBlocks(String),
    #[error("index {index} is outside the space: block {} has dimension {dim}", index.n)]
    InvalidIndex { index: MixedIndex, dim: usize },
    #[error("unsupported space: {0}")]
    Unsupported(String),
    #[error("invalid outer profile: {0}")]
    InvalidProfile(String),
    #[error("enumeration over {coords} coordinates exceeds the cap of {cap}; use sampling")]
    EnumerationCap { coords: usize, cap: usize },
    #[error("malformed vector document: {0}")]
    Document(String),
}

/// Dimension of each outer block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockRule {
    /// Every block has dimension `N` (`ℓ_q(ℓ_p^N)`).
    Uniform(usize),
    /// Block `n` has dimension `n` (`(⊕ ℓ_p^n)_{ℓ_q}`).
    Growing,
    /// Finitely many blocks with the listed dimensions.
    Explicit(Vec<usize>),
}

impl BlockRule {
    /// Dimension of block `n` (1-based), `None` when the block does not exist.
    pub fn dim(&self, n: u64) -> Option<usize> {
        if n == 0 {
            return None;
        }
        match self {
            BlockRule::Uniform(d) => Some(*d),
            BlockRule::Growing => usize::try_from(n).ok(),
            BlockRule::Explicit(dims) => {
                usize::try_from(n - 1).ok().and_then(|k| dims.get(k).copied())
            }
        }
    }

    fn validate(&self) -> Result<(), SpaceError> {
        match self {
            BlockRule::Uniform(0) => Err(SpaceError::InvalidBlocks("uniform dimension 0".into())),
            BlockRule::Explicit(dims) if dims.contains(&0) => Err(
                SpaceError::InvalidBlocks("explicit block of dimension 0".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Deserialize)]
struct RawSpec {
    p: Exponent,
    q: Exponent,
    blocks: BlockRule,
}

/// The norm of a mixed-norm sequence space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SpaceSpec {
    #[serde(rename = "p")]
    inner_p: Exponent,
    #[serde(rename = "q")]
    outer_q: Exponent,
    blocks: BlockRule,
}

impl TryFrom<RawSpec> for SpaceSpec {
    type Error = SpaceError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        SpaceSpec::new(raw.p, raw.q, raw.blocks)
    }
}

impl SpaceSpec {
    pub fn new(inner_p: Exponent, outer_q: Exponent, blocks: BlockRule) -> Result<Self, SpaceError> {
        blocks.validate()?;
        Ok(SpaceSpec {
            inner_p,
            outer_q,
            blocks,
        })
    }

    /// `ℓ_q(ℓ_p^N)`.
    pub fn uniform(inner_p: Exponent, outer_q: Exponent, dim: usize) -> Result<Self, SpaceError> {
        Self::new(inner_p, outer_q, BlockRule::Uniform(dim))
    }

    /// `(⊕_n ℓ_p^n)_{ℓ_q}`.
    pub fn growing(inner_p: Exponent, outer_q: Exponent) -> Self {
        SpaceSpec {
            inner_p,
            outer_q,
            blocks: BlockRule::Growing,
        }
    }

    pub fn explicit(
        inner_p: Exponent,
        outer_q: Exponent,
        dims: Vec<usize>,
    ) -> Result<Self, SpaceError> {
        Self::new(inner_p, outer_q, BlockRule::Explicit(dims))
    }

    /// The flat space `ℓ_p^d`: one block of dimension `d`.
    pub fn flat(p: Exponent, dim: usize) -> Result<Self, SpaceError> {
        Self::new(p, p, BlockRule::Explicit(vec![dim]))
    }

    pub fn inner_p(&self) -> Exponent {
        self.inner_p
    }

    pub fn outer_q(&self) -> Exponent {
        self.outer_q
    }

    pub fn blocks(&self) -> &BlockRule {
        &self.blocks
    }

    pub fn block_dim(&self, n: u64) -> Option<usize> {
        self.blocks.dim(n)
    }

    /// The space with both exponents replaced by their conjugates.
    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec {
            inner_p: self.inner_p.dual(),
            outer_q: self.outer_q.dual(),
            blocks: self.blocks.clone(),
        }
    }

    /// Same blocks, different exponents.
    pub fn with_exponents(&self, inner_p: Exponent, outer_q: Exponent) -> SpaceSpec {
        SpaceSpec {
            inner_p,
            outer_q,
            blocks: self.blocks.clone(),
        }
    }

    pub fn check_index(&self, index: MixedIndex) -> Result<(), SpaceError> {
        match self.block_dim(index.n) {
            Some(dim) if index.i >= 1 && index.i <= dim => Ok(()),
            dim => Err(SpaceError::InvalidIndex {
                index,
                dim: dim.unwrap_or(0),
            }),
        }
    }

    pub fn check_vector(&self, v: &SparseVector) -> Result<(), SpaceError> {
        v.support().try_for_each(|idx| self.check_index(idx))
    }

    /// Mixed norm of `v`; see [`norm`].
    pub fn norm(&self, v: &SparseVector) -> Result<f64, SpaceError> {
        norm(v, self)
    }
}

/// `(Σ_n (Σ_i |v(i,n)|^p)^{q/p})^{1/q}`, with max/sup for infinite exponents.
pub fn norm(v: &SparseVector, spec: &SpaceSpec) -> Result<f64, SpaceError> {
    spec.check_vector(v)?;
    Ok(norm_unchecked(v, spec.inner_p, spec.outer_q))
}

/// Mixed norm without index validation. Entries are grouped by outer block
/// using the block-major ordering of [`MixedIndex`].
pub fn norm_unchecked(v: &SparseVector, p: Exponent, q: Exponent) -> f64 {
    let mut block_norms = Vec::new();
    let mut block = Vec::new();
    let mut current = None;
    for (idx, c) in v.iter() {
        if current != Some(idx.n) {
            if !block.is_empty() {
                block_norms.push(lp_norm(&block, p));
                block.clear();
            }
            current = Some(idx.n);
        }
        block.push(c);
    }
    if !block.is_empty() {
        block_norms.push(lp_norm(&block, p));
    }
    lp_norm(&block_norms, q)
}

/// Norming functional on dense values split into outer blocks at
/// `block_starts` (ending with the length): `⟨w, v⟩ = ‖v‖` and `w` has norm
/// at most one in the dual space.
pub(crate) fn block_dual(values: &[f64], block_starts: &[usize], p: Exponent, q: Exponent) -> Vec<f64> {
    let block_norms: Vec<f64> = block_starts
        .windows(2)
        .map(|w| lp_norm(&values[w[0]..w[1]], p))
        .collect();
    let outer = lp_dual(&block_norms, q);
    let mut out = vec![0.0; values.len()];
    for (w, eta) in block_starts.windows(2).zip(outer) {
        if eta != 0.0 {
            for (o, u) in out[w[0]..w[1]].iter_mut().zip(lp_dual(&values[w[0]..w[1]], p)) {
                *o = eta * u;
            }
        }
    }
    out
}

/// `w` in the unit ball of the dual space with `⟨w, v⟩ = ‖v‖`, supported on
/// the support of `v`.
pub fn norming_functional(v: &SparseVector, p: Exponent, q: Exponent) -> SparseVector {
    let entries: Vec<(MixedIndex, f64)> = v.iter().collect();
    let mut starts = Vec::new();
    for (k, (idx, _)) in entries.iter().enumerate() {
        if k == 0 || entries[k - 1].0.n != idx.n {
            starts.push(k);
        }
    }
    starts.push(entries.len());
    let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let w = block_dual(&values, &starts, p, q);
    entries.iter().zip(w).filter(|(_, c)| *c != 0.0).map(|(e, c)| (e.0, c)).collect()
}

#[derive(Serialize, Deserialize)]
struct VectorDocument {
    spec: SpaceSpec,
    entries: Vec<(usize, u64, f64)>,
}

/// `{"spec": {...}, "entries": [[i, n, coeff], ...]}`, entries sorted by `(n, i)`.
pub fn vector_to_json(v: &SparseVector, spec: &SpaceSpec) -> String {
    let doc = VectorDocument {
        spec: spec.clone(),
        entries: v.iter().map(|(k, c)| (k.i, k.n, c)).collect(),
    };
    serde_json::to_string(&doc).expect("vector documents always serialize")
}

pub fn vector_from_json(text: &str) -> Result<(SpaceSpec, SparseVector), SpaceError> {
    let doc: VectorDocument =
        serde_json::from_str(text).map_err(|e| SpaceError::Document(e.to_string()))?;
    let mut v = SparseVector::new();
    for (i, n, c) in doc.entries {
        let index = MixedIndex::new(i, n);
        doc.spec.check_index(index)?;
        if v.get(index) != 0.0 {
            return Err(SpaceError::Document(format!("duplicate entry {index}")));
        }
        v.set(index, c);
    }
    Ok((doc.spec, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(i: usize, n: u64) -> MixedIndex {
        MixedIndex::new(i, n)
    }

    fn example_vector() -> SparseVector {
        SparseVector::from_entries([(idx(1, 1), 1.0), (idx(2, 1), 1.0), (idx(1, 2), 1.0)])
    }

    #[test]
    fn unit_vector_has_norm_one() {
        let exps = [Exponent::ONE, Exponent::Finite(1.5), Exponent::TWO, Exponent::Infinite];
        for p in exps {
            for q in exps {
                let spec = SpaceSpec::uniform(p, q, 3).unwrap();
                assert_eq!(norm(&SparseVector::unit(1, 1), &spec).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn l1_inside_l2_outside() {
        let spec = SpaceSpec::uniform(Exponent::ONE, Exponent::TWO, 2).unwrap();
        let v = example_vector();
        assert!((norm(&v, &spec).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        let keep = [idx(1, 1), idx(2, 1)].into_iter().collect();
        assert_eq!(norm(&v.project(&keep), &spec).unwrap(), 2.0);
    }

    #[test]
    fn infinite_exponents() {
        let v = SparseVector::from_entries([(idx(1, 1), 3.0), (idx(2, 1), -4.0), (idx(1, 2), 1.0)]);
        let pinf = SpaceSpec::uniform(Exponent::Infinite, Exponent::ONE, 2).unwrap();
        assert_eq!(norm(&v, &pinf).unwrap(), 5.0);
        let qinf = SpaceSpec::uniform(Exponent::TWO, Exponent::Infinite, 2).unwrap();
        assert_eq!(norm(&v, &qinf).unwrap(), 5.0);
    }

    #[test]
    fn invalid_index_is_named() {
        let spec = SpaceSpec::uniform(Exponent::TWO, Exponent::TWO, 2).unwrap();
        let err = norm(&SparseVector::unit(3, 7), &spec).unwrap_err();
        assert_eq!(
            err,
            SpaceError::InvalidIndex {
                index: idx(3, 7),
                dim: 2
            }
        );
        let growing = SpaceSpec::growing(Exponent::TWO, Exponent::TWO);
        assert!(norm(&SparseVector::unit(3, 2), &growing).is_err());
        assert!(norm(&SparseVector::unit(2, 2), &growing).is_ok());
        let explicit = SpaceSpec::explicit(Exponent::TWO, Exponent::TWO, vec![1, 2]).unwrap();
        assert!(norm(&SparseVector::unit(1, 3), &explicit).is_err());
        assert!(norm(&SparseVector::unit(0, 1), &explicit).is_err());
    }

    #[test]
    fn zero_block_dimensions_rejected() {
        assert!(SpaceSpec::uniform(Exponent::TWO, Exponent::TWO, 0).is_err());
        assert!(SpaceSpec::explicit(Exponent::TWO, Exponent::TWO, vec![2, 0]).is_err());
        let bad = r#"{"spec":{"p":2.0,"q":2.0,"blocks":{"uniform":0}},"entries":[]}"#;
        assert!(vector_from_json(bad).is_err());
    }

    #[test]
    fn json_layout() {
        let spec = SpaceSpec::uniform(Exponent::ONE, Exponent::Infinite, 2).unwrap();
        let v = SparseVector::from_entries([(idx(1, 2), 0.5), (idx(2, 1), -1.0)]);
        let text = vector_to_json(&v, &spec);
        assert_eq!(
            text,
            r#"{"spec":{"p":1.0,"q":"inf","blocks":{"uniform":2}},"entries":[[2,1,-1.0],[1,2,0.5]]}"#
        );
        let (spec2, v2) = vector_from_json(&text).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(v2, v);

        let growing = r#"{"spec":{"p":"inf","q":3,"blocks":"growing"},"entries":[[3,3,1.0]]}"#;
        let (s, _) = vector_from_json(growing).unwrap();
        assert_eq!(s.blocks(), &BlockRule::Growing);
        let out_of_range = r#"{"spec":{"p":2,"q":2,"blocks":"growing"},"entries":[[3,2,1.0]]}"#;
        assert!(matches!(
            vector_from_json(out_of_range),
            Err(SpaceError::InvalidIndex { .. })
        ));
    }
}
