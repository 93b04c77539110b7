//! The level construction of a normalized, 1-unconditional and almost
//! isometrically democratic basic sequence in `ℓ_q(ℓ_p^N)`.
//!
//! Level `i` carries `n_N / n_i` flat vectors `x_(i,j)`, each spread with
//! equal weight over `n_i` consecutive outer blocks in inner coordinate `i`.
//! The `n_i` grow multiplicatively, so everything here that touches more
//! than a few subsets works on the compressed run representation of
//! [`combination_norm_q_power`] instead of dense vectors.

mod family;
mod params;
mod projection;

use thiserror::Error;

use crate::greedy::BasisNorm;
use crate::space::{Exponent, MixedIndex, SpaceError};

pub use family::{
    basis_vector, combination_norm_q_power, family_size, subset_norm, y_vector, BasisElementId,
    SubsetNormCertificate,
};
pub use params::{
    choose_epsilons, level_conditions, product_margins, select_parameters, BuildOptions,
    ConstructionParams, DEFAULT_CAPACITY, EPS_SCALE, STRICT_GUARD,
};
pub use projection::{
    apply, apply_t_x, apply_t_y, operator_norm_lower_bound, OperatorNormEstimate, Projection,
    SampleKind,
};

/// Largest number of coordinates a dense vector may be materialized with.
pub const DENSE_CAP: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("target epsilon {0} must lie in (0, 1)")]
    InvalidTarget(f64),
    #[error("outer exponent q = {0} must be finite and > 1")]
    InvalidQ(f64),
    #[error("the construction needs at least one level")]
    NoLevels,
    #[error("m_i and k_i must be positive integers")]
    NonPositive,
    #[error(
        "level {level} needs {} outer blocks, above the capacity of {capacity}; \
         use a larger epsilon or fewer levels",
        required.map_or_else(|| "an unbounded number of".to_string(), |r| r.to_string())
    )]
    Capacity {
        level: usize,
        required: Option<u128>,
        capacity: u64,
    },
    #[error("no element {0:?} in this family")]
    InvalidId(BasisElementId),
    #[error("element {0:?} listed twice")]
    DuplicateId(BasisElementId),
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("materializing {coords} coordinates exceeds the dense cap of {cap}")]
    DenseCap { coords: u64, cap: u64 },
    #[error("support index {0} is outside the N x n_N rectangle")]
    OutsideRectangle(MixedIndex),
    #[error("malformed parameter document: {0}")]
    Document(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// The family `(x_(i,j))` viewed as a basis: coefficient vectors follow the
/// level-major order of [`ConstructionParams::ids`], norms are compressed.
#[derive(Debug, Clone)]
pub struct FamilyBasis {
    params: ConstructionParams,
    p: Exponent,
    ids: Vec<BasisElementId>,
}

impl FamilyBasis {
    pub fn new(params: ConstructionParams, p: Exponent) -> Self {
        let ids = params.ids().collect();
        FamilyBasis { params, p, ids }
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn id(&self, index: usize) -> BasisElementId {
        self.ids[index]
    }
}

impl BasisNorm for FamilyBasis {
    fn dim(&self) -> usize {
        self.ids.len()
    }

    fn combination_norm(&self, terms: &[(usize, f64)]) -> f64 {
        let terms: Vec<_> = terms
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|&(k, c)| (self.ids[k], c))
            .collect();
        combination_norm_q_power(&self.params, &terms, self.p).powf(1.0 / self.params.q())
    }

    fn is_lattice(&self) -> bool {
        true
    }
}
