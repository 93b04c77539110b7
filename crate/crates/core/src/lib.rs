//! Greedy bases in mixed-norm sequence spaces `ℓ_q(ℓ_p^N)`.
//!
//! - [`space`]: exponents, sparse vectors and exact mixed norms.
//! - [`construction`]: the level family of flat vectors, compressed norms and
//!   the averaging projections.
//! - [`greedy`]: thresholding approximants, best `n`-term errors and
//!   Lebesgue-type ratios against a finite basis.
//! - [`analysis`]: unconditional, suppression and democracy constants,
//!   property (A) and the non-democracy demo.
//! - [`maximal`]: the discrete Hardy–Littlewood maximal operator.
//! - [`experiments`]: named experiments with JSON and CSV reports.

pub mod analysis;
pub mod construction;
pub mod experiments;
pub mod greedy;
pub mod maximal;
pub mod sampling;
pub mod space;

pub use analysis::{ConstantsReport, Method, Mode, PropertyAReport};
pub use construction::{BasisElementId, ConstructionError, ConstructionParams, FamilyBasis, Projection};
pub use experiments::{Experiment, ExperimentConfig, OutputFormat, Report};
pub use greedy::{BasisNorm, FiniteBasis, GreedyError, GreedySelection, LebesgueRecord, TieMode};
pub use sampling::SamplerConfig;
pub use space::{norm, Exponent, MixedIndex, SpaceError, SpaceSpec, SparseVector};
