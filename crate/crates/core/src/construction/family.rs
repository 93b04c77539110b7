use serde::{Deserialize, Serialize};

use super::{ConstructionError, ConstructionParams, DENSE_CAP};
use crate::space::{Exponent, MixedIndex, SpaceSpec, SparseVector};

/// `x_(i,j)`: level `i ∈ 1..=N`, window `j ∈ 1..=n_N/n_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisElementId {
    pub level: usize,
    pub position: u64,
}

impl BasisElementId {
    pub const fn new(level: usize, position: u64) -> Self {
        BasisElementId { level, position }
    }
}

impl ConstructionParams {
    /// The ambient `ℓ_q(ℓ_p^N)` for a chosen inner exponent.
    pub fn space(&self, p: Exponent) -> SpaceSpec {
        SpaceSpec::uniform(p, Exponent::Finite(self.q), self.levels).expect("N >= 1")
    }

    /// Number of windows on level `i`: `n_N / n_i`.
    pub fn windows(&self, level: usize) -> u64 {
        self.blocks() / self.block_len(level)
    }

    /// `M = Σ_i n_N / n_i`.
    pub fn family_size(&self) -> u64 {
        (1..=self.levels).map(|i| self.windows(i)).sum()
    }

    pub fn check_id(&self, id: BasisElementId) -> Result<(), ConstructionError> {
        if id.level >= 1
            && id.level <= self.levels
            && id.position >= 1
            && id.position <= self.windows(id.level)
        {
            Ok(())
        } else {
            Err(ConstructionError::InvalidId(id))
        }
    }

    /// Level-major enumeration order: all of level 1, then level 2, …
    pub fn id_at(&self, mut index: u64) -> Option<BasisElementId> {
        for level in 1..=self.levels {
            let w = self.windows(level);
            if index < w {
                return Some(BasisElementId::new(level, index + 1));
            }
            index -= w;
        }
        None
    }

    pub fn index_of(&self, id: BasisElementId) -> Result<u64, ConstructionError> {
        self.check_id(id)?;
        let before: u64 = (1..id.level).map(|l| self.windows(l)).sum();
        Ok(before + id.position - 1)
    }

    pub fn ids(&self) -> impl Iterator<Item = BasisElementId> + '_ {
        (1..=self.levels)
            .flat_map(move |level| (1..=self.windows(level)).map(move |j| BasisElementId::new(level, j)))
    }

    /// Outer blocks `[(j-1)n_i + 1, j n_i]` covered by `x_(i,j)`.
    pub fn window(&self, id: BasisElementId) -> (u64, u64) {
        let len = self.block_len(id.level);
        ((id.position - 1) * len + 1, id.position * len)
    }

    fn check_dense(&self, coords: u64) -> Result<(), ConstructionError> {
        if coords > DENSE_CAP {
            Err(ConstructionError::DenseCap {
                coords,
                cap: DENSE_CAP,
            })
        } else {
            Ok(())
        }
    }
}

/// `x_(i,j) = n_i^{-1/q} Σ_{s=1}^{n_i} e_(i, s+(j-1)n_i)`.
pub fn basis_vector(
    params: &ConstructionParams,
    id: BasisElementId,
) -> Result<SparseVector, ConstructionError> {
    params.check_id(id)?;
    let len = params.block_len(id.level);
    params.check_dense(len)?;
    let value = (len as f64).powf(-1.0 / params.q);
    let (start, end) = params.window(id);
    Ok((start..=end)
        .map(|n| (MixedIndex::new(id.level, n), value))
        .collect())
}

pub fn family_size(params: &ConstructionParams) -> u64 {
    params.family_size()
}

/// `y_i = n_N^{-1/q} Σ_{j ≤ n_N} e_(i,j)`, an isometric copy of the unit
/// vector basis of `ℓ_p^N` for every `p`.
pub fn y_vector(params: &ConstructionParams, level: usize) -> Result<SparseVector, ConstructionError> {
    if level == 0 || level > params.levels {
        return Err(ConstructionError::InvalidId(BasisElementId::new(level, 1)));
    }
    let nn = params.blocks();
    params.check_dense(nn)?;
    let value = (nn as f64).powf(-1.0 / params.q);
    Ok((1..=nn).map(|n| (MixedIndex::new(level, n), value)).collect())
}

/// `‖Σ c_a x_a‖^q` without materializing the `N × n_N` rectangle.
///
/// Each level contributes at most one coordinate per outer block, so the
/// outer blocks split into runs on which the set of active levels (and
/// their coefficients) is constant; a run of length `ℓ` contributes
/// `ℓ · (Σ_active |c_i|^p n_i^{-p/q})^{q/p}`.
pub fn combination_norm_q_power(
    params: &ConstructionParams,
    terms: &[(BasisElementId, f64)],
    p: Exponent,
) -> f64 {
    let q = params.q;
    // (block coordinate, level, magnitude); magnitude < 0 marks a window end
    let mut events: Vec<(u64, usize, f64)> = Vec::with_capacity(2 * terms.len());
    for &(id, c) in terms {
        if c == 0.0 {
            continue;
        }
        let (start, end) = params.window(id);
        let scale = (params.block_len(id.level) as f64).powf(-1.0 / q);
        events.push((start, id.level, c.abs() * scale));
        events.push((end + 1, id.level, -1.0));
    }
    // ends sort before starts at the same coordinate
    events.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.2.total_cmp(&b.2)));

    let mut active = vec![0.0_f64; params.levels + 1];
    let mut live = 0usize;
    let mut total = 0.0;
    let mut prev = 0u64;
    for &(at, level, mag) in &events {
        if live > 0 && at > prev {
            total += (at - prev) as f64 * run_power(&active, p, q);
        }
        prev = at;
        if mag < 0.0 {
            active[level] = 0.0;
            live -= 1;
        } else {
            active[level] = mag;
            live += 1;
        }
    }
    total
}

/// `(‖(a_i)‖_p)^q` for the coordinate values active on one run.
fn run_power(active: &[f64], p: Exponent, q: f64) -> f64 {
    match p {
        Exponent::Infinite => active.iter().fold(0.0_f64, |m, a| m.max(*a)).powf(q),
        Exponent::Finite(p) => {
            let s: f64 = active.iter().filter(|a| **a > 0.0).map(|a| a.powf(p)).sum();
            s.powf(q / p)
        }
    }
}

/// `‖Σ_{a∈A} x_a‖^q` against the two-sided democracy window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetNormCertificate {
    #[serde(rename = "A")]
    pub elements: Vec<BasisElementId>,
    pub p: Exponent,
    pub exact_norm_q_power: f64,
    pub lower: f64,
    pub upper: f64,
    pub verdict: bool,
}

impl SubsetNormCertificate {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("certificates always serialize")
    }
}

/// Certificate for `(1-ε)|A| ≤ ‖Σ_{a∈A} x_a‖^q ≤ (1+ε)|A|`.
pub fn subset_norm(
    params: &ConstructionParams,
    elements: &[BasisElementId],
    p: Exponent,
) -> Result<SubsetNormCertificate, ConstructionError> {
    if elements.is_empty() {
        return Err(ConstructionError::EmptySubset);
    }
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(ConstructionError::DuplicateId(w[0]));
        }
    }
    for &id in &sorted {
        params.check_id(id)?;
    }
    let terms: Vec<_> = sorted.iter().map(|&id| (id, 1.0)).collect();
    let value = combination_norm_q_power(params, &terms, p);
    let size = sorted.len() as f64;
    let lower = (1.0 - params.target_eps) * size;
    let upper = (1.0 + params.target_eps) * size;
    Ok(SubsetNormCertificate {
        elements: sorted,
        p,
        exact_norm_q_power: value,
        lower,
        upper,
        verdict: lower <= value && value <= upper,
    })
}
