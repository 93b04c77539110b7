use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::GreedyError;
use crate::space::{block_dual, lp_norm, Exponent, MixedIndex, SpaceSpec, SparseVector};

/// Norm of finite expansions `Σ c_k x_k` in a fixed basis.
///
/// Everything that measures greedy, unconditional or democracy constants
/// only needs this, so the same code runs on explicit bases and on the
/// compressed level family.
pub trait BasisNorm: Sync {
    /// Number of basis elements.
    fn dim(&self) -> usize;

    /// `‖Σ c_k x_k‖` for sparse `(k, c_k)` terms; indices are distinct.
    fn combination_norm(&self, terms: &[(usize, f64)]) -> f64;

    /// Disjointly supported elements of a lattice norm: every sign change and
    /// every coordinate projection is an isometry/contraction.
    fn is_lattice(&self) -> bool;

    fn coefficient_norm(&self, coeffs: &[f64]) -> f64 {
        let terms: Vec<_> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &c)| (k, c))
            .collect();
        self.combination_norm(&terms)
    }

    /// A subgradient of `c ↦ ‖Σ c_k x_k‖` at `coeffs`, when available.
    fn coefficient_subgradient(&self, _coeffs: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Radius `R` with `|δ|_2 ≤ R` whenever `‖Σ_{k∈set} δ_k x_k‖ ≤ bound`,
    /// when available.
    fn coefficient_radius(&self, _set: &[usize], _bound: f64) -> Option<f64> {
        None
    }

    /// `‖Σ_{k∈A} x_k‖`.
    fn indicator_norm(&self, set: &[usize]) -> f64 {
        let terms: Vec<_> = set.iter().map(|&k| (k, 1.0)).collect();
        self.combination_norm(&terms)
    }
}

impl<B: BasisNorm + ?Sized> BasisNorm for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn combination_norm(&self, terms: &[(usize, f64)]) -> f64 {
        (**self).combination_norm(terms)
    }
    fn is_lattice(&self) -> bool {
        (**self).is_lattice()
    }
    fn coefficient_subgradient(&self, coeffs: &[f64]) -> Option<Vec<f64>> {
        (**self).coefficient_subgradient(coeffs)
    }
    fn coefficient_radius(&self, set: &[usize], bound: f64) -> Option<f64> {
        (**self).coefficient_radius(set, bound)
    }
}

/// Tolerance for normalization and biorthogonality of explicit bases.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
enum Duals {
    /// Coefficient `k` is read off one coordinate of `x_k` and rescaled.
    Pivots(Vec<(usize, f64)>),
    /// Rows of the left inverse `(EᵀE)^{-1}Eᵀ` on the joint support.
    Matrix(DMatrix<f64>),
}

/// Normalized vectors of a mixed-norm space together with their
/// coefficient functionals.
#[derive(Debug, Clone)]
pub struct FiniteBasis {
    spec: SpaceSpec,
    elements: Vec<SparseVector>,
    disjoint: bool,
    /// Joint support in block-major order.
    coords: Vec<MixedIndex>,
    slot_of: BTreeMap<MixedIndex, usize>,
    /// Start offsets of each outer block within `coords`, plus the end.
    block_starts: Vec<usize>,
    entries: Vec<Vec<(usize, f64)>>,
    duals: Duals,
}

impl FiniteBasis {
    pub fn new(elements: Vec<SparseVector>, spec: SpaceSpec) -> Result<Self, GreedyError> {
        if elements.is_empty() {
            return Err(GreedyError::EmptyBasis);
        }
        for (k, e) in elements.iter().enumerate() {
            let nrm = spec.norm(e)?;
            if (nrm - 1.0).abs() > BASIS_TOL {
                return Err(GreedyError::NotNormalized { index: k, norm: nrm });
            }
        }
        let mut slot_of = BTreeMap::new();
        for e in &elements {
            for idx in e.support() {
                slot_of.entry(idx).or_insert(0);
            }
        }
        let coords: Vec<MixedIndex> = slot_of.keys().copied().collect();
        for (slot, idx) in coords.iter().enumerate() {
            slot_of.insert(*idx, slot);
        }
        let mut block_starts = Vec::new();
        for (slot, idx) in coords.iter().enumerate() {
            if slot == 0 || coords[slot - 1].n != idx.n {
                block_starts.push(slot);
            }
        }
        block_starts.push(coords.len());
        let entries: Vec<Vec<(usize, f64)>> = elements
            .iter()
            .map(|e| e.iter().map(|(idx, c)| (slot_of[&idx], c)).collect())
            .collect();
        let disjoint = elements.iter().map(|e| e.len()).sum::<usize>() == coords.len();

        let duals = if disjoint {
            Duals::Pivots(
                entries
                    .iter()
                    .map(|row| {
                        *row.iter()
                            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                            .expect("normalized elements are nonzero")
                    })
                    .collect(),
            )
        } else {
            let e = DMatrix::from_fn(coords.len(), elements.len(), |r, c| {
                elements[c].get(coords[r])
            });
            let gram = e.transpose() * &e;
            let inv = gram.try_inverse().ok_or(GreedyError::Singular)?;
            let left = inv * e.transpose();
            let check = &left * &e;
            let dev = (check - DMatrix::identity(elements.len(), elements.len())).amax();
            if dev > BASIS_TOL {
                return Err(GreedyError::NotBiorthogonal(dev));
            }
            Duals::Matrix(left)
        };

        Ok(FiniteBasis {
            spec,
            elements,
            disjoint,
            coords,
            slot_of,
            block_starts,
            entries,
            duals,
        })
    }

    /// Rescales every vector to norm one first.
    pub fn normalized(vectors: Vec<SparseVector>, spec: SpaceSpec) -> Result<Self, GreedyError> {
        let elements = vectors
            .into_iter()
            .map(|v| {
                let nrm = spec.norm(&v)?;
                if nrm == 0.0 {
                    Err(GreedyError::EmptyBasis)
                } else {
                    Ok(v.scaled(1.0 / nrm))
                }
            })
            .collect::<Result<Vec<_>, GreedyError>>()?;
        Self::new(elements, spec)
    }

    /// Unit vectors `e_idx` for the listed indices, in that order.
    pub fn canonical(spec: SpaceSpec, indices: &[MixedIndex]) -> Result<Self, GreedyError> {
        let elements = indices
            .iter()
            .map(|idx| SparseVector::unit(idx.i, idx.n))
            .collect();
        Self::new(elements, spec)
    }

    /// Unit vector basis of `ℓ_p^d`.
    pub fn canonical_flat(p: Exponent, dim: usize) -> Result<Self, GreedyError> {
        let spec = SpaceSpec::flat(p, dim)?;
        let indices: Vec<_> = (1..=dim).map(|i| MixedIndex::new(i, 1)).collect();
        Self::canonical(spec, &indices)
    }

    /// Unit vector basis of the first `blocks` blocks of `spec`, block by block.
    pub fn canonical_blocks(spec: SpaceSpec, blocks: u64) -> Result<Self, GreedyError> {
        let mut indices = Vec::new();
        for n in 1..=blocks {
            let dim = spec.block_dim(n).ok_or(GreedyError::Space(
                crate::space::SpaceError::InvalidIndex {
                    index: MixedIndex::new(1, n),
                    dim: 0,
                },
            ))?;
            indices.extend((1..=dim).map(|i| MixedIndex::new(i, n)));
        }
        Self::canonical(spec, &indices)
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn elements(&self) -> &[SparseVector] {
        &self.elements
    }

    pub fn disjoint_supports(&self) -> bool {
        self.disjoint
    }

    /// `Σ c_k x_k`.
    pub fn synthesize(&self, coeffs: &[f64]) -> SparseVector {
        let mut out = SparseVector::new();
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                out.add_scaled(c, &self.elements[k]);
            }
        }
        out
    }

    /// Coefficient functionals `x_k^*(x)`; fails if `x` is not in the span.
    pub fn coefficients(&self, x: &SparseVector) -> Result<Vec<f64>, GreedyError> {
        let mut dense = vec![0.0; self.coords.len()];
        for (idx, c) in x.iter() {
            match self.slot_of.get(&idx) {
                Some(&slot) => dense[slot] = c,
                None => return Err(GreedyError::NotInSpan(idx)),
            }
        }
        let coeffs: Vec<f64> = match &self.duals {
            Duals::Pivots(pivots) => pivots.iter().map(|&(slot, v)| dense[slot] / v).collect(),
            Duals::Matrix(left) => {
                let col = nalgebra::DVector::from_vec(dense.clone());
                (left * col).iter().copied().collect()
            }
        };
        // reconstruction check: x must equal Σ c_k x_k
        let mut rebuilt = vec![0.0; self.coords.len()];
        self.accumulate(&mut rebuilt, coeffs.iter().copied().enumerate());
        let scale = dense.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if let Some(slot) = (0..dense.len()).find(|&s| (rebuilt[s] - dense[s]).abs() > 1e-9 * scale) {
            return Err(GreedyError::NotInSpan(self.coords[slot]));
        }
        Ok(coeffs)
    }

    /// Largest deviation of `x_j^*(x_k)` from `δ_jk`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (k, e) in self.elements.iter().enumerate() {
            let c = self.coefficients(e).unwrap_or_else(|_| vec![f64::INFINITY]);
            for (j, v) in c.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    fn accumulate(&self, buf: &mut [f64], terms: impl Iterator<Item = (usize, f64)>) {
        for (k, c) in terms {
            if c != 0.0 {
                for &(slot, v) in &self.entries[k] {
                    buf[slot] += c * v;
                }
            }
        }
    }
}

impl BasisNorm for FiniteBasis {
    fn dim(&self) -> usize {
        self.elements.len()
    }

    fn combination_norm(&self, terms: &[(usize, f64)]) -> f64 {
        let mut buf = vec![0.0; self.coords.len()];
        self.accumulate(&mut buf, terms.iter().copied());
        let p = self.spec.inner_p();
        let blocks: Vec<f64> = self
            .block_starts
            .windows(2)
            .map(|w| lp_norm(&buf[w[0]..w[1]], p))
            .collect();
        lp_norm(&blocks, self.spec.outer_q())
    }

    fn is_lattice(&self) -> bool {
        self.disjoint
    }

    /// `Eᵀ w` for the norming functional `w` of `Σ c_k x_k`.
    fn coefficient_subgradient(&self, coeffs: &[f64]) -> Option<Vec<f64>> {
        let mut buf = vec![0.0; self.coords.len()];
        self.accumulate(&mut buf, coeffs.iter().copied().enumerate());
        let w = block_dual(&buf, &self.block_starts, self.spec.inner_p(), self.spec.outer_q());
        Some(
            self.entries
                .iter()
                .map(|row| row.iter().map(|&(slot, v)| w[slot] * v).sum())
                .collect(),
        )
    }

    /// Every mixed norm dominates `‖·‖_∞ ≥ ‖·‖_2 / √d`, so
    /// `|δ|_2 ≤ √d · bound / s_min(E_set)`.
    fn coefficient_radius(&self, set: &[usize], bound: f64) -> Option<f64> {
        let e = DMatrix::from_fn(self.coords.len(), set.len(), |r, c| self.elements[set[c]].get(self.coords[r]));
        let s_min = e.singular_values().min();
        (s_min > 0.0).then(|| (self.coords.len() as f64).sqrt() * bound / s_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::norm;

    fn skewed() -> FiniteBasis {
        let spec = SpaceSpec::flat(Exponent::TWO, 2).unwrap();
        let e1 = SparseVector::unit(1, 1);
        let diag = SparseVector::from_entries([
            (MixedIndex::new(1, 1), 1.0),
            (MixedIndex::new(2, 1), 1.0),
        ]);
        FiniteBasis::normalized(vec![e1, diag], spec).unwrap()
    }

    #[test]
    fn canonical_coefficients_are_coordinates() {
        let b = FiniteBasis::canonical_flat(Exponent::Finite(3.0), 4).unwrap();
        assert!(b.disjoint_supports() && b.is_lattice());
        let c = vec![0.5, -2.0, 0.0, 1.0];
        let x = b.synthesize(&c);
        assert_eq!(b.coefficients(&x).unwrap(), c);
        assert!((b.coefficient_norm(&c) - norm(&x, b.spec()).unwrap()).abs() < 1e-15);
        assert_eq!(b.biorthogonality_defect(), 0.0);
    }

    #[test]
    fn non_disjoint_basis_uses_matrix_duals() {
        let b = skewed();
        assert!(!b.disjoint_supports());
        assert!(b.biorthogonality_defect() < 1e-12);
        let c = vec![1.5, -0.25];
        let got = b.coefficients(&b.synthesize(&c)).unwrap();
        assert!((got[0] - c[0]).abs() < 1e-12 && (got[1] - c[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = SpaceSpec::flat(Exponent::TWO, 2).unwrap();
        let twice = SparseVector::unit(1, 1).scaled(2.0);
        assert!(matches!(
            FiniteBasis::new(vec![twice], spec.clone()),
            Err(GreedyError::NotNormalized { index: 0, .. })
        ));
        let e1 = SparseVector::unit(1, 1);
        assert!(matches!(
            FiniteBasis::new(vec![e1.clone(), e1.clone()], spec.clone()),
            Err(GreedyError::Singular) | Err(GreedyError::NotBiorthogonal(_))
        ));
        let b = FiniteBasis::new(vec![e1], spec).unwrap();
        assert!(matches!(
            b.coefficients(&SparseVector::unit(2, 1)),
            Err(GreedyError::NotInSpan(_))
        ));
    }

    #[test]
    fn span_check_catches_off_ratio_vectors() {
        let spec = SpaceSpec::flat(Exponent::TWO, 2).unwrap();
        let v = SparseVector::from_entries([(MixedIndex::new(1, 1), 1.0), (MixedIndex::new(2, 1), 1.0)]);
        let b = FiniteBasis::normalized(vec![v], spec).unwrap();
        let off = SparseVector::from_entries([(MixedIndex::new(1, 1), 1.0), (MixedIndex::new(2, 1), 2.0)]);
        assert!(b.coefficients(&off).is_err());
    }
}
