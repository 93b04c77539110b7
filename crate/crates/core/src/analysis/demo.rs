//! Canonical bases of `(⊕ ℓ_p^n)_{ℓ_1}` and `(⊕ ℓ_p^n)_{c_0}` are not
//! democratic: `m` coordinates inside one block and one coordinate in each of
//! `m` blocks have fundamental values growing at different rates.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::space::{norm_unchecked, Exponent, MixedIndex, SparseVector};

/// Largest `m` accepted by [`nondemocracy_demo`].
pub const DEMO_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumType {
    L1,
    C0,
}

impl SumType {
    pub fn outer(self) -> Exponent {
        match self {
            SumType::L1 => Exponent::ONE,
            SumType::C0 => Exponent::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub p: Exponent,
    pub sum_type: SumType,
    pub m: usize,
    /// `‖Σ_{i ≤ m} e_(i, m)‖`, all inside block `m`.
    pub within: f64,
    /// `‖Σ_{n ≤ m} e_(1, n)‖`, one per block.
    pub across: f64,
    /// Larger over smaller of the two.
    pub ratio: f64,
    /// `m^{1−1/p}` for `ℓ_1` sums, `m^{1/p}` for `c_0` sums.
    pub predicted: f64,
}

pub fn nondemocracy_demo(p: Exponent, sum_type: SumType, m: usize) -> Result<DemoReport, AnalysisError> {
    if m == 0 {
        return Err(AnalysisError::InvalidSize { m, dim: DEMO_BUDGET });
    }
    if m > DEMO_BUDGET {
        return Err(AnalysisError::Budget { m, budget: DEMO_BUDGET });
    }
    let q = sum_type.outer();
    let within: SparseVector = (1..=m).map(|i| (MixedIndex::new(i, m as u64), 1.0)).collect();
    let across: SparseVector = (1..=m as u64).map(|n| (MixedIndex::new(1, n), 1.0)).collect();
    let within = norm_unchecked(&within, p, q);
    let across = norm_unchecked(&across, p, q);
    let mf = m as f64;
    let inv_p = p.finite().map_or(0.0, |p| 1.0 / p);
    let predicted = match sum_type {
        SumType::L1 => mf.powf(1.0 - inv_p),
        SumType::C0 => mf.powf(inv_p),
    };
    Ok(DemoReport {
        p,
        sum_type,
        m,
        within,
        across,
        ratio: within.max(across) / within.min(across),
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let r = nondemocracy_demo(Exponent::TWO, SumType::L1, 100).unwrap();
        assert_eq!((r.within, r.across, r.ratio), (10.0, 100.0, 10.0));
        let r = nondemocracy_demo(Exponent::TWO, SumType::C0, 100).unwrap();
        assert_eq!((r.within, r.across, r.ratio), (10.0, 1.0, 10.0));
        for m in [1, 7, 50] {
            let r = nondemocracy_demo(Exponent::ONE, SumType::L1, m).unwrap();
            assert_eq!(r.ratio, 1.0);
        }
        assert!(nondemocracy_demo(Exponent::TWO, SumType::L1, 0).is_err());
        assert!(nondemocracy_demo(Exponent::TWO, SumType::L1, DEMO_BUDGET + 1).is_err());
    }

    #[test]
    fn ratio_tracks_prediction() {
        for sum in [SumType::L1, SumType::C0] {
            for p in [Exponent::Finite(1.5), Exponent::Finite(3.0), Exponent::Infinite] {
                let r = nondemocracy_demo(p, sum, 64).unwrap();
                assert!((r.ratio - r.predicted).abs() < 1e-9 * r.predicted, "{r:?}");
            }
        }
    }
}
