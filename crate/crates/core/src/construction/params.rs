use serde::{Deserialize, Serialize};

use super::ConstructionError;

/// `ε_i = EPS_SCALE · ε · 2^{-(i-1)}`.
///
/// With `Σ ε_i < 2·EPS_SCALE·ε`, `∏(1+ε_i) ≤ exp(2ε/3) < 1+ε` and
/// `∏(1-ε_i) ≥ 1 - 2ε/3 > 1-ε` for every `ε ∈ (0,1)` and every length.
pub const EPS_SCALE: f64 = 1.0 / 3.0;

/// Conditions i–iv are checked as `lhs < rhs - STRICT_GUARD`.
pub const STRICT_GUARD: f64 = 1e-12;

/// Default cap on `n_N`, the number of virtual outer blocks.
pub const DEFAULT_CAPACITY: u64 = 1_000_000_000;

/// Decreasing level tolerances `(ε_i)` whose products stay inside `(1-ε, 1+ε)`.
pub fn choose_epsilons(target_eps: f64, levels: usize) -> Result<Vec<f64>, ConstructionError> {
    if !(target_eps > 0.0 && target_eps < 1.0) {
        return Err(ConstructionError::InvalidTarget(target_eps));
    }
    if levels == 0 {
        return Err(ConstructionError::NoLevels);
    }
    Ok((0..levels)
        .map(|i| EPS_SCALE * target_eps * 0.5f64.powi(i as i32))
        .collect())
}

/// `((1+ε) - ∏(1+ε_i), ∏(1-ε_i) - (1-ε))`; both positive when the
/// sequence is admissible.
pub fn product_margins(eps_seq: &[f64], target_eps: f64) -> (f64, f64) {
    let up: f64 = eps_seq.iter().map(|e| 1.0 + e).product();
    let down: f64 = eps_seq.iter().map(|e| 1.0 - e).product();
    ((1.0 + target_eps) - up, down - (1.0 - target_eps))
}

/// Which of the four level conditions hold for `(m, k)` at tolerance `eps`.
///
/// i) `1/ε < m`, ii) `m^{1/q} + 1 < (1+ε)^{1/q} m^{1/q}`,
/// iii) `(1 + (m/k)^{1/q})^q < 1+ε`, iv) `1-ε < (1 - (m/k)^{1/q})^q`.
pub fn level_conditions(q: f64, eps: f64, m: u64, k: u64) -> [bool; 4] {
    let (mf, kf) = (m as f64, k as f64);
    let r = 1.0 / q;
    let ratio = (mf / kf).powf(r);
    [
        1.0 / eps < mf - STRICT_GUARD,
        mf.powf(r) + 1.0 < (1.0 + eps).powf(r) * mf.powf(r) - STRICT_GUARD,
        (1.0 + ratio).powf(q) < 1.0 + eps - STRICT_GUARD,
        ratio < 1.0 && 1.0 - eps < (1.0 - ratio).powf(q) - STRICT_GUARD,
    ]
}

fn m_ok(q: f64, eps: f64, m: u64) -> bool {
    let c = level_conditions(q, eps, m, u64::MAX);
    c[0] && c[1]
}

fn k_ok(q: f64, eps: f64, m: u64, k: u64) -> bool {
    let c = level_conditions(q, eps, m, k);
    c[2] && c[3]
}

/// Smallest integer in `1..=limit` satisfying a monotone predicate.
///
/// The analytic threshold estimate seeds a bracket; bisection then pins the
/// exact first integer, so the result equals an ascending scan from 1.
fn minimal_integer<F: Fn(u64) -> bool>(estimate: f64, limit: u64, ok: F) -> Option<u64> {
    if ok(1) {
        return Some(1);
    }
    if !estimate.is_finite() || estimate > limit as f64 {
        return None;
    }
    let start = (estimate.floor().max(1.0) as u64).clamp(1, limit);
    // lo always fails, hi always passes
    let (mut lo, mut hi) = if ok(start) {
        let mut lo = start;
        while lo > 1 && ok(lo) {
            lo /= 2;
        }
        (lo.max(1), start)
    } else {
        let mut hi = start;
        let mut step = 1u64;
        while !ok(hi) {
            if hi == limit {
                return None;
            }
            hi = hi.saturating_add(step).min(limit);
            step = step.saturating_mul(2);
        }
        (start, hi)
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `(m, k, n)`, one entry per level.
pub type LevelSequences = (Vec<u64>, Vec<u64>, Vec<u64>);

/// `(m_i, k_i, n_i)` for every level: `m_1 = k_1 = 1`; for `i ≥ 2`, `m_i` is
/// the least integer satisfying i) and ii), then `k_i` the least satisfying
/// iii) and iv) for that `m_i`; `n_j = k_1 ⋯ k_j`.
pub fn select_parameters(
    q: f64,
    eps_seq: &[f64],
    capacity: u64,
) -> Result<LevelSequences, ConstructionError> {
    check_q(q)?;
    if eps_seq.is_empty() {
        return Err(ConstructionError::NoLevels);
    }
    if let Some(&bad) = eps_seq.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(ConstructionError::InvalidTarget(bad));
    }
    let (mut m, mut k, mut n) = (vec![1], vec![1], vec![1u64]);
    for (level, &eps) in eps_seq.iter().enumerate().skip(1) {
        let capacity_error = |required: Option<u128>| ConstructionError::Capacity {
            level: level + 1,
            required,
            capacity,
        };
        let growth = (1.0 + eps).powf(1.0 / q) - 1.0;
        let m_estimate = (1.0 / eps).max(growth.recip().powf(q));
        let mi = minimal_integer(m_estimate, capacity, |x| m_ok(q, eps, x))
            .ok_or_else(|| capacity_error(None))?;
        let shrink = 1.0 - (1.0 - eps).powf(1.0 / q);
        let k_estimate = mi as f64 / growth.min(shrink).powf(q);
        let ki = minimal_integer(k_estimate, capacity, |x| k_ok(q, eps, mi, x))
            .ok_or_else(|| capacity_error(None))?;
        let prev = *n.last().expect("level 1 is present");
        let next = u128::from(prev) * u128::from(ki);
        if next > u128::from(capacity) {
            return Err(capacity_error(Some(next)));
        }
        m.push(mi);
        k.push(ki);
        n.push(next as u64);
    }
    Ok((m, k, n))
}

fn check_q(q: f64) -> Result<(), ConstructionError> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(ConstructionError::InvalidQ(q))
    }
}

/// State of the level construction: tolerances, the integer sequences and
/// the block counts `n_j = ∏_{i≤j} k_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub(crate) q: f64,
    #[serde(rename = "N")]
    pub(crate) levels: usize,
    #[serde(rename = "target_eps")]
    pub(crate) target_eps: f64,
    #[serde(rename = "eps")]
    pub(crate) eps: Vec<f64>,
    pub(crate) m: Vec<u64>,
    pub(crate) k: Vec<u64>,
    pub(crate) n: Vec<u64>,
    #[serde(default)]
    pub(crate) relaxed: bool,
}

/// Options for [`ConstructionParams::build`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub capacity: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl ConstructionParams {
    /// Canonical parameters: geometric `ε_i` and minimal `(m_i, k_i)`.
    pub fn build(
        q: f64,
        target_eps: f64,
        levels: usize,
        options: BuildOptions,
    ) -> Result<Self, ConstructionError> {
        check_q(q)?;
        let eps = choose_epsilons(target_eps, levels)?;
        let (m, k, n) = select_parameters(q, &eps, options.capacity)?;
        Ok(ConstructionParams {
            q,
            levels,
            target_eps,
            eps,
            m,
            k,
            n,
            relaxed: false,
        })
    }

    /// Arbitrary positive `(m_i, k_i)`. Norms stay exact, but the democracy
    /// bound is only guaranteed if [`Self::satisfies_conditions`] holds.
    pub fn relaxed(
        q: f64,
        target_eps: f64,
        m: Vec<u64>,
        k: Vec<u64>,
        capacity: u64,
    ) -> Result<Self, ConstructionError> {
        check_q(q)?;
        if m.len() != k.len() || m.is_empty() {
            return Err(ConstructionError::NoLevels);
        }
        if m.iter().chain(&k).any(|&x| x == 0) {
            return Err(ConstructionError::NonPositive);
        }
        let eps = choose_epsilons(target_eps, m.len())?;
        let mut n = Vec::with_capacity(k.len());
        let mut acc: u128 = 1;
        for (i, &ki) in k.iter().enumerate() {
            acc *= u128::from(ki);
            if acc > u128::from(capacity) {
                return Err(ConstructionError::Capacity {
                    level: i + 1,
                    required: Some(acc),
                    capacity,
                });
            }
            n.push(acc as u64);
        }
        Ok(ConstructionParams {
            q,
            levels: m.len(),
            target_eps,
            eps,
            m,
            k,
            n,
            relaxed: true,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn m(&self) -> &[u64] {
        &self.m
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    /// `n_1, …, n_N`.
    pub fn n(&self) -> &[u64] {
        &self.n
    }

    /// `n_i` for the 1-based level `i`.
    pub fn block_len(&self, level: usize) -> u64 {
        self.n[level - 1]
    }

    /// `n_N`, the number of outer blocks the family lives on.
    pub fn blocks(&self) -> u64 {
        *self.n.last().expect("at least one level")
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// Whether `m_1 = k_1 = 1`, conditions i–iv at every level `≥ 2`, and
    /// both product constraints hold.
    pub fn satisfies_conditions(&self) -> bool {
        let (up, down) = product_margins(&self.eps, self.target_eps);
        self.m[0] == 1
            && self.k[0] == 1
            && up > 0.0
            && down > 0.0
            && (1..self.levels).all(|i| {
                level_conditions(self.q, self.eps[i], self.m[i], self.k[i])
                    .iter()
                    .all(|&c| c)
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("params always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        let p: ConstructionParams =
            serde_json::from_str(text).map_err(|e| ConstructionError::Document(e.to_string()))?;
        let consistent = p.levels >= 1
            && [p.eps.len(), p.m.len(), p.k.len(), p.n.len()]
                .iter()
                .all(|&l| l == p.levels)
            && p
                .k
                .iter()
                .scan(1u128, |acc, &k| {
                    *acc *= u128::from(k);
                    Some(*acc)
                })
                .zip(&p.n)
                .all(|(a, &n)| a == u128::from(n));
        if !consistent {
            return Err(ConstructionError::Document(
                "sequence lengths or n_j products are inconsistent".into(),
            ));
        }
        check_q(p.q)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent recomputation of the minimal `(m, k)` by scanning from 1.
    fn brute_minimal(q: f64, eps: f64) -> (u64, u64) {
        let m = (1..).find(|&m| m_ok(q, eps, m)).unwrap();
        let k = (1..).find(|&k| k_ok(q, eps, m, k)).unwrap();
        (m, k)
    }

    #[test]
    fn first_level_is_trivial() {
        let (m, k, n) = select_parameters(2.0, &[0.3], DEFAULT_CAPACITY).unwrap();
        assert_eq!((m, k, n), (vec![1], vec![1], vec![1]));
    }

    #[test]
    fn q2_eps_half_gives_20_and_396() {
        let (m, k, n) = select_parameters(2.0, &[0.9, 0.5], DEFAULT_CAPACITY).unwrap();
        assert_eq!((m[1], k[1], n[1]), (20, 396, 396));
        assert_eq!(brute_minimal(2.0, 0.5), (20, 396));
    }

    #[test]
    fn analytic_start_agrees_with_scan_from_one() {
        for q in [1.5, 2.0, 3.0] {
            for eps in [0.4, 0.25, 0.15, 0.1] {
                let (m, k, _) = select_parameters(q, &[0.5, eps], u64::MAX).unwrap();
                if k[1] > 5_000_000 {
                    // too long for a linear scan; bisection boundary checked below
                    assert!(!k_ok(q, eps, m[1], k[1] - 1) && k_ok(q, eps, m[1], k[1]));
                    continue;
                }
                assert_eq!((m[1], k[1]), brute_minimal(q, eps), "q={q} eps={eps}");
                assert!(level_conditions(q, eps, m[1], k[1]).iter().all(|&c| c));
                let below = level_conditions(q, eps, m[1] - 1, k[1]);
                assert!(!(below[0] && below[1]));
                assert!(!k_ok(q, eps, m[1], k[1] - 1));
            }
        }
    }

    #[test]
    fn epsilons_products_inside_window() {
        for &eps in &[0.05, 0.3, 0.5, 0.9, 0.99] {
            for levels in 1..=8 {
                let seq = choose_epsilons(eps, levels).unwrap();
                assert!(seq.windows(2).all(|w| w[1] < w[0]));
                let (up, down) = product_margins(&seq, eps);
                assert!(up >= 1e-9 && down >= 1e-9, "eps={eps} N={levels}: {up} {down}");
            }
        }
        let single = choose_epsilons(0.9, 1).unwrap();
        assert!(1.0 + single[0] < 1.9);
        let three = choose_epsilons(0.5, 3).unwrap();
        assert!(three.iter().map(|e| 1.0 - e).product::<f64>() > 0.5);
        assert!(choose_epsilons(1.0, 2).is_err());
        assert!(choose_epsilons(0.5, 0).is_err());
    }

    #[test]
    fn capacity_error_is_reported() {
        let err = ConstructionParams::build(2.0, 0.9, 3, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, ConstructionError::Capacity { level: 3, .. }), "{err}");
        assert!(err.to_string().contains("larger"));
        let ok = ConstructionParams::build(2.0, 0.9, 3, BuildOptions { capacity: u64::MAX });
        assert!(ok.unwrap().satisfies_conditions());
    }

    #[test]
    fn built_params_satisfy_conditions() {
        for q in [1.5, 2.0, 3.0] {
            let p = ConstructionParams::build(q, 0.9, 2, BuildOptions::default()).unwrap();
            assert!(p.satisfies_conditions());
            assert_eq!(p.n()[1], p.k()[1]);
        }
        // k_2 ~ 4e11 at q = 4
        let err = ConstructionParams::build(4.0, 0.9, 2, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, ConstructionError::Capacity { level: 2, .. }));
    }

    #[test]
    fn relaxed_params_flagged() {
        let p = ConstructionParams::relaxed(2.0, 0.5, vec![1, 2, 2], vec![1, 3, 4], 1000).unwrap();
        assert_eq!(p.n(), &[1, 3, 12]);
        assert!(p.is_relaxed());
        assert!(!p.satisfies_conditions());
        assert!(ConstructionParams::relaxed(2.0, 0.5, vec![1], vec![0], 10).is_err());
        assert!(ConstructionParams::relaxed(1.0, 0.5, vec![1], vec![1], 10).is_err());
    }

    #[test]
    fn json_shape() {
        let p = ConstructionParams::build(2.0, 0.9, 2, BuildOptions::default()).unwrap();
        let text = p.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["q", "N", "eps", "m", "k", "n"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(ConstructionParams::from_json(&text).unwrap(), p);
        let broken = text.replace("\"N\":2", "\"N\":3");
        assert!(ConstructionParams::from_json(&broken).is_err());
    }
}
