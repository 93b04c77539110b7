//! The discrete uncentered Hardy–Littlewood maximal operator
//!
//! `M(a)_j = sup_{m ≤ j ≤ n} (n − m + 1)^{-1} Σ_{k=m}^{n} |a_k|`
//!
//! on finitely supported sequences (1-indexed, stored 0-indexed), its
//! strong-type ratio `‖M a‖_q / ‖a‖_q`, and the pointwise domination of block
//! averages by `M`.
//!
//! With prefix sums `S_u = Σ_{k ≤ u} |a_k|`, the window `[m, n]` is the chord
//! from `(m−1, S_{m−1})` to `(n, S_n)`, so `M(a)_j` is the steepest chord
//! that straddles `j`. The fast path splits the index range in half and
//! answers the straddling chords with convex hulls.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{lp_norm, Exponent};

/// Two range sizes of the full-line ratio must agree to this.
pub const RANGE_STABILITY_TOL: f64 = 1e-6;

/// Default evaluation range as a multiple of the support length.
pub const DEFAULT_RANGE_MULTIPLIER: usize = 4;

/// Largest first range tried by [`strong_type_full_line`].
const FULL_LINE_RANGE_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaximalError {
    #[error("the sequence is zero")]
    ZeroInput,
    #[error("q = {0} must be finite and > 1")]
    InvalidExponent(Exponent),
    #[error("window length must be positive")]
    EmptyWindow,
}

/// `O(L²)` evaluation: for each left end the best right end at or after `j`
/// is a suffix maximum of the running averages.
pub fn hl_maximal_reference(a: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    let mut avg = vec![0.0; len];
    for m in 0..len {
        let mut sum = 0.0;
        for n in m..len {
            sum += a[n].abs();
            avg[n] = sum / (n - m + 1) as f64;
        }
        let mut best = 0.0_f64;
        for j in (m..len).rev() {
            best = best.max(avg[j]);
            out[j] = out[j].max(best);
        }
    }
    out
}

fn prefix_sums(a: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(a.len() + 1);
    s.push(0.0);
    let mut acc = 0.0;
    for x in a {
        acc += x.abs();
        s.push(acc);
    }
    s
}

fn slope(s: &[f64], u: usize, v: usize) -> f64 {
    (s[v] - s[u]) / (v - u) as f64
}

fn cross(s: &[f64], o: usize, a: usize, b: usize) -> f64 {
    (a as f64 - o as f64) * (s[b] - s[o]) - (s[a] - s[o]) * (b as f64 - o as f64)
}

/// Lower hull of the points `(u, s_u)`, `u ∈ range`, left to right.
fn lower_hull(s: &[f64], range: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for u in range {
        while hull.len() >= 2 && cross(s, hull[hull.len() - 2], hull[hull.len() - 1], u) <= 0.0 {
            hull.pop();
        }
        hull.push(u);
    }
    hull
}

fn upper_hull(s: &[f64], range: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for u in range {
        while hull.len() >= 2 && cross(s, hull[hull.len() - 2], hull[hull.len() - 1], u) >= 0.0 {
            hull.pop();
        }
        hull.push(u);
    }
    hull
}

/// Largest chord slope from the point `v` (right of every hull point) back to
/// a lower hull; the slopes along the hull are unimodal.
fn best_from_right(s: &[f64], hull: &[usize], v: usize) -> f64 {
    let (mut lo, mut hi) = (0, hull.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if slope(s, hull[mid], v) <= slope(s, hull[mid + 1], v) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    slope(s, hull[lo], v)
}

/// Largest chord slope from the point `u` (left of every hull point) to an
/// upper hull.
fn best_from_left(s: &[f64], hull: &[usize], u: usize) -> f64 {
    let (mut lo, mut hi) = (0, hull.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if slope(s, u, hull[mid]) <= slope(s, u, hull[mid + 1]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    slope(s, u, hull[lo])
}

/// Chords `(u, v)` with `lo ≤ u < v ≤ hi`; `out[j − 1]` collects every chord
/// with `u < j ≤ v`.
fn solve(s: &[f64], lo: usize, hi: usize, out: &mut [f64]) {
    if hi <= lo {
        return;
    }
    if hi - lo == 1 {
        out[hi - 1] = out[hi - 1].max(slope(s, lo, hi));
        return;
    }
    let mid = (lo + hi) / 2;
    let left = lower_hull(s, lo..=mid);
    let right = upper_hull(s, mid + 1..=hi);
    // j ∈ (lo, mid + 1]: best chord with u ≤ j − 1, v > mid
    let mut run = f64::NEG_INFINITY;
    for u in lo..=mid {
        run = run.max(best_from_left(s, &right, u));
        out[u] = out[u].max(run);
    }
    // j ∈ [mid + 1, hi]: best chord with u ≤ mid, v ≥ j
    let mut run = f64::NEG_INFINITY;
    for v in (mid + 1..=hi).rev() {
        run = run.max(best_from_right(s, &left, v));
        out[v - 1] = out[v - 1].max(run);
    }
    solve(s, lo, mid, out);
    solve(s, mid + 1, hi, out);
}

/// `M(a)_j` for `j = 1..=a.len()`, with `a` extended by zeros. Windows past
/// the end only add zeros, so the values are exact for the infinite
/// sequence. `O(L log² L)`.
pub fn hl_maximal(a: &[f64]) -> Vec<f64> {
    let s = prefix_sums(a);
    let mut out: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    solve(&s, 0, a.len(), &mut out);
    out
}

pub fn hl_maximal_batch(seqs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    seqs.par_iter().map(|a| hl_maximal(a)).collect()
}

/// `a` followed by zeros up to `range` entries.
pub fn padded(a: &[f64], range: usize) -> Vec<f64> {
    let mut v = a.to_vec();
    v.resize(range.max(a.len()), 0.0);
    v
}

fn support_len(a: &[f64]) -> usize {
    a.iter().rposition(|x| *x != 0.0).map_or(0, |k| k + 1)
}

fn check_q(q: Exponent) -> Result<f64, MaximalError> {
    match q.finite() {
        Some(v) if v > 1.0 => Ok(v),
        _ => Err(MaximalError::InvalidExponent(q)),
    }
}

/// `‖M a‖_q / ‖a‖_q` with `M a` evaluated on the first
/// `multiplier · (support length)` indices.
pub fn strong_type_ratio(a: &[f64], q: Exponent, multiplier: usize) -> Result<f64, MaximalError> {
    check_q(q)?;
    let len = support_len(a);
    if len == 0 {
        return Err(MaximalError::ZeroInput);
    }
    let m = hl_maximal(&padded(&a[..len], multiplier.max(1) * len));
    Ok(lp_norm(&m, q) / lp_norm(&a[..len], q))
}

/// Hurwitz zeta `ζ(s, x) = Σ_{k ≥ 0} (k + x)^{-s}` for `s > 1`, `x > 0`,
/// by Euler–Maclaurin after shifting `x` past 16.
pub fn hurwitz_zeta(s: f64, x: f64) -> f64 {
    const B2K: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let mut head = 0.0;
    let mut x = x;
    while x < 16.0 {
        head += x.powf(-s);
        x += 1.0;
    }
    // Σ_{k≥0} f(x+k) = ∫_x^∞ f + f(x)/2 − Σ B_{2k}/(2k)! f^{(2k−1)}(x)
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // f^{(2k−1)}(x) = −s(s+1)…(s+2k−2) x^{−s−2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in B2K.iter().enumerate() {
        let k = k + 1;
        let deriv = -rising * x.powf(-s - (2 * k - 1) as f64);
        tail -= b / fact * deriv;
        rising *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    head + tail
}

/// Full-line strong-type ratio at two range sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullLineReport {
    pub range1: u64,
    pub range2: u64,
    pub ratio1: f64,
    pub ratio2: f64,
    /// `|ratio1 − ratio2| ≤` [`RANGE_STABILITY_TOL`].
    pub stable: bool,
}

/// `‖M a‖_q / ‖a‖_q` over all of `ℕ`.
///
/// Past the support end `L`, `M(a)_j = max_u (S_L − S_u)/(j − u)`, a chord to
/// a point on the horizontal line `y = S_L`, which the lower hull answers in
/// `O(log L)`. Beyond the range `R` the maximizing left end is taken to be the
/// last zero prefix `u* = m* − 1`, so the rest is `S_L^q ζ(q, R + 1 − u*)`.
/// That is exact once `R` passes the last hull breakpoint `J0`; the first
/// range is `J0` clamped to `[4L, 2^20]` and the second doubles it.
pub fn strong_type_full_line(a: &[f64], q: Exponent) -> Result<FullLineReport, MaximalError> {
    let qf = check_q(q)?;
    let len = support_len(a);
    if len == 0 {
        return Err(MaximalError::ZeroInput);
    }
    let a = &a[..len];
    let s = prefix_sums(a);
    let total = s[len];
    let first = a.iter().position(|x| *x != 0.0).expect("nonzero");
    let u_star = first; // S_u = 0 for u ≤ first
    let hull = lower_hull(&s, 0..=len - 1);

    // breakpoint: u* beats every other u for all j ≥ J0
    let mut j0 = len as f64 + 1.0;
    for u in u_star + 1..len {
        // (total)/(j − u*) ≥ (total − s_u)/(j − u)  ⇔  j s_u ≥ total·u − (total − s_u)·u*
        if s[u] > 0.0 {
            j0 = j0.max((total * u as f64 - (total - s[u]) * u_star as f64) / s[u]);
        }
    }
    let range1 = (j0.ceil() as u64).clamp(4 * len as u64, FULL_LINE_RANGE_CAP);
    let range2 = 2 * range1;

    let inside = hl_maximal(a);
    let head: f64 = inside.iter().map(|v| v.powf(qf)).sum();
    let value_at = |j: u64| {
        let (mut lo, mut hi) = (0, hull.len() - 1);
        let sl = |u: usize| (total - s[u]) / (j as f64 - u as f64);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if sl(hull[mid]) <= sl(hull[mid + 1]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        sl(hull[lo])
    };
    let mut middle = vec![0.0; (range2 - len as u64) as usize];
    middle
        .par_iter_mut()
        .enumerate()
        .for_each(|(k, m)| *m = value_at(len as u64 + 1 + k as u64).powf(qf));
    let denom = lp_norm(a, q);
    let ratio = |range: u64| {
        let mid: f64 = middle[..(range - len as u64) as usize].iter().sum();
        let tail = total.powf(qf) * hurwitz_zeta(qf, (range + 1) as f64 - u_star as f64);
        (head + mid + tail).powf(1.0 / qf) / denom
    };
    let (ratio1, ratio2) = (ratio(range1), ratio(range2));
    Ok(FullLineReport {
        range1,
        range2,
        ratio1,
        ratio2,
        stable: (ratio1 - ratio2).abs() <= RANGE_STABILITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub holds: bool,
    /// Smallest and largest `M(a)_s − average` over blocks and their points.
    pub min_slack: f64,
    pub max_slack: f64,
}

/// Each block average `n^{-1} Σ_{k=1}^{n} |a_{k+(j−1)n}|` is at most
/// `M(a)_s` for every `s` in block `j`; `a` is padded to whole blocks.
pub fn averaging_domination_check(a: &[f64], window: usize) -> Result<DominationReport, MaximalError> {
    if window == 0 {
        return Err(MaximalError::EmptyWindow);
    }
    let blocks = a.len().div_ceil(window);
    let v = padded(a, blocks * window);
    let m = hl_maximal(&v);
    let mut report = DominationReport {
        holds: true,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
    };
    let scale = v.iter().fold(0.0_f64, |x, y| x.max(y.abs()));
    for (chunk, mc) in v.chunks(window).zip(m.chunks(window)) {
        let avg = chunk.iter().map(|x| x.abs()).sum::<f64>() / window as f64;
        for &ms in mc {
            let slack = ms - avg;
            report.min_slack = report.min_slack.min(slack);
            report.max_slack = report.max_slack.max(slack);
        }
    }
    if blocks == 0 {
        report.min_slack = 0.0;
        report.max_slack = 0.0;
    }
    report.holds = report.min_slack >= -1e-12 * scale.max(1.0);
    Ok(report)
}

/// CSV with columns `j,a_j,M_j`.
pub fn maximal_csv(a: &[f64], m: &[f64]) -> String {
    let mut out = String::from("j,a_j,M_j\n");
    for (j, (x, y)) in a.iter().zip(m).enumerate() {
        out.push_str(&format!("{},{},{}\n", j + 1, x, y));
    }
    out
}
