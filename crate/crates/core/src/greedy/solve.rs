//! Derivative-free minimization of convex objectives such as
//! `a ↦ ‖r − Σ a_k x_k‖`.
//!
//! Coordinate descent with an exact line search: each direction gets a
//! bracketing phase followed by golden-section refinement. Mixed norms with
//! `p` or `q` in `{1, ∞}` are not smooth, so a sweep also tries pairwise
//! directions `e_i ± e_j`, and a stalled sweep is retried along seeded random
//! directions before convergence is declared.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sampling::gaussian;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stop when a full sweep lowers the objective by less than this
    /// (relative to `max(1, f)`).
    pub tol: f64,
    pub max_sweeps: usize,
    /// Random directions tried after a stalled sweep, per dimension.
    pub escape_directions: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_sweeps: 500,
            escape_directions: 8,
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizer of the convex function `t ↦ f(x + t d)`; returns `(t, f)`.
fn line_search<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], d: &[f64], f0: f64, h0: f64) -> (f64, f64) {
    let mut buf = x.to_vec();
    let mut phi = |t: f64| {
        for ((b, xi), di) in buf.iter_mut().zip(x).zip(d) {
            *b = xi + t * di;
        }
        f(&buf)
    };
    let mut h = h0;
    let (mut t, mut ft) = loop {
        let (fp, fm) = (phi(h), phi(-h));
        if fp < f0 || fm < f0 {
            break if fp <= fm { (h, fp) } else { (-h, fm) };
        }
        h *= 0.25;
        if h < 1e-14 * h0.max(1.0) {
            return (0.0, f0);
        }
    };
    // expand while still descending
    let mut lo = 0.0;
    loop {
        let next = 2.0 * t;
        let fnext = phi(next);
        if fnext >= ft {
            let (a, b) = if t > 0.0 { (lo, next) } else { (next, lo) };
            return golden(&mut phi, a, b, (t, ft));
        }
        lo = t;
        t = next;
        ft = fnext;
        if !t.is_finite() || t.abs() > 1e15 {
            return (t, ft);
        }
    }
}

fn golden<P: FnMut(f64) -> f64>(phi: &mut P, mut a: f64, mut b: f64, best: (f64, f64)) -> (f64, f64) {
    let mut best = best;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = phi(d);
        }
    }
    for (t, ft) in [(c, fc), (d, fd)] {
        if ft < best.1 {
            best = (t, ft);
        }
    }
    best
}

/// Approximate minimizer of a convex `f` starting at `x0`.
pub fn minimize_convex<F: Fn(&[f64]) -> f64>(f: F, x0: Vec<f64>, opts: SolveOptions) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    if dim == 0 {
        return (x, fx);
    }
    let mut directions: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut d = vec![0.0; dim];
            d[i] = 1.0;
            d
        })
        .collect();
    for i in 0..dim {
        for j in i + 1..dim {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                d[i] = 1.0;
                d[j] = s;
                directions.push(d);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut step = x.iter().fold(1.0_f64, |m, v| m.max(v.abs())) * 0.5;

    for _ in 0..opts.max_sweeps {
        let start = fx;
        for d in &directions {
            let (t, ft) = line_search(&f, &x, d, fx, step);
            if ft < fx {
                x.iter_mut().zip(d).for_each(|(xi, di)| *xi += t * di);
                fx = ft;
                step = step.max(t.abs());
            }
        }
        if start - fx > opts.tol * fx.max(1.0) {
            step *= 0.5;
            continue;
        }
        let mut escaped = false;
        for _ in 0..opts.escape_directions * dim {
            let d: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
            let (t, ft) = line_search(&f, &x, &d, fx, step.max(1e-3));
            if fx - ft > opts.tol * fx.max(1.0) {
                x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += t * di);
                fx = ft;
                escaped = true;
            }
        }
        if !escaped {
            break;
        }
    }
    (x, fx)
}

/// Result of [`minimize_convex_cut`]: the best point found and a certified
/// lower bound for the minimum over the starting ball.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub lower: f64,
}

/// Central-cut ellipsoid method (bisection in one dimension) for a convex `f`
/// with subgradients, over the ball of radius `radius` around `center`.
///
/// `f_grad` returns `(f(x), g)` with `g` a subgradient. Every center `x_k`
/// gives `min f ≥ f(x_k) − sqrt(gᵀ P g)` over the current ellipsoid, so the
/// run stops once the best value is within `tol · max(1, value)` of the
/// largest such bound. `incumbent` is an already attained value.
pub fn minimize_convex_cut<F>(f_grad: F, center: Vec<f64>, radius: f64, incumbent: f64, tol: f64) -> CutResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let dim = center.len();
    let (f0, _) = f_grad(&center);
    let mut best = CutResult {
        x: center.clone(),
        value: f0,
        lower: f64::NEG_INFINITY,
    };
    if dim == 0 || radius <= 0.0 {
        best.lower = f0;
        return best;
    }
    let target = |best: &CutResult| best.value.min(incumbent) - best.lower <= tol * best.value.max(1.0);
    if dim == 1 {
        let (mut lo, mut hi) = (center[0] - radius, center[0] + radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (fm, g) = f_grad(&[mid]);
            if fm < best.value {
                best.value = fm;
                best.x = vec![mid];
            }
            best.lower = best.lower.max(fm - g[0].abs() * (hi - lo) * 0.5);
            if g[0] == 0.0 {
                best.lower = best.lower.max(fm);
            } else if g[0] > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if target(&best) || hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        return best;
    }

    // P = B Bᵀ kept in factored form so it stays positive semidefinite
    let n = dim as f64;
    let mut x = DVector::from_vec(center);
    let mut b = DMatrix::identity(dim, dim) * radius;
    let a = n / (n * n - 1.0).sqrt();
    let shrink = n / (n + 1.0);
    let max_iter = 2400 * dim * dim;
    for _ in 0..max_iter {
        let (fx, g) = f_grad(x.as_slice());
        if fx < best.value {
            best.value = fx;
            best.x = x.as_slice().to_vec();
        }
        let bt_g = b.transpose() * DVector::from_vec(g);
        let width = bt_g.norm();
        if width == 0.0 {
            // zero subgradient: x is a minimizer
            best.lower = best.lower.max(fx);
            break;
        }
        if !width.is_finite() {
            break;
        }
        best.lower = best.lower.max(fx - width);
        if target(&best) {
            break;
        }
        let xi = bt_g / width;
        let b_xi = &b * &xi;
        x -= &b_xi / (n + 1.0);
        b = &b * a + (&b_xi * xi.transpose()) * (shrink - a);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_kink(a: &[f64]) -> (f64, Vec<f64>) {
        let terms = [
            (1.0 - a[0] - a[1], [-1.0, -1.0]),
            (a[0] - a[1], [1.0, -1.0]),
            (0.5 - a[1], [0.0, -1.0]),
        ];
        let (v, d) = terms
            .iter()
            .max_by(|x, y| x.0.abs().total_cmp(&y.0.abs()))
            .unwrap();
        (v.abs(), d.iter().map(|c| c * v.signum()).collect())
    }

    #[test]
    fn cut_certifies_kinked_minimum() {
        let r = minimize_convex_cut(max_kink, vec![3.0, -2.0], 10.0, f64::INFINITY, 1e-12);
        assert!(r.value < 1e-10, "{r:?}");
        // the bound is valid up to rounding of x near 0.5
        assert!(r.lower <= 1e-11 && r.value - r.lower <= 1e-11, "{r:?}");
    }

    #[test]
    fn cut_bisection_weighted_median() {
        let f = |a: &[f64]| {
            let v = (3.0 - a[0]).abs() + (1.0 - a[0]).abs() + (-2.0 - 2.0 * a[0]).abs();
            let g = -(3.0 - a[0]).signum() - (1.0 - a[0]).signum() - 2.0 * (-2.0 - 2.0 * a[0]).signum();
            (v, vec![g])
        };
        let r = minimize_convex_cut(f, vec![0.0], 20.0, f64::INFINITY, 1e-13);
        assert!((r.value - 6.0).abs() < 1e-9, "{r:?}");
        assert!(r.lower <= 6.0 + 1e-12);
    }

    #[test]
    fn quadratic() {
        let (x, fx) = minimize_convex(
            |v| (v[0] - 1.0).powi(2) + 2.0 * (v[1] + 3.0).powi(2) + v[0] * v[1] * 0.5,
            vec![0.0, 0.0],
            SolveOptions::default(),
        );
        // gradient zero: 2(x0-1) + 0.5 x1 = 0, 4(x1+3) + 0.5 x0 = 0
        let x1 = (-12.0 - 0.5) / (4.0 - 0.125);
        let x0 = 1.0 - 0.25 * x1;
        assert!((x[0] - x0).abs() < 1e-6 && (x[1] - x1).abs() < 1e-6, "{x:?}");
        assert!(fx.is_finite());
    }

    #[test]
    fn nonsmooth_max_norm_kink() {
        // min over a of max(|1 - a0 - a1|, |a0 - a1|, |0.5 - a1|) is 0 at (0.5, 0.5)
        let f = |a: &[f64]| {
            (1.0 - a[0] - a[1])
                .abs()
                .max((a[0] - a[1]).abs())
                .max((0.5 - a[1]).abs())
        };
        let (_, fx) = minimize_convex(f, vec![0.0, 0.0], SolveOptions::default());
        assert!(fx < 1e-9, "{fx}");
    }

    #[test]
    fn l1_distance_to_a_line() {
        // min_a |3 - a| + |1 - a| + |-2 - 2a|  (weighted median problem)
        let f = |a: &[f64]| (3.0 - a[0]).abs() + (1.0 - a[0]).abs() + (-2.0 - 2.0 * a[0]).abs();
        let (_, fx) = minimize_convex(f, vec![10.0], SolveOptions::default());
        // brute force on a fine grid
        let grid = (-4000..=4000)
            .map(|k| f(&[k as f64 * 1e-3]))
            .fold(f64::INFINITY, f64::min);
        assert!((fx - grid).abs() < 1e-6 && fx <= grid + 1e-12);
    }
}
