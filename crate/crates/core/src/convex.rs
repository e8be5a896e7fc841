//! Convex-analysis engine on uniform grids: Legendre transforms and
//! infimum-convolutions, each with a brute-force reference path.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A uniform grid `x_i = x0 + i dx`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || !x0.is_finite() || !dx.is_finite() {
            return Err(Error::Domain(format!(
                "grid needs finite x0 and dx > 0 (x0={x0}, dx={dx})"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 nodes, got {n}"
            )));
        }
        Ok(Grid { x0, dx, n })
    }

    /// `n` nodes spanning `[a, b]` inclusive.
    pub fn span(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(Error::Domain(format!(
                "span needs a < b and n >= 2 (a={a}, b={b}, n={n})"
            )));
        }
        Grid::new(a, (b - a) / (n - 1) as f64, n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn last(&self) -> f64 {
        self.x(self.n - 1)
    }
}

/// Samples of an extended-real function on a uniform grid. `+inf` may only
/// occupy a prefix and a suffix, so the effective domain is an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        Grid::new(x0, dx, values.len())?;
        let mut state = 0; // 0: leading inf, 1: finite, 2: trailing inf
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::Domain(format!("grid value {i} is {v}")));
            }
            let fin = v.is_finite();
            state = match (state, fin) {
                (0, true) | (1, true) => 1,
                (0, false) => 0,
                (1, false) | (2, false) => 2,
                (2, true) => {
                    return Err(Error::Domain(
                        "infinite values must form a prefix and a suffix".into(),
                    ))
                }
                _ => unreachable!(),
            };
        }
        if state == 0 {
            return Err(Error::EmptyDomain(
                "grid function is identically +inf".into(),
            ));
        }
        Ok(GridFunction { x0, dx, values })
    }

    pub fn sample<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        GridFunction::new(grid.x0, grid.dx, grid.xs().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        Grid {
            x0: self.x0,
            dx: self.dx,
            n: self.values.len(),
        }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index range `[a, b]` of finite values.
    pub fn domain(&self) -> (usize, usize) {
        let a = self.values.iter().position(|v| v.is_finite()).unwrap_or(0);
        let b = self.values.iter().rposition(|v| v.is_finite()).unwrap_or(0);
        (a, b)
    }

    /// Piecewise-linear interpolation; `+inf` outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        let n = self.values.len();
        if t < -1e-9 || t > (n - 1) as f64 + 1e-9 {
            return f64::INFINITY;
        }
        let t = t.clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let s = t - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        if s == 0.0 {
            return a;
        }
        if s == 1.0 {
            return b;
        }
        if !a.is_finite() || !b.is_finite() {
            return f64::INFINITY;
        }
        a + s * (b - a)
    }

    /// True when second differences on the finite part are `>= -tol * scale`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let (a, b) = self.domain();
        let scale = self.values[a..=b]
            .iter()
            .fold(1.0_f64, |m, v| m.max(v.abs()));
        (a + 1..b)
            .all(|i| self.values[i - 1] - 2.0 * self.values[i] + self.values[i + 1] >= -tol * scale)
    }

    /// Range of finite-difference slopes on the effective domain.
    pub fn slope_range(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in a..b {
            let s = (self.values[i + 1] - self.values[i]) / self.dx;
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if a == b {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

#[inline]
fn affine(x: f64, y: f64, fx: f64) -> f64 {
    x * y - fx
}

/// Lower convex hull of the finite samples, as indices in increasing order.
fn lower_hull(f: &GridFunction) -> Vec<usize> {
    let (a, b) = f.domain();
    let mut h: Vec<usize> = Vec::with_capacity(b - a + 1);
    for i in a..=b {
        while h.len() >= 2 {
            let j = h[h.len() - 1];
            let k = h[h.len() - 2];
            // drop j if it lies on or above the chord k -> i
            let (xk, xj, xi) = (f.x(k), f.x(j), f.x(i));
            let lhs = (f.values[j] - f.values[k]) * (xi - xk);
            let rhs = (f.values[i] - f.values[k]) * (xj - xk);
            if lhs >= rhs {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Discrete Legendre transform `Lf(y) = max_i (x_i y - f_i)` on `dual`.
///
/// Runs in `O(N + M)`: the maximizer walks monotonically along the lower hull
/// and only advances on a strict improvement, so ties go to the smaller index.
pub fn legendre_transform(f: &GridFunction, dual: &Grid) -> Result<GridFunction> {
    let hull = lower_hull(f);
    let mut out = Vec::with_capacity(dual.n);
    let mut k = 0;
    for j in 0..dual.n {
        let y = dual.x(j);
        let mut best = affine(f.x(hull[k]), y, f.values[hull[k]]);
        while k + 1 < hull.len() {
            let cand = affine(f.x(hull[k + 1]), y, f.values[hull[k + 1]]);
            if cand > best {
                best = cand;
                k += 1;
            } else {
                break;
            }
        }
        out.push(best);
    }
    GridFunction::new(dual.x0, dual.dx, out)
}

/// Reference `O(N M)` Legendre transform with the same tie rule.
pub fn legendre_brute(f: &GridFunction, dual: &Grid) -> Result<GridFunction> {
    let (a, b) = f.domain();
    let mut out = Vec::with_capacity(dual.n);
    for j in 0..dual.n {
        let y = dual.x(j);
        let mut best = f64::NEG_INFINITY;
        for i in a..=b {
            let v = affine(f.x(i), y, f.values[i]);
            if v > best {
                best = v;
            }
        }
        out.push(best);
    }
    GridFunction::new(dual.x0, dual.dx, out)
}

fn same_step(f: &GridFunction, g: &GridFunction) -> Result<()> {
    if (f.dx - g.dx).abs() > 1e-12 * f.dx.abs().max(g.dx.abs()) {
        return Err(Error::GridMismatch(format!(
            "inf-convolution needs equal steps, got {} and {}",
            f.dx, g.dx
        )));
    }
    Ok(())
}

/// `(f [] g)(x_k) = min_{i + j = k} f_i + g_j` on the sum grid, for arbitrary
/// inputs.
pub fn inf_convolution(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    same_step(f, g)?;
    let (fa, fb) = f.domain();
    let (ga, gb) = g.domain();
    let len = f.len() + g.len() - 1;
    let mut out = vec![f64::INFINITY; len];
    for i in fa..=fb {
        let fi = f.values[i];
        for j in ga..=gb {
            let v = fi + g.values[j];
            let o = &mut out[i + j];
            if v < *o {
                *o = v;
            }
        }
    }
    GridFunction::new(f.x0 + g.x0, f.dx, out)
}

/// Same result as [`inf_convolution`] when `g` is convex, in `O(L log L)`.
///
/// With a convex kernel the cost matrix `f_i + g_{k-i}` is Monge, so the
/// leftmost minimizing column is nondecreasing in the row and a
/// divide-and-conquer over rows visits each column `O(log L)` times.
pub fn inf_convolution_convex_kernel(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    same_step(f, g)?;
    let len = f.len() + g.len() - 1;
    let out = inf_convolution_convex_kernel_rows(f, g, 0, 1, len)?;
    GridFunction::new(f.x0 + g.x0, f.dx, out)
}

/// Output nodes `k_start + j * k_step`, `j < count`, of the convex-kernel
/// inf-convolution. Any increasing row subset keeps the Monge structure.
pub fn inf_convolution_convex_kernel_rows(
    f: &GridFunction,
    g: &GridFunction,
    k_start: usize,
    k_step: usize,
    count: usize,
) -> Result<Vec<f64>> {
    same_step(f, g)?;
    if k_step == 0 {
        return Err(Error::Domain("row step must be positive".into()));
    }
    let (fa, fb) = f.domain();
    let (ga, gb) = g.domain();
    let mut out = vec![f64::INFINITY; count];
    if count == 0 {
        return Ok(out);
    }
    let row = |j: usize| k_start + j * k_step;
    let mut stack = vec![(0usize, count - 1, fa, fb)];
    while let Some((r0, r1, c0, c1)) = stack.pop() {
        if r0 > r1 {
            continue;
        }
        let j = r0 + (r1 - r0) / 2;
        let k = row(j);
        let mut arg = c0;
        if k >= fa + ga && k <= fb + gb {
            let lo = c0.max(fa.max(k.saturating_sub(gb)));
            let hi = c1.min(fb.min(k - ga));
            let mut best = f64::INFINITY;
            arg = lo;
            for i in lo..=hi {
                let v = f.values[i] + g.values[k - i];
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            out[j] = best;
        } else if k > fb + gb {
            arg = c1;
        }
        if j > r0 {
            stack.push((r0, j - 1, c0, arg));
        }
        stack.push((j + 1, r1, arg, c1));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiconjugateReport {
    pub convex: bool,
    /// max |LLf - f| over the effective domain
    pub max_abs_diff: f64,
    /// max (LLf - f); must not be positive beyond rounding
    pub max_excess: f64,
    /// node with the largest gap f - LLf
    pub argmax_gap: f64,
    pub pass: bool,
}

/// Computes `LLf` on the grid of `f` through a dual grid of `dual_n` nodes
/// spanning the slope range of `f`, and compares with `f`. For convex `f` the
/// check requires `|LLf - f| <= tol`; otherwise only `LLf <= f + tol`.
pub fn biconjugate_check(f: &GridFunction, dual_n: usize, tol: f64) -> Result<BiconjugateReport> {
    let (lo, hi) = f.slope_range();
    let pad = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    let dual = Grid::span(lo - pad, hi + pad, dual_n.max(2))?;
    let lf = legendre_transform(f, &dual)?;
    let llf = legendre_transform(&lf, &f.grid())?;
    let (a, b) = f.domain();
    let convex = f.is_convex(1e-12);
    let mut max_abs: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut gap = f64::NEG_INFINITY;
    let mut arg = f.x(a);
    for i in a..=b {
        let d = llf.values[i] - f.values[i];
        max_abs = max_abs.max(d.abs());
        max_excess = max_excess.max(d);
        if -d > gap {
            gap = -d;
            arg = f.x(i);
        }
    }
    let pass = if convex {
        max_abs <= tol
    } else {
        max_excess <= tol
    };
    Ok(BiconjugateReport {
        convex,
        max_abs_diff: max_abs,
        max_excess,
        argmax_gap: arg,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_is_neutral() {
        let f = GridFunction::new(-1.0, 0.5, vec![3.0, 1.0, 0.0, 2.0, 5.0]).unwrap();
        let d = GridFunction::new(0.0, 0.5, vec![0.0, f64::INFINITY]).unwrap();
        let h = inf_convolution(&f, &d).unwrap();
        assert_eq!(&h.values[..5], &f.values[..]);
    }

    #[test]
    fn rejects_interior_infinity() {
        assert!(GridFunction::new(0.0, 1.0, vec![0.0, f64::INFINITY, 1.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![f64::INFINITY, 0.0, f64::INFINITY]).is_ok());
    }

    #[test]
    fn quadratic_self_convolution_halves() {
        let g = Grid::span(-4.0, 4.0, 801).unwrap();
        let f = GridFunction::sample(&g, |x| x * x).unwrap();
        let h = inf_convolution(&f, &f).unwrap();
        let h2 = inf_convolution_convex_kernel(&f, &f).unwrap();
        for k in 0..h.len() {
            let x = h.x(k);
            if x.abs() <= 4.0 {
                assert!((h.values[k] - x * x / 2.0).abs() <= 4.0 * g.dx);
            }
            assert_eq!(h.values[k], h2.values[k]);
        }
    }

    #[test]
    fn conjugate_of_half_square() {
        let g = Grid::span(-10.0, 10.0, 4001).unwrap();
        let f = GridFunction::sample(&g, |x| 0.5 * x * x).unwrap();
        let r = biconjugate_check(&f, 16001, 1e-8).unwrap();
        assert!(r.convex && r.pass, "{r:?}");
    }

    #[test]
    fn nonconvex_biconjugate_is_below() {
        let g = Grid::span(-3.0, 6.0, 901).unwrap();
        let f = GridFunction::sample(&g, |x| (x * x).min((x - 3.0) * (x - 3.0))).unwrap();
        let r = biconjugate_check(&f, 4001, 1e-12).unwrap();
        assert!(!r.convex && r.pass, "{r:?}");
        assert!((r.argmax_gap - 1.5).abs() < 0.02);
        assert!(r.max_abs_diff > 2.0);
    }
}
