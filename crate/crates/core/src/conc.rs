//! Set enlargements and the concentration experiments built on them.
//!
//! Sets are structured (halfspaces, balls, boxes, slabs and Boolean
//! combinations) so that membership in `A + K` stays decidable. Halfspaces
//! with a coordinate normal reduce to one-dimensional distribution functions;
//! everything else is estimated by Monte Carlo, optionally importance sampled
//! with shifted copies of a product law.

use crate::bodies::log_concave_family;
use crate::error::{domain, Error, Result};
use crate::measures::{isotropic_rescale, Kind, Law, LpBall, Measure1D, ProductMeasure};
use crate::report::{CheckMode, CheckReport, Worst};
use crate::rng::{self, Rng};
use crate::special::{inv_reg_lower_gamma_ln, ln_reg_gamma_pair, normal_cdf};
use crate::stats::{margin_in_se, Accum, Estimate};
use crate::transports::lp_norm;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Membership tolerance.
pub const MEMBER_TOL: f64 = 1e-9;

/// Calibration bracket for the reported minimal constants.
pub const CONSTANT_BRACKET: f64 = 100.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hoelder conjugate, with `1 <-> inf`.
fn conjugate(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        domain(format!("norm exponent must be >= 1, got {q}"))
    }
}

/// `max_{||y||_q <= 1} ||y||_2` in dimension `n`.
fn l2_of_unit_ball(q: f64, n: usize) -> f64 {
    (n as f64).powf((0.5 - 1.0 / q).max(0.0))
}

// ---------------------------------------------------------------------------
// sets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// `{x : <u, x> <= c}`, `u` of unit Euclidean length
    Halfspace { u: Vec<f64>, c: f64 },
    /// `{x : ||x - center||_q <= radius}`
    Ball { center: Vec<f64>, radius: f64, q: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x in R^n : |x_i| >= u}`
    Slab { n: usize, i: usize, u: f64 },
    Complement { set: Box<SetSpec> },
    Intersection { sets: Vec<SetSpec> },
}

impl SetSpec {
    pub fn halfspace(u: Vec<f64>, c: f64) -> Result<Self> {
        let r = l2(&u);
        if !(r > 0.0 && r.is_finite()) || !c.is_finite() {
            return domain("halfspace needs a nonzero finite normal and finite offset");
        }
        Ok(SetSpec::Halfspace {
            u: u.iter().map(|v| v / r).collect(),
            c: c / r,
        })
    }

    /// `{x : x_i <= c}` in `R^n`.
    pub fn coordinate_halfspace(n: usize, i: usize, c: f64) -> Result<Self> {
        if i >= n {
            return domain(format!("coordinate {i} out of range for n = {n}"));
        }
        let mut u = vec![0.0; n];
        u[i] = 1.0;
        SetSpec::halfspace(u, c)
    }

    pub fn ball(center: Vec<f64>, radius: f64, q: f64) -> Result<Self> {
        let s = SetSpec::Ball { center, radius, q };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let s = SetSpec::Box { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::Halfspace { u, .. } => u.len(),
            SetSpec::Ball { center, .. } => center.len(),
            SetSpec::Box { lo, .. } => lo.len(),
            SetSpec::Slab { n, .. } => *n,
            SetSpec::Complement { set } => set.dim(),
            SetSpec::Intersection { sets } => sets.first().map_or(0, |s| s.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Halfspace { u, c } => {
                if u.is_empty() || (l2(u) - 1.0).abs() > 1e-9 || !c.is_finite() {
                    return domain("halfspace normal must be a unit vector; use SetSpec::halfspace");
                }
            }
            SetSpec::Ball { center, radius, q } => {
                check_q(*q)?;
                if center.is_empty() || !(*radius > 0.0) || center.iter().any(|v| !v.is_finite()) {
                    return domain("ball needs a finite center and positive radius");
                }
            }
            SetSpec::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::GridMismatch("box corners must have equal nonzero length".into()));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return domain("box needs lo <= hi in every coordinate");
                }
            }
            SetSpec::Slab { n, i, u } => {
                if *i >= *n || !u.is_finite() {
                    return domain(format!("slab coordinate {i} out of range for n = {n}"));
                }
            }
            SetSpec::Complement { set } => set.validate()?,
            SetSpec::Intersection { sets } => {
                if sets.is_empty() {
                    return domain("intersection of no sets");
                }
                let n = sets[0].dim();
                for s in sets {
                    s.validate()?;
                    if s.dim() != n {
                        return Err(Error::GridMismatch("intersection members differ in dimension".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SetSpec::Halfspace { u, c } => dot(u, x) <= c + MEMBER_TOL,
            SetSpec::Ball { center, radius, q } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                lp_norm(&d, *q) <= radius + MEMBER_TOL
            }
            SetSpec::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= a - MEMBER_TOL && *v <= b + MEMBER_TOL),
            SetSpec::Slab { i, u, .. } => x[*i].abs() >= u - MEMBER_TOL,
            SetSpec::Complement { set } => !set.contains(x),
            SetSpec::Intersection { sets } => sets.iter().all(|s| s.contains(x)),
        }
    }

    /// A point of the set close to the origin; used to place proposals.
    pub fn anchor(&self) -> Vec<f64> {
        match self {
            SetSpec::Halfspace { u, c } => {
                if *c >= 0.0 {
                    vec![0.0; u.len()]
                } else {
                    u.iter().map(|v| c * v).collect()
                }
            }
            SetSpec::Ball { center, radius, q } => {
                let r = lp_norm(center, *q);
                if r <= *radius {
                    vec![0.0; center.len()]
                } else {
                    center.iter().map(|v| v * (1.0 - radius / r)).collect()
                }
            }
            SetSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0f64.clamp(*a, *b)).collect(),
            SetSpec::Slab { n, i, u } => {
                let mut v = vec![0.0; *n];
                v[*i] = u.max(0.0);
                v
            }
            SetSpec::Complement { set } => vec![0.0; set.dim()],
            SetSpec::Intersection { sets } => {
                // the member farthest from the origin decides where the mass is
                sets.iter()
                    .map(|s| s.anchor())
                    .max_by(|a, b| l2(a).total_cmp(&l2(b)))
                    .unwrap()
            }
        }
    }

    /// Lower bound on `dist_2(A, r B_q)`, or on `dist_2(A, 0)` without `k`.
    pub fn dist_lower_bound(&self, k: Option<(f64, f64)>) -> Result<f64> {
        let n = self.dim();
        let (r, q) = k.unwrap_or((0.0, 2.0));
        Ok(match self {
            SetSpec::Halfspace { u, c } => {
                let h = r * lp_norm(u, conjugate(q));
                (-c - h).max(0.0)
            }
            SetSpec::Ball { center, radius, q: qa } => {
                if *qa == 2.0 {
                    (dist2_to_ball(center, r, q)? - radius).max(0.0)
                } else {
                    (l2(center) - r * l2_of_unit_ball(q, n) - radius * l2_of_unit_ball(*qa, n)).max(0.0)
                }
            }
            SetSpec::Box { .. } => (l2(&self.anchor()) - r * l2_of_unit_ball(q, n)).max(0.0),
            SetSpec::Slab { u, .. } => (u - r * l2_of_unit_ball(q, n)).max(0.0),
            SetSpec::Complement { .. } => 0.0,
            SetSpec::Intersection { sets } => {
                let mut m: f64 = 0.0;
                for s in sets {
                    m = m.max(s.dist_lower_bound(k)?);
                }
                m
            }
        })
    }
}

// ---------------------------------------------------------------------------
// enlargements

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub r: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    MinkowskiSum,
    IntersectionOfBalls,
}

/// `K = sum_i r_i B_{q_i}` or `K = cap_i r_i B_{q_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargementSpec {
    pub summands: Vec<Summand>,
    pub op: Operation,
}

impl EnlargementSpec {
    pub fn sum(parts: &[(f64, f64)]) -> Result<Self> {
        let e = EnlargementSpec {
            summands: parts.iter().map(|&(r, q)| Summand { r, q }).collect(),
            op: Operation::MinkowskiSum,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn intersection(parts: &[(f64, f64)]) -> Result<Self> {
        let e = EnlargementSpec {
            summands: parts.iter().map(|&(r, q)| Summand { r, q }).collect(),
            op: Operation::IntersectionOfBalls,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn ball(r: f64, q: f64) -> Result<Self> {
        EnlargementSpec::sum(&[(r, q)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.summands.is_empty() {
            return domain("enlargement needs at least one summand");
        }
        for s in &self.summands {
            check_q(s.q)?;
            if !(s.r > 0.0 && s.r.is_finite()) {
                return domain(format!("enlargement radius must be positive, got {}", s.r));
            }
        }
        Ok(())
    }

    /// Support function `h_K(u)`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.validate()?;
        match self.op {
            Operation::MinkowskiSum => Ok(self.summands.iter().map(|s| s.r * lp_norm(u, conjugate(s.q))).sum()),
            Operation::IntersectionOfBalls => match self.summands.as_slice() {
                [a] => Ok(a.r * lp_norm(u, conjugate(a.q))),
                [a, b] => support_two_balls(u, (a.r, a.q), (b.r, b.q)),
                _ => Err(Error::Unsupported(
                    "support of an intersection of more than two balls".into(),
                )),
            },
        }
    }
}

/// `x` maximizing `<u, x>` over `r B_q`, for `u >= 0` coordinatewise.
fn ball_maximizer(u: &[f64], r: f64, q: f64) -> Vec<f64> {
    let qs = conjugate(q);
    if q.is_infinite() {
        return u.iter().map(|v| if *v > 0.0 { r } else { 0.0 }).collect();
    }
    if q == 1.0 {
        let j = (0..u.len()).max_by(|&a, &b| u[a].total_cmp(&u[b])).unwrap();
        let mut x = vec![0.0; u.len()];
        x[j] = r;
        return x;
    }
    let nq = lp_norm(u, qs);
    u.iter().map(|v| r * (v / nq).powf(qs - 1.0)).collect()
}

/// Root `y >= 0` of `a y^{p-1} + b y^{q-1} = v` for `p, q > 1`.
fn two_power_root(a: f64, p: f64, b: f64, q: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let mut hi = f64::INFINITY;
    if a > 0.0 {
        hi = hi.min((v / a).powf(1.0 / (p - 1.0)));
    }
    if b > 0.0 {
        hi = hi.min((v / b).powf(1.0 / (q - 1.0)));
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if a * m.powf(p - 1.0) + b * m.powf(q - 1.0) > v {
            hi = m;
        } else {
            lo = m;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `h(u) = sup {<u, x> : ||x||_qa <= a, ||x||_qb <= b}` from the KKT system
/// `|u_i| = A |x_i|^{qa-1} + B |x_i|^{qb-1}` when both constraints bind.
pub fn support_two_balls(u: &[f64], (a, qa): (f64, f64), (b, qb): (f64, f64)) -> Result<f64> {
    check_q(qa)?;
    check_q(qb)?;
    let w: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let nz = w.iter().filter(|v| **v > 0.0).count();
    if nz == 0 {
        return Ok(0.0);
    }
    if nz == 1 {
        return Ok(a.min(b) * w.iter().cloned().fold(0.0, f64::max));
    }
    if qa == qb {
        return Ok(a.min(b) * lp_norm(&w, conjugate(qa)));
    }
    let xa = ball_maximizer(&w, a, qa);
    if lp_norm(&xa, qb) <= b {
        return Ok(dot(&w, &xa));
    }
    let xb = ball_maximizer(&w, b, qb);
    if lp_norm(&xb, qa) <= a {
        return Ok(dot(&w, &xb));
    }
    let finite = |q: f64| q > 1.0 && q.is_finite();
    if !finite(qa) || !finite(qb) {
        return Err(Error::Unsupported(
            "support of an intersection with an l_1 or l_inf ball along a non-axis direction".into(),
        ));
    }
    // for angle th, scale s so that ||x||_qa = a, and compare ||x||_qb with b
    let at = |th: f64| -> Vec<f64> {
        let (c, s) = (th.cos(), th.sin());
        let x_of = |ls: f64| -> Vec<f64> {
            let m = ls.exp();
            w.iter().map(|v| two_power_root(m * c, qa, m * s, qb, *v)).collect()
        };
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lp_norm(&x_of(mid), qa) > a {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        x_of(0.5 * (lo + hi))
    };
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lp_norm(&at(mid), qb) > b {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(dot(&w, &at(0.5 * (lo + hi))))
}

// ---------------------------------------------------------------------------
// projections

/// Euclidean projection onto `r B_1^n`, by sorting.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    let s: f64 = v.iter().map(|x| x.abs()).sum();
    if s <= r {
        return v.to_vec();
    }
    let mut m: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, mk) in m.iter().enumerate() {
        acc += mk;
        let t = (acc - r) / (k + 1) as f64;
        if *mk > t {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

/// Root `y in [0, a]` of `y + c y^{p-1} = a`, `p > 1`.
fn prox_root(a: f64, c: f64, p: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, a);
    let mut y = if p >= 2.0 { a } else { 0.5 * a };
    for _ in 0..100 {
        let g = y + c * y.powf(p - 1.0) - a;
        if g > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = 1.0 + c * (p - 1.0) * y.powf(p - 2.0);
        let mut next = y - g / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-15 * a {
            return next;
        }
        y = next;
    }
    y
}

/// Euclidean projection onto `r B_p^n` for `1 <= p <= inf`. For `1 < p < inf`,
/// `p != 2`, the multiplier of the KKT system is found by bisection.
pub fn project_lp_ball(v: &[f64], r: f64, p: f64) -> Vec<f64> {
    if lp_norm(v, p) <= r {
        return v.to_vec();
    }
    if p == 1.0 {
        return project_l1_ball(v, r);
    }
    if p.is_infinite() {
        return v.iter().map(|x| x.clamp(-r, r)).collect();
    }
    if p == 2.0 {
        let k = r / l2(v);
        return v.iter().map(|x| x * k).collect();
    }
    let n = v.len() as f64;
    let target = r.powf(p);
    let amax = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    // at this multiplier every |y_i| <= r n^{-1/p}
    let ys = |lam: f64| -> Vec<f64> { v.iter().map(|x| prox_root(x.abs(), lam * p, p)).collect() };
    let phi = |lam: f64| -> f64 { ys(lam).iter().map(|y| y.powf(p)).sum::<f64>() - target };
    // phi decreases in the multiplier; Illinois iteration on a bracket
    let (mut a, mut b) = (0.0, amax / (p * (r * n.powf(-1.0 / p)).powf(p - 1.0)));
    let (mut fa, mut fb) = (phi(a), phi(b));
    let mut side = 0;
    for _ in 0..200 {
        if b - a <= 1e-9 * b || fb.abs() <= 1e-13 * target {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = phi(c);
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    ys(b).iter().zip(v).map(|(y, x)| y * x.signum()).collect()
}

/// `dist_2(v, r B_q)`.
pub fn dist2_to_ball(v: &[f64], r: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let p = project_lp_ball(v, r, q);
    Ok(v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Decides `dist_2(v, r B_q) <= rho`, projecting only when the cheap radial
/// and separating-hyperplane bounds disagree.
fn within_dist2(v: &[f64], r: f64, q: f64, rho: f64) -> bool {
    let nq = lp_norm(v, q);
    if nq <= r {
        return true;
    }
    let n2 = l2(v);
    let upper = n2 * (1.0 - r / nq);
    if upper <= rho {
        return true;
    }
    let w: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let y = ball_maximizer(&w, r, q);
    let near = w.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if near <= rho {
        return true;
    }
    let lower = (n2 * n2 - r * lp_norm(v, conjugate(q))) / n2;
    if lower > rho + MEMBER_TOL {
        return false;
    }
    let p = project_lp_ball(v, r, q);
    v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= rho + MEMBER_TOL
}

// ---------------------------------------------------------------------------
// membership in A + K

/// Compiled membership test for `A + K`.
#[derive(Debug, Clone, PartialEq)]
pub enum Enlarged {
    Plain(SetSpec),
    /// `{<u, x> <= c}` with `h_K(u)` already added to `c`
    Halfspace { u: Vec<f64>, c: f64 },
    /// `{x : dist_2(x - center, r B_q) <= rho}`
    BallDistance { center: Vec<f64>, rho: f64, r: f64, q: f64 },
    /// `{x : dist_q(x, box) <= r}`
    BoxDistance { lo: Vec<f64>, hi: Vec<f64>, r: f64, q: f64 },
}

const SUPPORTED_FORMS: &str = "supported forms: any set without enlargement; a halfspace with any \
enlargement; an l_q ball plus one ball (or several with that ball's exponent) when one of the two \
exponents is 2; a box plus balls of a single exponent";

impl Enlarged {
    pub fn new(a: &SetSpec, e: Option<&EnlargementSpec>) -> Result<Self> {
        a.validate()?;
        let Some(e) = e else {
            return Ok(Enlarged::Plain(a.clone()));
        };
        e.validate()?;
        let unsupported = || Err(Error::Unsupported(format!("A + K for this combination; {SUPPORTED_FORMS}")));
        if let SetSpec::Halfspace { u, c } = a {
            return Ok(Enlarged::Halfspace {
                u: u.clone(),
                c: c + e.support(u)?,
            });
        }
        let parts: Vec<Summand> = match (e.op, e.summands.len()) {
            (Operation::MinkowskiSum, _) | (Operation::IntersectionOfBalls, 1) => e.summands.clone(),
            _ => return unsupported(),
        };
        match a {
            SetSpec::Ball { center, radius, q: qa } => {
                let mut rho = *radius;
                let mut rest = Vec::new();
                for s in &parts {
                    if s.q == *qa {
                        rho += s.r;
                    } else {
                        rest.push(*s);
                    }
                }
                match rest.as_slice() {
                    [] => Ok(Enlarged::Plain(SetSpec::Ball {
                        center: center.clone(),
                        radius: rho,
                        q: *qa,
                    })),
                    [s] if *qa == 2.0 => Ok(Enlarged::BallDistance {
                        center: center.clone(),
                        rho,
                        r: s.r,
                        q: s.q,
                    }),
                    [s] if s.q == 2.0 => Ok(Enlarged::BallDistance {
                        center: center.clone(),
                        rho: s.r,
                        r: rho,
                        q: *qa,
                    }),
                    _ => unsupported(),
                }
            }
            SetSpec::Box { lo, hi } => {
                let q = parts[0].q;
                if parts.iter().any(|s| s.q != q) {
                    return unsupported();
                }
                Ok(Enlarged::BoxDistance {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    r: parts.iter().map(|s| s.r).sum(),
                    q,
                })
            }
            _ => unsupported(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Enlarged::Plain(s) => s.contains(x),
            Enlarged::Halfspace { u, c } => dot(u, x) <= c + MEMBER_TOL,
            Enlarged::BallDistance { center, rho, r, q } => {
                let v: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                within_dist2(&v, *r, *q, *rho)
            }
            Enlarged::BoxDistance { lo, hi, r, q } => {
                let d: Vec<f64> = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| v - v.clamp(*a, *b))
                    .collect();
                lp_norm(&d, *q) <= r + MEMBER_TOL
            }
        }
    }
}

// ---------------------------------------------------------------------------
// measuring

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    /// skip the exact halfspace reduction
    pub force_mc: bool,
    /// centres of an equal-weight mixture of shifted copies of a product law
    pub shifts: Vec<Vec<f64>>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 100_000,
            seed: 0,
            force_mc: false,
            shifts: Vec::new(),
        }
    }
}

/// One-dimensional law of `x_i` under `law`.
fn coordinate_law(law: &Law, i: usize) -> Measure1D {
    match law {
        Law::Product(m) => m.components[i].clone(),
        Law::Ball(b) => b.marginal(),
    }
}

/// Exact `mu({<u, x> <= c})` when `u` is a signed coordinate vector.
pub fn exact_halfspace_measure(law: &Law, u: &[f64], c: f64) -> Option<f64> {
    let nz: Vec<usize> = (0..u.len()).filter(|&i| u[i] != 0.0).collect();
    if nz.len() != 1 || u.len() != law.dim() {
        return None;
    }
    let i = nz[0];
    let m = coordinate_law(law, i);
    Some(if u[i] > 0.0 {
        m.cdf(c / u[i])
    } else {
        m.sf(c / u[i])
    })
}

/// Log density up to a constant that is the same for every shift.
fn ln_density_shape(m: &Measure1D, x: f64) -> f64 {
    match m.kind {
        Kind::NuP { p } => -((x - m.loc) / m.scale).abs().powf(p),
        _ => m.ln_density(x),
    }
}

/// Weighted Monte Carlo: `f(x, out)` writes `k` values per draw, which are
/// multiplied by the importance weight and accumulated.
pub fn mc_terms(
    law: &Law,
    shifts: &[Vec<f64>],
    samples: usize,
    seed: u64,
    k: usize,
    f: &dyn Fn(&[f64], &mut [f64]),
) -> Result<Vec<Accum>> {
    let n = law.dim();
    let comps = match (law, shifts.is_empty()) {
        (_, true) => None,
        (Law::Product(m), false) => Some(&m.components),
        (Law::Ball(_), false) => {
            return Err(Error::Unsupported("importance shifts need a product law".into()));
        }
    };
    if shifts.iter().any(|s| s.len() != n) {
        return Err(Error::GridMismatch("shift length differs from the dimension".into()));
    }
    let chunks = rng::chunked(samples, seed, |r: &mut Rng, _, count| {
        let mut acc = vec![Accum::default(); k];
        let mut x = vec![0.0; n];
        let mut out = vec![0.0; k];
        let mut lq = vec![0.0; shifts.len()];
        for _ in 0..count {
            law.sample_into(r, &mut x);
            let mut w = 1.0;
            if let Some(comps) = comps {
                let j = r.gen_range(0..shifts.len());
                for (xi, m) in x.iter_mut().zip(&shifts[j]) {
                    *xi += m;
                }
                let lf: f64 = comps.iter().zip(&x).map(|(c, xi)| ln_density_shape(c, *xi)).sum();
                for (l, m) in lq.iter_mut().zip(shifts) {
                    *l = comps
                        .iter()
                        .zip(x.iter().zip(m))
                        .map(|(c, (xi, mi))| ln_density_shape(c, xi - mi))
                        .sum();
                }
                let top = lq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lmix = top + (lq.iter().map(|l| (l - top).exp()).sum::<f64>() / shifts.len() as f64).ln();
                w = (lf - lmix).exp();
            }
            f(&x, &mut out);
            for (a, v) in acc.iter_mut().zip(&out) {
                a.push(w * v);
            }
        }
        acc
    });
    let mut total = vec![Accum::default(); k];
    for c in &chunks {
        for (t, a) in total.iter_mut().zip(c) {
            t.merge(a);
        }
    }
    Ok(total)
}

/// `mu(A + K)`: exact for coordinate halfspaces, Monte Carlo otherwise.
pub fn mc_measure(law: &Law, a: &SetSpec, e: Option<&EnlargementSpec>, opts: &McOptions) -> Result<Estimate> {
    if a.dim() != law.dim() {
        return Err(Error::GridMismatch(format!(
            "set has dimension {}, law has {}",
            a.dim(),
            law.dim()
        )));
    }
    let set = Enlarged::new(a, e)?;
    let half = match &set {
        Enlarged::Halfspace { u, c } | Enlarged::Plain(SetSpec::Halfspace { u, c }) => Some((u, *c)),
        _ => None,
    };
    if let (Some((u, c)), false) = (half, opts.force_mc) {
        if let Some(v) = exact_halfspace_measure(law, u, c) {
            return Ok(Estimate::exact(v));
        }
    }
    if opts.samples < 2 {
        return domain("Monte Carlo needs at least two samples");
    }
    let acc = mc_terms(law, &opts.shifts, opts.samples, opts.seed, 1, &|x, out| {
        out[0] = if set.contains(x) { 1.0 } else { 0.0 };
    })?;
    Ok(acc[0].estimate())
}

// ---------------------------------------------------------------------------
// quasi-Monte Carlo

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Randomly shifted Halton replicates on `[lo, hi]^d`: returns the mean of
/// `f` over each replicate.
pub fn rqmc_means(
    d: usize,
    lo: f64,
    hi: f64,
    points: usize,
    replicates: usize,
    seed: u64,
    k: usize,
    f: &dyn Fn(&[f64], &mut [f64]),
) -> Result<Vec<Vec<f64>>> {
    if d == 0 || d > HALTON_BASES.len() {
        return domain(format!("Halton points support dimensions 1..=8, got {d}"));
    }
    let mut out = Vec::with_capacity(replicates);
    let mut x = vec![0.0; d];
    let mut v = vec![0.0; k];
    for rep in 0..replicates {
        let mut r = rng::stream(seed, rep as u64);
        let shift: Vec<f64> = (0..d).map(|_| r.gen::<f64>()).collect();
        let mut sums = vec![0.0; k];
        for i in 1..=points as u64 {
            for j in 0..d {
                let u = (radical_inverse(i, HALTON_BASES[j]) + shift[j]).fract();
                x[j] = lo + (hi - lo) * u;
            }
            f(&x, &mut v);
            for (s, a) in sums.iter_mut().zip(&v) {
                *s += a;
            }
        }
        out.push(sums.iter().map(|s| s / points as f64).collect());
    }
    Ok(out)
}

fn replicate_estimate(vals: &[f64]) -> Estimate {
    let mut a = Accum::default();
    for v in vals {
        a.push(*v);
    }
    a.estimate()
}

// ---------------------------------------------------------------------------
// one-dimensional profiles

/// `nu(-inf, x]` for the symmetric exponential law.
fn nu_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

/// Cheeger constant `inf f / min(F, 1 - F)` of a law on the line.
pub fn cheeger_constant(m: &Measure1D) -> Result<f64> {
    // tabulated densities are unreliable in the last cells
    let lo = m.quantile(1e-6)?;
    let hi = m.quantile(1.0 - 1e-6)?;
    let ratio = |x: f64| {
        let (f, s) = m.cdf_pair(x);
        let t = f.min(s);
        if t <= 0.0 {
            f64::INFINITY
        } else {
            m.density(x) / t
        }
    };
    let k = 4000;
    let h = (hi - lo) / k as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 1..k {
        let x = lo + h * i as f64;
        let v = ratio(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let (_, v) = crate::quad::golden_min(ratio, (best.1 - h).max(lo), (best.1 + h).min(hi), 1e-12);
    Ok(v.min(best.0))
}

/// `t`-values log-spaced on `[a, b]`.
fn log_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

fn x_lattice() -> Vec<f64> {
    (-5..=5).map(|v| v as f64).collect()
}

// ---------------------------------------------------------------------------
// exact checks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLattice {
    pub p: Vec<f64>,
    pub n: Vec<usize>,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl Default for ExactLattice {
    fn default() -> Self {
        ExactLattice {
            p: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            n: vec![2, 8, 32],
            x: x_lattice(),
            t: log_grid(0.1, 20.0, 40),
        }
    }
}

/// `nu^n(A) = nu(-inf, x]` implies
/// `nu^n(A + 6 sqrt(2t) B_2 + 18t B_1) >= nu(-inf, x + t]`, on coordinate halfspaces.
pub fn two_level_exp(lat: &ExactLattice) -> Result<CheckReport> {
    let mut w = Worst::new(1e-12);
    for &n in &lat.n {
        let law = Law::nu_pn(1.0, n)?;
        for &x in &lat.x {
            let a = SetSpec::coordinate_halfspace(n, 0, x)?;
            for &t in &lat.t {
                if t < 0.0 {
                    return Err(Error::Hypothesis(format!("two_level_exp needs t >= 0, got {t}")));
                }
                let e = EnlargementSpec::sum(&[(6.0 * (2.0 * t).sqrt(), 2.0), (18.0 * t, 1.0)])?;
                let lhs = mc_measure(&law, &a, Some(&e), &McOptions::default())?;
                w.le(nu_cdf(x + t), lhs.mean, &[("n", n as f64), ("x", x), ("t", t)]);
            }
        }
    }
    Ok(w
        .into_report("two_level_exp")
        .param("n", json!(lat.n))
        .param("x", json!(lat.x))
        .param("t_points", lat.t.len() as u64))
}

/// `(t, nu^n(A + E_t), nu(x + t))` along `ts` for the coordinate halfspace
/// `{x_1 <= x}`; the same quantities `two_level_exp` compares.
pub fn two_level_curve(n: usize, x: f64, ts: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let law = Law::nu_pn(1.0, n)?;
    let a = SetSpec::coordinate_halfspace(n, 0, x)?;
    ts.iter()
        .map(|&t| {
            if t < 0.0 {
                return Err(Error::Hypothesis(format!("two_level_curve needs t >= 0, got {t}")));
            }
            let e = EnlargementSpec::sum(&[(6.0 * (2.0 * t).sqrt(), 2.0), (18.0 * t, 1.0)])?;
            let lhs = mc_measure(&law, &a, Some(&e), &McOptions::default())?;
            Ok((t, lhs.mean, nu_cdf(x + t)))
        })
        .collect()
}

/// Smallest `C >= 0` with `G(c + C h) >= target`, or zero when `G(c)` already
/// reaches it.
fn minimal_shift(m: &Measure1D, c: f64, h: f64, target: f64) -> Result<f64> {
    if m.cdf(c) >= target {
        return Ok(0.0);
    }
    Ok((m.quantile(target)? - c).max(0.0) / h)
}

struct ConstantSweep {
    best: f64,
    at: Vec<(String, f64)>,
    points: u64,
}

impl ConstantSweep {
    fn new() -> Self {
        ConstantSweep {
            best: 0.0,
            at: Vec::new(),
            points: 0,
        }
    }

    fn push(&mut self, c: f64, at: &[(&str, f64)]) {
        self.points += 1;
        if c > self.best || self.at.is_empty() {
            self.best = self.best.max(c);
            self.at = at.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        }
    }

    fn report(&self, id: &str, key: &str) -> CheckReport {
        let mut r = CheckReport::new(id, CheckMode::Report)
            .estimate(key, self.best)
            .estimate("points", self.points as f64)
            .estimate("bracket", CONSTANT_BRACKET)
            .estimate("within_bracket", if self.best <= CONSTANT_BRACKET { 1.0 } else { 0.0 });
        for (k, v) in &self.at {
            r = r.estimate(&format!("worst_{k}"), *v);
        }
        r.note(format!(
            "minimal constant reported, not asserted; bracket {CONSTANT_BRACKET} fixed after a pilot run"
        ))
    }
}

/// Minimal `C` with `nu_p^n(A + C(t^{1/p} B_p + t^{1/2} B_2)) >= min{1/2, e^t nu_p^n(A)}`
/// over coordinate halfspaces with `nu_p^n(A) = nu(-inf, x]`; `p in [1, 2]`.
pub fn magia(lat: &ExactLattice) -> Result<CheckReport> {
    let mut sw = ConstantSweep::new();
    for &p in &lat.p {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::Hypothesis(format!("magia needs p in [1, 2], got {p}")));
        }
        let m = Measure1D::nu_p(p)?;
        for &x in &lat.x {
            let mass = nu_cdf(x);
            let c = m.quantile(mass)?;
            for &t in &lat.t {
                if !(t > 0.0) {
                    return Err(Error::Hypothesis(format!("magia needs t > 0, got {t}")));
                }
                let target = 0.5f64.min(t.exp() * mass);
                let k = minimal_shift(&m, c, t.powf(1.0 / p) + t.sqrt(), target)?;
                sw.push(k, &[("p", p), ("x", x), ("t", t)]);
            }
        }
    }
    Ok(sw
        .report("magia", "c_min")
        .param("p", json!(lat.p))
        .param("n", json!(lat.n))
        .param("x", json!(lat.x))
        .param("t_points", lat.t.len() as u64)
        .note("minimal constant reported, not asserted; coordinate halfspaces do not depend on n"))
}

/// `h_K(e_1)` of the enlargement body used for `mu_{p,n}`: the sum
/// `t^{1/p} B_p + t^{1/2} B_2` below `p = 2`, the intersection from `p = 2` on.
fn ball_body(p: f64, t: f64) -> Result<EnlargementSpec> {
    let parts = [(t.powf(1.0 / p), p), (t.sqrt(), 2.0)];
    if p < 2.0 {
        EnlargementSpec::sum(&parts)
    } else if p == 2.0 {
        EnlargementSpec::ball(t.sqrt(), 2.0)
    } else {
        EnlargementSpec::intersection(&parts)
    }
}

/// Orders used for the concentration-inequality form.
const CI_ORDERS: [f64; 8] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0];

/// Minimal constants for `mu_{p,n}` on coordinate halfspaces: the enlargement
/// form `mu(A + C K_t) >= min{1/2, e^t mu(A)}` and the form
/// `1 - mu(A + beta Z_q) <= e^{-q} (1 - mu(A))` for `mu(A) >= 1/2`.
pub fn ci_halfspace_mu(lat: &ExactLattice) -> Result<CheckReport> {
    let mut enl = ConstantSweep::new();
    let mut ci = ConstantSweep::new();
    for &p in &lat.p {
        for &n in &lat.n {
            let ball = LpBall::new(p, n)?;
            let m = ball.marginal();
            let u = {
                let mut u = vec![0.0; n];
                u[0] = 1.0;
                u
            };
            for &x in &lat.x {
                let mass = nu_cdf(x);
                let c = m.quantile(mass)?;
                for &t in &lat.t {
                    let h = ball_body(p, t)?.support(&u)?;
                    let target = 0.5f64.min(t.exp() * mass);
                    let k = minimal_shift(&m, c, h, target)?;
                    enl.push(k, &[("p", p), ("n", n as f64), ("x", x), ("t", t)]);
                }
                if mass >= 0.5 {
                    let tail = m.sf(c);
                    for &q in &CI_ORDERS {
                        let zq = m.abs_moment(q)?.powf(1.0 / q);
                        // symmetric marginal: the upper quantile of e^{-q} tail
                        let need = -m.quantile((-q).exp() * tail)?;
                        ci.push((need - c).max(0.0) / zq, &[("p", p), ("n", n as f64), ("x", x), ("q", q)]);
                    }
                }
            }
        }
    }
    let mut r = enl.report("ci_halfspace_mu", "c_min");
    r = r.estimate("beta_min", ci.best);
    for (k, v) in &ci.at {
        r = r.estimate(&format!("beta_worst_{k}"), *v);
    }
    let within = enl.best <= CONSTANT_BRACKET && ci.best <= CONSTANT_BRACKET;
    Ok(r
        .estimate("within_bracket", if within { 1.0 } else { 0.0 })
        .param("p", json!(lat.p))
        .param("n", json!(lat.n))
        .param("x", json!(lat.x))
        .param("t_points", lat.t.len() as u64)
        .param("q", json!(CI_ORDERS)))
}

/// `mu_{p,n}(A) = Phi(x)` implies `mu_{p,n}(A + 18 sqrt(2) t B_2) >= Phi(x + t)`,
/// `p >= 2`, on coordinate halfspaces.
pub fn gauss_profile(lat: &ExactLattice) -> Result<CheckReport> {
    let mut w = Worst::new(1e-9);
    for &p in &lat.p {
        if p < 2.0 {
            return Err(Error::Hypothesis(format!("gauss_profile needs p >= 2, got {p}")));
        }
        for &n in &lat.n {
            let law = Law::ball(p, n)?;
            let m = coordinate_law(&law, 0);
            for &x in &lat.x {
                let c = m.quantile(normal_cdf(x))?;
                let a = SetSpec::coordinate_halfspace(n, 0, c)?;
                for &t in &lat.t {
                    let e = EnlargementSpec::ball(18.0 * 2f64.sqrt() * t, 2.0)?;
                    let lhs = mc_measure(&law, &a, Some(&e), &McOptions::default())?.mean;
                    w.le(normal_cdf(x + t), lhs, &[("p", p), ("n", n as f64), ("x", x), ("t", t)]);
                }
            }
        }
    }
    Ok(w
        .into_report("gauss_profile")
        .param("p", json!(lat.p))
        .param("n", json!(lat.n))
        .param("x", json!(lat.x))
        .param("t_points", lat.t.len() as u64))
}

/// Cheeger constants of isotropic log-concave laws, asserted inside `[lo, hi]`.
pub fn cheeger_1d(lo: f64, hi: f64) -> Result<CheckReport> {
    let mut family: Vec<(String, Measure1D)> = vec![
        ("nu_2".into(), Measure1D::nu_p(2.0)?),
        ("nu_1.5".into(), Measure1D::nu_p(1.5)?),
        ("nu_4".into(), Measure1D::nu_p(4.0)?),
        ("mu_marginal_1_4".into(), Measure1D::mu_marginal(1.0, 4)?),
        ("mu_marginal_2_6".into(), Measure1D::mu_marginal(2.0, 6)?),
    ];
    family.extend(log_concave_family()?);
    let mut w = Worst::new(0.0);
    let mut r = CheckReport::new("cheeger_1d", CheckMode::Exact);
    for (name, m) in &family {
        let k = cheeger_constant(&isotropic_rescale(m)?)?;
        r = r.estimate(&format!("kappa_{name}"), k);
        w.push((k - lo).min(hi - k), &[]);
    }
    let nu = Measure1D::nu();
    let k_nu = cheeger_constant(&nu)?;
    let k_nu_iso = cheeger_constant(&isotropic_rescale(&nu)?)?;
    let mut out = w.into_report("cheeger_1d");
    out.estimates.extend(r.estimates);
    Ok(out
        .estimate("kappa_nu", k_nu)
        .estimate("kappa_nu_isotropic", k_nu_iso)
        .param("bracket", json!([lo, hi]))
        .note("the isotropic symmetric exponential law has kappa = sqrt(2) and is reported outside the family"))
}

// ---------------------------------------------------------------------------
// small l_p norms

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalaNorma {
    pub p: f64,
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub exact: f64,
    pub mc: Estimate,
    /// `(exact - mc) / se`
    pub z: f64,
    /// largest `c_n(alpha)` below which `P(n) < alpha^{-n}` holds at every tested `n`
    pub c_threshold: f64,
    pub max_ratio: f64,
}

/// `nu_p^n(||x||_p < c n^{1/p}) = P(n/p, c^p n)`.
pub fn small_norm_probability(p: f64, n: usize, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Ok(0.0);
    }
    Ok(ln_reg_gamma_pair(n as f64 / p, c.powf(p) * n as f64)?.0.exp())
}

/// `c_n` with `P(n/p, c_n^p n) = alpha^{-n}`.
pub fn small_norm_threshold(p: f64, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    let nf = n as f64;
    Ok((inv_reg_lower_gamma_ln(nf / p, -nf * alpha.ln())? / nf).powf(1.0 / p))
}

/// Exact value against an importance-sampled estimate, the decay ratio
/// `P(n)/P(n-1)` over `ns` and the threshold `min_n c_n(alpha)`.
pub fn mala_norma(p: f64, n: usize, c: f64, alpha: f64, ns: &[usize], samples: usize, seed: u64) -> Result<MalaNorma> {
    if !(p >= 1.0) || n == 0 || !(c > 0.0) {
        return Err(Error::Hypothesis(format!("mala_norma needs p >= 1, n >= 1, c > 0; got {p}, {n}, {c}")));
    }
    let exact = small_norm_probability(p, n, c)?;
    // proposal: nu_p^n scaled by sigma, which puts half its mass in the event
    let sigma = c * p.powf(1.0 / p);
    let nf = n as f64;
    let k = (c.powf(p) * nf, sigma.powf(-p) - 1.0);
    let parts = rng::chunked(samples, seed, |r: &mut Rng, _, count| {
        let mut a = Accum::default();
        let mut x = vec![0.0; n];
        let law = ProductMeasure::nu_pn(p, n).unwrap();
        for _ in 0..count {
            law.sample_into(r, &mut x);
            let s: f64 = x.iter().map(|v| (sigma * v).abs().powf(p)).sum();
            let w = if s < k.0 { (nf * sigma.ln() + s * k.1).exp() } else { 0.0 };
            a.push(w);
        }
        a
    });
    let mut acc = Accum::default();
    for a in &parts {
        acc.merge(a);
    }
    let mc = acc.estimate();
    let z = if mc.se > 0.0 { (exact - mc.mean) / mc.se } else { 0.0 };
    let mut max_ratio: f64 = 0.0;
    let mut prev: Option<f64> = None;
    for &m in ns {
        let v = small_norm_probability(p, m, c)?;
        if let Some(pv) = prev {
            max_ratio = max_ratio.max(v / pv);
        }
        prev = Some(v);
    }
    let mut c_threshold = f64::INFINITY;
    for &m in ns {
        c_threshold = c_threshold.min(small_norm_threshold(p, m, alpha)?);
    }
    Ok(MalaNorma {
        p,
        n,
        c,
        alpha,
        exact,
        mc,
        z,
        c_threshold,
        max_ratio,
    })
}

impl MalaNorma {
    pub fn to_check(&self, ns: &[usize]) -> CheckReport {
        let m = if self.max_ratio < 1.0 { -self.z.abs() } else { f64::NEG_INFINITY };
        CheckReport::new("mala_norma", CheckMode::MonteCarlo)
            .param("p", self.p)
            .param("n", self.n as u64)
            .param("c", self.c)
            .param("alpha", self.alpha)
            .param("ratio_n", json!(ns))
            .estimate("exact", self.exact)
            .estimate("mc", self.mc.mean)
            .std_error("mc", self.mc.se)
            .estimate("z", self.z)
            .estimate("max_ratio", self.max_ratio)
            .estimate("c_threshold", self.c_threshold)
            .estimate("bound", self.alpha.powf(-(self.n as f64)))
            .with_samples(self.mc.n, 0)
            .judged(m, 3.0)
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo enlargement checks

/// Result of a paired estimate `lhs - k rhs >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Paired {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// `mean(lhs - k rhs) / se`
    pub margin: f64,
    /// `ln(lhs / (k rhs))`
    pub log_gain: f64,
}

fn paired(acc: &[Accum], k: f64) -> Paired {
    let d = acc[2].estimate();
    let (l, r) = (acc[0].estimate(), acc[1].estimate());
    Paired {
        lhs: l,
        rhs: r,
        margin: margin_in_se(d.mean, d.se),
        log_gain: (l.mean / (k * r.mean)).ln(),
    }
}

/// Accumulates `[a, b, a - k b]` with `(a, b) = g(x)`.
fn paired_terms(
    law: &Law,
    shifts: &[Vec<f64>],
    samples: usize,
    seed: u64,
    k: f64,
    g: &dyn Fn(&[f64]) -> (f64, f64),
) -> Result<Paired> {
    let acc = mc_terms(law, shifts, samples, seed, 3, &|x, out| {
        let (a, b) = g(x);
        out[0] = a;
        out[1] = b;
        out[2] = a - k * b;
    })?;
    Ok(paired(&acc, k))
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Moves `m` toward the origin by `r` along its largest coordinate.
fn pulled_in(m: &[f64], r: f64) -> Vec<f64> {
    let mut v = m.to_vec();
    if let Some(j) = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())) {
        let s = v[j].abs();
        v[j] = v[j].signum() * (s - r).max(0.0);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCase {
    pub label: String,
    pub t: f64,
    pub result: Paired,
    /// second alternative of a disjunction, when the check has one
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative: Option<Paired>,
}

impl McCase {
    pub fn margin(&self) -> f64 {
        match &self.alternative {
            Some(a) => self.result.margin.max(a.margin),
            None => self.result.margin,
        }
    }
}

fn mc_report(id: &str, cases: &[McCase], samples: usize, seed: u64) -> CheckReport {
    let mut worst = f64::INFINITY;
    let mut r = CheckReport::new(id, CheckMode::MonteCarlo);
    for (i, c) in cases.iter().enumerate() {
        worst = worst.min(c.margin());
        r = r
            .estimate(&format!("case{i}_margin"), c.margin())
            .estimate(&format!("case{i}_log_gain"), c.result.log_gain)
            .estimate(&format!("case{i}_lhs"), c.result.lhs.mean)
            .std_error(&format!("case{i}_lhs"), c.result.lhs.se)
            .estimate(&format!("case{i}_rhs"), c.result.rhs.mean)
            .std_error(&format!("case{i}_rhs"), c.result.rhs.se);
    }
    let labels: Vec<String> = cases.iter().map(|c| format!("{} (t={})", c.label, c.t)).collect();
    r.param("cases", json!(labels))
        .with_samples(samples as u64, seed)
        .judged(if cases.is_empty() { 0.0 } else { worst }, 3.0)
}

/// `int_{A + tB_1} |x|^2 dnu^n >= e^{t/2} int_A (|x| - t sqrt(n))_+^2 dnu^n`
/// for `A = x0 + s B_1^n`.
pub fn second_moment(x0: &[f64], s: f64, t: f64, samples: usize, seed: u64) -> Result<McCase> {
    if !(t >= 0.0) || !(s > 0.0) {
        return Err(Error::Hypothesis(format!("second_moment needs t >= 0 and s > 0, got {t}, {s}")));
    }
    let n = x0.len();
    let law = Law::nu_pn(1.0, n)?;
    let a = SetSpec::ball(x0.to_vec(), s, 1.0)?;
    let big = match t > 0.0 {
        true => Enlarged::new(&a, Some(&EnlargementSpec::ball(t, 1.0)?))?,
        false => Enlarged::Plain(a.clone()),
    };
    let sn = t * (n as f64).sqrt();
    let k = (t / 2.0).exp();
    let result = paired_terms(&law, &[], samples, seed, k, &|x| {
        let r2 = dot(x, x);
        let lhs = if big.contains(x) { r2 } else { 0.0 };
        let rhs = match (a.contains(x), sn > 0.0) {
            (false, _) => 0.0,
            (true, false) => r2,
            (true, true) => (r2.sqrt() - sn).max(0.0).powi(2),
        };
        (lhs, rhs)
    })?;
    Ok(McCase {
        label: format!("x0={x0:?} s={s}"),
        t,
        result,
        alternative: None,
    })
}

/// `nu^n((A + tB_1) cap {|x_i| >= u - t}) >= e^{t/2} nu^n(A cap {|x_i| >= u})`, `u >= t > 0`.
pub fn exp_slab(a: &SetSpec, i: usize, u: f64, t: f64, samples: usize, seed: u64) -> Result<McCase> {
    if !(t > 0.0 && u >= t) || i >= a.dim() {
        return Err(Error::Hypothesis(format!("exp_slab needs u >= t > 0 and i < n, got u={u}, t={t}, i={i}")));
    }
    let law = Law::nu_pn(1.0, a.dim())?;
    let big = Enlarged::new(a, Some(&EnlargementSpec::ball(t, 1.0)?))?;
    let result = paired_terms(&law, &[], samples, seed, (t / 2.0).exp(), &|x| {
        let l = ind(big.contains(x) && x[i].abs() >= u - t - MEMBER_TOL);
        let r = ind(a.contains(x) && x[i].abs() >= u - MEMBER_TOL);
        (l, r)
    })?;
    Ok(McCase {
        label: format!("{} i={i} u={u}", set_label(a)),
        t,
        result,
        alternative: None,
    })
}

/// `nu^n(A + tB_1) >= e^{t/2}/8 nu^n(A)` for `A` inside `{|x| >= 5t sqrt(n)}`.
pub fn single_push(a: &SetSpec, t: f64, samples: usize, seed: u64) -> Result<McCase> {
    let n = a.dim();
    let need = 5.0 * t * (n as f64).sqrt();
    let d = a.dist_lower_bound(None)?;
    if !(t > 0.0) || d < need {
        return Err(Error::Hypothesis(format!(
            "single_push needs A inside {{|x| >= 5t sqrt(n) = {need}}}; distance bound is {d}"
        )));
    }
    push_case(a, t, (t / 2.0).exp() / 8.0, samples, seed)
}

/// `nu^n(A + tB_1) >= e^{t/10} nu^n(A)` for `t >= 10` and `A` disjoint from
/// `50 sqrt(n) B_2 + t B_1`.
pub fn push_pop(a: &SetSpec, t: f64, samples: usize, seed: u64) -> Result<McCase> {
    let n = a.dim();
    if t < 10.0 {
        return Err(Error::Hypothesis(format!("push_pop needs t >= 10, got {t}")));
    }
    let d = a.dist_lower_bound(Some((t, 1.0)))?;
    let r = 50.0 * (n as f64).sqrt();
    if !(d > r) {
        return Err(Error::Hypothesis(format!(
            "push_pop needs A disjoint from 50 sqrt(n) B_2 + t B_1: distance bound {d} <= {r}"
        )));
    }
    push_case(a, t, (t / 10.0).exp(), samples, seed)
}

fn push_case(a: &SetSpec, t: f64, k: f64, samples: usize, seed: u64) -> Result<McCase> {
    let law = Law::nu_pn(1.0, a.dim())?;
    let big = Enlarged::new(a, Some(&EnlargementSpec::ball(t, 1.0)?))?;
    let m = a.anchor();
    let shifts = vec![m.clone(), pulled_in(&m, t)];
    let result = paired_terms(&law, &shifts, samples, seed, k, &|x| (ind(big.contains(x)), ind(a.contains(x))))?;
    Ok(McCase {
        label: set_label(a),
        t,
        result,
        alternative: None,
    })
}

/// Either `nu_p^n(A + 20 t^{1/p} B_p) >= e^t nu_p^n(A)` or
/// `nu_p^n((A + 20 t^{1/p} B_p) cap 100 sqrt(n) B_2) >= nu_p^n(A)/2`; `p in [1, 2]`, `t >= 1`.
pub fn lp_push_pop(a: &SetSpec, p: f64, t: f64, samples: usize, seed: u64) -> Result<McCase> {
    if !(1.0..=2.0).contains(&p) || t < 1.0 {
        return Err(Error::Hypothesis(format!("lp_push_pop needs p in [1, 2] and t >= 1, got {p}, {t}")));
    }
    let n = a.dim();
    let law = Law::nu_pn(p, n)?;
    let r = 20.0 * t.powf(1.0 / p);
    let big = Enlarged::new(a, Some(&EnlargementSpec::ball(r, p)?))?;
    let cap = 100.0 * (n as f64).sqrt();
    let m = a.anchor();
    let shifts = if l2(&m) > 5.0 {
        vec![m.clone(), pulled_in(&m, r)]
    } else {
        Vec::new()
    };
    let acc = mc_terms(&law, &shifts, samples, seed, 5, &|x, out| {
        let inside = big.contains(x);
        let ina = ind(a.contains(x));
        out[0] = ind(inside);
        out[1] = ina;
        out[2] = ind(inside) - t.exp() * ina;
        out[3] = ind(inside && l2(x) <= cap);
        out[4] = out[3] - 0.5 * ina;
    })?;
    let first = paired(&[acc[0], acc[1], acc[2]], t.exp());
    let second = paired(&[acc[3], acc[1], acc[4]], 0.5);
    Ok(McCase {
        label: format!("{} p={p}", set_label(a)),
        t,
        result: first,
        alternative: Some(second),
    })
}

fn set_label(a: &SetSpec) -> String {
    match a {
        SetSpec::Halfspace { c, .. } => format!("halfspace c={c}"),
        SetSpec::Ball { center, radius, q } => format!("ball q={q} r={radius} |c|={:.3}", l2(center)),
        SetSpec::Box { lo, hi } => format!("box [{:?}, {:?}]", lo, hi),
        SetSpec::Slab { i, u, .. } => format!("slab i={i} u={u}"),
        SetSpec::Complement { .. } => "complement".into(),
        SetSpec::Intersection { sets } => format!("intersection of {}", sets.len()),
    }
}

/// Volume form on `n B_1^n`, `n in {2, 3}`:
/// `|(A + tB_1) cap nB_1 cap {|x_i| >= u - t}| >= e^{t/2} |A cap nB_1 cap {|x_i| >= u}|`.
pub fn slab_volume(a: &SetSpec, i: usize, u: f64, t: f64, points: usize, seed: u64) -> Result<McCase> {
    let n = a.dim();
    if !(2..=3).contains(&n) || !(t > 0.0 && u >= t) || i >= n {
        return Err(Error::Hypothesis(format!(
            "slab_volume needs n in {{2, 3}}, u >= t > 0 and i < n; got n={n}, u={u}, t={t}, i={i}"
        )));
    }
    let big = Enlarged::new(a, Some(&EnlargementSpec::ball(t, 1.0)?))?;
    let nf = n as f64;
    let vol = (2.0 * nf).powi(n as i32);
    let reps = 16;
    let k = (t / 2.0).exp();
    let means = rqmc_means(n, -nf, nf, (points / reps).max(1), reps, seed, 3, &|x, out| {
        let inb = x.iter().map(|v| v.abs()).sum::<f64>() <= nf;
        let l = ind(inb && big.contains(x) && x[i].abs() >= u - t - MEMBER_TOL);
        let r = ind(inb && a.contains(x) && x[i].abs() >= u - MEMBER_TOL);
        out[0] = vol * l;
        out[1] = vol * r;
        out[2] = vol * (l - k * r);
    })?;
    let col = |j: usize| -> Vec<f64> { means.iter().map(|m| m[j]).collect() };
    let (l, r, d) = (replicate_estimate(&col(0)), replicate_estimate(&col(1)), replicate_estimate(&col(2)));
    Ok(McCase {
        label: format!("{} i={i} u={u}", set_label(a)),
        t,
        result: Paired {
            lhs: l,
            rhs: r,
            margin: margin_in_se(d.mean, d.se),
            log_gain: (l.mean / (k * r.mean)).ln(),
        },
        alternative: None,
    })
}

// ---------------------------------------------------------------------------
// moments of norms

/// Median of `||x||_inf` under a symmetric product law with identical factors.
fn sup_norm_median(m: &Measure1D, n: usize) -> Result<f64> {
    // (1 - 2 sf(s))^n = 1/2
    let tail = 0.5 * (1.0 - 0.5f64.powf(1.0 / n as f64));
    Ok(-m.quantile(tail)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormMoments {
    /// `(E | ||x|| - Med |^q)^{1/q}`
    pub central: f64,
    /// `(E ||x||^q)^{1/q}`
    pub strong: f64,
    /// `sup_{||u||_* <= 1} (E |<u, x>|^q)^{1/q}`
    pub weak: f64,
    pub central_se: f64,
    pub strong_se: f64,
    /// `E ||x||^q - E | ||x|| - Med |^q` and its standard error
    pub gap: Estimate,
}

/// Moments of `||x||_inf` under `nu_p^n`. The weak moment is exact: the dual
/// ball is `B_1^n`, whose extreme points are `+-e_i`.
pub fn sup_norm_moments(p: f64, n: usize, q: f64, samples: usize, seed: u64) -> Result<NormMoments> {
    let m = Measure1D::nu_p(p)?;
    let med = sup_norm_median(&m, n)?;
    let law = Law::nu_pn(p, n)?;
    let acc = mc_terms(&law, &[], samples, seed, 3, &|x, out| {
        let s = lp_norm(x, f64::INFINITY);
        out[0] = (s - med).abs().powf(q);
        out[1] = s.powf(q);
        out[2] = out[1] - out[0];
    })?;
    let (c, s) = (acc[0].estimate(), acc[1].estimate());
    let root = |e: Estimate| (e.mean.powf(1.0 / q), e.mean.powf(1.0 / q - 1.0) * e.se / q);
    let (central, central_se) = root(c);
    let (strong, strong_se) = root(s);
    Ok(NormMoments {
        central,
        strong,
        weak: m.abs_moment(q)?.powf(1.0 / q),
        central_se,
        strong_se,
        gap: acc[2].estimate(),
    })
}

/// Isotropic `mu_{p,n}` samples: `x / sigma` with `sigma^2 = E x_1^2`.
fn isotropic_ball_terms(p: f64, n: usize, samples: usize, seed: u64, k: usize, f: &dyn Fn(f64, &mut [f64])) -> Result<Vec<Accum>> {
    let ball = LpBall::new(p, n)?;
    let sd = ball.coordinate_variance().sqrt();
    mc_terms(&Law::Ball(ball), &[], samples, seed, k, &|x, out| f(l2(x) / sd, out))
}

/// `int | ||x||_2 - sqrt(n) |^2 dmu` and `Var ||x||_2` under isotropic `mu_{p,n}`.
pub fn variance_norm_estimate(p: f64, n: usize, samples: usize, seed: u64) -> Result<(Estimate, f64)> {
    let sn = (n as f64).sqrt();
    let acc = isotropic_ball_terms(p, n, samples, seed, 2, &|r, out| {
        out[0] = (r - sn).powi(2);
        out[1] = r;
    })?;
    Ok((acc[0].estimate(), acc[1].variance()))
}

// ---------------------------------------------------------------------------
// registry

pub const CONC_CHECK_IDS: &[&str] = &[
    "two_level_exp",
    "slab_volume",
    "exp_slab",
    "second_moment",
    "single_push",
    "push_pop",
    "lp_push_pop",
    "magia",
    "mala_norma",
    "ci_halfspace_mu",
    "gauss_profile",
    "cheeger_1d",
    "weak_strong",
    "variance_norm",
    "moment_growth",
    "crude_bound",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcSizes {
    /// draws for the enlargement checks
    pub samples: usize,
    /// quasi-Monte Carlo points for volumes
    pub qmc_points: usize,
    /// draws for the moment checks
    pub moment_samples: usize,
}

impl Default for ConcSizes {
    fn default() -> Self {
        ConcSizes {
            samples: 1_000_000,
            qmc_points: 1 << 20,
            moment_samples: 100_000,
        }
    }
}

fn e1(n: usize, a: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = a;
    v
}

/// Ten box configurations in `n in {2, 3}`: `(box, i, u, t)`.
pub fn slab_volume_cases() -> Result<Vec<(SetSpec, usize, f64, f64)>> {
    let b = |lo: &[f64], hi: &[f64]| SetSpec::boxed(lo.to_vec(), hi.to_vec());
    Ok(vec![
        (b(&[1.0, -0.5], &[1.8, 0.5])?, 0, 1.2, 0.5),
        (b(&[1.0, -0.5], &[1.8, 0.5])?, 0, 1.5, 1.0),
        (b(&[0.5, 0.2], &[1.5, 1.0])?, 0, 1.0, 0.5),
        (b(&[-1.9, -0.1], &[-1.0, 0.1])?, 0, 1.4, 0.7),
        (b(&[-0.5, 0.8], &[0.5, 2.0])?, 1, 1.0, 1.0),
        (b(&[1.0, -0.5, -0.5], &[2.5, 0.5, 0.5])?, 0, 1.5, 0.5),
        (b(&[1.0, -0.5, -0.5], &[2.5, 0.5, 0.5])?, 0, 2.0, 1.0),
        (b(&[0.0, 1.5, 0.0], &[1.0, 2.5, 0.5])?, 1, 2.0, 1.5),
        (b(&[-2.8, -0.2, -0.2], &[-2.0, 0.2, 0.2])?, 0, 2.2, 2.0),
        (b(&[0.5, 0.5, 1.0], &[1.5, 1.5, 2.0])?, 2, 1.2, 0.6),
    ])
}

fn mc_sets(n: usize) -> Result<Vec<SetSpec>> {
    Ok(vec![
        SetSpec::boxed(
            [vec![0.5], vec![-1.0; n - 1]].concat(),
            [vec![3.0], vec![1.0; n - 1]].concat(),
        )?,
        SetSpec::ball(e1(n, 2.0), 1.5, 2.0)?,
        SetSpec::ball([vec![-1.5, 1.0], vec![0.0; n - 2]].concat(), 2.0, 1.0)?,
    ])
}

/// Balls of Euclidean radius `rho` whose nearest point sits at `d`.
fn far_balls(n: usize, d: f64, rho: f64) -> Result<Vec<SetSpec>> {
    let diag: Vec<f64> = (0..n).map(|i| if i < 2 { (d + rho) / 2f64.sqrt() } else { 0.0 }).collect();
    Ok(vec![SetSpec::ball(e1(n, d + rho), rho, 2.0)?, SetSpec::ball(diag, rho, 2.0)?])
}

fn weak_strong(sizes: &ConcSizes, seed: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new("weak_strong", CheckMode::Report);
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for &p in &[1.0, 2.0] {
        for &n in &[2usize, 8, 32] {
            for &q in &[2.0, 4.0, 8.0] {
                let m = sup_norm_moments(p, n, q, sizes.moment_samples, rng::derive(seed, k))?;
                k += 1;
                let ratio = m.central / m.weak;
                worst = worst.max(ratio);
                r = r.estimate(&format!("ratio_p{p}_n{n}_q{q}"), ratio);
            }
        }
    }
    Ok(r.estimate("max_ratio", worst)
        .with_samples(sizes.moment_samples as u64, seed)
        .note("ratio (E| ||x||_inf - Med |^q)^{1/q} / sup_{||u||_1<=1} (E|<u,x>|^q)^{1/q} under nu_p^n"))
}

/// Ratio of the `n = 256` and `n = 4` estimates of `int | ||x||_2 - sqrt(n) |^2`,
/// asserted `<= 2` at three standard errors.
fn variance_norm(sizes: &ConcSizes, seed: u64) -> Result<CheckReport> {
    let ns = [4usize, 16, 64, 256];
    let mut r = CheckReport::new("variance_norm", CheckMode::MonteCarlo);
    let mut worst = f64::INFINITY;
    for (pi, &p) in [1.0, 1.5, 2.0, 3.0].iter().enumerate() {
        let mut est = Vec::new();
        for (ni, &n) in ns.iter().enumerate() {
            let (dev, var) = variance_norm_estimate(p, n, sizes.moment_samples, rng::derive(seed, (pi * 8 + ni) as u64))?;
            r = r
                .estimate(&format!("dev_p{p}_n{n}"), dev.mean)
                .std_error(&format!("dev_p{p}_n{n}"), dev.se)
                .estimate(&format!("var_p{p}_n{n}"), var);
            est.push(dev);
        }
        let (a, b) = (est[0], est[3]);
        let ratio = b.mean / a.mean;
        let se = ratio * ((a.se / a.mean).powi(2) + (b.se / b.mean).powi(2)).sqrt();
        r = r.estimate(&format!("ratio_p{p}"), ratio).std_error(&format!("ratio_p{p}"), se);
        worst = worst.min(margin_in_se(2.0 - ratio, se));
    }
    Ok(r.param("n", json!(ns))
        .with_samples(sizes.moment_samples as u64, seed)
        .judged(worst, 3.0))
}

/// Reports `max_q 2((E ||x||_2^q)^{1/q} - sqrt(n)) / q` under isotropic `mu_{p,n}`,
/// the smallest `gamma alpha` compatible with the moment-growth bound.
fn moment_growth(sizes: &ConcSizes, seed: u64) -> Result<CheckReport> {
    let qs = [3.0, 4.0, 6.0, 8.0];
    let mut r = CheckReport::new("moment_growth", CheckMode::Report);
    let mut best: f64 = 0.0;
    let mut k = 0;
    for &p in &[1.0, 2.0, 3.0] {
        for &n in &[4usize, 16, 64] {
            let acc = isotropic_ball_terms(p, n, sizes.moment_samples, rng::derive(seed, k), qs.len(), &|x, out| {
                for (o, q) in out.iter_mut().zip(&qs) {
                    *o = x.powf(*q);
                }
            })?;
            k += 1;
            let sn = (n as f64).sqrt();
            let mut g: f64 = 0.0;
            for (a, q) in acc.iter().zip(&qs) {
                g = g.max(2.0 * (a.mean().powf(1.0 / q) - sn) / q);
            }
            best = best.max(g);
            r = r.estimate(&format!("gamma_alpha_p{p}_n{n}"), g);
        }
    }
    Ok(r.estimate("gamma_alpha", best)
        .param("q", json!(qs))
        .with_samples(sizes.moment_samples as u64, seed))
}

/// `(E| ||x|| - Med |^q)^{1/q} <= (E ||x||^q)^{1/q} <= 2 5^{n/q} sup (E|<u,x>|^q)^{1/q}`
/// for `||.||_inf` under `nu_p^n`, `n <= 8`.
pub fn crude_bound_case(p: f64, n: usize, q: f64, samples: usize, seed: u64) -> Result<(f64, NormMoments)> {
    if n > 8 || !(q > 0.0) {
        return Err(Error::Hypothesis(format!("crude_bound needs n <= 8 and q > 0, got {n}, {q}")));
    }
    let m = sup_norm_moments(p, n, q, samples, seed)?;
    let first = margin_in_se(m.gap.mean, m.gap.se);
    let bound = 2.0 * 5f64.powf(n as f64 / q) * m.weak;
    let second = margin_in_se(bound - m.strong, m.strong_se);
    Ok((first.min(second), m))
}

fn crude_bound(sizes: &ConcSizes, seed: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new("crude_bound", CheckMode::MonteCarlo);
    let mut worst = f64::INFINITY;
    let mut k = 0;
    for &p in &[1.0, 2.0] {
        for &n in &[2usize, 4, 8] {
            for &q in &[1.0, 2.0, 4.0] {
                let (m, mm) = crude_bound_case(p, n, q, sizes.moment_samples, rng::derive(seed, k))?;
                k += 1;
                worst = worst.min(m);
                r = r.estimate(&format!("margin_p{p}_n{n}_q{q}"), m).estimate(
                    &format!("strong_over_weak_p{p}_n{n}_q{q}"),
                    mm.strong / mm.weak,
                );
            }
        }
    }
    Ok(r.with_samples(sizes.moment_samples as u64, seed).judged(worst, 3.0))
}

/// Registered lattice of an exact halfspace check, `None` for other ids.
pub fn default_lattice(id: &str) -> Option<ExactLattice> {
    let d = ExactLattice::default();
    match id {
        "two_level_exp" | "ci_halfspace_mu" => Some(d),
        "magia" => Some(ExactLattice {
            p: vec![1.0, 1.5, 2.0],
            ..d
        }),
        "gauss_profile" => Some(ExactLattice {
            p: vec![2.0, 3.0, 4.0],
            ..d
        }),
        _ => None,
    }
}

/// Runs an exact halfspace check on a caller-chosen lattice.
pub fn exact_lattice_check(id: &str, lat: &ExactLattice) -> Result<CheckReport> {
    if lat.p.is_empty() || lat.n.is_empty() || lat.x.is_empty() || lat.t.is_empty() {
        return domain("lattice axes must be nonempty");
    }
    match id {
        "two_level_exp" => two_level_exp(lat),
        "magia" => magia(lat),
        "ci_halfspace_mu" => ci_halfspace_mu(lat),
        "gauss_profile" => gauss_profile(lat),
        _ => Err(Error::UnknownId(id.to_string())),
    }
}

/// Runs one registered concentration check.
pub fn conc_suite_check(id: &str, seed: u64, sizes: &ConcSizes) -> Result<CheckReport> {
    let s = rng::derive(seed, 0xC0C);
    let n = 8;
    let ts = [1.0, 2.0];
    match id {
        "two_level_exp" | "magia" | "ci_halfspace_mu" | "gauss_profile" => {
            exact_lattice_check(id, &default_lattice(id).unwrap())
        }
        "cheeger_1d" => cheeger_1d(0.3, 1.2),
        "mala_norma" => {
            let ns: Vec<usize> = (5..=40).collect();
            let m = mala_norma(1.0, 10, 0.1, 4.0 * std::f64::consts::E, &ns, sizes.samples, s)?;
            Ok(m.to_check(&ns).with_samples(sizes.samples as u64, s))
        }
        "second_moment" => {
            let configs = [(vec![0.0; n], 4.0), (e1(n, 3.0), 2.0), ([vec![2.0, -2.0], vec![0.0; n - 2]].concat(), 3.0)];
            let mut cases = Vec::new();
            for (j, (x0, r)) in configs.iter().enumerate() {
                for (k, &t) in ts.iter().enumerate() {
                    cases.push(second_moment(x0, *r, t, sizes.samples, rng::derive(s, (j * 4 + k) as u64))?);
                }
            }
            Ok(mc_report(id, &cases, sizes.samples, s))
        }
        "exp_slab" => {
            let mut cases = Vec::new();
            let mut k = 0;
            for a in mc_sets(n)? {
                for &t in &ts {
                    for u in [t, t + 1.0] {
                        cases.push(exp_slab(&a, 0, u, t, sizes.samples, rng::derive(s, k))?);
                        k += 1;
                    }
                }
            }
            Ok(mc_report(id, &cases, sizes.samples, s))
        }
        "single_push" => {
            let mut cases = Vec::new();
            let mut k = 0;
            for &t in &ts {
                let d = 5.0 * t * (n as f64).sqrt() + 0.5;
                let mut sets = far_balls(n, d, 2.0)?;
                sets.push(SetSpec::boxed(
                    [vec![d], vec![-1.0; n - 1]].concat(),
                    [vec![d + 3.0], vec![1.0; n - 1]].concat(),
                )?);
                for a in &sets {
                    cases.push(single_push(a, t, sizes.samples, rng::derive(s, k))?);
                    k += 1;
                }
            }
            Ok(mc_report(id, &cases, sizes.samples, s))
        }
        "push_pop" => {
            let mut cases = Vec::new();
            let mut k = 0;
            for &t in &[10.0, 20.0] {
                // nearest point beyond 50 sqrt(n) + t in l_2
                let d = 50.0 * (n as f64).sqrt() + t + 1.0;
                for a in far_balls(n, d, 3.0)? {
                    cases.push(push_pop(&a, t, sizes.samples, rng::derive(s, k))?);
                    k += 1;
                }
            }
            Ok(mc_report(id, &cases, sizes.samples, s))
        }
        "lp_push_pop" => {
            let mut cases = Vec::new();
            let mut k = 0;
            for &p in &[1.0, 1.5, 2.0] {
                for &t in &ts {
                    let mut sets = vec![SetSpec::ball(e1(n, 1.0), 1.0, 2.0)?];
                    sets.push(SetSpec::ball(e1(n, 12.0), 2.0, 2.0)?);
                    sets.push(SetSpec::boxed(
                        [vec![4.0], vec![-1.0; n - 1]].concat(),
                        [vec![6.0], vec![1.0; n - 1]].concat(),
                    )?);
                    for a in &sets {
                        cases.push(lp_push_pop(a, p, t, sizes.samples, rng::derive(s, k))?);
                        k += 1;
                    }
                }
            }
            Ok(mc_report(id, &cases, sizes.samples, s))
        }
        "slab_volume" => {
            let mut cases = Vec::new();
            for (k, (a, i, u, t)) in slab_volume_cases()?.iter().enumerate() {
                cases.push(slab_volume(a, *i, *u, *t, sizes.qmc_points, rng::derive(s, k as u64))?);
            }
            let mut r = mc_report(id, &cases, sizes.qmc_points, s);
            r.mode = CheckMode::QuasiMonteCarlo;
            Ok(r)
        }
        "weak_strong" => weak_strong(sizes, s),
        "variance_norm" => variance_norm(sizes, s),
        "moment_growth" => moment_growth(sizes, s),
        "crude_bound" => crude_bound(sizes, s),
        _ => Err(Error::UnknownId(id.to_string())),
    }
}
