//! Support and radial functions of the bodies `Z_p`, `M_p` and
//! `B_t = {Lambda* <= t}` sampled along finite direction sets.
//!
//! Two identities do most of the work. The support function of a sublevel set
//! of `Lambda*` is `h(theta) = inf_{lam > 0} (t + Lambda(lam theta)) / lam`, and
//! its radial function is `r(u) = inf_{<u, v> > 0} (t + Lambda(v)) / <u, v>`.
//! Neither needs the multivariate Legendre transform itself.

use crate::error::{domain, no_conv, Error, Result};
use crate::measures::{cramer, lambda_nu, lambda_star_nu, Kind, Law, LogDensityTable, LpBall, Measure1D, ProductMeasure};
use crate::quad::{golden_min, integrate_pieces};
use crate::report::{CheckMode, CheckReport, Worst};
use crate::rng;
use crate::special::{ball_constants, ln_gamma};
use crate::stats::{Accum, Estimate};
use crate::transports::lp_norm;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::cell::RefCell;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hoelder conjugate, with `1 -> inf`.
fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub n: usize,
    pub dirs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionRule {
    pub axes: bool,
    pub diagonals: bool,
    /// seeded random directions, drawn in antipodal pairs
    pub random: usize,
    pub seed: u64,
}

impl Default for DirectionRule {
    fn default() -> Self {
        DirectionRule {
            axes: true,
            diagonals: true,
            random: 64,
            seed: 0,
        }
    }
}

impl DirectionSet {
    /// Normalizes every vector to unit `l_2` length.
    pub fn new(n: usize, dirs: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || dirs.is_empty() {
            return domain("direction set must be nonempty");
        }
        let mut out = Vec::with_capacity(dirs.len());
        for (i, d) in dirs.into_iter().enumerate() {
            if d.len() != n {
                return Err(Error::GridMismatch(format!(
                    "direction {i} has length {}, expected {n}",
                    d.len()
                )));
            }
            let r = l2(&d);
            if !(r > 0.0) || !r.is_finite() {
                return domain(format!("direction {i} is zero or not finite"));
            }
            out.push(d.iter().map(|x| x / r).collect());
        }
        Ok(DirectionSet { n, dirs: out })
    }

    pub fn generate(n: usize, rule: &DirectionRule) -> Result<Self> {
        let mut dirs = Vec::new();
        if rule.axes {
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[i] = s;
                    dirs.push(v);
                }
            }
        }
        if rule.diagonals {
            for i in 0..n {
                for j in i + 1..n {
                    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        let mut v = vec![0.0; n];
                        v[i] = a;
                        v[j] = b;
                        dirs.push(v);
                    }
                }
            }
        }
        let mut r = rng::stream(rule.seed, 0);
        let mut k = 0;
        while k < rule.random {
            let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
            k += 1;
            if k < rule.random {
                dirs.push(g.iter().map(|x| -x).collect());
                k += 1;
            }
            dirs.push(g);
        }
        DirectionSet::new(n, dirs)
    }

    /// Axes, two-axis diagonals and 64 seeded random directions.
    pub fn standard(n: usize, seed: u64) -> Result<Self> {
        DirectionSet::generate(
            n,
            &DirectionRule {
                seed,
                ..DirectionRule::default()
            },
        )
    }

    pub fn axes(n: usize) -> Result<Self> {
        DirectionSet::generate(
            n,
            &DirectionRule {
                axes: true,
                diagonals: false,
                random: 0,
                seed: 0,
            },
        )
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Index of `-u_i`, if the set contains it.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        let u = &self.dirs[i];
        self.dirs
            .iter()
            .position(|v| v.iter().zip(u).all(|(a, b)| (a + b).abs() < 1e-12))
    }

    /// Largest `| ||u||_2 - 1 |` over the set.
    pub fn norm_defect(&self) -> f64 {
        self.dirs.iter().map(|u| (l2(u) - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Meaning {
    /// `h(u) = sup_{x in K} <u, x>`
    Support,
    /// `r(u) = sup {s : s u in K}`
    Radius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportTable {
    pub body: String,
    pub meaning: Meaning,
    pub directions: DirectionSet,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
}

impl SupportTable {
    pub fn new(
        body: impl Into<String>,
        meaning: Meaning,
        directions: DirectionSet,
        values: Vec<f64>,
        std_errors: Option<Vec<f64>>,
    ) -> Result<Self> {
        let body = body.into();
        if values.len() != directions.len() || std_errors.as_ref().is_some_and(|s| s.len() != values.len()) {
            return Err(Error::GridMismatch(format!(
                "table for {body} has {} values for {} directions",
                values.len(),
                directions.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return domain(format!(
                "{body}: value {} along direction {i} is not finite and positive",
                values[i]
            ));
        }
        Ok(SupportTable {
            body,
            meaning,
            directions,
            values,
            std_errors,
        })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return domain(format!("scale factor must be positive, got {c}"));
        }
        SupportTable::new(
            format!("{c}*{}", self.body),
            self.meaning,
            self.directions.clone(),
            self.values.iter().map(|v| c * v).collect(),
            self.std_errors.as_ref().map(|s| s.iter().map(|v| c * v).collect()),
        )
    }

    /// Minkowski sum; both tables must hold support values.
    pub fn h_sum(&self, other: &SupportTable) -> Result<Self> {
        same_grid(self, other)?;
        if self.meaning != Meaning::Support {
            return Err(Error::Unsupported("Minkowski sums are formed from support tables".into()));
        }
        SupportTable::new(
            format!("{} + {}", self.body, other.body),
            Meaning::Support,
            self.directions.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            None,
        )
    }

    /// Intersection; both tables must hold radii.
    pub fn radial_min(&self, other: &SupportTable) -> Result<Self> {
        same_grid(self, other)?;
        if self.meaning != Meaning::Radius {
            return Err(Error::Unsupported("intersections are formed from radius tables".into()));
        }
        SupportTable::new(
            format!("{} cap {}", self.body, other.body),
            Meaning::Radius,
            self.directions.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a.min(*b)).collect(),
            None,
        )
    }

    /// Largest relative gap `|h(u) - h(-u)|` over antipodal pairs in the set.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.values.len() {
            if let Some(j) = self.directions.antipode(i) {
                let (a, b) = (self.values[i], self.values[j]);
                worst = worst.max((a - b).abs() / a.max(b));
            }
        }
        worst
    }

    /// One row per direction: `u_1..u_n, value[, std_error]`.
    pub fn to_csv(&self) -> String {
        let n = self.directions.n;
        let mut s = String::new();
        for i in 0..n {
            s.push_str(&format!("u{},", i + 1));
        }
        s.push_str("value");
        if self.std_errors.is_some() {
            s.push_str(",std_error");
        }
        s.push('\n');
        for (i, u) in self.directions.dirs.iter().enumerate() {
            for x in u {
                s.push_str(&format!("{x:e},"));
            }
            s.push_str(&format!("{:e}", self.values[i]));
            if let Some(se) = &self.std_errors {
                s.push_str(&format!(",{:e}", se[i]));
            }
            s.push('\n');
        }
        s
    }
}

fn same_grid(a: &SupportTable, b: &SupportTable) -> Result<()> {
    if a.meaning != b.meaning {
        return Err(Error::GridMismatch(format!(
            "{} holds {:?} values but {} holds {:?} values",
            a.body, a.meaning, b.body, b.meaning
        )));
    }
    if a.directions != b.directions {
        return Err(Error::GridMismatch(format!(
            "{} and {} use different direction sets",
            a.body, b.body
        )));
    }
    Ok(())
}

/// `max_u inner(u) / outer(u)`: the inclusion `inner ⊂ c outer` holds along
/// the sampled directions iff the result is at most `c`.
pub fn inclusion_factor(inner: &SupportTable, outer: &SupportTable) -> Result<f64> {
    same_grid(inner, outer)?;
    Ok(inner
        .values
        .iter()
        .zip(&outer.values)
        .map(|(a, b)| a / b)
        .fold(0.0, f64::max))
}

/// Support table of `radius * B_q^n`.
pub fn ball_support(q: f64, radius: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    let qs = conjugate(q);
    SupportTable::new(
        format!("{radius}*B_{q}"),
        Meaning::Support,
        dirs.clone(),
        dirs.dirs.iter().map(|u| radius * lp_norm(u, qs)).collect(),
        None,
    )
}

/// Radius table of `radius * B_q^n`.
pub fn ball_radius(q: f64, radius: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    SupportTable::new(
        format!("{radius}*B_{q}"),
        Meaning::Radius,
        dirs.clone(),
        dirs.dirs.iter().map(|u| radius / lp_norm(u, q)).collect(),
        None,
    )
}

/// `sqrt(t) B_2^n + t^{1/p} B_p^n`, as support values.
pub fn model_sum_support(p: f64, t: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    ball_support(2.0, t.sqrt(), dirs)?.h_sum(&ball_support(p, t.powf(1.0 / p), dirs)?)
}

/// `sqrt(t) B_2^n ∩ t^{1/p} B_p^n`, as radii.
pub fn model_intersection_radius(p: f64, t: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    ball_radius(2.0, t.sqrt(), dirs)?.radial_min(&ball_radius(p, t.powf(1.0 / p), dirs)?)
}

// ---------------------------------------------------------------------------
// weak moments

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOptions {
    /// Monte Carlo sample size, used only when no quadrature route applies.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            mc_samples: 200_000,
            seed: 0,
        }
    }
}

fn centred(m: &Measure1D) -> bool {
    m.loc == 0.0 && m.is_symmetric()
}

fn is_even_int(k: f64) -> bool {
    k.fract() == 0.0 && (k as u64) % 2 == 0 && k <= 64.0
}

/// Integration range outside which `|x|^k` times the density is negligible.
fn quad_range(m: &Measure1D, k: f64) -> (f64, f64) {
    match m.kind {
        Kind::NuP { p } => {
            let b = (100.0 + 4.0 * k).powf(1.0 / p) * (1.0 + k.ln_1p() / p);
            (m.loc - m.scale * b, m.loc + m.scale * b)
        }
        _ => m.support(),
    }
}

/// `E|X + c|^k`.
fn shifted_abs_moment(m: &Measure1D, c: f64, k: f64) -> Result<f64> {
    let (lo, hi) = quad_range(m, k);
    let mut br = vec![lo, hi];
    for z in [-c, m.loc] {
        if z > lo && z < hi {
            br.push(z);
        }
    }
    br.sort_by(f64::total_cmp);
    br.dedup();
    Ok(integrate_pieces(|x| (x + c).abs().powf(k) * m.density(x), &br, 0.0, 1e-12)?.value)
}

fn product_moment(comps: &[Measure1D], u: &[f64], k: f64, opts: &MomentOptions) -> Result<Estimate> {
    let act: Vec<(&Measure1D, f64)> = comps
        .iter()
        .zip(u)
        .filter(|(_, &ui)| ui != 0.0)
        .map(|(m, &ui)| (m, ui))
        .collect();
    if act.is_empty() {
        return Ok(Estimate::exact(0.0));
    }
    if act.len() == 1 {
        let (m, a) = act[0];
        return Ok(Estimate::exact(a.abs().powf(k) * m.abs_moment(k)?));
    }
    if is_even_int(k) && act.iter().all(|(m, _)| centred(m)) {
        // moments of a sum of independent terms by binomial convolution
        let kk = k as usize;
        let mut binom = vec![vec![1.0f64; 1]; kk + 1];
        for i in 1..=kk {
            let mut row = vec![1.0; i + 1];
            for j in 1..i {
                row[j] = binom[i - 1][j - 1] + binom[i - 1][j];
            }
            binom[i] = row;
        }
        let mut acc = vec![0.0; kk + 1];
        acc[0] = 1.0;
        for (m, a) in act {
            let mut mom = vec![0.0; kk + 1];
            for (j, slot) in mom.iter_mut().enumerate() {
                if j % 2 == 0 {
                    *slot = a.abs().powi(j as i32) * if j == 0 { 1.0 } else { m.abs_moment(j as f64)? };
                }
            }
            let mut next = vec![0.0; kk + 1];
            for i in 0..=kk {
                for j in 0..=i {
                    next[i] += binom[i][j] * acc[j] * mom[i - j];
                }
            }
            acc = next;
        }
        return Ok(Estimate::exact(acc[kk]));
    }
    if act.len() == 2 {
        let ((m1, a), (m2, b)) = (act[0], act[1]);
        let err = RefCell::new(None);
        let (lo, hi) = quad_range(m1, k);
        let mut br = vec![lo, hi];
        if m1.loc > lo && m1.loc < hi {
            br.push(m1.loc);
            br.sort_by(f64::total_cmp);
        }
        let r = integrate_pieces(
            |x| match shifted_abs_moment(m2, a * x / b, k) {
                Ok(v) => v * m1.density(x),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &br,
            0.0,
            1e-11,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        return Ok(Estimate::exact(b.abs().powf(k) * r.value));
    }
    let law = Law::Product(ProductMeasure::new(comps.to_vec())?);
    Ok(weak_moment_mc(&law, u, k, opts))
}

/// `E|<u, X>|^k` by plain Monte Carlo.
pub fn weak_moment_mc(law: &Law, u: &[f64], k: f64, opts: &MomentOptions) -> Estimate {
    let n = law.dim();
    let parts = rng::chunked(opts.mc_samples, opts.seed, |r, _, count| {
        let mut acc = Accum::default();
        let mut x = vec![0.0; n];
        for _ in 0..count {
            law.sample_into(r, &mut x);
            acc.push(dot(u, &x).abs().powf(k));
        }
        acc
    });
    let mut acc = Accum::default();
    for p in &parts {
        acc.merge(p);
    }
    acc.estimate()
}

/// `E|<u, X>|^k`. Exact for one active coordinate and, for centred symmetric
/// products, for even integer `k`; nested quadrature for two active
/// coordinates; Monte Carlo otherwise. The ball reduces to `nu_p^n` through
/// `X = r G / (||G||_p^p + E)^{1/p}`, whose radial part is independent of
/// `X` and Gamma distributed.
pub fn weak_moment(law: &Law, u: &[f64], k: f64, opts: &MomentOptions) -> Result<Estimate> {
    if !(k > 0.0) || !k.is_finite() {
        return domain(format!("moment order must be positive, got {k}"));
    }
    if u.len() != law.dim() {
        return Err(Error::GridMismatch(format!(
            "direction of length {} for a law on R^{}",
            u.len(),
            law.dim()
        )));
    }
    match law {
        Law::Product(pm) => product_moment(&pm.components, u, k, opts),
        Law::Ball(b) => {
            let (p, n) = (b.p, b.n as f64);
            let g = ProductMeasure::nu_pn(p, b.n)?;
            let e = product_moment(&g.components, u, k, opts)?;
            let f = b.radius().powf(k) * (ln_gamma(n / p + 1.0) - ln_gamma((n + k) / p + 1.0)).exp();
            Ok(Estimate {
                mean: e.mean * f,
                se: e.se * f,
                n: e.n,
            })
        }
    }
}

fn law_label(law: &Law) -> String {
    match law {
        Law::Ball(b) => format!("mu_{{{},{}}}", b.p, b.n),
        Law::Product(pm) => {
            let c = &pm.components[0];
            let same = pm.components.iter().all(|m| m == c);
            match c.kind {
                Kind::NuP { p } if same && c.loc == 0.0 && c.scale == 1.0 => {
                    format!("nu_{p}^{}", pm.components.len())
                }
                _ => format!("product^{}", pm.components.len()),
            }
        }
    }
}

/// `h_{Z_p}(u) = (int |<u, x>|^p dmu)^{1/p}`.
pub fn zp_support(law: &Law, p: f64, dirs: &DirectionSet, opts: &MomentOptions) -> Result<SupportTable> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("Z_p needs 1 <= p < inf, got {p}"));
    }
    if dirs.n != law.dim() {
        return Err(Error::GridMismatch(format!(
            "directions in R^{} for a law on R^{}",
            dirs.n,
            law.dim()
        )));
    }
    let mut vals = Vec::with_capacity(dirs.len());
    let mut ses = Vec::with_capacity(dirs.len());
    for (i, u) in dirs.dirs.iter().enumerate() {
        let o = MomentOptions {
            mc_samples: opts.mc_samples,
            seed: rng::derive(opts.seed, i as u64),
        };
        let e = weak_moment(law, u, p, &o)?;
        if !e.mean.is_finite() {
            return domain(format!("moment of order {p} diverges along direction {i}"));
        }
        let h = e.mean.powf(1.0 / p);
        vals.push(h);
        ses.push(h * e.se / (p * e.mean));
    }
    let se = if ses.iter().any(|s| *s > 0.0) { Some(ses) } else { None };
    SupportTable::new(format!("Z_{p}({})", law_label(law)), Meaning::Support, dirs.clone(), vals, se)
}

/// Radii of `M_p = {v : int |<v, x>|^p dmu <= 1}`, i.e. `1 / h_{Z_p}`.
pub fn mp_radius(law: &Law, p: f64, dirs: &DirectionSet, opts: &MomentOptions) -> Result<SupportTable> {
    let z = zp_support(law, p, dirs, opts)?;
    let se = z
        .std_errors
        .as_ref()
        .map(|s| s.iter().zip(&z.values).map(|(e, h)| e / (h * h)).collect());
    SupportTable::new(
        format!("M_{p}({})", law_label(law)),
        Meaning::Radius,
        dirs.clone(),
        z.values.iter().map(|h| 1.0 / h).collect(),
        se,
    )
}

// ---------------------------------------------------------------------------
// cumulant functions

const CGF_KNOTS: usize = 600;

/// Cubic Hermite interpolation on increasing knots.
fn hermite(xs: &[f64], ys: &[f64], ds: &[f64], x: f64) -> f64 {
    let j = xs.partition_point(|k| *k <= x).clamp(1, xs.len() - 1) - 1;
    let h = xs[j + 1] - xs[j];
    let s = (x - xs[j]) / h;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * ys[j]
        + (s3 - 2.0 * s2 + s) * h * ds[j]
        + (-2.0 * s3 + 3.0 * s2) * ys[j + 1]
        + (s3 - s2) * h * ds[j + 1]
}

/// `Lambda` and `Lambda*` of a symmetric standardized law, tabulated together
/// on one parameter grid: at `s_j` the conjugate point is `x_j = Lambda'(s_j)`,
/// with `Lambda*(x_j) = s_j x_j - Lambda(s_j)` and slope `s_j` there.
/// Interpolation error is about `1e-8` relative.
#[derive(Debug, Clone)]
struct CgfTable {
    std: Measure1D,
    s: Vec<f64>,
    l: Vec<f64>,
    dl: Vec<f64>,
    x: Vec<f64>,
    ls: Vec<f64>,
}

impl CgfTable {
    fn build(std: &Measure1D, cap: f64) -> Result<Self> {
        let l = |s: f64| std.log_mgf(s);
        let d = |s: f64| -> Result<f64> {
            let h = 1e-3 * s.max(0.1);
            Ok((8.0 * (l(s + h)? - l(s - h)?) - (l(s + 2.0 * h)? - l(s - 2.0 * h)?)) / (12.0 * h))
        };
        let mut smax = 1.0;
        loop {
            let x = d(smax)?;
            if smax * x - l(smax)? >= cap || smax >= 256.0 {
                break;
            }
            smax *= 2.0;
        }
        let mut t = CgfTable {
            std: std.clone(),
            s: vec![0.0],
            l: vec![0.0],
            dl: vec![0.0],
            x: vec![0.0],
            ls: vec![0.0],
        };
        for j in 1..=CGF_KNOTS {
            let r = j as f64 / CGF_KNOTS as f64;
            let s = smax * r * r;
            let (lv, xv) = (l(s)?, d(s)?);
            if !(xv > *t.x.last().unwrap()) {
                continue;
            }
            t.s.push(s);
            t.l.push(lv);
            t.dl.push(xv);
            t.x.push(xv);
            t.ls.push(s * xv - lv);
        }
        Ok(t)
    }

    fn lambda(&self, s: f64) -> Result<f64> {
        let a = s.abs();
        if a <= *self.s.last().unwrap() {
            Ok(hermite(&self.s, &self.l, &self.dl, a))
        } else {
            self.std.log_mgf(s)
        }
    }

    fn lambda_star(&self, y: f64) -> Result<f64> {
        let a = y.abs();
        if a <= *self.x.last().unwrap() {
            Ok(hermite(&self.x, &self.ls, &self.s, a))
        } else {
            cramer(&self.std, &[1.0], y)
        }
    }
}

#[derive(Debug, Clone)]
enum CgfBody {
    Nu,
    Nu2,
    Table(CgfTable),
    Direct(Measure1D),
}

/// Log-Laplace transform of a law on the line with its Legendre transform.
/// Closed forms for `nu` and `nu_2`; symmetric laws are tabulated once up to
/// `Lambda* = cap` and fall back to direct evaluation beyond.
#[derive(Debug, Clone)]
pub struct Cgf1D {
    loc: f64,
    scale: f64,
    body: CgfBody,
}

impl Cgf1D {
    pub fn new(m: &Measure1D, cap: f64) -> Result<Self> {
        let std = Measure1D {
            kind: m.kind.clone(),
            loc: 0.0,
            scale: 1.0,
        };
        let body = match m.kind {
            Kind::NuP { p } if p == 1.0 => CgfBody::Nu,
            Kind::NuP { p } if p == 2.0 => CgfBody::Nu2,
            _ if std.is_symmetric() => CgfBody::Table(CgfTable::build(&std, cap)?),
            _ => CgfBody::Direct(std),
        };
        Ok(Cgf1D {
            loc: m.loc,
            scale: m.scale,
            body,
        })
    }

    pub fn lambda(&self, s: f64) -> Result<f64> {
        let a = s * self.scale;
        let base = match &self.body {
            CgfBody::Nu => lambda_nu(a),
            CgfBody::Nu2 => a * a / 4.0,
            CgfBody::Table(t) => t.lambda(a)?,
            CgfBody::Direct(m) => m.log_mgf(a)?,
        };
        Ok(s * self.loc + base)
    }

    pub fn lambda_star(&self, x: f64) -> Result<f64> {
        let y = (x - self.loc) / self.scale;
        match &self.body {
            CgfBody::Nu => Ok(lambda_star_nu(y)),
            CgfBody::Nu2 => Ok(y * y),
            CgfBody::Table(t) => t.lambda_star(y),
            CgfBody::Direct(m) => cramer(m, &[1.0], y),
        }
    }
}

enum LawCgf<'a> {
    Product(Vec<Cgf1D>),
    Ball(&'a LpBall),
}

impl<'a> LawCgf<'a> {
    fn new(law: &'a Law, cap: f64) -> Result<Self> {
        match law {
            Law::Ball(b) => Ok(LawCgf::Ball(b)),
            Law::Product(pm) => {
                let mut out: Vec<Cgf1D> = Vec::with_capacity(pm.dim());
                for (i, m) in pm.components.iter().enumerate() {
                    match pm.components[..i].iter().position(|o| o == m) {
                        Some(j) => {
                            let c = out[j].clone();
                            out.push(c);
                        }
                        None => out.push(Cgf1D::new(m, cap)?),
                    }
                }
                Ok(LawCgf::Product(out))
            }
        }
    }

    fn lambda(&self, v: &[f64]) -> Result<f64> {
        match self {
            LawCgf::Ball(b) => b.log_mgf(v),
            LawCgf::Product(cs) => {
                let mut s = 0.0;
                for (c, &vi) in cs.iter().zip(v) {
                    if vi != 0.0 {
                        s += c.lambda(vi)?;
                        if s == f64::INFINITY {
                            break;
                        }
                    }
                }
                Ok(s)
            }
        }
    }
}

/// Minimizes a unimodal `q` over `(0, inf)`; `+inf` marks points outside
/// the domain.
fn min_on_half_line<F: FnMut(f64) -> Result<f64>>(mut q: F) -> Result<f64> {
    let mut b = 1.0;
    let mut qb = q(b)?;
    while !qb.is_finite() {
        b *= 0.5;
        if b < 1e-300 {
            return no_conv("half-line minimization", "no finite point".into());
        }
        qb = q(b)?;
    }
    loop {
        let q2 = q(2.0 * b)?;
        if q2 < qb {
            b *= 2.0;
            qb = q2;
            if b > 1e15 {
                return Ok(qb);
            }
        } else {
            break;
        }
    }
    loop {
        let qh = q(0.5 * b)?;
        if qh < qb {
            b *= 0.5;
            qb = qh;
            if b < 1e-15 {
                return Ok(qb);
            }
        } else {
            break;
        }
    }
    let mut err = None;
    let (_, v) = golden_min(
        |x| match q(x) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) => f64::INFINITY,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        0.5 * b,
        2.0 * b,
        1e-13,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v.min(qb))
}

/// Minimizes a convex function on the whole line.
fn min_on_line<F: FnMut(f64) -> Result<f64>>(mut f: F) -> Result<f64> {
    let mut c = 0.0;
    let mut fc = f(c)?;
    let mut d = 1.0;
    loop {
        let (fl, fr) = (f(c - d)?, f(c + d)?);
        if fl >= fc && fr >= fc {
            break;
        }
        if fl < fr {
            c -= d;
            fc = fl;
        } else {
            c += d;
            fc = fr;
        }
        d *= 2.0;
        if d > 1e12 {
            return no_conv("line minimization", format!("drifting at {c}"));
        }
    }
    let mut err = None;
    let (_, v) = golden_min(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        c - d,
        c + d,
        1e-12,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v.min(fc))
}

/// `h_{B_t}(theta) = inf_{lam > 0} (t + Lambda(lam theta)) / lam`.
fn support_at(cgf: &LawCgf, theta: &[f64], t: f64) -> Result<f64> {
    let mut v = vec![0.0; theta.len()];
    min_on_half_line(|lam| {
        for (vi, th) in v.iter_mut().zip(theta) {
            *vi = lam * th;
        }
        Ok((t + cgf.lambda(&v)?) / lam)
    })
}

fn check_level(law: &Law, t: f64, dirs: &DirectionSet) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("level t must be positive and finite, got {t}"));
    }
    if dirs.n != law.dim() {
        return Err(Error::GridMismatch(format!(
            "directions in R^{} for a law on R^{}",
            dirs.n,
            law.dim()
        )));
    }
    Ok(())
}

/// Support function of `B_t(mu) = {v : Lambda*_mu(v) <= t}`.
pub fn bt_support(law: &Law, t: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    check_level(law, t, dirs)?;
    let cgf = LawCgf::new(law, 2.0 * t + 20.0)?;
    let mut vals = Vec::with_capacity(dirs.len());
    for u in &dirs.dirs {
        vals.push(support_at(&cgf, u, t)?);
    }
    SupportTable::new(format!("B_{t}({})", law_label(law)), Meaning::Support, dirs.clone(), vals, None)
}

/// Root of an increasing `g` on `[lo, hi]` with `g(lo) < 0 <= g(hi)`; Illinois
/// steps where both ends are finite, bisection otherwise.
fn increasing_root<G: FnMut(f64) -> Result<f64>>(mut g: G, mut lo: f64, mut hi: f64, rtol: f64) -> Result<f64> {
    let mut glo = g(lo)?;
    let mut ghi = g(hi)?;
    let mut side = 0;
    for _ in 0..400 {
        if hi - lo <= rtol * hi {
            break;
        }
        let mut m = if glo.is_finite() && ghi.is_finite() && ghi > glo {
            hi - ghi * (hi - lo) / (ghi - glo)
        } else {
            0.5 * (lo + hi)
        };
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let gm = g(m)?;
        if gm < 0.0 {
            lo = m;
            glo = gm;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = m;
            ghi = gm;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn radius_product(cs: &[Cgf1D], u: &[f64], t: f64) -> Result<f64> {
    let g = |s: f64| -> Result<f64> {
        let mut acc = -t;
        for (c, &ui) in cs.iter().zip(u) {
            if ui != 0.0 || s == 0.0 {
                acc += c.lambda_star(s * ui)?;
            }
        }
        Ok(acc)
    };
    if g(0.0)? >= 0.0 {
        return domain(format!("level {t} is not above Lambda*(0)"));
    }
    let mut hi = 1.0;
    while g(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return no_conv("radial gauge", format!("unbounded along {u:?}"));
        }
    }
    increasing_root(g, 0.0, hi, 1e-13)
}

/// Radii of `B_t(mu)`: `r(u) = sup {s : Lambda*_mu(s u) <= t}`. Products use
/// the separable `Lambda*`; balls minimize `h_{B_t}(u + tau u_perp)` over
/// `tau`, which is supported up to `n = 2`.
pub fn bp_gauge(law: &Law, t: f64, dirs: &DirectionSet) -> Result<SupportTable> {
    check_level(law, t, dirs)?;
    let cgf = LawCgf::new(law, 2.0 * t + 20.0)?;
    let mut vals = Vec::with_capacity(dirs.len());
    for u in &dirs.dirs {
        let r = match &cgf {
            LawCgf::Product(cs) => radius_product(cs, u, t)?,
            LawCgf::Ball(b) if b.n == 1 => support_at(&cgf, u, t)?,
            LawCgf::Ball(b) if b.n == 2 => {
                let w = [-u[1], u[0]];
                min_on_line(|tau| support_at(&cgf, &[u[0] + tau * w[0], u[1] + tau * w[1]], t))?
            }
            LawCgf::Ball(b) => {
                return Err(Error::Unsupported(format!(
                    "radial gauge of B_t(mu_{{p,n}}) is available for n <= 2, got n = {}; use bt_support",
                    b.n
                )))
            }
        };
        vals.push(r);
    }
    SupportTable::new(format!("B_{t}({})", law_label(law)), Meaning::Radius, dirs.clone(), vals, None)
}

// ---------------------------------------------------------------------------
// regularity and comparisons

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    /// `max (m_p / m_q)(q / p)` over `2 <= q <= p <= p_max`; at least 1
    pub alpha: f64,
    /// the same maximum restricted to `q < p`
    pub strict: f64,
    pub worst_p: f64,
    pub worst_q: f64,
    pub worst_direction: usize,
}

/// Moment orders `2, 2.25, ..., p_max`.
fn alpha_orders(p_max: f64) -> Vec<f64> {
    let mut ks = Vec::new();
    let mut k = 2.0;
    while k < p_max - 1e-9 {
        ks.push(k);
        k += 0.25;
    }
    ks.push(p_max);
    ks
}

pub fn alpha_regularity_estimate(
    law: &Law,
    p_max: f64,
    dirs: &DirectionSet,
    opts: &MomentOptions,
) -> Result<AlphaEstimate> {
    if !(p_max >= 2.0) || !p_max.is_finite() {
        return domain(format!("p_max must be at least 2, got {p_max}"));
    }
    let ks = alpha_orders(p_max);
    let tables: Vec<SupportTable> = ks
        .iter()
        .map(|&k| zp_support(law, k, dirs, opts))
        .collect::<Result<_>>()?;
    let mut out = AlphaEstimate {
        alpha: 1.0,
        strict: 0.0,
        worst_p: ks[0],
        worst_q: ks[0],
        worst_direction: 0,
    };
    for d in 0..dirs.len() {
        for (i, &q) in ks.iter().enumerate() {
            for (j, &p) in ks.iter().enumerate().skip(i + 1) {
                let r = tables[j].values[d] / tables[i].values[d] * q / p;
                if r > out.strict {
                    out.strict = r;
                    if r > out.alpha {
                        out.alpha = r;
                    }
                    out.worst_p = p;
                    out.worst_q = q;
                    out.worst_direction = d;
                }
            }
        }
    }
    Ok(out)
}

/// Symmetric log-concave laws on the line used as a test family.
pub fn log_concave_family() -> Result<Vec<(String, Measure1D)>> {
    Ok(vec![
        (
            "uniform".into(),
            Measure1D::custom(LogDensityTable::from_fn(-1.0, 1.0, 3, |_| 0.0)?),
        ),
        (
            "gauss_laplace".into(),
            Measure1D::custom(LogDensityTable::from_fn(-16.0, 16.0, 2049, |x| -0.5 * x * x - x.abs())?),
        ),
        (
            "cosh".into(),
            Measure1D::custom(LogDensityTable::from_fn(-6.5, 6.5, 2049, |x| -x.cosh())?),
        ),
        (
            "triangle".into(),
            Measure1D::custom(LogDensityTable::from_fn(-1.0, 1.0, 2049, |x| (1.0 - x.abs()).max(1e-300).ln())?),
        ),
    ])
}

/// Calibration bracket for the unspecified constants in `~` relations.
pub const EQUIV_BRACKET: f64 = 64.0;

fn ratio_range(a: &SupportTable, b: &SupportTable) -> Result<(f64, f64)> {
    same_grid(a, b)?;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        let r = x / y;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

fn bracket_margin(lo: f64, hi: f64) -> f64 {
    let l = EQUIV_BRACKET.ln();
    (l - hi.ln()).min(lo.ln() + l) / l
}

/// Two-sided equivalence constants between `B_t(nu_p^n)`, the model body
/// (sum for `p < 2`, intersection for `p >= 2`) and, for `n <= 3`,
/// `B_t(mu_{p,n})`, all asserted to lie in `[1/64, 64]`.
pub fn body_compare(p: f64, n: usize, t_grid: &[f64], dirs: &DirectionSet) -> Result<CheckReport> {
    if dirs.n != n {
        return Err(Error::GridMismatch(format!("directions in R^{} for n = {n}", dirs.n)));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= n as f64)) {
        return domain(format!("t = {t} is outside (0, n] for n = {n}"));
    }
    let nu = Law::nu_pn(p, n)?;
    let ball = Law::ball(p, n)?;
    let mut w = Worst::new(0.0);
    let (mut mlo, mut mhi) = (f64::INFINITY, 0.0f64);
    let (mut blo, mut bhi) = (f64::INFINITY, 0.0f64);
    for &t in t_grid {
        let (lo, hi) = if p < 2.0 {
            ratio_range(&bt_support(&nu, t, dirs)?, &model_sum_support(p, t, dirs)?)?
        } else {
            ratio_range(&bp_gauge(&nu, t, dirs)?, &model_intersection_radius(p, t, dirs)?)?
        };
        mlo = mlo.min(lo);
        mhi = mhi.max(hi);
        w.push(bracket_margin(lo, hi), &[("t", t), ("model", 1.0)]);
        if n <= 3 {
            let (lo, hi) = ratio_range(&bt_support(&ball, t, dirs)?, &bt_support(&nu, t, dirs)?)?;
            blo = blo.min(lo);
            bhi = bhi.max(hi);
            w.push(bracket_margin(lo, hi), &[("t", t), ("model", 0.0)]);
        }
    }
    let mut r = w
        .into_report("body_compare")
        .param("p", p)
        .param("n", n)
        .param("t_grid", json!(t_grid))
        .param("directions", dirs.len())
        .param("bracket", EQUIV_BRACKET)
        .estimate("model_ratio_min", mlo)
        .estimate("model_ratio_max", mhi);
    if n <= 3 {
        r = r.estimate("ball_ratio_min", blo).estimate("ball_ratio_max", bhi);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// registered checks

pub const BODY_CHECK_IDS: &[&str] = &[
    "body_sandwich",
    "body_growth",
    "body_symmetry",
    "alpha_regularity",
    "moment_comparison",
    "body_compare",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodySizes {
    pub random_dirs: usize,
}

impl Default for BodySizes {
    fn default() -> Self {
        BodySizes { random_dirs: 64 }
    }
}

fn dirs_for(n: usize, seed: u64, sizes: &BodySizes) -> Result<DirectionSet> {
    DirectionSet::generate(
        n,
        &DirectionRule {
            random: sizes.random_dirs,
            seed,
            ..DirectionRule::default()
        },
    )
}

const MOMENT_ORDERS: [f64; 3] = [2.0, 4.0, 8.0];

fn body_sandwich(seed: u64, sizes: &BodySizes) -> Result<CheckReport> {
    let mut w = Worst::new(1e-9);
    let mut fz: f64 = 0.0;
    let mut fb: f64 = 0.0;
    for n in [1usize, 2, 3] {
        let law = Law::nu_pn(1.0, n)?;
        let dirs = dirs_for(n, rng::derive(seed, n as u64), sizes)?;
        for &p in &MOMENT_ORDERS {
            let z = zp_support(&law, p, &dirs, &MomentOptions::default())?;
            let b = bt_support(&law, p, &dirs)?;
            let a1 = inclusion_factor(&z, &b)?;
            let a2 = inclusion_factor(&b, &z)?;
            let c1 = 2f64.powf(1.0 / p) * std::f64::consts::E;
            let c2 = 4.0 * std::f64::consts::E;
            fz = fz.max(a1 / c1);
            fb = fb.max(a2 / c2);
            w.le(a1, c1, &[("n", n as f64), ("p", p), ("z_in_b", 1.0)]);
            w.le(a2, c2, &[("n", n as f64), ("p", p), ("z_in_b", 0.0)]);
        }
    }
    Ok(w
        .into_report("body_sandwich")
        .param("law", "nu^n")
        .param("n", json!([1, 2, 3]))
        .param("p", json!(MOMENT_ORDERS))
        .estimate("z_in_b_factor_over_bound", fz)
        .estimate("b_in_z_factor_over_bound", fb)
        .with_samples(0, seed))
}

fn body_growth(seed: u64, sizes: &BodySizes) -> Result<CheckReport> {
    let mut w = Worst::new(1e-9);
    let o = MomentOptions::default();
    for n in [1usize, 2, 3] {
        let law = Law::nu_pn(1.0, n)?;
        let dirs = dirs_for(n, rng::derive(seed, 10 + n as u64), sizes)?;
        let z: Vec<SupportTable> = MOMENT_ORDERS.iter().map(|&p| zp_support(&law, p, &dirs, &o)).collect::<Result<_>>()?;
        let m: Vec<SupportTable> = MOMENT_ORDERS.iter().map(|&p| mp_radius(&law, p, &dirs, &o)).collect::<Result<_>>()?;
        let bs: Vec<SupportTable> = MOMENT_ORDERS.iter().map(|&p| bt_support(&law, p, &dirs)).collect::<Result<_>>()?;
        let br: Vec<SupportTable> = MOMENT_ORDERS.iter().map(|&p| bp_gauge(&law, p, &dirs)).collect::<Result<_>>()?;
        for i in 0..MOMENT_ORDERS.len() {
            for j in i + 1..MOMENT_ORDERS.len() {
                let (q, p) = (MOMENT_ORDERS[i], MOMENT_ORDERS[j]);
                for d in 0..dirs.len() {
                    let at = [("n", n as f64), ("q", q), ("p", p), ("dir", d as f64)];
                    w.le(z[i].values[d], z[j].values[d], &at);
                    w.le(m[j].values[d], m[i].values[d], &at);
                    for b in [&bs, &br] {
                        w.le(b[i].values[d], b[j].values[d], &at);
                        w.le(b[j].values[d], p / q * b[i].values[d], &at);
                    }
                }
            }
        }
        if n == 1 {
            for i in 0..MOMENT_ORDERS.len() {
                for d in 0..dirs.len() {
                    let prod = m[i].values[d] * z[i].values[d];
                    w.le((prod - 1.0).abs(), 1e-9, &[("duality_p", MOMENT_ORDERS[i])]);
                }
            }
        }
    }
    Ok(w
        .into_report("body_growth")
        .param("law", "nu^n")
        .param("n", json!([1, 2, 3]))
        .param("p", json!(MOMENT_ORDERS))
        .with_samples(0, seed))
}

fn body_symmetry(seed: u64, sizes: &BodySizes) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let cases = [(1.0, 3usize), (2.0, 3), (3.0, 2), (1.5, 2)];
    for (k, &(p, n)) in cases.iter().enumerate() {
        let law = Law::nu_pn(p, n)?;
        let dirs = dirs_for(n, rng::derive(seed, 20 + k as u64), sizes)?;
        norm = norm.max(dirs.norm_defect());
        for t in [0.5, 2.0] {
            worst = worst.max(bt_support(&law, t, &dirs)?.symmetry_defect());
            worst = worst.max(bp_gauge(&law, t, &dirs)?.symmetry_defect());
        }
        worst = worst.max(zp_support(&law, 4.0, &dirs, &MomentOptions::default())?.symmetry_defect());
    }
    let margin = (1e-10 - worst).min(1e-12 - norm);
    Ok(CheckReport::new("body_symmetry", CheckMode::Exact)
        .param("cases", json!(cases.iter().map(|c| [c.0, c.1 as f64]).collect::<Vec<_>>()))
        .estimate("symmetry_defect", worst)
        .estimate("norm_defect", norm)
        .with_samples(0, seed)
        .judged(margin, 0.0))
}

fn alpha_regularity(seed: u64) -> Result<CheckReport> {
    let mut laws: Vec<(String, Measure1D)> = vec![
        ("nu".into(), Measure1D::nu()),
        ("nu_2".into(), Measure1D::nu_p(2.0)?),
        ("nu_4".into(), Measure1D::nu_p(4.0)?),
    ];
    laws.extend(log_concave_family()?);
    let dirs = DirectionSet::axes(1)?;
    let mut w = Worst::new(0.0);
    let mut r = CheckReport::new("alpha_regularity", CheckMode::Exact);
    for (i, (name, m)) in laws.iter().enumerate() {
        let law = Law::Product(ProductMeasure::new(vec![m.clone()])?);
        let a = alpha_regularity_estimate(&law, 12.0, &dirs, &MomentOptions::default())?;
        r = r.estimate(&format!("alpha_{name}"), a.alpha).estimate(&format!("strict_{name}"), a.strict);
        w.le(a.alpha, 1.0 + 1e-6, &[("law", i as f64), ("p", a.worst_p), ("q", a.worst_q)]);
    }
    let mut out = w.into_report("alpha_regularity");
    out.estimates.extend(r.estimates);
    Ok(out
        .param("p_max", 12.0)
        .param("laws", json!(laws.iter().map(|l| l.0.clone()).collect::<Vec<_>>()))
        .with_samples(0, seed))
}

/// `h_{Z_t}(mu_{p,n}) / h_{Z_t}(nu_p^n)` against `r_{p,n} / max(n, t)^{1/p}`.
fn moment_comparison(seed: u64) -> Result<CheckReport> {
    let mut w = Worst::new(0.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for p in [1.0, 2.0, 3.0] {
        for n in [2usize, 8, 32] {
            let dirs = DirectionSet::generate(
                n,
                &DirectionRule {
                    axes: true,
                    diagonals: n <= 8,
                    random: 0,
                    seed,
                },
            )?;
            let r = ball_constants(p, n)?.r_pn;
            for t in [2.0, 4.0, 8.0] {
                let o = MomentOptions::default();
                let zb = zp_support(&Law::ball(p, n)?, t, &dirs, &o)?;
                let zn = zp_support(&Law::nu_pn(p, n)?, t, &dirs, &o)?;
                let (a, b) = ratio_range(&zb, &zn)?;
                let s = (n as f64).max(t).powf(1.0 / p) / r;
                lo = lo.min(a * s);
                hi = hi.max(b * s);
                w.push(bracket_margin(a * s, b * s), &[("p", p), ("n", n as f64), ("t", t)]);
            }
        }
    }
    Ok(w
        .into_report("moment_comparison")
        .param("p", json!([1.0, 2.0, 3.0]))
        .param("n", json!([2, 8, 32]))
        .param("t", json!([2.0, 4.0, 8.0]))
        .param("bracket", EQUIV_BRACKET)
        .estimate("constant_min", lo)
        .estimate("constant_max", hi)
        .with_samples(0, seed))
}

fn body_compare_suite(seed: u64, sizes: &BodySizes) -> Result<CheckReport> {
    let mut w = Worst::new(0.0);
    let mut r = CheckReport::new("body_compare", CheckMode::Exact);
    for p in [1.0, 1.5, 2.0, 3.0] {
        for n in [2usize, 8] {
            let dirs = dirs_for(n, rng::derive(seed, 30 + n as u64), sizes)?;
            let ts: Vec<f64> = [0.05, 0.5, 1.0, 2.0].into_iter().filter(|t| *t <= n as f64).collect();
            let c = body_compare(p, n, &ts, &dirs)?;
            for (k, v) in &c.estimates {
                if k.contains("ratio") {
                    r = r.estimate(&format!("{k}_p{p}_n{n}"), *v);
                }
            }
            w.push(c.margin, &[("p", p), ("n", n as f64)]);
        }
    }
    let mut out = w.into_report("body_compare");
    out.estimates.extend(r.estimates);
    Ok(out
        .param("p", json!([1.0, 1.5, 2.0, 3.0]))
        .param("n", json!([2, 8]))
        .param("t", json!([0.05, 0.5, 1.0, 2.0]))
        .param("bracket", EQUIV_BRACKET)
        .with_samples(0, seed))
}

pub fn body_suite_check(id: &str, seed: u64, sizes: &BodySizes) -> Result<CheckReport> {
    let s = rng::derive(seed, 0xB0D1);
    match id {
        "body_sandwich" => body_sandwich(s, sizes),
        "body_growth" => body_growth(s, sizes),
        "body_symmetry" => body_symmetry(s, sizes),
        "alpha_regularity" => alpha_regularity(s),
        "moment_comparison" => moment_comparison(s),
        "body_compare" => body_compare_suite(s, sizes),
        _ => Err(Error::UnknownId(id.to_string())),
    }
}
