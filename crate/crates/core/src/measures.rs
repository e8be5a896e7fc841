//! Reference measures: the family `nu_p`, marginals of the uniform law on
//! `r_{p,n} B_p^n`, tabulated log-concave laws, their products, and seeded
//! samplers. Log-Laplace transforms come from quadrature or Monte Carlo.

use crate::convex::{Grid, GridFunction};
use crate::error::{domain, Error, Result};
use crate::quad::{golden_min, integrate_pieces, tanh_sinh};
use crate::report::{CheckMode, CheckReport, Worst};
use crate::rng::{self, Rng};
use crate::special::{
    ball_constants, inv_reg_upper_gamma_ln, ln_beta, ln_gamma, ln_reg_gamma_pair, reg_inc_beta,
};
use crate::stats::Accum;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const QUAD_REL: f64 = 1e-13;
/// Integrands are cut where they fall `TAIL_CUT` nats below their peak.
const TAIL_CUT: f64 = 60.0;

/// Piecewise-linear log-density on a uniform grid; the density vanishes
/// outside the grid. Concave tables give log-concave laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDensityTable {
    pub x0: f64,
    pub dx: f64,
    pub log_density: Vec<f64>,
    #[serde(skip)]
    cum: Vec<f64>,
    #[serde(skip)]
    ln_z: f64,
}

/// `ln int_0^h exp(A + (B - A) t / h) dt`.
fn ln_cell(h: f64, a: f64, b: f64) -> f64 {
    let d = (b - a).abs();
    let m = a.max(b);
    if d < 1e-12 {
        h.ln() + m - 0.5 * d
    } else {
        h.ln() + m + (-(-d).exp_m1() / d).ln()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl LogDensityTable {
    pub fn new(x0: f64, dx: f64, log_density: Vec<f64>) -> Result<Self> {
        Grid::new(x0, dx, log_density.len())?;
        if log_density.iter().any(|v| !v.is_finite()) {
            return domain("log-density table must be finite");
        }
        let cells: Vec<f64> = log_density
            .windows(2)
            .map(|w| ln_cell(dx, w[0], w[1]))
            .collect();
        let ln_z = log_sum_exp(&cells);
        let mut cum = Vec::with_capacity(log_density.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for c in &cells {
            acc += (c - ln_z).exp();
            cum.push(acc);
        }
        let last = *cum.last().unwrap();
        for c in cum.iter_mut() {
            *c /= last;
        }
        Ok(LogDensityTable {
            x0,
            dx,
            log_density,
            cum,
            ln_z,
        })
    }

    /// Tabulates `ln_density` on `n` nodes over `[a, b]`.
    pub fn from_fn<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Result<Self> {
        let g = Grid::span(a, b, n)?;
        LogDensityTable::new(g.x0, g.dx, g.xs().into_iter().map(f).collect())
    }

    fn ensure(&self) -> Self {
        if self.cum.is_empty() {
            LogDensityTable::new(self.x0, self.dx, self.log_density.clone()).unwrap()
        } else {
            self.clone()
        }
    }

    fn hi(&self) -> f64 {
        self.x0 + (self.log_density.len() - 1) as f64 * self.dx
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.log_density.len();
        if x < self.x0 || x > self.hi() {
            return None;
        }
        let t = (x - self.x0) / self.dx;
        let i = (t.floor() as usize).min(n - 2);
        Some((i, x - (self.x0 + i as f64 * self.dx)))
    }

    fn ln_density(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => f64::NEG_INFINITY,
            Some((i, s)) => {
                let (a, b) = (self.log_density[i], self.log_density[i + 1]);
                a + (b - a) * s / self.dx - self.ln_z
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let (i, s) = self.locate(x).unwrap();
        let (a, b) = (self.log_density[i], self.log_density[i + 1]);
        let bb = b - a;
        let part = ln_cell(s, a, a + bb * s / self.dx);
        (self.cum[i] + (part - self.ln_z).exp()).min(1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.log_density.len();
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&u)) {
            Ok(i) => return self.x0 + i as f64 * self.dx,
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let a = self.log_density[i] - self.ln_z;
        let slope = (self.log_density[i + 1] - self.log_density[i]) / self.dx;
        let m = u - self.cum[i];
        let tau = if slope.abs() < 1e-12 {
            m * (-a).exp()
        } else {
            (m * slope * (-a).exp()).ln_1p() / slope
        };
        self.x0 + i as f64 * self.dx + tau.clamp(0.0, self.dx)
    }

    fn ln_laplace(&self, s: f64) -> f64 {
        let cells: Vec<f64> = (0..self.log_density.len() - 1)
            .map(|i| {
                let x = self.x0 + i as f64 * self.dx;
                ln_cell(
                    self.dx,
                    self.log_density[i] + s * x,
                    self.log_density[i + 1] + s * (x + self.dx),
                )
            })
            .collect();
        log_sum_exp(&cells) - self.ln_z
    }

    fn expect<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        let breaks: Vec<f64> = (0..self.log_density.len())
            .map(|i| self.x0 + i as f64 * self.dx)
            .collect();
        Ok(integrate_pieces(|x| g(x) * self.ln_density(x).exp(), &breaks, 1e-15, 1e-12)?.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    /// density `(2 Gamma(1+1/p))^{-1} exp(-|x|^p)`
    NuP {
        p: f64,
    },
    /// one coordinate of the uniform law on `r_{p,n} B_p^n`
    MuMarginal {
        p: f64,
        n: usize,
    },
    Custom {
        table: LogDensityTable,
    },
}

/// A law on the line: `loc + scale * Y` with `Y` of the given kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure1D {
    pub kind: Kind,
    pub loc: f64,
    pub scale: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("exponent p must satisfy 1 <= p < inf, got {p}"));
    }
    Ok(())
}

/// `ln int_{-b}^{b} e^{v y} dy`.
fn ln_sym_laplace(v: f64, b: f64) -> f64 {
    if b <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = (v * b).abs();
    if z < 1e-6 {
        (2.0 * b).ln() + z * z / 6.0
    } else {
        z + (-(-2.0 * z).exp()).ln_1p() - v.abs().ln()
    }
}

/// `(1 + u)^p - 1 - p u` for `u > -1`, by series when `u` is small.
fn binomial_tail(p: f64, u: f64) -> f64 {
    if u.abs() < 0.01 {
        let mut c = p * (p - 1.0) / 2.0;
        let mut acc = c * u * u;
        for k in 3..40 {
            c *= (p - (k - 1) as f64) / k as f64;
            let term = c * u.powi(k);
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        (p * u.ln_1p()).exp_m1() - p * u
    }
}

fn nu_p_ln_laplace_quad(p: f64, s: f64) -> Result<f64> {
    let s = s.abs();
    if p == 1.0 && s >= 1.0 {
        return Ok(f64::INFINITY);
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let ln_norm = (2.0 * ln_gamma(1.0 + 1.0 / p).exp()).ln();
    if p == 1.0 {
        let g = |x: f64| s * x - x.abs();
        let br = [-TAIL_CUT / (1.0 + s), 0.0, TAIL_CUT / (1.0 - s)];
        let r = integrate_pieces(|x| g(x).exp(), &br, 0.0, QUAD_REL)?;
        return Ok(r.value.ln() - ln_norm);
    }
    let peak = (s / p).powf(1.0 / (p - 1.0));
    let pk = peak.powf(p);
    if !pk.is_finite() {
        return Ok(f64::INFINITY);
    }
    let m = (p - 1.0) * pk;
    // g(peak + d) - m = -pk ((1 + u)^p - 1 - p u) with u = d / peak
    let g = |d: f64| {
        let u = d / peak;
        if u <= -1.0 {
            let x = peak + d;
            s * x - x.abs().powf(p) - m
        } else {
            -pk * binomial_tail(p, u)
        }
    };
    // g is concave, so {g >= -TAIL_CUT} is an interval around the peak
    let edge = |dir: f64| {
        let mut d = 1.0;
        while g(dir * d) > -TAIL_CUT && d < 1e6 * (1.0 + peak) {
            d *= 2.0;
        }
        dir * d
    };
    let (lo, hi) = (edge(-1.0), edge(1.0));
    let mut br = vec![lo];
    if lo < -peak {
        br.push(-peak);
    }
    br.push(0.0);
    br.push(hi);
    let r = integrate_pieces(|d| g(d).exp(), &br, 0.0, QUAD_REL)?;
    Ok(m + r.value.ln() - ln_norm)
}

fn marginal_b(p: f64, n: usize) -> f64 {
    (n as f64 - 1.0) / p + 1.0
}

fn marginal_ln_laplace_quad(p: f64, n: usize, s: f64) -> Result<f64> {
    let r = ball_constants(p, n)?.r_pn;
    if n == 1 {
        return Ok(ln_sym_laplace(s, r) - (2.0 * r).ln());
    }
    let k = marginal_b(p, n) - 1.0;
    let ln_c = p.ln() - (2.0 * r).ln() - ln_beta(1.0 / p, k + 1.0);
    let s = s.abs();
    let g = move |t: f64| s * t + k * (-(t.abs() / r).powf(p)).ln_1p();
    let (_, negm) = golden_min(|t| -g(t), 0.0, r * (1.0 - 1e-15), 1e-12);
    let m = (-negm).max(g(0.0));
    let left = tanh_sinh(|t| (g(t) - m).exp(), -r, 0.0, 1e-14)?;
    let right = tanh_sinh(|t| (g(t) - m).exp(), 0.0, r, 1e-14)?;
    Ok(m + (left.value + right.value).ln() + ln_c)
}

impl Measure1D {
    pub fn nu_p(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Measure1D {
            kind: Kind::NuP { p },
            loc: 0.0,
            scale: 1.0,
        })
    }

    /// The symmetric exponential law `nu = nu_1`.
    pub fn nu() -> Self {
        Measure1D {
            kind: Kind::NuP { p: 1.0 },
            loc: 0.0,
            scale: 1.0,
        }
    }

    pub fn mu_marginal(p: f64, n: usize) -> Result<Self> {
        check_p(p)?;
        if n == 0 {
            return domain("marginal needs n >= 1");
        }
        Ok(Measure1D {
            kind: Kind::MuMarginal { p, n },
            loc: 0.0,
            scale: 1.0,
        })
    }

    pub fn custom(table: LogDensityTable) -> Self {
        Measure1D {
            kind: Kind::Custom {
                table: table.ensure(),
            },
            loc: 0.0,
            scale: 1.0,
        }
    }

    pub fn affine(mut self, loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return domain(format!("scale must be positive, got {scale}"));
        }
        self.loc = self.loc * scale + loc;
        self.scale *= scale;
        Ok(self)
    }

    fn ln_density_std(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::NuP { p } => -y.abs().powf(*p) - (2.0 * ln_gamma(1.0 + 1.0 / p).exp()).ln(),
            Kind::MuMarginal { p, n } => {
                let r = ball_constants(*p, *n).unwrap().r_pn;
                if y.abs() >= r {
                    return f64::NEG_INFINITY;
                }
                let k = marginal_b(*p, *n) - 1.0;
                p.ln() - (2.0 * r).ln() - ln_beta(1.0 / p, k + 1.0)
                    + k * (-(y.abs() / r).powf(*p)).ln_1p()
            }
            Kind::Custom { table } => table.ln_density(y),
        }
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        self.ln_density_std((x - self.loc) / self.scale) - self.scale.ln()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// Returns `(F(x), 1 - F(x))` with both tails accurate.
    pub fn cdf_pair(&self, x: f64) -> (f64, f64) {
        let y = (x - self.loc) / self.scale;
        match &self.kind {
            Kind::NuP { p } => {
                let (_, lq) = ln_reg_gamma_pair(1.0 / p, y.abs().powf(*p)).unwrap();
                let t = 0.5 * lq.exp();
                if y >= 0.0 {
                    (1.0 - t, t)
                } else {
                    (t, 1.0 - t)
                }
            }
            Kind::MuMarginal { p, n } => {
                let r = ball_constants(*p, *n).unwrap().r_pn;
                let u = (y.abs() / r).min(1.0).powf(*p);
                let i = reg_inc_beta(1.0 / p, marginal_b(*p, *n), u).unwrap();
                let t = 0.5 * (1.0 - i);
                if y >= 0.0 {
                    (1.0 - t, t)
                } else {
                    (t, 1.0 - t)
                }
            }
            Kind::Custom { table } => {
                let c = table.cdf(y);
                (c, 1.0 - c)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pair(x).0
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_pair(x).1
    }

    pub fn support(&self) -> (f64, f64) {
        let (a, b) = match &self.kind {
            Kind::NuP { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Kind::MuMarginal { p, n } => {
                let r = ball_constants(*p, *n).unwrap().r_pn;
                (-r, r)
            }
            Kind::Custom { table } => (table.x0, table.hi()),
        };
        (self.loc + self.scale * a, self.loc + self.scale * b)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return domain(format!("quantile needs u in (0,1), got {u}"));
        }
        let y = match &self.kind {
            Kind::NuP { p } => {
                if u == 0.5 {
                    0.0
                } else {
                    let tail = if u < 0.5 { u } else { 1.0 - u };
                    let z = inv_reg_upper_gamma_ln(1.0 / p, (2.0 * tail).ln())?;
                    let y = z.powf(1.0 / p);
                    if u < 0.5 {
                        -y
                    } else {
                        y
                    }
                }
            }
            Kind::MuMarginal { p, n } => {
                let r = ball_constants(*p, *n)?.r_pn;
                let std = Measure1D::mu_marginal(*p, *n)?;
                crate::quad::bisect(|t| std.cdf(t) - u, -r, r, 1e-15)
            }
            Kind::Custom { table } => table.quantile(u),
        };
        Ok(self.loc + self.scale * y)
    }

    /// Quantile from a left-tail probability given in log form.
    pub fn quantile_ln_lower(&self, ln_u: f64) -> Result<f64> {
        match &self.kind {
            Kind::NuP { p } if ln_u < (0.5f64).ln() => {
                let z = inv_reg_upper_gamma_ln(1.0 / p, ln_u + std::f64::consts::LN_2)?;
                Ok(self.loc - self.scale * z.powf(1.0 / p))
            }
            _ => self.quantile(ln_u.exp()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            Kind::Custom { table } => {
                let n = table.log_density.len();
                (table.x0 + table.hi()).abs() < 1e-12 * table.dx
                    && (0..n).all(|i| {
                        (table.log_density[i] - table.log_density[n - 1 - i]).abs() < 1e-12
                    })
            }
            _ => true,
        }
    }

    /// `E|Y|^k` for the standardized variable (before `loc`, `scale`).
    fn abs_moment_std(&self, k: f64) -> Result<f64> {
        match &self.kind {
            Kind::NuP { p } => Ok((ln_gamma((k + 1.0) / p) - ln_gamma(1.0 / p)).exp()),
            Kind::MuMarginal { p, n } => {
                let r = ball_constants(*p, *n)?.r_pn;
                let b = marginal_b(*p, *n);
                Ok(r.powf(k) * (ln_beta((k + 1.0) / p, b) - ln_beta(1.0 / p, b)).exp())
            }
            Kind::Custom { table } => table.expect(|y| y.abs().powf(k)),
        }
    }

    /// `E|X - c|^k` with `c` the centre of symmetry for symmetric laws.
    pub fn abs_moment(&self, k: f64) -> Result<f64> {
        if self.loc == 0.0 {
            if let Kind::Custom { table } = &self.kind {
                let s = self.scale;
                return table.expect(|y| (s * y).abs().powf(k));
            }
            return Ok(self.scale.powf(k) * self.abs_moment_std(k)?);
        }
        let (loc, s) = (self.loc, self.scale);
        match &self.kind {
            Kind::Custom { table } => table.expect(|y| (loc + s * y).abs().powf(k)),
            _ => {
                let std = Measure1D {
                    loc: 0.0,
                    scale: 1.0,
                    kind: self.kind.clone(),
                };
                let (a, b) = std.support();
                let lo = if a.is_finite() { a } else { -200.0 };
                let hi = if b.is_finite() { b } else { 200.0 };
                Ok(integrate_pieces(
                    |y| (loc + s * y).abs().powf(k) * std.density(y),
                    &[lo, 0.0, hi],
                    1e-15,
                    1e-12,
                )?
                .value)
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        match &self.kind {
            Kind::Custom { table } => Ok(self.loc + self.scale * table.expect(|y| y)?),
            _ => Ok(self.loc),
        }
    }

    pub fn variance(&self) -> Result<f64> {
        match &self.kind {
            Kind::Custom { table } => {
                let m = table.expect(|y| y)?;
                Ok(self.scale * self.scale * table.expect(|y| (y - m) * (y - m))?)
            }
            _ => Ok(self.scale * self.scale * self.abs_moment_std(2.0)?),
        }
    }

    /// Log-Laplace transform `ln E e^{sX}`; `+inf` outside its domain.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        let t = s * self.scale;
        let base = match &self.kind {
            Kind::NuP { p } if *p == 1.0 => {
                if t.abs() >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-t * t).ln_1p()
                }
            }
            Kind::NuP { p } if *p == 2.0 => t * t / 4.0,
            _ => return self.log_mgf_quadrature(s),
        };
        Ok(s * self.loc + base)
    }

    /// Log-Laplace transform always evaluated by quadrature.
    pub fn log_mgf_quadrature(&self, s: f64) -> Result<f64> {
        let t = s * self.scale;
        let base = match &self.kind {
            Kind::NuP { p } => nu_p_ln_laplace_quad(*p, t)?,
            Kind::MuMarginal { p, n } => marginal_ln_laplace_quad(*p, *n, t)?,
            Kind::Custom { table } => table.ln_laplace(t),
        };
        Ok(s * self.loc + base)
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let y = match &self.kind {
            Kind::NuP { p } => sample_nu_p_std(*p, rng),
            Kind::MuMarginal { p, n } => {
                let mut buf = vec![0.0; *n];
                sample_ball_into(*p, ball_constants(*p, *n).unwrap().r_pn, rng, &mut buf);
                buf[0]
            }
            Kind::Custom { table } => {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                table.quantile(u)
            }
        };
        self.loc + self.scale * y
    }
}

/// Affine normalization to mean zero and unit variance.
pub fn isotropic_rescale(m: &Measure1D) -> Result<Measure1D> {
    let mean = m.mean()?;
    let sd = m.variance()?.sqrt();
    let mut out = m.clone();
    out.loc = (m.loc - mean) / sd;
    out.scale = m.scale / sd;
    Ok(out)
}

pub fn sample_nu_p_std(p: f64, rng: &mut Rng) -> f64 {
    let g: f64 = if p == 1.0 {
        Exp1.sample(rng)
    } else {
        Gamma::new(1.0 / p, 1.0).unwrap().sample(rng)
    };
    let y = g.powf(1.0 / p);
    if rng.gen::<bool>() {
        y
    } else {
        -y
    }
}

/// Uniform point of `rad * B_p^n`: a `nu_p^n` vector divided by
/// `(||g||_p^p + E)^{1/p}` with an independent standard exponential `E`.
pub fn sample_ball_into(p: f64, rad: f64, rng: &mut Rng, out: &mut [f64]) {
    let mut s = 0.0;
    for x in out.iter_mut() {
        *x = sample_nu_p_std(p, rng);
        s += x.abs().powf(p);
    }
    let e: f64 = Exp1.sample(rng);
    let f = rad / (s + e).powf(1.0 / p);
    for x in out.iter_mut() {
        *x *= f;
    }
}

/// Product of one-dimensional laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    pub components: Vec<Measure1D>,
}

impl ProductMeasure {
    pub fn new(components: Vec<Measure1D>) -> Result<Self> {
        if components.is_empty() {
            return domain("product measure needs at least one factor");
        }
        Ok(ProductMeasure { components })
    }

    pub fn power(m: Measure1D, n: usize) -> Result<Self> {
        ProductMeasure::new(vec![m; n])
    }

    pub fn nu_pn(p: f64, n: usize) -> Result<Self> {
        ProductMeasure::power(Measure1D::nu_p(p)?, n)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn log_mgf(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let mut s = 0.0;
        for (m, &vi) in self.components.iter().zip(v) {
            if vi != 0.0 {
                s += m.log_mgf(vi)?;
            }
        }
        Ok(s)
    }

    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        for (m, x) in self.components.iter().zip(out.iter_mut()) {
            *x = m.sample(rng);
        }
    }
}

fn check_dim(n: usize, got: usize) -> Result<()> {
    if n != got {
        return Err(Error::Domain(format!(
            "expected a vector of length {n}, got {got}"
        )));
    }
    Ok(())
}

/// The uniform law `mu_{p,n}` on the volume-one ball `r_{p,n} B_p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpBall {
    pub p: f64,
    pub n: usize,
}

impl LpBall {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        check_p(p)?;
        if n == 0 {
            return domain("ball needs n >= 1");
        }
        Ok(LpBall { p, n })
    }

    pub fn radius(&self) -> f64 {
        ball_constants(self.p, self.n).unwrap().r_pn
    }

    /// `mu(||x||_p <= s)`.
    pub fn radial_cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            (s / self.radius()).min(1.0).powi(self.n as i32)
        }
    }

    pub fn marginal(&self) -> Measure1D {
        Measure1D::mu_marginal(self.p, self.n).unwrap()
    }

    /// `int x_1^2 d mu`.
    pub fn coordinate_variance(&self) -> f64 {
        let b = marginal_b(self.p, self.n);
        let r = self.radius();
        r * r * (ln_beta(3.0 / self.p, b) - ln_beta(1.0 / self.p, b)).exp()
    }

    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        sample_ball_into(self.p, self.radius(), rng, out);
    }

    /// Log-Laplace transform by nested quadrature over exact slices; `n <= 3`.
    pub fn log_mgf(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.n, v.len())?;
        if self.n > 3 {
            return Err(Error::Unsupported(format!(
                "quadrature Laplace transform needs n <= 3, got {}",
                self.n
            )));
        }
        if v.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        ln_ball_laplace(self.p, self.radius(), v)
    }
}

fn dual_norm(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    } else {
        let q = p / (p - 1.0);
        v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `ln int_{rad B_p^k} e^{<v, x>} dx` for `k = v.len()`.
fn ln_ball_laplace(p: f64, rad: f64, v: &[f64]) -> Result<f64> {
    if rad <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if v.len() == 1 {
        return Ok(ln_sym_laplace(v[0], rad));
    }
    let rest = &v[1..];
    let shift = rad * dual_norm(v, p)
        + crate::special::ln_ball_volume(p, v.len())
        + v.len() as f64 * rad.ln();
    let mut err = None;
    let f = |y: f64| -> f64 {
        let slice = (rad.powf(p) - y.abs().powf(p)).max(0.0).powf(1.0 / p);
        match ln_ball_laplace(p, slice, rest) {
            Ok(l) => (v[0] * y + l - shift).exp(),
            Err(_) => f64::NAN,
        }
    };
    let a = tanh_sinh(&f, -rad, 0.0, 1e-13)?;
    let b = tanh_sinh(&f, 0.0, rad, 1e-13)?;
    let tot = a.value + b.value;
    if !tot.is_finite() {
        err = Some(Error::NonConvergence {
            what: "ball Laplace transform".into(),
            state: format!("v={v:?}"),
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(shift + tot.ln())
}

/// Anything whose log-Laplace transform can be evaluated.
pub trait LogMgf {
    fn dim(&self) -> usize;
    fn log_mgf_at(&self, v: &[f64]) -> Result<f64>;
    /// `E <u, X>`
    fn mean_along(&self, u: &[f64]) -> Result<f64>;
}

impl LogMgf for Measure1D {
    fn dim(&self) -> usize {
        1
    }
    fn log_mgf_at(&self, v: &[f64]) -> Result<f64> {
        check_dim(1, v.len())?;
        self.log_mgf(v[0])
    }
    fn mean_along(&self, u: &[f64]) -> Result<f64> {
        Ok(u[0] * self.mean()?)
    }
}

impl LogMgf for ProductMeasure {
    fn dim(&self) -> usize {
        self.components.len()
    }
    fn log_mgf_at(&self, v: &[f64]) -> Result<f64> {
        self.log_mgf(v)
    }
    fn mean_along(&self, u: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (m, &ui) in self.components.iter().zip(u) {
            s += ui * m.mean()?;
        }
        Ok(s)
    }
}

impl LogMgf for LpBall {
    fn dim(&self) -> usize {
        self.n
    }
    fn log_mgf_at(&self, v: &[f64]) -> Result<f64> {
        self.log_mgf(v)
    }
    fn mean_along(&self, _u: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

/// Sampleable laws on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Product(ProductMeasure),
    Ball(LpBall),
}

impl Law {
    pub fn nu_pn(p: f64, n: usize) -> Result<Self> {
        Ok(Law::Product(ProductMeasure::nu_pn(p, n)?))
    }

    pub fn ball(p: f64, n: usize) -> Result<Self> {
        Ok(Law::Ball(LpBall::new(p, n)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Law::Product(m) => m.dim(),
            Law::Ball(b) => b.n,
        }
    }

    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        match self {
            Law::Product(m) => m.sample_into(rng, out),
            Law::Ball(b) => b.sample_into(rng, out),
        }
    }

    pub fn log_mgf(&self, v: &[f64]) -> Result<f64> {
        match self {
            Law::Product(m) => m.log_mgf(v),
            Law::Ball(b) => b.log_mgf(v),
        }
    }
}

impl LogMgf for Law {
    fn dim(&self) -> usize {
        Law::dim(self)
    }
    fn log_mgf_at(&self, v: &[f64]) -> Result<f64> {
        self.log_mgf(v)
    }
    fn mean_along(&self, u: &[f64]) -> Result<f64> {
        match self {
            Law::Product(m) => m.mean_along(u),
            Law::Ball(_) => Ok(0.0),
        }
    }
}

/// Seeded draws, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    pub seed: u64,
    pub generator: String,
    pub draws: Vec<f64>,
}

const BATCH_MAGIC: &[u8; 4] = b"ICLB";
const BATCH_VERSION: u16 = 1;

impl SampleBatch {
    pub fn count(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.draws.len() / self.n
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.draws[i * self.n..(i + 1) * self.n]
    }

    /// Header (magic, version u16, n u32, count u64, seed u64) then
    /// little-endian `f64` values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BATCH_MAGIC)?;
        w.write_all(&BATCH_VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.count() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for x in &self.draws {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BATCH_MAGIC {
            return Err(Error::Format("bad sample batch magic".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        if u16::from_le_bytes(b2) != BATCH_VERSION {
            return Err(Error::Format("unsupported sample batch version".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let mut draws = Vec::with_capacity(n * count);
        for _ in 0..n * count {
            r.read_exact(&mut b8)?;
            draws.push(f64::from_le_bytes(b8));
        }
        Ok(SampleBatch {
            n,
            seed,
            generator: rng::GENERATOR_ID.to_string(),
            draws,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let head: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        s.push_str(&head.join(","));
        s.push('\n');
        for i in 0..self.count() {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:?}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// `count` draws from `law`, chunked over independent streams.
pub fn sample_law(law: &Law, count: usize, seed: u64) -> SampleBatch {
    let n = law.dim();
    let parts = rng::chunked(count, seed, |r, _, c| {
        let mut v = vec![0.0; c * n];
        for row in v.chunks_mut(n) {
            law.sample_into(r, row);
        }
        v
    });
    SampleBatch {
        n,
        seed,
        generator: rng::GENERATOR_ID.to_string(),
        draws: parts.concat(),
    }
}

pub fn sample_nu_pn(p: f64, n: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return domain("sample_nu_pn needs n >= 1");
    }
    Ok(sample_law(&Law::nu_pn(p, n)?, count, seed))
}

/// `nu_p^n(||x||_p < s) = P(n/p, s^p)`.
pub fn nu_pn_norm_cdf(p: f64, n: usize, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    Ok(ln_reg_gamma_pair(n as f64 / p, s.powf(p))?.0.exp())
}

/// Closed-form `Lambda*_nu(x)` for the symmetric exponential law.
pub fn lambda_star_nu(x: f64) -> f64 {
    let a = x * x / ((1.0 + x * x).sqrt() + 1.0);
    a - (0.5 * a).ln_1p()
}

/// `Lambda_nu(s) = -ln(1 - s^2)`.
pub fn lambda_nu(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        f64::INFINITY
    } else {
        -(-s * s).ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMgfCurve {
    pub direction: Vec<f64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub method: String,
}

/// `s -> Lambda(s u)` by quadrature.
pub fn log_mgf_curve(mu: &dyn LogMgf, u: &[f64], s: &[f64]) -> Result<LogMgfCurve> {
    let mut values = Vec::with_capacity(s.len());
    let mut v = vec![0.0; u.len()];
    for &si in s {
        for (vi, ui) in v.iter_mut().zip(u) {
            *vi = si * ui;
        }
        values.push(mu.log_mgf_at(&v)?);
    }
    Ok(LogMgfCurve {
        direction: u.to_vec(),
        s: s.to_vec(),
        values,
        std_errors: None,
        method: "quadrature".into(),
    })
}

/// `s -> Lambda(s u)` by Monte Carlo, with delta-method standard errors.
pub fn log_mgf_curve_mc(
    law: &Law,
    u: &[f64],
    s: &[f64],
    count: usize,
    seed: u64,
) -> Result<LogMgfCurve> {
    check_dim(law.dim(), u.len())?;
    let n = law.dim();
    let parts = rng::chunked(count, seed, |r, _, c| {
        let mut acc = vec![Accum::default(); s.len()];
        let mut x = vec![0.0; n];
        for _ in 0..c {
            law.sample_into(r, &mut x);
            let t: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
            for (a, &si) in acc.iter_mut().zip(s) {
                a.push((si * t).exp());
            }
        }
        acc
    });
    let mut tot = vec![Accum::default(); s.len()];
    for p in &parts {
        for (t, a) in tot.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    let mut values = Vec::new();
    let mut ses = Vec::new();
    for a in &tot {
        let e = a.estimate();
        values.push(e.mean.ln());
        ses.push(e.se / e.mean);
    }
    Ok(LogMgfCurve {
        direction: u.to_vec(),
        s: s.to_vec(),
        values,
        std_errors: Some(ses),
        method: "monte_carlo".into(),
    })
}

/// Directional Cramer transform `sup_s (s x - Lambda(s u))`.
pub fn cramer(mu: &dyn LogMgf, u: &[f64], x: f64) -> Result<f64> {
    let m = mu.mean_along(u)?;
    if x == m {
        return Ok(0.0);
    }
    let d = if x > m { 1.0 } else { -1.0 };
    let mut v = vec![0.0; u.len()];
    let mut g = |sig: f64| -> f64 {
        for (vi, ui) in v.iter_mut().zip(u) {
            *vi = d * sig * ui;
        }
        match mu.log_mgf_at(&v) {
            Ok(l) if l.is_finite() => d * sig * x - l,
            _ => f64::NEG_INFINITY,
        }
    };
    let mut b = 1.0;
    let mut gb = g(b);
    loop {
        let g2 = g(2.0 * b);
        if g2 > gb && g2.is_finite() {
            b *= 2.0;
            gb = g2;
            if b > 1e9 {
                return Ok(f64::INFINITY);
            }
        } else {
            break;
        }
    }
    let (_, neg) = golden_min(|s| -g(s), 0.0, 2.0 * b, 1e-13);
    Ok((-neg).max(0.0).max(gb))
}

/// `Lambda*_{mu}` along `u` on the nodes of `x_grid`.
pub fn lambda_star(mu: &dyn LogMgf, u: &[f64], x_grid: &Grid) -> Result<GridFunction> {
    let mut vals = Vec::with_capacity(x_grid.n);
    for i in 0..x_grid.n {
        vals.push(cramer(mu, u, x_grid.x(i))?);
    }
    // values beyond the support are +inf; keep the table well formed
    GridFunction::new(x_grid.x0, x_grid.dx, vals)
}


pub const FOUNDATION_CHECK_IDS: &[&str] = &["legendre_fast_brute", "lambda_nu_conjugate", "cramer_sandwich"];

/// A random convex grid function: cumulative slopes with integer-valued
/// increments, so that ties between hull points are common.
fn random_convex(rng: &mut Rng) -> Result<GridFunction> {
    let n = rng.gen_range(2..400);
    let dx = [0.5, 0.25, 1.0 / 64.0][rng.gen_range(0..3)];
    let x0 = -dx * rng.gen_range(0..n) as f64;
    let mut slope = rng.gen_range(-20..0) as f64;
    let mut v = rng.gen_range(-5..5) as f64;
    let mut vals = Vec::with_capacity(n);
    for _ in 0..n {
        vals.push(v);
        v += slope * dx;
        slope += rng.gen_range(0..4) as f64;
    }
    GridFunction::new(x0, dx, vals)
}

/// `O(N + M)` Legendre transform against the quadratic reference on random
/// convex inputs; the two must agree bit for bit.
pub fn legendre_fast_brute(count: usize, seed: u64) -> Result<CheckReport> {
    let mut r = rng::stream(seed, 0);
    let mut mismatches = 0u64;
    let mut max_diff: f64 = 0.0;
    for _ in 0..count {
        let f = random_convex(&mut r)?;
        let m = r.gen_range(2..600);
        let dual = Grid::new(r.gen_range(-60..0) as f64, 0.25, m)?;
        let a = crate::convex::legendre_transform(&f, &dual)?;
        let b = crate::convex::legendre_brute(&f, &dual)?;
        for (x, y) in a.values.iter().zip(&b.values) {
            if x.to_bits() != y.to_bits() {
                mismatches += 1;
                max_diff = max_diff.max((x - y).abs());
            }
        }
    }
    let rep = CheckReport::new("legendre_fast_brute", CheckMode::Exact)
        .param("inputs", count as u64)
        .param("seed", seed)
        .estimate("mismatches", mismatches as f64)
        .estimate("max_diff", max_diff);
    Ok(rep.judged(-(mismatches as f64), 0.0))
}

/// Numeric conjugate of `Lambda_nu` on `dual_n` points over `[-10, 10]`
/// against the closed form; asserted to `1e-6`.
pub fn lambda_nu_conjugate(dual_n: usize) -> Result<CheckReport> {
    // the maximizer at |x| = 10 is s ~ 0.905
    let primal = Grid::span(-0.97, 0.97, 1 << 17)?;
    let f = GridFunction::sample(&primal, lambda_nu)?;
    let dual = Grid::span(-10.0, 10.0, dual_n)?;
    let g = crate::convex::legendre_transform(&f, &dual)?;
    let mut w = Worst::new(0.0);
    let mut max_err: f64 = 0.0;
    for (j, v) in g.values.iter().enumerate() {
        let x = dual.x(j);
        let e = (v - lambda_star_nu(x)).abs();
        max_err = max_err.max(e);
        w.push(1e-6 - e, &[("x", x)]);
    }
    Ok(w
        .into_report("lambda_nu_conjugate")
        .param("dual_points", dual_n as u64)
        .param("primal_points", primal.n as u64)
        .estimate("max_abs_error", max_err))
}

/// `min(x^2, |x|)/5 <= Lambda*_nu(x) <= min(x^2, |x|)` on `points` points of `[-50, 50]`.
pub fn cramer_sandwich(points: usize) -> Result<CheckReport> {
    let mut w = Worst::new(1e-12);
    for i in 0..points {
        let x = -50.0 + 100.0 * i as f64 / (points - 1) as f64;
        let m = (x * x).min(x.abs());
        let l = lambda_star_nu(x);
        w.le(m / 5.0, l, &[("x", x)]);
        w.le(l, m, &[("x", x)]);
    }
    Ok(w.into_report("cramer_sandwich").param("points", points as u64))
}

pub fn foundation_suite_check(id: &str, seed: u64) -> Result<CheckReport> {
    match id {
        "legendre_fast_brute" => legendre_fast_brute(100, rng::derive(seed, 0x1E6)),
        "lambda_nu_conjugate" => lambda_nu_conjugate(1 << 14),
        "cramer_sandwich" => cramer_sandwich(10_000),
        _ => Err(Error::UnknownId(id.to_string())),
    }
}
