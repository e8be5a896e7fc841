//! Numerical checks of property (tau): `int e^{f [] phi} dmu * int e^{-f} dmu <= 1`,
//! together with the concentration profiles it implies.

use crate::convex::{inf_convolution, inf_convolution_convex_kernel_rows, legendre_transform, Grid, GridFunction};
use crate::error::{domain, Error, Result};
use crate::measures::{cramer, lambda_star_nu, Kind, Measure1D};
use crate::quad::bisect;
use crate::report::{CheckMode, CheckReport, Worst};
use crate::rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Maurey's cost: `x^2/36` for `|x| <= 4`, `(2/9)(|x| - 2)` beyond.
pub fn maurey_w(x: f64) -> f64 {
    let a = x.abs();
    if a <= 4.0 {
        a * a / 36.0
    } else {
        2.0 / 9.0 * (a - 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunctionSpec {
    MaureyW,
    /// `Lambda*_mu(x / beta)`
    LambdaStar { mu: Measure1D, beta: f64 },
    /// `c x^2`
    Quadratic { c: f64 },
    /// `factor * base`
    Scaled { factor: f64, base: Box<CostFunctionSpec> },
    Grid { function: GridFunction },
}

impl CostFunctionSpec {
    pub fn label(&self) -> String {
        match self {
            CostFunctionSpec::MaureyW => "maurey_w".into(),
            CostFunctionSpec::LambdaStar { beta, .. } => format!("lambda_star(/{beta})"),
            CostFunctionSpec::Quadratic { c } => format!("quadratic({c})"),
            CostFunctionSpec::Scaled { factor, base } => format!("{factor}*{}", base.label()),
            CostFunctionSpec::Grid { .. } => "grid".into(),
        }
    }

    pub fn compile(&self) -> Result<Cost> {
        let body = match self {
            CostFunctionSpec::MaureyW => CostBody::Maurey,
            CostFunctionSpec::Quadratic { c } => {
                if !(*c >= 0.0) {
                    return domain(format!("quadratic cost needs c >= 0, got {c}"));
                }
                CostBody::Quadratic(*c)
            }
            CostFunctionSpec::LambdaStar { mu, beta } => {
                if !(*beta > 0.0) {
                    return domain(format!("beta must be positive, got {beta}"));
                }
                match mu.kind {
                    Kind::NuP { p } if p == 1.0 && mu.loc == 0.0 => CostBody::LambdaStarNu(beta * mu.scale),
                    _ => CostBody::Table(lambda_star_table(mu, 90.0 / beta)?, *beta),
                }
            }
            CostFunctionSpec::Scaled { factor, base } => {
                if !(*factor >= 0.0) {
                    return domain(format!("cost factor must be >= 0, got {factor}"));
                }
                CostBody::Scaled(*factor, Box::new(base.compile()?))
            }
            CostFunctionSpec::Grid { function } => {
                if function.values.iter().any(|v| *v < 0.0) {
                    return domain("cost functions must be nonnegative");
                }
                CostBody::Grid(function.clone())
            }
        };
        Ok(Cost { body })
    }
}

fn lambda_star_table(mu: &Measure1D, reach: f64) -> Result<GridFunction> {
    let k = 4000;
    let g = Grid::span(-reach, reach, 2 * k + 1)?;
    let sym = mu.is_symmetric();
    let mut vals = vec![0.0; g.n];
    for i in 0..g.n {
        if sym && i < k {
            continue;
        }
        vals[i] = cramer(mu, &[1.0], g.x(i))?;
    }
    if sym {
        for i in 0..k {
            vals[i] = vals[2 * k - i];
        }
    }
    // cramer reports +inf beyond the support as a large finite number or inf;
    // keep infinities at the ends only
    let a = vals.iter().position(|v| v.is_finite()).unwrap_or(0);
    let b = vals.iter().rposition(|v| v.is_finite()).unwrap_or(0);
    for (i, v) in vals.iter_mut().enumerate() {
        if i < a || i > b {
            *v = f64::INFINITY;
        }
    }
    GridFunction::new(g.x0, g.dx, vals)
}

#[derive(Debug, Clone)]
enum CostBody {
    Maurey,
    Quadratic(f64),
    LambdaStarNu(f64),
    Table(GridFunction, f64),
    Scaled(f64, Box<Cost>),
    Grid(GridFunction),
}

/// A cost function ready for evaluation.
#[derive(Debug, Clone)]
pub struct Cost {
    body: CostBody,
}

impl Cost {
    pub fn eval(&self, x: f64) -> f64 {
        match &self.body {
            CostBody::Maurey => maurey_w(x),
            CostBody::Quadratic(c) => c * x * x,
            CostBody::LambdaStarNu(b) => lambda_star_nu(x / b),
            CostBody::Table(t, b) => t.eval(x / b),
            CostBody::Scaled(f, c) => {
                let v = c.eval(x);
                if *f == 0.0 && v.is_finite() {
                    0.0
                } else {
                    f * v
                }
            }
            CostBody::Grid(g) => g.eval(x),
        }
    }

    /// Half-width of the sublevel set `{phi <= t}`, assuming an even cost
    /// increasing on the half-line.
    pub fn sublevel_radius(&self, t: f64) -> f64 {
        if let CostBody::Maurey = self.body {
            return if t <= 4.0 / 9.0 { 6.0 * t.sqrt() } else { 4.5 * t + 2.0 };
        }
        let mut hi = 1.0;
        while self.eval(hi) <= t {
            hi *= 2.0;
            if hi > 1e12 {
                return f64::INFINITY;
            }
        }
        bisect(|x| if self.eval(x) <= t { -1.0 } else { 1.0 }, 0.0, hi, 1e-14)
    }
}

/// Bounded test functions with exact descriptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant { c: f64 },
    /// linear between knots, constant outside
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `clamp(a (x - center)^2, lo, hi)`
    ClippedQuadratic { a: f64, center: f64, lo: f64, hi: f64 },
    /// `t` outside `[a, b]`, zero on it
    Step { t: f64, a: f64, b: f64 },
    /// `t` on `(a, inf)`, zero elsewhere
    HalfLine { t: f64, a: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant { c } => *c,
            TestFunction::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let j = knots.partition_point(|k| k.0 <= x);
                let (a, b) = (knots[j - 1], knots[j]);
                a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
            }
            TestFunction::ClippedQuadratic { a, center, lo, hi } => (a * (x - center).powi(2)).clamp(*lo, *hi),
            TestFunction::Step { t, a, b } => {
                if x >= *a && x <= *b {
                    0.0
                } else {
                    *t
                }
            }
            TestFunction::HalfLine { t, a } => {
                if x > *a {
                    *t
                } else {
                    0.0
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant { c } => format!("constant({c})"),
            TestFunction::PiecewiseLinear { knots } => format!("pl({} knots)", knots.len()),
            TestFunction::ClippedQuadratic { a, center, .. } => format!("clipped_quadratic({a},{center})"),
            TestFunction::Step { t, a, b } => format!("step({t},[{a},{b}])"),
            TestFunction::HalfLine { t, a } => format!("half_line({t},{a})"),
        }
    }
}

/// Knots and breakpoints in the corpus sit on multiples of this step, so
/// they fall on grid nodes for every supported grid.
pub const CORPUS_STEP: f64 = 1.0 / 16.0;

fn snap(x: f64) -> f64 {
    (x / CORPUS_STEP).round() * CORPUS_STEP
}

fn random_pl(r: &mut rng::Rng) -> TestFunction {
    let k = r.gen_range(2..=8);
    let mut xs: Vec<f64> = Vec::new();
    while xs.len() < k {
        let x = snap(r.gen_range(-12.0..12.0));
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort_by(f64::total_cmp);
    let mut knots = vec![(xs[0], r.gen_range(-5.0..5.0))];
    for w in xs.windows(2) {
        let slope = r.gen_range(-3.0..3.0);
        let prev = knots.last().unwrap().1;
        knots.push((w[1], (prev + slope * (w[1] - w[0])).clamp(-5.0, 5.0)));
    }
    TestFunction::PiecewiseLinear { knots }
}

/// Deterministic corpus of `count` test functions: piecewise-linear functions
/// (at most 8 knots, slopes in `[-3, 3]`, values in `[-5, 5]`), clipped
/// quadratics, and step functions.
pub fn corpus(seed: u64, count: usize) -> Vec<TestFunction> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            match i % 10 {
                0..=5 => random_pl(&mut r),
                6 | 7 => {
                    // the clip points center +- d sit on corpus edges
                    let a: f64 = r.gen_range(-1.0..1.0);
                    let mut d = snap(r.gen_range(0.25..6.0));
                    if a.abs() * d * d > 5.0 {
                        d = ((5.0 / a.abs()).sqrt() / CORPUS_STEP).floor() * CORPUS_STEP;
                    }
                    let v = a * d * d;
                    let (lo, hi) = if a >= 0.0 {
                        (r.gen_range(-5.0..0.0), v)
                    } else {
                        (v, r.gen_range(0.0..5.0))
                    };
                    TestFunction::ClippedQuadratic {
                        a,
                        center: snap(r.gen_range(-5.0..5.0)),
                        lo,
                        hi,
                    }
                }
                8 => {
                    let a = snap(r.gen_range(-10.0..5.0));
                    let b = snap(a + r.gen_range(0.0..10.0));
                    TestFunction::Step {
                        t: r.gen_range(0.1..10.0),
                        a,
                        b,
                    }
                }
                _ => TestFunction::HalfLine {
                    t: r.gen_range(0.1..10.0),
                    a: snap(r.gen_range(-8.0..8.0)),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauClass {
    Pass,
    /// above 1, but within the quadrature error estimate
    QuadratureArtifact,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub function: String,
    pub cost: String,
    /// `int e^{f [] phi} dmu * int e^{-f} dmu`, extrapolated to zero step
    pub lhs: f64,
    /// the same product on the finest grid, without extrapolation
    pub lhs_grid: f64,
    pub int_inf_conv: f64,
    pub int_neg: f64,
    /// size of the extrapolation correction, which bounds the remaining error
    pub error: f64,
    /// `1 - lhs`
    pub margin: f64,
    pub class: TauClass,
    pub pass: bool,
}

fn classify(lhs: f64, err: f64) -> (TauClass, bool) {
    if lhs <= 1.0 {
        (TauClass::Pass, true)
    } else if lhs <= 1.0 + err {
        (TauClass::QuadratureArtifact, true)
    } else {
        (TauClass::Violation, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauConfig {
    pub dx: f64,
    /// quadrature window; derived from the measure when absent
    pub window: Option<(f64, f64)>,
}

impl Default for TauConfig {
    fn default() -> Self {
        TauConfig {
            dx: 1.0 / 1024.0,
            window: None,
        }
    }
}

/// Masses of `n` consecutive cells of width `dx` starting at `lo`; the end
/// cells absorb the tails so the masses sum to one.
fn cell_masses(mu: &Measure1D, lo: f64, dx: f64, n: usize) -> Vec<f64> {
    let edge = |i: usize| lo + i as f64 * dx;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (fl, sl) = if i == 0 { (0.0, 1.0) } else { mu.cdf_pair(edge(i)) };
        let (fh, sh) = if i + 1 == n { (1.0, 0.0) } else { mu.cdf_pair(edge(i + 1)) };
        // difference of the smaller tails
        out.push(if fh <= 0.5 { fh - fl } else { sl - sh }.max(0.0));
    }
    out
}

/// Cell-centred quadrature nodes. Corpus knots land on cell edges, so test
/// functions are smooth inside each cell. The infimum runs over the finer
/// grid of centres and edges, which contains every jump location exactly.
struct Level {
    lo: f64,
    dx: f64,
    n: usize,
    masses: Vec<f64>,
    phi: GridFunction,
    convex: bool,
}

impl Level {
    fn build(mu: &Measure1D, cost: &Cost, lo: f64, hi: f64, dx: f64) -> Result<Level> {
        let n = ((hi - lo) / dx).round() as usize;
        let masses = cell_masses(mu, lo, dx, n);
        // half-step grid has 2n + 1 points
        let m = 2 * n;
        let h = 0.5 * dx;
        let vals: Vec<f64> = (0..2 * m + 1).map(|k| cost.eval((k as f64 - m as f64) * h)).collect();
        if vals.iter().any(|v| v.is_nan() || *v < 0.0) {
            return domain("cost must be nonnegative on the window");
        }
        let phi = GridFunction::new(-(m as f64) * h, h, vals)?;
        let convex = phi.is_convex(1e-12);
        Ok(Level {
            lo,
            dx,
            n,
            masses,
            phi,
            convex,
        })
    }

    fn product(&self, f: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
        let h = 0.5 * self.dx;
        let m = 2 * self.n;
        let vals: Vec<f64> = (0..=m).map(|i| f(self.lo + i as f64 * h)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return domain("test function is unbounded on the quadrature window");
        }
        let fg = GridFunction::new(self.lo, h, vals)?;
        // output index of half-grid point i is i + m; centres are odd i
        let conv: Vec<f64> = if self.convex {
            inf_convolution_convex_kernel_rows(&fg, &self.phi, m + 1, 2, self.n)?
        } else {
            let full = inf_convolution(&fg, &self.phi)?;
            (0..self.n).map(|c| full.values[m + 2 * c + 1]).collect()
        };
        let mut a = 0.0;
        let mut b = 0.0;
        for c in 0..self.n {
            a += self.masses[c] * conv[c].exp();
            b += self.masses[c] * (-fg.values[2 * c + 1]).exp();
        }
        Ok((a, b))
    }
}

/// Precomputed grids for repeated (tau) checks of one pair `(mu, phi)`.
pub struct TauContext {
    cost_label: String,
    // steps dx, 2 dx, 4 dx
    levels: [Level; 3],
}

fn default_window(mu: &Measure1D) -> (f64, f64) {
    let (a, b) = mu.support();
    (a.max(-45.0), b.min(45.0))
}

impl TauContext {
    pub fn new(mu: &Measure1D, phi: &CostFunctionSpec, cfg: &TauConfig) -> Result<Self> {
        if !(cfg.dx > 0.0) {
            return domain("grid step must be positive");
        }
        let cost = phi.compile()?;
        if cost.eval(0.0) != 0.0 {
            return domain("cost must vanish at the origin");
        }
        let (a, b) = cfg.window.unwrap_or_else(|| default_window(mu));
        if !(b > a) {
            return domain(format!("empty quadrature window [{a}, {b}]"));
        }
        // align the window with the coarsest grid
        let h = 4.0 * cfg.dx;
        let lo = (a / h).floor() * h;
        let hi = (b / h).ceil() * h;
        Ok(TauContext {
            cost_label: phi.label(),
            levels: [
                Level::build(mu, &cost, lo, hi, cfg.dx)?,
                Level::build(mu, &cost, lo, hi, 2.0 * cfg.dx)?,
                Level::build(mu, &cost, lo, hi, h)?,
            ],
        })
    }

    pub fn check_fn(&self, label: &str, f: &dyn Fn(f64) -> f64) -> Result<TauReport> {
        let (a1, b1) = self.levels[0].product(f)?;
        let (a2, b2) = self.levels[1].product(f)?;
        let (a4, b4) = self.levels[2].product(f)?;
        // second-order rule: u + (u - u_coarse) / 3
        let rich = |fine: f64, coarse: f64| fine + (fine - coarse) / 3.0;
        let (a, b) = (rich(a1, a2), rich(b1, b2));
        let lhs = a * b;
        let raw = a1 * b1;
        // the extrapolants from (dx, 2dx) and (2dx, 4dx) should agree far
        // more closely than the correction itself
        let spread = (lhs - rich(a2, a4) * rich(b2, b4)).abs();
        let err = (lhs - raw).abs().max(spread);
        let (class, pass) = classify(lhs, err);
        Ok(TauReport {
            function: label.to_string(),
            cost: self.cost_label.clone(),
            lhs,
            lhs_grid: raw,
            int_inf_conv: a,
            int_neg: b,
            error: err,
            margin: 1.0 - lhs,
            class,
            pass,
        })
    }

    pub fn check(&self, f: &TestFunction) -> Result<TauReport> {
        self.check_fn(&f.label(), &|x| f.eval(x))
    }
}

/// One (tau) check for a 1-D pair. `f` must be finite on the window.
pub fn tau_check_1d(mu: &Measure1D, phi: &CostFunctionSpec, f: &GridFunction, cfg: &TauConfig) -> Result<TauReport> {
    let mut cfg = *cfg;
    if cfg.window.is_none() {
        cfg.window = Some(default_window(mu));
    }
    let ctx = TauContext::new(mu, phi, &cfg)?;
    ctx.check_fn("grid", &|x| f.eval(x))
}

/// Non-separable functions of two variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction2D {
    /// `clamp(max_k (a_k x + b_k y + c_k), -5, 5)`
    MaxAffine { pieces: Vec<(f64, f64, f64)> },
    /// `clamp(a x y, lo, hi)`
    Bilinear { a: f64, lo: f64, hi: f64 },
    /// `t` outside the disc of the given center and radius
    DiscStep { t: f64, center: (f64, f64), radius: f64 },
}

impl TestFunction2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            TestFunction2D::MaxAffine { pieces } => pieces
                .iter()
                .map(|(a, b, c)| a * x + b * y + c)
                .fold(f64::NEG_INFINITY, f64::max)
                .clamp(-5.0, 5.0),
            TestFunction2D::Bilinear { a, lo, hi } => (a * x * y).clamp(*lo, *hi),
            TestFunction2D::DiscStep { t, center, radius } => {
                if (x - center.0).hypot(y - center.1) <= *radius {
                    0.0
                } else {
                    *t
                }
            }
        }
    }
}

pub fn corpus_2d(seed: u64, count: usize) -> Vec<TestFunction2D> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            match i % 3 {
                0 => TestFunction2D::MaxAffine {
                    pieces: (0..r.gen_range(2..5))
                        .map(|_| (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(-3.0..3.0)))
                        .collect(),
                },
                1 => TestFunction2D::Bilinear {
                    a: r.gen_range(-1.0..1.0),
                    lo: r.gen_range(-5.0..0.0),
                    hi: r.gen_range(0.0..5.0),
                },
                _ => TestFunction2D::DiscStep {
                    t: r.gen_range(0.5..6.0),
                    center: (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)),
                    radius: r.gen_range(0.5..5.0),
                },
            }
        })
        .collect()
}

/// Cell-centred square grid for 2-D checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub half_width: f64,
    pub nodes: usize,
}

impl Default for Grid2D {
    fn default() -> Self {
        Grid2D {
            half_width: 16.0,
            nodes: 128,
        }
    }
}

impl Grid2D {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nodes as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx()
    }
}

/// `min_{j,l} f(j, l) + phi1(x_i - x_j) + phi2(x_k - x_l)` over all grid
/// nodes, by direct enumeration. `f` is row-major.
pub fn inf_convolution_2d_brute(f: &[f64], n: usize, phi1: &[f64], phi2: &[f64]) -> Vec<f64> {
    // phi tables are indexed by offset + n - 1
    let mut out = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for k in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                let c1 = phi1[i + n - 1 - j];
                if !c1.is_finite() {
                    continue;
                }
                let row = &f[j * n..(j + 1) * n];
                for (l, fv) in row.iter().enumerate() {
                    let v = fv + c1 + phi2[k + n - 1 - l];
                    if v < best {
                        best = v;
                    }
                }
            }
            out[i * n + k] = best;
        }
    }
    out
}

fn cost_table(c: &Cost, g: &Grid2D) -> Vec<f64> {
    let n = g.nodes as i64;
    (-(n - 1)..n).map(|d| c.eval(d as f64 * g.dx())).collect()
}

fn masses_2d(mu: &Measure1D, g: &Grid2D) -> Vec<f64> {
    cell_masses(mu, -g.half_width, g.dx(), g.nodes)
}

/// Brute-force (tau) check for a product of two 1-D pairs and a
/// non-separable `f`.
pub fn tau_check_2d(
    components: &[(Measure1D, CostFunctionSpec); 2],
    f: &TestFunction2D,
    grid: &Grid2D,
) -> Result<TauReport> {
    let n = grid.nodes;
    let c1 = components[0].1.compile()?;
    let c2 = components[1].1.compile()?;
    let p1 = cost_table(&c1, grid);
    let p2 = cost_table(&c2, grid);
    let m1 = masses_2d(&components[0].0, grid);
    let m2 = masses_2d(&components[1].0, grid);
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            vals[i * n + k] = f.eval(grid.x(i), grid.x(k));
        }
    }
    let conv = inf_convolution_2d_brute(&vals, n, &p1, &p2);
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..n {
        for k in 0..n {
            let w = m1[i] * m2[k];
            a += w * conv[i * n + k].exp();
            b += w * (-vals[i * n + k]).exp();
        }
    }
    let lhs = a * b;
    let (class, pass) = classify(lhs, 0.0);
    Ok(TauReport {
        function: format!("{f:?}"),
        cost: format!("{}+{}", components[0].1.label(), components[1].1.label()),
        lhs,
        lhs_grid: lhs,
        int_inf_conv: a,
        int_neg: b,
        error: 0.0,
        margin: 1.0 - lhs,
        class,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductFunction {
    /// `sum_i f_i(x_i)`
    Separable { parts: Vec<TestFunction> },
    /// only for two components
    Joint { f: TestFunction2D, grid: Grid2D },
}

/// Product of 1-D checks for `f = sum_i f_i(x_i)`, since the inf-convolution
/// with a sum cost splits coordinatewise.
pub fn tau_check_separable(ctxs: &[&TauContext], parts: &[TestFunction]) -> Result<TauReport> {
    if parts.len() != ctxs.len() {
        return domain(format!("{} parts for {} components", parts.len(), ctxs.len()));
    }
    let mut lhs = 1.0;
    let mut upper = 1.0;
    let mut raw = 1.0;
    let mut a = 1.0;
    let mut b = 1.0;
    for (ctx, part) in ctxs.iter().zip(parts) {
        let r = ctx.check(part)?;
        lhs *= r.lhs;
        upper *= r.lhs + r.error;
        raw *= r.lhs_grid;
        a *= r.int_inf_conv;
        b *= r.int_neg;
    }
    let err = upper - lhs;
    let (class, pass) = classify(lhs, err);
    Ok(TauReport {
        function: parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(" + "),
        cost: "sum".into(),
        lhs,
        lhs_grid: raw,
        int_inf_conv: a,
        int_neg: b,
        error: err,
        margin: 1.0 - lhs,
        class,
        pass,
    })
}

/// (tau) for a product pair with cost `sum_i phi_i(x_i)`. Separable `f`
/// factorizes into 1-D checks; joint `f` is brute-forced in two dimensions.
pub fn tau_check_product(
    components: &[(Measure1D, CostFunctionSpec)],
    f: &ProductFunction,
    cfg: &TauConfig,
) -> Result<TauReport> {
    match f {
        ProductFunction::Separable { parts } => {
            if parts.len() != components.len() {
                return domain(format!("{} parts for {} components", parts.len(), components.len()));
            }
            let ctxs = components
                .iter()
                .map(|(mu, phi)| TauContext::new(mu, phi, cfg))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&TauContext> = ctxs.iter().collect();
            tau_check_separable(&refs, parts)
        }
        ProductFunction::Joint { f, grid } => {
            if components.len() != 2 {
                return Err(Error::Unsupported(format!(
                    "non-separable test functions need dimension 2, got {}",
                    components.len()
                )));
            }
            if grid.nodes > 256 {
                return domain("2-D grids are limited to 256 nodes per axis");
            }
            tau_check_2d(&[components[0].clone(), components[1].clone()], f, grid)
        }
    }
}

/// Serializes reports as JSON lines.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).map_err(|e| Error::Format(e.to_string()))?);
        s.push('\n');
    }
    Ok(s)
}

pub fn from_json_lines<T: for<'de> Deserialize<'de>>(s: &str) -> Result<Vec<T>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Format(e.to_string())))
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("profile needs p in (0, 1), got {p}"));
    }
    Ok(())
}

/// Distribution function of the symmetric exponential law.
pub fn nu_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

pub fn nu_quantile(p: f64) -> f64 {
    if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    }
}

/// `f_t(p) = e^t p / ((e^t - 1) p + 1)`
pub fn f_t(t: f64, p: f64) -> f64 {
    let e = t.exp_m1();
    (e + 1.0) * p / (e * p + 1.0)
}

/// `g_t(p) = F(F^{-1}(p) + t)` where `F` is the distribution function of nu.
pub fn g_t(t: f64, p: f64) -> f64 {
    nu_cdf(nu_quantile(p) + t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub f: f64,
    pub g: f64,
}

pub fn profile(t: f64, p: f64) -> Result<Profile> {
    check_p(p)?;
    if !(t >= 0.0) {
        return domain(format!("profile needs t >= 0, got {t}"));
    }
    Ok(Profile { f: f_t(t, p), g: g_t(t, p) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpliedConcentration {
    /// `e^t m / ((e^t - 1) m + 1)`
    pub conc: f64,
    /// `min(e^{t/2} m, 1/2)`
    pub conc_small: f64,
    /// `1 - e^{-t/2} (1 - m)`, only for `m >= 1/2`
    pub conc_large: Option<f64>,
    /// `nu(-inf, x + t/2]` with `nu(-inf, x] = m`
    pub conc_all: f64,
    /// half-width of `{phi <= t}`
    pub radius: f64,
}

/// Lower bounds on `mu(A + B_phi(t))` given `mu(A) = mu_a`.
pub fn tau_implied_concentration(mu_a: f64, phi: &CostFunctionSpec, t: f64) -> Result<ImpliedConcentration> {
    if !(mu_a > 0.0 && mu_a <= 1.0) {
        return domain(format!("mu(A) must lie in (0, 1], got {mu_a}"));
    }
    if !(t >= 0.0) {
        return domain(format!("t must be >= 0, got {t}"));
    }
    let cost = phi.compile()?;
    let conc = if mu_a == 1.0 { 1.0 } else { f_t(t, mu_a) };
    Ok(ImpliedConcentration {
        conc,
        conc_small: ((t / 2.0).exp() * mu_a).min(0.5),
        conc_large: if mu_a >= 0.5 {
            Some(1.0 - (-t / 2.0).exp() * (1.0 - mu_a))
        } else {
            None
        },
        conc_all: if mu_a == 1.0 { 1.0 } else { g_t(t / 2.0, mu_a) },
        radius: cost.sublevel_radius(t),
    })
}

pub const TAU_CHECK_IDS: &[&str] = &[
    "tau_maurey",
    "tau_ic9",
    "tau_constant",
    "tau_separable",
    "tau_joint_2d",
    "tau_monotone",
    "maurey_continuity",
    "linear_tau_chain",
    "profile_semigroup",
    "profile_domination",
    "implied_concentration",
    "icconc_half_line",
];

/// Size knobs for the registered checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSizes {
    pub corpus: usize,
    pub separable: usize,
    pub joint: usize,
    pub dx: f64,
}

impl Default for TauSizes {
    fn default() -> Self {
        TauSizes {
            corpus: 200,
            separable: 50,
            joint: 20,
            dx: 1.0 / 1024.0,
        }
    }
}

pub fn ic9_cost() -> CostFunctionSpec {
    CostFunctionSpec::LambdaStar {
        mu: Measure1D::nu(),
        beta: 9.0,
    }
}

fn corpus_report(id: &str, ctx: &TauContext, fs: &[TestFunction], seed: u64, tol: f64) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut max_err: f64 = 0.0;
    let mut artifacts = 0;
    let mut violations = 0;
    let mut worst_fn = String::new();
    for f in fs {
        let r = ctx.check(f)?;
        max_err = max_err.max(r.error);
        match r.class {
            TauClass::QuadratureArtifact => artifacts += 1,
            TauClass::Violation => violations += 1,
            TauClass::Pass => {}
        }
        if r.lhs > worst {
            worst = r.lhs;
            worst_fn = r.function;
        }
    }
    let mut rep = CheckReport::new(id, CheckMode::Exact)
        .param("functions", fs.len() as u64)
        .param("corpus_seed", seed)
        .param("tolerance", tol)
        .estimate("max_lhs", worst)
        .estimate("max_error", max_err)
        .estimate("artifacts", artifacts as f64)
        .estimate("violations", violations as f64)
        .note(format!("worst function {worst_fn}"));
    rep.margin = 1.0 + tol - worst;
    rep.pass = rep.margin >= 0.0;
    Ok(rep)
}

/// Runs one registered (tau) or profile check.
pub fn tau_suite_check(id: &str, seed: u64, sizes: &TauSizes) -> Result<CheckReport> {
    let nu = Measure1D::nu();
    let cfg = TauConfig {
        dx: sizes.dx,
        window: Some((-45.0, 45.0)),
    };
    match id {
        "tau_maurey" => {
            let ctx = TauContext::new(&nu, &CostFunctionSpec::MaureyW, &cfg)?;
            corpus_report(id, &ctx, &corpus(seed, sizes.corpus), seed, 1e-6)
        }
        "tau_ic9" => {
            let ctx = TauContext::new(&nu, &ic9_cost(), &cfg)?;
            corpus_report(id, &ctx, &corpus(seed, sizes.corpus), seed, 1e-6)
        }
        "tau_constant" => {
            let mut w = Worst::new(0.0);
            for phi in [CostFunctionSpec::MaureyW, ic9_cost()] {
                let ctx = TauContext::new(&nu, &phi, &cfg)?;
                for &c in &[-5.0, -1.0, 0.0, 0.5, 3.0, 5.0] {
                    let r = ctx.check(&TestFunction::Constant { c })?;
                    w.push(1e-10 - (r.lhs - 1.0).abs(), &[("c", c)]);
                }
            }
            Ok(w.into_report(id))
        }
        "tau_separable" => {
            let ctx = TauContext::new(&nu, &CostFunctionSpec::MaureyW, &cfg)?;
            let fs = corpus(rng::derive(seed, 1), 2 * sizes.separable);
            let mut worst = f64::NEG_INFINITY;
            for k in 0..sizes.separable {
                let parts = [fs[2 * k].clone(), fs[2 * k + 1].clone()];
                let r = tau_check_separable(&[&ctx, &ctx], &parts)?;
                worst = worst.max(r.lhs);
            }
            let mut rep = CheckReport::new(id, CheckMode::Exact)
                .param("functions", sizes.separable as u64)
                .estimate("max_lhs", worst);
            rep.margin = 1.0 + 1e-8 - worst;
            rep.pass = rep.margin >= 0.0;
            Ok(rep)
        }
        "tau_joint_2d" => {
            let comps = [(nu.clone(), CostFunctionSpec::MaureyW), (nu.clone(), CostFunctionSpec::MaureyW)];
            let mut worst = f64::NEG_INFINITY;
            let fs = corpus_2d(rng::derive(seed, 2), sizes.joint);
            for f in &fs {
                let r = tau_check_2d(&comps, f, &Grid2D::default())?;
                worst = worst.max(r.lhs);
            }
            let mut rep = CheckReport::new(id, CheckMode::Exact)
                .param("functions", fs.len() as u64)
                .param("grid_nodes", Grid2D::default().nodes as u64)
                .estimate("max_lhs", worst);
            rep.margin = 1.0 + 1e-4 - worst;
            rep.pass = rep.margin >= 0.0;
            Ok(rep)
        }
        "tau_monotone" => {
            // phi <= psi pointwise implies lhs(phi) <= lhs(psi)
            let small = CostFunctionSpec::Scaled {
                factor: 0.5,
                base: Box::new(CostFunctionSpec::MaureyW),
            };
            let a = TauContext::new(&nu, &small, &cfg)?;
            let b = TauContext::new(&nu, &CostFunctionSpec::MaureyW, &cfg)?;
            let mut w = Worst::new(1e-12);
            for (i, f) in corpus(rng::derive(seed, 3), 20).iter().enumerate() {
                w.le(a.check(f)?.lhs, b.check(f)?.lhs, &[("function", i as f64)]);
            }
            Ok(w.into_report(id))
        }
        "maurey_continuity" => {
            let inner = 4.0f64 * 4.0 / 36.0;
            let outer = 2.0 / 9.0 * (4.0 - 2.0);
            let mut rep = CheckReport::new(id, CheckMode::Exact)
                .estimate("quadratic_branch", inner)
                .estimate("linear_branch", outer);
            rep.margin = -(inner - outer).abs();
            rep.pass = inner == outer && maurey_w(4.0) == 4.0 / 9.0;
            Ok(rep)
        }
        "linear_tau_chain" => linear_tau_chain(),
        "profile_semigroup" => {
            let mut w = Worst::new(0.0);
            let ts = log_lattice(0.01, 20.0, 10);
            let ps = p_lattice();
            for &t in &ts {
                for &s in &ts {
                    for &p in &ps {
                        let at = [("t", t), ("s", s), ("p", p)];
                        w.push(1e-12 - (f_t(t + s, p) - f_t(t, f_t(s, p))).abs(), &at);
                        w.push(1e-12 - (g_t(t + s, p) - g_t(t, g_t(s, p))).abs(), &at);
                    }
                }
            }
            Ok(w.into_report(id))
        }
        "profile_domination" => {
            let mut w = Worst::new(1e-14);
            for &t in &log_lattice(0.01, 40.0, 40) {
                for &p in &p_lattice() {
                    w.le(g_t(t / 2.0, p), f_t(t, p), &[("t", t), ("p", p)]);
                }
            }
            Ok(w.into_report(id))
        }
        "implied_concentration" => {
            let mut w = Worst::new(1e-14);
            for &t in &log_lattice(0.01, 40.0, 30) {
                for &m in &p_lattice() {
                    let c = tau_implied_concentration(m, &CostFunctionSpec::MaureyW, t)?;
                    let at = [("t", t), ("mu_a", m)];
                    w.le(c.conc_small, c.conc, &at);
                    w.le(c.conc_all, c.conc, &at);
                    if let Some(l) = c.conc_large {
                        w.le(l, c.conc, &at);
                    }
                }
            }
            Ok(w.into_report(id))
        }
        "icconc_half_line" => {
            // nu((-inf, a] + B_w(t)) = F(a + r(t)) against the profile bound
            let cost = CostFunctionSpec::MaureyW.compile()?;
            let mut w = Worst::new(1e-12);
            for &t in &log_lattice(0.01, 30.0, 30) {
                let r = cost.sublevel_radius(t);
                for k in 0..41 {
                    let a = -10.0 + 0.5 * k as f64;
                    let m = nu_cdf(a);
                    w.le(f_t(t, m), nu_cdf(a + r), &[("t", t), ("a", a)]);
                }
            }
            Ok(w.into_report(id))
        }
        _ => Err(Error::UnknownId(format!("tau check '{id}'"))),
    }
}

fn log_lattice(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| (a.ln() + (b / a).ln() * i as f64 / (k - 1) as f64).exp())
        .collect()
}

fn p_lattice() -> Vec<f64> {
    vec![1e-6, 0.01, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 0.999]
}

/// For linear `f(x) = v x` the (tau) product is `exp(2 Lambda(v) - L phi(v))`
/// for symmetric `mu`, so (tau) forces `phi <= 2 Lambda*(./2) <= Lambda*`.
/// Checks both the product and the chain on grids.
fn linear_tau_chain() -> Result<CheckReport> {
    let mut w = Worst::new(1e-9);
    let y = Grid::span(-200.0, 200.0, 80_001)?;
    let nu = Measure1D::nu();
    for (name, phi) in [("w", CostFunctionSpec::MaureyW), ("ic9", ic9_cost())] {
        let c = phi.compile()?;
        let g = GridFunction::sample(&y, |x| c.eval(x))?;
        let vs = Grid::span(-0.95, 0.95, 191)?;
        let conj = legendre_transform(&g, &vs)?;
        for j in 0..vs.n {
            let v = vs.x(j);
            let tag = if name == "w" { 0.0 } else { 1.0 };
            // truncated conjugate underestimates L phi, so this side is safe
            let lhs = 2.0 * nu.log_mgf(v)? - conj.values[j];
            w.le(lhs, 0.0, &[("cost", tag), ("v", v)]);
        }
        for k in 0..401 {
            let x = -50.0 + 0.25 * k as f64;
            let tag = if name == "w" { 0.0 } else { 1.0 };
            w.le(c.eval(x), 2.0 * lambda_star_nu(x / 2.0), &[("cost", tag), ("x", x)]);
        }
    }
    for &p in &[1.0, 1.5, 2.0, 3.0] {
        let m = Measure1D::nu_p(p)?;
        for k in 0..41 {
            let x = -6.0 + 0.3 * k as f64;
            let full = cramer(&m, &[1.0], x)?;
            let half = 2.0 * cramer(&m, &[1.0], x / 2.0)?;
            w.le(half, full, &[("p", p), ("x", x)]);
        }
    }
    Ok(w.into_report("linear_tau_chain"))
}
