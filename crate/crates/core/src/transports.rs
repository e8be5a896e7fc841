//! Transport maps between product laws and the uniform law on `l_p` balls:
//! the radial map `T_{p,n}` (from `nu_p^n` onto `mu_{p,n}`), the coordinatewise
//! maps `W_{q,p}` (from `nu_q^n` onto `nu_p^n`) and their composites.

use crate::error::{domain, Error, Result};
use crate::measures::{sample_nu_p_std, LpBall, Measure1D};
use crate::report::{CheckMode, CheckReport, Worst};
use crate::rng::{self, Rng};
use crate::special::{
    ball_constants, inv_reg_lower_gamma_ln, inv_reg_upper_gamma_ln, ln_gamma, ln_reg_gamma_pair,
    ln_reg_upper_gamma_scaled, temp_gamma_check,
};
use crate::stats::{ks_test, KsResult};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

fn check_pn(p: f64, n: usize) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("transport needs 1 <= p < inf, got {p}"));
    }
    if n == 0 {
        return domain("transport needs n >= 1");
    }
    Ok(())
}

fn ln_two_gamma_p(p: f64) -> f64 {
    std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / p)
}

/// `ln f_{p,n}(s)`, where `f^n = (n/p) gamma(n/p, s^p) / (2 Gamma(1+1/p))^n`.
pub fn ln_f_pn(p: f64, n: usize, s: f64) -> Result<f64> {
    check_pn(p, n)?;
    if !(s >= 0.0) {
        return domain(format!("f_pn needs s >= 0, got {s}"));
    }
    if s == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    let (lp, _) = ln_reg_gamma_pair(nf / p, s.powf(p))?;
    Ok((ln_gamma(1.0 + nf / p) + lp) / nf - ln_two_gamma_p(p))
}

/// The radial profile of `T_{p,n}`.
pub fn f_pn(p: f64, n: usize, s: f64) -> Result<f64> {
    Ok(ln_f_pn(p, n, s)?.exp())
}

/// `f_{p,n}(s) / s`, continuous at zero.
pub fn f_pn_ratio(p: f64, n: usize, s: f64) -> Result<f64> {
    if s == 0.0 {
        check_pn(p, n)?;
        return Ok((-ln_two_gamma_p(p)).exp());
    }
    Ok((ln_f_pn(p, n, s)? - s.ln()).exp())
}

/// `f'_{p,n}(s)` from `e^{-s^p} s^{n-1} = (2 Gamma(1+1/p))^n f^{n-1} f'`.
pub fn f_pn_deriv(p: f64, n: usize, s: f64) -> Result<f64> {
    if s == 0.0 {
        check_pn(p, n)?;
        return Ok((-ln_two_gamma_p(p)).exp());
    }
    let nf = n as f64;
    let lf = ln_f_pn(p, n, s)?;
    Ok((-s.powf(p) + (nf - 1.0) * (s.ln() - lf) - nf * ln_two_gamma_p(p)).exp())
}

fn norm_p(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p.is_infinite() {
        x.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `l_p` norm, with `p = inf` allowed.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    norm_p(x, p)
}

/// `T_{p,n}(x) = x f_{p,n}(||x||_p) / ||x||_p`.
pub fn t_pn(p: f64, x: &[f64]) -> Result<Vec<f64>> {
    let s = norm_p(x, p);
    let k = f_pn_ratio(p, x.len(), s)?;
    Ok(x.iter().map(|v| v * k).collect())
}

/// The increasing map `w_{p,q}` pushing `nu_p` onto `nu_q`.
pub fn w_pq(p: f64, q: f64, x: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0) || !p.is_finite() || !q.is_finite() {
        return domain(format!("w_pq needs p, q >= 1, got {p}, {q}"));
    }
    if p == q || x == 0.0 {
        return Ok(x);
    }
    let y = x.abs();
    let (lp, lq) = ln_reg_gamma_pair(1.0 / p, y.powf(p))?;
    let z = if q == 1.0 {
        if lp < -std::f64::consts::LN_2 {
            -(-lp.exp()).ln_1p()
        } else {
            -lq
        }
    } else if lp < -std::f64::consts::LN_2 {
        inv_reg_lower_gamma_ln(1.0 / q, lp)?
    } else {
        inv_reg_upper_gamma_ln(1.0 / q, lq)?
    };
    Ok(x.signum() * z.powf(1.0 / q))
}

/// `w'_{p,q}(x) = (Gamma(1+1/q) / Gamma(1+1/p)) exp(-|x|^p + |w(x)|^q)`.
pub fn w_pq_deriv(p: f64, q: f64, x: f64) -> Result<f64> {
    if p == q {
        return Ok(1.0);
    }
    let w = w_pq(p, q, x)?;
    let (xp, wq) = (x.abs().powf(p), w.abs().powf(q));
    // in the far tail -x^p + w^q cancels badly; use the scaled tails instead,
    // whose logs agree after subtracting x^p and w^q respectively
    let expo = if xp >= 1.0 / p + 1.0 && wq >= 1.0 / q + 1.0 {
        ln_reg_upper_gamma_scaled(1.0 / q, wq)? - ln_reg_upper_gamma_scaled(1.0 / p, xp)?
    } else {
        wq - xp
    };
    Ok((ln_gamma(1.0 + 1.0 / q) - ln_gamma(1.0 + 1.0 / p) + expo).exp())
}

/// `v_p = w_{p,1}`.
pub fn v_p(p: f64, x: f64) -> Result<f64> {
    w_pq(p, 1.0, x)
}

pub fn v_p_deriv(p: f64, x: f64) -> Result<f64> {
    w_pq_deriv(p, 1.0, x)
}

/// `s^{-p} (f(s)/s - f'(s))`. For `s^p < 1` this is summed as a series,
/// since the difference itself is below rounding for small `s`.
pub fn f_pn_scaled_gap(p: f64, n: usize, s: f64) -> Result<f64> {
    check_pn(p, n)?;
    let sp = s.powf(p);
    if sp >= 1.0 {
        return Ok((f_pn_ratio(p, n, s)? - f_pn_deriv(p, n, s)?) / sp);
    }
    // with f(s) = c s M^{1/n}, f' = c e^{-s^p} M^{-(n-1)/n}:
    // f/s - f' = c M^{-(n-1)/n} (M - e^{-s^p})
    let nf = n as f64;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        if k > 1 {
            term *= -sp / kf;
        }
        let add = term * p * kf / (nf + p * kf);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let c = (-ln_two_gamma_p(p)).exp();
    let m_root = f_pn_ratio(p, n, s)? / c;
    Ok(c * m_root.powf(1.0 - nf) * sum)
}

/// `alpha(s) = s^{-p-1} (s f'(s) - f(s))`.
pub fn s_alpha(p: f64, n: usize, s: f64) -> Result<f64> {
    Ok(-f_pn_scaled_gap(p, n, s)?)
}

/// `beta(t) = |w_{1,p}(t)|^{p-1} sgn(w_{1,p}(t)) w'_{1,p}(t)`.
pub fn s_beta(p: f64, t: f64) -> Result<f64> {
    let w = w_pq(1.0, p, t)?;
    Ok(w.abs().powf(p - 1.0) * w.signum() * w_pq_deriv(1.0, p, t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum TransportSpec {
    /// `T_{p,n}`: `nu_p^n -> mu_{p,n}`
    T { p: f64, n: usize },
    /// `W_{q,p}^n`: `nu_q^n -> nu_p^n`
    W { q: f64, p: f64, n: usize },
    /// `T_{p,n} o W_{1,p}^n`: `nu^n -> mu_{p,n}`, `p >= 2`
    S { p: f64, n: usize },
    /// `T_{p,n} o W_{2,p}^n`: `nu_2^n -> mu_{p,n}`, `p >= 2`
    STilde { p: f64, n: usize },
}

impl TransportSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TransportSpec::T { p, n } => check_pn(p, n),
            TransportSpec::W { q, p, n } => {
                check_pn(p, n)?;
                check_pn(q, n)
            }
            TransportSpec::S { p, n } | TransportSpec::STilde { p, n } => {
                check_pn(p, n)?;
                if p < 2.0 {
                    return domain(format!("composite transports need p >= 2, got {p}"));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            TransportSpec::T { n, .. }
            | TransportSpec::W { n, .. }
            | TransportSpec::S { n, .. }
            | TransportSpec::STilde { n, .. } => n,
        }
    }

    /// Exponent of the source law `nu_q^n`.
    pub fn source_exponent(&self) -> f64 {
        match *self {
            TransportSpec::T { p, .. } => p,
            TransportSpec::W { q, .. } => q,
            TransportSpec::S { .. } => 1.0,
            TransportSpec::STilde { .. } => 2.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            TransportSpec::T { p, n } => format!("T(p={p},n={n})"),
            TransportSpec::W { q, p, n } => format!("W(q={q},p={p},n={n})"),
            TransportSpec::S { p, n } => format!("S(p={p},n={n})"),
            TransportSpec::STilde { p, n } => format!("S~(p={p},n={n})"),
        }
    }
}

pub fn apply_transport(spec: &TransportSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    if x.len() != spec.dim() {
        return domain(format!(
            "transport expects dimension {}, got {}",
            spec.dim(),
            x.len()
        ));
    }
    match *spec {
        TransportSpec::T { p, .. } => t_pn(p, x),
        TransportSpec::W { q, p, .. } => x.iter().map(|&v| w_pq(q, p, v)).collect(),
        TransportSpec::S { p, .. } => {
            let w: Vec<f64> = x.iter().map(|&v| w_pq(1.0, p, v)).collect::<Result<_>>()?;
            t_pn(p, &w)
        }
        TransportSpec::STilde { p, .. } => {
            let w: Vec<f64> = x.iter().map(|&v| w_pq(2.0, p, v)).collect::<Result<_>>()?;
            t_pn(p, &w)
        }
    }
}

fn sample_source(q: f64, rng: &mut Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = sample_nu_p_std(q, rng);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub spec: TransportSpec,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub tests: Vec<(String, KsResult)>,
    pub pass: bool,
}

/// Kolmogorov-Smirnov checks that `spec` pushes its source law onto its
/// target. The family-wise level `alpha` is split evenly over the individual
/// tests (radial and marginal laws, or one test per coordinate).
pub fn pushforward_test(
    spec: &TransportSpec,
    samples: usize,
    seed: u64,
    alpha: f64,
) -> Result<PushforwardReport> {
    spec.validate()?;
    let n = spec.dim();
    let q = spec.source_exponent();
    let parts = rng::chunked(samples, seed, |r, _, c| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(c * n);
        let mut x = vec![0.0; n];
        for _ in 0..c {
            sample_source(q, r, &mut x);
            out.extend(apply_transport(spec, &x)?);
        }
        Ok(out)
    });
    let mut ys = Vec::with_capacity(samples * n);
    for p in parts {
        ys.extend(p?);
    }
    let mut tests = Vec::new();
    match *spec {
        TransportSpec::W { p, .. } => {
            let target = Measure1D::nu_p(p)?;
            let a = alpha / n as f64;
            for j in 0..n {
                let mut col: Vec<f64> = ys.iter().skip(j).step_by(n).cloned().collect();
                tests.push((
                    format!("coordinate_{j}"),
                    ks_test(&mut col, |x| target.cdf(x), a),
                ));
            }
        }
        TransportSpec::T { p, .. }
        | TransportSpec::S { p, .. }
        | TransportSpec::STilde { p, .. } => {
            let ball = LpBall::new(p, n)?;
            let marg = ball.marginal();
            let mut radial: Vec<f64> = ys.chunks(n).map(|y| norm_p(y, p)).collect();
            let mut first: Vec<f64> = ys.chunks(n).map(|y| y[0]).collect();
            tests.push((
                "radial".into(),
                ks_test(&mut radial, |s| ball.radial_cdf(s), alpha / 2.0),
            ));
            tests.push((
                "marginal".into(),
                ks_test(&mut first, |x| marg.cdf(x), alpha / 2.0),
            ));
        }
    }
    let pass = tests.iter().all(|t| t.1.pass);
    Ok(PushforwardReport {
        spec: *spec,
        samples,
        seed,
        alpha,
        tests,
        pass,
    })
}

impl PushforwardReport {
    pub fn to_check(&self) -> CheckReport {
        let mut r = CheckReport::new("pushforward", CheckMode::MonteCarlo)
            .param("map", self.spec.label())
            .param("alpha", self.alpha)
            .with_samples(self.samples as u64, self.seed);
        // margin: smallest relative room below the critical value
        let mut margin = f64::INFINITY;
        for (name, t) in &self.tests {
            r = r
                .estimate(&format!("{name}_ks"), t.statistic)
                .estimate(&format!("{name}_critical"), t.critical)
                .estimate(&format!("{name}_p_value"), t.p_value);
            margin = margin.min((t.critical - t.statistic) / t.critical);
        }
        r.margin = margin;
        r.pass = self.pass;
        r
    }
}

/// Right-hand side of a Lipschitz-type estimate `||F x - F y||_r <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum LipschitzBound {
    /// `L ||x - y||_q`
    Constant { l: f64 },
    /// `(1 + u) ||x - y||_2` with `u = (||x||_2 n^{-1/2}) / (||x||_p n^{-1/p})`
    TwoNormSandwich,
    /// `||W_{1,p} y - W_{1,p} z||_2 + 2 n^{-1/2} ||y - z||_1`
    SplitW,
    /// pairs with `x - y` in `t B_1 + t^{1/2} B_2`, image inside
    /// `10 (t^{1/2} B_2 cap t^{1/p} B_p)`
    MixedBall { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzScanResult {
    pub spec: TransportSpec,
    pub bound: LipschitzBound,
    pub source_norm: f64,
    pub target_norm: f64,
    pub pairs: usize,
    pub seed: u64,
    /// largest `lhs / rhs` seen
    pub max_ratio: f64,
    pub worst_x: Vec<f64>,
    pub worst_y: Vec<f64>,
    pub violations: usize,
    pub pass: bool,
}

fn gaussian_dir(rng: &mut Rng, n: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let s = norm_p(&g, 2.0).max(1e-300);
    g.into_iter().map(|v| v / s).collect()
}

/// Draws `y` for the pair `(x, y)`: an independent point, a nearby
/// perturbation, or a far point, cycling through the three modes.
fn partner(mode: usize, q: f64, x: &[f64], rng: &mut Rng, bound: &LipschitzBound) -> Vec<f64> {
    let n = x.len();
    if let LipschitzBound::MixedBall { t } = *bound {
        // x - y = a + b with ||a||_1 <= t, ||b||_2 <= sqrt t
        let d1 = gaussian_dir(rng, n);
        let d2 = gaussian_dir(rng, n);
        let l1 = norm_p(&d1, 1.0);
        let (ra, rb): (f64, f64) = match mode {
            0 => (rng.gen(), rng.gen()),
            1 => (1.0, 1.0),
            _ => (1e-3 * rng.gen::<f64>(), 1e-3 * rng.gen::<f64>()),
        };
        return (0..n)
            .map(|i| x[i] - ra * t * d1[i] / l1 - rb * t.sqrt() * d2[i])
            .collect();
    }
    match mode {
        0 => {
            let mut y = vec![0.0; n];
            sample_source(q, rng, &mut y);
            y
        }
        1 => {
            let d = gaussian_dir(rng, n);
            let h = 1e-3 * rng.gen_range(0.1..1.0);
            (0..n).map(|i| x[i] + h * d[i]).collect()
        }
        _ => {
            let mut y = vec![0.0; n];
            sample_source(q, rng, &mut y);
            let k = rng.gen_range(3.0..10.0);
            y.iter().map(|v| v * k).collect()
        }
    }
}

fn bound_ratio(
    spec: &TransportSpec,
    bound: &LipschitzBound,
    src: f64,
    tgt: f64,
    x: &[f64],
    y: &[f64],
    fx: &[f64],
    fy: &[f64],
) -> Result<f64> {
    let n = x.len() as f64;
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let df: Vec<f64> = fx.iter().zip(fy).map(|(a, b)| a - b).collect();
    let lhs = norm_p(&df, tgt);
    let rhs = match *bound {
        LipschitzBound::Constant { l } => l * norm_p(&dx, src),
        LipschitzBound::TwoNormSandwich => {
            let p = spec.source_exponent();
            let u = (norm_p(x, 2.0) / n.sqrt()) / (norm_p(x, p) * n.powf(-1.0 / p));
            (1.0 + u) * norm_p(&dx, 2.0)
        }
        LipschitzBound::SplitW => {
            let p = match *spec {
                TransportSpec::S { p, .. } => p,
                _ => return Err(Error::Unsupported("split bound applies to S only".into())),
            };
            let wx: Vec<f64> = x.iter().map(|&v| w_pq(1.0, p, v)).collect::<Result<_>>()?;
            let wy: Vec<f64> = y.iter().map(|&v| w_pq(1.0, p, v)).collect::<Result<_>>()?;
            let dw: Vec<f64> = wx.iter().zip(&wy).map(|(a, b)| a - b).collect();
            norm_p(&dw, 2.0) + 2.0 / n.sqrt() * norm_p(&dx, 1.0)
        }
        LipschitzBound::MixedBall { t } => {
            let p = match *spec {
                TransportSpec::S { p, .. } => p,
                _ => {
                    return Err(Error::Unsupported(
                        "mixed-ball bound applies to S only".into(),
                    ))
                }
            };
            let r2 = norm_p(&df, 2.0) / (10.0 * t.sqrt());
            let rp = norm_p(&df, p) / (10.0 * t.powf(1.0 / p));
            return Ok(r2.max(rp));
        }
    };
    if rhs == 0.0 {
        return Ok(if lhs == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(lhs / rhs)
}

/// Samples pairs and records the worst ratio of the two sides of `bound`.
/// For the `W` maps the scan is one-dimensional per coordinate.
pub fn lipschitz_scan(
    spec: &TransportSpec,
    source_norm: f64,
    target_norm: f64,
    bound: LipschitzBound,
    pairs: usize,
    seed: u64,
) -> Result<LipschitzScanResult> {
    spec.validate()?;
    let coordinatewise = matches!(spec, TransportSpec::W { .. });
    let n = if coordinatewise { 1 } else { spec.dim() };
    let q = spec.source_exponent();
    let single = match *spec {
        TransportSpec::W { q, p, .. } => TransportSpec::W { q, p, n: 1 },
        s => s,
    };
    type Part = (f64, Vec<f64>, Vec<f64>, usize);
    let parts = rng::chunked(pairs, seed, |r, start, c| -> Result<Part> {
        let mut best = (f64::NEG_INFINITY, vec![], vec![], 0);
        let mut x = vec![0.0; n];
        for k in 0..c {
            sample_source(q, r, &mut x);
            let y = partner((start + k) % 3, q, &x, r, &bound);
            let fx = apply_transport(&single, &x)?;
            let fy = apply_transport(&single, &y)?;
            let ratio = bound_ratio(&single, &bound, source_norm, target_norm, &x, &y, &fx, &fy)?;
            if ratio > 1.0 + 1e-9 {
                best.3 += 1;
            }
            if ratio > best.0 {
                best.0 = ratio;
                best.1 = x.clone();
                best.2 = y;
            }
        }
        Ok(best)
    });
    let mut best: Part = (f64::NEG_INFINITY, vec![], vec![], 0);
    let mut viol = 0;
    for p in parts {
        let p = p?;
        viol += p.3;
        if p.0 > best.0 {
            best = p;
        }
    }
    Ok(LipschitzScanResult {
        spec: *spec,
        bound,
        source_norm,
        target_norm,
        pairs,
        seed,
        max_ratio: best.0,
        worst_x: best.1,
        worst_y: best.2,
        violations: viol,
        pass: viol == 0,
    })
}

impl LipschitzScanResult {
    pub fn to_check(&self) -> CheckReport {
        let label = match self.bound {
            LipschitzBound::Constant { l } => format!("constant({l})"),
            LipschitzBound::TwoNormSandwich => "two_norm_sandwich".into(),
            LipschitzBound::SplitW => "split_w".into(),
            LipschitzBound::MixedBall { t } => format!("mixed_ball(t={t})"),
        };
        let mut r = CheckReport::new("lipschitz_scan", CheckMode::MonteCarlo)
            .param("map", self.spec.label())
            .param("bound", label)
            .param("source_norm", self.source_norm)
            .param("target_norm", self.target_norm)
            .estimate("max_ratio", self.max_ratio)
            .estimate("violations", self.violations as f64)
            .with_samples(self.pairs as u64, self.seed);
        r.margin = 1.0 - self.max_ratio;
        r.pass = self.pass;
        r
    }
}

pub const BOUND_IDS: &[&str] = &[
    "tbp_ii",
    "tbp_iii",
    "tbp_iv",
    "estv_i",
    "estv_ii",
    "estv_iii",
    "estw_i",
    "estw_ii",
    "wprop_iv",
    "difw_consistency",
    "temp_gamma",
    "est_alpha_beta",
];

const P_LATTICE: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 5.0];
const N_LATTICE: [usize; 4] = [1, 2, 8, 64];
const CLOSED_SLACK: f64 = 1e-9;

fn t_values() -> Vec<f64> {
    // 50 points, log-spaced over [1e-3, 20]
    (0..50)
        .map(|i| 10f64.powf(-3.0 + 4.301_029_995_663_981 * i as f64 / 49.0))
        .collect()
}

fn x_values(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

/// Sweeps one of the closed-form estimates over its parameter lattice.
pub fn bound_sweep(id: &str) -> Result<CheckReport> {
    let ts = t_values();
    let mut w = Worst::new(CLOSED_SLACK);
    match id {
        "tbp_ii" => {
            for &p in &P_LATTICE {
                for &n in &N_LATTICE {
                    let g2 = 2.0 * ln_gamma(1.0 + 1.0 / p).exp();
                    let nf = n as f64;
                    for &t in &ts {
                        let f = f_pn(p, n, t)?;
                        let at = [("p", p), ("n", nf), ("t", t)];
                        w.le((-t.powf(p) / nf).exp() * t, g2 * f, &at);
                        w.le(g2 * f, t, &at);
                        let d = f_pn_deriv(p, n, t)?;
                        w.le(d, 1.0 / g2, &at);
                        w.le(1.0 / g2, 1.0, &at);
                    }
                }
            }
        }
        "tbp_iii" => {
            for &p in &P_LATTICE {
                for &n in &N_LATTICE {
                    let nf = n as f64;
                    for &t in &ts {
                        let gap = f_pn_ratio(p, n, t)? - f_pn_deriv(p, n, t)?;
                        let at = [("p", p), ("n", nf), ("t", t)];
                        w.le(0.0, gap, &at);
                        w.le(gap, (2.0 * p * t.powf(p) / nf).min(1.0), &at);
                    }
                }
            }
        }
        "tbp_iv" => {
            for &p in &P_LATTICE {
                for &n in &N_LATTICE {
                    let nf = n as f64;
                    let r: Vec<f64> = ts
                        .iter()
                        .map(|&t| f_pn_ratio(p, n, t))
                        .collect::<Result<_>>()?;
                    for i in 0..ts.len() {
                        if i + 1 < ts.len() {
                            w.le(r[i + 1], r[i], &[("p", p), ("n", nf), ("t", ts[i])]);
                        }
                        for j in (i + 1..ts.len()).step_by(3) {
                            let (s, t) = (ts[i], ts[j]);
                            let lhs = (r[j] - r[i]).abs();
                            let mid = (t - s).abs() * f_pn(p, n, s.min(t))? / (s * t);
                            let at = [("p", p), ("n", nf), ("s", s), ("t", t)];
                            w.le(lhs, mid, &at);
                            w.le(mid, (t - s).abs() / s.max(t), &at);
                        }
                    }
                }
            }
        }
        "estv_i" => {
            for &p in &[1.0f64, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0] {
                let gp = ln_gamma(1.0 + 1.0 / p).exp();
                for x in x_values(1e-3, 12.0, 200) {
                    let at = [("p", p), ("x", x)];
                    let lb = x.powf(p) + (p * gp * x.powf(p - 1.0)).ln();
                    w.le(lb, v_p(p, x)?, &at);
                    w.le(p * x.powf(p - 1.0), v_p_deriv(p, x)?, &at);
                }
            }
        }
        "estv_ii" => {
            let ee = std::f64::consts::E;
            for &p in &[1.0f64, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0] {
                let gp = ln_gamma(1.0 + 1.0 / p).exp();
                for x in x_values(1.0, 12.0, 200) {
                    let at = [("p", p), ("x", x)];
                    let ub = ee + x.powf(p) + (p * gp * x.powf(p - 1.0)).ln();
                    w.le(v_p(p, x)?, ub, &at);
                    w.le(v_p_deriv(p, x)?, ee.powf(ee) * p * x.powf(p - 1.0), &at);
                }
            }
        }
        "estv_iii" => {
            for &p in &[1.0, 1.5, 2.0, 3.0, 5.0] {
                let xs = x_values(-6.0, 6.0, 61);
                let vs: Vec<f64> = xs.iter().map(|&x| v_p(p, x)).collect::<Result<_>>()?;
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        let lhs = 2f64.powf(1.0 - p) * (xs[i] - xs[j]).abs().powf(p);
                        w.le(
                            lhs,
                            (vs[i] - vs[j]).abs(),
                            &[("p", p), ("x", xs[i]), ("y", xs[j])],
                        );
                    }
                }
            }
        }
        "estw_i" => {
            let ps = [1.0, 1.5, 2.0, 3.0, 5.0];
            for &p in &ps {
                for &q in ps.iter().filter(|&&q| q <= p) {
                    let ratio = (ln_gamma(1.0 + 1.0 / q) - ln_gamma(1.0 + 1.0 / p)).exp();
                    w.le(0.5, ratio, &[("p", p), ("q", q)]);
                    for x in x_values(-8.0, 8.0, 161) {
                        let at = [("p", p), ("q", q), ("x", x)];
                        w.le(x.abs().powf(p / q), w_pq(p, q, x)?.abs(), &at);
                        w.le(ratio, w_pq_deriv(p, q, x)?, &at);
                    }
                }
            }
        }
        "estw_ii" => {
            for &p in &[2.0f64, 2.5, 3.0, 4.0, 6.0, 8.0] {
                for x in x_values(-8.0, 8.0, 160) {
                    if x == 0.0 {
                        continue;
                    }
                    let lb = 0.125 * p.sqrt() * x.abs().powf(p / 2.0 - 1.0);
                    w.le(lb, w_pq_deriv(p, 2.0, x)?, &[("p", p), ("x", x)]);
                }
            }
        }
        "wprop_iv" => {
            for &p in &[1.0, 1.5, 2.0, 3.0, 5.0] {
                let xs = x_values(-12.0, 12.0, 81);
                let ws: Vec<f64> = xs.iter().map(|&x| w_pq(1.0, p, x)).collect::<Result<_>>()?;
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        let d = (xs[i] - xs[j]).abs();
                        let lhs = (ws[i] - ws[j]).abs();
                        let mid = 2.0 * d.min(d.powf(1.0 / p));
                        let at = [("p", p), ("x", xs[i]), ("y", xs[j])];
                        w.le(lhs, mid, &at);
                        for &q in &[1.0, 1.5, 2.0, 3.0, 5.0] {
                            if q <= p {
                                w.le(mid, 2.0 * d.powf(1.0 / q), &at);
                            }
                        }
                    }
                }
            }
        }
        "difw_consistency" => {
            let h = 1e-5;
            let ps = [1.0, 1.5, 2.0, 3.0];
            for &p in &ps {
                for &q in &ps {
                    if p == q {
                        continue;
                    }
                    // even count keeps x = 0, where |x|^p and |w|^q kink, off the lattice
                    for x in x_values(-4.0, 4.0, 80) {
                        let num = (w_pq(p, q, x + h)? - w_pq(p, q, x - h)?) / (2.0 * h);
                        let an = w_pq_deriv(p, q, x)?;
                        let err = (num - an).abs() / an.abs().max(1.0);
                        w.push(1e-6 - err, &[("p", p), ("q", q), ("x", x)]);
                    }
                }
            }
            let r = w.into_report("difw_consistency");
            // the margin here is an absolute allowance, not a normalized slack
            let pass = r.estimates.get("violations") == Some(&0.0);
            let mut r = r;
            r.pass = pass;
            return Ok(r);
        }
        "temp_gamma" => {
            for &q in &[0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 30.0] {
                let grid = x_values(0.0, q / 2.0, 40);
                let r = temp_gamma_check(q, &grid)?;
                w.push(r.margin, &[("q", q)]);
            }
        }
        "est_alpha_beta" => {
            for &p in &[2.0, 3.0, 5.0] {
                for &n in &[1usize, 2, 8, 64] {
                    for &s in &ts {
                        let a = s_alpha(p, n, s)?.abs();
                        let rhs = s.powf(-p) * (2.0 * p * s.powf(p) / n as f64).min(1.0);
                        w.le(a, rhs, &[("p", p), ("n", n as f64), ("s", s)]);
                    }
                }
                for t in x_values(-15.0, 15.0, 121) {
                    w.le(s_beta(p, t)?.abs(), 1.0 / p, &[("p", p), ("t", t)]);
                }
            }
        }
        _ => return Err(Error::UnknownId(format!("bound sweep '{id}'"))),
    }
    Ok(w.into_report(id))
}

/// Relative gap `|f_{p,n}(s) / r_{p,n} - 1|` at `s = 10 n^{1/p} + 50^{1/p}`.
pub fn f_pn_limit_gap(p: f64, n: usize) -> Result<f64> {
    let s = 10.0 * (n as f64).powf(1.0 / p) + 50f64.powf(1.0 / p);
    let r = ball_constants(p, n)?.r_pn;
    Ok((f_pn(p, n, s)? / r - 1.0).abs())
}

pub const TRANSPORT_CHECK_IDS: &[&str] = &[
    "tbp_ii",
    "tbp_iii",
    "tbp_iv",
    "estv_i",
    "estv_ii",
    "estv_iii",
    "estw_i",
    "estw_ii",
    "wprop_iv",
    "difw_consistency",
    "temp_gamma",
    "est_alpha_beta",
    "f_pn_limit",
    "pushforward",
    "lipschitz_t",
    "lipschitz_w",
    "lipschitz_s",
    "lipschitz_s_tilde",
    "lipschitz_sandwich",
    "lipschitz_split_w",
    "lipschitz_mixed_ball",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportSizes {
    /// draws per pushforward test
    pub ks_samples: usize,
    /// pairs per Lipschitz scan
    pub pairs: usize,
}

impl Default for TransportSizes {
    fn default() -> Self {
        TransportSizes {
            ks_samples: 100_000,
            pairs: 100_000,
        }
    }
}

const KS_LATTICE_P: [f64; 3] = [1.0, 2.0, 3.0];
const KS_LATTICE_N: [usize; 3] = [2, 8, 32];

/// The pushforward lattice: `T_{p,n}` and `W_{q,p}^n` for `p, q in {1, 2, 3}`,
/// `n in {2, 8, 32}`.
pub fn pushforward_lattice() -> Vec<TransportSpec> {
    let mut out = Vec::new();
    for &n in &KS_LATTICE_N {
        for &p in &KS_LATTICE_P {
            out.push(TransportSpec::T { p, n });
            for &q in &KS_LATTICE_P {
                out.push(TransportSpec::W { q, p, n });
            }
        }
    }
    out
}

/// Scans of one family against its bound; the margin is the worst `1 - ratio`.
fn lipschitz_family(
    id: &str,
    cases: &[(TransportSpec, f64, LipschitzBound)],
    pairs: usize,
    seed: u64,
) -> Result<CheckReport> {
    let mut r = CheckReport::new(id, CheckMode::MonteCarlo);
    let mut worst = f64::INFINITY;
    let mut viol = 0u64;
    let mut labels = Vec::new();
    for (k, (spec, norm, bound)) in cases.iter().enumerate() {
        let s = lipschitz_scan(spec, *norm, *norm, *bound, pairs, rng::derive(seed, k as u64))?;
        worst = worst.min(1.0 - s.max_ratio);
        viol += s.violations as u64;
        r = r.estimate(&format!("max_ratio_{}", spec.label()), s.max_ratio);
        labels.push(spec.label());
    }
    let mut r = r
        .param("maps", serde_json::json!(labels))
        .estimate("violations", viol as f64)
        .with_samples(pairs as u64, seed);
    r.margin = worst;
    r.pass = viol == 0;
    Ok(r)
}

/// Runs one registered transport check.
pub fn transport_suite_check(id: &str, seed: u64, sizes: &TransportSizes) -> Result<CheckReport> {
    let s = rng::derive(seed, 0x7A5);
    let c = |l: f64| LipschitzBound::Constant { l };
    match id {
        "f_pn_limit" => {
            let mut w = Worst::new(0.0);
            for &p in &P_LATTICE {
                for &n in &N_LATTICE {
                    w.push(1e-8 - f_pn_limit_gap(p, n)?, &[("p", p), ("n", n as f64)]);
                }
            }
            Ok(w.into_report(id))
        }
        "pushforward" => {
            let mut r = CheckReport::new(id, CheckMode::MonteCarlo);
            let mut margin = f64::INFINITY;
            let mut failed = Vec::new();
            let lattice = pushforward_lattice();
            // 1e-3 is the level of the whole lattice; per map it is split again
            // over that map's KS tests
            let alpha = 1e-3 / lattice.len() as f64;
            let mut per_map_rejections = 0;
            let mut min_p = f64::INFINITY;
            for (k, spec) in lattice.iter().enumerate() {
                let t = pushforward_test(spec, sizes.ks_samples, rng::derive(s, k as u64), alpha)?;
                let c = t.to_check();
                margin = margin.min(c.margin);
                if !t.pass {
                    failed.push(spec.label());
                }
                let m = t.tests.len() as f64;
                if t.tests.iter().any(|(_, ks)| ks.p_value < 1e-3 / m) {
                    per_map_rejections += 1;
                }
                for (name, ks) in &t.tests {
                    min_p = min_p.min(ks.p_value);
                    r = r.estimate(&format!("{}_{name}_p", spec.label()), ks.p_value);
                }
            }
            let mut r = r
                .param("maps", lattice.len() as u64)
                .param("alpha", 1e-3)
                .param("alpha_per_map", alpha)
                .estimate("min_p_value", min_p)
                .estimate("maps_rejected_at_per_map_alpha", per_map_rejections as f64)
                .with_samples(sizes.ks_samples as u64, s);
            if !failed.is_empty() {
                r = r.note(format!("rejected: {}", failed.join(", ")));
            }
            r.margin = margin;
            r.pass = failed.is_empty();
            Ok(r)
        }
        "lipschitz_t" => {
            let mut cases = Vec::new();
            for &n in &[2usize, 8, 32] {
                for &p in &[1.0, 1.5, 2.0, 3.0] {
                    cases.push((TransportSpec::T { p, n }, p, c(2.0)));
                }
            }
            lipschitz_family(id, &cases, sizes.pairs, s)
        }
        "lipschitz_w" => {
            let mut cases = Vec::new();
            for (q, p) in [(1.0, 1.5), (1.0, 2.0), (1.0, 3.0), (2.0, 3.0), (1.5, 4.0), (2.0, 2.0)] {
                cases.push((TransportSpec::W { q, p, n: 1 }, 2.0, c(2.0)));
            }
            lipschitz_family(id, &cases, sizes.pairs, s)
        }
        "lipschitz_s" | "lipschitz_s_tilde" => {
            let mut cases = Vec::new();
            for &n in &[2usize, 16] {
                for &p in &[2.0, 4.0] {
                    cases.push(match id {
                        "lipschitz_s" => (TransportSpec::S { p, n }, 2.0, c(4.0)),
                        _ => (TransportSpec::STilde { p, n }, 2.0, c(18.0)),
                    });
                }
            }
            lipschitz_family(id, &cases, sizes.pairs, s)
        }
        "lipschitz_sandwich" => {
            let mut cases = Vec::new();
            for &n in &[2usize, 8] {
                for &p in &[1.0, 1.5, 3.0] {
                    cases.push((TransportSpec::T { p, n }, 2.0, LipschitzBound::TwoNormSandwich));
                }
            }
            lipschitz_family(id, &cases, sizes.pairs / 4, s)
        }
        "lipschitz_split_w" => {
            let mut cases = Vec::new();
            for &n in &[2usize, 8] {
                for &p in &[2.0, 3.0] {
                    cases.push((TransportSpec::S { p, n }, 2.0, LipschitzBound::SplitW));
                }
            }
            lipschitz_family(id, &cases, sizes.pairs / 4, s)
        }
        "lipschitz_mixed_ball" => {
            let mut cases = Vec::new();
            for &t in &[0.1, 1.0] {
                for &p in &[2.0, 4.0] {
                    cases.push((TransportSpec::S { p, n: 8 }, 2.0, LipschitzBound::MixedBall { t }));
                }
            }
            lipschitz_family(id, &cases, sizes.pairs / 4, s)
        }
        _ if BOUND_IDS.contains(&id) => bound_sweep(id),
        _ => Err(Error::UnknownId(id.to_string())),
    }
}
