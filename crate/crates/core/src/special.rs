//! Gamma-family special functions and the constants of `l_p` balls.
//!
//! The incomplete gamma functions use the power series for `x < a + 1` and a
//! modified Lentz continued fraction otherwise. Both are evaluated in log
//! space so that deep tails stay representable.

use crate::error::{domain, no_conv, Result};
use crate::report::{CheckReport, Worst};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 20_000;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("incomplete gamma needs a > 0, got a = {a}"));
    }
    if !(x >= 0.0) {
        return domain(format!("incomplete gamma needs x >= 0, got x = {x}"));
    }
    Ok(())
}

/// Returns `(ln P(a, x), ln Q(a, x))`.
pub fn ln_reg_gamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x == f64::INFINITY {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let lpre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        let mut n = 0;
        loop {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
            n += 1;
            if n > MAX_ITER {
                return no_conv("gamma series", format!("a={a}, x={x}"));
            }
        }
        let lp = lpre + sum.ln();
        Ok((lp, (-lp.exp()).ln_1p()))
    } else {
        let lq = lpre + gamma_cf(a, x)?.ln();
        Ok(((-lq.exp()).ln_1p(), lq))
    }
}

/// Lentz evaluation of the continued fraction `h` with
/// `Q(a, x) = x^a e^{-x} h / Gamma(a)`, for `x >= a + 1`.
fn gamma_cf(a: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut i = 1.0;
    loop {
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
        i += 1.0;
        if i as usize > MAX_ITER {
            return no_conv("gamma continued fraction", format!("a={a}, x={x}"));
        }
    }
    Ok(h)
}

/// `ln Q(a, x) + x`, free of the cancellation in the sum for large `x`.
pub fn ln_reg_upper_gamma_scaled(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x > 0.0 && x.is_finite() && x >= a + 1.0 {
        return Ok(a * x.ln() - ln_gamma(a) + gamma_cf(a, x)?.ln());
    }
    Ok(ln_reg_gamma_pair(a, x)?.1 + x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_reg_gamma_pair(a, x)?.0.exp())
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_reg_gamma_pair(a, x)?.1.exp())
}

/// Unregularized lower incomplete gamma `int_0^x e^{-t} t^{a-1} dt`.
pub fn lower_gamma(a: f64, x: f64) -> Result<f64> {
    Ok((ln_reg_gamma_pair(a, x)?.0 + ln_gamma(a)).exp())
}

/// Log of the gamma density `x^{a-1} e^{-x} / Gamma(a)`.
fn ln_gamma_density(a: f64, x: f64) -> f64 {
    (a - 1.0) * x.ln() - x - ln_gamma(a)
}

#[derive(Clone, Copy)]
enum Side {
    Lower,
    Upper,
}

fn solve_gamma(a: f64, target: f64, side: Side) -> Result<f64> {
    let g = |x: f64| -> Result<f64> {
        let (lp, lq) = ln_reg_gamma_pair(a, x)?;
        Ok(match side {
            Side::Lower => lp,
            Side::Upper => lq,
        })
    };
    // h(x) = g(x) - target, increasing in x after the sign flip below
    let sgn = match side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    };
    let mut lo = 0.0_f64;
    let mut hi = a + 20.0 * a.sqrt() + 50.0;
    while sgn * (g(hi)? - target) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return no_conv("inverse gamma bracket", format!("a={a}, target={target}"));
        }
    }
    let mut x = match side {
        Side::Lower if target < -1.0 => ((target + ln_gamma(a + 1.0)) / a).exp(),
        Side::Upper if target < -1.0 => (-target + (a - 1.0) * (-target).ln()).max(1e-3),
        _ => a.max(1e-3),
    };
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..400 {
        let gx = g(x)?;
        let h = sgn * (gx - target);
        if h == 0.0 {
            return Ok(x);
        }
        if h < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ld = ln_gamma_density(a, x);
        let deriv = (ld - gx).exp();
        let mut nx = x - h / deriv;
        if !(nx > lo && nx < hi) || !nx.is_finite() {
            nx = if lo > 0.0 && hi / lo > 8.0 {
                (lo * hi).sqrt()
            } else if lo == 0.0 && hi > 1.0 {
                hi * 0.125
            } else {
                0.5 * (lo + hi)
            };
        }
        if (nx - x).abs() <= 2e-16 * x.abs() || hi - lo <= 2e-16 * hi {
            return Ok(nx);
        }
        x = nx;
    }
    no_conv("inverse gamma", format!("a={a}, target={target}, x={x}"))
}

/// Inverse of `P(a, .)`. `u` must lie in `(0, 1)`.
pub fn inv_reg_lower_gamma(a: f64, u: f64) -> Result<f64> {
    if !(a > 0.0) {
        return domain(format!("inverse gamma needs a > 0, got {a}"));
    }
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("inverse gamma needs u in (0,1), got {u}"));
    }
    if u <= 0.5 {
        solve_gamma(a, u.ln(), Side::Lower)
    } else {
        solve_gamma(a, (-u).ln_1p(), Side::Upper)
    }
}

/// Solves `ln P(a, x) = ln_u` for `ln_u < 0`.
pub fn inv_reg_lower_gamma_ln(a: f64, ln_u: f64) -> Result<f64> {
    if !(a > 0.0) || !(ln_u < 0.0) {
        return domain(format!(
            "inverse gamma needs a > 0 and ln u < 0, got {a}, {ln_u}"
        ));
    }
    if ln_u > -std::f64::consts::LN_2 {
        solve_gamma(a, (-ln_u.exp()).ln_1p(), Side::Upper)
    } else {
        solve_gamma(a, ln_u, Side::Lower)
    }
}

/// Solves `ln Q(a, x) = ln_q` for `ln_q < 0`.
pub fn inv_reg_upper_gamma_ln(a: f64, ln_q: f64) -> Result<f64> {
    if !(a > 0.0) || !(ln_q < 0.0) {
        return domain(format!(
            "inverse gamma needs a > 0 and ln q < 0, got {a}, {ln_q}"
        ));
    }
    if ln_q > -std::f64::consts::LN_2 {
        solve_gamma(a, (-ln_q.exp()).ln_1p(), Side::Lower)
    } else {
        solve_gamma(a, ln_q, Side::Upper)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("incomplete beta needs a, b > 0, got {a}, {b}"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("incomplete beta needs x in [0,1], got {x}"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let lfront = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(lfront.exp() * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - lfront.exp() * beta_cf(b, a, 1.0 - x)? / b)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    no_conv("beta continued fraction", format!("a={a}, b={b}, x={x}"))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    let z = x * x / 2.0;
    let tail = 0.5 * reg_upper_gamma(0.5, z).unwrap_or(0.0);
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Constants attached to `nu_p` and the volume-one ball `r_{p,n} B_p^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConstants {
    /// `Gamma(1 + 1/p)`
    pub gamma_p: f64,
    /// standard deviation of one coordinate of `nu_p`
    pub sigma_p: f64,
    /// radius giving `r B_p^n` unit volume
    pub r_pn: f64,
}

pub fn ball_constants(p: f64, n: usize) -> Result<BallConstants> {
    if !(p > 0.0) || !p.is_finite() {
        return domain(format!("ball constants need p > 0, got {p}"));
    }
    if n == 0 {
        return domain("ball constants need n >= 1");
    }
    let lg1 = ln_gamma(1.0 + 1.0 / p);
    let sigma2 = (ln_gamma(1.0 + 3.0 / p) - lg1).exp() / 3.0;
    let nf = n as f64;
    let ln_r = ln_gamma(1.0 + nf / p) / nf - std::f64::consts::LN_2 - lg1;
    Ok(BallConstants {
        gamma_p: lg1.exp(),
        sigma_p: sigma2.sqrt(),
        r_pn: ln_r.exp(),
    })
}

/// Log of `|B_p^n|`.
pub fn ln_ball_volume(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * (std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + nf / p)
}

/// Checks `q * gamma(q, u) <= e^{-u} u^q (1 + 2u/q)` on the given grid, which
/// must lie in `[0, q/2]`.
pub fn temp_gamma_check(q: f64, u_grid: &[f64]) -> Result<CheckReport> {
    if !(q >= 0.01) {
        return domain(format!("temp_gamma needs q >= 0.01, got {q}"));
    }
    let mut w = Worst::new(1e-12);
    for &u in u_grid {
        if !(0.0..=q / 2.0).contains(&u) {
            return domain(format!("temp_gamma grid point {u} outside [0, q/2]"));
        }
        let lhs = q * lower_gamma(q, u)?;
        let rhs = (-u).exp() * u.powf(q) * (1.0 + 2.0 * u / q);
        w.le(lhs, rhs, &[("q", q), ("u", u)]);
    }
    Ok(w.into_report("temp_gamma").param("q", q))
}
