//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals.

use crate::error::{no_conv, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]` until the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = kronrod(&f, a, b);
    segs.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    let max_segs = 20_000;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if segs.len() >= max_segs {
            if err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
                break;
            }
            return no_conv(
                "adaptive quadrature",
                format!("[{a}, {b}] value {total} error {err}"),
            );
        }
        let (imax, _) =
            segs.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc },
            );
        let (lo, hi, v0, e0) = segs.swap_remove(imax);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further; keep it
            segs.push((lo, hi, v0, 0.0));
            err -= e0;
            continue;
        }
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
        total = segs.iter().map(|s| s.2).sum();
        err = segs.iter().map(|s| s.3).sum();
    }
    Ok(QuadResult {
        value: segs.iter().map(|s| s.2).sum(),
        error: err,
    })
}

/// Integrates over consecutive breakpoints, which must be sorted.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
    };
    let k = breaks.len().saturating_sub(1).max(1) as f64;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let r = integrate(&f, w[0], w[1], abs_tol / k, rel_tol)?;
            out.value += r.value;
            out.error += r.error;
        }
    }
    Ok(out)
}

/// Golden-section search for the minimizer of a unimodal `f` on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a root of `f` on a sign-changing bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) && fm != 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Tanh-sinh quadrature on `[a, b]`. Tolerates integrable endpoint
/// singularities; `f` is never evaluated at the endpoints themselves.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let t_max = 3.2;
    // contribution of the symmetric pair at parameter t
    let pair = |t: f64| -> f64 {
        let u = pi2 * t.sinh();
        let e = (2.0 * u).exp();
        // 1 - tanh(u), computed without cancellation
        let d = 2.0 / (e + 1.0);
        let ch = u.cosh();
        let w = pi2 * t.cosh() / (ch * ch);
        if !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let xl = a + half * d;
        let xr = b - half * d;
        let mut s = 0.0;
        if xr < b && xr > a {
            s += f(xr);
        }
        if xl > a && xl < b {
            s += f(xl);
        }
        w * s
    };
    let mut sum = pi2 * f(c);
    let mut k = 1.0;
    while k <= t_max {
        sum += pair(k);
        k += 1.0;
    }
    let mut h = 1.0;
    let mut prev = half * h * sum;
    let mut last_err = f64::INFINITY;
    for level in 1..=10 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += pair(t);
            t += 2.0 * h;
        }
        let cur = half * h * sum;
        let err = (cur - prev).abs();
        if level >= 3 && err <= rel_tol * cur.abs() {
            return Ok(QuadResult {
                value: cur,
                error: err,
            });
        }
        prev = cur;
        last_err = err;
    }
    if last_err <= 1e3 * rel_tol * prev.abs() + 1e-300 {
        return Ok(QuadResult {
            value: prev,
            error: last_err,
        });
    }
    no_conv("tanh-sinh quadrature", format!("[{a}, {b}] value {prev}"))
}
