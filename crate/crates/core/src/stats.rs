//! Running moments, Monte Carlo estimates and the Kolmogorov-Smirnov test.

use serde::{Deserialize, Serialize};

/// Welford accumulator that can be merged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accum {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Accum {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Accum) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            se: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(v: f64) -> Self {
        Estimate {
            mean: v,
            se: 0.0,
            n: 0,
        }
    }
}

/// `(lhs - rhs) / se`, with the convention that an exact tie scores zero.
pub fn margin_in_se(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-15 {
        0.0
    } else if diff > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Sup distance between the empirical CDF of `xs` and `cdf`. Sorts `xs`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (-j * j * pi2 / (8.0 * lambda * lambda)).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let t = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { t } else { -t };
            if t < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn ks_scale(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    s + 0.12 + 0.11 / s
}

/// Critical value of the one-sample statistic at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let lam = crate::quad::bisect(|l| kolmogorov_sf(l) - alpha, 0.2, 5.0, 1e-12);
    lam / ks_scale(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub p_value: f64,
    pub n: usize,
    pub pass: bool,
}

pub fn ks_test<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F, alpha: f64) -> KsResult {
    let d = ks_statistic(xs, cdf);
    let n = xs.len();
    let crit = ks_critical(n, alpha);
    KsResult {
        statistic: d,
        critical: crit,
        p_value: kolmogorov_sf(ks_scale(n) * d),
        n,
        pass: d < crit,
    }
}
