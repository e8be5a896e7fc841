use approx::assert_relative_eq;
use iclab::convex::{Grid, GridFunction};
use iclab::measures::Measure1D;
use iclab::quad::integrate;
use iclab::tau::*;
use iclab::Error;
use proptest::prelude::*;

fn window() -> TauConfig {
    TauConfig {
        dx: 1.0 / 512.0,
        window: Some((-45.0, 45.0)),
    }
}

fn nu_density(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

// f = t 1_{x > a}: f [] w (x) = min(t, w(x - a)) to the right of a, 0 to the left
fn half_line_oracle(t: f64, a: f64) -> f64 {
    let fa = nu_cdf(a);
    let r = if t <= 4.0 / 9.0 { 6.0 * t.sqrt() } else { 4.5 * t + 2.0 };
    let mut breaks = vec![a, a + 4.0f64.min(r), a + r, 60.0];
    if a < 0.0 && 0.0 < a + r {
        breaks.push(0.0);
    }
    breaks.sort_by(f64::total_cmp);
    let mut right = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            right += integrate(|x| (maurey_w(x - a).min(t)).exp() * nu_density(x), w[0], w[1], 1e-15, 1e-14)
                .unwrap()
                .value;
        }
    }
    right += (-60f64).exp() * 0.5 * t.exp();
    (fa + right) * (fa + (-t).exp() * (1.0 - fa))
}

#[test]
fn half_line_against_quadrature() {
    let ctx = TauContext::new(&Measure1D::nu(), &CostFunctionSpec::MaureyW, &window()).unwrap();
    for &(t, a) in &[(0.3, 0.0), (2.0, -1.5), (6.0, 2.25), (10.0, -8.0)] {
        let r = ctx.check(&TestFunction::HalfLine { t, a }).unwrap();
        let want = half_line_oracle(t, a);
        assert!((r.lhs - want).abs() <= 1e-8, "t={t} a={a}: {} vs {want}", r.lhs);
        assert!(r.lhs <= 1.0);
    }
}

#[test]
fn constant_functions_give_one() {
    for phi in [CostFunctionSpec::MaureyW, ic9_cost()] {
        let ctx = TauContext::new(&Measure1D::nu(), &phi, &window()).unwrap();
        for &c in &[-5.0, 0.0, 2.0] {
            let r = ctx.check(&TestFunction::Constant { c }).unwrap();
            assert!((r.lhs - 1.0).abs() <= 1e-10, "{r:?}");
            assert_eq!(r.class, TauClass::Pass);
        }
    }
}

#[test]
fn corpus_is_deterministic_and_bounded() {
    let a = corpus(7, 60);
    assert_eq!(a, corpus(7, 60));
    assert_ne!(a, corpus(8, 60));
    for f in &a {
        for k in 0..400 {
            let x = -20.0 + 0.1 * k as f64;
            let v = f.eval(x);
            assert!(v.is_finite() && v.abs() <= 10.0 + 1e-12);
        }
        if let TestFunction::PiecewiseLinear { knots } = f {
            assert!(knots.len() <= 8);
            for w in knots.windows(2) {
                assert!(((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs() <= 3.0 + 1e-12);
            }
            for k in knots {
                assert!(k.1.abs() <= 5.0);
                assert_eq!((k.0 / CORPUS_STEP).fract(), 0.0);
            }
        }
    }
}

#[test]
fn maurey_and_ic9_small_corpus() {
    for phi in [CostFunctionSpec::MaureyW, ic9_cost()] {
        let ctx = TauContext::new(&Measure1D::nu(), &phi, &window()).unwrap();
        for f in corpus(3, 30) {
            let r = ctx.check(&f).unwrap();
            assert!(r.lhs <= 1.0 + 1e-6, "{r:?}");
            assert!(r.error < 1e-6);
        }
    }
}

#[test]
fn too_large_cost_is_caught() {
    // 10 x^2 is far above what nu can carry; a smooth bump exposes it
    let ctx = TauContext::new(&Measure1D::nu(), &CostFunctionSpec::Quadratic { c: 10.0 }, &window()).unwrap();
    let f = TestFunction::PiecewiseLinear {
        knots: vec![(-3.0, 3.0), (0.0, 0.0), (3.0, 3.0)],
    };
    let r = ctx.check(&f).unwrap();
    assert_eq!(r.class, TauClass::Violation);
    assert!(!r.pass);
}

#[test]
fn table_cost_matches_closed_form() {
    // for nu_2, Lambda* (x / 2) = x^2 / 4
    let table = CostFunctionSpec::LambdaStar {
        mu: Measure1D::nu_p(2.0).unwrap(),
        beta: 2.0,
    };
    let c = table.compile().unwrap();
    for &x in &[0.0, 0.5, -3.0, 10.0] {
        assert!((c.eval(x) - x * x / 4.0).abs() <= 1e-3 * (1.0 + x * x));
    }
    let cfg = TauConfig {
        dx: 1.0 / 256.0,
        window: Some((-12.0, 12.0)),
    };
    let mu = Measure1D::nu_p(2.0).unwrap();
    let a = TauContext::new(&mu, &table, &cfg).unwrap();
    let b = TauContext::new(&mu, &CostFunctionSpec::Quadratic { c: 0.25 }, &cfg).unwrap();
    for f in corpus(5, 10) {
        let (ra, rb) = (a.check(&f).unwrap(), b.check(&f).unwrap());
        assert!(ra.pass && rb.pass);
        assert!((ra.lhs - rb.lhs).abs() < 3e-5, "{} {} {:?}", ra.lhs, rb.lhs, f);
    }
}

#[test]
fn grid_function_entry_point() {
    let g = Grid::span(-50.0, 50.0, 2001).unwrap();
    let f = GridFunction::sample(&g, |x| (0.3 * x).clamp(-2.0, 2.0)).unwrap();
    let r = tau_check_1d(&Measure1D::nu(), &CostFunctionSpec::MaureyW, &f, &TauConfig::default()).unwrap();
    assert!(r.pass && r.lhs < 1.0);
    // unbounded on the window
    let short = GridFunction::sample(&Grid::span(-10.0, 10.0, 201).unwrap(), |x| x).unwrap();
    assert!(matches!(
        tau_check_1d(&Measure1D::nu(), &CostFunctionSpec::MaureyW, &short, &TauConfig::default()),
        Err(Error::Domain(_))
    ));
}

fn iterated_2d(f: &[f64], n: usize, phi1: &[f64], phi2: &[f64]) -> Vec<f64> {
    let mut stage = vec![f64::INFINITY; n * n];
    for j in 0..n {
        for k in 0..n {
            let mut best = f64::INFINITY;
            for l in 0..n {
                best = best.min(f[j * n + l] + phi2[k + n - 1 - l]);
            }
            stage[j * n + k] = best;
        }
    }
    let mut out = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for k in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                best = best.min(stage[j * n + k] + phi1[i + n - 1 - j]);
            }
            out[i * n + k] = best;
        }
    }
    out
}

#[test]
fn brute_2d_matches_iterated() {
    let g = Grid2D {
        half_width: 8.0,
        nodes: 40,
    };
    let n = g.nodes;
    let phi: Vec<f64> = (-(n as i64 - 1)..n as i64).map(|d| maurey_w(d as f64 * g.dx())).collect();
    for f in corpus_2d(4, 6) {
        let vals: Vec<f64> = (0..n * n).map(|i| f.eval(g.x(i / n), g.x(i % n))).collect();
        let a = inf_convolution_2d_brute(&vals, n, &phi, &phi);
        let b = iterated_2d(&vals, n, &phi, &phi);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn joint_2d_small_grid() {
    let nu = Measure1D::nu();
    let comps = [(nu.clone(), CostFunctionSpec::MaureyW), (nu.clone(), CostFunctionSpec::MaureyW)];
    let g = Grid2D {
        half_width: 16.0,
        nodes: 64,
    };
    for f in corpus_2d(9, 6) {
        let r = tau_check_2d(&comps, &f, &g).unwrap();
        assert!(r.lhs <= 1.0 + 1e-4, "{r:?}");
    }
    // a separable input factorizes on the same grid
    let f = TestFunction2D::DiscStep {
        t: 0.0,
        center: (0.0, 0.0),
        radius: 1.0,
    };
    let r = tau_check_2d(&comps, &f, &g).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-12);
}

#[test]
fn product_entry_points() {
    let nu = Measure1D::nu();
    let comps = vec![(nu.clone(), CostFunctionSpec::MaureyW), (nu.clone(), CostFunctionSpec::MaureyW)];
    let fs = corpus(11, 2);
    let sep = ProductFunction::Separable { parts: fs.clone() };
    let r = tau_check_product(&comps, &sep, &window()).unwrap();
    let ctx = TauContext::new(&nu, &CostFunctionSpec::MaureyW, &window()).unwrap();
    let want = ctx.check(&fs[0]).unwrap().lhs * ctx.check(&fs[1]).unwrap().lhs;
    assert_relative_eq!(r.lhs, want, max_relative = 1e-14);
    let zero = ProductFunction::Separable {
        parts: vec![TestFunction::Constant { c: 0.0 }; 2],
    };
    assert!((tau_check_product(&comps, &zero, &window()).unwrap().lhs - 1.0).abs() < 1e-12);
    let three = vec![comps[0].clone(), comps[0].clone(), comps[0].clone()];
    let joint = ProductFunction::Joint {
        f: corpus_2d(1, 1)[0].clone(),
        grid: Grid2D::default(),
    };
    assert!(matches!(tau_check_product(&three, &joint, &window()), Err(Error::Unsupported(_))));
}

#[test]
fn profile_examples() {
    assert_eq!(f_t(3.0, 1.0), 1.0);
    assert_relative_eq!(f_t(2f64.ln(), 0.5), 2.0 / 3.0, max_relative = 1e-15);
    let (t, s, p) = (0.3, 0.7, 0.2);
    assert!((f_t(t + s, p) - f_t(t, f_t(s, p))).abs() < 1e-15);
    assert!((g_t(t + s, p) - g_t(t, g_t(s, p))).abs() < 1e-15);
    assert!(profile(1.0, 1.0).is_err());
    assert!(profile(1.0, 0.0).is_err());
    assert!(profile(-1.0, 0.5).is_err());
}

#[test]
fn implied_concentration_examples() {
    let c = tau_implied_concentration(0.5, &CostFunctionSpec::MaureyW, 2.0).unwrap();
    let e2 = 2f64.exp();
    assert_relative_eq!(c.conc, e2 / (e2 + 1.0), max_relative = 1e-15);
    assert!((c.conc - 0.8808).abs() < 1e-4);
    let c = tau_implied_concentration(0.3, &CostFunctionSpec::MaureyW, 0.0).unwrap();
    assert_relative_eq!(c.conc, 0.3, max_relative = 1e-15);
    let c = tau_implied_concentration(nu_cdf(-3.0), &CostFunctionSpec::MaureyW, 4.0).unwrap();
    assert_relative_eq!(c.conc_all, nu_cdf(-1.0), max_relative = 1e-14);
    assert!(c.conc_large.is_none());
    // radius of {w <= t}
    assert_relative_eq!(c.radius, 4.5 * 4.0 + 2.0, max_relative = 1e-15);
    let q = CostFunctionSpec::Quadratic { c: 0.25 };
    assert!((tau_implied_concentration(0.5, &q, 1.0).unwrap().radius - 2.0).abs() < 1e-12);
}

#[test]
fn maurey_continuity() {
    assert_eq!(maurey_w(4.0), 4.0 / 9.0);
    assert_eq!(4.0f64 * 4.0 / 36.0, 2.0 / 9.0 * 2.0);
    assert!((maurey_w(4.0 + 1e-12) - 4.0 / 9.0).abs() < 1e-12);
}

#[test]
fn registered_checks_run() {
    let sizes = TauSizes {
        corpus: 10,
        separable: 3,
        joint: 1,
        dx: 1.0 / 256.0,
    };
    for id in TAU_CHECK_IDS.iter().filter(|i| **i != "tau_joint_2d") {
        let r = tau_suite_check(id, 1, &sizes).unwrap();
        assert!(r.pass, "{id}: {r:?}");
    }
    assert!(matches!(tau_suite_check("bogus", 1, &sizes), Err(Error::UnknownId(_))));
}

#[test]
fn json_lines_round_trip() {
    let ctx = TauContext::new(&Measure1D::nu(), &CostFunctionSpec::MaureyW, &window()).unwrap();
    let reps: Vec<TauReport> = corpus(2, 3).iter().map(|f| ctx.check(f).unwrap()).collect();
    let text = to_json_lines(&reps).unwrap();
    assert_eq!(text.lines().count(), 3);
    let back: Vec<TauReport> = from_json_lines(&text).unwrap();
    assert_eq!(back, reps);
    let fs = corpus(2, 5);
    let back: Vec<TestFunction> = from_json_lines(&to_json_lines(&fs).unwrap()).unwrap();
    assert_eq!(back, fs);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn semigroups(t in 0.0f64..10.0, s in 0.0f64..10.0, p in 1e-6f64..0.999_999) {
        prop_assert!((f_t(t + s, p) - f_t(t, f_t(s, p))).abs() <= 1e-12);
        prop_assert!((g_t(t + s, p) - g_t(t, g_t(s, p))).abs() <= 1e-12);
    }

    #[test]
    fn domination(t in 0.0f64..40.0, p in 1e-9f64..0.999_999) {
        prop_assert!(f_t(t, p) >= g_t(t / 2.0, p) * (1.0 - 1e-14));
    }

    #[test]
    fn implied_bounds_consistent(m in 1e-6f64..1.0, t in 0.0f64..30.0) {
        let c = tau_implied_concentration(m, &CostFunctionSpec::MaureyW, t).unwrap();
        prop_assert!(c.conc >= c.conc_small * (1.0 - 1e-14));
        prop_assert!(c.conc >= c.conc_all * (1.0 - 1e-14));
        if let Some(l) = c.conc_large {
            prop_assert!(c.conc >= l * (1.0 - 1e-14));
        }
        prop_assert!(c.conc >= m * (1.0 - 1e-15));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_pl_satisfies_tau(seed in 0u64..1_000_000) {
        let cfg = TauConfig { dx: 1.0 / 128.0, window: Some((-45.0, 45.0)) };
        let ctx = TauContext::new(&Measure1D::nu(), &CostFunctionSpec::MaureyW, &cfg).unwrap();
        for f in corpus(seed, 6) {
            let r = ctx.check(&f).unwrap();
            prop_assert!(r.lhs <= 1.0 + 1e-6);
        }
    }
}
