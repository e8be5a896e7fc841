use approx::assert_relative_eq;
use iclab::quad::integrate;
use iclab::special::{ball_constants, gamma};
use iclab::transports::*;
use proptest::prelude::*;

// Simpson oracle for the tail integral of e^{-t^p}, independent of the
// incomplete gamma code.
fn tail_oracle(p: f64, x: f64) -> f64 {
    let b = x + 40f64.powf(1.0 / p) + 10.0;
    let n = 200_000;
    let h = (b - x) / n as f64;
    let f = |t: f64| (-t.powf(p)).exp();
    let mut s = f(x) + f(b);
    for i in 1..n {
        let t = x + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    s * h / 3.0 / gamma(1.0 + 1.0 / p)
}

#[test]
fn f11_closed_form() {
    assert_relative_eq!(f_pn(1.0, 1, 2f64.ln()).unwrap(), 0.25, max_relative = 1e-13);
    for &s in &[0.01, 0.3, 1.0, 4.0, 20.0] {
        let want = (1.0 - (-s as f64).exp()) / 2.0;
        assert_relative_eq!(f_pn(1.0, 1, s).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn f_pn_against_quadrature() {
    // the defining relation, integrated directly
    for &(p, n, s) in &[
        (2.0, 3usize, 0.7),
        (3.0, 5, 1.3),
        (1.5, 2, 2.0),
        (5.0, 8, 1.1),
    ] {
        let lhs = integrate(
            |r: f64| (-r.powf(p)).exp() * r.powi(n as i32 - 1),
            0.0,
            s,
            1e-15,
            1e-13,
        )
        .unwrap()
        .value;
        let g2 = 2.0 * gamma(1.0 + 1.0 / p);
        let f = f_pn(p, n, s).unwrap();
        let rhs = g2.powi(n as i32) * f.powi(n as i32) / n as f64;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }
}

#[test]
fn f_pn_limit_is_radius() {
    for &p in &[1.0, 1.5, 2.0, 3.0, 5.0] {
        for &n in &[1usize, 2, 8, 64] {
            assert!(f_pn_limit_gap(p, n).unwrap() <= 1e-8, "p={p} n={n}");
            let r = ball_constants(p, n).unwrap().r_pn;
            assert!(f_pn(p, n, 1e3).unwrap() <= r * (1.0 + 1e-14));
        }
    }
}

#[test]
fn f_pn_derivative_matches_difference() {
    for &(p, n, s) in &[(2.0, 4usize, 1.2), (1.0, 1, 0.5), (3.0, 64, 3.3)] {
        let h = 1e-6;
        let num = (f_pn(p, n, s + h).unwrap() - f_pn(p, n, s - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(num, f_pn_deriv(p, n, s).unwrap(), max_relative = 1e-6);
    }
}

#[test]
fn v2_at_one() {
    let want = -(1.0 - iclab::special::reg_lower_gamma(0.5, 1.0).unwrap()).ln();
    assert_relative_eq!(v_p(2.0, 1.0).unwrap(), want, max_relative = 1e-13);
    assert_relative_eq!(
        v_p(2.0, 1.0).unwrap(),
        1.849_605_509_933_248,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        v_p(2.0, 1.0).unwrap(),
        -tail_oracle(2.0, 1.0).ln(),
        max_relative = 1e-9
    );
}

#[test]
fn w_matches_tail_oracle() {
    for &(p, q, x) in &[
        (1.0, 3.0, 2.0),
        (3.0, 2.0, 0.8),
        (2.0, 1.5, 1.7),
        (5.0, 2.0, 1.2),
    ] {
        let w = w_pq(p, q, x).unwrap();
        assert_relative_eq!(tail_oracle(p, x), tail_oracle(q, w), max_relative = 1e-8);
    }
}

#[test]
fn w_far_tail_is_finite() {
    let w = w_pq(1.0, 2.0, 700.0).unwrap();
    assert!(w.is_finite() && w > 26.0);
    assert_relative_eq!(w_pq(2.0, 1.0, w).unwrap(), 700.0, max_relative = 1e-9);
}

#[test]
fn w_identity_and_v() {
    for &x in &[-3.0, 0.0, 0.4, 9.0] {
        assert_eq!(w_pq(2.5, 2.5, x).unwrap(), x);
        assert_eq!(v_p(3.0, x).unwrap(), w_pq(3.0, 1.0, x).unwrap());
    }
    assert_relative_eq!(v_p(1.0, 2.5).unwrap(), 2.5, max_relative = 1e-13);
}

#[test]
fn w_domain_error() {
    assert!(w_pq(0.5, 2.0, 1.0).is_err());
    assert!(f_pn(2.0, 3, -1.0).is_err());
    assert!(apply_transport(&TransportSpec::S { p: 1.5, n: 2 }, &[0.1, 0.2]).is_err());
    assert!(apply_transport(&TransportSpec::T { p: 2.0, n: 3 }, &[0.1, 0.2]).is_err());
}

#[test]
fn t_images() {
    let spec = TransportSpec::T { p: 2.0, n: 3 };
    assert_eq!(apply_transport(&spec, &[0.0; 3]).unwrap(), vec![0.0; 3]);
    let x = [0.3, -1.2, 2.0];
    let y = apply_transport(&spec, &x).unwrap();
    assert_relative_eq!(
        lp_norm(&y, 2.0),
        f_pn(2.0, 3, lp_norm(&x, 2.0)).unwrap(),
        max_relative = 1e-14
    );
    // (1,1): onto (-1/2, 1/2), coupled with the uniform quantile
    let s = TransportSpec::T { p: 1.0, n: 1 };
    for &x in &[-30.0, -1.0, 0.2, 5.0] {
        let y = apply_transport(&s, &[x]).unwrap()[0];
        let u = if x < 0.0 {
            0.5 * (x as f64).exp()
        } else {
            1.0 - 0.5 * (-x as f64).exp()
        };
        assert!(y.abs() < 0.5);
        assert_relative_eq!(y + 0.5, u, max_relative = 1e-12);
    }
}

#[test]
fn composites_equal_two_stage() {
    let x = [0.5, -2.0, 1.4, 0.01, -0.3, 3.0, 0.9, -1.1];
    let s = apply_transport(&TransportSpec::S { p: 3.0, n: 8 }, &x).unwrap();
    let w = apply_transport(
        &TransportSpec::W {
            q: 1.0,
            p: 3.0,
            n: 8,
        },
        &x,
    )
    .unwrap();
    let t = apply_transport(&TransportSpec::T { p: 3.0, n: 8 }, &w).unwrap();
    assert_eq!(s, t);
    let s = apply_transport(&TransportSpec::STilde { p: 4.0, n: 8 }, &x).unwrap();
    let w = apply_transport(
        &TransportSpec::W {
            q: 2.0,
            p: 4.0,
            n: 8,
        },
        &x,
    )
    .unwrap();
    let t = apply_transport(&TransportSpec::T { p: 4.0, n: 8 }, &w).unwrap();
    assert_eq!(s, t);
}

#[test]
fn pushforward_examples() {
    let r = pushforward_test(&TransportSpec::T { p: 2.0, n: 4 }, 100_000, 11, 1e-3).unwrap();
    assert!(r.pass, "{r:?}");
    let r = pushforward_test(
        &TransportSpec::W {
            q: 1.0,
            p: 3.0,
            n: 3,
        },
        100_000,
        12,
        1e-3,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let a = pushforward_test(&TransportSpec::S { p: 3.0, n: 8 }, 20_000, 5, 1e-3).unwrap();
    let b = pushforward_test(&TransportSpec::S { p: 3.0, n: 8 }, 20_000, 5, 1e-3).unwrap();
    assert!(a.pass);
    assert_eq!(a, b);
}

#[test]
fn ks_rejects_wrong_target() {
    // images of T_{2,4}, compared with the radial law of the l_3 ball
    use iclab::measures::{sample_nu_pn, LpBall};
    let batch = sample_nu_pn(2.0, 4, 20_000, 9).unwrap();
    let mut radii: Vec<f64> = (0..batch.count())
        .map(|i| lp_norm(&t_pn(2.0, batch.row(i)).unwrap(), 3.0))
        .collect();
    let wrong = LpBall::new(3.0, 4).unwrap();
    let r = iclab::stats::ks_test(&mut radii, |s| wrong.radial_cdf(s), 1e-3);
    assert!(!r.pass);
}

#[test]
fn lipschitz_examples() {
    let r = lipschitz_scan(
        &TransportSpec::T { p: 2.0, n: 8 },
        2.0,
        2.0,
        LipschitzBound::Constant { l: 2.0 },
        30_000,
        1,
    )
    .unwrap();
    assert!(r.pass && r.max_ratio <= 1.0);
    let r = lipschitz_scan(
        &TransportSpec::S { p: 4.0, n: 16 },
        2.0,
        2.0,
        LipschitzBound::Constant { l: 4.0 },
        30_000,
        2,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    // a false constant is caught
    let r = lipschitz_scan(
        &TransportSpec::T { p: 2.0, n: 8 },
        2.0,
        2.0,
        LipschitzBound::Constant { l: 0.05 },
        3_000,
        1,
    )
    .unwrap();
    assert!(!r.pass);
}

#[test]
fn scaled_gap_series_matches_direct() {
    for &(p, n) in &[(2.0, 1usize), (3.0, 8), (5.0, 64), (1.5, 2)] {
        let s = 0.999f64.powf(1.0 / p);
        let direct = (f_pn_ratio(p, n, s).unwrap() - f_pn_deriv(p, n, s).unwrap()) / s.powf(p);
        assert_relative_eq!(
            f_pn_scaled_gap(p, n, s).unwrap(),
            direct,
            max_relative = 1e-9
        );
    }
}

#[test]
fn lipschitz_other_bounds() {
    let r = lipschitz_scan(
        &TransportSpec::T { p: 1.5, n: 8 },
        2.0,
        2.0,
        LipschitzBound::TwoNormSandwich,
        20_000,
        3,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let r = lipschitz_scan(
        &TransportSpec::S { p: 3.0, n: 8 },
        2.0,
        2.0,
        LipschitzBound::SplitW,
        20_000,
        4,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let r = lipschitz_scan(
        &TransportSpec::S { p: 3.0, n: 8 },
        2.0,
        2.0,
        LipschitzBound::MixedBall { t: 0.5 },
        20_000,
        5,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let r = lipschitz_scan(
        &TransportSpec::STilde { p: 4.0, n: 8 },
        2.0,
        2.0,
        LipschitzBound::Constant { l: 18.0 },
        20_000,
        6,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let r = lipschitz_scan(
        &TransportSpec::W {
            q: 1.0,
            p: 3.0,
            n: 4,
        },
        2.0,
        2.0,
        LipschitzBound::Constant { l: 2.0 },
        20_000,
        7,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    assert!(lipschitz_scan(
        &TransportSpec::T { p: 2.0, n: 2 },
        2.0,
        2.0,
        LipschitzBound::SplitW,
        10,
        1
    )
    .is_err());
}

#[test]
fn bound_sweeps_pass() {
    for id in BOUND_IDS {
        let r = bound_sweep(id).unwrap();
        assert!(r.pass, "{id}: {r:?}");
    }
    assert!(bound_sweep("nope").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn w_inverse(p in 1.0f64..6.0, q in 1.0f64..6.0, x in -10.0f64..10.0) {
        let y = w_pq(p, q, x).unwrap();
        let back = w_pq(q, p, y).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0));
    }

    #[test]
    fn w_odd_and_increasing(p in 1.0f64..6.0, q in 1.0f64..6.0, x in 0.0f64..8.0, d in 1e-3f64..1.0) {
        let a = w_pq(p, q, x).unwrap();
        prop_assert!((a + w_pq(p, q, -x).unwrap()).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(w_pq(p, q, x + d).unwrap() > a);
    }

    #[test]
    fn f_increasing(p in 1.0f64..6.0, n in 1usize..80, s in 1e-3f64..10.0, d in 1e-3f64..1.0) {
        let (a, b) = (f_pn(p, n, s).unwrap(), f_pn(p, n, s + d).unwrap());
        // strict until the lower gamma ratio saturates at 1 in double precision
        if (s + d).powf(p) < n as f64 / p + 25.0 {
            prop_assert!(b > a);
        } else {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn t_norm_relation(p in 1.0f64..6.0, x in proptest::collection::vec(-5.0f64..5.0, 1..10)) {
        let y = t_pn(p, &x).unwrap();
        let s = lp_norm(&x, p);
        let want = f_pn(p, x.len(), s).unwrap();
        prop_assert!((lp_norm(&y, p) - want).abs() <= 1e-12 * want.max(1e-300));
    }
}
