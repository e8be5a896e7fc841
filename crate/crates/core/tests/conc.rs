use iclab::conc::*;
use iclab::measures::{Law, Measure1D};
use iclab::rng;
use iclab::transports::lp_norm;
use iclab::Error;
use proptest::prelude::*;
use rand::Rng as _;

fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn e1(n: usize, a: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = a;
    v
}

/// Variational inequality `<v - y, z - y> <= 0` against random points `z` of `r B_q`.
fn assert_projection(v: &[f64], r: f64, q: f64, seed: u64) {
    let y = project_lp_ball(v, r, q);
    assert!(lp_norm(&y, q) <= r * (1.0 + 1e-8), "{y:?} outside the ball");
    let mut g = rng::stream(seed, 0);
    let best = d2(v, &y);
    for _ in 0..2000 {
        let mut z: Vec<f64> = (0..v.len()).map(|_| g.gen_range(-1.0..1.0)).collect();
        let s = lp_norm(&z, q);
        let k = r * g.gen::<f64>().powf(0.2) / s;
        z.iter_mut().for_each(|c| *c *= k);
        assert!(d2(v, &z) >= best - 1e-7, "point closer than the projection");
        let ip: f64 = v.iter().zip(&y).zip(&z).map(|((a, b), c)| (a - b) * (c - b)).sum();
        assert!(ip <= 1e-6 * (1.0 + best), "variational inequality {ip}");
    }
}

#[test]
fn projections_satisfy_variational_inequality() {
    let mut g = rng::stream(5, 1);
    for k in 0..12 {
        let n = 2 + k % 5;
        let v: Vec<f64> = (0..n).map(|_| g.gen_range(-4.0..4.0)).collect();
        for q in [1.0, 1.3, 2.0, 3.0, f64::INFINITY] {
            assert_projection(&v, 1.0, q, k as u64);
        }
    }
}

#[test]
fn l1_projection_matches_soft_threshold_oracle() {
    // v = (3, 1, -0.5), r = 2: threshold theta = 1 keeps only the first coordinate
    let y = project_l1_ball(&[3.0, 1.0, -0.5], 2.0);
    assert!(d2(&y, &[2.0, 0.0, 0.0]) < 1e-12);
    let y = project_l1_ball(&[2.0, 2.0], 2.0);
    assert!(d2(&y, &[1.0, 1.0]) < 1e-12);
    let inside = [0.2, -0.3];
    assert_eq!(project_l1_ball(&inside, 1.0), inside.to_vec());
}

#[test]
fn membership_after_projection() {
    assert!((dist2_to_ball(&[2.0, 0.0], 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    let a = SetSpec::ball(vec![0.0, 0.0], 1.0, 1.0).unwrap();
    let e = EnlargementSpec::ball(1.0, 2.0).unwrap();
    let s = Enlarged::new(&a, Some(&e)).unwrap();
    assert!(s.contains(&[2.0, 0.0]));
    assert!(!s.contains(&[2.0 + 1e-6, 0.0]));
    assert!(s.contains(&[1.2, 1.2]));
    // (1.5, 1.5) is at distance 2/sqrt(2) from B_1
    assert!(!s.contains(&[1.5, 1.5]));
}

#[test]
fn enlarged_ball_matches_brute_force_distance() {
    let mut g = rng::stream(11, 0);
    let a = SetSpec::ball(vec![1.0, -0.5, 0.25], 1.5, 2.0).unwrap();
    for q in [1.0, 1.5, 3.0] {
        let e = EnlargementSpec::sum(&[(0.8, q)]).unwrap();
        let s = Enlarged::new(&a, Some(&e)).unwrap();
        for _ in 0..400 {
            let x: Vec<f64> = (0..3).map(|_| g.gen_range(-4.0..4.0)).collect();
            let v: Vec<f64> = x.iter().zip([1.0, -0.5, 0.25]).map(|(a, b)| a - b).collect();
            let d = dist2_to_ball(&v, 0.8, q).unwrap();
            if (d - 1.5).abs() > 1e-6 {
                assert_eq!(s.contains(&x), d < 1.5, "q={q} x={x:?}");
            }
        }
    }
}

#[test]
fn box_enlargement_membership() {
    let a = SetSpec::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let e = EnlargementSpec::sum(&[(0.5, 1.0), (0.5, 1.0)]).unwrap();
    let s = Enlarged::new(&a, Some(&e)).unwrap();
    assert!(s.contains(&[1.5, 1.5]));
    assert!(!s.contains(&[1.6, 1.5]));
    assert!(s.contains(&[-1.0, 0.5]));
}

#[test]
fn unsupported_combinations_are_reported() {
    let a = SetSpec::ball(vec![0.0; 3], 1.0, 1.5).unwrap();
    let e = EnlargementSpec::sum(&[(1.0, 1.0)]).unwrap();
    let err = Enlarged::new(&a, Some(&e)).unwrap_err();
    let msg = format!("{err}");
    assert!(matches!(err, Error::Unsupported(_)) && msg.contains("supported forms"), "{msg}");
    let slab = SetSpec::Slab { n: 3, i: 0, u: 1.0 };
    assert!(matches!(Enlarged::new(&slab, Some(&e)), Err(Error::Unsupported(_))));
    let three = EnlargementSpec::intersection(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).unwrap();
    assert!(matches!(three.support(&[1.0, 1.0, 0.0]), Err(Error::Unsupported(_))));
    assert!(EnlargementSpec::sum(&[]).is_err());
    assert!(EnlargementSpec::sum(&[(0.0, 2.0)]).is_err());
}

/// `max <u, x>` over boundary points of the intersection along random directions.
fn brute_support(u: &[f64], a: (f64, f64), b: (f64, f64), seed: u64) -> f64 {
    let mut g = rng::stream(seed, 3);
    let mut best: f64 = 0.0;
    for _ in 0..200_000 {
        let d: Vec<f64> = u.iter().map(|c| c.signum() * g.gen::<f64>()).collect();
        let k = (a.0 / lp_norm(&d, a.1)).min(b.0 / lp_norm(&d, b.1));
        best = best.max(u.iter().zip(&d).map(|(x, y)| x * y * k).sum());
    }
    best
}

#[test]
fn intersection_support_matches_brute_force() {
    let cases = [
        (vec![1.0, 0.7], (1.0, 4.0), (0.9, 2.0)),
        (vec![0.6, 0.8, 0.3], (2.0, 3.0), (1.6, 2.0)),
        (vec![1.0, 1.0], (1.0, 1.5), (0.8, 2.0)),
    ];
    for (i, (u, a, b)) in cases.iter().enumerate() {
        let exact = support_two_balls(u, *a, *b).unwrap();
        let brute = brute_support(u, *a, *b, i as u64);
        assert!(brute <= exact + 1e-9 && brute >= exact - 5e-3, "{exact} vs {brute}");
    }
    // axis direction: the smaller radius
    let h = support_two_balls(&[0.0, 2.0], (1.0, 4.0), (0.5, 2.0)).unwrap();
    assert!((h - 1.0).abs() < 1e-15);
}

#[test]
fn halfspace_through_origin_is_half() {
    for law in [Law::nu_pn(1.0, 4).unwrap(), Law::ball(1.5, 4).unwrap()] {
        let a = SetSpec::coordinate_halfspace(4, 2, 0.0).unwrap();
        let m = mc_measure(&law, &a, None, &McOptions::default()).unwrap();
        assert_eq!((m.mean, m.se), (0.5, 0.0));
        let tilted = SetSpec::halfspace(vec![1.0, -2.0, 0.5, 1.0], 0.0).unwrap();
        let opts = McOptions {
            samples: 200_000,
            seed: 3,
            ..McOptions::default()
        };
        let m = mc_measure(&law, &tilted, None, &opts).unwrap();
        assert!((m.mean - 0.5).abs() < 4.0 * m.se, "{m:?}");
    }
}

#[test]
fn interval_measure_matches_cdf() {
    let law = Law::nu_pn(1.0, 1).unwrap();
    let nu = Measure1D::nu();
    let (x0, s) = (0.7, 0.9);
    let exact = nu.cdf(x0 + s) - nu.cdf(x0 - s);
    let a = SetSpec::ball(vec![x0], s, 1.0).unwrap();
    let opts = McOptions {
        samples: 400_000,
        seed: 9,
        ..McOptions::default()
    };
    let m = mc_measure(&law, &a, None, &opts).unwrap();
    assert!((m.mean - exact).abs() < 3.0 * m.se, "{} vs {exact}", m.mean);
}

#[test]
fn importance_sampling_matches_far_interval() {
    let law = Law::nu_pn(1.0, 1).unwrap();
    let nu = Measure1D::nu();
    let exact = nu.cdf(9.0) - nu.cdf(7.0);
    let a = SetSpec::ball(vec![8.0], 1.0, 2.0).unwrap();
    let opts = McOptions {
        samples: 200_000,
        seed: 1,
        force_mc: true,
        shifts: vec![vec![7.0], vec![8.0]],
    };
    let m = mc_measure(&law, &a, None, &opts).unwrap();
    assert!((m.mean - exact).abs() < 3.0 * m.se && m.se < 0.01 * exact, "{m:?} vs {exact}");
}

#[test]
fn exact_reductions_agree_with_monte_carlo() {
    let mut k = 0;
    // the volume-one l_3 ball in R^3 has radius about 0.57
    for (law, n, scale) in [(Law::nu_pn(1.0, 3).unwrap(), 3, 1.0), (Law::ball(3.0, 3).unwrap(), 3, 0.25)] {
        for c in [-1.0, 0.3, 1.2].map(|c| c * scale) {
            for e in [
                EnlargementSpec::sum(&[(0.5 * scale, 2.0), (0.2 * scale, 1.0)]).unwrap(),
                EnlargementSpec::intersection(&[(0.5 * scale, 3.0), (0.4 * scale, 2.0)]).unwrap(),
            ] {
                let a = SetSpec::coordinate_halfspace(n, 1, c).unwrap();
                let exact = mc_measure(&law, &a, Some(&e), &McOptions::default()).unwrap();
                assert_eq!(exact.se, 0.0);
                let opts = McOptions {
                    samples: 100_000,
                    seed: k,
                    force_mc: true,
                    shifts: vec![],
                };
                k += 1;
                let mc = mc_measure(&law, &a, Some(&e), &opts).unwrap();
                assert!((mc.mean - exact.mean).abs() < 3.5 * mc.se, "{mc:?} vs {exact:?}");
            }
        }
    }
}

#[test]
fn two_level_example() {
    // x = 0, t = 1: nu(-inf, 6 sqrt 2 + 18] >= nu(-inf, 1]
    let lat = ExactLattice {
        p: vec![1.0],
        n: vec![2],
        x: vec![0.0],
        t: vec![1.0],
    };
    let r = two_level_exp(&lat).unwrap();
    assert!(r.pass);
    let law = Law::nu_pn(1.0, 2).unwrap();
    let a = SetSpec::coordinate_halfspace(2, 0, 0.0).unwrap();
    let e = EnlargementSpec::sum(&[(6.0 * 2f64.sqrt(), 2.0), (18.0, 1.0)]).unwrap();
    let v = mc_measure(&law, &a, Some(&e), &McOptions::default()).unwrap().mean;
    let want = Measure1D::nu().cdf(6.0 * 2f64.sqrt() + 18.0);
    assert!((v - want).abs() < 1e-15);
}

#[test]
fn small_norm_probability_value() {
    let v = small_norm_probability(1.0, 10, 0.1).unwrap();
    assert!((v / 1.1142e-7 - 1.0).abs() < 1e-4, "{v}");
    let m = mala_norma(1.0, 10, 0.1, 4.0 * std::f64::consts::E, &(5..=40).collect::<Vec<_>>(), 200_000, 2).unwrap();
    assert!(m.z.abs() < 3.0, "{m:?}");
    assert!(m.max_ratio < 1.0);
    assert!(v > (4.0 * std::f64::consts::E).powi(-10));
    // at the reported threshold the bound is met with equality
    let c = small_norm_threshold(1.0, 10, 4.0 * std::f64::consts::E).unwrap();
    let at = small_norm_probability(1.0, 10, c).unwrap();
    assert!((at * (4.0 * std::f64::consts::E).powi(10) - 1.0).abs() < 1e-8);
}

#[test]
fn cheeger_of_exponential_is_one() {
    assert!((cheeger_constant(&Measure1D::nu()).unwrap() - 1.0).abs() < 1e-9);
    // N(0,1): the infimum sits at the median, 2 phi(0)
    let k = cheeger_constant(&Measure1D::nu_p(2.0).unwrap().affine(0.0, 2f64.sqrt()).unwrap()).unwrap();
    assert!((k - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-9, "{k}");
}

#[test]
fn second_moment_at_zero_is_tied() {
    let c = second_moment(&e1(4, 1.0), 2.0, 0.0, 20_000, 1).unwrap();
    assert_eq!(c.result.margin, 0.0);
    assert!((c.result.lhs.mean - c.result.rhs.mean).abs() < 1e-15);
}

#[test]
fn hypotheses_are_validated() {
    let near = SetSpec::ball(e1(8, 3.0), 1.0, 2.0).unwrap();
    assert!(matches!(single_push(&near, 1.0, 1000, 0), Err(Error::Hypothesis(_))));
    let far = SetSpec::ball(e1(8, 400.0), 1.0, 2.0).unwrap();
    assert!(matches!(push_pop(&far, 5.0, 1000, 0), Err(Error::Hypothesis(_))));
    assert!(matches!(push_pop(&near, 10.0, 1000, 0), Err(Error::Hypothesis(_))));
    assert!(matches!(exp_slab(&near, 0, 0.5, 1.0, 1000, 0), Err(Error::Hypothesis(_))));
    assert!(matches!(lp_push_pop(&near, 3.0, 1.0, 1000, 0), Err(Error::Hypothesis(_))));
    assert!(matches!(crude_bound_case(1.0, 9, 2.0, 1000, 0), Err(Error::Hypothesis(_))));
    let lat = ExactLattice {
        p: vec![3.0],
        ..ExactLattice::default()
    };
    assert!(matches!(magia(&lat), Err(Error::Hypothesis(_))));
    let lat = ExactLattice {
        p: vec![1.5],
        ..ExactLattice::default()
    };
    assert!(matches!(gauss_profile(&lat), Err(Error::Hypothesis(_))));
}

#[test]
fn push_gain_grows_with_t() {
    let n = 8;
    // a ball whose nearest point is beyond 5 t sqrt(n) for every t used
    let a = SetSpec::ball(e1(n, 5.0 * 3.0 * (n as f64).sqrt() + 3.0), 2.0, 2.0).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for t in [1.0, 2.0, 3.0] {
        let c = single_push(&a, t, 100_000, 4).unwrap();
        // log_gain is net of e^{t/2}/8; add it back for the raw enlargement gain
        let raw = c.result.log_gain + t / 2.0 - 8f64.ln();
        assert!(raw > prev, "t={t}: {raw} <= {prev}");
        assert!(c.margin() > 0.0);
        prev = raw;
    }
}

#[test]
fn registry_covers_ids() {
    let sizes = ConcSizes {
        samples: 4_000,
        qmc_points: 1 << 12,
        moment_samples: 4_000,
    };
    for id in CONC_CHECK_IDS {
        let r = conc_suite_check(id, 1, &sizes).unwrap();
        assert_eq!(&r.id, id);
    }
    assert!(matches!(conc_suite_check("nope", 1, &sizes), Err(Error::UnknownId(_))));
}

#[test]
fn exact_checks_pass_on_the_lattice() {
    let sizes = ConcSizes::default();
    for id in ["two_level_exp", "magia", "ci_halfspace_mu", "gauss_profile", "cheeger_1d"] {
        let r = conc_suite_check(id, 42, &sizes).unwrap();
        assert!(r.pass, "{id}: {r:?}");
        if let Some(w) = r.estimates.get("within_bracket") {
            assert_eq!(*w, 1.0, "{id}");
        }
    }
}

#[test]
fn slab_volume_small() {
    for (k, (a, i, u, t)) in slab_volume_cases().unwrap().iter().enumerate().take(4) {
        let c = slab_volume(a, *i, *u, *t, 1 << 14, k as u64).unwrap();
        assert!(c.margin() > -3.0, "{c:?}");
    }
}

#[test]
fn radical_inverse_values() {
    assert_eq!(radical_inverse(1, 2), 0.5);
    assert_eq!(radical_inverse(6, 2), 0.375);
    assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
}

#[test]
fn set_specs_round_trip_json() {
    let s = SetSpec::Intersection {
        sets: vec![
            SetSpec::boxed(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap(),
            SetSpec::Complement {
                set: Box::new(SetSpec::ball(vec![0.5, 0.5], 0.2, 2.0).unwrap()),
            },
        ],
    };
    let j = serde_json::to_string(&s).unwrap();
    assert_eq!(serde_json::from_str::<SetSpec>(&j).unwrap(), s);
    assert!(s.contains(&[0.9, 1.9]));
    assert!(!s.contains(&[0.5, 0.5]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_sublinear(u in prop::collection::vec(-3.0f64..3.0, 3), v in prop::collection::vec(-3.0f64..3.0, 3), k in 0.1f64..4.0) {
        for e in [
            EnlargementSpec::sum(&[(0.7, 1.0), (1.3, 2.0), (0.4, 3.0)]).unwrap(),
            EnlargementSpec::intersection(&[(1.0, 3.0), (0.8, 2.0)]).unwrap(),
        ] {
            let hu = e.support(&u).unwrap();
            let hv = e.support(&v).unwrap();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            prop_assert!(e.support(&w).unwrap() <= hu + hv + 1e-7);
            let su: Vec<f64> = u.iter().map(|a| k * a).collect();
            prop_assert!((e.support(&su).unwrap() - k * hu).abs() <= 1e-7 * (1.0 + k * hu));
        }
    }

    #[test]
    fn enlargement_contains_set(x in prop::collection::vec(-3.0f64..3.0, 4), r in 0.05f64..2.0) {
        let a = SetSpec::ball(vec![0.5, 0.0, -0.5, 1.0], 1.5, 2.0).unwrap();
        let e = EnlargementSpec::ball(r, 1.0).unwrap();
        let s = Enlarged::new(&a, Some(&e)).unwrap();
        if a.contains(&x) {
            prop_assert!(s.contains(&x));
        }
    }
}
