use iclab::convex::*;
use iclab::measures::{lambda_nu, lambda_star_nu};
use proptest::prelude::*;

fn quad_grid(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::sample(&Grid::span(a, b, n).unwrap(), f).unwrap()
}

// convex sequence with integer slopes on a step-`dx` grid
fn integer_slope_convex(x0: f64, dx: f64, slopes: &[i32], base: f64) -> GridFunction {
    let mut s = slopes.to_vec();
    s.sort();
    let mut v = vec![base];
    for k in s {
        let last = *v.last().unwrap();
        v.push(last + k as f64 * dx);
    }
    GridFunction::new(x0, dx, v).unwrap()
}

#[test]
fn half_square_is_self_conjugate() {
    let f = quad_grid(-10.0, 10.0, 2001, |x| 0.5 * x * x);
    let dual = Grid::span(-10.0, 10.0, 1001).unwrap();
    let lf = legendre_transform(&f, &dual).unwrap();
    for j in 0..dual.n {
        let y = dual.x(j);
        assert!((lf.values[j] - 0.5 * y * y).abs() <= f.dx * f.dx, "y={y}");
    }
}

#[test]
fn conjugate_of_absolute_value() {
    let f = quad_grid(-10.0, 10.0, 2001, f64::abs);
    let dual = Grid::span(-3.0, 3.0, 61).unwrap();
    let lf = legendre_transform(&f, &dual).unwrap();
    for j in 0..dual.n {
        let y = dual.x(j);
        let want = if y.abs() <= 1.0 { 0.0 } else { 10.0 * (y.abs() - 1.0) };
        assert!((lf.values[j] - want).abs() < 1e-12, "y={y} got {}", lf.values[j]);
    }
}

#[test]
fn conjugate_of_lambda_nu_is_closed_form() {
    let f = quad_grid(-1.0 + 1e-6, 1.0 - 1e-6, 200_001, lambda_nu);
    let dual = Grid::span(-5.0, 5.0, 201).unwrap();
    let lf = legendre_transform(&f, &dual).unwrap();
    for j in 0..dual.n {
        let y = dual.x(j);
        let want = (1.0 + y * y).sqrt() - 1.0 - (((1.0 + y * y).sqrt() + 1.0) / 2.0).ln();
        assert!((lf.values[j] - want).abs() < 1e-6, "y={y}");
        assert!((want - lambda_star_nu(y)).abs() < 1e-12);
    }
}

#[test]
fn fast_transform_matches_brute_on_fixed_inputs() {
    let cases = [
        quad_grid(-2.0, 3.0, 501, |x| (x * x).min((x - 1.5).powi(2)) + 0.1 * x),
        quad_grid(-1.0, 1.0, 3, |x| x),
        GridFunction::new(0.0, 0.25, vec![f64::INFINITY, 2.0, 1.0, 1.0, 3.0, f64::INFINITY]).unwrap(),
    ];
    for f in &cases {
        let dual = Grid::span(-20.0, 20.0, 4001).unwrap();
        let a = legendre_transform(f, &dual).unwrap();
        let b = legendre_brute(f, &dual).unwrap();
        assert_eq!(a.values, b.values);
    }
}

#[test]
fn linear_against_convex_kernel() {
    // (v x) [] phi = v x - L phi(v)
    let v = 1.5;
    let f = GridFunction::sample(&Grid::new(-20.0, 0.125, 321).unwrap(), |x| v * x).unwrap();
    let phi = GridFunction::sample(&Grid::new(-3.0, 0.125, 49).unwrap(), |x| x * x).unwrap();
    let lphi = legendre_brute(&phi, &Grid::new(v, 1.0, 2).unwrap()).unwrap().values[0];
    let h = inf_convolution(&f, &phi).unwrap();
    for k in 0..h.len() {
        let x = h.x(k);
        if x.abs() <= 17.0 {
            assert!((h.values[k] - (v * x - lphi)).abs() < 1e-11, "x={x}");
        }
    }
}

#[test]
fn inf_convolution_is_conjugate_of_sum() {
    let dx = 0.5;
    let f = integer_slope_convex(-3.0, dx, &[-3, -1, 0, 0, 2, 5], 1.0);
    let g = integer_slope_convex(1.0, dx, &[-2, -2, 1, 4], -0.5);
    let h = inf_convolution(&f, &g).unwrap();
    let dual = Grid::new(-8.0, 1.0, 17).unwrap();
    let lf = legendre_transform(&f, &dual).unwrap();
    let lg = legendre_transform(&g, &dual).unwrap();
    let sum: Vec<f64> = lf.values.iter().zip(&lg.values).map(|(a, b)| a + b).collect();
    let s = GridFunction::new(dual.x0, dual.dx, sum).unwrap();
    let back = legendre_transform(&s, &h.grid()).unwrap();
    for k in 0..h.len() {
        assert!((back.values[k] - h.values[k]).abs() < 1e-8, "k={k}");
    }
}

#[test]
fn conjugate_result_is_convex() {
    let f = quad_grid(-4.0, 4.0, 801, |x| (3.0 * x).sin() + 0.2 * x * x);
    let lf = legendre_transform(&f, &Grid::span(-6.0, 6.0, 1201).unwrap()).unwrap();
    assert!(lf.is_convex(1e-9));
}

#[test]
fn lambda_star_nu_biconjugate() {
    let f = quad_grid(-20.0, 20.0, 8001, lambda_star_nu);
    let r = biconjugate_check(&f, 20001, 1e-6).unwrap();
    assert!(r.convex && r.pass, "{r:?}");
    assert!(r.max_abs_diff < 1e-6);
}

// lower convex envelope at node k: min over chords through k
fn envelope_brute(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let mut best = v[k];
            for i in 0..=k {
                for j in k..n {
                    if i < j {
                        let t = (k - i) as f64 / (j - i) as f64;
                        best = best.min((1.0 - t) * v[i] + t * v[j]);
                    }
                }
            }
            best
        })
        .collect()
}

#[test]
fn biconjugate_is_convex_envelope() {
    let f = quad_grid(-3.0, 6.0, 181, |x| (x * x).min((x - 3.0) * (x - 3.0)));
    let (lo, hi) = f.slope_range();
    let dual = Grid::span(lo - 1e-9, hi + 1e-9, 40_001).unwrap();
    let llf = legendre_transform(&legendre_transform(&f, &dual).unwrap(), &f.grid()).unwrap();
    let env = envelope_brute(&f.values);
    for k in 0..f.len() {
        assert!(llf.values[k] <= f.values[k] + 1e-9);
        assert!((llf.values[k] - env[k]).abs() < 1e-4, "k={k} {} {}", llf.values[k], env[k]);
    }
    let mid = ((1.5 - f.x0) / f.dx).round() as usize;
    assert!(llf.values[mid] < f.values[mid] - 2.0);
}

#[test]
fn grid_errors() {
    assert!(Grid::new(0.0, 0.0, 4).is_err());
    assert!(Grid::new(0.0, 1.0, 1).is_err());
    assert!(GridFunction::new(0.0, 1.0, vec![f64::INFINITY; 3]).is_err());
    assert!(GridFunction::new(0.0, 1.0, vec![0.0, f64::NAN]).is_err());
    let f = GridFunction::new(0.0, 1.0, vec![0.0, 1.0]).unwrap();
    let g = GridFunction::new(0.0, 0.5, vec![0.0, 1.0]).unwrap();
    assert!(matches!(inf_convolution(&f, &g), Err(iclab::Error::GridMismatch(_))));
}

#[test]
fn eval_interpolates() {
    let f = GridFunction::new(0.0, 1.0, vec![0.0, 2.0, 8.0]).unwrap();
    assert_eq!(f.eval(0.5), 1.0);
    assert_eq!(f.eval(2.0), 8.0);
    assert!(f.eval(2.5).is_infinite());
}

fn arb_values(convex: bool) -> impl Strategy<Value = Vec<f64>> {
    (2usize..60, prop::collection::vec(-40i32..40, 60), -5.0f64..5.0).prop_map(move |(n, incs, base)| {
        if convex {
            let mut s: Vec<i32> = incs[..n - 1].to_vec();
            s.sort();
            let mut v = vec![base];
            for k in s {
                let last = *v.last().unwrap();
                v.push(last + k as f64 * 0.25);
            }
            v
        } else {
            incs[..n].iter().map(|&k| base + k as f64 * 0.125).collect()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_equals_brute(v in arb_values(false), pad_l in 0usize..3, pad_r in 0usize..3, m in 2usize..200) {
        let mut vals = vec![f64::INFINITY; pad_l];
        vals.extend(&v);
        vals.extend(vec![f64::INFINITY; pad_r]);
        let f = GridFunction::new(-1.0, 0.125, vals).unwrap();
        let dual = Grid::span(-60.0, 60.0, m).unwrap();
        let a = legendre_transform(&f, &dual).unwrap();
        let b = legendre_brute(&f, &dual).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn convex_kernel_path_matches_brute(fv in arb_values(false), gv in arb_values(true)) {
        let f = GridFunction::new(0.5, 0.25, fv).unwrap();
        let g = GridFunction::new(-1.0, 0.25, gv).unwrap();
        let a = inf_convolution(&f, &g).unwrap();
        let b = inf_convolution_convex_kernel(&f, &g).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn fenchel_young(v in arb_values(false), y in -30.0f64..30.0) {
        let f = GridFunction::new(-2.0, 0.125, v).unwrap();
        let lf = legendre_transform(&f, &Grid::new(y, 1.0, 2).unwrap()).unwrap();
        for i in 0..f.len() {
            prop_assert!(f.values[i] + lf.values[0] >= f.x(i) * y - 1e-12 * (1.0 + lf.values[0].abs()));
        }
    }
}
