use num_complex::Complex;
use proptest::prelude::*;

use trivml::calculus::{caputo_derivative_univariate, rl_derivative_univariate, FracOrder};
use trivml::contour::{eval_hankel_contour, ContourSpec};
use trivml::fde::{particular_kernel_fox_wright, solve, Forcing, IvpSpec};
use trivml::laplace::{invert_univariate, laplace_closed_form, transform_abscissa};
use trivml::ml::{eval_prabhakar, eval_trivariate, eval_univariate, LambdaTriple, MLParams, SeriesControl};
use trivml::oracle::brute_bivariate;
use trivml::special::{log_gamma, reciprocal_gamma};

fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn order() -> impl Strategy<Value = f64> {
    0.7f64..1.5
}

fn params() -> impl Strategy<Value = MLParams<f64>> {
    (order(), order(), order(), 0.5f64..2.0, 0.5f64..2.0)
        .prop_map(|(a, b, g, d, e)| MLParams::new(a, b, g, d, e).unwrap())
}

fn arg(radius: f64) -> impl Strategy<Value = Complex<f64>> {
    (0.0..radius, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| Complex::from_polar(r, t))
}

fn lambdas() -> impl Strategy<Value = LambdaTriple<f64>> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| LambdaTriple::new(a, b, c))
}

proptest! {
    #[test]
    fn permuting_index_argument_pairs(p in params(), u in arg(1.0), v in arg(1.0), w in arg(1.0)) {
        let ctrl = SeriesControl::default();
        let a = eval_trivariate(&p, u, v, w, &ctrl).unwrap().value;
        let q = MLParams { alpha: p.beta, beta: p.gamma, gamma: p.alpha, ..p };
        let b = eval_trivariate(&q, v, w, u, &ctrl).unwrap().value;
        prop_assert!(rel(b, a) <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn dropping_arguments_reduces(p in params(), u in arg(2.0), v in arg(2.0)) {
        let ctrl = SeriesControl::default();
        let zero = Complex::new(0.0, 0.0);
        let tri = eval_trivariate(&p, u, v, zero, &ctrl).unwrap().value;
        let two = brute_bivariate(p.alpha, p.beta, p.delta, p.eta, u, v, 90);
        prop_assert!(rel(tri, two) <= 1e-11);
        let one = eval_trivariate(&p, u, zero, zero, &ctrl).unwrap().value;
        let pr = eval_prabhakar(p.alpha, p.delta, p.eta, u, &ctrl).unwrap().value;
        prop_assert!(rel(one, pr) <= 1e-11);
    }

    #[test]
    fn unit_parameters_give_exponential(u in -2.0f64..2.0, v in -2.0f64..2.0, w in -2.0f64..2.0) {
        let ctrl = SeriesControl::default();
        let ones = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = |x: f64| Complex::new(x, 0.0);
        let got = eval_trivariate(&ones, c(u), c(v), c(w), &ctrl).unwrap().value;
        let want = (u + v + w).exp();
        prop_assert!((got - want).norm() <= 1e-10 * want);
    }

    #[test]
    fn reciprocal_gamma_inverts_log_gamma(x in 1e-3f64..150.0) {
        let prod = reciprocal_gamma(x) * log_gamma(x).unwrap().exp();
        prop_assert!((prod - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn caputo_and_rl_shift_agree_past_one(
        p in params(), lam in lambdas(), nu in 0.01f64..0.99, y in 0.01f64..2.0, extra in 0.01f64..1.0,
    ) {
        let ctrl = SeriesControl::default();
        let p = p.with_delta(1.0 + extra);
        let o = FracOrder::at_origin(nu).unwrap();
        let c = caputo_derivative_univariate(&p, &lam, &o, y, &ctrl).unwrap();
        let r = rl_derivative_univariate(&p, &lam, &o, y, &ctrl).unwrap();
        prop_assert!((c - r).abs() <= 1e-10 * r.abs().max(1.0));
    }

    #[test]
    fn transform_is_real_and_smooth_past_abscissa(p in params(), lam in lambdas(), step in 0.05f64..5.0) {
        let s0 = transform_abscissa(&p, &lam) + 0.1;
        let c = |x: f64| Complex::new(x, 0.0);
        let a = laplace_closed_form(&p, &lam, c(s0 + step)).unwrap().value;
        let b = laplace_closed_form(&p, &lam, c(s0 + step * (1.0 + 1e-7))).unwrap().value;
        prop_assert!(a.im.abs() <= 1e-12 * a.norm());
        prop_assert!((a - b).norm() <= 1e-4 * a.norm());
    }

    #[test]
    fn solution_starts_at_initial_value(y0 in -10.0f64..10.0, l1 in -2.0f64..2.0, l2 in -2.0f64..2.0, l3 in -2.0f64..2.0) {
        let spec = IvpSpec::new((0.9, 0.5, 0.3), (l1, l2, l3), y0).unwrap();
        let tr = solve(&spec, &Forcing::Zero, &[0.0, 0.5], &SeriesControl::default()).unwrap();
        prop_assert_eq!(tr.points[0].y, y0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hankel_contour_matches_series(p in params(), u in arg(1.0), v in arg(1.0), w in arg(1.0)) {
        let a = eval_trivariate(&p, u, v, w, &SeriesControl::default()).unwrap().value;
        let h = eval_hankel_contour(&p, u, v, w, &ContourSpec::default()).unwrap();
        prop_assert!(h.converged);
        prop_assert!(rel(h.value, a) <= 1e-8, "{} vs {a}", h.value);
    }

    #[test]
    fn inversion_recovers_time_domain(p in params(), lam in lambdas(), t in 0.25f64..1.5) {
        let inv = invert_univariate(&p, &lam, t, 48).unwrap();
        let ser = eval_univariate(&p, &lam, t, &SeriesControl::default()).unwrap().value.re;
        prop_assert!((inv.value - ser).abs() <= 1e-6 * ser.abs().max(1.0));
    }

    #[test]
    fn fox_wright_kernel_is_the_ml_kernel(
        a in 0.6f64..1.0, fb in 0.2f64..0.6, fg in 0.2f64..0.8, l1 in -1.0f64..1.0, l2 in -1.0f64..1.0, l3 in -1.0f64..1.0, z in 0.01f64..1.0,
    ) {
        let b = a * fb;
        let g = b * fg;
        let spec = IvpSpec::new((a, b, g), (l1, l2, l3), 1.0).unwrap();
        let ctrl = SeriesControl::default();
        let k = particular_kernel_fox_wright(&spec, z, &ctrl).unwrap();
        let p = spec.solution_params(a);
        let c = |x: f64| Complex::new(x, 0.0);
        let e = eval_trivariate(&p, c(l1 * z.powf(p.alpha)), c(l2 * z.powf(p.beta)), c(l3 * z.powf(p.gamma)), &ctrl).unwrap();
        prop_assert!((k - e.value.re).abs() <= 1e-10 * e.value.re.abs().max(1.0));
    }
}
