use ermakov_core::expr::Func;
use ermakov_core::{parse, Expr};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => Just(Expr::var("x")),
        2 => (-3.0f64..3.0).prop_map(|v| Expr::num((v * 8.0).round() / 8.0)),
        1 => Just(Expr::Pi),
    ]
}

// Smooth on the sampling interval, so finite differences are meaningful.
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, Expr::add(Expr::num(2.0), Expr::sin(b)))),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| Expr::powi(a, n)),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(|a| Expr::call(Func::Atan, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, Expr::sin(a))),
            inner
                .clone()
                .prop_map(|a| Expr::call(Func::Sqrt, Expr::add(Expr::one(), Expr::powi(a, 2)))),
            inner.prop_map(|a| Expr::call(Func::Log, Expr::add(Expr::num(1.5), Expr::cos(a)))),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_central_difference(e in smooth(), x in -1.5f64..1.5) {
        let value = e.eval_at("x", x).unwrap();
        prop_assume!(value.abs() < 1e4);
        let d = e.differentiate("x").eval_at("x", x).unwrap();
        prop_assume!(d.abs() < 1e4);
        // Richardson-extrapolated central difference
        let step = 1e-3;
        let diff = |h: f64| (e.eval_at("x", x + h).unwrap() - e.eval_at("x", x - h).unwrap()) / (2.0 * h);
        let fd = (4.0 * diff(step / 2.0) - diff(step)) / 3.0;
        prop_assert!(close(d, fd, 1e-6), "{e}: symbolic {d}, numeric {fd}");
    }

    #[test]
    fn simplify_preserves_value(e in smooth(), x in -1.5f64..1.5) {
        let before = e.eval_at("x", x).unwrap();
        prop_assume!(before.is_finite() && before.abs() < 1e6);
        let after = e.simplify().eval_at("x", x).unwrap();
        prop_assert!(close(before, after, 1e-10), "{e}: {before} vs {after}");
    }

    #[test]
    fn printing_round_trips(e in smooth()) {
        let once = parse(&e.to_string()).unwrap();
        let twice = parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(&once, &e, "{}", e);
    }

    #[test]
    fn derivative_of_simplified_agrees(e in smooth(), x in -1.0f64..1.0) {
        let a = e.differentiate("x").eval_at("x", x).unwrap();
        let b = e.simplify().differentiate("x").simplify().eval_at("x", x).unwrap();
        prop_assume!(a.is_finite() && a.abs() < 1e6);
        prop_assert!(close(a, b, 1e-9), "{e}: {a} vs {b}");
    }
}
