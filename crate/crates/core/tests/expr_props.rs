use proptest::prelude::*;
use ulamkit::expr::{BinOp, Expr, Func};

fn one_plus_square(e: Expr) -> Expr {
    Expr::bin(BinOp::Add, Expr::num(1.0), Expr::bin(BinOp::Pow, e, Expr::num(2.0)))
}

/// Real expressions without poles or branch cuts on the real line, with rates
/// moderate enough for the reference difference quotient at `|t| ≤ 1`.
fn smooth() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => Just(Expr::T),
        2 => (-1.0f64..1.0).prop_map(Expr::num),
        1 => Just(Expr::Pi),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Div, a, one_plus_square(b))),
            (prop_oneof![Just(Expr::T), inner.clone().prop_map(|a| Expr::call(Func::Atan, a))], 2u8..4)
                .prop_map(|(a, n)| Expr::bin(BinOp::Pow, a, Expr::num(n as f64))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), prop::sample::select(vec![Func::Sin, Func::Cos, Func::Atan, Func::Erf]))
                .prop_map(|(a, f)| Expr::call(f, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, Expr::call(Func::Sin, a))),
            inner.prop_map(|a| Expr::call(Func::Sqrt, one_plus_square(a))),
        ]
    })
}

/// Anything the grammar can express, poles included.
fn any_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::T),
        Just(Expr::Pi),
        Just(Expr::I),
        prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, 10.0, 1e-9, 6.02e23]).prop_map(Expr::num),
        (0.0f64..1e3).prop_map(Expr::num),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

fn central_difference(e: &Expr, t: f64, h: f64) -> f64 {
    (e.eval_real(t + h).unwrap() - e.eval_real(t - h).unwrap()) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(e in smooth(), t in -1.0f64..1.0) {
        let d = e.differentiate().unwrap();
        let exact = d.eval(t).unwrap();
        prop_assert!(exact.im.abs() <= 1e-12 * (1.0 + exact.re.abs()));
        let h = 1e-5 * (1.0 + t.abs());
        let fd = central_difference(&e, t, h);
        prop_assert!(
            (exact.re - fd).abs() <= 1e-6 * (1.0 + exact.re.abs()),
            "{e}: d/dt = {} vs {fd} at t = {t}", exact.re
        );
    }

    #[test]
    fn print_parse_round_trip(e in any_expr()) {
        let s = e.to_string();
        let once = Expr::parse(&s).unwrap();
        let twice = Expr::parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice, "{}", s);
    }
}
