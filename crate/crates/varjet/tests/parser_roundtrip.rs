//! Grammar round-trips: every rendered tree reparses to an
//! evaluation-identical expression, and rendering is idempotent.

use std::collections::BTreeMap;

use proptest::prelude::*;
use varjet::expr::render_expression;
use varjet::jet::sample_jetpoint;
use varjet::parse::parse_expression;
use varjet::{evaluate, ChartKind, CoordId, Expr, JetChart, SampleRanges};

fn consts() -> BTreeMap<String, f64> {
    BTreeMap::from([("mu".to_string(), 1.5), ("kappa".to_string(), -0.25)])
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-6i32..7).prop_map(|k| Expr::num(k as f64 / 2.0)),
        (0usize..2, -1i32..2).prop_map(|(i, r)| Expr::coord(CoordId::parametric(i, r))),
        Just(Expr::time(ChartKind::Parametric)),
        Just(Expr::constant("mu")),
        Just(Expr::constant("kappa")),
    ]
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(Expr::neg),
            // guarded positive base keeps sqrt and half-powers real and
            // division well away from zero
            (inner.clone(), -3i64..4).prop_map(|(a, k)| {
                let safe = Expr::add(Expr::num(4.0), Expr::mul(a, Expr::num(0.125)));
                Expr::pow(safe, k, 1)
            }),
            inner.clone().prop_map(|a| {
                let safe = Expr::add(Expr::num(4.0), Expr::mul(a, Expr::num(0.125)));
                Expr::sqrt(safe)
            }),
            (inner.clone(), inner).prop_map(|(a, b)| {
                let safe = Expr::add(Expr::num(4.0), Expr::mul(b, Expr::num(0.125)));
                Expr::div(a, safe)
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// Value-exact round trip: parse(render(e)) evaluates bitwise-identically.
    #[test]
    fn render_parse_value_roundtrip(e in expr_strategy(), seed in 0u64..1000) {
        let chart = JetChart::parametric(2, 2);
        let text = render_expression(&e);
        let back = parse_expression(&text, &chart)
            .unwrap_or_else(|err| panic!("reparse failed on `{text}`: {err}"));
        let ranges = SampleRanges::uniform(2, -0.9, 0.9);
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let a = evaluate(&e, &p, &consts());
        let b = evaluate(&back, &p, &consts());
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert!(
                x == y || (x.is_nan() && y.is_nan()),
                "`{text}`: {x} vs {y}"
            ),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "`{text}`: eval disagreement {a:?} vs {b:?}"),
        }
    }

    /// Rendering is idempotent: render(parse(render(e))) == render(e).
    #[test]
    fn render_is_idempotent(e in expr_strategy()) {
        let chart = JetChart::parametric(2, 2);
        let text = render_expression(&e);
        let back = parse_expression(&text, &chart).unwrap();
        prop_assert_eq!(render_expression(&back), text);
    }
}

#[test]
fn grammar_examples_parse_and_evaluate() {
    let chart = JetChart::parametric(2, 2);
    // "v1' * v1' / 2" at v1' = 3 evaluates to 4.5
    let e = parse_expression("v1' * v1' / 2", &chart).unwrap();
    let mut p = varjet::JetPoint::zero(chart, 0.0);
    p.set(CoordId::parametric(0, 1), 3.0).unwrap();
    assert_eq!(evaluate(&e, &p, &BTreeMap::new()).unwrap(), 4.5);

    // one free constant `mu`
    let e = parse_expression("mu * sqrt(1 - v1^2 - v2^2)", &chart).unwrap();
    let scan = varjet::expr::scan(&e);
    assert!(scan.consts.contains("mu"));
    let mut p = varjet::JetPoint::zero(chart, 0.0);
    p.set(CoordId::parametric(0, 0), 0.6).unwrap();
    p.set(CoordId::parametric(1, 0), 0.0).unwrap();
    let v = evaluate(&e, &p, &BTreeMap::from([("mu".to_string(), 2.0)])).unwrap();
    assert!((v - 1.6).abs() < 1e-15);

    // unknown identifier for the chart
    assert!(parse_expression("v3", &chart).is_err());
    assert!(parse_expression("u0", &chart).is_err(), "homogeneous name in parametric chart");
}

/// `^` binds the exponent written immediately after it; whitespace splits it
/// into a division. `x1^3/2` is x1^(3/2), `x1^3 / 2` is (x1^3)/2.
#[test]
fn caret_exponent_attachment() {
    let chart = JetChart::parametric(1, 1);
    let mut p = varjet::JetPoint::zero(chart, 0.0);
    p.set(CoordId::parametric(0, -1), 4.0).unwrap();
    let no = BTreeMap::new();

    let half = parse_expression("x1^3/2", &chart).unwrap();
    assert_eq!(evaluate(&half, &p, &no).unwrap(), 8.0); // 4^(3/2)

    let div = parse_expression("x1^3 / 2", &chart).unwrap();
    assert_eq!(evaluate(&div, &p, &no).unwrap(), 32.0); // 64 / 2

    let neg = parse_expression("x1^-1/2", &chart).unwrap();
    assert_eq!(evaluate(&neg, &p, &no).unwrap(), 0.5); // 4^(-1/2)
}

#[test]
fn precedence_and_primes() {
    let chart = JetChart::parametric(2, 3);
    let mut p = varjet::JetPoint::zero(chart, 0.0);
    p.set(CoordId::parametric(0, 0), 2.0).unwrap();
    p.set(CoordId::parametric(0, 1), 3.0).unwrap();
    p.set(CoordId::parametric(0, 2), 5.0).unwrap();
    let no = BTreeMap::new();

    // primes
    let e = parse_expression("v1 + v1' * v1''", &chart).unwrap();
    assert_eq!(evaluate(&e, &p, &no).unwrap(), 17.0);

    // unary minus binds tighter than * but looser than ^
    let e = parse_expression("-v1^2", &chart).unwrap();
    assert_eq!(evaluate(&e, &p, &no).unwrap(), -4.0);

    // parentheses
    let e = parse_expression("(v1 + v1')^2", &chart).unwrap();
    assert_eq!(evaluate(&e, &p, &no).unwrap(), 25.0);
}

#[test]
fn error_positions_are_reported() {
    let chart = JetChart::parametric(1, 1);
    let err = parse_expression("x1 + * 2", &chart).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("column"), "position missing from: {msg}");
}

/// Bulk totality sweep: 10^4 deterministic pseudo-random trees.
#[test]
fn bulk_render_reparse_totality() {
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn build(rng: &mut SmallRng, depth: u32) -> Expr {
        if depth == 0 || rng.random_bool(0.3) {
            return match rng.random_range(0..4) {
                0 => Expr::num((rng.random_range(-12i32..13) as f64) / 4.0),
                1 => Expr::coord(CoordId::parametric(rng.random_range(0..2), rng.random_range(-1..2))),
                2 => Expr::time(ChartKind::Parametric),
                _ => Expr::constant("mu"),
            };
        }
        let a = build(rng, depth - 1);
        let b = build(rng, depth - 1);
        match rng.random_range(0..6) {
            0 => Expr::add(a, b),
            1 => Expr::sub(a, b),
            2 => Expr::mul(a, b),
            3 => Expr::neg(a),
            4 => Expr::div(a, Expr::add(Expr::num(3.0), Expr::mul(b, Expr::num(0.25)))),
            _ => Expr::pow(
                Expr::add(Expr::num(3.0), Expr::mul(a, Expr::num(0.25))),
                rng.random_range(-3i64..4),
                if rng.random_bool(0.5) { 1 } else { 2 },
            ),
        }
    }

    let chart = JetChart::parametric(2, 2);
    let mut rng = SmallRng::seed_from_u64(0xFEED);
    for case in 0..10_000 {
        let e = build(&mut rng, 4);
        let text = render_expression(&e);
        let back = parse_expression(&text, &chart)
            .unwrap_or_else(|err| panic!("case {case}: reparse failed on `{text}`: {err}"));
        let again = render_expression(&back);
        assert_eq!(again, text, "case {case}: render not idempotent");
    }
}
