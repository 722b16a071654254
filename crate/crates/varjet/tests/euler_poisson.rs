//! Euler–Poisson generation and the two variationality criteria.

use std::collections::BTreeMap;

use varjet::jet::sample_jetpoint;
use varjet::variational::{euler_poisson, helmholtz, helmholtz_split, zermelo};
use varjet::{
    evaluate, ChartKind, CoordId, Expr, JetChart, JetPoint, LagrangianDef, SampleRanges,
};

fn no_consts() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn coord(i: usize, r: i32) -> Expr {
    Expr::coord(CoordId::parametric(i, r))
}

#[test]
fn free_particle_gives_minus_acceleration() {
    // L = v^2 / 2  ->  E = -v'
    let l = LagrangianDef::new(
        ChartKind::Parametric,
        1,
        Expr::div(Expr::powi(coord(0, 0), 2), Expr::num(2.0)),
    )
    .unwrap();
    let form = euler_poisson(&l);
    assert_eq!(form.order(), 2);
    let chart = JetChart::parametric(1, 2);
    let ranges = SampleRanges::uniform(2, -1.0, 1.0);
    for seed in 0..10u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let got = evaluate(form.component(0), &p, &no_consts()).unwrap();
        let want = -p.get(CoordId::parametric(0, 1)).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn quadratic_acceleration_gives_fourth_derivative() {
    // L = v'^2 / 2  ->  E = v''''  (the k = 2 term enters with (+1))
    let l = LagrangianDef::new(
        ChartKind::Parametric,
        1,
        Expr::div(Expr::powi(coord(0, 1), 2), Expr::num(2.0)),
    )
    .unwrap();
    let form = euler_poisson(&l);
    assert_eq!(form.order(), 4);
    let chart = JetChart::parametric(1, 4);
    let ranges = SampleRanges::uniform(4, -1.0, 1.0);
    for seed in 0..10u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let got = evaluate(form.component(0), &p, &no_consts()).unwrap();
        let want = p.get(CoordId::parametric(0, 3)).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn euler_poisson_is_linear() {
    let l1 = LagrangianDef::new(
        ChartKind::Parametric,
        2,
        Expr::mul(coord(0, 0), Expr::mul(coord(1, 0), coord(0, -1))),
    )
    .unwrap();
    let l2 = LagrangianDef::new(
        ChartKind::Parametric,
        2,
        Expr::add(Expr::powi(coord(1, 1), 2), Expr::mul(coord(0, -1), coord(1, -1))),
    )
    .unwrap();
    let combo = LagrangianDef::new(
        ChartKind::Parametric,
        2,
        Expr::add(
            Expr::mul(Expr::num(2.5), l1.expr().clone()),
            Expr::mul(Expr::num(-0.75), l2.expr().clone()),
        ),
    )
    .unwrap();
    let f1 = euler_poisson(&l1);
    let f2 = euler_poisson(&l2);
    let fc = euler_poisson(&combo);
    let order = fc.order().max(f1.order()).max(f2.order());
    let chart = JetChart::parametric(2, order);
    let ranges = SampleRanges::uniform(order, -0.8, 0.8);
    for seed in 0..10u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        for i in 0..2 {
            let a = evaluate(f1.component(i), &p, &no_consts()).unwrap();
            let b = evaluate(f2.component(i), &p, &no_consts()).unwrap();
            let c = evaluate(fc.component(i), &p, &no_consts()).unwrap();
            let want = 2.5 * a - 0.75 * b;
            assert!((c - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

/// Total derivatives are null Lagrangians: `euler_poisson(D_t f) == 0`.
#[test]
fn total_derivative_lagrangians_are_null() {
    use varjet::total_derivative;
    let f = Expr::add(
        Expr::mul(coord(0, -1), Expr::powi(coord(1, -1), 2)),
        Expr::mul(Expr::time(ChartKind::Parametric), coord(0, 0)),
    );
    let l = LagrangianDef::new(
        ChartKind::Parametric,
        2,
        total_derivative(&f, ChartKind::Parametric),
    )
    .unwrap();
    let form = euler_poisson(&l);
    let order = form.order().max(1);
    let chart = JetChart::parametric(2, order);
    let ranges = SampleRanges::uniform(order, -1.0, 1.0);
    for seed in 0..20u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        for i in 0..2 {
            let v = evaluate(form.component(i), &p, &no_consts()).unwrap();
            assert!(v.abs() < 1e-12, "component {i}: {v}");
        }
    }
}

/// The classic non-variational form E = v' + v: the (r=1, i=j) Helmholtz
/// cell compares 1 against -1, leaving an absolute defect of 2.
#[test]
fn first_order_friction_fails_helmholtz_with_residual_two() {
    let form = varjet::DynamicalForm::new(
        ChartKind::Parametric,
        1,
        vec![Expr::add(coord(0, 1), coord(0, 0))],
    )
    .unwrap();
    let sys = helmholtz(&form);
    let chart = JetChart::parametric(1, sys.point_order());
    let ranges = SampleRanges::uniform(sys.point_order(), -1.0, 1.0);
    let p = sample_jetpoint(&chart, &ranges, 5).unwrap();
    let res = sys.evaluate(&p, &no_consts()).unwrap();
    let cell = res
        .iter()
        .find(|r| r.r == 1 && r.i == 0 && r.j == 0)
        .expect("diagonal first-order cell present");
    assert_eq!(cell.abs, 2.0);
    assert!(sys.max_rel(&p, &no_consts()).unwrap() > 0.5);
}

/// A hand-picked family of polynomial Lagrangians must pass both criteria.
#[test]
fn generated_forms_pass_both_criteria() {
    let cases: Vec<(usize, Expr)> = vec![
        (1, Expr::mul(coord(0, 0), Expr::powi(coord(0, -1), 3))),
        (
            2,
            Expr::add(
                Expr::mul(coord(0, 1), coord(1, 0)),
                Expr::mul(Expr::time(ChartKind::Parametric), coord(1, -1)),
            ),
        ),
        (
            2,
            Expr::add(
                Expr::mul(Expr::powi(coord(0, 1), 2), coord(1, -1)),
                Expr::mul(coord(0, 0), coord(1, 0)),
            ),
        ),
        (
            3,
            Expr::sum([
                Expr::mul(coord(0, 0), coord(1, 0)),
                Expr::mul(coord(2, 0), coord(0, -1)),
                Expr::powi(coord(2, 0), 2),
            ]),
        ),
    ];
    for (case, (n, lexpr)) in cases.into_iter().enumerate() {
        let l = LagrangianDef::new(ChartKind::Parametric, n, lexpr).unwrap();
        let form = euler_poisson(&l);
        let sys = helmholtz(&form);
        let split = helmholtz_split(&form);
        let order = sys.point_order();
        let chart = JetChart::parametric(n, order);
        let ranges = SampleRanges::uniform(order, -0.6, 0.6);
        for seed in 0..5u64 {
            let p = sample_jetpoint(&chart, &ranges, 1000 + seed).unwrap();
            let r1 = sys.max_rel(&p, &no_consts()).unwrap();
            let r2 = split.max_rel(&p, &no_consts()).unwrap();
            assert!(r1 < 1e-9, "case {case}: helmholtz rel {r1}");
            assert!(r2 < 1e-9, "case {case}: split rel {r2}");
        }
    }
}

/// Zermelo counterexample: a homogeneous Lagrangian of degree 2 violates the
/// first condition by exactly itself.
#[test]
fn degree_two_homogeneous_lagrangian_fails_zermelo_by_itself() {
    let u0 = Expr::coord(CoordId::homogeneous(0, 0));
    let l = LagrangianDef::new(ChartKind::Homogeneous, 2, Expr::powi(u0, 2)).unwrap();
    let z = zermelo(&l).unwrap();
    let chart = JetChart::homogeneous(2, 1);
    let ranges = SampleRanges::top_homogeneous(2, 1);
    for seed in 0..10u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let (z1, _z2) = z.evaluate(&p, &no_consts()).unwrap();
        let lval = evaluate(l.expr(), &p, &no_consts()).unwrap();
        // Z1 = sum u^a dL/du^a - L = 2L - L = L, bitwise for squares.
        assert_eq!(z1, lval);
    }
}

#[test]
fn zermelo_rejects_parametric_lagrangians() {
    let l = LagrangianDef::new(
        ChartKind::Parametric,
        1,
        Expr::powi(Expr::coord(CoordId::parametric(0, 0)), 2),
    )
    .unwrap();
    assert!(zermelo(&l).is_err());
}

/// Declared-order validation: referencing jets above the declared order is
/// rejected, under-referencing is allowed.
#[test]
fn dynamical_form_order_is_inferred() {
    let f = varjet::DynamicalForm::new(ChartKind::Parametric, 1, vec![coord(0, 2)]).unwrap();
    assert_eq!(f.order(), 3);
    let g = JetPoint::zero(JetChart::parametric(1, 3), 0.0);
    assert!(evaluate(f.component(0), &g, &no_consts()).is_ok());
}
