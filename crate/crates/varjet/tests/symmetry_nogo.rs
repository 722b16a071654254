//! Poincaré equivariance of the planar equation, the determining PDEs for
//! its velocity profile, and the spin-supplementary obstruction certificate.

use std::collections::BTreeMap;

use varjet::jet::{metric_from_signature, sample_jetpoint};
use varjet::symmetry::{
    appendix_pde_residuals, eval_profile_residuals, f_equation_residual, f_from_profile,
    lorentz_generator, nogo_certificate, nogo_max_certificate, speed_square, symmetry_problem,
};
use varjet::top::e10;
use varjet::{
    evaluate, ChartKind, CoordId, DynamicalForm, Evaluator, Expr, JetChart, Metric, SampleRanges,
};

fn mu1() -> BTreeMap<String, f64> {
    BTreeMap::from([("mu".to_string(), 1.0)])
}

fn omega2(w: f64) -> Vec<Vec<f64>> {
    vec![vec![0.0, w], vec![-w, 0.0]]
}

/// Prolonged generator coefficients against the hand-derived closed forms
/// `δv_i = π_i - (π·v) v_i - Ω_im v_m` and
/// `δw_i = -2 (π·v) w_i - (π·w) v_i - Ω_im w_m` (plain sums), plus the
/// action on the speed square `Q = 1 - v·v`.
#[test]
fn generator_coefficients_match_the_closed_forms() {
    let metric = metric_from_signature("+--").unwrap();
    let omega = omega2(0.7);
    let pi = [0.3, -0.5];
    let op = lorentz_generator(&metric, &omega, &pi, 1).unwrap();

    let chart = JetChart::parametric(2, 2);
    let ranges = SampleRanges::uniform(2, -0.9, 0.9);
    for seed in 0..25u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let v = [
            p.get(CoordId::parametric(0, 0)).unwrap(),
            p.get(CoordId::parametric(1, 0)).unwrap(),
        ];
        let w = [
            p.get(CoordId::parametric(0, 1)).unwrap(),
            p.get(CoordId::parametric(1, 1)).unwrap(),
        ];
        let pv = pi[0] * v[0] + pi[1] * v[1];
        let pw = pi[0] * w[0] + pi[1] * w[1];
        let no_consts = BTreeMap::new();
        let mut ev = Evaluator::new(&p, &no_consts);
        for i in 0..2 {
            let dv = ev.eval(&op.apply(&Expr::coord(CoordId::parametric(i, 0)))).unwrap();
            let want_dv =
                pi[i] - pv * v[i] - (omega[i][0] * v[0] + omega[i][1] * v[1]);
            assert!((dv - want_dv).abs() < 1e-12, "delta v{i}: {dv} vs {want_dv}");

            let dw = ev.eval(&op.apply(&Expr::coord(CoordId::parametric(i, 1)))).unwrap();
            let want_dw =
                -2.0 * pv * w[i] - pw * v[i] - (omega[i][0] * w[0] + omega[i][1] * w[1]);
            assert!((dw - want_dw).abs() < 1e-12, "delta w{i}: {dw} vs {want_dw}");
        }

        let q = Expr::sub(Expr::num(1.0), speed_square());
        let xq = ev.eval(&op.apply(&q)).unwrap();
        let want_xq = -2.0 * pv * (1.0 - v[0] * v[0] - v[1] * v[1]);
        assert!((xq - want_xq).abs() < 1e-12, "X(Q): {xq} vs {want_xq}");
    }
}

#[test]
fn generator_rejects_bad_inputs() {
    let metric = metric_from_signature("+--").unwrap();
    let not_skew = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    assert!(lorentz_generator(&metric, &not_skew, &[0.0, 0.0], 1).is_err());
    let euclidean = metric_from_signature("+++").unwrap();
    assert!(lorentz_generator(&euclidean, &omega2(0.0), &[0.0, 0.0], 1).is_err());
}

#[test]
fn planar_equation_is_equivariant() {
    let metric = metric_from_signature("+--").unwrap();
    let consts = mu1();
    let chart = JetChart::parametric(2, 3);
    let ranges = SampleRanges::top_parametric(3);
    for (omega, pi) in [
        (omega2(1.0), [0.0, 0.0]),
        (omega2(0.0), [0.4, -0.2]),
        (omega2(-0.6), [0.15, 0.3]),
    ] {
        let problem = symmetry_problem(&e10(), &metric, &omega, &pi).unwrap();
        for seed in 0..25u64 {
            let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
            for r in problem.residual_exact(&p, &consts).unwrap() {
                assert!(r.abs() < 1e-9, "exact residual {r}");
            }
            let defect = problem.defect_lsq(&p, &consts).unwrap();
            assert!(defect < 1e-9, "lsq defect {defect}");
            for r in problem.invariance_residual(&p, &consts).unwrap() {
                assert!(r.abs() < 1e-9, "invariance residual {r}");
            }
        }
    }
}

#[test]
fn broken_equation_is_detected() {
    let base = e10();
    let drag = Expr::mul(Expr::num(0.1), Expr::coord(CoordId::parametric(0, 0)));
    let perturbed = DynamicalForm::new(
        ChartKind::Parametric,
        2,
        vec![
            Expr::add(base.component(0).clone(), drag),
            base.component(1).clone(),
        ],
    )
    .unwrap();
    let metric = metric_from_signature("+--").unwrap();
    let problem = symmetry_problem(&perturbed, &metric, &omega2(0.0), &[0.4, -0.2]).unwrap();
    let consts = mu1();
    let chart = JetChart::parametric(2, 3);
    let ranges = SampleRanges::top_parametric(3);
    let mut worst_exact = 0.0f64;
    let mut worst_defect = 0.0f64;
    for seed in 0..20u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        for r in problem.residual_exact(&p, &consts).unwrap() {
            worst_exact = worst_exact.max(r.abs());
        }
        worst_defect = worst_defect.max(problem.defect_lsq(&p, &consts).unwrap());
    }
    assert!(worst_exact > 1e-3, "perturbation invisible to exact residual: {worst_exact}");
    assert!(worst_defect > 1e-6, "perturbation invisible to lsq defect: {worst_defect}");
}

fn q_expr() -> Expr {
    Expr::sub(Expr::num(1.0), speed_square())
}

fn probe_velocities() -> Vec<[f64; 2]> {
    vec![
        [0.1, 0.2],
        [0.6, 0.0],
        [-0.35, 0.55],
        [0.05, -0.7],
        [-0.5, -0.4],
    ]
}

#[test]
fn relativistic_profile_solves_every_determining_pde() {
    let a = Expr::pow(q_expr(), -3, 2);
    let residuals = appendix_pde_residuals(&a);
    assert_eq!(residuals.len(), 6);
    for v in probe_velocities() {
        for (name, value) in eval_profile_residuals(&residuals, v, &BTreeMap::new()).unwrap() {
            assert!(value.abs() < 1e-10, "{name} at {v:?}: {value}");
        }
    }
}

#[test]
fn flat_profile_fails_exactly_the_boost_pair() {
    let residuals = appendix_pde_residuals(&Expr::num(1.0));
    for v in probe_velocities() {
        let values: Vec<f64> = eval_profile_residuals(&residuals, v, &BTreeMap::new())
            .unwrap()
            .into_iter()
            .map(|(_, value)| value)
            .collect();
        assert_eq!(values, vec![0.0, 0.0, -3.0, -3.0, 0.0, 0.0], "at {v:?}");
    }
}

#[test]
fn radial_reduction_has_the_rational_solution() {
    let y = speed_square();
    let f = Expr::div(Expr::mul(Expr::num(3.0), y.clone()), Expr::sub(Expr::num(1.0), y));
    let residual = f_equation_residual(&f);
    let chart = JetChart::parametric(2, 1);
    for v in probe_velocities() {
        let mut p = varjet::JetPoint::zero(chart.clone(), 0.0);
        p.set(CoordId::parametric(0, 0), v[0]).unwrap();
        p.set(CoordId::parametric(1, 0), v[1]).unwrap();
        let value = evaluate(&residual, &p, &BTreeMap::new()).unwrap();
        assert!(value.abs() < 1e-12, "at {v:?}: {value}");
    }
}

#[test]
fn logarithmic_derivative_of_the_profile_is_the_rational_function() {
    let a = Expr::pow(q_expr(), -3, 2);
    let f = f_from_profile(&a);
    let chart = JetChart::parametric(2, 1);
    for v in probe_velocities() {
        let y = v[0] * v[0] + v[1] * v[1];
        let want = 3.0 * y / (1.0 - y);
        let mut p = varjet::JetPoint::zero(chart.clone(), 0.0);
        p.set(CoordId::parametric(0, 0), v[0]).unwrap();
        p.set(CoordId::parametric(1, 0), v[1]).unwrap();
        let got = evaluate(&f, &p, &BTreeMap::new()).unwrap();
        assert!(
            (got - want).abs() < 1e-12 * want.abs().max(1.0),
            "at {v:?}: {got} vs {want}"
        );
    }
}

fn spatial_metric() -> Metric {
    Metric::new(&[-1, -1, -1], 1).unwrap()
}

#[test]
fn certificate_vanishes_only_for_zero_residual() {
    let metric = spatial_metric();
    let v = [0.3, -0.1, 0.2];
    assert_eq!(
        nogo_max_certificate(&metric, &[0.0; 3], &v, 256, 42),
        0.0,
        "zero residual must certify to zero"
    );
    let a = [0.2, -0.05, 0.4];
    let best = nogo_max_certificate(&metric, &a, &v, 256, 42);
    assert!(best > 1e-6, "nonzero residual not witnessed: {best}");
}

#[test]
fn certificate_is_a_nonnegative_quadratic_witness() {
    let metric = spatial_metric();
    let a = [0.2, -0.05, 0.4];
    let v = [0.3, -0.1, 0.2];
    let omega = [0.5, 0.25, -0.75];
    let c = nogo_certificate(&metric, &a, &v, &omega);
    assert!(c > 0.0);
    // quadratic homogeneity in the residual
    let scaled = [3.0 * a[0], 3.0 * a[1], 3.0 * a[2]];
    let c9 = nogo_certificate(&metric, &scaled, &v, &omega);
    assert!((c9 - 9.0 * c).abs() < 1e-12 * c9.abs());
    // a single aligned, coplanar probe is blind ...
    let blind = nogo_certificate(&metric, &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
    assert_eq!(blind, 0.0);
    // ... but the maximized certificate still sees the residual.
    let best = nogo_max_certificate(&metric, &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0], 256, 7);
    assert!(best > 1e-6);
}
