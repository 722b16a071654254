//! Acceleration solvers and RK4 integrators for the planar top: closed-form
//! back-substitution into the source forms, cross-chart agreement, momentum
//! conservation, and admissibility errors.

use std::collections::BTreeMap;

use varjet::top::{
    conserved_momentum, embed_parametric, hom, integrate_homogeneous, integrate_parametric,
    momentum_form, solve_acceleration_homogeneous, solve_acceleration_parametric, e10, TopError,
    MIN_NORM2, MIN_Q,
};
use varjet::{ChartKind, CoordId, Evaluator, JetChart, JetPoint};

fn mu_consts(mu: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([("mu".to_string(), mu)])
}

fn eta_dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2]
}

/// The solved acceleration, substituted back into the third-order source
/// form, annihilates it.
#[test]
fn parametric_acceleration_back_substitutes_to_zero() {
    let form = e10();
    let chart = JetChart::parametric(2, 3);
    let cases = [
        ([0.3, 0.1], [0.2, -0.4], 1.0),
        ([-0.5, 0.2], [0.0, 0.3], 2.5),
        ([0.0, 0.0], [1.0, -1.0], 0.5),
        ([0.6, -0.55], [-0.3, 0.25], 4.0),
    ];
    for (v, w, mu) in cases {
        let z = solve_acceleration_parametric(v, w, mu).unwrap();
        let consts = mu_consts(mu);
        let mut p = JetPoint::zero(chart.clone(), 0.0);
        for i in 0..2 {
            p.set(CoordId::parametric(i, -1), 0.7 * i as f64).unwrap();
            p.set(CoordId::parametric(i, 0), v[i]).unwrap();
            p.set(CoordId::parametric(i, 1), w[i]).unwrap();
            p.set(CoordId::parametric(i, 2), z[i]).unwrap();
        }
        let mut ev = Evaluator::new(&p, &consts);
        for i in 0..2 {
            let r = ev.eval(form.component(i)).unwrap();
            assert!(r.abs() < 1e-12, "component {i} at {v:?}, {w:?}, mu={mu}: {r}");
        }
    }
}

#[test]
fn homogeneous_acceleration_back_substitutes_to_zero() {
    let form = hom();
    let chart = JetChart::homogeneous(2, 3);
    let cases = [
        ([1.0, 0.2, -0.1], [0.0, 0.15, 0.3], 1.0),
        ([1.6, 0.4, -0.3], [0.0625, 0.7, 0.6], 5.0),
        ([1.2, -0.5, 0.1], [0.3, -0.2, 0.25], 2.0),
    ];
    for (u, udot, mu) in cases {
        let udd = solve_acceleration_homogeneous(u, udot, mu).unwrap();
        let consts = mu_consts(mu);
        let mut p = JetPoint::zero(chart.clone(), 0.0);
        for alpha in 0..3 {
            p.set(CoordId::homogeneous(alpha, -1), 0.1 * alpha as f64).unwrap();
            p.set(CoordId::homogeneous(alpha, 0), u[alpha]).unwrap();
            p.set(CoordId::homogeneous(alpha, 1), udot[alpha]).unwrap();
            p.set(CoordId::homogeneous(alpha, 2), udd[alpha]).unwrap();
        }
        let mut ev = Evaluator::new(&p, &consts);
        for alpha in 0..3 {
            let r = ev.eval(form.component(alpha)).unwrap();
            assert!(r.abs() < 1e-10, "component {alpha}: {r}");
        }
        // gauge row: eta-weighted u u'' balances the squared slope
        let gauge = eta_dot(u, udd) + eta_dot(udot, udot);
        assert!(gauge.abs() < 1e-12, "gauge row: {gauge}");
    }
}

/// Embedding a parametric phase point and running both integrators traces
/// the same worldline: the spatial position at coordinate time `T` agrees
/// to discretization accuracy.
#[test]
fn integrators_agree_across_charts() {
    let mu = 1.0;
    let x0 = [0.0, 0.0];
    let v0 = [0.2, -0.1];
    let w0 = [0.15, 0.3];
    let h = 5e-4f64;
    let t_final = 0.5f64;
    let par_steps = (t_final / h).round() as usize;
    let par = integrate_parametric(x0, v0, w0, mu, h, par_steps).unwrap();
    let end = par.last();
    assert!((end.param - t_final).abs() < 1e-12);

    let (u0, udot0) = embed_parametric(v0, w0);
    let hom_traj =
        integrate_homogeneous([0.0, x0[0], x0[1]], u0, udot0, mu, h, 2 * par_steps).unwrap();
    // find the bracketing pair around X0 = T and interpolate linearly
    let pos = hom_traj
        .samples
        .windows(2)
        .find(|pair| pair[0].state[0] <= t_final && t_final < pair[1].state[0])
        .expect("the homogeneous trajectory crosses the target coordinate time");
    let frac = (t_final - pos[0].state[0]) / (pos[1].state[0] - pos[0].state[0]);
    for i in 0..2 {
        let xi = pos[0].state[1 + i] + frac * (pos[1].state[1 + i] - pos[0].state[1 + i]);
        let want = end.state[i];
        assert!(
            (xi - want).abs() < 1e-5,
            "x{} at t={t_final}: homogeneous {xi} vs parametric {want}",
            i + 1
        );
    }
}

#[test]
fn momentum_and_gauge_are_conserved_to_discretization_error() {
    let traj = integrate_homogeneous(
        [0.0; 3],
        [1.6, 0.4, -0.3],
        [0.0625, 0.7, 0.6],
        5.0,
        1e-3,
        10_000,
    )
    .unwrap();
    assert_eq!(traj.samples.len(), 10_001);
    assert!(traj.max_momentum_drift() < 1e-6, "drift {}", traj.max_momentum_drift());
    assert!(traj.max_gauge_drift() < 1e-9, "gauge {}", traj.max_gauge_drift());
}

#[test]
fn momentum_drift_shrinks_under_step_halving() {
    let run = |h: f64| {
        integrate_homogeneous(
            [0.0; 3],
            [1.6, 0.4, -0.3],
            [0.0625, 0.7, 0.6],
            5.0,
            h,
            (10.0 / h).round() as usize,
        )
        .unwrap()
        .max_momentum_drift()
    };
    let coarse = run(4e-3);
    let fine = run(2e-3);
    assert!(fine < coarse, "no improvement: {coarse} -> {fine}");
    // classical fourth-order scaling or better
    assert!(fine < coarse / 8.0, "worse than expected: {coarse} -> {fine}");
}

/// The numeric momentum matches the symbolic momentum covector components.
#[test]
fn momentum_matches_its_symbolic_form() {
    let p_form = momentum_form();
    let chart = JetChart::homogeneous(2, 2);
    let cases = [
        ([1.0, 0.2, -0.1], [0.0, 0.15, 0.3], 1.0),
        ([1.6, 0.4, -0.3], [0.0625, 0.7, 0.6], 5.0),
        ([0.9, -0.3, 0.2], [0.4, 0.1, -0.2], 3.0),
    ];
    for (u, udot, mu) in cases {
        let numeric = conserved_momentum(u, udot, mu);
        let consts = mu_consts(mu);
        let mut pt = JetPoint::zero(chart.clone(), 0.0);
        for alpha in 0..3 {
            pt.set(CoordId::homogeneous(alpha, 0), u[alpha]).unwrap();
            pt.set(CoordId::homogeneous(alpha, 1), udot[alpha]).unwrap();
        }
        let mut ev = Evaluator::new(&pt, &consts);
        for alpha in 0..3 {
            let sym = ev.eval(p_form.component(alpha)).unwrap();
            assert!(
                (numeric[alpha] - sym).abs() < 1e-12 * sym.abs().max(1.0),
                "p{alpha}: {} vs {sym}",
                numeric[alpha]
            );
        }
    }
}

#[test]
fn inadmissible_states_are_rejected_with_the_step_index() {
    // parametric: speed too close to light
    let fast = [0.99, 0.0];
    let err = solve_acceleration_parametric(fast, [0.1, 0.1], 1.0).unwrap_err();
    assert!(matches!(err, TopError::Inadmissible { step: 0, .. }), "{err:?}");
    assert!(1.0 - fast[0] * fast[0] < MIN_Q);

    let err = integrate_parametric([0.0; 2], fast, [0.1, 0.1], 1.0, 1e-3, 10).unwrap_err();
    match err {
        TopError::Inadmissible { step, .. } => assert_eq!(step, 1),
        other => panic!("unexpected error {other:?}"),
    }

    // homogeneous: Minkowski square at the floor
    let tiny = [1e-4, 0.0, 0.0];
    assert!(eta_dot(tiny, tiny) < MIN_NORM2);
    let err = solve_acceleration_homogeneous(tiny, [0.0, 0.1, 0.0], 1.0).unwrap_err();
    assert!(matches!(err, TopError::Inadmissible { step: 0, .. }), "{err:?}");

    // error text names the failing step
    let msg = integrate_homogeneous([0.0; 3], tiny, [0.0, 0.1, 0.0], 1.0, 1e-3, 5)
        .unwrap_err()
        .to_string();
    assert!(msg.contains("step 1"), "{msg}");
}

#[test]
fn csv_rendering_has_the_documented_columns() {
    let par = integrate_parametric([0.0; 2], [0.2, -0.1], [0.15, 0.3], 1.0, 1e-3, 5).unwrap();
    let csv = par.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x1,x2,v1,v2,vprime1,vprime2,p0,p1,p2,q,p_drift"
    );
    assert_eq!(csv.lines().count(), 7); // header + 6 samples
    for line in lines {
        assert_eq!(line.split(',').count(), 12, "{line}");
    }

    let hom_traj =
        integrate_homogeneous([0.0; 3], [1.0, 0.2, -0.1], [0.0, 0.15, 0.3], 1.0, 1e-3, 3)
            .unwrap();
    let csv = hom_traj.to_csv();
    assert_eq!(
        csv.lines().next().unwrap(),
        "zeta,X0,X1,X2,u0,u1,u2,udot0,udot1,udot2,p0,p1,p2,uu_drift,p_drift"
    );
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 15, "{line}");
    }
}

#[test]
fn integration_is_deterministic() {
    let a = integrate_homogeneous([0.0; 3], [1.6, 0.4, -0.3], [0.0625, 0.7, 0.6], 5.0, 1e-3, 500)
        .unwrap();
    let b = integrate_homogeneous([0.0; 3], [1.6, 0.4, -0.3], [0.0625, 0.7, 0.6], 5.0, 1e-3, 500)
        .unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.chart_kind, ChartKind::Homogeneous);
    assert_eq!(a.mu, 5.0);
}
