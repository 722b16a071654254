//! Identities tying the planar third-order model, its Lagrangians, the
//! homogeneous lift, and the conserved momentum together.

use std::collections::BTreeMap;

use varjet::homogeneous::{lift_equation, lift_lagrangian, project_jet};
use varjet::jet::{prolong_curve, sample_jetpoint};
use varjet::top::{build_top_model, e10, hom, l1, l2, lh, momentum_form, mp_equivalent_mu, mp_planar};
use varjet::variational::{euler_poisson, helmholtz, zermelo};
use varjet::{
    evaluate, total_derivative, ChartKind, CoordId, Evaluator, JetChart, SampleRanges,
};

fn mu_consts(mu: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([("mu".to_string(), mu)])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[test]
fn both_lagrangians_generate_the_third_order_equation() {
    let target = e10();
    let consts = mu_consts(1.0);
    let chart = JetChart::parametric(2, 4);
    let ranges = SampleRanges::top_parametric(4);
    for (name, l) in [("L1", l1()), ("L2", l2())] {
        let form = euler_poisson(&l);
        for seed in 0..50u64 {
            let p = sample_jetpoint(&chart, &ranges, 9000 + seed).unwrap();
            for i in 0..2 {
                let got = evaluate(form.component(i), &p, &consts).unwrap();
                let want = evaluate(target.component(i), &p, &consts).unwrap();
                assert!(rel(got, want) < 1e-9, "{name} component {i}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn lagrangian_mean_also_generates_it_by_linearity() {
    use varjet::{Expr, LagrangianDef};
    let mean = LagrangianDef::new(
        ChartKind::Parametric,
        2,
        Expr::mul(
            Expr::num(0.5),
            Expr::add(l1().expr().clone(), l2().expr().clone()),
        ),
    )
    .unwrap();
    let form = euler_poisson(&mean);
    let target = e10();
    let consts = mu_consts(1.0);
    let chart = JetChart::parametric(2, 4);
    let ranges = SampleRanges::top_parametric(4);
    for seed in 0..20u64 {
        let p = sample_jetpoint(&chart, &ranges, 400 + seed).unwrap();
        for i in 0..2 {
            let got = evaluate(form.component(i), &p, &consts).unwrap();
            let want = evaluate(target.component(i), &p, &consts).unwrap();
            assert!(rel(got, want) < 1e-9);
        }
    }
}

#[test]
fn third_order_equation_is_variational() {
    let sys = helmholtz(&e10());
    let chart = JetChart::parametric(2, sys.point_order());
    let ranges = SampleRanges::top_parametric(sys.point_order());
    let consts = mu_consts(1.0);
    for seed in 0..50u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let r = sys.max_rel(&p, &consts).unwrap();
        assert!(r < 1e-9, "seed {seed}: {r}");
    }
}

#[test]
fn homogeneous_lagrangians_satisfy_zermelo() {
    let chart = JetChart::homogeneous(2, 2);
    let ranges = SampleRanges::top_homogeneous(2, 2);
    let consts = mu_consts(1.0);
    for a0 in 0..3 {
        let l = lh(a0).unwrap();
        let z = zermelo(&l).unwrap();
        for seed in 0..50u64 {
            let p = sample_jetpoint(&chart, &ranges, 50 * a0 as u64 + seed).unwrap();
            let (z1, z2) = z.evaluate(&p, &consts).unwrap();
            assert!(z1.abs() < 1e-10, "LH{a0} z1 {z1}");
            assert!(z2.abs() < 1e-10, "LH{a0} z2 {z2}");
        }
    }
}

#[test]
fn each_homogeneous_lagrangian_generates_the_homogeneous_form() {
    let target = hom();
    let consts = mu_consts(1.0);
    let chart = JetChart::homogeneous(2, 4);
    let ranges = SampleRanges::top_homogeneous(2, 4);
    for a0 in 0..3usize {
        let form = euler_poisson(&lh(a0).unwrap());
        for seed in 0..25u64 {
            let p = sample_jetpoint(&chart, &ranges, 777 + seed).unwrap();
            for alpha in 0..3 {
                let got = evaluate(form.component(alpha), &p, &consts).unwrap();
                let want = evaluate(target.component(alpha), &p, &consts).unwrap();
                assert!(rel(got, want) < 1e-9, "LH{a0} component {alpha}");
            }
        }
    }
}

#[test]
fn lifting_the_equation_reproduces_the_homogeneous_form() {
    let target = hom();
    let consts = mu_consts(1.0);
    let chart = JetChart::homogeneous(2, 3);
    let ranges = SampleRanges::top_homogeneous(2, 3);
    for seed in 0..50u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let lifted = lift_equation(&e10(), &p, &consts).unwrap();
        let mut ev = Evaluator::new(&p, &consts);
        for alpha in 0..3 {
            let want = ev.eval(target.component(alpha)).unwrap();
            assert!(rel(lifted[alpha], want) < 1e-9, "component {alpha}");
        }
    }
}

#[test]
fn lifted_form_annihilates_the_velocity() {
    let consts = mu_consts(1.0);
    let chart = JetChart::homogeneous(2, 3);
    let ranges = SampleRanges::top_homogeneous(2, 3);
    for seed in 0..50u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let lifted = lift_equation(&e10(), &p, &consts).unwrap();
        let mut contraction = 0.0;
        for alpha in 0..3 {
            contraction += lifted[alpha] * p.get(CoordId::homogeneous(alpha, 0)).unwrap();
        }
        assert!(contraction.abs() < 1e-12, "seed {seed}: {contraction}");
    }
}

#[test]
fn lifting_the_first_lagrangian_gives_its_homogeneous_counterpart() {
    let lifted = lift_lagrangian(&l1()).unwrap();
    let target = lh(1).unwrap();
    let consts = mu_consts(1.0);
    let chart = JetChart::homogeneous(2, 2);
    let ranges = SampleRanges::top_homogeneous(2, 2);
    for seed in 0..50u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let got = evaluate(lifted.expr(), &p, &consts).unwrap();
        let want = evaluate(target.expr(), &p, &consts).unwrap();
        assert!(rel(got, want) < 1e-9, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn momentum_law_is_a_pointwise_identity() {
    let form = hom();
    let p = momentum_form();
    let consts = mu_consts(1.0);
    let chart = JetChart::homogeneous(2, 3);
    let ranges = SampleRanges::top_homogeneous(2, 3);
    for seed in 0..50u64 {
        let pt = sample_jetpoint(&chart, &ranges, seed).unwrap();
        let mut ev = Evaluator::new(&pt, &consts);
        for alpha in 0..3 {
            let dp = total_derivative(p.component(alpha), ChartKind::Homogeneous);
            let resid = ev.eval(form.component(alpha)).unwrap() + ev.eval(&dp).unwrap();
            assert!(resid.abs() < 1e-10, "component {alpha}: {resid}");
        }
    }
}

#[test]
fn planar_spin_equation_is_proportional_to_the_homogeneous_form() {
    let mp = mp_planar();
    let target = hom();
    let m0 = -2.0;
    let sigma3 = 2.0;
    let eta3 = -1.0;
    let mu_eq = mp_equivalent_mu(m0, sigma3, eta3).unwrap();
    assert_eq!(mu_eq, 1.0);
    let es = eta3 * sigma3; // proportionality: MP = -es * HOM
    let mp_consts = BTreeMap::from([
        ("m0".to_string(), m0),
        ("sigma3".to_string(), sigma3),
        ("eta3".to_string(), eta3),
    ]);
    let hom_consts = mu_consts(mu_eq);
    let chart = JetChart::homogeneous(2, 3);
    let ranges = SampleRanges::top_homogeneous(2, 3);
    for seed in 0..50u64 {
        let p = sample_jetpoint(&chart, &ranges, seed).unwrap();
        for alpha in 0..3 {
            let got = evaluate(mp.component(alpha), &p, &mp_consts).unwrap();
            let want = evaluate(target.component(alpha), &p, &hom_consts).unwrap();
            assert!(
                (got + es * want).abs() < 1e-9 * want.abs().max(1.0),
                "component {alpha}: {got} vs {}",
                -es * want
            );
        }
    }
}

#[test]
fn spin_coupling_rejects_degenerate_sigma() {
    assert!(mp_equivalent_mu(1.0, 0.0, -1.0).is_err());
}

/// Projection is reparametrization-invariant: the homogeneous curve and its
/// linear reparametrization `zeta = 2 tau` project to the same parametric jet.
#[test]
fn projection_is_reparametrization_invariant() {
    // X^0 strictly increasing; spatial components generic cubics.
    let coeffs = vec![
        vec![0.1, 1.0, 0.2, -0.05],
        vec![0.3, -0.4, 0.15, 0.02],
        vec![-0.2, 0.5, -0.1, 0.03],
    ];
    // c~(tau) = c(2 tau): coefficients scale by 2^k.
    let scaled: Vec<Vec<f64>> = coeffs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(k, c)| c * 2f64.powi(k as i32))
                .collect()
        })
        .collect();
    let zeta = 0.22;
    let p_orig = prolong_curve(ChartKind::Homogeneous, &coeffs, zeta, 3).unwrap();
    let p_rep = prolong_curve(ChartKind::Homogeneous, &scaled, zeta / 2.0, 3).unwrap();
    let a = project_jet(&p_orig).unwrap();
    let b = project_jet(&p_rep).unwrap();
    assert!((a.time() - b.time()).abs() < 1e-12);
    for c in a.chart().coords() {
        let va = a.get(c).unwrap();
        let vb = b.get(c).unwrap();
        assert!((va - vb).abs() < 1e-9 * va.abs().max(1.0), "coord {c:?}: {va} vs {vb}");
    }
}

/// Projecting the prolongation of a homogeneous graph (X^0 = zeta) returns
/// the parametric jet of the same spatial curve.
#[test]
fn projection_of_a_graph_is_the_identity() {
    let coeffs = vec![
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.3, -0.4, 0.15, 0.02],
        vec![-0.2, 0.5, -0.1, 0.03],
    ];
    let zeta = 0.37;
    let hpoint = prolong_curve(ChartKind::Homogeneous, &coeffs, zeta, 3).unwrap();
    let proj = project_jet(&hpoint).unwrap();
    let ppoint = prolong_curve(ChartKind::Parametric, &coeffs[1..].to_vec(), zeta, 2).unwrap();
    assert!((proj.time() - zeta).abs() < 1e-15);
    for c in ppoint.chart().coords() {
        let a = proj.get(c).unwrap();
        let b = ppoint.get(c).unwrap();
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "coord {c:?}");
    }
}

#[test]
fn model_builder_round_trips_all_entries() {
    let model = build_top_model(2.5);
    let text = model.saves();
    let back = varjet::Model::loads(&text).unwrap();
    assert_eq!(model, back);
    // the mu constant rides along
    assert_eq!(
        back.const_values().get("mu").copied(),
        Some(2.5)
    );
}
