//! The planar relativistic top: a third-order system in two spatial
//! dimensions on the Minkowski background with signature `(+, -, -)`.
//!
//! The module builds the source form in both pictures — [`e10`] on the
//! parametric chart and [`hom`] on the homogeneous chart — together with its
//! variational multipliers: two parametric Lagrangians [`l1`]/[`l2`], three
//! homogeneous ones [`lh`], the conserved momentum covector [`momentum_form`],
//! and the planar spin form [`mp_planar`]. Fixed-step integrators with
//! hand-written right-hand sides follow, plus [`build_top_model`], which
//! packages everything into a [`Model`] document.
//!
//! Throughout, `μ` (`mu` in expressions) is the mass-like coupling; the
//! planar spin form uses the constants `m0`, `sigma3`, `eta3` instead and
//! coincides with `-eta3·sigma3` times the source form at
//! `μ = m0/(eta3·sigma3)`.

use crate::expr::Expr;
use crate::jet::{ChartKind, CoordId, JetChart};
use crate::model::{ConstantValue, FormEntry, LagrangianEntry, Model};
use crate::variational::{DynamicalForm, LagrangianDef, VariationalError};
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopError {
    #[error("state inadmissible at step {step}: {why}")]
    Inadmissible { step: usize, why: String },
    #[error("eta3 * sigma3 must be nonzero to relate the planar spin form to the source form")]
    ZeroSpinCoupling,
    #[error("component index {found} out of range, expected < {n}")]
    BadIndex { found: usize, n: usize },
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

/// Squared-speed ceiling: parametric states must keep `1 - v·v` above this.
pub const MIN_Q: f64 = 0.05;
/// Homogeneous states must keep the Minkowski square `u·u` above this.
pub const MIN_NORM2: f64 = 1e-6;

fn mu() -> Expr {
    Expr::constant("mu")
}

fn pc(i: usize, r: i32) -> Expr {
    Expr::coord(CoordId::parametric(i, r))
}

fn hc(i: usize, r: i32) -> Expr {
    Expr::coord(CoordId::homogeneous(i, r))
}

/// `1 - v·v` for the planar parametric chart.
fn q_expr() -> Expr {
    let y = Expr::add(
        Expr::mul(pc(0, 0), pc(0, 0)),
        Expr::mul(pc(1, 0), pc(1, 0)),
    );
    Expr::sub(Expr::num(1.0), y)
}

/// Euclidean rotation by +90 degrees: `(*a) = (-a_2, a_1)`.
fn star(a: [&Expr; 2]) -> [Expr; 2] {
    [Expr::neg(a[1].clone()), a[0].clone()]
}

/// Spatial metric pairing on the plane: `-(a_1 b_1 + a_2 b_2)`.
fn dotg2(a: [&Expr; 2], b: [&Expr; 2]) -> Expr {
    Expr::neg(Expr::add(
        Expr::mul(a[0].clone(), b[0].clone()),
        Expr::mul(a[1].clone(), b[1].clone()),
    ))
}

/// The parametric source form of the planar relativistic top, third order
/// in `(v, v', v'')` with coupling `mu`.
pub fn e10() -> DynamicalForm {
    let v = [pc(0, 0), pc(1, 0)];
    let w = [pc(0, 1), pc(1, 1)];
    let z = [pc(0, 2), pc(1, 2)];
    let q = q_expr();
    let q32 = Expr::pow(q.clone(), 3, 2);
    let q52 = Expr::pow(q.clone(), 5, 2);
    let star_z = star([&z[0], &z[1]]);
    let star_w = star([&w[0], &w[1]]);
    let dgvw = dotg2([&v[0], &v[1]], [&w[0], &w[1]]);
    let dgwv = dotg2([&w[0], &w[1]], [&v[0], &v[1]]);
    let components: Vec<Expr> = (0..2)
        .map(|i| {
            let spin = Expr::add(
                Expr::neg(Expr::div(star_z[i].clone(), q32.clone())),
                Expr::mul(
                    Expr::num(3.0),
                    Expr::div(Expr::mul(star_w[i].clone(), dgvw.clone()), q52.clone()),
                ),
            );
            let translational = Expr::mul(
                Expr::div(mu(), q32.clone()),
                Expr::sub(
                    Expr::mul(q.clone(), Expr::neg(w[i].clone())),
                    Expr::mul(dgwv.clone(), Expr::neg(v[i].clone())),
                ),
            );
            Expr::sub(spin, translational)
        })
        .collect();
    DynamicalForm::new(ChartKind::Parametric, 2, components)
        .expect("the top source form is well-formed")
}

/// First parametric Lagrangian of the top,
/// `-v2' v1 / (sqrt(Q) (1 - v2^2)) + mu sqrt(Q)`.
pub fn l1() -> LagrangianDef {
    let q = q_expr();
    let den = Expr::mul(
        Expr::sqrt(q.clone()),
        Expr::sub(Expr::num(1.0), Expr::mul(pc(1, 0), pc(1, 0))),
    );
    let e = Expr::add(
        Expr::neg(Expr::div(Expr::mul(pc(1, 1), pc(0, 0)), den)),
        Expr::mul(mu(), Expr::sqrt(q)),
    );
    LagrangianDef::new(ChartKind::Parametric, 2, e).expect("L1 is well-formed")
}

/// Second parametric Lagrangian of the top,
/// `v1' v2 / (sqrt(Q) (1 - v1^2)) + mu sqrt(Q)`.
pub fn l2() -> LagrangianDef {
    let q = q_expr();
    let den = Expr::mul(
        Expr::sqrt(q.clone()),
        Expr::sub(Expr::num(1.0), Expr::mul(pc(0, 0), pc(0, 0))),
    );
    let e = Expr::add(
        Expr::div(Expr::mul(pc(0, 1), pc(1, 0)), den),
        Expr::mul(mu(), Expr::sqrt(q)),
    );
    LagrangianDef::new(ChartKind::Parametric, 2, e).expect("L2 is well-formed")
}

const ETA: [f64; 3] = [1.0, -1.0, -1.0];

/// Minkowski pairing `a·b = a_0 b_0 - a_1 b_1 - a_2 b_2` on expressions.
fn dot3(a: &dyn Fn(usize) -> Expr, b: &dyn Fn(usize) -> Expr) -> Expr {
    Expr::sum((0..3).map(|m| Expr::mul(Expr::num(ETA[m]), Expr::mul(a(m), b(m)))))
}

/// Oriented cross product with `eps_{012} = -1`:
/// `cross(a, b)_α = -Σ ε_{αβγ} a^β b^γ`.
fn cross3(a: &dyn Fn(usize) -> Expr, b: &dyn Fn(usize) -> Expr, alpha: usize) -> Expr {
    let b1 = (alpha + 1) % 3;
    let b2 = (alpha + 2) % 3;
    Expr::neg(Expr::sub(Expr::mul(a(b1), b(b2)), Expr::mul(a(b2), b(b1))))
}

/// The homogeneous source form of the top: the reparametrization-covariant
/// third-order system in `(u, u', u'')` whose projection to the parametric
/// chart is [`e10`]. It is degree -2 homogeneous and contracts to zero with
/// `u`.
pub fn hom() -> DynamicalForm {
    let u = |i| hc(i, 0);
    let ud = |i| hc(i, 1);
    let udd = |i| hc(i, 2);
    let norm2 = dot3(&u, &u);
    let norm3 = Expr::pow(norm2.clone(), 3, 2);
    let norm5 = Expr::pow(norm2.clone(), 5, 2);
    let dudu = dot3(&ud, &u);
    let components: Vec<Expr> = (0..3)
        .map(|alpha| {
            let ulow = Expr::mul(Expr::num(ETA[alpha]), u(alpha));
            let udlow = Expr::mul(Expr::num(ETA[alpha]), ud(alpha));
            let mut e = Expr::neg(Expr::div(cross3(&udd, &u, alpha), norm3.clone()));
            e = Expr::add(
                e,
                Expr::mul(
                    Expr::num(3.0),
                    Expr::div(Expr::mul(cross3(&ud, &u, alpha), dudu.clone()), norm5.clone()),
                ),
            );
            Expr::sub(
                e,
                Expr::mul(
                    Expr::div(mu(), norm3.clone()),
                    Expr::sub(Expr::mul(norm2.clone(), udlow), Expr::mul(dudu.clone(), ulow)),
                ),
            )
        })
        .collect();
    DynamicalForm::new(ChartKind::Homogeneous, 2, components)
        .expect("the homogeneous top form is well-formed")
}

/// The `a0`-th homogeneous Lagrangian of the top (`a0 < 3`):
///
/// `LH_a = u^a (u'^c u^b - u'^b u^c) / (|u| Σ_{d≠a} η_d (u^d)²) + mu |u|`
///
/// with `(a, b, c)` the cyclic triple starting at `a0`. All three have the
/// same Euler–Poisson operator, the homogeneous source form.
pub fn lh(a0: usize) -> Result<LagrangianDef, TopError> {
    if a0 >= 3 {
        return Err(TopError::BadIndex { found: a0, n: 3 });
    }
    let u = |i| hc(i, 0);
    let ud = |i| hc(i, 1);
    let a1 = (a0 + 1) % 3;
    let a2 = (a0 + 2) % 3;
    let norm2 = dot3(&u, &u);
    let norm = Expr::sqrt(norm2);
    let numer = Expr::mul(
        u(a0),
        Expr::sub(Expr::mul(ud(a2), u(a1)), Expr::mul(ud(a1), u(a2))),
    );
    let tail = Expr::sum(
        (0..3)
            .filter(|b| *b != a0)
            .map(|b| Expr::mul(Expr::num(ETA[b]), Expr::mul(u(b), u(b)))),
    );
    let e = Expr::add(
        Expr::div(numer, Expr::mul(norm.clone(), tail)),
        Expr::mul(mu(), norm),
    );
    Ok(LagrangianDef::new(ChartKind::Homogeneous, 2, e)?)
}

/// The conserved momentum covector of the homogeneous top,
/// `p_α = cross(u', u)_α / |u|³ + mu u_α / |u|`, packaged as a form entry of
/// order 2. The homogeneous source form equals `-D_ζ p`.
pub fn momentum_form() -> DynamicalForm {
    let u = |i| hc(i, 0);
    let ud = |i| hc(i, 1);
    let norm2 = dot3(&u, &u);
    let norm3 = Expr::pow(norm2.clone(), 3, 2);
    let norm = Expr::sqrt(norm2);
    let components: Vec<Expr> = (0..3)
        .map(|alpha| {
            let ulow = Expr::mul(Expr::num(ETA[alpha]), u(alpha));
            Expr::add(
                Expr::div(cross3(&ud, &u, alpha), norm3.clone()),
                Expr::mul(mu(), Expr::div(ulow, norm.clone())),
            )
        })
        .collect();
    DynamicalForm::new(ChartKind::Homogeneous, 2, components)
        .expect("the momentum covector is well-formed")
}

/// The planar spin form with constants `m0`, `sigma3`, `eta3`:
///
/// `MP_α = eta3 sigma3 (cross(u'', u)_α / |u|³ - 3 cross(u', u)_α (u'·u) / |u|⁵)
///        + m0 / |u|³ (u·u u'_α - (u'·u) u_α)`
///
/// which equals `-eta3·sigma3` times the homogeneous source form at
/// `mu = m0 / (eta3 sigma3)`.
pub fn mp_planar() -> DynamicalForm {
    let u = |i| hc(i, 0);
    let ud = |i| hc(i, 1);
    let udd = |i| hc(i, 2);
    let es = Expr::mul(Expr::constant("eta3"), Expr::constant("sigma3"));
    let norm2 = dot3(&u, &u);
    let norm3 = Expr::pow(norm2.clone(), 3, 2);
    let norm5 = Expr::pow(norm2.clone(), 5, 2);
    let dudu = dot3(&ud, &u);
    let components: Vec<Expr> = (0..3)
        .map(|alpha| {
            let ulow = Expr::mul(Expr::num(ETA[alpha]), u(alpha));
            let udlow = Expr::mul(Expr::num(ETA[alpha]), ud(alpha));
            let spin = Expr::mul(
                es.clone(),
                Expr::sub(
                    Expr::div(cross3(&udd, &u, alpha), norm3.clone()),
                    Expr::mul(
                        Expr::num(3.0),
                        Expr::div(
                            Expr::mul(cross3(&ud, &u, alpha), dudu.clone()),
                            norm5.clone(),
                        ),
                    ),
                ),
            );
            let translational = Expr::mul(
                Expr::div(Expr::constant("m0"), norm3.clone()),
                Expr::sub(Expr::mul(norm2.clone(), udlow), Expr::mul(dudu.clone(), ulow)),
            );
            Expr::add(spin, translational)
        })
        .collect();
    DynamicalForm::new(ChartKind::Homogeneous, 2, components)
        .expect("the planar spin form is well-formed")
}

/// The coupling at which the planar spin form matches the source form:
/// `mu = m0 / (eta3 sigma3)`; zero spin coupling has no match.
pub fn mp_equivalent_mu(m0: f64, sigma3: f64, eta3: f64) -> Result<f64, TopError> {
    let es = eta3 * sigma3;
    if es == 0.0 {
        return Err(TopError::ZeroSpinCoupling);
    }
    Ok(m0 / es)
}

/// Package the top into a model document: the source form in both charts,
/// the planar spin form, the momentum covector, and all five Lagrangians,
/// with constants `mu`, `m0 = -2 mu`, `sigma3 = 2`, `eta3 = -1`.
pub fn build_top_model(mu_value: f64) -> Model {
    let mut model = Model::new(JetChart::parametric(2, 3), "+--");
    model
        .constants
        .insert("mu".into(), ConstantValue::Value(mu_value));
    model
        .constants
        .insert("m0".into(), ConstantValue::Value(-2.0 * mu_value));
    model
        .constants
        .insert("sigma3".into(), ConstantValue::Value(2.0));
    model
        .constants
        .insert("eta3".into(), ConstantValue::Value(-1.0));

    let insert_lagrangian = |model: &mut Model, name: &str, l: &LagrangianDef| {
        model.lagrangians.insert(
            name.into(),
            LagrangianEntry { chart: *l.chart(), expr: l.expr().clone() },
        );
    };
    insert_lagrangian(&mut model, "L1", &l1());
    insert_lagrangian(&mut model, "L2", &l2());
    for a0 in 0..3 {
        let lagr = lh(a0).expect("index in range");
        insert_lagrangian(&mut model, &format!("LH{a0}"), &lagr);
    }

    let insert_form = |model: &mut Model, name: &str, f: &DynamicalForm| {
        model.forms.insert(
            name.into(),
            FormEntry { chart: *f.chart(), components: f.components().to_vec() },
        );
    };
    insert_form(&mut model, "E10", &e10());
    insert_form(&mut model, "HOM", &hom());
    insert_form(&mut model, "MPPLANAR", &mp_planar());
    insert_form(&mut model, "P", &momentum_form());
    model
}

// ---------------------------------------------------------------------------
// numeric right-hand sides and integrators

/// Parametric acceleration: solve `A v'' + k = 0` for `v''` in closed form,
/// `v''_1 = Q^(3/2) k_2`, `v''_2 = -Q^(3/2) k_1`. Fails when `1 - v·v`
/// drops below [`MIN_Q`].
pub fn solve_acceleration_parametric(
    v: [f64; 2],
    w: [f64; 2],
    mu: f64,
) -> Result<[f64; 2], TopError> {
    let q = 1.0 - (v[0] * v[0] + v[1] * v[1]);
    if q < MIN_Q {
        return Err(TopError::Inadmissible {
            step: 0,
            why: format!("1 - v.v = {q:.3e} below the {MIN_Q} floor"),
        });
    }
    let k = parametric_tail(v, w, mu, q);
    let q32 = q * q.sqrt();
    Ok([q32 * k[1], -q32 * k[0]])
}

/// The `v''`-free part of the parametric source form.
fn parametric_tail(v: [f64; 2], w: [f64; 2], mu: f64, q: f64) -> [f64; 2] {
    let dgvw = -(v[0] * w[0] + v[1] * w[1]);
    let star_w = [-w[1], w[0]];
    let q32 = q * q.sqrt();
    let q52 = q * q * q.sqrt();
    let mut k = [0.0; 2];
    for i in 0..2 {
        k[i] = 3.0 * star_w[i] * dgvw / q52 - mu / q32 * (q * (-w[i]) - dgvw * (-v[i]));
    }
    k
}

fn eps3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn dot3_num(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2]
}

/// Oriented numeric cross product, `eps_{012} = -1`.
fn cross3_num(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        -(a[1] * b[2] - a[2] * b[1]),
        -(a[2] * b[0] - a[0] * b[2]),
        -(a[0] * b[1] - a[1] * b[0]),
    ]
}

/// The conserved momentum covector at a homogeneous phase point.
pub fn conserved_momentum(u: [f64; 3], udot: [f64; 3], mu: f64) -> [f64; 3] {
    let norm2 = dot3_num(u, u);
    let norm = norm2.sqrt();
    let norm3 = norm2 * norm;
    let c = cross3_num(udot, u);
    let mut p = [0.0; 3];
    for alpha in 0..3 {
        p[alpha] = c[alpha] / norm3 + mu * ETA[alpha] * u[alpha] / norm;
    }
    p
}

/// Embed a parametric phase point into homogeneous variables:
/// `u = (1, v)`, `u' = (0, v')`.
pub fn embed_parametric(v: [f64; 2], w: [f64; 2]) -> ([f64; 3], [f64; 3]) {
    ([1.0, v[0], v[1]], [0.0, w[0], w[1]])
}

/// Homogeneous acceleration: the source form determines `u''` only up to a
/// reparametrization; the system is closed with the gauge row
/// `Σ η_β u^β u''^β = -(u'·u')`, which propagates `u'·u = const`. Rows 1
/// and 2 of the source form plus the gauge row are solved as a 3×3 linear
/// system. Fails when `u·u` drops below [`MIN_NORM2`] or the system turns
/// singular.
pub fn solve_acceleration_homogeneous(
    u: [f64; 3],
    udot: [f64; 3],
    mu: f64,
) -> Result<[f64; 3], TopError> {
    let norm2 = dot3_num(u, u);
    if norm2 < MIN_NORM2 {
        return Err(TopError::Inadmissible {
            step: 0,
            why: format!("u.u = {norm2:.3e} below the {MIN_NORM2} floor"),
        });
    }
    let norm = norm2.sqrt();
    let norm3 = norm2 * norm;
    let norm5 = norm2 * norm2 * norm;
    let dudu = dot3_num(udot, u);
    let cu = cross3_num(udot, u);
    let mut k = [0.0; 3];
    for alpha in 0..3 {
        k[alpha] = 3.0 * cu[alpha] * dudu / norm5
            - mu / norm3 * (norm2 * ETA[alpha] * udot[alpha] - dudu * ETA[alpha] * u[alpha]);
    }
    // leading coefficient of the form: d HOM_alpha / d u''^beta
    let lead = |alpha: usize, beta: usize| -> f64 {
        let mut s = 0.0;
        for gamma in 0..3 {
            s += eps3(alpha, beta, gamma) * u[gamma];
        }
        s / norm3
    };
    let m = Matrix3::from_fn(|row, col| match row {
        0 => lead(1, col),
        1 => lead(2, col),
        _ => ETA[col] * u[col],
    });
    let rhs = Vector3::new(-k[1], -k[2], -dot3_num(udot, udot));
    let sol = m.lu().solve(&rhs).ok_or_else(|| TopError::Inadmissible {
        step: 0,
        why: "gauge-extended acceleration system is singular".into(),
    })?;
    Ok([sol[0], sol[1], sol[2]])
}

/// One integration sample. `state` lays out the chart variables in CSV
/// column order; `gauge` holds `1 - v·v` on the parametric chart and the
/// drift of `u·u` on the homogeneous one.
#[derive(Debug, Clone)]
pub struct Sample {
    pub param: f64,
    pub state: Vec<f64>,
    pub momentum: [f64; 3],
    pub gauge: f64,
    pub momentum_drift: f64,
}

/// A fixed-step trajectory with per-sample conserved quantities.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub chart_kind: ChartKind,
    pub mu: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Largest momentum drift along the trajectory.
    pub fn max_momentum_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.momentum_drift)
            .fold(0.0, f64::max)
    }

    /// Largest gauge drift along the trajectory (homogeneous chart).
    pub fn max_gauge_drift(&self) -> f64 {
        match self.chart_kind {
            ChartKind::Homogeneous => self
                .samples
                .iter()
                .map(|s| s.gauge.abs())
                .fold(0.0, f64::max),
            ChartKind::Parametric => 0.0,
        }
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least the initial sample")
    }

    /// Render as CSV with a header line.
    pub fn to_csv(&self) -> String {
        let header = match self.chart_kind {
            ChartKind::Parametric => {
                "t,x1,x2,v1,v2,vprime1,vprime2,p0,p1,p2,q,p_drift"
            }
            ChartKind::Homogeneous => {
                "zeta,X0,X1,X2,u0,u1,u2,udot0,udot1,udot2,p0,p1,p2,uu_drift,p_drift"
            }
        };
        let mut out = String::from(header);
        out.push('\n');
        for s in &self.samples {
            let mut cols = vec![format!("{:.12e}", s.param)];
            cols.extend(s.state.iter().map(|x| format!("{x:.12e}")));
            cols.extend(s.momentum.iter().map(|x| format!("{x:.12e}")));
            cols.push(format!("{:.12e}", s.gauge));
            cols.push(format!("{:.12e}", s.momentum_drift));
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

fn rk4_step<const N: usize>(
    y: &[f64; N],
    h: f64,
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N], TopError>,
) -> Result<[f64; N], TopError> {
    let lin = |y: &[f64; N], k: &[f64; N], c: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&lin(y, &k1, h / 2.0))?;
    let k3 = f(&lin(y, &k2, h / 2.0))?;
    let k4 = f(&lin(y, &k3, h))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn drift(p: [f64; 3], p0: [f64; 3]) -> f64 {
    (0..3).map(|a| (p[a] - p0[a]).abs()).fold(0.0, f64::max)
}

/// Integrate the parametric top with classical fixed-step RK4 from
/// `(x0, v0, vp0)` at `t = 0`. The trajectory records the embedded momentum
/// and its drift at every step; inadmissible states abort with the step
/// index.
pub fn integrate_parametric(
    x0: [f64; 2],
    v0: [f64; 2],
    vp0: [f64; 2],
    mu: f64,
    h: f64,
    steps: usize,
) -> Result<Trajectory, TopError> {
    let mut rhs = |y: &[f64; 6]| -> Result<[f64; 6], TopError> {
        let v = [y[2], y[3]];
        let w = [y[4], y[5]];
        let z = solve_acceleration_parametric(v, w, mu)?;
        Ok([v[0], v[1], w[0], w[1], z[0], z[1]])
    };
    let sample = |t: f64, y: &[f64; 6]| -> Sample {
        let v = [y[2], y[3]];
        let w = [y[4], y[5]];
        let (u, udot) = embed_parametric(v, w);
        Sample {
            param: t,
            state: y.to_vec(),
            momentum: conserved_momentum(u, udot, mu),
            gauge: 1.0 - (v[0] * v[0] + v[1] * v[1]),
            momentum_drift: 0.0,
        }
    };
    let mut y = [x0[0], x0[1], v0[0], v0[1], vp0[0], vp0[1]];
    let mut samples = vec![sample(0.0, &y)];
    let p0 = samples[0].momentum;
    for step in 1..=steps {
        y = rk4_step(&y, h, &mut rhs).map_err(|e| at_step(e, step))?;
        let mut s = sample(step as f64 * h, &y);
        s.momentum_drift = drift(s.momentum, p0);
        samples.push(s);
    }
    Ok(Trajectory { chart_kind: ChartKind::Parametric, mu, samples })
}

/// Integrate the homogeneous top with classical fixed-step RK4 from
/// `(x0, u0, udot0)` at `ζ = 0`. The trajectory records the momentum, its
/// drift, and the drift of `u·u` at every step.
pub fn integrate_homogeneous(
    x0: [f64; 3],
    u0: [f64; 3],
    udot0: [f64; 3],
    mu: f64,
    h: f64,
    steps: usize,
) -> Result<Trajectory, TopError> {
    let mut rhs = |y: &[f64; 9]| -> Result<[f64; 9], TopError> {
        let u = [y[3], y[4], y[5]];
        let ud = [y[6], y[7], y[8]];
        let udd = solve_acceleration_homogeneous(u, ud, mu)?;
        Ok([y[3], y[4], y[5], y[6], y[7], y[8], udd[0], udd[1], udd[2]])
    };
    let uu0 = dot3_num(u0, u0);
    let sample = |zeta: f64, y: &[f64; 9]| -> Sample {
        let u = [y[3], y[4], y[5]];
        let ud = [y[6], y[7], y[8]];
        Sample {
            param: zeta,
            state: y.to_vec(),
            momentum: conserved_momentum(u, ud, mu),
            gauge: dot3_num(u, u) - uu0,
            momentum_drift: 0.0,
        }
    };
    let mut y = [
        x0[0], x0[1], x0[2], u0[0], u0[1], u0[2], udot0[0], udot0[1], udot0[2],
    ];
    let mut samples = vec![sample(0.0, &y)];
    let p0 = samples[0].momentum;
    for step in 1..=steps {
        y = rk4_step(&y, h, &mut rhs).map_err(|e| at_step(e, step))?;
        let mut s = sample(step as f64 * h, &y);
        s.momentum_drift = drift(s.momentum, p0);
        samples.push(s);
    }
    Ok(Trajectory { chart_kind: ChartKind::Homogeneous, mu, samples })
}

fn at_step(e: TopError, step: usize) -> TopError {
    match e {
        TopError::Inadmissible { why, .. } => TopError::Inadmissible { step, why },
        other => other,
    }
}
