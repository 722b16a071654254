//! Passage between the parametric and homogeneous pictures: the projection
//! `℘` of homogeneous jets onto parametric ones, the lift of Lagrangians,
//! and the lift of source forms.
//!
//! The homogeneous chart carries `x^0..x^n` over an auxiliary parameter `ζ`,
//! with `x^0` playing the role of parametric time. On the open set `u^0 ≠ 0`
//! the projection reads
//!
//! ```text
//! t    = x^0,           x^i = x^i,
//! v^i  = u^i / u^0,
//! v'^i = (u^0 u̇^i - u̇^0 u^i) / (u^0)^3,
//! v''^i = ((u^0)^2 ü^i - 3 u^0 u̇^0 u̇^i + (3 (u̇^0)^2 - u^0 ü^0) u^i) / (u^0)^5,
//! ```
//!
//! i.e. the chain rule for reparametrizing a curve by its own time
//! component, through third derivatives.

use crate::expr::{substitute, Evaluator, EvalError, Expr, SubstituteError, Var};
use crate::jet::{ChartKind, CoordId, JetChart, JetError, JetPoint};
use crate::variational::{DynamicalForm, LagrangianDef, VariationalError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HomogeneousError {
    #[error("operation needs a {expected} object, found {found}")]
    WrongChartKind { expected: String, found: String },
    #[error("the projection is implemented through order {max}, found order {found}")]
    UnsupportedOrder { found: i32, max: i32 },
    #[error("projection singular: u0 = {u0} (the chart requires u0 != 0)")]
    Singular { u0: f64 },
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error(transparent)]
    Substitute(#[from] SubstituteError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Highest parametric order the projection formulas cover.
pub const MAX_PROJECTION_ORDER: i32 = 3;

fn hom(i: usize, r: i32) -> Expr {
    Expr::coord(CoordId::homogeneous(i, r))
}

/// Expression bindings realizing the projection: each parametric variable of
/// level `r <= order - 1` (and parametric time) as a homogeneous-chart
/// expression. `order` may be at most [`MAX_PROJECTION_ORDER`].
pub fn projection_bindings(
    n: usize,
    order: i32,
) -> Result<BTreeMap<Var, Expr>, HomogeneousError> {
    if order > MAX_PROJECTION_ORDER {
        return Err(HomogeneousError::UnsupportedOrder {
            found: order,
            max: MAX_PROJECTION_ORDER,
        });
    }
    let mut map = BTreeMap::new();
    map.insert(Var::Time(ChartKind::Parametric), hom(0, -1));
    let u0 = hom(0, 0);
    let ud0 = hom(0, 1);
    let udd0 = hom(0, 2);
    for i in 0..n {
        let m = i + 1;
        map.insert(Var::Coord(CoordId::parametric(i, -1)), hom(m, -1));
        if order >= 1 {
            map.insert(
                Var::Coord(CoordId::parametric(i, 0)),
                Expr::div(hom(m, 0), u0.clone()),
            );
        }
        if order >= 2 {
            let num = Expr::sub(
                Expr::mul(u0.clone(), hom(m, 1)),
                Expr::mul(ud0.clone(), hom(m, 0)),
            );
            map.insert(
                Var::Coord(CoordId::parametric(i, 1)),
                Expr::div(num, Expr::powi(u0.clone(), 3)),
            );
        }
        if order >= 3 {
            let num = Expr::add(
                Expr::sub(
                    Expr::mul(Expr::powi(u0.clone(), 2), hom(m, 2)),
                    Expr::mul(
                        Expr::num(3.0),
                        Expr::mul(u0.clone(), Expr::mul(ud0.clone(), hom(m, 1))),
                    ),
                ),
                Expr::mul(
                    Expr::sub(
                        Expr::mul(Expr::num(3.0), Expr::powi(ud0.clone(), 2)),
                        Expr::mul(u0.clone(), udd0.clone()),
                    ),
                    hom(m, 0),
                ),
            );
            map.insert(
                Var::Coord(CoordId::parametric(i, 2)),
                Expr::div(num, Expr::powi(u0.clone(), 5)),
            );
        }
    }
    Ok(map)
}

/// Numerically project a homogeneous jet point to the parametric chart of
/// the same order. The point must carry order at most
/// [`MAX_PROJECTION_ORDER`] and satisfy `u^0 != 0`.
pub fn project_jet(point: &JetPoint) -> Result<JetPoint, HomogeneousError> {
    let chart = *point.chart();
    if chart.kind != ChartKind::Homogeneous {
        return Err(HomogeneousError::WrongChartKind {
            expected: ChartKind::Homogeneous.to_string(),
            found: chart.to_string(),
        });
    }
    if chart.order > MAX_PROJECTION_ORDER {
        return Err(HomogeneousError::UnsupportedOrder {
            found: chart.order,
            max: MAX_PROJECTION_ORDER,
        });
    }
    let n = chart.n;
    let par = JetChart::parametric(n, chart.order);
    let g = |i: usize, r: i32| point.get(CoordId::homogeneous(i, r)).unwrap();
    let t = g(0, -1);
    let mut out = JetPoint::zero(par, t);
    let (u0, ud0, udd0) = (
        if chart.order >= 1 { g(0, 0) } else { 0.0 },
        if chart.order >= 2 { g(0, 1) } else { 0.0 },
        if chart.order >= 3 { g(0, 2) } else { 0.0 },
    );
    if chart.order >= 1 && u0 == 0.0 {
        return Err(HomogeneousError::Singular { u0 });
    }
    for i in 0..n {
        let m = i + 1;
        out.set(CoordId::parametric(i, -1), g(m, -1))?;
        if chart.order >= 1 {
            out.set(CoordId::parametric(i, 0), g(m, 0) / u0)?;
        }
        if chart.order >= 2 {
            let v1 = (u0 * g(m, 1) - ud0 * g(m, 0)) / u0.powi(3);
            out.set(CoordId::parametric(i, 1), v1)?;
        }
        if chart.order >= 3 {
            let v2 = (u0 * u0 * g(m, 2) - 3.0 * u0 * ud0 * g(m, 1)
                + (3.0 * ud0 * ud0 - u0 * udd0) * g(m, 0))
                / u0.powi(5);
            out.set(CoordId::parametric(i, 2), v2)?;
        }
    }
    Ok(out)
}

/// Lift a parametric Lagrangian of order at most 2 to the homogeneous chart:
/// `𝓛 = (L ∘ ℘) · u^0`. The lift satisfies the Zermelo conditions by
/// construction and has the same extremals under the projection.
pub fn lift_lagrangian(l: &LagrangianDef) -> Result<LagrangianDef, HomogeneousError> {
    let chart = *l.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(HomogeneousError::WrongChartKind {
            expected: ChartKind::Parametric.to_string(),
            found: chart.to_string(),
        });
    }
    if chart.order > 2 {
        return Err(HomogeneousError::UnsupportedOrder { found: chart.order, max: 2 });
    }
    let bindings = projection_bindings(chart.n, chart.order.max(1))?;
    let pulled = substitute(l.expr(), &bindings)?;
    let lifted = Expr::mul(pulled, hom(0, 0));
    Ok(LagrangianDef::new(ChartKind::Homogeneous, chart.n, lifted)?)
}

/// Lift a parametric source form of order at most 3 to the homogeneous
/// chart, as expressions:
///
/// `𝓔_0 = -Σ_i u^i · (E_i ∘ ℘)`, `𝓔_i = u^0 · (E_i ∘ ℘)`.
///
/// The result annihilates `u` (`Σ_α 𝓔_α u^α = 0` identically) and vanishes
/// along a lifted curve exactly when the parametric form vanishes along the
/// projected one.
pub fn lift_equation_form(form: &DynamicalForm) -> Result<DynamicalForm, HomogeneousError> {
    let chart = *form.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(HomogeneousError::WrongChartKind {
            expected: ChartKind::Parametric.to_string(),
            found: chart.to_string(),
        });
    }
    if chart.order > MAX_PROJECTION_ORDER {
        return Err(HomogeneousError::UnsupportedOrder {
            found: chart.order,
            max: MAX_PROJECTION_ORDER,
        });
    }
    let bindings = projection_bindings(chart.n, chart.order.max(1))?;
    let pulled: Vec<Expr> = form
        .components()
        .iter()
        .map(|e| substitute(e, &bindings))
        .collect::<Result<_, _>>()?;
    let mut comps = Vec::with_capacity(chart.n + 1);
    let e0 = Expr::neg(Expr::sum(
        pulled
            .iter()
            .enumerate()
            .map(|(i, e)| Expr::mul(hom(i + 1, 0), e.clone())),
    ));
    comps.push(e0);
    for e in &pulled {
        comps.push(Expr::mul(hom(0, 0), e.clone()));
    }
    Ok(DynamicalForm::new(ChartKind::Homogeneous, chart.n, comps)?)
}

/// Numerical values of the lifted form at a homogeneous jet point: the
/// parametric components are evaluated at the projected point and reassembled
/// as `(-Σ_i u^i E_i, u^0 E_1, …, u^0 E_n)`.
pub fn lift_equation(
    form: &DynamicalForm,
    point: &JetPoint,
    consts: &BTreeMap<String, f64>,
) -> Result<Vec<f64>, HomogeneousError> {
    if form.chart().kind != ChartKind::Parametric {
        return Err(HomogeneousError::WrongChartKind {
            expected: ChartKind::Parametric.to_string(),
            found: form.chart().to_string(),
        });
    }
    let projected = project_jet(point)?;
    let mut ev = Evaluator::new(&projected, consts);
    let vals: Vec<f64> = form
        .components()
        .iter()
        .map(|e| ev.eval(e))
        .collect::<Result<_, _>>()?;
    let n = form.chart().n;
    let u = |i: usize| point.get(CoordId::homogeneous(i, 0)).unwrap();
    let mut out = Vec::with_capacity(n + 1);
    out.push(-(0..n).map(|i| u(i + 1) * vals[i]).sum::<f64>());
    for v in &vals {
        out.push(u(0) * v);
    }
    Ok(out)
}
