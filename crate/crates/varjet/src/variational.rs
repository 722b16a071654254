//! The variational core: Euler–Poisson operators, the Helmholtz
//! self-adjointness criterion for arbitrary-order source forms, and the
//! Zermelo homogeneity conditions.

use crate::expr::{
    partial, scan, total_derivative, Evaluator, EvalError, Expr, Var,
};
use crate::jet::{ChartKind, CoordId, JetChart, JetPoint};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VariationalError {
    #[error("expression references {coord}, outside the {chart}")]
    CoordOutside { coord: String, chart: String },
    #[error("expression references the independent variable of the other chart family")]
    ForeignTime,
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("declared order {declared} but the components reference order {actual}")]
    DeclaredOrderMismatch { declared: i32, actual: i32 },
    #[error("evaluation point is a {found}, expected a {expected}")]
    PointChartMismatch { expected: String, found: String },
    #[error("evaluation point carries order {found}, this check needs order {needed}")]
    PointOrderTooLow { needed: i32, found: i32 },
    #[error("operation supports order at most {max}, found {found}")]
    UnsupportedOrder { found: i32, max: u32 },
    #[error("operation needs a {expected} expression, found {found}")]
    WrongChartKind { expected: String, found: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Check that every variable referenced by `expr` lives on the chart family
/// `(kind, n)`, and return the inferred order (0 when only positions and the
/// independent variable appear).
fn checked_order(kind: ChartKind, n: usize, expr: &Expr) -> Result<i32, VariationalError> {
    let deps = JetChart { kind, n, order: 0 }.deps();
    let refs = scan(expr);
    for c in &refs.coords {
        if c.kind != kind || c.i >= deps {
            return Err(VariationalError::CoordOutside {
                coord: c.to_string(),
                chart: JetChart { kind, n, order: c.r + 1 }.to_string(),
            });
        }
    }
    for k in &refs.times {
        if *k != kind {
            return Err(VariationalError::ForeignTime);
        }
    }
    Ok(refs.max_level(kind).map_or(0, |r| r + 1).max(0))
}

/// A Lagrangian on a jet chart. The chart's order is inferred from the
/// expression (the least order whose chart carries every referenced
/// coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDef {
    chart: JetChart,
    expr: Expr,
}

impl LagrangianDef {
    pub fn new(kind: ChartKind, n: usize, expr: Expr) -> Result<Self, VariationalError> {
        let order = checked_order(kind, n, &expr)?;
        Ok(LagrangianDef { chart: JetChart { kind, n, order }, expr })
    }

    pub fn chart(&self) -> &JetChart {
        &self.chart
    }

    /// Inferred order `s`: the expression references levels `r <= s-1` only.
    pub fn order(&self) -> i32 {
        self.chart.order
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<f64, VariationalError> {
        Ok(Evaluator::new(point, consts).eval(&self.expr)?)
    }
}

/// A source form: one expression per dependent coordinate of its chart, the
/// left-hand sides of a system `E_i = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalForm {
    chart: JetChart,
    components: Vec<Expr>,
}

impl DynamicalForm {
    /// Build with inferred order (the maximum over all components).
    pub fn new(
        kind: ChartKind,
        n: usize,
        components: Vec<Expr>,
    ) -> Result<Self, VariationalError> {
        let deps = JetChart { kind, n, order: 0 }.deps();
        if components.len() != deps {
            return Err(VariationalError::ComponentCount {
                expected: deps,
                found: components.len(),
            });
        }
        let mut order = 0;
        for comp in &components {
            order = order.max(checked_order(kind, n, comp)?);
        }
        Ok(DynamicalForm { chart: JetChart { kind, n, order }, components })
    }

    /// Build with a declared order, which must equal the inferred one.
    pub fn with_declared(
        kind: ChartKind,
        n: usize,
        order: i32,
        components: Vec<Expr>,
    ) -> Result<Self, VariationalError> {
        let form = DynamicalForm::new(kind, n, components)?;
        if form.chart.order != order {
            return Err(VariationalError::DeclaredOrderMismatch {
                declared: order,
                actual: form.chart.order,
            });
        }
        Ok(form)
    }

    pub fn chart(&self) -> &JetChart {
        &self.chart
    }

    pub fn order(&self) -> i32 {
        self.chart.order
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    /// Evaluate all components at a point through one shared cache.
    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<f64>, VariationalError> {
        let mut ev = Evaluator::new(point, consts);
        self.components
            .iter()
            .map(|e| ev.eval(e).map_err(VariationalError::from))
            .collect()
    }
}

/// Euler–Poisson operator of a Lagrangian of order `s`:
/// `E_i = Σ_{k=0}^{s} (-1)^k D^k ∂L/∂coord(i, k-1)`,
/// where `D` is the total derivative of the chart family and `coord(i, -1)`
/// is the position `x^i`.
pub fn euler_poisson(l: &LagrangianDef) -> DynamicalForm {
    let chart = l.chart;
    let s = chart.order.max(0);
    let components = (0..chart.deps())
        .map(|i| {
            let mut acc = Expr::num(0.0);
            for k in 0..=s {
                let mut term = partial(l.expr(), Var::Coord(CoordId { kind: chart.kind, i, r: k - 1 }));
                for _ in 0..k {
                    term = total_derivative(&term, chart.kind);
                }
                acc = if k % 2 == 0 {
                    Expr::add(acc, term)
                } else {
                    Expr::sub(acc, term)
                };
            }
            acc
        })
        .collect();
    DynamicalForm::new(chart.kind, chart.n, components).expect("euler_poisson preserves the chart")
}

fn binomial(k: i32, r: i32) -> f64 {
    let mut acc = 1.0f64;
    for j in 0..r {
        acc = acc * (k - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// One cell of the Helmholtz table: at derivative level `r`, the pairing of
/// component `i` against component `j`.
#[derive(Debug, Clone)]
pub struct HelmholtzEntry {
    pub r: i32,
    pub i: usize,
    pub j: usize,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// Numerical value of one Helmholtz cell at a point.
#[derive(Debug, Clone, Copy)]
pub struct HelmholtzResidual {
    pub r: i32,
    pub i: usize,
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub abs: f64,
    /// `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
    pub rel: f64,
}

/// The full Helmholtz criterion for a source form of order `s`: for every
/// level `r ∈ 0..=s` and every component pair `(i, j)`,
///
/// `∂E_i/∂coord(j, r-1)  =  Σ_{k=r}^{s} (-1)^k C(k, r) D^{k-r} ∂E_j/∂coord(i, k-1)`.
///
/// The form is variational (an Euler–Poisson operator of some Lagrangian)
/// exactly when every cell vanishes identically.
#[derive(Debug, Clone)]
pub struct HelmholtzSystem {
    chart: JetChart,
    s: i32,
    entries: Vec<HelmholtzEntry>,
}

impl HelmholtzSystem {
    pub fn order(&self) -> i32 {
        self.s
    }

    /// Minimal jet order an evaluation point must carry.
    pub fn point_order(&self) -> i32 {
        2 * self.s
    }

    pub fn entries(&self) -> &[HelmholtzEntry] {
        &self.entries
    }

    fn check_point(&self, point: &JetPoint) -> Result<(), VariationalError> {
        let pc = point.chart();
        if pc.kind != self.chart.kind || pc.n != self.chart.n {
            return Err(VariationalError::PointChartMismatch {
                expected: self.chart.with_order(self.point_order()).to_string(),
                found: pc.to_string(),
            });
        }
        if pc.order < self.point_order() {
            return Err(VariationalError::PointOrderTooLow {
                needed: self.point_order(),
                found: pc.order,
            });
        }
        Ok(())
    }

    /// All cell residuals at one point (one shared evaluation cache).
    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<HelmholtzResidual>, VariationalError> {
        self.check_point(point)?;
        let mut ev = Evaluator::new(point, consts);
        self.entries
            .iter()
            .map(|e| {
                let lhs = ev.eval(&e.lhs)?;
                let rhs = ev.eval(&e.rhs)?;
                let abs = (lhs - rhs).abs();
                Ok(HelmholtzResidual {
                    r: e.r,
                    i: e.i,
                    j: e.j,
                    lhs,
                    rhs,
                    abs,
                    rel: abs / 1.0f64.max(lhs.abs()).max(rhs.abs()),
                })
            })
            .collect()
    }

    /// Largest relative residual at one point.
    pub fn max_rel(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<f64, VariationalError> {
        Ok(self
            .evaluate(point, consts)?
            .iter()
            .map(|r| r.rel)
            .fold(0.0, f64::max))
    }
}

/// Build the Helmholtz criterion of a source form.
pub fn helmholtz(form: &DynamicalForm) -> HelmholtzSystem {
    let chart = *form.chart();
    let s = form.order().max(0);
    let deps = chart.deps();
    let kind = chart.kind;
    let mut entries = Vec::new();
    for r in 0..=s {
        for i in 0..deps {
            for j in 0..deps {
                let lhs = partial(
                    form.component(i),
                    Var::Coord(CoordId { kind, i: j, r: r - 1 }),
                );
                let mut rhs = Expr::num(0.0);
                for k in r..=s {
                    let mut term = partial(
                        form.component(j),
                        Var::Coord(CoordId { kind, i, r: k - 1 }),
                    );
                    for _ in 0..(k - r) {
                        term = total_derivative(&term, kind);
                    }
                    let coeff = if k % 2 == 0 { binomial(k, r) } else { -binomial(k, r) };
                    rhs = Expr::add(rhs, Expr::mul(Expr::num(coeff), term));
                }
                entries.push(HelmholtzEntry { r, i, j, lhs, rhs });
            }
        }
    }
    HelmholtzSystem { chart, s, entries }
}

/// One entry of the split Helmholtz variant.
#[derive(Debug, Clone)]
pub enum SplitEntry {
    /// The antisymmetry combination `Z_{ij}` (must vanish identically).
    Antisym { i: usize, j: usize, expr: Expr },
    /// A level `r >= 1` cell of the main criterion.
    Row(HelmholtzEntry),
}

/// Numerical value of one split-variant entry.
#[derive(Debug, Clone, Copy)]
pub struct SplitResidual {
    pub r: i32,
    pub i: usize,
    pub j: usize,
    pub abs: f64,
    pub rel: f64,
}

/// The split form of the criterion: an explicit antisymmetry block
///
/// `Z_{ij} = ∂E_i/∂x^j - ∂E_j/∂x^i
///          + Σ_{k=0}^{s} (-1)^k D^k ( ∂E_i/∂coord(j, k-1) - ∂E_j/∂coord(i, k-1) )`
///
/// over pairs `i < j` (the `k = 0` summand repeats the leading difference by
/// construction), together with the `r >= 1` rows of the main criterion.
/// Both blocks vanish identically exactly when the main criterion does.
#[derive(Debug, Clone)]
pub struct SplitSystem {
    chart: JetChart,
    s: i32,
    entries: Vec<SplitEntry>,
}

impl SplitSystem {
    pub fn point_order(&self) -> i32 {
        2 * self.s
    }

    pub fn entries(&self) -> &[SplitEntry] {
        &self.entries
    }

    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<SplitResidual>, VariationalError> {
        let pc = point.chart();
        if pc.kind != self.chart.kind || pc.n != self.chart.n {
            return Err(VariationalError::PointChartMismatch {
                expected: self.chart.with_order(self.point_order()).to_string(),
                found: pc.to_string(),
            });
        }
        if pc.order < self.point_order() {
            return Err(VariationalError::PointOrderTooLow {
                needed: self.point_order(),
                found: pc.order,
            });
        }
        let mut ev = Evaluator::new(point, consts);
        self.entries
            .iter()
            .map(|entry| match entry {
                SplitEntry::Antisym { i, j, expr } => {
                    let v = ev.eval(expr)?;
                    Ok(SplitResidual {
                        r: -1,
                        i: *i,
                        j: *j,
                        abs: v.abs(),
                        rel: v.abs() / 1.0f64.max(v.abs()),
                    })
                }
                SplitEntry::Row(e) => {
                    let lhs = ev.eval(&e.lhs)?;
                    let rhs = ev.eval(&e.rhs)?;
                    let abs = (lhs - rhs).abs();
                    Ok(SplitResidual {
                        r: e.r,
                        i: e.i,
                        j: e.j,
                        abs,
                        rel: abs / 1.0f64.max(lhs.abs()).max(rhs.abs()),
                    })
                }
            })
            .collect()
    }

    pub fn max_rel(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<f64, VariationalError> {
        Ok(self
            .evaluate(point, consts)?
            .iter()
            .map(|r| r.rel)
            .fold(0.0, f64::max))
    }
}

/// Build the split variant of the Helmholtz criterion.
pub fn helmholtz_split(form: &DynamicalForm) -> SplitSystem {
    let chart = *form.chart();
    let s = form.order().max(0);
    let deps = chart.deps();
    let kind = chart.kind;
    let mut entries = Vec::new();
    for i in 0..deps {
        for j in (i + 1)..deps {
            let dx = |a: usize, b: usize| {
                partial(form.component(a), Var::Coord(CoordId { kind, i: b, r: -1 }))
            };
            let mut z = Expr::sub(dx(i, j), dx(j, i));
            for k in 0..=s {
                let pi = partial(form.component(i), Var::Coord(CoordId { kind, i: j, r: k - 1 }));
                let pj = partial(form.component(j), Var::Coord(CoordId { kind, i, r: k - 1 }));
                let mut term = Expr::sub(pi, pj);
                for _ in 0..k {
                    term = total_derivative(&term, kind);
                }
                z = if k % 2 == 0 { Expr::add(z, term) } else { Expr::sub(z, term) };
            }
            entries.push(SplitEntry::Antisym { i, j, expr: z });
        }
    }
    let main = helmholtz(form);
    entries.extend(
        main.entries
            .into_iter()
            .filter(|e| e.r >= 1)
            .map(SplitEntry::Row),
    );
    SplitSystem { chart, s, entries }
}

/// The Zermelo homogeneity conditions of a homogeneous-chart Lagrangian of
/// order at most 2:
///
/// `Z1 = Σ_β u^β ∂𝓛/∂u^β + 2 Σ_β u̇^β ∂𝓛/∂u̇^β - 𝓛`,
/// `Z2 = Σ_β u^β ∂𝓛/∂u̇^β`
///
/// (raw index contractions). Both vanish identically exactly when the action
/// is invariant under orientation-preserving reparametrizations of `ζ`.
#[derive(Debug, Clone)]
pub struct ZermeloConditions {
    pub z1: Expr,
    pub z2: Expr,
}

impl ZermeloConditions {
    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<(f64, f64), VariationalError> {
        let mut ev = Evaluator::new(point, consts);
        Ok((ev.eval(&self.z1)?, ev.eval(&self.z2)?))
    }
}

/// Build the Zermelo conditions. Errors unless the Lagrangian lives on a
/// homogeneous chart with order at most 2.
pub fn zermelo(l: &LagrangianDef) -> Result<ZermeloConditions, VariationalError> {
    let chart = *l.chart();
    if chart.kind != ChartKind::Homogeneous {
        return Err(VariationalError::WrongChartKind {
            expected: ChartKind::Homogeneous.to_string(),
            found: chart.kind.to_string(),
        });
    }
    if chart.order > 2 {
        return Err(VariationalError::UnsupportedOrder { found: chart.order, max: 2 });
    }
    let kind = chart.kind;
    let mut z1 = Expr::neg(l.expr().clone());
    let mut z2 = Expr::num(0.0);
    for b in 0..chart.deps() {
        let u = Expr::coord(CoordId { kind, i: b, r: 0 });
        let ud = Expr::coord(CoordId { kind, i: b, r: 1 });
        let du = partial(l.expr(), Var::Coord(CoordId { kind, i: b, r: 0 }));
        let dud = partial(l.expr(), Var::Coord(CoordId { kind, i: b, r: 1 }));
        z1 = Expr::add(z1, Expr::mul(u.clone(), du));
        z1 = Expr::add(z1, Expr::mul(Expr::num(2.0), Expr::mul(ud, dud.clone())));
        z2 = Expr::add(z2, Expr::mul(u, dud));
    }
    Ok(ZermeloConditions { z1, z2 })
}
