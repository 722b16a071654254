//! Variational normal forms for third- and fourth-order systems, their
//! integrability conditions, closed-form coefficients from Lagrangians, the
//! second-order (classical) degeneration, and the first-order residuals.
//!
//! A third-order source form in normal shape reads
//!
//! `E_i = A_{ij}(t,x,v) z^j + (w·∂_v)A_{ij} w^j + B_{ij}(t,x,v) w^j + c_i(t,x,v)`
//!
//! with `w = v'`, `z = v''` and `A` skew-symmetric; a fourth-order one
//!
//! `E_i = M_{ij} w''^j + w'^l (∂M_{ij}/∂w^l) w'^j + 2 (D_v M_{ij}) w'^j
//!        + A_{ij} w'^j + b_i`
//!
//! with coefficients depending on `(t,x,v,w)`, `M` symmetric and `A` skew.
//! [`extract_shape3`] / [`extract_shape4`] recover the coefficients from a
//! form and verify the structural constraints numerically;
//! [`shape3_conditions`] / [`shape4_conditions`] build the systems of
//! integrability conditions that characterize variationality of a form in
//! normal shape.

use crate::expr::{
    partial, scan, substitute, DiffOperator, Evaluator, EvalError, Expr, SubstituteError, Var,
};
use crate::jet::{sample_jetpoint, ChartKind, CoordId, JetChart, JetError, JetPoint, SampleRanges};
use crate::variational::{DynamicalForm, LagrangianDef, VariationalError};
use std::collections::BTreeMap;
use thiserror::Error;

/// Points used by the numeric structure checks during extraction.
pub const STRUCTURE_POINTS: u64 = 20;
/// Absolute tolerance of the structure checks.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("normal shapes are defined on parametric charts, found {found}")]
    WrongChartKind { found: String },
    #[error("the form has order {found}, this shape covers order at most {max}")]
    OrderTooHigh { found: i32, max: i32 },
    #[error("not in normal shape: check `{check}` fails with residual {max_abs:.3e}")]
    NotNormalForm { check: &'static str, max_abs: f64 },
    #[error(transparent)]
    Substitute(#[from] SubstituteError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

fn par(i: usize, r: i32) -> CoordId {
    CoordId::parametric(i, r)
}

fn d(e: &Expr, i: usize, r: i32) -> Expr {
    partial(e, Var::Coord(par(i, r)))
}

fn dt(e: &Expr) -> Expr {
    partial(e, Var::Time(ChartKind::Parametric))
}

/// Substitute 0 for every referenced coordinate at the given levels, leaving
/// all other variables in place.
fn kill_levels(e: &Expr, levels: &[i32]) -> Result<Expr, ShapeError> {
    let refs = scan(e);
    let mut map = BTreeMap::new();
    for c in refs.coords {
        let replacement = if levels.contains(&c.r) {
            Expr::num(0.0)
        } else {
            Expr::coord(c)
        };
        map.insert(Var::Coord(c), replacement);
    }
    for k in refs.times {
        map.insert(Var::Time(k), Expr::time(k));
    }
    Ok(substitute(e, &map)?)
}

/// Evaluate a family of labelled check expressions at sampled points; fail
/// with the first label whose residual exceeds [`STRUCTURE_TOL`].
fn run_structure_checks(
    checks: &[(&'static str, Vec<Expr>)],
    chart: &JetChart,
    ranges: &SampleRanges,
    seed: u64,
    consts: &BTreeMap<String, f64>,
) -> Result<(), ShapeError> {
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    for p in 0..STRUCTURE_POINTS {
        let point = sample_jetpoint(chart, ranges, seed.wrapping_add(p))?;
        let mut ev = Evaluator::new(&point, consts);
        for (label, exprs) in checks {
            for e in exprs {
                let v = ev.eval(e)?.abs();
                let slot = worst.entry(label).or_insert(0.0);
                if v > *slot {
                    *slot = v;
                }
            }
        }
    }
    for (label, _) in checks {
        let max_abs = worst.get(label).copied().unwrap_or(0.0);
        if max_abs > STRUCTURE_TOL {
            return Err(ShapeError::NotNormalForm { check: label, max_abs });
        }
    }
    Ok(())
}

/// Coefficients of a third-order normal shape: `A` skew, `B`, `c`, all
/// functions of `(t, x, v)`.
#[derive(Debug, Clone)]
pub struct Shape3 {
    pub n: usize,
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Vec<Expr>>,
    pub c: Vec<Expr>,
}

impl Shape3 {
    /// Rebuild the source form the shape represents.
    pub fn reconstruct(&self) -> Vec<Expr> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut e = Expr::num(0.0);
                for j in 0..n {
                    e = Expr::add(e, Expr::mul(self.a[i][j].clone(), Expr::coord(par(j, 2))));
                    for l in 0..n {
                        e = Expr::add(
                            e,
                            Expr::mul(
                                Expr::coord(par(l, 1)),
                                Expr::mul(d(&self.a[i][j], l, 0), Expr::coord(par(j, 1))),
                            ),
                        );
                    }
                    e = Expr::add(e, Expr::mul(self.b[i][j].clone(), Expr::coord(par(j, 1))));
                }
                Expr::add(e, self.c[i].clone())
            })
            .collect()
    }
}

/// Coefficients of a fourth-order normal shape: `M` symmetric, `A` skew,
/// `b`, all functions of `(t, x, v, w)`.
#[derive(Debug, Clone)]
pub struct Shape4 {
    pub n: usize,
    pub m: Vec<Vec<Expr>>,
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
}

impl Shape4 {
    /// Rebuild the source form the shape represents.
    pub fn reconstruct(&self) -> Vec<Expr> {
        let n = self.n;
        let dv = DiffOperator::truncated(ChartKind::Parametric, n, 0);
        (0..n)
            .map(|i| {
                let mut e = Expr::num(0.0);
                for j in 0..n {
                    e = Expr::add(e, Expr::mul(self.m[i][j].clone(), Expr::coord(par(j, 3))));
                    for l in 0..n {
                        e = Expr::add(
                            e,
                            Expr::mul(
                                Expr::coord(par(l, 2)),
                                Expr::mul(d(&self.m[i][j], l, 1), Expr::coord(par(j, 2))),
                            ),
                        );
                    }
                    e = Expr::add(
                        e,
                        Expr::mul(
                            Expr::num(2.0),
                            Expr::mul(dv.apply(&self.m[i][j]), Expr::coord(par(j, 2))),
                        ),
                    );
                    e = Expr::add(e, Expr::mul(self.a[i][j].clone(), Expr::coord(par(j, 2))));
                }
                Expr::add(e, self.b[i].clone())
            })
            .collect()
    }
}

fn require_parametric(form: &DynamicalForm, max_order: i32) -> Result<usize, ShapeError> {
    let chart = form.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(ShapeError::WrongChartKind { found: chart.to_string() });
    }
    if chart.order > max_order {
        return Err(ShapeError::OrderTooHigh { found: chart.order, max: max_order });
    }
    Ok(chart.n)
}

/// Extract third-order normal-shape coefficients from a source form of order
/// at most 3. The structural constraints — affineness in `v''`, the
/// `(v', v'')`-independence of `A`, skewness of `A`, and `v'`-independence of
/// `B` — are verified numerically at sampled points and violation reports the
/// failing check.
pub fn extract_shape3(
    form: &DynamicalForm,
    ranges: &SampleRanges,
    seed: u64,
    consts: &BTreeMap<String, f64>,
) -> Result<Shape3, ShapeError> {
    let n = require_parametric(form, 3)?;
    let a: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(form.component(i), j, 2)).collect())
        .collect();

    let mut affine = Vec::new();
    let mut w_indep = Vec::new();
    let mut skew = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                affine.push(d(&a[i][j], l, 2));
                w_indep.push(d(&a[i][j], l, 1));
            }
            skew.push(Expr::add(a[i][j].clone(), a[j][i].clone()));
        }
    }

    let residual: Vec<Expr> = (0..n)
        .map(|i| {
            let mut e = form.component(i).clone();
            for j in 0..n {
                e = Expr::sub(e, Expr::mul(a[i][j].clone(), Expr::coord(par(j, 2))));
                for l in 0..n {
                    e = Expr::sub(
                        e,
                        Expr::mul(
                            Expr::coord(par(l, 1)),
                            Expr::mul(d(&a[i][j], l, 0), Expr::coord(par(j, 1))),
                        ),
                    );
                }
            }
            e
        })
        .collect();

    let b: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(&residual[i], j, 1)).collect())
        .collect();
    let mut b_w_indep = Vec::new();
    for row in &b {
        for entry in row {
            for l in 0..n {
                b_w_indep.push(d(entry, l, 1));
            }
        }
    }

    let chart3 = form.chart().with_order(3);
    run_structure_checks(
        &[
            ("affine in v''", affine),
            ("A independent of v'", w_indep),
            ("A skew-symmetric", skew),
            ("B independent of v'", b_w_indep),
        ],
        &chart3,
        ranges,
        seed,
        consts,
    )?;

    let c = residual
        .iter()
        .map(|e| kill_levels(e, &[1, 2]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Shape3 { n, a, b, c })
}

/// Extract fourth-order normal-shape coefficients from a source form of
/// order at most 4, verifying affineness in `v'''`, the
/// `(v'', v''')`-independence and symmetry of `M`, and the
/// `v''`-independence and skewness of `A` numerically.
pub fn extract_shape4(
    form: &DynamicalForm,
    ranges: &SampleRanges,
    seed: u64,
    consts: &BTreeMap<String, f64>,
) -> Result<Shape4, ShapeError> {
    let n = require_parametric(form, 4)?;
    let m: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(form.component(i), j, 3)).collect())
        .collect();

    let mut affine = Vec::new();
    let mut wp_indep = Vec::new();
    let mut sym = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                affine.push(d(&m[i][j], l, 3));
                wp_indep.push(d(&m[i][j], l, 2));
            }
            sym.push(Expr::sub(m[i][j].clone(), m[j][i].clone()));
        }
    }

    let dv = DiffOperator::truncated(ChartKind::Parametric, n, 0);
    let residual2: Vec<Expr> = (0..n)
        .map(|i| {
            let mut e = form.component(i).clone();
            for j in 0..n {
                e = Expr::sub(e, Expr::mul(m[i][j].clone(), Expr::coord(par(j, 3))));
                for l in 0..n {
                    e = Expr::sub(
                        e,
                        Expr::mul(
                            Expr::coord(par(l, 2)),
                            Expr::mul(d(&m[i][j], l, 1), Expr::coord(par(j, 2))),
                        ),
                    );
                }
                e = Expr::sub(
                    e,
                    Expr::mul(
                        Expr::num(2.0),
                        Expr::mul(dv.apply(&m[i][j]), Expr::coord(par(j, 2))),
                    ),
                );
            }
            e
        })
        .collect();

    let a: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(&residual2[i], j, 2)).collect())
        .collect();
    let mut a_wp_indep = Vec::new();
    let mut a_skew = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                a_wp_indep.push(d(&a[i][j], l, 2));
            }
            a_skew.push(Expr::add(a[i][j].clone(), a[j][i].clone()));
        }
    }

    let chart4 = form.chart().with_order(4);
    run_structure_checks(
        &[
            ("affine in v'''", affine),
            ("M independent of v''", wp_indep),
            ("M symmetric", sym),
            ("A independent of v''", a_wp_indep),
            ("A skew-symmetric", a_skew),
        ],
        &chart4,
        ranges,
        seed,
        consts,
    )?;

    let b = residual2
        .iter()
        .map(|e| kill_levels(e, &[2, 3]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Shape4 { n, m, a, b })
}

// ---------------------------------------------------------------------------
// condition systems

/// One integrability condition: a named expression with its (1-based) index
/// slot, which must vanish identically for the shape to be variational.
#[derive(Debug, Clone)]
pub struct ConditionEntry {
    pub name: &'static str,
    /// 1-based index slot, matching the displayed coordinate numbering.
    pub indices: Vec<usize>,
    pub expr: Expr,
}

/// Value of one condition at a point.
#[derive(Debug, Clone)]
pub struct ConditionResidual {
    pub name: &'static str,
    pub indices: Vec<usize>,
    pub value: f64,
}

/// A family of integrability conditions ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct ConditionSet {
    entries: Vec<ConditionEntry>,
}

impl ConditionSet {
    pub fn entries(&self) -> &[ConditionEntry] {
        &self.entries
    }

    /// Find one condition by name and 1-based indices.
    pub fn entry(&self, name: &str, indices: &[usize]) -> Option<&ConditionEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name && e.indices == indices)
    }

    /// Evaluate every condition at a point (shared evaluation cache).
    pub fn evaluate(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<ConditionResidual>, ShapeError> {
        let mut ev = Evaluator::new(point, consts);
        self.entries
            .iter()
            .map(|e| {
                Ok(ConditionResidual {
                    name: e.name,
                    indices: e.indices.clone(),
                    value: ev.eval(&e.expr)?,
                })
            })
            .collect()
    }

    /// Largest absolute residual at a point.
    pub fn max_abs(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<f64, ShapeError> {
        Ok(self
            .evaluate(point, consts)?
            .iter()
            .map(|r| r.value.abs())
            .fold(0.0, f64::max))
    }
}

/// `(1/3!) Σ_σ sign(σ) term(σ(i), σ(j), σ(l))` — full antisymmetrization
/// over three index slots.
fn antisym3(i: usize, j: usize, l: usize, term: impl Fn(usize, usize, usize) -> Expr) -> Expr {
    let plus = [(i, j, l), (j, l, i), (l, i, j)];
    let minus = [(j, i, l), (i, l, j), (l, j, i)];
    let mut acc = Expr::num(0.0);
    for (a, b, c) in plus {
        acc = Expr::add(acc, term(a, b, c));
    }
    for (a, b, c) in minus {
        acc = Expr::sub(acc, term(a, b, c));
    }
    Expr::div(acc, Expr::num(6.0))
}

fn half(e: Expr) -> Expr {
    Expr::div(e, Expr::num(2.0))
}

/// The integrability conditions of a third-order normal shape, with the
/// truncated derivative `D_x = ∂_t + v·∂_x`:
///
/// * `(i')`   `∂_v[i A_jl] = 0` (full three-index antisymmetrization),
/// * `(ii')`  `2 B_[ij] - 3 D_x A_ij = 0`,
/// * `(iv')`  `2 ∂_v[i B_j]l - 4 ∂_x[i A_j]l + ∂_x^l A_ij + 2 D_x ∂_v^l A_ij = 0`,
/// * `(v')`   `∂_v(i c_j) - D_x B_(ij) = 0`,
/// * `(vi')`  `2 ∂_v^l ∂_v[i c_j] - 4 ∂_x[i B_j]l + D_x² ∂_v^l A_ij + 6 D_x ∂_x[i A_j]l = 0`,
/// * `(vii)`  `4 ∂_x[i c_j] - 2 D_x ∂_v[i c_j] - D_x³ A_ij = 0`,
///
/// where bracketed index pairs average with weight 1/2 and the three-index
/// bracket with weight 1/3!. A shape in normal form is variational exactly
/// when all of these vanish identically.
pub fn shape3_conditions(shape: &Shape3) -> ConditionSet {
    let n = shape.n;
    let dx = DiffOperator::truncated(ChartKind::Parametric, n, -1);
    let a = &shape.a;
    let b = &shape.b;
    let c = &shape.c;
    let mut entries = Vec::new();

    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                entries.push(ConditionEntry {
                    name: "(i')",
                    indices: vec![i + 1, j + 1, l + 1],
                    expr: antisym3(i, j, l, |p, q, r| d(&a[q][r], p, 0)),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            entries.push(ConditionEntry {
                name: "(ii')",
                indices: vec![i + 1, j + 1],
                expr: Expr::sub(
                    Expr::sub(b[i][j].clone(), b[j][i].clone()),
                    Expr::mul(Expr::num(3.0), dx.apply(&a[i][j])),
                ),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let e = Expr::add(
                    Expr::sub(
                        Expr::sub(d(&b[j][l], i, 0), d(&b[i][l], j, 0)),
                        Expr::mul(
                            Expr::num(2.0),
                            Expr::sub(d(&a[j][l], i, -1), d(&a[i][l], j, -1)),
                        ),
                    ),
                    Expr::add(
                        d(&a[i][j], l, -1),
                        Expr::mul(Expr::num(2.0), dx.apply(&d(&a[i][j], l, 0))),
                    ),
                );
                entries.push(ConditionEntry {
                    name: "(iv')",
                    indices: vec![i + 1, j + 1, l + 1],
                    expr: e,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let e = Expr::sub(
                half(Expr::add(d(&c[j], i, 0), d(&c[i], j, 0))),
                dx.apply(&half(Expr::add(b[i][j].clone(), b[j][i].clone()))),
            );
            entries.push(ConditionEntry { name: "(v')", indices: vec![i + 1, j + 1], expr: e });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let dv_c = Expr::sub(d(&c[j], i, 0), d(&c[i], j, 0));
                let e = Expr::add(
                    Expr::sub(
                        d(&dv_c, l, 0),
                        Expr::mul(
                            Expr::num(2.0),
                            Expr::sub(d(&b[j][l], i, -1), d(&b[i][l], j, -1)),
                        ),
                    ),
                    Expr::add(
                        dx.apply(&dx.apply(&d(&a[i][j], l, 0))),
                        Expr::mul(
                            Expr::num(3.0),
                            dx.apply(&Expr::sub(d(&a[j][l], i, -1), d(&a[i][l], j, -1))),
                        ),
                    ),
                );
                entries.push(ConditionEntry {
                    name: "(vi')",
                    indices: vec![i + 1, j + 1, l + 1],
                    expr: e,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dx_c = Expr::sub(d(&c[j], i, -1), d(&c[i], j, -1));
            let dv_c = Expr::sub(d(&c[j], i, 0), d(&c[i], j, 0));
            let e = Expr::sub(
                Expr::sub(Expr::mul(Expr::num(2.0), dx_c), dx.apply(&dv_c)),
                dx.apply(&dx.apply(&dx.apply(&a[i][j]))),
            );
            entries.push(ConditionEntry { name: "(vii)", indices: vec![i + 1, j + 1], expr: e });
        }
    }
    ConditionSet { entries }
}

struct Shape4Builder<'a> {
    dv: DiffOperator,
    m: &'a [Vec<Expr>],
    a: &'a [Vec<Expr>],
    b: &'a [Expr],
}

impl<'a> Shape4Builder<'a> {
    /// `(ii)_{ij} = (∂_w^i b_j - ∂_w^j b_i) + 3 D_v A_ij`.
    fn cond_ii(&self, i: usize, j: usize) -> Expr {
        Expr::add(
            Expr::sub(d(&self.b[j], i, 1), d(&self.b[i], j, 1)),
            Expr::mul(Expr::num(3.0), self.dv.apply(&self.a[i][j])),
        )
    }

    /// `(iv)_{ijk}` with `(i, j)` the antisymmetrized pair and `k` the
    /// `w`-derivative slot.
    fn cond_iv(&self, i: usize, j: usize, k: usize) -> Expr {
        let dv_b = Expr::sub(d(&self.b[j], i, 0), d(&self.b[i], j, 0));
        let mut e = d(&dv_b, k, 1);
        e = Expr::sub(
            e,
            Expr::mul(
                Expr::num(2.0),
                Expr::sub(d(&self.a[j][k], i, -1), d(&self.a[i][k], j, -1)),
            ),
        );
        e = Expr::add(e, d(&self.a[i][j], k, -1));
        e = Expr::add(
            e,
            Expr::mul(Expr::num(2.0), self.dv.apply(&d(&self.a[i][j], k, 0))),
        );
        e = Expr::sub(
            e,
            Expr::mul(
                Expr::num(2.0),
                self.dv
                    .apply(&Expr::sub(d(&self.m[j][k], i, -1), d(&self.m[i][k], j, -1))),
            ),
        );
        let dvm = Expr::sub(d(&self.m[j][k], i, 0), d(&self.m[i][k], j, 0));
        Expr::sub(e, self.dv.apply(&self.dv.apply(&dvm)))
    }

    /// `(v)_{ij} = ∂_v(i b_j) - D_v ∂_w(i b_j) + D_v³ M_ij`.
    fn cond_v(&self, i: usize, j: usize) -> Expr {
        let e = Expr::sub(
            half(Expr::add(d(&self.b[j], i, 0), d(&self.b[i], j, 0))),
            self.dv
                .apply(&half(Expr::add(d(&self.b[j], i, 1), d(&self.b[i], j, 1)))),
        );
        Expr::add(
            e,
            self.dv
                .apply(&self.dv.apply(&self.dv.apply(&self.m[i][j]))),
        )
    }
}

/// The integrability conditions of a fourth-order normal shape, with the
/// truncated derivative `D_v = ∂_t + v·∂_x + w·∂_v`:
///
/// * `(j)`    `∂_w^i A_jk + 2 ∂_v[j M_k]i = 0`,
/// * `(i)`    `∂_v[i A_jk] = 0` (full three-index antisymmetrization),
/// * `(ii)`   `2 ∂_w[i b_j] + 3 D_v A_ij = 0`,
/// * `(jjj)`  `∂_w^i ∂_w^j b_k + (∂_v^i A_jk + ∂_v^j A_ik)
///             - (∂_x^i M_jk + ∂_x^j M_ik + ∂_x^k M_ij)
///             + D_v (∂_v^k M_ij - 2 ∂_v^i M_jk - 2 ∂_v^j M_ik)
///             - D_v² ∂_w^i M_jk = 0`,
/// * `(iv)`   `2 ∂_w^k ∂_v[i b_j] - 4 ∂_x[i A_j]k + ∂_x^k A_ij + 2 D_v ∂_v^k A_ij
///             - 4 D_v ∂_x[i M_j]k - 2 D_v² ∂_v[i M_j]k = 0`,
/// * `(v)`    `∂_v(i b_j) - D_v ∂_w(i b_j) + D_v³ M_ij = 0`,
/// * `(vi)`   `4 ∂_x[i b_j] - 2 D_v ∂_v[i b_j] - D_v³ A_ij = 0`,
///
/// plus the dissertation combination
///
/// * `diss8.7`  `∂_w^k (v)_ij - (iv)_kij + 2 (iv)_ikj - ∂_w^k (ii)_ij + 2 ∂_v^j (ii)_ik`,
///
/// where the first `(iv)` subscript is the `w`-derivative slot and the
/// remaining two the antisymmetrized pair. On Lagrangian-generated shapes
/// every listed condition vanishes identically.
pub fn shape4_conditions(shape: &Shape4) -> ConditionSet {
    let n = shape.n;
    let dv = DiffOperator::truncated(ChartKind::Parametric, n, 0);
    let builder = Shape4Builder { dv: dv.clone(), m: &shape.m, a: &shape.a, b: &shape.b };
    let m = &shape.m;
    let a = &shape.a;
    let b = &shape.b;
    let mut entries = Vec::new();

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let e = Expr::add(
                    d(&a[j][k], i, 1),
                    Expr::sub(d(&m[k][i], j, 0), d(&m[j][i], k, 0)),
                );
                entries.push(ConditionEntry {
                    name: "(j)",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: e,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                entries.push(ConditionEntry {
                    name: "(i)",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: antisym3(i, j, k, |p, q, r| d(&a[q][r], p, 0)),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            entries.push(ConditionEntry {
                name: "(ii)",
                indices: vec![i + 1, j + 1],
                expr: builder.cond_ii(i, j),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut e = d(&d(&b[k], i, 1), j, 1);
                e = Expr::add(e, Expr::add(d(&a[i][k], j, 0), d(&a[j][k], i, 0)));
                e = Expr::sub(
                    e,
                    Expr::add(
                        Expr::add(d(&m[j][k], i, -1), d(&m[i][k], j, -1)),
                        d(&m[i][j], k, -1),
                    ),
                );
                let dv_arg = Expr::sub(
                    d(&m[i][j], k, 0),
                    Expr::mul(
                        Expr::num(2.0),
                        Expr::add(d(&m[j][k], i, 0), d(&m[i][k], j, 0)),
                    ),
                );
                e = Expr::add(e, dv.apply(&dv_arg));
                e = Expr::sub(e, dv.apply(&dv.apply(&d(&m[j][k], i, 1))));
                entries.push(ConditionEntry {
                    name: "(jjj)",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: e,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                entries.push(ConditionEntry {
                    name: "(iv)",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: builder.cond_iv(i, j, k),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            entries.push(ConditionEntry {
                name: "(v)",
                indices: vec![i + 1, j + 1],
                expr: builder.cond_v(i, j),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dx_b = Expr::sub(d(&b[j], i, -1), d(&b[i], j, -1));
            let dv_b = Expr::sub(d(&b[j], i, 0), d(&b[i], j, 0));
            let e = Expr::sub(
                Expr::sub(Expr::mul(Expr::num(2.0), dx_b), dv.apply(&dv_b)),
                dv.apply(&dv.apply(&dv.apply(&a[i][j]))),
            );
            entries.push(ConditionEntry { name: "(vi)", indices: vec![i + 1, j + 1], expr: e });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // (iv) subscripts read (w-slot, pair): (iv)_kij -> pair (i,j),
                // slot k; (iv)_ikj -> pair (k,j), slot i.
                let mut e = d(&builder.cond_v(i, j), k, 1);
                e = Expr::sub(e, builder.cond_iv(i, j, k));
                e = Expr::add(e, Expr::mul(Expr::num(2.0), builder.cond_iv(k, j, i)));
                e = Expr::sub(e, d(&builder.cond_ii(i, j), k, 1));
                e = Expr::add(
                    e,
                    Expr::mul(Expr::num(2.0), d(&builder.cond_ii(i, k), j, 0)),
                );
                entries.push(ConditionEntry {
                    name: "diss8.7",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: e,
                });
            }
        }
    }
    ConditionSet { entries }
}

// ---------------------------------------------------------------------------
// closed-form coefficients from Lagrangians

/// Third-order shape coefficients of the Euler–Poisson operator of a
/// Lagrangian `L = ℓ0(t,x,v) + ℓ_i(t,x,v) w^i` affine in `w = v'`
/// (order-1 Lagrangians work with `ℓ_i = 0`):
///
/// `A_ik = ∂ℓ_i/∂v^k - ∂ℓ_k/∂v^i`,
/// `B_ik = ∂ℓ_k/∂x^i - D_x ∂ℓ_k/∂v^i + 2 D_x ∂ℓ_i/∂v^k + ∂ℓ_i/∂x^k - ∂²ℓ0/∂v^i∂v^k`,
/// `c_i = ∂ℓ0/∂x^i - D_x ∂ℓ0/∂v^i + D_x² ℓ_i`.
///
/// Affineness in `w` is verified numerically at sampled points.
pub fn shape3_coefficients_from_lagrangian(
    l: &LagrangianDef,
    ranges: &SampleRanges,
    seed: u64,
    consts: &BTreeMap<String, f64>,
) -> Result<Shape3, ShapeError> {
    let chart = l.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(ShapeError::WrongChartKind { found: chart.to_string() });
    }
    if chart.order > 2 {
        return Err(ShapeError::OrderTooHigh { found: chart.order, max: 2 });
    }
    let n = chart.n;
    let li: Vec<Expr> = (0..n).map(|i| d(l.expr(), i, 1)).collect();
    let mut affine = Vec::new();
    for e in &li {
        for k in 0..n {
            affine.push(d(e, k, 1));
        }
    }
    run_structure_checks(
        &[("lagrangian affine in v'", affine)],
        &chart.with_order(2),
        ranges,
        seed,
        consts,
    )?;
    let l0 = kill_levels(l.expr(), &[1])?;
    let dx = DiffOperator::truncated(ChartKind::Parametric, n, -1);
    let a: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| Expr::sub(d(&li[i], k, 0), d(&li[k], i, 0)))
                .collect()
        })
        .collect();
    let b: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut e = Expr::sub(d(&li[k], i, -1), dx.apply(&d(&li[k], i, 0)));
                    e = Expr::add(
                        e,
                        Expr::mul(Expr::num(2.0), dx.apply(&d(&li[i], k, 0))),
                    );
                    e = Expr::add(e, d(&li[i], k, -1));
                    Expr::sub(e, d(&d(&l0, i, 0), k, 0))
                })
                .collect()
        })
        .collect();
    let c: Vec<Expr> = (0..n)
        .map(|i| {
            let e = Expr::sub(d(&l0, i, -1), dx.apply(&d(&l0, i, 0)));
            Expr::add(e, dx.apply(&dx.apply(&li[i])))
        })
        .collect();
    Ok(Shape3 { n, a, b, c })
}

/// Fourth-order shape coefficients of the Euler–Poisson operator of a
/// Lagrangian of order at most 2:
///
/// `M_ij = L_{w^i w^j}`, `A_ij = L_{w^i v^j} - L_{w^j v^i}`, and
///
/// ```text
/// b_i = w^k w^l L_{w^i v^k v^l} - w^k L_{v^i v^k} + 2 w^k v^l L_{w^i v^k x^l}
///     + w^k L_{w^i x^k} + 2 w^k L_{w^i v^k t} + v^k v^l L_{w^i x^k x^l}
///     - v^k L_{v^i x^k} + 2 v^k L_{w^i x^k t} + L_{w^i t t} - L_{v^i t} + L_{x^i}.
/// ```
pub fn shape4_coefficients_from_lagrangian(l: &LagrangianDef) -> Result<Shape4, ShapeError> {
    let chart = l.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(ShapeError::WrongChartKind { found: chart.to_string() });
    }
    if chart.order > 2 {
        return Err(ShapeError::OrderTooHigh { found: chart.order, max: 2 });
    }
    let n = chart.n;
    let le = l.expr();
    let m: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(&d(le, i, 1), j, 1)).collect())
        .collect();
    let a: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Expr::sub(d(&d(le, i, 1), j, 0), d(&d(le, j, 1), i, 0)))
                .collect()
        })
        .collect();
    let w = |k: usize| Expr::coord(par(k, 1));
    let v = |k: usize| Expr::coord(par(k, 0));
    let b: Vec<Expr> = (0..n)
        .map(|i| {
            let lwi = d(le, i, 1);
            let lvi = d(le, i, 0);
            let mut e = Expr::num(0.0);
            for k in 0..n {
                for l2 in 0..n {
                    e = Expr::add(
                        e,
                        Expr::mul(Expr::mul(w(k), w(l2)), d(&d(&lwi, k, 0), l2, 0)),
                    );
                    e = Expr::add(
                        e,
                        Expr::mul(
                            Expr::num(2.0),
                            Expr::mul(Expr::mul(w(k), v(l2)), d(&d(&lwi, k, 0), l2, -1)),
                        ),
                    );
                    e = Expr::add(
                        e,
                        Expr::mul(Expr::mul(v(k), v(l2)), d(&d(&lwi, k, -1), l2, -1)),
                    );
                }
            }
            for k in 0..n {
                e = Expr::sub(e, Expr::mul(w(k), d(&lvi, k, 0)));
                e = Expr::add(e, Expr::mul(w(k), d(&lwi, k, -1)));
                e = Expr::add(
                    e,
                    Expr::mul(Expr::num(2.0), Expr::mul(w(k), dt(&d(&lwi, k, 0)))),
                );
                e = Expr::sub(e, Expr::mul(v(k), d(&lvi, k, -1)));
                e = Expr::add(
                    e,
                    Expr::mul(Expr::num(2.0), Expr::mul(v(k), dt(&d(&lwi, k, -1)))),
                );
            }
            e = Expr::add(e, dt(&dt(&lwi)));
            e = Expr::sub(e, dt(&lvi));
            Expr::add(e, d(le, i, -1))
        })
        .collect();
    Ok(Shape4 { n, m, a, b })
}

// ---------------------------------------------------------------------------
// first-order residuals

/// Self-adjointness residuals of a first-order form
/// `F_i = Ψ_{ij}(t,x) v^j + ψ_i(t,x)`:
///
/// `R1_{ijk} = ∂_x[i Ψ_j]k + ∂_x^k Ψ_ij`,
/// `R2_{ij}  = ∂_x[i ψ_j] + ∂_t Ψ_ij`
///
/// (bracketed pairs average with weight 1/2; the trailing terms are as
/// printed, without extra symmetrization).
pub fn first_order_conditions(psi_mat: &[Vec<Expr>], psi_vec: &[Expr]) -> ConditionSet {
    let n = psi_vec.len();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let e = Expr::add(
                    half(Expr::sub(d(&psi_mat[j][k], i, -1), d(&psi_mat[i][k], j, -1))),
                    d(&psi_mat[i][j], k, -1),
                );
                entries.push(ConditionEntry {
                    name: "R1",
                    indices: vec![i + 1, j + 1, k + 1],
                    expr: e,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let e = Expr::add(
                half(Expr::sub(d(&psi_vec[j], i, -1), d(&psi_vec[i], j, -1))),
                dt(&psi_mat[i][j]),
            );
            entries.push(ConditionEntry { name: "R2", indices: vec![i + 1, j + 1], expr: e });
        }
    }
    ConditionSet { entries }
}
