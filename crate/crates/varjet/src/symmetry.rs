//! Poincaré symmetry machinery for third-order parametric systems on
//! Minkowski backgrounds with signature `(+, -, …, -)`:
//!
//! * the prolonged generator of boosts and spatial rotations as a
//!   [`DiffOperator`],
//! * the pointwise equivariance residual and its least-squares defect, which
//!   measure whether a source form transforms covariantly under the
//!   generator,
//! * the determining PDE residuals for the scalar profile of a
//!   rotation/boost-equivariant planar system together with the reduced
//!   radial equation,
//! * the positive-semidefinite obstruction certificate showing that a
//!   spin-supplementary force term cannot be absorbed variationally.

use crate::expr::{partial, Evaluator, EvalError, DiffOperator, Expr, Var};
use crate::jet::{ChartKind, CoordId, JetChart, JetError, JetPoint, Metric};
use crate::variational::DynamicalForm;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("expected Minkowski signature (+, -, …, -), found {found}")]
    UnsupportedSignature { found: String },
    #[error("generator matrix must be skew-symmetric, entry ({i}, {j}) breaks it")]
    NotSkew { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("equivariance residuals need a parametric chart, found {found}")]
    WrongChartKind { found: String },
    #[error("the form has order {found}, equivariance residuals cover order at most {max}")]
    OrderTooHigh { found: i32, max: i32 },
    #[error("the leading coefficient matrix is singular at this point")]
    SingularMatrix,
    #[error("least-squares solve failed: {0}")]
    LeastSquaresFailed(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn par(i: usize, r: i32) -> CoordId {
    CoordId::parametric(i, r)
}

fn d(e: &Expr, i: usize, r: i32) -> Expr {
    partial(e, Var::Coord(par(i, r)))
}

fn check_minkowski(metric: &Metric, n: usize) -> Result<(), SymmetryError> {
    let ok = metric.dim() == n + 1
        && metric.diag(0) == 1.0
        && (1..=n).all(|a| metric.diag(a) == -1.0);
    if ok {
        Ok(())
    } else {
        let found: Vec<String> = (0..metric.dim())
            .map(|a| if metric.diag(a) > 0.0 { "+".into() } else { "-".into() })
            .collect();
        Err(SymmetryError::UnsupportedSignature { found: found.concat() })
    }
}

fn check_skew(omega: &[Vec<f64>], n: usize) -> Result<(), SymmetryError> {
    if omega.len() != n {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: omega.len() });
    }
    for (i, row) in omega.iter().enumerate() {
        if row.len() != n {
            return Err(SymmetryError::DimensionMismatch { expected: n, found: row.len() });
        }
        for j in 0..n {
            if (omega[i][j] + omega[j][i]).abs() > 1e-12 {
                return Err(SymmetryError::NotSkew { i, j });
            }
        }
    }
    Ok(())
}

/// The infinitesimal Poincaré generator with boost vector `π` and rotation
/// matrix `Ω` (skew), prolonged to jet level `max_level`:
///
/// `ξ⁰ = Σ_i π^i x^i`, `ξ^i = t π^i - Σ_m Ω_im x^m`,
///
/// and prolonged coefficients obtained recursively as
/// `δ_(r) = D_t δ_(r-1) - (coordinate at level r) · D_t ξ⁰`.
///
/// The result acts on expressions via [`DiffOperator::apply`]. Closed forms
/// at the first two levels are `δv = π - (π·v) v - Ω v` and
/// `δw = 2 (π·v)_g w + (π·w)_g v - Ω w` with the metric pairing
/// `(π·v)_g = -Σ π^m v^m`.
pub fn lorentz_generator(
    metric: &Metric,
    omega: &[Vec<f64>],
    pi: &[f64],
    max_level: i32,
) -> Result<DiffOperator, SymmetryError> {
    let n = pi.len();
    check_minkowski(metric, n)?;
    check_skew(omega, n)?;

    let xi0 = Expr::sum((0..n).map(|i| Expr::mul(Expr::num(pi[i]), Expr::coord(par(i, -1)))));
    let dt_xi0 = crate::expr::total_derivative(&xi0, ChartKind::Parametric);

    let mut op = DiffOperator::new(ChartKind::Parametric).with_time(xi0);
    let mut prev: Vec<Expr> = (0..n)
        .map(|i| {
            let mut e = Expr::mul(Expr::time(ChartKind::Parametric), Expr::num(pi[i]));
            for m in 0..n {
                e = Expr::sub(e, Expr::mul(Expr::num(omega[i][m]), Expr::coord(par(m, -1))));
            }
            e
        })
        .collect();
    for (i, e) in prev.iter().enumerate() {
        op = op.with_coord(par(i, -1), e.clone());
    }
    for r in 0..=max_level {
        let next: Vec<Expr> = (0..n)
            .map(|i| {
                Expr::sub(
                    crate::expr::total_derivative(&prev[i], ChartKind::Parametric),
                    Expr::mul(Expr::coord(par(i, r)), dt_xi0.clone()),
                )
            })
            .collect();
        for (i, e) in next.iter().enumerate() {
            op = op.with_coord(par(i, r), e.clone());
        }
        prev = next;
    }
    Ok(op)
}

/// An equivariance problem for a third-order source form
/// `E_i = A_ij z^j + k_i` under one Poincaré generator. Symbolic data is
/// prepared once; residuals are evaluated pointwise.
#[derive(Debug, Clone)]
pub struct SymmetryProblem {
    n: usize,
    chart: JetChart,
    /// Lowered boost vector `π̲_l = -π^l`.
    pil: Vec<f64>,
    a: Vec<Vec<Expr>>,
    k: Vec<Expr>,
    lhs81: Vec<Vec<Expr>>,
    xk: Vec<Expr>,
    xe: Vec<Expr>,
    e: Vec<Expr>,
    pvg: Expr,
    pwg: Expr,
}

/// Build the equivariance problem of a parametric source form of order at
/// most 3 for the generator `(Ω, π)`. The transported leading coefficient
///
/// `LHS_il = X̂(A_il) + 2 (π·v)_g A_il + (A v)_i π̲_l - (A Ω)_il`
///
/// determines the multiplier `Φ = LHS · A⁻¹`; the remaining multipliers are
/// `Ξ = -k ⊗ π̲` and `Π_ij = 2 (A w)_i π̲_j + (π·w)_g A_ij`, and the
/// equivariance identity states `Φ k - Ξ v - Π w - X̂(k) = 0`.
pub fn symmetry_problem(
    form: &DynamicalForm,
    metric: &Metric,
    omega: &[Vec<f64>],
    pi: &[f64],
) -> Result<SymmetryProblem, SymmetryError> {
    let chart = form.chart();
    if chart.kind != ChartKind::Parametric {
        return Err(SymmetryError::WrongChartKind { found: chart.to_string() });
    }
    if chart.order > 3 {
        return Err(SymmetryError::OrderTooHigh { found: chart.order, max: 3 });
    }
    let n = chart.n;
    if pi.len() != n {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: pi.len() });
    }
    let op = lorentz_generator(metric, omega, pi, 2)?;

    let a: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| d(form.component(i), j, 2)).collect())
        .collect();
    let k: Vec<Expr> = (0..n)
        .map(|i| {
            let mut e = form.component(i).clone();
            for j in 0..n {
                e = Expr::sub(e, Expr::mul(a[i][j].clone(), Expr::coord(par(j, 2))));
            }
            e
        })
        .collect();

    let pvg = Expr::sum((0..n).map(|m| Expr::mul(Expr::num(-pi[m]), Expr::coord(par(m, 0)))));
    let pwg = Expr::sum((0..n).map(|m| Expr::mul(Expr::num(-pi[m]), Expr::coord(par(m, 1)))));
    let pil: Vec<f64> = pi.iter().map(|p| -p).collect();

    let lhs81: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            let av_i = Expr::sum((0..n).map(|j| Expr::mul(a[i][j].clone(), Expr::coord(par(j, 0)))));
            (0..n)
                .map(|l| {
                    let mut e = op.apply(&a[i][l]);
                    e = Expr::add(
                        e,
                        Expr::mul(Expr::num(2.0), Expr::mul(pvg.clone(), a[i][l].clone())),
                    );
                    e = Expr::add(e, Expr::mul(av_i.clone(), Expr::num(pil[l])));
                    for m in 0..n {
                        e = Expr::sub(e, Expr::mul(a[i][m].clone(), Expr::num(omega[m][l])));
                    }
                    e
                })
                .collect()
        })
        .collect();

    let xk: Vec<Expr> = k.iter().map(|e| op.apply(e)).collect();
    let xe: Vec<Expr> = (0..n).map(|i| op.apply(form.component(i))).collect();
    let e: Vec<Expr> = (0..n).map(|i| form.component(i).clone()).collect();

    Ok(SymmetryProblem { n, chart: *chart, pil, a, k, lhs81, xk, xe, e, pvg, pwg })
}

struct PointData {
    amat: DMatrix<f64>,
    lhs: DMatrix<f64>,
    kvec: DVector<f64>,
    xkvec: DVector<f64>,
    v: DVector<f64>,
    w: DVector<f64>,
    pwg: f64,
}

impl SymmetryProblem {
    pub fn chart(&self) -> &JetChart {
        &self.chart
    }

    fn eval_point(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<PointData, SymmetryError> {
        let n = self.n;
        let mut ev = Evaluator::new(point, consts);
        let mut amat = DMatrix::zeros(n, n);
        let mut lhs = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                amat[(i, j)] = ev.eval(&self.a[i][j])?;
                lhs[(i, j)] = ev.eval(&self.lhs81[i][j])?;
            }
        }
        let mut kvec = DVector::zeros(n);
        let mut xkvec = DVector::zeros(n);
        for i in 0..n {
            kvec[i] = ev.eval(&self.k[i])?;
            xkvec[i] = ev.eval(&self.xk[i])?;
        }
        let pwg = ev.eval(&self.pwg)?;
        let v = DVector::from_iterator(n, point.level(0));
        let w = DVector::from_iterator(n, point.level(1));
        Ok(PointData { amat, lhs, kvec, xkvec, v, w, pwg })
    }

    /// Multiplier matrices `(Φ, Ξ, Π)` at a point; fails if the leading
    /// coefficient matrix is singular there.
    pub fn multipliers(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>), SymmetryError> {
        let data = self.eval_point(point, consts)?;
        let inv = data
            .amat
            .clone()
            .try_inverse()
            .ok_or(SymmetryError::SingularMatrix)?;
        let phi = &data.lhs * &inv;
        let (xi, pi2) = self.direct_multipliers(&data);
        Ok((phi, xi, pi2))
    }

    fn direct_multipliers(&self, data: &PointData) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let aw = &data.amat * &data.w;
        let xi = DMatrix::from_fn(n, n, |i, j| -data.kvec[i] * self.pil[j]);
        let pi2 =
            DMatrix::from_fn(n, n, |i, j| 2.0 * aw[i] * self.pil[j] + data.pwg * data.amat[(i, j)]);
        (xi, pi2)
    }

    /// Pointwise equivariance residual `Φ k - Ξ v - Π w - X̂(k)`, using the
    /// exact multiplier `Φ = LHS · A⁻¹`.
    pub fn residual_exact(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<f64>, SymmetryError> {
        let data = self.eval_point(point, consts)?;
        let inv = data
            .amat
            .clone()
            .try_inverse()
            .ok_or(SymmetryError::SingularMatrix)?;
        let phi = &data.lhs * &inv;
        let (xi, pi2) = self.direct_multipliers(&data);
        let res = &phi * &data.kvec - &xi * &data.v - &pi2 * &data.w - &data.xkvec;
        Ok(res.iter().copied().collect())
    }

    /// Least-squares defect of the full multiplier system: stack the linear
    /// constraints `Φ A = LHS`, `Π = Π(A, w)`, `Ξ = -k ⊗ π̲`, and
    /// `Φ k - Ξ v - Π w = X̂(k)` for the unknown `(Φ, Ξ, Π)` and return the
    /// minimal 2-norm misfit. Zero (numerically) exactly when a consistent
    /// multiplier triple exists at the point.
    pub fn defect_lsq(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<f64, SymmetryError> {
        let n = self.n;
        let data = self.eval_point(point, consts)?;
        let (xi, pi2) = self.direct_multipliers(&data);
        let rows = 3 * n * n + n;
        let cols = 3 * n * n;
        let mut m = DMatrix::zeros(rows, cols);
        let mut rhs = DVector::zeros(rows);
        let mut row = 0;
        // Φ A = LHS
        for i in 0..n {
            for j in 0..n {
                for s in 0..n {
                    m[(row, i * n + s)] = data.amat[(s, j)];
                }
                rhs[row] = data.lhs[(i, j)];
                row += 1;
            }
        }
        // Π direct
        for i in 0..n {
            for j in 0..n {
                m[(row, 2 * n * n + i * n + j)] = 1.0;
                rhs[row] = pi2[(i, j)];
                row += 1;
            }
        }
        // Ξ direct
        for i in 0..n {
            for j in 0..n {
                m[(row, n * n + i * n + j)] = 1.0;
                rhs[row] = xi[(i, j)];
                row += 1;
            }
        }
        // Φ k - Ξ v - Π w = X̂(k)
        for i in 0..n {
            for j in 0..n {
                m[(row, i * n + j)] = data.kvec[j];
                m[(row, n * n + i * n + j)] = -data.v[j];
                m[(row, 2 * n * n + i * n + j)] = -data.w[j];
            }
            rhs[row] = data.xkvec[i];
            row += 1;
        }
        let svd = m.clone().svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| SymmetryError::LeastSquaresFailed(e.to_string()))?;
        Ok((&m * &sol - &rhs).norm())
    }

    /// Residual of the full invariance identity
    /// `X̂(E_i) = Σ_j (Φ + (π·v)_g I)_ij E_j` at a point.
    pub fn invariance_residual(
        &self,
        point: &JetPoint,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Vec<f64>, SymmetryError> {
        let n = self.n;
        let data = self.eval_point(point, consts)?;
        let inv = data
            .amat
            .clone()
            .try_inverse()
            .ok_or(SymmetryError::SingularMatrix)?;
        let phi = &data.lhs * &inv;
        let mut ev = Evaluator::new(point, consts);
        let pvg = ev.eval(&self.pvg)?;
        let mut evec = Vec::with_capacity(n);
        for e in &self.e {
            evec.push(ev.eval(e)?);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let xei = ev.eval(&self.xe[i])?;
            let mut rhs = 0.0;
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                rhs += (phi[(i, j)] + pvg * delta) * evec[j];
            }
            out.push(xei - rhs);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// determining PDEs for the planar profile

fn v1() -> Expr {
    Expr::coord(par(0, 0))
}

fn v2() -> Expr {
    Expr::coord(par(1, 0))
}

/// `y = v·v` (raw Euclidean square), built as `v1·v1 + v2·v2`.
pub fn speed_square() -> Expr {
    Expr::add(Expr::mul(v1(), v1()), Expr::mul(v2(), v2()))
}

fn vd(g: &Expr) -> Expr {
    Expr::add(Expr::mul(v1(), d(g, 0, 0)), Expr::mul(v2(), d(g, 1, 0)))
}

/// Determining-PDE residuals for a scalar profile `a(v1, v2)` of a planar
/// third-order system equivariant under rotations and boosts. The six
/// residuals, in order, come from the rotation generator (two) and the two
/// boosts (four); all vanish identically exactly for
/// `a = (1 - v·v)^(-3/2)` up to scale.
pub fn appendix_pde_residuals(a: &Expr) -> Vec<(&'static str, Expr)> {
    let a1 = d(a, 0, 0);
    let a2 = d(a, 1, 0);
    let ratio1 = Expr::div(a1.clone(), a.clone());
    let ratio2 = Expr::div(a2.clone(), a.clone());
    let rot_flux = Expr::sub(Expr::mul(v1(), a2.clone()), Expr::mul(v2(), a1.clone()));

    let d1 = {
        let mut e = Expr::sub(
            Expr::mul(v1(), d(&a1, 1, 0)),
            Expr::mul(v2(), d(&a1, 0, 0)),
        );
        e = Expr::add(e, a2.clone());
        Expr::sub(e, Expr::mul(ratio1.clone(), rot_flux.clone()))
    };
    let d2 = {
        let mut e = Expr::sub(
            Expr::mul(v1(), d(&a2, 1, 0)),
            Expr::mul(v2(), d(&a2, 0, 0)),
        );
        e = Expr::sub(e, a1.clone());
        Expr::sub(e, Expr::mul(ratio2.clone(), rot_flux.clone()))
    };

    let boost_diag = |i: usize| {
        let ai = if i == 0 { a1.clone() } else { a2.clone() };
        let ratio = if i == 0 { ratio1.clone() } else { ratio2.clone() };
        let vi = if i == 0 { v1() } else { v2() };
        let mut e = Expr::sub(d(&ai, i, 0), Expr::mul(vi.clone(), vd(&ai)));
        e = Expr::sub(e, Expr::mul(vi.clone(), ai.clone()));
        e = Expr::sub(e, vd(a));
        e = Expr::sub(
            e,
            Expr::mul(ratio, Expr::sub(ai.clone(), Expr::mul(vi, vd(a)))),
        );
        Expr::sub(e, Expr::mul(Expr::num(3.0), a.clone()))
    };
    let boost_off = |i: usize, jsrc: usize| {
        // residual with profile derivative a_jsrc transported along boost i
        let aj = if jsrc == 0 { a1.clone() } else { a2.clone() };
        let ratioj = if jsrc == 0 { ratio1.clone() } else { ratio2.clone() };
        let ai_other = if i == 0 { a1.clone() } else { a2.clone() };
        let vi = if i == 0 { v1() } else { v2() };
        let mut e = Expr::sub(d(&aj, i, 0), Expr::mul(vi.clone(), vd(&aj)));
        e = Expr::sub(e, Expr::mul(vi.clone(), aj.clone()));
        Expr::sub(
            e,
            Expr::mul(ratioj, Expr::sub(ai_other, Expr::mul(vi, vd(a)))),
        )
    };

    vec![
        ("rotation-1", d1),
        ("rotation-2", d2),
        ("boost-11", boost_diag(0)),
        ("boost-22", boost_diag(1)),
        ("boost-21", boost_off(1, 0)),
        ("boost-12", boost_off(0, 1)),
    ]
}

/// The radial reduction of the determining PDEs for
/// `f = (v·∂ a)/a` as a function of `y = v·v`:
/// `(1 - y) (v·∂ f)/(2 y) - f - 3`, which vanishes identically exactly for
/// `f = 3 y/(1 - y)`.
pub fn f_equation_residual(f: &Expr) -> Expr {
    let y = speed_square();
    let t1 = Expr::div(
        Expr::mul(Expr::sub(Expr::num(1.0), y.clone()), vd(f)),
        Expr::mul(Expr::num(2.0), y),
    );
    Expr::sub(Expr::sub(t1, f.clone()), Expr::num(3.0))
}

/// The logarithmic radial derivative `(v·∂ a)/a` of a profile, the natural
/// input to [`f_equation_residual`].
pub fn f_from_profile(a: &Expr) -> Expr {
    Expr::div(vd(a), a.clone())
}

/// Evaluate profile residuals at a planar velocity `(v1, v2)`.
pub fn eval_profile_residuals(
    exprs: &[(&'static str, Expr)],
    v: [f64; 2],
    consts: &BTreeMap<String, f64>,
) -> Result<Vec<(&'static str, f64)>, SymmetryError> {
    let chart = JetChart::parametric(2, 1);
    let mut point = JetPoint::zero(chart, 0.0);
    point.set(par(0, 0), v[0])?;
    point.set(par(1, 0), v[1])?;
    let mut ev = Evaluator::new(&point, consts);
    exprs
        .iter()
        .map(|(name, e)| Ok((*name, ev.eval(e)?)))
        .collect()
}

// ---------------------------------------------------------------------------
// obstruction certificate

fn det3(rows: [&[f64; 3]; 3]) -> f64 {
    rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
}

/// Obstruction certificate for a residual spatial acceleration `a` at
/// velocity `v` probed by a spin vector `ω`:
///
/// `cert = ⟨a,a⟩⟨ω,ω⟩ - ⟨a,ω⟩² + det(a, v, ω)²`
///
/// with `⟨·,·⟩` the (definite) spatial metric pairing. The certificate is
/// non-negative, vanishes for all `ω` exactly when `a = 0`, and a strictly
/// positive value witnesses that no spin supplementary condition can cancel
/// the residual force.
pub fn nogo_certificate(metric: &Metric, a: &[f64; 3], v: &[f64; 3], omega: &[f64; 3]) -> f64 {
    let aa = metric.dot(a, a);
    let ww = metric.dot(omega, omega);
    let aw = metric.dot(a, omega);
    let det = det3([a, v, omega]);
    aa * ww - aw * aw + det * det
}

/// Maximize the certificate over `trials` spin vectors drawn uniformly from
/// `[-1, 1]³`, deterministically in the seed.
pub fn nogo_max_certificate(
    metric: &Metric,
    a: &[f64; 3],
    v: &[f64; 3],
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..trials {
        let omega = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let c = nogo_certificate(metric, a, v, &omega);
        if c > best {
            best = c;
        }
    }
    best
}
