//! Expressions over jet coordinates: construction, differentiation,
//! substitution, and IEEE-double evaluation.
//!
//! An [`Expr`] is an immutable reference-counted tree. Derivative operators
//! preserve subtree sharing (the output of a total derivative is a DAG, not
//! an expanded tree), and evaluation memoizes per shared node, so iterated
//! total derivatives — the workhorse of the Helmholtz machinery — stay
//! polynomial in cost.
//!
//! Smart constructors perform *local* folding only: literal–literal
//! arithmetic and the 0/1 identities. No other rewriting is attempted, so
//! the printed form of an expression is structurally faithful to how it was
//! built.
//!
//! Exponents are dyadic rationals `k` or `k/2` (integers and half-integers),
//! which closes the class under the derivatives of `sqrt`.

use crate::jet::{ChartKind, CoordId, JetPoint};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

/// A differentiation / substitution target: a chart coordinate or the
/// independent variable of a chart family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Coord(CoordId),
    Time(ChartKind),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Coord(c) => write!(f, "{c}"),
            Var::Time(ChartKind::Parametric) => write!(f, "t"),
            Var::Time(ChartKind::Homogeneous) => write!(f, "zeta"),
        }
    }
}

/// Exponent of a power node: `num / den` with `den ∈ {1, 2}`, normalized so
/// that `den = 2` implies `num` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowExp {
    pub num: i64,
    pub den: u8,
}

impl PowExp {
    fn normalized(mut num: i64, mut den: u8) -> PowExp {
        debug_assert!(den == 1 || den == 2);
        if den == 2 && num % 2 == 0 {
            num /= 2;
            den = 1;
        }
        PowExp { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The exponent lowered by one (used by the power rule).
    fn minus_one(self) -> PowExp {
        PowExp::normalized(self.num - self.den as i64, self.den)
    }
}

impl fmt::Display for PowExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2", self.num)
        }
    }
}

/// Expression node. Construct via the smart constructors on [`Expr`].
#[derive(Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Const(String),
    Coord(CoordId),
    Time(ChartKind),
    Neg(Expr),
    Sqrt(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, PowExp),
}

/// An immutable expression; cloning is cheap (reference-counted).
#[derive(Debug, Clone)]
pub struct Expr(Rc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Expr {
    fn new(n: Node) -> Expr {
        Expr(Rc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn ptr(&self) -> usize {
        Rc::as_ptr(&self.0) as usize
    }

    /// The literal value, if this is a number node.
    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(Node::Num(v))
    }

    pub fn constant(name: impl Into<String>) -> Expr {
        Expr::new(Node::Const(name.into()))
    }

    pub fn coord(c: CoordId) -> Expr {
        Expr::new(Node::Coord(c))
    }

    pub fn time(kind: ChartKind) -> Expr {
        Expr::new(Node::Time(kind))
    }

    pub fn var(v: Var) -> Expr {
        match v {
            Var::Coord(c) => Expr::coord(c),
            Var::Time(k) => Expr::time(k),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x + y).is_finite() => Expr::num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::new(Node::Add(a, b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x - y).is_finite() => Expr::num(x - y),
            (_, Some(y)) if y == 0.0 => a,
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            _ => Expr::new(Node::Sub(a, b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x * y).is_finite() => Expr::num(x * y),
            (Some(x), _) if x == 0.0 => Expr::num(0.0),
            (_, Some(y)) if y == 0.0 => Expr::num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::new(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Expr::num(x / y),
            (Some(x), _) if x == 0.0 => Expr::num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::new(Node::Div(a, b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(x) = a.as_num() {
            return Expr::num(-x);
        }
        if let Node::Neg(inner) = a.node() {
            return inner.clone();
        }
        Expr::new(Node::Neg(a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        match a.as_num() {
            Some(x) if x >= 0.0 => Expr::num(x.sqrt()),
            _ => Expr::new(Node::Sqrt(a)),
        }
    }

    /// `base^(num/den)` with `den ∈ {1, 2}`.
    pub fn pow(base: Expr, num: i64, den: u8) -> Expr {
        assert!(den == 1 || den == 2, "power denominator must be 1 or 2");
        let p = PowExp::normalized(num, den);
        if p.num == 0 {
            return Expr::num(1.0);
        }
        if p.num == 1 && p.den == 1 {
            return base;
        }
        if let Some(x) = base.as_num() {
            if let Ok(v) = pow_value(x, p) {
                if v.is_finite() {
                    return Expr::num(v);
                }
            }
        }
        Expr::new(Node::Pow(base, p))
    }

    /// Integer power.
    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, n, 1)
    }

    /// Convenience: sum of an iterator (empty sum is 0).
    pub fn sum(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .fold(Expr::num(0.0), Expr::add)
    }
}

enum PowErr {
    ZeroToNegative,
    NegativeSqrt,
}

/// Shared power semantics: integer exponents by repeated multiplication
/// (`powi`), half-integer exponents through `sqrt`.
fn pow_value(x: f64, p: PowExp) -> Result<f64, PowErr> {
    let base = if p.den == 2 {
        if x < 0.0 {
            return Err(PowErr::NegativeSqrt);
        }
        x.sqrt()
    } else {
        x
    };
    if p.num < 0 && base == 0.0 {
        return Err(PowErr::ZeroToNegative);
    }
    Ok(base.powi(p.num as i32))
}

// ---------------------------------------------------------------------------
// rendering

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Num(v) if *v < 0.0 => 3,
        _ => 5,
    }
}

fn fmt_num(v: f64, f: &mut dyn fmt::Write) -> fmt::Result {
    if v.fract() == 0.0 && v.abs() <= 9.007_199_254_740_992e15 {
        write!(f, "{}", v as i64)
    } else {
        // 17 significant digits: value-exact on reparse
        write!(f, "{v:.16e}")
    }
}

fn fmt_expr(e: &Expr, min_prec: u8, f: &mut dyn fmt::Write) -> fmt::Result {
    let p = prec(e);
    if p < min_prec {
        f.write_char('(')?;
        fmt_expr(e, 0, f)?;
        return f.write_char(')');
    }
    match e.node() {
        Node::Num(v) => fmt_num(*v, f),
        Node::Const(name) => f.write_str(name),
        Node::Coord(c) => write!(f, "{c}"),
        Node::Time(ChartKind::Parametric) => f.write_str("t"),
        Node::Time(ChartKind::Homogeneous) => f.write_str("zeta"),
        Node::Neg(a) => {
            f.write_char('-')?;
            fmt_expr(a, 3, f)
        }
        Node::Add(a, b) => {
            fmt_expr(a, 1, f)?;
            f.write_str(" + ")?;
            fmt_expr(b, 2, f)
        }
        Node::Sub(a, b) => {
            fmt_expr(a, 1, f)?;
            f.write_str(" - ")?;
            fmt_expr(b, 2, f)
        }
        Node::Mul(a, b) => {
            fmt_expr(a, 2, f)?;
            f.write_str(" * ")?;
            fmt_expr(b, 3, f)
        }
        Node::Div(a, b) => {
            fmt_expr(a, 2, f)?;
            f.write_str(" / ")?;
            fmt_expr(b, 3, f)
        }
        Node::Sqrt(a) => {
            f.write_str("sqrt(")?;
            fmt_expr(a, 0, f)?;
            f.write_char(')')
        }
        Node::Pow(base, p) => {
            fmt_expr(base, 5, f)?;
            write!(f, "^{p}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

/// Render an expression to its canonical text form. The result reparses to a
/// structurally identical expression (modulo shared-subtree identity), hence
/// to identical values.
pub fn render_expression(e: &Expr) -> String {
    e.to_string()
}

struct BoundedWriter {
    buf: String,
    limit: usize,
}

impl fmt::Write for BoundedWriter {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        if self.buf.len() >= self.limit {
            return Err(fmt::Error);
        }
        let room = self.limit - self.buf.len();
        if s.len() <= room {
            self.buf.push_str(s);
            Ok(())
        } else {
            let mut end = room;
            while !s.is_char_boundary(end) {
                end -= 1;
            }
            self.buf.push_str(&s[..end]);
            Err(fmt::Error)
        }
    }
}

/// A size-capped rendering for error messages (shared subtrees of large
/// derivative DAGs would otherwise print exponentially).
fn describe(e: &Expr) -> String {
    let mut w = BoundedWriter { buf: String::new(), limit: 160 };
    if fmt_expr(e, 0, &mut w).is_err() {
        w.buf.push('…');
    }
    w.buf
}

// ---------------------------------------------------------------------------
// scanning

/// The variables and named constants referenced by an expression.
#[derive(Debug, Default, Clone)]
pub struct VarScan {
    pub coords: BTreeSet<CoordId>,
    pub times: BTreeSet<ChartKind>,
    pub consts: BTreeSet<String>,
}

impl VarScan {
    /// Maximal derivative level `r` referenced among coordinates of `kind`.
    pub fn max_level(&self, kind: ChartKind) -> Option<i32> {
        self.coords
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.r)
            .max()
    }

    /// Order of the expression over `kind`: one more than the maximal level
    /// (an expression referencing `v'` has order 2). Positions only give
    /// order 0; returns `None` when no coordinate of the family appears.
    pub fn order(&self, kind: ChartKind) -> Option<i32> {
        self.max_level(kind).map(|r| r + 1)
    }
}

/// Collect referenced variables with a shared-node-aware walk.
pub fn scan(e: &Expr) -> VarScan {
    let mut out = VarScan::default();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut stack = vec![e.clone()];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.ptr()) {
            continue;
        }
        match cur.node() {
            Node::Num(_) => {}
            Node::Const(name) => {
                out.consts.insert(name.clone());
            }
            Node::Coord(c) => {
                out.coords.insert(*c);
            }
            Node::Time(k) => {
                out.times.insert(*k);
            }
            Node::Neg(a) | Node::Sqrt(a) | Node::Pow(a, _) => stack.push(a.clone()),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                stack.push(a.clone());
                stack.push(b.clone());
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// differentiation

struct Differ {
    target: Var,
    memo: HashMap<usize, Expr>,
}

impl Differ {
    fn new(target: Var) -> Self {
        Differ { target, memo: HashMap::new() }
    }

    fn d(&mut self, e: &Expr) -> Expr {
        if let Some(hit) = self.memo.get(&e.ptr()) {
            return hit.clone();
        }
        let out = match e.node() {
            Node::Num(_) | Node::Const(_) => Expr::num(0.0),
            Node::Coord(c) => {
                if self.target == Var::Coord(*c) {
                    Expr::num(1.0)
                } else {
                    Expr::num(0.0)
                }
            }
            Node::Time(k) => {
                if self.target == Var::Time(*k) {
                    Expr::num(1.0)
                } else {
                    Expr::num(0.0)
                }
            }
            Node::Neg(a) => Expr::neg(self.d(a)),
            Node::Add(a, b) => Expr::add(self.d(a), self.d(b)),
            Node::Sub(a, b) => Expr::sub(self.d(a), self.d(b)),
            Node::Mul(a, b) => {
                let da = self.d(a);
                let db = self.d(b);
                Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db))
            }
            Node::Div(a, b) => {
                let da = self.d(a);
                let db = self.d(b);
                Expr::div(
                    Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                    Expr::mul(b.clone(), b.clone()),
                )
            }
            Node::Sqrt(a) => {
                let da = self.d(a);
                Expr::div(da, Expr::mul(Expr::num(2.0), Expr::sqrt(a.clone())))
            }
            Node::Pow(base, p) => {
                let db = self.d(base);
                Expr::mul(
                    Expr::mul(Expr::num(p.as_f64()), Expr::pow(base.clone(), p.minus_one().num, p.minus_one().den)),
                    db,
                )
            }
        };
        self.memo.insert(e.ptr(), out.clone());
        out
    }
}

/// Partial derivative with respect to a single variable. Subtree sharing in
/// the input is preserved in the output.
pub fn partial(e: &Expr, v: Var) -> Expr {
    Differ::new(v).d(e)
}

/// Total derivative along the independent variable of the chart family:
/// `D f = ∂f/∂t + Σ_{i,r} coord(i, r+1) · ∂f/∂coord(i, r)`, the sum running
/// over the coordinates of `kind` actually referenced by `f`.
pub fn total_derivative(e: &Expr, kind: ChartKind) -> Expr {
    let refs = scan(e);
    let mut out = partial(e, Var::Time(kind));
    for c in refs.coords.iter().filter(|c| c.kind == kind) {
        out = Expr::add(
            out,
            Expr::mul(Expr::coord(c.raised()), partial(e, Var::Coord(*c))),
        );
    }
    out
}

/// Iterated total derivative.
pub fn total_derivative_n(e: &Expr, kind: ChartKind, k: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..k {
        out = total_derivative(&out, kind);
    }
    out
}

/// A first-order differential operator `c_t ∂_t + Σ c_a ∂_a` with expression
/// coefficients.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    pub kind: ChartKind,
    pub t_coeff: Option<Expr>,
    pub coeffs: Vec<(CoordId, Expr)>,
}

impl DiffOperator {
    pub fn new(kind: ChartKind) -> Self {
        DiffOperator { kind, t_coeff: None, coeffs: Vec::new() }
    }

    pub fn with_time(mut self, c: Expr) -> Self {
        self.t_coeff = Some(c);
        self
    }

    pub fn with_coord(mut self, id: CoordId, c: Expr) -> Self {
        self.coeffs.push((id, c));
        self
    }

    /// Apply the operator: `Σ coeff · ∂(e)`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut out = match &self.t_coeff {
            Some(c) => Expr::mul(c.clone(), partial(e, Var::Time(self.kind))),
            None => Expr::num(0.0),
        };
        for (id, c) in &self.coeffs {
            out = Expr::add(out, Expr::mul(c.clone(), partial(e, Var::Coord(*id))));
        }
        out
    }

    /// The truncated total derivative `∂_t + Σ_{r ≤ level} coord(i, r+1) ∂_{coord(i, r)}`
    /// over the dependent coordinates of a chart: `level = -1` gives
    /// `∂_t + v·∂_x`, `level = 0` adds `w·∂_v`, and so on.
    pub fn truncated(kind: ChartKind, deps: usize, level: i32) -> Self {
        let mut op = DiffOperator::new(kind).with_time(Expr::num(1.0));
        for r in -1..=level {
            for i in 0..deps {
                let c = CoordId { kind, i, r };
                op = op.with_coord(c, Expr::coord(c.raised()));
            }
        }
        op
    }

    /// Iterated application.
    pub fn apply_n(&self, e: &Expr, k: u32) -> Expr {
        let mut out = e.clone();
        for _ in 0..k {
            out = self.apply(&out);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// substitution

#[derive(Debug, Error)]
pub enum SubstituteError {
    #[error("no binding for variable {var} referenced by the expression")]
    MissingBinding { var: String },
}

/// Simultaneous substitution. Every coordinate and independent variable
/// referenced by `e` must be bound (complete coverage); named constants pass
/// through untouched. Replacement expressions are spliced as-is — no
/// re-substitution happens inside them.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Var, Expr>) -> Result<Expr, SubstituteError> {
    fn go(
        e: &Expr,
        bindings: &BTreeMap<Var, Expr>,
        memo: &mut HashMap<usize, Expr>,
    ) -> Result<Expr, SubstituteError> {
        if let Some(hit) = memo.get(&e.ptr()) {
            return Ok(hit.clone());
        }
        let out = match e.node() {
            Node::Num(_) | Node::Const(_) => e.clone(),
            Node::Coord(c) => bindings
                .get(&Var::Coord(*c))
                .cloned()
                .ok_or(SubstituteError::MissingBinding { var: c.to_string() })?,
            Node::Time(k) => bindings
                .get(&Var::Time(*k))
                .cloned()
                .ok_or(SubstituteError::MissingBinding {
                    var: Var::Time(*k).to_string(),
                })?,
            Node::Neg(a) => Expr::neg(go(a, bindings, memo)?),
            Node::Sqrt(a) => Expr::sqrt(go(a, bindings, memo)?),
            Node::Add(a, b) => Expr::add(go(a, bindings, memo)?, go(b, bindings, memo)?),
            Node::Sub(a, b) => Expr::sub(go(a, bindings, memo)?, go(b, bindings, memo)?),
            Node::Mul(a, b) => Expr::mul(go(a, bindings, memo)?, go(b, bindings, memo)?),
            Node::Div(a, b) => Expr::div(go(a, bindings, memo)?, go(b, bindings, memo)?),
            Node::Pow(a, p) => Expr::pow(go(a, bindings, memo)?, p.num, p.den),
        };
        memo.insert(e.ptr(), out.clone());
        Ok(out)
    }
    go(e, bindings, &mut HashMap::new())
}

/// Identity bindings for every variable of `e` (handy base map when only a
/// few variables are meant to change under [`substitute`]).
pub fn identity_bindings(e: &Expr) -> BTreeMap<Var, Expr> {
    let refs = scan(e);
    let mut map = BTreeMap::new();
    for c in refs.coords {
        map.insert(Var::Coord(c), Expr::coord(c));
    }
    for k in refs.times {
        map.insert(Var::Time(k), Expr::time(k));
    }
    map
}

// ---------------------------------------------------------------------------
// evaluation

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("division by zero in `{subtree}`")]
    DivisionByZero { subtree: String },
    #[error("square root of negative value {value} in `{subtree}`")]
    SqrtNegative { subtree: String, value: f64 },
    #[error("zero raised to a negative power in `{subtree}`")]
    ZeroToNegative { subtree: String },
    #[error("constant `{name}` has no bound value")]
    UnboundConstant { name: String },
    #[error("coordinate {coord} is not carried by the evaluation point ({chart})")]
    CoordUnavailable { coord: String, chart: String },
    #[error("independent variable `{var}` does not belong to the point's {chart}")]
    TimeUnavailable { var: String, chart: String },
}

/// Evaluator with per-node memoization. One evaluator serves one point; all
/// expressions evaluated through it share the cache, so families of
/// expressions with common subtrees (a Helmholtz table, a condition system)
/// cost close to one pass over their union.
pub struct Evaluator<'a> {
    point: &'a JetPoint,
    consts: &'a BTreeMap<String, f64>,
    memo: HashMap<usize, f64>,
    // The memo is keyed by node address, so every evaluated expression must
    // stay alive as long as the memo does; retaining the roots guarantees it
    // even when a caller evaluates a temporary.
    roots: Vec<Expr>,
}

impl<'a> Evaluator<'a> {
    pub fn new(point: &'a JetPoint, consts: &'a BTreeMap<String, f64>) -> Self {
        Evaluator { point, consts, memo: HashMap::new(), roots: Vec::new() }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64, EvalError> {
        self.roots.push(e.clone());
        self.eval_inner(e)
    }

    fn eval_inner(&mut self, e: &Expr) -> Result<f64, EvalError> {
        if let Some(&v) = self.memo.get(&e.ptr()) {
            return Ok(v);
        }
        let v = match e.node() {
            Node::Num(v) => *v,
            Node::Const(name) => *self
                .consts
                .get(name)
                .ok_or_else(|| EvalError::UnboundConstant { name: name.clone() })?,
            Node::Coord(c) => self.point.get(*c).ok_or_else(|| EvalError::CoordUnavailable {
                coord: c.to_string(),
                chart: self.point.chart().to_string(),
            })?,
            Node::Time(k) => {
                if self.point.chart().kind == *k {
                    self.point.time()
                } else {
                    return Err(EvalError::TimeUnavailable {
                        var: Var::Time(*k).to_string(),
                        chart: self.point.chart().to_string(),
                    });
                }
            }
            Node::Neg(a) => -self.eval_inner(a)?,
            Node::Sqrt(a) => {
                let x = self.eval_inner(a)?;
                if x < 0.0 {
                    return Err(EvalError::SqrtNegative { subtree: describe(e), value: x });
                }
                x.sqrt()
            }
            Node::Add(a, b) => self.eval_inner(a)? + self.eval_inner(b)?,
            Node::Sub(a, b) => self.eval_inner(a)? - self.eval_inner(b)?,
            Node::Mul(a, b) => self.eval_inner(a)? * self.eval_inner(b)?,
            Node::Div(a, b) => {
                let y = self.eval_inner(b)?;
                if y == 0.0 {
                    return Err(EvalError::DivisionByZero { subtree: describe(e) });
                }
                self.eval_inner(a)? / y
            }
            Node::Pow(base, p) => {
                let x = self.eval_inner(base)?;
                pow_value(x, *p).map_err(|k| match k {
                    PowErr::NegativeSqrt => EvalError::SqrtNegative { subtree: describe(e), value: x },
                    PowErr::ZeroToNegative => EvalError::ZeroToNegative { subtree: describe(e) },
                })?
            }
        };
        self.memo.insert(e.ptr(), v);
        Ok(v)
    }
}

/// One-shot evaluation at a point with named-constant bindings.
pub fn evaluate(
    e: &Expr,
    point: &JetPoint,
    consts: &BTreeMap<String, f64>,
) -> Result<f64, EvalError> {
    Evaluator::new(point, consts).eval(e)
}
