//! Jet charts, jet points, diagonal metrics, sampling, and curve prolongation.
//!
//! Two chart families describe the same mechanics:
//!
//! * **parametric**: an unparametrized time `t`, positions `x^1..x^n`, and
//!   velocity coordinates `v^i_(r)` for derivative levels `r = 0, 1, …`
//!   (`v^i_(0) = v^i = dx^i/dt`, `v^i_(1) = v'^i`, …);
//! * **homogeneous**: an auxiliary parameter `ζ`, positions `x^0..x^n`
//!   (with `x^0` playing the role of time) and derivatives
//!   `u^α = dx^α/dζ`, `u̇^α`, ….
//!
//! A chart of order `s` carries coordinate levels `r = -1, 0, …, s-1`, where
//! `r = -1` denotes the positions themselves. An expression "of order `k`"
//! references levels `r ≤ k-1` only.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Which chart family a coordinate or jet point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChartKind {
    /// `t, x^1..x^n, v^i_(r)`.
    Parametric,
    /// `ζ, x^0..x^n, u^α_(r)`.
    Homogeneous,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Parametric => write!(f, "parametric"),
            ChartKind::Homogeneous => write!(f, "homogeneous"),
        }
    }
}

/// A single jet coordinate: dependent index `i` at derivative level `r`.
///
/// `r = -1` is the position itself (`x`), `r = 0` the first derivative
/// (`v` resp. `u`), `r = 1` the second (`v'` / `u̇`), and so on. The
/// dependent index runs over `0..n` for parametric charts (displayed
/// 1-based: `x1..xn`) and over `0..=n` for homogeneous charts (displayed
/// 0-based: `x0..xn`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordId {
    pub kind: ChartKind,
    pub i: usize,
    pub r: i32,
}

impl CoordId {
    pub fn parametric(i: usize, r: i32) -> Self {
        CoordId { kind: ChartKind::Parametric, i, r }
    }

    pub fn homogeneous(i: usize, r: i32) -> Self {
        CoordId { kind: ChartKind::Homogeneous, i, r }
    }

    /// The coordinate one derivative level up (used by total derivatives).
    pub fn raised(self) -> Self {
        CoordId { r: self.r + 1, ..self }
    }
}

impl fmt::Display for CoordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (stem, index): (&str, usize) = match (self.kind, self.r) {
            (ChartKind::Parametric, -1) => ("x", self.i + 1),
            (ChartKind::Parametric, _) => ("v", self.i + 1),
            (ChartKind::Homogeneous, -1) => ("X", self.i),
            (ChartKind::Homogeneous, _) => ("u", self.i),
        };
        write!(f, "{stem}{index}")?;
        for _ in 0..self.r.max(0) {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// A finite-order jet chart: chart family, spatial dimension `n`, and the
/// maximal derivative order carried.
///
/// The number of dependent coordinates is `n` for parametric charts and
/// `n + 1` for homogeneous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetChart {
    pub kind: ChartKind,
    pub n: usize,
    pub order: i32,
}

impl JetChart {
    pub fn parametric(n: usize, order: i32) -> Self {
        JetChart { kind: ChartKind::Parametric, n, order }
    }

    pub fn homogeneous(n: usize, order: i32) -> Self {
        JetChart { kind: ChartKind::Homogeneous, n, order }
    }

    /// Number of dependent coordinates per derivative level.
    pub fn deps(&self) -> usize {
        match self.kind {
            ChartKind::Parametric => self.n,
            ChartKind::Homogeneous => self.n + 1,
        }
    }

    /// Does this chart carry the given coordinate?
    pub fn contains(&self, c: CoordId) -> bool {
        c.kind == self.kind && c.i < self.deps() && c.r >= -1 && c.r < self.order
    }

    /// All coordinates of the chart, in deterministic (level, index) order.
    pub fn coords(&self) -> impl Iterator<Item = CoordId> + '_ {
        let deps = self.deps();
        let kind = self.kind;
        (-1..self.order).flat_map(move |r| (0..deps).map(move |i| CoordId { kind, i, r }))
    }

    /// Same chart truncated (or extended) to another order.
    pub fn with_order(&self, order: i32) -> Self {
        JetChart { order, ..*self }
    }
}

impl fmt::Display for JetChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} chart, n={}, order {}", self.kind, self.n, self.order)
    }
}

/// Errors from jet-point construction and sampling.
#[derive(Debug, Error)]
pub enum JetError {
    #[error("coordinate {coord} does not belong to the {chart}")]
    CoordOutsideChart { coord: String, chart: String },
    #[error("sample ranges cover derivative levels up to {covered}, chart needs {needed}")]
    RangesNotCovering { covered: i32, needed: i32 },
    #[error("empty sample interval [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("prolongation needs at least one dependent coordinate")]
    NoDependents,
    #[error("metric diagonal entries must be +1 or -1, found {found}")]
    BadMetricEntry { found: i32 },
    #[error("orientation sign must be +1 or -1, found {found}")]
    BadOrientation { found: i32 },
    #[error("operation needs a {expected}-dimensional metric, found {found}")]
    MetricDim { expected: usize, found: usize },
}

/// A point of a finite-order jet space: the independent variable plus one
/// value per chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    chart: JetChart,
    t: f64,
    vals: Vec<f64>,
}

impl JetPoint {
    /// The origin of the chart at independent-variable value `t`.
    pub fn zero(chart: JetChart, t: f64) -> Self {
        let len = chart.deps() * (chart.order + 1).max(0) as usize;
        JetPoint { chart, t, vals: vec![0.0; len] }
    }

    pub fn chart(&self) -> &JetChart {
        &self.chart
    }

    /// Value of the independent variable (`t` or `ζ`).
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    fn index(&self, c: CoordId) -> Option<usize> {
        if !self.chart.contains(c) {
            return None;
        }
        Some((c.r + 1) as usize * self.chart.deps() + c.i)
    }

    /// Value of a coordinate, if the chart carries it.
    pub fn get(&self, c: CoordId) -> Option<f64> {
        self.index(c).map(|k| self.vals[k])
    }

    pub fn set(&mut self, c: CoordId, value: f64) -> Result<(), JetError> {
        match self.index(c) {
            Some(k) => {
                self.vals[k] = value;
                Ok(())
            }
            None => Err(JetError::CoordOutsideChart {
                coord: c.to_string(),
                chart: self.chart.to_string(),
            }),
        }
    }

    /// All values of one derivative level, in dependent-index order.
    pub fn level(&self, r: i32) -> Vec<f64> {
        self.chart
            .coords()
            .filter(|c| c.r == r)
            .map(|c| self.get(c).unwrap())
            .collect()
    }

    /// Componentwise sum of two points on the same chart (used by the jet
    /// additivity tests; the independent variable must agree).
    pub fn add(&self, other: &JetPoint) -> Option<JetPoint> {
        if self.chart != other.chart || self.t != other.t {
            return None;
        }
        let vals = self
            .vals
            .iter()
            .zip(&other.vals)
            .map(|(a, b)| a + b)
            .collect();
        Some(JetPoint { chart: self.chart, t: self.t, vals })
    }
}

/// A diagonal constant metric with entries ±1 plus an orientation sign for
/// the Levi-Civita symbol (`ε_{01…} = eps_sign`).
///
/// `|det g| = 1` holds by construction, so volume factors `√|g|` are 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    diag: Vec<f64>,
    eps_sign: f64,
}

impl Metric {
    pub fn new(diag: &[i32], eps_sign: i32) -> Result<Self, JetError> {
        for &d in diag {
            if d != 1 && d != -1 {
                return Err(JetError::BadMetricEntry { found: d });
            }
        }
        if eps_sign != 1 && eps_sign != -1 {
            return Err(JetError::BadOrientation { found: eps_sign });
        }
        Ok(Metric {
            diag: diag.iter().map(|&d| d as f64).collect(),
            eps_sign: eps_sign as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Diagonal entry `g_aa`.
    pub fn diag(&self, a: usize) -> f64 {
        self.diag[a]
    }

    pub fn eps_sign(&self) -> f64 {
        self.eps_sign
    }

    /// Metric inner product `Σ_a g_aa x^a y^a`.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        (0..self.dim()).map(|a| self.diag[a] * x[a] * y[a]).sum()
    }

    /// Lowered components `x_a = g_aa x^a`.
    pub fn lower(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|a| self.diag[a] * x[a]).collect()
    }

    /// The metric restricted to indices `1..`, keeping the orientation sign.
    pub fn spatial(&self) -> Metric {
        Metric { diag: self.diag[1..].to_vec(), eps_sign: self.eps_sign }
    }

    /// Levi-Civita symbol `ε_{abc}` (orientation sign times permutation
    /// parity). Valid for three-dimensional metrics.
    pub fn eps3(&self, a: usize, b: usize, c: usize) -> f64 {
        debug_assert_eq!(self.dim(), 3);
        self.eps_sign * perm_sign3(a, b, c)
    }

    /// Covector cross product `(x × y)_a = ε_{abc} x^b y^c`.
    pub fn cross_lower(&self, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
        let s = self.eps_sign;
        [
            s * (x[1] * y[2] - x[2] * y[1]),
            s * (x[2] * y[0] - x[0] * y[2]),
            s * (x[0] * y[1] - x[1] * y[0]),
        ]
    }
}

fn perm_sign3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Parse a signature string like `"+--"` into a metric with orientation +1.
pub fn metric_from_signature(sig: &str) -> Option<Metric> {
    let mut diag = Vec::new();
    for ch in sig.chars() {
        match ch {
            '+' => diag.push(1),
            '-' => diag.push(-1),
            _ => return None,
        }
    }
    if diag.is_empty() {
        return None;
    }
    Metric::new(&diag, 1).ok()
}

/// Render a metric back to a signature string.
pub fn signature_of(metric: &Metric) -> String {
    (0..metric.dim())
        .map(|a| if metric.diag(a) > 0.0 { '+' } else { '-' })
        .collect()
}

/// Sampling windows for [`sample_jetpoint`]: one interval for the independent
/// variable, one per derivative level (index `r + 1`), plus optional
/// per-coordinate overrides keyed by `(i, r)`.
#[derive(Debug, Clone)]
pub struct SampleRanges {
    pub t: (f64, f64),
    pub per_level: Vec<(f64, f64)>,
    pub overrides: BTreeMap<(usize, i32), (f64, f64)>,
}

impl SampleRanges {
    /// The same interval for the independent variable and every level up to
    /// `order`.
    pub fn uniform(order: i32, lo: f64, hi: f64) -> Self {
        SampleRanges {
            t: (lo, hi),
            per_level: vec![(lo, hi); (order + 1).max(0) as usize],
            overrides: BTreeMap::new(),
        }
    }

    /// Admissible windows for the bundled parametric top model: velocities in
    /// `[-1/2, 1/2]` (so `1 - v·v ≥ 1/2`), everything else in `[-1, 1]`.
    pub fn top_parametric(order: i32) -> Self {
        let mut r = SampleRanges::uniform(order, -1.0, 1.0);
        if r.per_level.len() > 1 {
            r.per_level[1] = (-0.5, 0.5);
        }
        r
    }

    /// Admissible windows for the homogeneous top chart: `u^0 ∈ [1.2, 2]`,
    /// `u^i ∈ [-0.7, 0.7]` (so `u` stays timelike), everything else in
    /// `[-1, 1]`.
    pub fn top_homogeneous(n: usize, order: i32) -> Self {
        let mut r = SampleRanges::uniform(order, -1.0, 1.0);
        r.overrides.insert((0, 0), (1.2, 2.0));
        for i in 1..=n {
            r.overrides.insert((i, 0), (-0.7, 0.7));
        }
        r
    }

    fn range_for(&self, c: CoordId) -> Option<(f64, f64)> {
        if let Some(&rg) = self.overrides.get(&(c.i, c.r)) {
            return Some(rg);
        }
        self.per_level.get((c.r + 1) as usize).copied()
    }
}

/// Draw a chart point uniformly from the given ranges, deterministically in
/// the seed. Coordinates are drawn in (level, index) order after the
/// independent variable, so equal seeds give bit-identical points.
pub fn sample_jetpoint(
    chart: &JetChart,
    ranges: &SampleRanges,
    seed: u64,
) -> Result<JetPoint, JetError> {
    let covered = ranges.per_level.len() as i32 - 1;
    if covered < chart.order {
        return Err(JetError::RangesNotCovering { covered, needed: chart.order });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| -> Result<f64, JetError> {
        if !(lo < hi) {
            return Err(JetError::EmptyRange { lo, hi });
        }
        Ok(rng.random_range(lo..hi))
    };
    let t = draw(ranges.t)?;
    let mut p = JetPoint::zero(*chart, t);
    for c in chart.coords() {
        let rg = ranges.range_for(c).ok_or(JetError::RangesNotCovering {
            covered,
            needed: chart.order,
        })?;
        let v = draw(rg)?;
        p.set(c, v).expect("chart coordinate");
    }
    Ok(p)
}

/// Value of the `k`-th derivative of the polynomial with ascending
/// coefficients `coeffs` at `x` (exactly differentiated, then evaluated by
/// Horner's scheme).
fn poly_derivative_at(coeffs: &[f64], k: u32, x: f64) -> f64 {
    // coefficients of the k-th derivative: c_m * m! / (m-k)! for m >= k
    let mut acc = 0.0f64;
    for m in (k as usize..coeffs.len()).rev() {
        let mut fac = 1.0f64;
        for j in 0..k as usize {
            fac *= (m - j) as f64;
        }
        acc = acc * x + coeffs[m] * fac;
    }
    acc
}

/// Prolong a polynomial curve to a jet point: component `i` of the curve is
/// the polynomial with ascending coefficients `coeffs[i]`, and the result
/// carries its derivatives up to `order` at parameter value `at`.
///
/// For a parametric chart `coeffs` has `n` entries (`x^i(t)`); for a
/// homogeneous chart it has `n + 1` entries (`x^α(ζ)`, with `x^0` the time
/// component).
pub fn prolong_curve(
    kind: ChartKind,
    coeffs: &[Vec<f64>],
    at: f64,
    order: i32,
) -> Result<JetPoint, JetError> {
    if coeffs.is_empty() {
        return Err(JetError::NoDependents);
    }
    let n = match kind {
        ChartKind::Parametric => coeffs.len(),
        ChartKind::Homogeneous => coeffs.len() - 1,
    };
    if kind == ChartKind::Homogeneous && coeffs.len() < 2 {
        return Err(JetError::NoDependents);
    }
    let chart = JetChart { kind, n, order };
    let mut p = JetPoint::zero(chart, at);
    for (i, cs) in coeffs.iter().enumerate() {
        for r in -1..order {
            let c = CoordId { kind, i, r };
            p.set(c, poly_derivative_at(cs, (r + 1) as u32, at))?;
        }
    }
    Ok(p)
}
