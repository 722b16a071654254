//! Variational calculus on jet spaces for higher-order ODE systems.
//!
//! The crate mechanizes the *inverse problem of the calculus of variations*:
//! deciding whether a given system of ordinary differential equations is the
//! Euler–Poisson (higher-order Euler–Lagrange) system of some Lagrangian, and
//! producing the certificates either way.
//!
//! The main building blocks:
//!
//! * [`jet`] — jet charts, jet points, diagonal metrics, deterministic
//!   sampling, and prolongation of polynomial curves.
//! * [`expr`] — a small expression language over jet coordinates with exact
//!   structural operations: partial and total derivatives, first-order
//!   differential operators, substitution, and IEEE-double evaluation.
//! * [`parse`] — the text grammar for expressions (parser and renderer).
//! * [`model`] — model files bundling charts, constants, Lagrangians and
//!   dynamical forms.
//! * [`variational`] — Euler–Poisson operator, Helmholtz self-adjointness
//!   residuals (plain and split variants), and Zermelo homogeneity residuals.
//! * [`homogeneous`] — the two-way dictionary between parametric jets
//!   (`t, x^i, v^i, …`) and homogeneous jets (`x^α(ζ), u^α, …`): jet
//!   projection and the lifts of Lagrangians and dynamical forms.
//! * [`shapes`] — variational normal forms of third- and fourth-order
//!   systems: coefficient extraction, the closed condition systems, and the
//!   coefficient formulas induced by a Lagrangian.
//! * [`symmetry`] — Poincaré-symmetry residuals for third-order planar
//!   systems, the uniqueness PDE residuals, and the obstruction
//!   certificate for first-order relativistic spin dynamics.
//! * [`top`] — the bundled model of the third-order relativistic top:
//!   equations, Lagrangians, conserved momentum, and fixed-step integrators.
//! * [`report`] — the JSON line format emitted by checks.
//! * [`acceptance`] — the end-to-end verification battery used by
//!   `varjet top-verify`.

// Smart constructors keep the `add`/`mul`/... names, index loops mirror the
// tensor formulas they implement, and float-literal guards are deliberate.
#![allow(clippy::should_implement_trait)]
#![allow(clippy::redundant_guards)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::type_complexity)]

pub mod acceptance;
pub mod expr;
pub mod homogeneous;
pub mod jet;
pub mod model;
pub mod parse;
pub mod report;
pub mod shapes;
pub mod symmetry;
pub mod top;
pub mod variational;

pub use expr::{evaluate, substitute, total_derivative, DiffOperator, Evaluator, Expr, Var};
pub use jet::{ChartKind, CoordId, JetChart, JetPoint, Metric, SampleRanges};
pub use model::Model;
pub use report::Report;
pub use variational::{DynamicalForm, LagrangianDef};
