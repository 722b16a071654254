//! Command-line interface: batch checks over model files, normal-form and
//! symmetry sweeps, the no-go certificate search, trajectory integration,
//! and the bundled verification battery.
//!
//! Reports stream to stdout as one JSON object per line (optionally teed to
//! `--out`); timings go to stderr. Exit codes: `0` all checks passed, `1` a
//! check failed, `2` usage or format error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

use varjet::expr::{render_expression, Evaluator, Expr};
use varjet::homogeneous::{lift_equation, lift_lagrangian, project_jet};
use varjet::jet::{
    prolong_curve, sample_jetpoint, ChartKind, CoordId, JetChart, Metric, SampleRanges,
};
use varjet::model::{FormEntry, LagrangianEntry, Model};
use varjet::report::Report;
use varjet::shapes::{
    extract_shape3, extract_shape4, shape3_conditions, shape4_conditions, ShapeError,
};
use varjet::symmetry::{nogo_max_certificate, symmetry_problem};
use varjet::top;
use varjet::variational::{
    euler_poisson, helmholtz, helmholtz_split, zermelo, DynamicalForm, LagrangianDef,
};

const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Parser)]
#[command(name = "varjet", version, about = "Inverse variational calculus on jet spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load a model file and evaluate every entry at sample points.
    CheckModel(CheckModelArgs),
    /// Euler–Poisson system of a Lagrangian entry; print it or compare it
    /// against a dynamical-form entry.
    El(AgainstArgs),
    /// Helmholtz self-adjointness residuals of a dynamical-form entry.
    Helmholtz(HelmholtzArgs),
    /// Zermelo homogeneity residuals of a homogeneous Lagrangian entry.
    Zermelo(CheckArgs),
    /// Lift a parametric entry to the homogeneous chart; print it or compare
    /// it against a homogeneous entry.
    Lift(AgainstArgs),
    /// Reparametrization-invariance sweep of the jet projection.
    Project(ProjectArgs),
    /// Extract the variational normal shape of a form and test its
    /// integrability conditions.
    Shape(ShapeArgs),
    /// Poincaré-equivariance sweep of a parametric dynamical form.
    Symmetry(CheckArgs),
    /// Positivity search for the spin-supplementary obstruction certificate.
    Nogo(NogoArgs),
    /// Integrate the relativistic top and write the trajectory as CSV.
    TopSimulate(SimArgs),
    /// Run the bundled verification battery on the built-in top model.
    TopVerify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// RNG seed (also honours VARJET_SEED).
    #[arg(long, env = "VARJET_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of sample points (or parameter draws) in the sweep.
    #[arg(long, default_value_t = 40)]
    samples: usize,
    /// Residual tolerance; each command has a sensible default.
    #[arg(long)]
    tol: Option<f64>,
    /// Also append the emitted report lines to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckModelArgs {
    /// Model file to check.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    /// Model file providing the entry.
    #[arg(long)]
    model: PathBuf,
    /// Entry name inside the model.
    #[arg(long)]
    name: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct HelmholtzArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Use the split variant of the criterion.
    #[arg(long)]
    split: bool,
}

#[derive(Args)]
struct AgainstArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Compare numerically against this entry instead of printing.
    #[arg(long)]
    against: Option<String>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Optional model fixing the homogeneous chart dimension.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ShapeArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Normal-shape order; inferred from the form when omitted.
    #[arg(long, value_parser = clap::value_parser!(i32).range(3..=4))]
    order: Option<i32>,
}

#[derive(Args)]
struct NogoArgs {
    /// Spin directions tried per residual acceleration.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChartArg {
    Parametric,
    Homogeneous,
}

#[derive(Args)]
struct SimArgs {
    /// Chart to integrate in.
    #[arg(long, value_enum, default_value_t = ChartArg::Parametric)]
    chart: ChartArg,
    /// Spin–curvature coupling constant.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Step size.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Number of steps.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Initial position (2 components parametric, 3 homogeneous).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Initial velocity (parametric chart).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    v0: Option<Vec<f64>>,
    /// Initial acceleration (parametric chart).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    vp0: Option<Vec<f64>>,
    /// Initial velocity (homogeneous chart).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    u0: Option<Vec<f64>>,
    /// Initial second derivative (homogeneous chart).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    udot0: Option<Vec<f64>>,
    /// Drift tolerance for the exit status.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (echoed in the report).
    #[arg(long, env = "VARJET_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// RNG seed for the whole battery.
    #[arg(long, env = "VARJET_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also append the emitted report lines to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("no entry named `{name}` in the model (available: {available})")]
    UnknownName { name: String, available: String },
    #[error("entry `{name}` is not a {expected}")]
    WrongEntryKind { name: String, expected: &'static str },
    #[error("entries live on different chart kinds")]
    ChartKindMismatch,
    #[error("flag --{flag} needs exactly {expected} comma-separated values")]
    VectorLength { flag: &'static str, expected: usize },
    #[error("the model declares no metric signature")]
    NoSignature,
    #[error("inadmissible initial data: {0}")]
    BadInitialData(String),
    #[error(transparent)]
    Model(#[from] varjet::model::ModelError),
    #[error(transparent)]
    Jet(#[from] varjet::jet::JetError),
    #[error(transparent)]
    Eval(#[from] varjet::expr::EvalError),
    #[error(transparent)]
    Variational(#[from] varjet::variational::VariationalError),
    #[error(transparent)]
    Homogeneous(#[from] varjet::homogeneous::HomogeneousError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Symmetry(#[from] varjet::symmetry::SymmetryError),
    #[error(transparent)]
    Top(#[from] top::TopError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes report lines to stdout and optionally tees them into a file.
struct Sink {
    file: Option<File>,
}

impl Sink {
    fn open(path: &Option<PathBuf>) -> Result<Sink, CliError> {
        let file = match path {
            Some(p) => Some(File::create(p)?),
            None => None,
        };
        Ok(Sink { file })
    }

    fn emit(&mut self, line: &str) -> Result<(), CliError> {
        println!("{line}");
        if let Some(f) = &mut self.file {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }

    fn report(&mut self, report: &Report) -> Result<bool, CliError> {
        self.emit(&report.to_json_line())?;
        Ok(report.pass)
    }
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    eprintln!("elapsed: {:?}", started.elapsed());
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::CheckModel(a) => check_model(a),
        Cmd::El(a) => el(a),
        Cmd::Helmholtz(a) => helmholtz_cmd(a),
        Cmd::Zermelo(a) => zermelo_cmd(a),
        Cmd::Lift(a) => lift(a),
        Cmd::Project(a) => project(a),
        Cmd::Shape(a) => shape(a),
        Cmd::Symmetry(a) => symmetry(a),
        Cmd::Nogo(a) => nogo(a),
        Cmd::TopSimulate(a) => top_simulate(a),
        Cmd::TopVerify(a) => top_verify(a),
    }
}

fn ranges_for(chart: &JetChart) -> SampleRanges {
    match chart.kind {
        ChartKind::Parametric => SampleRanges::top_parametric(chart.order),
        ChartKind::Homogeneous => SampleRanges::top_homogeneous(chart.n, chart.order),
    }
}

fn unknown(name: &str, model: &Model) -> CliError {
    CliError::UnknownName {
        name: name.to_string(),
        available: model.entry_names().join(", "),
    }
}

fn lagrangian_entry<'m>(model: &'m Model, name: &str) -> Result<&'m LagrangianEntry, CliError> {
    match model.lagrangian(name) {
        Some(entry) => Ok(entry),
        None if model.form(name).is_some() => Err(CliError::WrongEntryKind {
            name: name.to_string(),
            expected: "Lagrangian",
        }),
        None => Err(unknown(name, model)),
    }
}

fn form_entry<'m>(model: &'m Model, name: &str) -> Result<&'m FormEntry, CliError> {
    match model.form(name) {
        Some(entry) => Ok(entry),
        None if model.lagrangian(name).is_some() => Err(CliError::WrongEntryKind {
            name: name.to_string(),
            expected: "dynamical form",
        }),
        None => Err(unknown(name, model)),
    }
}

fn as_lagrangian(entry: &LagrangianEntry) -> Result<LagrangianDef, CliError> {
    Ok(LagrangianDef::new(
        entry.chart.kind,
        entry.chart.n,
        entry.expr.clone(),
    )?)
}

fn as_form(entry: &FormEntry) -> Result<DynamicalForm, CliError> {
    Ok(DynamicalForm::new(
        entry.chart.kind,
        entry.chart.n,
        entry.components.clone(),
    )?)
}

fn check_model(args: CheckModelArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.model)?;
    let consts = model.const_values();
    let mut sink = Sink::open(&args.common.out)?;
    let mut all = true;
    for name in model.entry_names() {
        let (chart, exprs): (JetChart, Vec<Expr>) = match model.lagrangian(&name) {
            Some(l) => (l.chart, vec![l.expr.clone()]),
            None => {
                let f = model.form(&name).expect("entry is one or the other");
                (f.chart, f.components.clone())
            }
        };
        let ranges = ranges_for(&chart);
        let mut ok = true;
        for k in 0..3u64 {
            let pt = sample_jetpoint(&chart, &ranges, args.common.seed.wrapping_add(k))?;
            let mut ev = Evaluator::new(&pt, &consts);
            for e in &exprs {
                match ev.eval(e) {
                    Ok(v) if v.is_finite() => {}
                    _ => ok = false,
                }
            }
        }
        let residual = if ok { 0.0 } else { 1.0 };
        let report = Report::new(&format!("model:{name}"), args.common.seed, 3, residual, 0.0);
        all &= sink.report(&report)?;
    }
    Ok(all)
}

fn compare_forms(
    check: &str,
    a: &DynamicalForm,
    b: &DynamicalForm,
    common: &Common,
    tol: f64,
    consts: &BTreeMap<String, f64>,
    sink: &mut Sink,
) -> Result<bool, CliError> {
    if a.chart().kind != b.chart().kind || a.chart().n != b.chart().n {
        return Err(CliError::ChartKindMismatch);
    }
    let order = a.order().max(b.order()).max(1);
    let chart = a.chart().with_order(order);
    let ranges = ranges_for(&chart);
    let mut worst = 0.0f64;
    for k in 0..common.samples {
        let pt = sample_jetpoint(&chart, &ranges, common.seed.wrapping_add(k as u64))?;
        let xs = a.evaluate(&pt, consts)?;
        let ys = b.evaluate(&pt, consts)?;
        for (x, y) in xs.iter().zip(&ys) {
            worst = worst.max((x - y).abs());
        }
    }
    let report = Report::new(check, common.seed, common.samples, worst, common.tol.unwrap_or(tol));
    sink.report(&report)
}

fn el(args: AgainstArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.check.model)?;
    let ldef = as_lagrangian(lagrangian_entry(&model, &args.check.name)?)?;
    let ep = euler_poisson(&ldef);
    let mut sink = Sink::open(&args.check.common.out)?;
    match &args.against {
        None => {
            for component in ep.components() {
                sink.emit(&render_expression(component))?;
            }
            Ok(true)
        }
        Some(against) => {
            let target = as_form(form_entry(&model, against)?)?;
            compare_forms(
                &format!("el:{}-vs-{}", args.check.name, against),
                &ep,
                &target,
                &args.check.common,
                1e-9,
                &model.const_values(),
                &mut sink,
            )
        }
    }
}

fn helmholtz_cmd(args: HelmholtzArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.check.model)?;
    let form = as_form(form_entry(&model, &args.check.name)?)?;
    let consts = model.const_values();
    let common = &args.check.common;
    let mut sink = Sink::open(&common.out)?;
    let (label, point_order): (&str, i32);
    let plain;
    let split;
    if args.split {
        split = Some(helmholtz_split(&form));
        plain = None;
        label = "helmholtz-split";
        point_order = split.as_ref().expect("just built").point_order();
    } else {
        plain = Some(helmholtz(&form));
        split = None;
        label = "helmholtz";
        point_order = plain.as_ref().expect("just built").point_order();
    }
    let chart = form.chart().with_order(point_order.max(1));
    let ranges = ranges_for(&chart);
    let mut worst = 0.0f64;
    for k in 0..common.samples {
        let pt = sample_jetpoint(&chart, &ranges, common.seed.wrapping_add(k as u64))?;
        let rel = match (&plain, &split) {
            (Some(sys), _) => sys.max_rel(&pt, &consts)?,
            (_, Some(sys)) => sys.max_rel(&pt, &consts)?,
            _ => unreachable!(),
        };
        worst = worst.max(rel);
    }
    let report = Report::new(
        &format!("{label}:{}", args.check.name),
        common.seed,
        common.samples,
        worst,
        common.tol.unwrap_or(1e-9),
    );
    sink.report(&report)
}

fn zermelo_cmd(args: CheckArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.model)?;
    let ldef = as_lagrangian(lagrangian_entry(&model, &args.name)?)?;
    let conditions = zermelo(&ldef)?;
    let consts = model.const_values();
    let chart = ldef.chart().with_order(ldef.order().max(1));
    let ranges = ranges_for(&chart);
    let mut sink = Sink::open(&args.common.out)?;
    let mut worst = 0.0f64;
    for k in 0..args.common.samples {
        let pt = sample_jetpoint(&chart, &ranges, args.common.seed.wrapping_add(k as u64))?;
        let (z1, z2) = conditions.evaluate(&pt, &consts)?;
        worst = worst.max(z1.abs()).max(z2.abs());
    }
    let report = Report::new(
        &format!("zermelo:{}", args.name),
        args.common.seed,
        args.common.samples,
        worst,
        args.common.tol.unwrap_or(1e-10),
    );
    sink.report(&report)
}

fn lift(args: AgainstArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.check.model)?;
    let name = &args.check.name;
    let common = &args.check.common;
    let consts = model.const_values();
    let mut sink = Sink::open(&common.out)?;
    if let Some(entry) = model.lagrangian(name) {
        let lifted = lift_lagrangian(&as_lagrangian(entry)?)?;
        match &args.against {
            None => {
                sink.emit(&render_expression(lifted.expr()))?;
                Ok(true)
            }
            Some(against) => {
                let target = as_lagrangian(lagrangian_entry(&model, against)?)?;
                if target.chart().kind != ChartKind::Homogeneous {
                    return Err(CliError::ChartKindMismatch);
                }
                let order = lifted.order().max(target.order()).max(1);
                let chart = target.chart().with_order(order);
                let ranges = ranges_for(&chart);
                let mut worst = 0.0f64;
                for k in 0..common.samples {
                    let pt = sample_jetpoint(&chart, &ranges, common.seed.wrapping_add(k as u64))?;
                    let mut ev = Evaluator::new(&pt, &consts);
                    worst = worst.max((ev.eval(lifted.expr())? - ev.eval(target.expr())?).abs());
                }
                let report = Report::new(
                    &format!("lift:{name}-vs-{against}"),
                    common.seed,
                    common.samples,
                    worst,
                    common.tol.unwrap_or(1e-9),
                );
                sink.report(&report)
            }
        }
    } else if let Some(entry) = model.form(name) {
        let form = as_form(entry)?;
        let against = args.against.as_ref().ok_or_else(|| CliError::WrongEntryKind {
            name: name.clone(),
            expected: "Lagrangian (lifting a form needs --against)",
        })?;
        let target = as_form(form_entry(&model, against)?)?;
        if target.chart().kind != ChartKind::Homogeneous {
            return Err(CliError::ChartKindMismatch);
        }
        let chart = target.chart().with_order(3);
        let ranges = ranges_for(&chart);
        let mut worst = 0.0f64;
        for k in 0..common.samples {
            let pt = sample_jetpoint(&chart, &ranges, common.seed.wrapping_add(k as u64))?;
            let lifted = lift_equation(&form, &pt, &consts)?;
            let want = target.evaluate(&pt, &consts)?;
            for (x, y) in lifted.iter().zip(&want) {
                worst = worst.max((x - y).abs());
            }
        }
        let report = Report::new(
            &format!("lift:{name}-vs-{against}"),
            common.seed,
            common.samples,
            worst,
            common.tol.unwrap_or(1e-9),
        );
        sink.report(&report)
    } else {
        Err(unknown(name, &model))
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_compose(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    // Horner: p(q(τ)) folded from the top coefficient down.
    let mut acc = vec![0.0];
    for &c in outer.iter().rev() {
        acc = poly_mul(&acc, inner);
        if acc.is_empty() {
            acc = vec![0.0];
        }
        acc[0] += c;
    }
    acc
}

fn project(args: ProjectArgs) -> Result<bool, CliError> {
    let n = match &args.model {
        Some(path) => {
            let model = Model::load(path)?;
            model.chart.n
        }
        None => 2,
    };
    let common = &args.common;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut sink = Sink::open(&common.out)?;
    let mut worst = 0.0f64;
    for _ in 0..common.samples {
        // Random cubic curve ζ ↦ X(ζ) with Ẋ⁰ bounded away from zero at the
        // base point, and a random orientation-preserving cubic clock change
        // τ ↦ φ(τ) with φ(0) = 0.
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        for alpha in 0..=n {
            let mut cs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            if alpha == 0 {
                cs[1] = rng.random_range(0.5..1.5);
            }
            coeffs.push(cs);
        }
        let mut phi: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
        phi[0] = 0.0;
        phi[1] = rng.random_range(0.3..2.0);
        let direct = prolong_curve(ChartKind::Homogeneous, &coeffs, 0.0, 3)?;
        let composed: Vec<Vec<f64>> =
            coeffs.iter().map(|cs| poly_compose(cs, &phi)).collect();
        let reparametrized = prolong_curve(ChartKind::Homogeneous, &composed, 0.0, 3)?;
        let p1 = project_jet(&direct)?;
        let p2 = project_jet(&reparametrized)?;
        let chart = JetChart::parametric(n, 3);
        worst = worst.max((p1.time() - p2.time()).abs());
        for i in 0..chart.n {
            for r in -1..chart.order {
                let id = CoordId::parametric(i, r);
                let (a, b) = (p1.get(id), p2.get(id));
                if let (Some(a), Some(b)) = (a, b) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    let report = Report::new(
        "projection-invariance",
        common.seed,
        common.samples,
        worst,
        common.tol.unwrap_or(1e-9),
    );
    sink.report(&report)
}

fn shape(args: ShapeArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.check.model)?;
    let form = as_form(form_entry(&model, &args.check.name)?)?;
    let consts = model.const_values();
    let common = &args.check.common;
    let order = args.order.unwrap_or(if form.order() <= 2 { 3 } else { form.order().max(3) });
    let mut sink = Sink::open(&common.out)?;
    let sample_chart = form.chart().with_order(order);
    let ranges = ranges_for(&sample_chart);
    let extraction = match order {
        3 => extract_shape3(&form, &ranges, common.seed, &consts).map(|s| shape3_conditions(&s)),
        _ => extract_shape4(&form, &ranges, common.seed, &consts).map(|s| shape4_conditions(&s)),
    };
    let conditions = match extraction {
        Ok(c) => c,
        Err(ShapeError::NotNormalForm { check, max_abs }) => {
            eprintln!(
                "shape:{}: structure check failed ({check}); reporting its residual",
                args.check.name
            );
            let report = Report::new(
                &format!("shape{order}:{}", args.check.name),
                common.seed,
                common.samples,
                max_abs,
                common.tol.unwrap_or(1e-9),
            );
            return sink.report(&report);
        }
        Err(e) => return Err(e.into()),
    };
    let mut worst = 0.0f64;
    for k in 0..common.samples {
        let pt = sample_jetpoint(&sample_chart, &ranges, common.seed.wrapping_add(k as u64))?;
        worst = worst.max(conditions.max_abs(&pt, &consts)?);
    }
    let report = Report::new(
        &format!("shape{order}:{}", args.check.name),
        common.seed,
        common.samples,
        worst,
        common.tol.unwrap_or(1e-9),
    );
    sink.report(&report)
}

fn symmetry(args: CheckArgs) -> Result<bool, CliError> {
    let model = Model::load(&args.model)?;
    let metric = model.metric().ok_or(CliError::NoSignature)?;
    let form = as_form(form_entry(&model, &args.name)?)?;
    let consts = model.const_values();
    let n = form.chart().n;
    let chart = form.chart().with_order(3);
    let ranges = ranges_for(&chart);
    let common = &args.common;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut sink = Sink::open(&common.out)?;
    let mut worst = 0.0f64;
    for k in 0..common.samples {
        let mut omega = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = rng.random_range(-1.0..1.0);
                omega[i][j] = w;
                omega[j][i] = -w;
            }
        }
        let pi: Vec<f64> = (0..n).map(|_| rng.random_range(-0.7..0.7)).collect();
        let problem = symmetry_problem(&form, &metric, &omega, &pi)?;
        for p in 0..10u64 {
            let pt = sample_jetpoint(
                &chart,
                &ranges,
                common.seed.wrapping_add(1 + (k as u64) * 17 + p),
            )?;
            for r in problem.residual_exact(&pt, &consts)? {
                worst = worst.max(r.abs());
            }
            worst = worst.max(problem.defect_lsq(&pt, &consts)?);
        }
    }
    let report = Report::new(
        &format!("equivariance:{}", args.name),
        common.seed,
        common.samples,
        worst,
        common.tol.unwrap_or(1e-9),
    );
    sink.report(&report)
}

fn nogo(args: NogoArgs) -> Result<bool, CliError> {
    let metric = Metric::new(&[-1, -1, -1], 1)?;
    let common = &args.common;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut sink = Sink::open(&common.out)?;
    let mut min_cert = f64::MAX;
    for case in 0..common.samples {
        let mut acc = [0.0; 3];
        loop {
            for slot in &mut acc {
                *slot = rng.random_range(-1.0..1.0);
            }
            if acc.iter().map(|x| x * x).sum::<f64>().sqrt() >= 0.3 {
                break;
            }
        }
        let vel = [
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
        ];
        let cert = nogo_max_certificate(
            &metric,
            &acc,
            &vel,
            args.trials,
            common.seed.wrapping_add(1000 + case as u64),
        );
        min_cert = min_cert.min(cert);
    }
    let threshold = common.tol.unwrap_or(1e-6);
    let residual = (threshold - min_cert).max(0.0);
    let report = Report::new("obstruction-certificate", common.seed, common.samples, residual, 0.0);
    sink.report(&report)
}

fn fixed<const N: usize>(
    flag: &'static str,
    values: Option<Vec<f64>>,
    default: [f64; N],
) -> Result<[f64; N], CliError> {
    match values {
        None => Ok(default),
        Some(v) => v
            .try_into()
            .map_err(|_| CliError::VectorLength { flag, expected: N }),
    }
}

fn top_simulate(args: SimArgs) -> Result<bool, CliError> {
    // Solve once at the initial state first: inadmissible initial data is a
    // usage error (exit 2), distinct from a trajectory that leaves the
    // admissible region mid-run (exit 1).
    let trajectory = match args.chart {
        ChartArg::Parametric => {
            let x0 = fixed("x0", args.x0, [0.0, 0.0])?;
            let v0 = fixed("v0", args.v0, [0.3, 0.1])?;
            let vp0 = fixed("vp0", args.vp0, [0.2, -0.4])?;
            if let Err(top::TopError::Inadmissible { why, .. }) =
                top::solve_acceleration_parametric(v0, vp0, args.mu)
            {
                return Err(CliError::BadInitialData(why));
            }
            top::integrate_parametric(x0, v0, vp0, args.mu, args.h, args.steps)
        }
        ChartArg::Homogeneous => {
            let x0 = fixed("x0", args.x0, [0.0, 0.0, 0.0])?;
            // default slope is metric-orthogonal to u, the convention under
            // which the gauge row keeps u·u (hence uu_drift) constant
            let u0 = fixed("u0", args.u0, [1.0, 0.3, 0.1])?;
            let udot0 = fixed("udot0", args.udot0, [0.02, 0.2, -0.4])?;
            if let Err(top::TopError::Inadmissible { why, .. }) =
                top::solve_acceleration_homogeneous(u0, udot0, args.mu)
            {
                return Err(CliError::BadInitialData(why));
            }
            top::integrate_homogeneous(x0, u0, udot0, args.mu, args.h, args.steps)
        }
    };
    let trajectory = match trajectory {
        Ok(t) => t,
        Err(e) => {
            eprintln!("integration stopped: {e}");
            return Ok(false);
        }
    };
    let csv = trajectory.to_csv();
    match &args.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    let drift = trajectory
        .max_momentum_drift()
        .max(trajectory.max_gauge_drift());
    let report = Report::new(
        &format!(
            "top-simulate:{}",
            match args.chart {
                ChartArg::Parametric => "parametric",
                ChartArg::Homogeneous => "homogeneous",
            }
        ),
        args.seed,
        args.steps,
        drift,
        args.tol,
    );
    // The CSV owns stdout; the summary report goes to stderr unless --out
    // freed the stream.
    if args.out.is_some() {
        println!("{}", report.to_json_line());
    } else {
        eprintln!("{}", report.to_json_line());
    }
    Ok(report.pass)
}

fn top_verify(args: VerifyArgs) -> Result<bool, CliError> {
    let reports = varjet::acceptance::run_all(args.seed);
    let mut sink = Sink::open(&args.out)?;
    let mut all = true;
    for report in &reports {
        all &= sink.report(report)?;
    }
    Ok(all)
}
