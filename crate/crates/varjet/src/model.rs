//! Model files: a chart declaration, named constants, Lagrangians, and
//! dynamical forms in a line-oriented text format.
//!
//! ```text
//! # comment
//! [model]
//! chart = parametric          # default chart family for all sections
//! dim = 2                     # spatial dimension n
//! order = 3                   # default derivative order
//! signature = +--             # spacetime metric, n+1 entries
//!
//! [constants]
//! mu = 1
//! kappa = free                # declared but unbound
//!
//! [lagrangian L1]
//! order = 2                   # optional per-section override
//! L = <expression>
//!
//! [form HOM]
//! chart = homogeneous         # optional per-section override
//! E0 = <expression>           # components: E1..En parametric, E0..En homogeneous
//! E1 = <expression>
//! E2 = <expression>
//! ```
//!
//! Expressions are parsed against the section's chart, so coordinate
//! spellings and derivative levels are validated at load time. Loading a
//! saved model reproduces it exactly (structural equality of all
//! expressions).

use crate::expr::{render_expression, Expr};
use crate::jet::{metric_from_signature, ChartKind, JetChart, Metric};
use crate::parse::{parse_expression, ParseError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: in `{key}`: {source}")]
    Expression {
        line: usize,
        key: String,
        #[source]
        source: ParseError,
    },
}

fn line_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Line { line, message: message.into() }
}

/// A named constant: bound to a value or declared free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantValue {
    Value(f64),
    Free,
}

/// A Lagrangian entry: the chart its expression was read against plus the
/// expression itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianEntry {
    pub chart: JetChart,
    pub expr: Expr,
}

/// A form entry: one expression per dependent coordinate of its chart.
#[derive(Debug, Clone, PartialEq)]
pub struct FormEntry {
    pub chart: JetChart,
    pub components: Vec<Expr>,
}

/// An in-memory model document.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub chart: JetChart,
    pub signature: String,
    pub constants: BTreeMap<String, ConstantValue>,
    pub lagrangians: BTreeMap<String, LagrangianEntry>,
    pub forms: BTreeMap<String, FormEntry>,
}

impl Model {
    pub fn new(chart: JetChart, signature: &str) -> Model {
        Model {
            chart,
            signature: signature.to_owned(),
            constants: BTreeMap::new(),
            lagrangians: BTreeMap::new(),
            forms: BTreeMap::new(),
        }
    }

    /// The spacetime metric named by the signature, orientation +1.
    pub fn metric(&self) -> Option<Metric> {
        metric_from_signature(&self.signature)
    }

    /// Bound constant values (free constants are omitted).
    pub fn const_values(&self) -> BTreeMap<String, f64> {
        self.constants
            .iter()
            .filter_map(|(k, v)| match v {
                ConstantValue::Value(x) => Some((k.clone(), *x)),
                ConstantValue::Free => None,
            })
            .collect()
    }

    pub fn lagrangian(&self, name: &str) -> Option<&LagrangianEntry> {
        self.lagrangians.get(name)
    }

    pub fn form(&self, name: &str) -> Option<&FormEntry> {
        self.forms.get(name)
    }

    /// All lagrangian and form names, for listings and error messages.
    pub fn entry_names(&self) -> Vec<String> {
        self.lagrangians
            .keys()
            .chain(self.forms.keys())
            .cloned()
            .collect()
    }

    pub fn load(path: &Path) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Model::loads(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.saves()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Parse a model document.
    pub fn loads(text: &str) -> Result<Model, ModelError> {
        Loader::new().run(text)
    }

    /// Render the model document. Sections appear in name order; loading the
    /// result reproduces the model exactly.
    pub fn saves(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[model]");
        let _ = writeln!(out, "chart = {}", self.chart.kind);
        let _ = writeln!(out, "dim = {}", self.chart.n);
        let _ = writeln!(out, "order = {}", self.chart.order);
        let _ = writeln!(out, "signature = {}", self.signature);
        if !self.constants.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "[constants]");
            for (name, value) in &self.constants {
                match value {
                    ConstantValue::Value(v) => {
                        let _ = writeln!(out, "{name} = {}", render_expression(&Expr::num(*v)));
                    }
                    ConstantValue::Free => {
                        let _ = writeln!(out, "{name} = free");
                    }
                }
            }
        }
        for (name, entry) in &self.lagrangians {
            let _ = writeln!(out);
            let _ = writeln!(out, "[lagrangian {name}]");
            self.write_overrides(&mut out, entry.chart);
            let _ = writeln!(out, "L = {}", render_expression(&entry.expr));
        }
        for (name, entry) in &self.forms {
            let _ = writeln!(out);
            let _ = writeln!(out, "[form {name}]");
            self.write_overrides(&mut out, entry.chart);
            let base = component_base(entry.chart.kind);
            for (i, comp) in entry.components.iter().enumerate() {
                let _ = writeln!(out, "E{} = {}", base + i, render_expression(comp));
            }
        }
        out
    }

    fn write_overrides(&self, out: &mut String, chart: JetChart) {
        if chart.kind != self.chart.kind {
            let _ = writeln!(out, "chart = {}", chart.kind);
        }
        if chart.order != self.chart.order {
            let _ = writeln!(out, "order = {}", chart.order);
        }
    }
}

/// First component index of a form on a chart family: parametric forms are
/// written `E1..En`, homogeneous ones `E0..En`.
fn component_base(kind: ChartKind) -> usize {
    match kind {
        ChartKind::Parametric => 1,
        ChartKind::Homogeneous => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Section {
    Top,
    Model,
    Constants,
    Lagrangian(String),
    Form(String),
}

struct Loader {
    section: Section,
    section_line: usize,
    buffer: Vec<(usize, String, String)>,
    header: Option<ModelHeader>,
    constants: BTreeMap<String, ConstantValue>,
    lagrangians: BTreeMap<String, LagrangianEntry>,
    forms: BTreeMap<String, FormEntry>,
}

struct ModelHeader {
    kind: ChartKind,
    n: usize,
    order: i32,
    signature: String,
}

impl ModelHeader {
    fn chart(&self) -> JetChart {
        JetChart { kind: self.kind, n: self.n, order: self.order }
    }
}

impl Loader {
    fn new() -> Loader {
        Loader {
            section: Section::Top,
            section_line: 0,
            buffer: Vec::new(),
            header: None,
            constants: BTreeMap::new(),
            lagrangians: BTreeMap::new(),
            forms: BTreeMap::new(),
        }
    }

    fn run(mut self, text: &str) -> Result<Model, ModelError> {
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| line_err(lineno, "unterminated section header"))?
                    .trim();
                self.flush()?;
                self.section = parse_section_header(inner, lineno)?;
                self.section_line = lineno;
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(line_err(lineno, format!("expected `key = value`, found `{line}`")));
            };
            let key = line[..eq].trim().to_owned();
            let value = line[eq + 1..].trim().to_owned();
            if key.is_empty() {
                return Err(line_err(lineno, "empty key before `=`"));
            }
            match self.section {
                Section::Top => {
                    return Err(line_err(lineno, "key outside any section (missing `[model]`?)"))
                }
                _ => self.buffer.push((lineno, key, value)),
            }
        }
        self.flush()?;
        let header = self
            .header
            .ok_or_else(|| line_err(0, "missing `[model]` section"))?;
        Ok(Model {
            chart: header.chart(),
            signature: header.signature,
            constants: self.constants,
            lagrangians: self.lagrangians,
            forms: self.forms,
        })
    }

    fn flush(&mut self) -> Result<(), ModelError> {
        let entries = std::mem::take(&mut self.buffer);
        let section = std::mem::replace(&mut self.section, Section::Top);
        match section {
            Section::Top => {
                debug_assert!(entries.is_empty());
                Ok(())
            }
            Section::Model => self.flush_model(entries),
            Section::Constants => self.flush_constants(entries),
            Section::Lagrangian(name) => self.flush_lagrangian(name, entries),
            Section::Form(name) => self.flush_form(name, entries),
        }
    }

    fn flush_model(&mut self, entries: Vec<(usize, String, String)>) -> Result<(), ModelError> {
        if self.header.is_some() {
            return Err(line_err(self.section_line, "duplicate `[model]` section"));
        }
        let mut kind = None;
        let mut n = None;
        let mut order = None;
        let mut signature = None;
        for (lineno, key, value) in entries {
            match key.as_str() {
                "chart" => {
                    set_once(&mut kind, parse_chart_kind(&value, lineno)?, "chart", lineno)?
                }
                "dim" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad dimension `{value}`")))?;
                    if v == 0 {
                        return Err(line_err(lineno, "dimension must be positive"));
                    }
                    set_once(&mut n, v, "dim", lineno)?
                }
                "order" => set_once(&mut order, parse_order(&value, lineno)?, "order", lineno)?,
                "signature" => {
                    if metric_from_signature(&value).is_none() {
                        return Err(line_err(
                            lineno,
                            format!("bad signature `{value}` (expected a string of `+`/`-`)"),
                        ));
                    }
                    set_once(&mut signature, value, "signature", lineno)?
                }
                other => {
                    return Err(line_err(lineno, format!("unknown key `{other}` in `[model]`")))
                }
            }
        }
        let line = self.section_line;
        let missing = |what: &str| line_err(line, format!("`[model]` is missing `{what}`"));
        let header = ModelHeader {
            kind: kind.ok_or_else(|| missing("chart"))?,
            n: n.ok_or_else(|| missing("dim"))?,
            order: order.ok_or_else(|| missing("order"))?,
            signature: signature.ok_or_else(|| missing("signature"))?,
        };
        if header.signature.len() != header.n + 1 {
            return Err(line_err(
                line,
                format!(
                    "signature `{}` has {} entries, expected dim + 1 = {}",
                    header.signature,
                    header.signature.len(),
                    header.n + 1
                ),
            ));
        }
        self.header = Some(header);
        Ok(())
    }

    fn flush_constants(&mut self, entries: Vec<(usize, String, String)>) -> Result<(), ModelError> {
        for (lineno, key, value) in entries {
            let parsed = if value == "free" {
                ConstantValue::Free
            } else {
                let v: f64 = value
                    .parse()
                    .map_err(|_| line_err(lineno, format!("bad constant value `{value}`")))?;
                ConstantValue::Value(v)
            };
            if self.constants.insert(key.clone(), parsed).is_some() {
                return Err(line_err(lineno, format!("duplicate constant `{key}`")));
            }
        }
        Ok(())
    }

    /// Split section entries into chart overrides and the remaining keys.
    fn section_chart(
        &self,
        entries: &[(usize, String, String)],
        section_line: usize,
    ) -> Result<(JetChart, Vec<(usize, String, String)>), ModelError> {
        let header = self
            .header
            .as_ref()
            .ok_or_else(|| line_err(section_line, "`[model]` must precede this section"))?;
        let mut chart = header.chart();
        let mut rest = Vec::new();
        let mut seen_chart = false;
        let mut seen_order = false;
        for (lineno, key, value) in entries {
            match key.as_str() {
                "chart" => {
                    if seen_chart {
                        return Err(line_err(*lineno, "duplicate `chart` override"));
                    }
                    seen_chart = true;
                    chart.kind = parse_chart_kind(value, *lineno)?;
                }
                "order" => {
                    if seen_order {
                        return Err(line_err(*lineno, "duplicate `order` override"));
                    }
                    seen_order = true;
                    chart.order = parse_order(value, *lineno)?;
                }
                _ => rest.push((*lineno, key.clone(), value.clone())),
            }
        }
        Ok((chart, rest))
    }

    fn flush_lagrangian(
        &mut self,
        name: String,
        entries: Vec<(usize, String, String)>,
    ) -> Result<(), ModelError> {
        let section_line = self.section_line;
        let (chart, rest) = self.section_chart(&entries, section_line)?;
        let mut expr = None;
        for (lineno, key, value) in rest {
            if key != "L" {
                return Err(line_err(
                    lineno,
                    format!("unknown key `{key}` in `[lagrangian {name}]` (expected `L`)"),
                ));
            }
            if expr.is_some() {
                return Err(line_err(lineno, format!("duplicate `L` in `[lagrangian {name}]`")));
            }
            let e = parse_expression(&value, &chart).map_err(|source| ModelError::Expression {
                line: lineno,
                key: key.clone(),
                source,
            })?;
            expr = Some(e);
        }
        let expr = expr.ok_or_else(|| {
            line_err(section_line, format!("`[lagrangian {name}]` is missing `L`"))
        })?;
        if self
            .lagrangians
            .insert(name.clone(), LagrangianEntry { chart, expr })
            .is_some()
        {
            return Err(line_err(section_line, format!("duplicate lagrangian `{name}`")));
        }
        Ok(())
    }

    fn flush_form(
        &mut self,
        name: String,
        entries: Vec<(usize, String, String)>,
    ) -> Result<(), ModelError> {
        let section_line = self.section_line;
        let (chart, rest) = self.section_chart(&entries, section_line)?;
        let base = component_base(chart.kind);
        let count = chart.deps();
        let mut components: Vec<Option<Expr>> = vec![None; count];
        for (lineno, key, value) in rest {
            let idx: usize = key
                .strip_prefix('E')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| {
                    line_err(
                        lineno,
                        format!(
                            "unknown key `{key}` in `[form {name}]` (expected E{base}..E{})",
                            base + count - 1
                        ),
                    )
                })?;
            if idx < base || idx >= base + count {
                return Err(line_err(
                    lineno,
                    format!(
                        "component `{key}` outside E{base}..E{} for the {} chart",
                        base + count - 1,
                        chart.kind
                    ),
                ));
            }
            let slot = &mut components[idx - base];
            if slot.is_some() {
                return Err(line_err(lineno, format!("duplicate component `{key}`")));
            }
            let e = parse_expression(&value, &chart).map_err(|source| ModelError::Expression {
                line: lineno,
                key: key.clone(),
                source,
            })?;
            *slot = Some(e);
        }
        let mut filled = Vec::with_capacity(count);
        for (offset, slot) in components.into_iter().enumerate() {
            match slot {
                Some(e) => filled.push(e),
                None => {
                    return Err(line_err(
                        section_line,
                        format!("`[form {name}]` is missing component E{}", base + offset),
                    ))
                }
            }
        }
        if self
            .forms
            .insert(name.clone(), FormEntry { chart, components: filled })
            .is_some()
        {
            return Err(line_err(section_line, format!("duplicate form `{name}`")));
        }
        Ok(())
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, key: &str, lineno: usize) -> Result<(), ModelError> {
    if slot.is_some() {
        return Err(line_err(lineno, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_chart_kind(value: &str, lineno: usize) -> Result<ChartKind, ModelError> {
    match value {
        "parametric" => Ok(ChartKind::Parametric),
        "homogeneous" => Ok(ChartKind::Homogeneous),
        other => Err(line_err(
            lineno,
            format!("bad chart `{other}` (expected `parametric` or `homogeneous`)"),
        )),
    }
}

fn parse_order(value: &str, lineno: usize) -> Result<i32, ModelError> {
    let v: i32 = value
        .parse()
        .map_err(|_| line_err(lineno, format!("bad order `{value}`")))?;
    if v < 1 {
        return Err(line_err(lineno, "order must be at least 1"));
    }
    Ok(v)
}

fn parse_section_header(inner: &str, lineno: usize) -> Result<Section, ModelError> {
    let mut parts = inner.split_whitespace();
    let head = parts
        .next()
        .ok_or_else(|| line_err(lineno, "empty section header"))?;
    let name = parts.next();
    if parts.next().is_some() {
        return Err(line_err(lineno, format!("too many words in section header `[{inner}]`")));
    }
    let named = |name: Option<&str>| -> Result<String, ModelError> {
        let n = name.ok_or_else(|| {
            line_err(lineno, format!("section `[{head} …]` needs a name, e.g. `[{head} L1]`"))
        })?;
        if !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(line_err(lineno, format!("bad section name `{n}`")));
        }
        Ok(n.to_owned())
    };
    match head {
        "model" => {
            if name.is_some() {
                return Err(line_err(lineno, "`[model]` takes no name"));
            }
            Ok(Section::Model)
        }
        "constants" => {
            if name.is_some() {
                return Err(line_err(lineno, "`[constants]` takes no name"));
            }
            Ok(Section::Constants)
        }
        "lagrangian" => Ok(Section::Lagrangian(named(name)?)),
        "form" => Ok(Section::Form(named(name)?)),
        other => Err(line_err(lineno, format!("unknown section `[{other}]`"))),
    }
}
