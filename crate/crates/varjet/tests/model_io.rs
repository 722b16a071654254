//! Model-file loading, saving, and the bundled `top2d.model` fixture.

use std::path::{Path, PathBuf};

use varjet::model::{ConstantValue, Model};
use varjet::top::build_top_model;

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../top2d.model")
}

#[test]
fn bundled_model_loads_with_expected_entries() {
    let model = Model::load(&fixture_path()).expect("bundled model loads");
    for form in ["E10", "HOM", "MPPLANAR", "P"] {
        assert!(model.form(form).is_some(), "missing form {form}");
    }
    for lagr in ["L1", "L2", "LH0", "LH1", "LH2"] {
        assert!(model.lagrangian(lagr).is_some(), "missing lagrangian {lagr}");
    }
    assert_eq!(model.constants.get("mu"), Some(&ConstantValue::Value(1.0)));
    assert_eq!(model.signature, "+--");
    let metric = model.metric().expect("signature parses");
    assert_eq!(metric.dim(), 3);
    assert_eq!(metric.diag(0), 1.0);
    assert_eq!(metric.diag(1), -1.0);
}

/// The bundled file is exactly what the builder saves: regenerating it must
/// be a no-op.
#[test]
fn bundled_model_matches_builder() {
    let text = std::fs::read_to_string(fixture_path()).unwrap();
    assert_eq!(text, build_top_model(1.0).saves());
}

#[test]
fn load_save_load_is_idempotent() {
    let model = Model::load(&fixture_path()).unwrap();
    let saved = model.saves();
    let reloaded = Model::loads(&saved).expect("saved text reloads");
    assert_eq!(model, reloaded);
    assert_eq!(reloaded.saves(), saved);
}

#[test]
fn arity_mismatch_is_rejected() {
    let text = "\
[model]
chart = parametric
dim = 2
order = 3
signature = +--

[form BROKEN]
E1 = v1'
";
    let err = Model::loads(text).unwrap_err();
    assert!(err.to_string().contains("component"), "got: {err}");
}

#[test]
fn unknown_model_key_is_rejected() {
    let text = "\
[model]
chart = parametric
dim = 2
order = 3
signature = +--
flavor = strange
";
    let err = Model::loads(text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("flavor"), "got: {msg}");
}

#[test]
fn duplicate_sections_are_rejected() {
    let text = "\
[model]
chart = parametric
dim = 1
order = 2
signature = +-

[lagrangian L]
L = v1

[lagrangian L]
L = v1 * v1
";
    let err = Model::loads(text).unwrap_err();
    assert!(err.to_string().contains("duplicate"), "got: {err}");
}

#[test]
fn chart_violations_are_reported_with_line() {
    let text = "\
[model]
chart = parametric
dim = 2
order = 1
signature = +--

[lagrangian L]
L = v1''
";
    let err = Model::loads(text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 8"), "got: {msg}");
}

#[test]
fn per_section_chart_override_is_honored() {
    let model = Model::load(&fixture_path()).unwrap();
    let hom = model.form("HOM").unwrap();
    assert_eq!(hom.chart.kind, varjet::ChartKind::Homogeneous);
    assert_eq!(hom.components.len(), 3);
    let e10 = model.form("E10").unwrap();
    assert_eq!(e10.chart.kind, varjet::ChartKind::Parametric);
    assert_eq!(e10.components.len(), 2);
}

/// Rewrites the bundled fixture from the builder. Run explicitly after
/// changing the model construction:
/// `cargo test -p varjet --test model_io -- --ignored regenerate`
#[test]
#[ignore]
fn regenerate_bundled_model() {
    let model = build_top_model(1.0);
    model.save(&fixture_path()).expect("fixture written");
}
