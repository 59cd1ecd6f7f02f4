//! Browser bindings: load a model, check a formula, analyze an organization.
//!
//! Every export takes and returns JSON text so the page needs no glue beyond
//! `JSON.parse`. Errors come back as strings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use lao_core::org::{self, FormulaPool};
use lao_core::{fixtures, load_model, parse, Checker, Model};

fn model(source: &str) -> Result<Model, String> {
    load_model(source).map_err(|e| e.to_string())
}

/// Names of the bundled models, as a JSON array.
#[wasm_bindgen]
pub fn fixture_names() -> String {
    json!(fixtures::NAMES).to_string()
}

/// JSON source of a bundled model.
#[wasm_bindgen]
pub fn fixture(name: &str) -> Result<String, String> {
    fixtures::source(name)
        .map(str::to_string)
        .ok_or_else(|| format!("no fixture `{name}`"))
}

/// Worlds, transitions and organization names of a model, flattened for
/// drawing.
#[wasm_bindgen]
pub fn graph(model_json: &str) -> Result<String, String> {
    let m = model(model_json)?;
    let worlds: Vec<Value> = m
        .worlds()
        .iter()
        .map(|w| {
            let facts: Vec<&str> = w.facts.iter().map(|&f| m.fact_name(f)).collect();
            json!({ "id": w.id, "facts": facts })
        })
        .collect();
    let transitions: Vec<Value> = m
        .transitions()
        .iter()
        .map(|t| {
            let labels: Vec<String> = t
                .labels
                .iter()
                .map(|&(a, r)| format!("{}:{}", m.agent_name(a), m.role_name(r)))
                .collect();
            json!({ "from": t.src.0, "to": t.dst.0, "labels": labels })
        })
        .collect();
    let orgs: Vec<&str> = m.orgs().iter().map(|o| o.id.as_str()).collect();
    Ok(json!({ "worlds": worlds, "transitions": transitions, "orgs": orgs }).to_string())
}

/// Evaluates `formula` at every world: `{"formula", "holds": [bool; n]}`.
#[wasm_bindgen]
pub fn check(model_json: &str, formula: &str) -> Result<String, String> {
    let m = model(model_json)?;
    let f = parse(formula).map_err(|e| e.to_string())?;
    let sat = Checker::new(&m).sat(&f).map_err(|e| e.to_string())?;
    let holds: Vec<bool> = (0..m.world_count()).map(|w| sat.contains(w)).collect();
    Ok(json!({ "formula": f.to_string(), "holds": holds }).to_string())
}

/// Grades organization `org` with the default formula pool.
#[wasm_bindgen]
pub fn analyze(model_json: &str, org: &str) -> Result<String, String> {
    let m = model(model_json)?;
    let o = org::org_id(&m, org).map_err(|e| e.to_string())?;
    let a = org::analyze(&m, o, &FormulaPool::default_for(&m, o)).map_err(|e| e.to_string())?;
    serde_json::to_string(&a).map_err(|e| e.to_string())
}
