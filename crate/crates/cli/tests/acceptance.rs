//! Acceptance gate: one line per criterion.
//!
//! Run with `cargo test -p lao-cli --test acceptance`. The process fails if
//! any criterion regresses. Criterion 4 is reported as FAIL because some
//! schemas have genuine counterexamples; the gate pins that set to
//! `REFUTABLE` so any new failure, or a refutable schema going quiet, still
//! breaks the build.

use std::collections::BTreeSet;
use std::fs;
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;

use lao_cli::{run, RunReport};
use lao_core::fixtures::{self, GAS0PRIME_DERIVATION};
use lao_core::formula::ParseErrorKind;
use lao_core::verification::{
    fuzz_formulas, generate_model, literal_pool, non_theorem_witnesses, oracle_pool,
    run_axiom_suite, run_random_suite, GenParams, SuiteReport, REFUTABLE, SCHEMAS,
};
use lao_core::{eval, parse, print, Checker, Model};

const CASE_STUDY_LIMIT: Duration = Duration::from_secs(5);
const SUITE_LIMIT: Duration = Duration::from_secs(600);
const SUITE_MODELS: u64 = 200;
const SUITE_SEED: u64 = 7;
const ORACLE_MODELS: u64 = 100;
const FUZZ_COUNT: usize = 1000;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn main() {
    let mut lines = Vec::new();
    let mut gate = true;
    lines.push(case_study());
    lines.push(derivation_replay());
    lines.push(fig1_example());
    let (suite, expected) = axiom_suite();
    gate &= expected;
    lines.push(suite);
    lines.push(non_theorems());
    lines.push(oracle_equivalence());
    lines.push(parser_round_trip());

    println!("acceptance");
    for l in &lines {
        println!(
            "  criterion {}: {}  {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        );
        if l.id != 4 {
            gate &= l.pass;
        }
    }
    if !gate {
        eprintln!("acceptance gate failed");
        std::process::exit(1);
    }
}

fn analyze_fixture(name: &str) -> (RunReport, Duration) {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    let out = dir.path().join("r.json");
    fs::write(&model, fixtures::source(name).unwrap()).unwrap();
    let start = Instant::now();
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(
        [
            "lao",
            "analyze",
            model.to_str().unwrap(),
            "--org",
            "Ogas",
            "--json",
            out.to_str().unwrap(),
        ],
        &mut o,
        &mut e,
    );
    let took = start.elapsed();
    assert!(code < 2, "{}", String::from_utf8_lossy(&e));
    let report = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    (report, took)
}

fn verdict(r: &RunReport, property: &str) -> Option<bool> {
    r.results["verdicts"]
        .as_array()?
        .iter()
        .find(|v| v["property"] == property)?["holds"]
        .as_bool()
}

fn classes(r: &RunReport) -> BTreeSet<String> {
    r.results["classification"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).map(String::from).collect())
        .unwrap_or_default()
}

fn case_study() -> Line {
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let (g, tg) = analyze_fixture("gas0");
    let (p, tp) = analyze_fixture("gas0prime");
    let mut bad = Vec::new();
    for prop in [
        "structurally-well-defined",
        "well-defined",
        "successful",
        "good",
        "delegation-closed",
    ] {
        if verdict(&g, prop) != Some(true) {
            bad.push(format!("gas0 {prop}"));
        }
    }
    if classes(&g) != set(&["hierarchy", "flat-hierarchy"]) {
        bad.push(format!("gas0 classification {:?}", classes(&g)));
    }
    for (prop, want) in [("well-defined", true), ("successful", true), ("efficient", false)] {
        if verdict(&p, prop) != Some(want) {
            bad.push(format!("gas0prime {prop}"));
        }
    }
    if classes(&p) != set(&["network", "fully-connected-network", "team"]) {
        bad.push(format!("gas0prime classification {:?}", classes(&p)));
    }
    let fast = tg < CASE_STUDY_LIMIT && tp < CASE_STUDY_LIMIT;
    Line {
        id: 1,
        pass: bad.is_empty() && fast,
        detail: format!(
            "case-study verdicts {} (gas0 {:.0} ms, gas0prime {:.0} ms, limit {} s){}",
            if bad.is_empty() { "match" } else { "differ" },
            tg.as_secs_f64() * 1e3,
            tp.as_secs_f64() * 1e3,
            CASE_STUDY_LIMIT.as_secs(),
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join(", ")) }
        ),
    }
}

fn holds(m: &Model, world: &str, f: &str) -> bool {
    let w = m.world_id(world).expect("designated world exists");
    eval(m, w, &parse(f).expect("step parses")).unwrap_or(false)
}

fn derivation_replay() -> Line {
    let m = fixtures::gas0prime();
    let failed: Vec<&str> = GAS0PRIME_DERIVATION
        .iter()
        .filter(|(_, w, f)| !holds(&m, w, f))
        .map(|(step, _, _)| *step)
        .collect();
    let total = GAS0PRIME_DERIVATION.len();
    Line {
        id: 2,
        pass: failed.is_empty() && total == 12,
        detail: format!(
            "derivation steps {}/{total} hold at their worlds{}",
            total - failed.len(),
            if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }
        ),
    }
}

fn fig1_example() -> Line {
    let m = fixtures::fig1();
    let cases = [
        ("G[a] p", true),
        ("H[a] p", true),
        ("C[a] (p & q)", false),
        ("G[a] (p & q)", false),
        ("E[a] p", false),
    ];
    let ok = cases.iter().filter(|(f, want)| holds(&m, "w0", f) == *want).count();
    Line {
        id: 3,
        pass: ok == cases.len(),
        detail: format!("fig1 at w0: {ok}/{} verdicts match", cases.len()),
    }
}

/// Returns the line and whether the failing set is exactly `REFUTABLE`.
fn axiom_suite() -> (Line, bool) {
    let start = Instant::now();
    let mut total = SuiteReport::empty();
    for (_, m) in fixtures::all() {
        total.merge(run_axiom_suite(&m, &literal_pool(&m)).expect("fixture suite runs"));
    }
    let params = GenParams::default().with_seed(SUITE_SEED);
    total.merge(run_random_suite(&params, SUITE_MODELS, None).expect("random suite runs"));
    let took = start.elapsed();

    let failed: BTreeSet<&str> = total.failed().iter().map(|s| s.id.as_str()).collect();
    let expected: BTreeSet<&str> = REFUTABLE.iter().copied().collect();
    let unexercised = total.schemas.iter().filter(|s| s.instances == 0).count();
    let fast = took < SUITE_LIMIT;
    let line = Line {
        id: 4,
        pass: failed.is_empty() && fast,
        detail: format!(
            "axiom suite over {} models: {}/{} schemas without counterexamples, \
             failing {{{}}} ({}), {unexercised} never instantiated, {:.1} s (limit {} s)",
            total.models,
            SCHEMAS.len() - failed.len(),
            SCHEMAS.len(),
            failed.iter().copied().collect::<Vec<_>>().join(", "),
            if failed == expected { "the documented refutable set" } else { "UNEXPECTED set" },
            took.as_secs_f64(),
            SUITE_LIMIT.as_secs()
        ),
    };
    (line, failed == expected && fast)
}

fn non_theorems() -> Line {
    let demos = non_theorem_witnesses();
    let mut ok = 0;
    for d in &demos {
        let engine = Checker::new(&d.model).holds(d.world, &d.formula).unwrap_or(false);
        let oracle = Checker::oracle(&d.model)
            .and_then(|mut c| c.holds(d.world, &d.formula))
            .unwrap_or(false);
        let refuted = !eval(&d.model, d.world, &parse(d.refutes).unwrap()).unwrap_or(true);
        if engine && oracle && refuted {
            ok += 1;
        }
    }
    Line {
        id: 5,
        pass: ok == demos.len() && demos.len() == 2,
        detail: format!("non-theorem witnesses confirmed by engine and oracle: {ok}/{}", demos.len()),
    }
}

fn oracle_equivalence() -> Line {
    let pool = oracle_pool();
    let (mut triples, mut agree) = (0u64, 0u64);
    for seed in 0..ORACLE_MODELS {
        let m = generate_model(&GenParams::default().with_seed(seed)).unwrap();
        let mut fix = Checker::new(&m);
        let mut lasso = Checker::oracle(&m).unwrap();
        for f in &pool {
            let (a, b) = (fix.sat(f).unwrap(), lasso.sat(f).unwrap());
            for w in 0..m.world_count() {
                triples += 1;
                agree += u64::from(a.contains(w) == b.contains(w));
            }
        }
    }
    Line {
        id: 6,
        pass: triples > 0 && agree == triples,
        detail: format!(
            "fixpoint vs lasso oracle on {ORACLE_MODELS} models x {} formulas: {agree}/{triples} triples agree",
            pool.len()
        ),
    }
}

fn parser_round_trip() -> Line {
    let formulas = fuzz_formulas(2024, FUZZ_COUNT, 6);
    let round = formulas.iter().filter(|f| parse(&print(f)).as_ref() == Ok(*f)).count();
    let rejects = [
        "desire(O, !p)",
        "incharge(O, r, !p)",
        "incharge(O, r, p | q)",
        "desire(O, p -> q)",
        "F p",
        "G p",
        "A G p",
        "E[F p]",
        "AF AG p & F q",
        "know(O, p | q)",
    ];
    let positioned = rejects
        .iter()
        .filter(|s| {
            matches!(parse(s), Err(e) if e.kind == ParseErrorKind::WellFormedness
                && e.line >= 1 && e.column >= 1 && e.offset < s.len())
        })
        .count();
    Line {
        id: 7,
        pass: round == FUZZ_COUNT && positioned == rejects.len(),
        detail: format!(
            "parse(print(f)) = f for {round}/{FUZZ_COUNT} fuzzed ASTs; \
             {positioned}/{} ill-formed inputs rejected with positions",
            rejects.len()
        ),
    }
}
