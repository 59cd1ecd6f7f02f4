//! The `lao` command line: validate models, check formulas, analyze
//! organizations and run the axiom suite.
//!
//! [`run`] is the whole program minus process exit, so tests can drive it
//! in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lao_core::fixtures;
use lao_core::model::{validate_model, Violation};
use lao_core::org::{self, FormulaPool, PROPERTIES};
use lao_core::semantics::Checker;
use lao_core::verification::{
    literal_pool, run_axiom_suite, run_random_suite, GenParams, SuiteReport,
};
use lao_core::{load_model, parse, Formula, Model, ModelError};

/// Every checked property holds.
pub const EXIT_OK: i32 = 0;
/// Some checked property fails.
pub const EXIT_FAIL: i32 = 1;
/// Usage, IO or parse error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lao", version, about = "Model checker for agent organizations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file against the model invariants.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate a formula at one or all worlds.
    Check {
        model: PathBuf,
        #[arg(short, long)]
        formula: String,
        /// World to evaluate at; all worlds when omitted.
        #[arg(long, conflicts_with = "all")]
        world: Option<String>,
        #[arg(long)]
        all: bool,
        /// Also evaluate with the lasso path oracle and compare.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Grade an organization and classify its structure.
    Analyze {
        model: PathBuf,
        #[arg(long)]
        org: String,
        /// JSON list of positive conjunctions used to instantiate `φ`.
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Only these properties decide the exit code (repeatable).
        #[arg(long = "property", value_name = "NAME")]
        properties: Vec<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Run the axiom schemas over a model or over generated models.
    Axioms {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        model: Option<PathBuf>,
        /// Number of generated models.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator bounds: facts, agents, roles, worlds, out-degree.
        #[arg(long, default_value = "4,3,2,8,3", value_parser = parse_bounds)]
        bounds: [usize; 5],
        /// JSON list of formulas for the schema variables.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Print a bundled model, or list them.
    Fixture { name: Option<String> },
}

#[derive(Debug, Args)]
pub struct Output {
    /// Also write a machine-readable report to this path.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

fn parse_bounds(s: &str) -> Result<[usize; 5], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    nums.try_into()
        .map_err(|v: Vec<usize>| format!("expected 5 bounds F,A,R,W,D, got {}", v.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_digest: Option<String>,
    pub results: Value,
    pub timing_ms: f64,
}

struct Outcome {
    code: i32,
    digest: Option<String>,
    results: Value,
    text: String,
}

/// Parses `args` (including the program name), runs the command and writes
/// human output to `stdout` and diagnostics to `stderr`. Returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let started = Instant::now();
    let json_path = match &cli.command {
        Command::Validate { out, .. }
        | Command::Check { out, .. }
        | Command::Analyze { out, .. }
        | Command::Axioms { out, .. } => out.json.clone(),
        Command::Fixture { .. } => None,
    };
    let outcome = match execute(cli.command) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            return EXIT_ERROR;
        }
    };
    if stdout.write_all(outcome.text.as_bytes()).is_err() {
        return EXIT_ERROR;
    }
    if let Some(path) = json_path {
        let report = RunReport {
            command,
            model_digest: outcome.digest,
            results: outcome.results,
            timing_ms: started.elapsed().as_secs_f64() * 1000.0,
        };
        let written = serde_json::to_string_pretty(&report)
            .context("serializing report")
            .and_then(|s| {
                fs::write(&path, s + "\n").with_context(|| format!("writing {}", path.display()))
            });
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {e:#}");
            return EXIT_ERROR;
        }
    }
    outcome.code
}

fn execute(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Validate { model, .. } => validate(&model),
        Command::Check {
            model,
            formula,
            world,
            all: _,
            oracle,
            ..
        } => check(&model, &formula, world.as_deref(), oracle),
        Command::Analyze {
            model,
            org,
            pool,
            properties,
            ..
        } => analyze(&model, &org, pool.as_deref(), &properties),
        Command::Axioms {
            model,
            random,
            seed,
            bounds,
            pool,
            ..
        } => axioms(model.as_deref(), random, seed, bounds, pool.as_deref()),
        Command::Fixture { name } => fixture(name.as_deref()),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<Model> {
    load_model(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn read_pool(path: &Path) -> anyhow::Result<Vec<Formula>> {
    let texts: Vec<String> = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{}: expected a JSON list of formula strings", path.display()))?;
    texts
        .iter()
        .map(|t| parse(t).with_context(|| format!("pool formula `{t}`")))
        .collect()
}

fn validate(path: &Path) -> anyhow::Result<Outcome> {
    let source = read(path)?;
    // Load-time label and totality failures are invariant violations too.
    let (violations, digest) = match load_model(&source) {
        Ok(m) => (validate_model(&m), Some(m.digest())),
        Err(ModelError::LabelWithoutRea {
            src,
            dst,
            agent,
            role,
        }) => {
            let v = Violation::LabelWithoutRea {
                world: src,
                target: dst,
                agent,
                role,
            };
            (vec![v], None)
        }
        Err(ModelError::NoSuccessor(world)) => (vec![Violation::NoSuccessor { world }], None),
        Err(e) => return Err(anyhow!(e).context(format!("loading {}", path.display()))),
    };
    let mut text = String::new();
    if violations.is_empty() {
        writeln!(text, "valid")?;
    } else {
        writeln!(text, "{} violation(s)", violations.len())?;
        for v in &violations {
            writeln!(text, "  {}: {v}", v.invariant())?;
        }
    }
    Ok(Outcome {
        code: if violations.is_empty() { EXIT_OK } else { EXIT_FAIL },
        digest,
        results: json!({ "valid": violations.is_empty(), "violations": violations }),
        text,
    })
}

fn check(path: &Path, formula: &str, world: Option<&str>, oracle: bool) -> anyhow::Result<Outcome> {
    let m = load(path)?;
    let f = parse(formula).with_context(|| format!("formula `{formula}`"))?;
    let worlds = match world {
        Some(name) => vec![m
            .world_id(name)
            .ok_or_else(|| anyhow!("unknown world `{name}`"))?],
        None => m.world_ids().collect(),
    };
    let sat = Checker::new(&m).sat(&f)?;
    let lasso = if oracle {
        Some(Checker::oracle(&m)?.sat(&f)?)
    } else {
        None
    };

    let mut text = String::new();
    let mut rows = Vec::new();
    let mut all_hold = true;
    let mut agree = true;
    for &w in &worlds {
        let holds = sat.contains(w.0);
        all_hold &= holds;
        let name = m.world_name(w);
        let mut row = json!({ "world": name, "holds": holds });
        write!(text, "{name:<12} {}", verdict(holds))?;
        if let Some(l) = &lasso {
            let o = l.contains(w.0);
            agree &= o == holds;
            row["oracle"] = json!(o);
            write!(text, "  oracle {}", verdict(o))?;
        }
        writeln!(text)?;
        rows.push(row);
    }
    let mut results = json!({ "formula": f.to_string(), "worlds": rows, "holds": all_hold });
    if oracle {
        writeln!(text, "oracle agreement: {}", if agree { "yes" } else { "NO" })?;
        results["agreement"] = json!(agree);
    }
    Ok(Outcome {
        code: if all_hold && agree { EXIT_OK } else { EXIT_FAIL },
        digest: Some(m.digest()),
        results,
        text,
    })
}

fn verdict(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Witnesses printed per property; the JSON report has all of them.
const SHOWN_WITNESSES: usize = 5;

fn analyze(
    path: &Path,
    org_name: &str,
    pool: Option<&Path>,
    properties: &[String],
) -> anyhow::Result<Outcome> {
    let m = load(path)?;
    let o = org::org_id(&m, org_name)?;
    for p in properties {
        if !PROPERTIES.contains(&p.as_str()) {
            bail!("unknown property `{p}`; expected one of {}", PROPERTIES.join(", "));
        }
    }
    let pool = match pool {
        Some(p) => FormulaPool::new(read_pool(p)?)?,
        None => FormulaPool::default_for(&m, o),
    };
    let a = org::analyze(&m, o, &pool)?;
    let requested = |p: &str| properties.is_empty() || properties.iter().any(|q| q == p);

    let mut text = String::new();
    writeln!(text, "organization {}", a.org)?;
    let mut ok = true;
    for v in &a.verdicts {
        if requested(&v.property) {
            ok &= v.holds;
        }
        writeln!(
            text,
            "  {:<26} {}",
            v.property,
            if v.holds { "holds" } else { "fails" }
        )?;
        for w in v.witnesses.iter().take(SHOWN_WITNESSES) {
            match &w.formula {
                Some(f) => writeln!(text, "      at {}: {} [{f}]", w.world, w.detail)?,
                None => writeln!(text, "      at {}: {}", w.world, w.detail)?,
            }
        }
        if v.witnesses.len() > SHOWN_WITNESSES {
            writeln!(text, "      ... {} more", v.witnesses.len() - SHOWN_WITNESSES)?;
        }
    }
    let classes: Vec<&str> = a.classification.iter().map(|s| s.name()).collect();
    writeln!(
        text,
        "  classification: {}",
        if classes.is_empty() { "none".to_string() } else { classes.join(", ") }
    )?;
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_FAIL },
        digest: Some(m.digest()),
        results: serde_json::to_value(&a)?,
        text,
    })
}

fn axioms(
    model: Option<&Path>,
    random: Option<u64>,
    seed: u64,
    bounds: [usize; 5],
    pool: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let pool = pool.map(read_pool).transpose()?;
    let (report, digest) = match (model, random) {
        (Some(path), _) => {
            let m = load(path)?;
            let own;
            let pool = match &pool {
                Some(p) => p.as_slice(),
                None => {
                    own = literal_pool(&m);
                    &own
                }
            };
            (run_axiom_suite(&m, pool)?, Some(m.digest()))
        }
        (None, Some(count)) => {
            let params = GenParams::new(seed, bounds);
            (run_random_suite(&params, count, pool.as_deref())?, None)
        }
        (None, None) => bail!("give a model file or --random N"),
    };
    Ok(Outcome {
        code: if report.passed() { EXIT_OK } else { EXIT_FAIL },
        digest,
        results: serde_json::to_value(&report)?,
        text: suite_text(&report)?,
    })
}

fn suite_text(r: &SuiteReport) -> anyhow::Result<String> {
    let mut text = String::new();
    for s in &r.schemas {
        if s.passed() {
            writeln!(text, "{:<5} pass  {} instances", s.id, s.instances)?;
            continue;
        }
        writeln!(text, "{:<5} FAIL  {}/{} instances", s.id, s.failures, s.instances)?;
        if let Some(c) = &s.counterexample {
            let bindings: Vec<String> =
                c.bindings.iter().map(|(k, v)| format!("{k} := {v}")).collect();
            match c.seed {
                Some(seed) => write!(text, "      seed {seed}")?,
                None => write!(text, "      model {}", &c.model[..c.model.len().min(16)])?,
            }
            writeln!(text, ", world {}: {}", c.world, c.instance)?;
            if !bindings.is_empty() {
                writeln!(text, "      {}", bindings.join(", "))?;
            }
        }
    }
    let failed = r.failed().len();
    writeln!(
        text,
        "{} schemas over {} model(s): {} passed, {} failed",
        r.schemas.len(),
        r.models,
        r.schemas.len() - failed,
        failed
    )?;
    Ok(text)
}

fn fixture(name: Option<&str>) -> anyhow::Result<Outcome> {
    let text = match name {
        None => fixtures::NAMES.iter().map(|n| format!("{n}\n")).collect(),
        Some(n) => fixtures::source(n)
            .ok_or_else(|| anyhow!("no fixture `{n}`; try one of {}", fixtures::NAMES.join(", ")))?
            .to_string(),
    };
    Ok(Outcome {
        code: EXIT_OK,
        digest: None,
        results: Value::Null,
        text,
    })
}

