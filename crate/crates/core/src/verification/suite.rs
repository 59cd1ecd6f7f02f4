//! The axioms, theorems and inference rules as executable properties.
//!
//! Each schema is instantiated over every agent, role and organization of a
//! model and over formulas drawn from a pool, and every instance is checked
//! at every world.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::formula::{Formula, Holder, RoleSel};
use crate::model::{Model, OrgId, WorldId};
use crate::org;
use crate::semantics::{
    cap_at, falsifiable_elsewhere, sigma_entails_set, Checker, EvalError, ResolvedHolder,
    WorldSet,
};
use crate::verification::generate::{generate_model, GenError, GenParams};

/// Schema identifiers in report order. The `r` variants are the
/// role-enacting versions of the preceding axiom.
pub const SCHEMAS: &[&str] = &[
    "A1", "A2", "A3", "A4", "A4r", "A5", "A5r", "A6", "A7", "A8", "A9", "A9r", "A10", "A11",
    "A12", "A13", "A14", "A15", "A15r", "A16", "A17", "A18", "A19", "A20", "A20r", "A21", "A21r",
    "A22", "A22r", "A23", "A24", "A25", "A26", "A27", "T1", "T2", "T3", "T4", "T5", "T6", "T7",
    "T8", "T9", "T10", "T11", "T12", "T13", "T14", "T15", "T16", "T17", "T18", "T19", "T20",
    "T21", "T22", "T23", "T24", "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9",
];

/// Schemas with concrete counterexamples under these semantics:
/// conjunction closure fails for contradictory or merely correlated
/// conjuncts (A4, A4r, A5, A5r, A6, T1, T2), weakening fails when the weaker
/// formula holds in every other world (A9, A9r), role-enacting influence or
/// capability can differ from the agent's own (A13, T3), incharge does not
/// force initiative or delegation capability (A25, A27), and initiative
/// distinguishes equivalent objectives (R9).
pub const REFUTABLE: &[&str] = &[
    "A4", "A4r", "A5", "A5r", "A6", "A9", "A9r", "A13", "A25", "A27", "T1", "T2", "T3", "R9",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Counterexample {
    /// Digest of the model the instance fails in.
    pub model: String,
    /// Generator seed, when the model was generated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub world: String,
    pub bindings: BTreeMap<String, String>,
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaOutcome {
    pub id: String,
    /// Checked (instance, world) pairs.
    pub instances: u64,
    pub failures: u64,
    /// The least failing instance, in a fixed order, if any failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl SchemaOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub models: usize,
    pub schemas: Vec<SchemaOutcome>,
}

impl SuiteReport {
    pub fn empty() -> SuiteReport {
        SuiteReport {
            models: 0,
            schemas: SCHEMAS
                .iter()
                .map(|id| SchemaOutcome {
                    id: id.to_string(),
                    instances: 0,
                    failures: 0,
                    counterexample: None,
                })
                .collect(),
        }
    }

    /// Adds the counts of `other`; the result does not depend on the order
    /// of merging.
    pub fn merge(&mut self, other: SuiteReport) {
        self.models += other.models;
        for (mine, theirs) in self.schemas.iter_mut().zip(other.schemas) {
            debug_assert_eq!(mine.id, theirs.id);
            mine.instances += theirs.instances;
            mine.failures += theirs.failures;
            mine.counterexample = match (mine.counterexample.take(), theirs.counterexample) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }

    pub fn outcome(&self, id: &str) -> Option<&SchemaOutcome> {
        self.schemas.iter().find(|s| s.id == id)
    }

    pub fn failed(&self) -> Vec<&SchemaOutcome> {
        self.schemas.iter().filter(|s| !s.passed()).collect()
    }

    pub fn passed(&self) -> bool {
        self.schemas.iter().all(SchemaOutcome::passed)
    }

    fn tag_seed(&mut self, seed: u64) {
        for s in &mut self.schemas {
            if let Some(c) = &mut s.counterexample {
                c.seed = Some(seed);
            }
        }
    }
}

/// Literals over every fact, and conjunctions of two literals over distinct
/// facts.
pub fn literal_pool(m: &Model) -> Vec<Formula> {
    let lits = |f: &str| [Formula::atom(f), Formula::not(Formula::atom(f))];
    let mut out: Vec<Formula> = m.facts().iter().flat_map(|f| lits(f)).collect();
    for (i, f) in m.facts().iter().enumerate() {
        for g in &m.facts()[i + 1..] {
            for a in lits(f) {
                for b in lits(g) {
                    out.push(Formula::and(a.clone(), b));
                }
            }
        }
    }
    out
}

/// Runs every schema over `m`, instantiating formula variables from `pool`.
/// Pool formulas mentioning facts the model lacks are skipped.
pub fn run_axiom_suite(m: &Model, pool: &[Formula]) -> Result<SuiteReport, EvalError> {
    let pool: Vec<Formula> = pool
        .iter()
        .filter(|f| f.facts().iter().all(|p| m.fact_id(p).is_some()))
        .cloned()
        .collect();
    let mut s = Suite::new(m, pool);
    s.run()?;
    let mut report = SuiteReport::empty();
    report.models = 1;
    for (mine, id) in report.schemas.iter_mut().zip(SCHEMAS) {
        if let Some(o) = s.outcomes.remove(id) {
            *mine = o;
        }
    }
    Ok(report)
}

/// Runs the suite over `count` generated models with seeds `p.seed`,
/// `p.seed + 1`, ..., using `pool` or else each model's [`literal_pool`].
pub fn run_random_suite(
    p: &GenParams,
    count: u64,
    pool: Option<&[Formula]>,
) -> Result<SuiteReport, SuiteError> {
    p.validate()?;
    let mut total = SuiteReport::empty();
    for i in 0..count {
        let seed = p.seed.wrapping_add(i);
        let m = generate_model(&p.with_seed(seed))?;
        let own;
        let pool = match pool {
            Some(pool) => pool,
            None => {
                own = literal_pool(&m);
                &own
            }
        };
        let mut r = run_axiom_suite(&m, pool)?;
        r.tag_seed(seed);
        total.merge(r);
    }
    Ok(total)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn agent(a: &str) -> Holder {
    Holder::Agent(a.to_string())
}

fn rea(a: &str, r: &str) -> Holder {
    Holder::Rea(a.to_string(), r.to_string())
}

fn b(f: &Formula) -> Box<Formula> {
    Box::new(f.clone())
}

fn cap(h: &Holder, f: &Formula) -> Formula {
    Formula::Cap(h.clone(), b(f))
}

fn ability(h: &Holder, f: &Formula) -> Formula {
    Formula::Ability(h.clone(), b(f))
}

fn attempt(h: &Holder, f: &Formula) -> Formula {
    Formula::Attempt(h.clone(), b(f))
}

fn stit(h: &Holder, f: &Formula) -> Formula {
    Formula::Stit(h.clone(), b(f))
}

fn in_control(h: &Holder) -> Formula {
    Formula::InControl(h.clone())
}

fn initiative(r: &str, f: &Formula) -> Formula {
    Formula::Initiative(RoleSel::One(r.to_string()), b(f))
}

fn and(a: Formula, c: Formula) -> Formula {
    Formula::and(a, c)
}

fn not(f: Formula) -> Formula {
    Formula::not(f)
}

fn imp(a: Formula, c: Formula) -> Formula {
    Formula::implies(a, c)
}

fn play(a: &str, r: &str, o: &str) -> Formula {
    Formula::Play {
        agent: a.to_string(),
        role: r.to_string(),
        org: o.to_string(),
    }
}

fn incharge(o: &str, r: &str, f: &Formula) -> Formula {
    Formula::InCharge {
        org: o.to_string(),
        role: r.to_string(),
        body: b(f),
    }
}

fn desire(o: &str, f: &Formula) -> Formula {
    Formula::Desire {
        org: o.to_string(),
        body: b(f),
    }
}

fn know(o: &str, f: &Formula) -> Formula {
    Formula::Know {
        org: o.to_string(),
        body: b(f),
    }
}

fn is_literal_conjunction(f: &Formula) -> bool {
    f.conjuncts().into_iter().all(|c| match c {
        Formula::Atom(_) => true,
        Formula::Not(inner) => matches!(**inner, Formula::Atom(_)),
        _ => false,
    })
}

type Bindings = Vec<(&'static str, String)>;

struct Suite<'m> {
    m: &'m Model,
    ck: Checker<'m>,
    digest: String,
    pool: Vec<Formula>,
    agents: Vec<String>,
    roles: Vec<String>,
    orgs: Vec<String>,
    outcomes: BTreeMap<&'static str, SchemaOutcome>,
}

impl<'m> Suite<'m> {
    fn new(m: &'m Model, pool: Vec<Formula>) -> Suite<'m> {
        Suite {
            m,
            ck: Checker::new(m),
            digest: m.digest(),
            pool,
            agents: m.agents().to_vec(),
            roles: m.roles().to_vec(),
            orgs: m.orgs().iter().map(|o| o.id.clone()).collect(),
            outcomes: BTreeMap::new(),
        }
    }

    fn record(&mut self, id: &'static str, bindings: Bindings, instance: String, sat: &WorldSet) {
        let n = self.m.world_count();
        let out = self.outcomes.entry(id).or_insert_with(|| SchemaOutcome {
            id: id.to_string(),
            instances: 0,
            failures: 0,
            counterexample: None,
        });
        out.instances += n as u64;
        let failing: Vec<usize> = (0..n).filter(|&w| !sat.contains(w)).collect();
        out.failures += failing.len() as u64;
        if let Some(&w) = failing.first() {
            let c = Counterexample {
                model: self.digest.clone(),
                seed: None,
                world: self.m.world_name(WorldId(w)).to_string(),
                bindings: bindings
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
                instance,
            };
            out.counterexample = Some(match out.counterexample.take() {
                Some(old) => old.min(c),
                None => c,
            });
        }
    }

    fn check(&mut self, id: &'static str, bindings: Bindings, f: Formula) -> Result<(), EvalError> {
        let sat = self.ck.sat(&f)?;
        self.record(id, bindings, f.to_string(), &sat);
        Ok(())
    }

    fn pairs(formulas: &[Formula]) -> Vec<(Formula, Formula)> {
        let mut out = Vec::new();
        for (i, f) in formulas.iter().enumerate() {
            for g in &formulas[i..] {
                out.push((f.clone(), g.clone()));
            }
        }
        out
    }

    fn run(&mut self) -> Result<(), EvalError> {
        let pool = self.pool.clone();
        let positive: Vec<Formula> = pool
            .iter()
            .filter(|f| f.positive_atoms().is_some())
            .cloned()
            .collect();
        let literals: Vec<Formula> = pool
            .iter()
            .filter(|f| is_literal_conjunction(f))
            .cloned()
            .collect();
        let pairs = Self::pairs(&pool);
        let positive_pairs = Self::pairs(&positive);
        let literal_pairs = Self::pairs(&literals);
        let agents = self.agents.clone();
        let roles = self.roles.clone();
        let orgs = self.orgs.clone();
        let ab = |a: &str| vec![("a", a.to_string())];
        let arb = |a: &str, r: &str| vec![("a", a.to_string()), ("r", r.to_string())];
        let with = |mut v: Bindings, k: &'static str, f: &Formula| {
            v.push((k, f.to_string()));
            v
        };

        // No capability for the obvious.
        for a in &agents {
            self.check("A1", ab(a), not(cap(&agent(a), &Formula::True)))?;
            for r in &roles {
                self.check("A2", arb(a, r), not(cap(&rea(a, r), &Formula::True)))?;
            }
        }
        for o in &orgs {
            for r in &roles {
                let bind = vec![("O", o.clone()), ("r", r.clone())];
                self.check("A3", bind, not(incharge(o, r, &Formula::True)))?;
            }
        }

        // Closure under conjunction.
        for (phi, psi) in &pairs {
            let both = and(phi.clone(), psi.clone());
            let pb = |v: Bindings| with(with(v, "phi", phi), "psi", psi);
            for a in &agents {
                let h = agent(a);
                let k = |op: fn(&Holder, &Formula) -> Formula| {
                    imp(and(op(&h, phi), op(&h, psi)), op(&h, &both))
                };
                self.check("A4", pb(ab(a)), k(cap))?;
                self.check("A5", pb(ab(a)), k(attempt))?;
                self.check("T1", pb(ab(a)), k(stit))?;
                self.check(
                    "A9",
                    pb(ab(a)),
                    imp(ability(&h, &both), and(ability(&h, phi), ability(&h, psi))),
                )?;
                for r in &roles {
                    let h = rea(a, r);
                    let k = |op: fn(&Holder, &Formula) -> Formula| {
                        imp(and(op(&h, phi), op(&h, psi)), op(&h, &both))
                    };
                    self.check("A4r", pb(arb(a, r)), k(cap))?;
                    self.check("A5r", pb(arb(a, r)), k(attempt))?;
                    self.check("T2", pb(arb(a, r)), k(stit))?;
                    self.check(
                        "A9r",
                        pb(arb(a, r)),
                        imp(ability(&h, &both), and(ability(&h, phi), ability(&h, psi))),
                    )?;
                }
            }
            for r in &roles {
                let bind = pb(vec![("r", r.clone())]);
                self.check(
                    "A6",
                    bind,
                    imp(
                        and(initiative(r, phi), initiative(r, psi)),
                        initiative(r, &both),
                    ),
                )?;
            }
        }
        for (phi, psi) in &positive_pairs {
            let both = and(phi.clone(), psi.clone());
            for o in &orgs {
                let bind = |v: Bindings| with(with(v, "phi", phi), "psi", psi);
                for r in &roles {
                    self.check(
                        "A7",
                        bind(vec![("O", o.clone()), ("r", r.clone())]),
                        imp(
                            and(incharge(o, r, phi), incharge(o, r, psi)),
                            incharge(o, r, &both),
                        ),
                    )?;
                }
                let k = imp(and(desire(o, phi), desire(o, psi)), desire(o, &both));
                self.check("A8", bind(vec![("O", o.clone())]), k.clone())?;
                self.check("A19", bind(vec![("O", o.clone())]), k)?;
            }
        }
        for (phi, psi) in &literal_pairs {
            let both = and(phi.clone(), psi.clone());
            for o in &orgs {
                let bind = with(with(vec![("O", o.clone())], "phi", phi), "psi", psi);
                self.check(
                    "A17",
                    bind,
                    imp(and(know(o, phi), know(o, psi)), know(o, &both)),
                )?;
            }
        }
        for phi in &literals {
            for o in &orgs {
                let bind = with(vec![("O", o.clone())], "phi", phi);
                self.check("A16", bind, imp(know(o, phi), phi.clone()))?;
            }
        }
        for o in &orgs {
            self.check(
                "A18",
                vec![("O", o.clone())],
                not(desire(o, &Formula::False)),
            )?;
        }

        // Single-formula schemas over agents and role-enacting agents.
        for phi in &pool {
            let neg = not(phi.clone());
            for a in &agents {
                let h = agent(a);
                let bind = with(ab(a), "phi", phi);
                self.check("A15", bind.clone(), imp(stit(&h, phi), Formula::AX(b(phi))))?;
                self.check("A20", bind.clone(), imp(ability(&h, phi), cap(&h, phi)))?;
                self.check("A21", bind.clone(), imp(attempt(&h, phi), cap(&h, phi)))?;
                self.check("A22", bind.clone(), imp(attempt(&h, phi), ability(&h, phi)))?;
                self.check("T12", bind.clone(), imp(stit(&h, phi), cap(&h, phi)))?;
                self.check("T14", bind.clone(), imp(stit(&h, phi), attempt(&h, phi)))?;
                for bn in &agents {
                    let hb = agent(bn);
                    let bind = with(vec![("a", a.clone()), ("b", bn.clone())], "phi", phi);
                    self.check("T16", bind.clone(), imp(stit(&h, phi), not(ability(&hb, &neg))))?;
                    self.check("T19", bind.clone(), imp(stit(&h, phi), not(stit(&hb, &neg))))?;
                    self.check("T22", bind, imp(stit(&h, phi), not(attempt(&hb, &neg))))?;
                }
                for r in &roles {
                    let hr = rea(a, r);
                    let bind = with(arb(a, r), "phi", phi);
                    self.check("A15r", bind.clone(), imp(stit(&hr, phi), Formula::AX(b(phi))))?;
                    self.check("A20r", bind.clone(), imp(ability(&hr, phi), cap(&hr, phi)))?;
                    self.check("A21r", bind.clone(), imp(attempt(&hr, phi), cap(&hr, phi)))?;
                    self.check(
                        "A22r",
                        bind.clone(),
                        imp(attempt(&hr, phi), ability(&hr, phi)),
                    )?;
                    self.check("T13", bind.clone(), imp(stit(&hr, phi), cap(&hr, phi)))?;
                    self.check("T15", bind.clone(), imp(stit(&hr, phi), attempt(&hr, phi)))?;
                    self.check(
                        "A12",
                        bind.clone(),
                        imp(and(cap(&h, phi), ability(&hr, phi)), ability(&h, phi)),
                    )?;
                    self.check(
                        "T3",
                        bind.clone(),
                        imp(and(in_control(&hr), attempt(&hr, phi)), attempt(&h, phi)),
                    )?;
                    self.check(
                        "T4",
                        bind.clone(),
                        imp(and(cap(&h, phi), stit(&hr, phi)), stit(&h, phi)),
                    )?;
                    self.check("A23", bind.clone(), imp(stit(&hr, phi), initiative(r, phi)))?;
                    self.check("A24", bind.clone(), imp(attempt(&hr, phi), initiative(r, phi)))?;
                    for o in &orgs {
                        let bind = with(
                            vec![("a", a.clone()), ("r", r.clone()), ("O", o.clone())],
                            "phi",
                            phi,
                        );
                        self.check(
                            "A11",
                            bind.clone(),
                            imp(and(play(a, r, o), cap(&h, phi)), cap(&hr, phi)),
                        )?;
                        self.check(
                            "A13",
                            bind,
                            imp(and(play(a, r, o), attempt(&h, phi)), attempt(&hr, phi)),
                        )?;
                    }
                    for bn in &agents {
                        let hb = agent(bn);
                        let bind = with(
                            vec![("a", a.clone()), ("r", r.clone()), ("b", bn.clone())],
                            "phi",
                            phi,
                        );
                        self.check(
                            "T17",
                            bind.clone(),
                            imp(stit(&hr, phi), not(ability(&hb, &neg))),
                        )?;
                        self.check("T20", bind.clone(), imp(stit(&hr, phi), not(stit(&hb, &neg))))?;
                        self.check("T23", bind, imp(stit(&hr, phi), not(attempt(&hb, &neg))))?;
                        for q in &roles {
                            let hbq = rea(bn, q);
                            let bind = with(
                                vec![
                                    ("a", a.clone()),
                                    ("r", r.clone()),
                                    ("b", bn.clone()),
                                    ("q", q.clone()),
                                ],
                                "phi",
                                phi,
                            );
                            self.check(
                                "T18",
                                bind.clone(),
                                imp(stit(&hr, phi), not(ability(&hbq, &neg))),
                            )?;
                            self.check(
                                "T21",
                                bind.clone(),
                                imp(stit(&hr, phi), not(stit(&hbq, &neg))),
                            )?;
                            self.check(
                                "T24",
                                bind,
                                imp(stit(&hr, phi), not(attempt(&hbq, &neg))),
                            )?;
                        }
                    }
                }
            }
        }

        // Holder-only and tautology schemas.
        for a in &agents {
            let h = agent(a);
            let top = Formula::True;
            self.check("T6", ab(a), not(ability(&h, &top)))?;
            self.check("T8", ab(a), not(attempt(&h, &top)))?;
            self.check("T10", ab(a), not(stit(&h, &top)))?;
            for r in &roles {
                let hr = rea(a, r);
                self.check("A14", arb(a, r), imp(in_control(&hr), in_control(&h)))?;
                self.check("T7", arb(a, r), not(ability(&hr, &top)))?;
                self.check("T9", arb(a, r), not(attempt(&hr, &top)))?;
                self.check("T11", arb(a, r), not(stit(&hr, &top)))?;
            }
        }
        for r in &roles {
            self.check(
                "T5",
                vec![("r", r.clone())],
                not(initiative(r, &Formula::True)),
            )?;
        }

        // Organizational schemas.
        for phi in &positive {
            for o in &orgs {
                for r in &roles {
                    let bind = with(vec![("O", o.clone()), ("r", r.clone())], "phi", phi);
                    self.check("A25", bind, imp(incharge(o, r, phi), initiative(r, phi)))?;
                    for q in &roles {
                        let some_player = Formula::disj(agents.iter().map(|a| {
                            and(play(a, r, o), cap(&agent(a), &incharge(o, q, phi)))
                        }));
                        let dep = Formula::Dep {
                            org: o.clone(),
                            from: RoleSel::One(r.clone()),
                            to: RoleSel::One(q.clone()),
                        };
                        let bind = with(
                            vec![("O", o.clone()), ("r", r.clone()), ("q", q.clone())],
                            "phi",
                            phi,
                        );
                        self.check(
                            "A27",
                            bind,
                            imp(and(incharge(o, r, phi), dep), some_player),
                        )?;
                    }
                }
            }
        }
        for phi in &pool {
            self.role_and_org_capability(phi)?;
        }

        // Congruence under equivalence in the model.
        let extensions: Vec<WorldSet> = pool
            .iter()
            .map(|f| self.ck.sat(f))
            .collect::<Result<_, _>>()?;
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                if extensions[i] != extensions[j] {
                    continue;
                }
                let (phi, psi) = (&pool[i], &pool[j]);
                let pb = |v: Bindings| with(with(v, "phi", phi), "psi", psi);
                let iff = |x: Formula, y: Formula| Formula::Iff(Box::new(x), Box::new(y));
                let ops: [(&'static str, &'static str, fn(&Holder, &Formula) -> Formula); 4] = [
                    ("R1", "R2", cap),
                    ("R3", "R4", ability),
                    ("R5", "R6", attempt),
                    ("R7", "R8", stit),
                ];
                for a in &agents {
                    for (single, role_form, op) in ops {
                        let h = agent(a);
                        self.check(single, pb(ab(a)), iff(op(&h, phi), op(&h, psi)))?;
                        for r in &roles {
                            let h = rea(a, r);
                            self.check(role_form, pb(arb(a, r)), iff(op(&h, phi), op(&h, psi)))?;
                        }
                    }
                }
                for r in &roles {
                    self.check(
                        "R9",
                        pb(vec![("r", r.clone())]),
                        iff(initiative(r, phi), initiative(r, psi)),
                    )?;
                }
            }
        }
        Ok(())
    }

    /// A10 and A26 mention role capability `C_r` and organization
    /// capability `C_O`, which have no holder form; they are evaluated here
    /// from `cn` and the pooled member atoms directly.
    fn role_and_org_capability(&mut self, phi: &Formula) -> Result<(), EvalError> {
        let m = self.m;
        let body = self.ck.sat(phi)?;
        let n = m.world_count();
        for (oi, o) in m.orgs().iter().enumerate() {
            for (ai, a) in m.agents().iter().enumerate() {
                let aid = crate::model::AgentId(ai);
                let ha = ResolvedHolder::Agent(aid);
                for (ri, r) in m.roles().iter().enumerate() {
                    let rid = crate::model::RoleId(ri);
                    let mut sat = WorldSet::with_capacity(n);
                    for w in m.world_ids() {
                        let role_cap = falsifiable_elsewhere(m, w, &body)
                            && sigma_entails_set(m, m.cn(rid, w), &body);
                        if !(o.plays(w, aid, rid) && role_cap) || cap_at(m, &ha, w, &body) {
                            sat.insert(w.0);
                        }
                    }
                    let bind = vec![
                        ("a", a.clone()),
                        ("r", r.clone()),
                        ("O", o.id.clone()),
                        ("phi", phi.to_string()),
                    ];
                    let text = format!("play({a}, {r}, {}) & C_{r} {phi} -> C[{a}] {phi}", o.id);
                    self.record("A10", bind, text, &sat);
                }
                let mut sat = WorldSet::with_capacity(n);
                for w in m.world_ids() {
                    let member = o.members[w.0].contains(&aid);
                    if !(member && cap_at(m, &ha, w, &body))
                        || org::org_capability(m, w, OrgId(oi), phi)?
                    {
                        sat.insert(w.0);
                    }
                }
                let bind = vec![
                    ("a", a.clone()),
                    ("O", o.id.clone()),
                    ("phi", phi.to_string()),
                ];
                let text = format!("member({a}, {}) & C[{a}] {phi} -> C_{} {phi}", o.id, o.id);
                self.record("A26", bind, text, &sat);
            }
        }
        Ok(())
    }
}
