//! Organization-level analysis: capability, quality properties and
//! structural classification.
//!
//! Properties that quantify over all formulas are checked over a
//! [`FormulaPool`] of positive conjunctions.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Holder, RoleSel};
use crate::model::{AgentId, ControlAtom, FactId, Model, OrgId, RoleId, WorldId};
use crate::semantics::{cap_at, nonempty_subsets, Checker, EvalError, ResolvedHolder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PoolError {
    #[error("formula pool is empty")]
    Empty,
    #[error("pool formula `{0}` is not a conjunction of facts")]
    NotPositive(String),
}

/// Formulas used to instantiate definitions that quantify over all `φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaPool(Vec<Formula>);

impl FormulaPool {
    pub fn new(formulas: Vec<Formula>) -> Result<FormulaPool, PoolError> {
        if formulas.is_empty() {
            return Err(PoolError::Empty);
        }
        if let Some(bad) = formulas.iter().find(|f| f.positive_atoms().is_none()) {
            return Err(PoolError::NotPositive(bad.to_string()));
        }
        let mut seen = BTreeSet::new();
        let formulas = formulas.into_iter().filter(|f| seen.insert(f.clone())).collect();
        Ok(FormulaPool(formulas))
    }

    /// Every non-empty subset of the organization's desires (at any world)
    /// as a conjunction, followed by each domain fact on its own.
    pub fn default_for(m: &Model, o: OrgId) -> FormulaPool {
        let mut out = Vec::new();
        let mut desire_sets: BTreeSet<&BTreeSet<FactId>> = BTreeSet::new();
        desire_sets.extend(m.org(o).desires.iter());
        for d in desire_sets {
            let facts: Vec<FactId> = d.iter().copied().collect();
            for subset in nonempty_subsets(&facts) {
                out.push(Formula::conj(
                    subset.iter().map(|&f| Formula::atom(m.fact_name(f))),
                ));
            }
        }
        out.extend(m.facts().iter().map(|f| Formula::atom(f)));
        FormulaPool::new(out).expect("models have at least one fact")
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Witness {
    pub world: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrgVerdict {
    pub org: String,
    pub property: String,
    pub holds: bool,
    /// Counterexamples, sorted; non-empty exactly when `holds` is false.
    pub witnesses: Vec<Witness>,
}

impl OrgVerdict {
    fn new(org: &str, property: &str, mut witnesses: Vec<Witness>) -> OrgVerdict {
        witnesses.sort();
        witnesses.dedup();
        OrgVerdict {
            org: org.to_string(),
            property: property.to_string(),
            holds: witnesses.is_empty(),
            witnesses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    Hierarchy,
    FlatHierarchy,
    Network,
    FullyConnectedNetwork,
    Team,
}

impl Structure {
    pub const ALL: [Structure; 5] = [
        Structure::Hierarchy,
        Structure::FlatHierarchy,
        Structure::Network,
        Structure::FullyConnectedNetwork,
        Structure::Team,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Hierarchy => "hierarchy",
            Structure::FlatHierarchy => "flat-hierarchy",
            Structure::Network => "network",
            Structure::FullyConnectedNetwork => "fully-connected-network",
            Structure::Team => "team",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full report for one organization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub org: String,
    pub verdicts: Vec<OrgVerdict>,
    pub classification: BTreeSet<Structure>,
}

impl Analysis {
    pub fn verdict(&self, property: &str) -> Option<&OrgVerdict> {
        self.verdicts.iter().find(|v| v.property == property)
    }
}

pub const PROPERTIES: &[&str] = &[
    "structurally-well-defined",
    "well-defined",
    "successful",
    "good",
    "good-property",
    "delegation-closed",
    "efficient",
];

pub fn org_id(m: &Model, name: &str) -> Result<OrgId, EvalError> {
    m.org_id(name).ok_or_else(|| EvalError::Unknown {
        kind: "org",
        name: name.to_string(),
    })
}

/// Prefix of the reserved facts that record known capabilities:
/// `cap__<agent>__<role>__<fact>` in `K⁺` means the organization knows that
/// the agent enacting the role can bring the fact about.
pub const CAPABILITY_FACT_PREFIX: &str = "cap__";

pub fn capability_fact(agent: &str, role: &str, fact: &str) -> String {
    format!("{CAPABILITY_FACT_PREFIX}{agent}__{role}__{fact}")
}

/// Runs every check and the structural classification.
pub fn analyze(m: &Model, o: OrgId, pool: &FormulaPool) -> Result<Analysis, EvalError> {
    let mut an = Analyzer::new(m, o);
    let verdicts = vec![
        an.structurally_well_defined(),
        an.well_defined(pool, false)?,
        an.well_defined(pool, true)?,
        an.good(pool)?,
        an.good_property(pool)?,
        an.delegation_closed(),
        an.efficient(pool)?,
    ];
    Ok(Analysis {
        org: m.org(o).id.clone(),
        verdicts,
        classification: classify_structure(m, o),
    })
}

/// Whether some non-empty group of members at `w` is capable of `φ`.
///
/// Capability is monotone in the pooled atom set, so the full member set
/// decides existence; [`capable_subgroup`] finds a smallest witness group.
pub fn org_capability(m: &Model, w: WorldId, o: OrgId, phi: &Formula) -> Result<bool, EvalError> {
    Analyzer::new(m, o).org_capability(w, phi)
}

/// A smallest group of members capable of `φ` at `w`, if any.
pub fn capable_subgroup(
    m: &Model,
    w: WorldId,
    o: OrgId,
    phi: &Formula,
) -> Result<Option<Vec<AgentId>>, EvalError> {
    let body = Checker::new(m).sat(phi)?;
    let members: Vec<AgentId> = m.org(o).members[w.0].iter().copied().collect();
    Ok(nonempty_subsets(&members)
        .into_iter()
        .find(|z| cap_at(m, &ResolvedHolder::Agents(z.clone()), w, &body)))
}

pub fn check_structurally_well_defined(m: &Model, o: OrgId) -> OrgVerdict {
    Analyzer::new(m, o).structurally_well_defined()
}

pub fn check_well_defined(m: &Model, o: OrgId, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
    Analyzer::new(m, o).well_defined(pool, false)
}

pub fn check_successful(m: &Model, o: OrgId, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
    Analyzer::new(m, o).well_defined(pool, true)
}

pub fn check_good(m: &Model, o: OrgId, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
    Analyzer::new(m, o).good(pool)
}

pub fn check_good_property(
    m: &Model,
    o: OrgId,
    pool: &FormulaPool,
) -> Result<OrgVerdict, EvalError> {
    Analyzer::new(m, o).good_property(pool)
}

pub fn check_delegation_closed(m: &Model, o: OrgId) -> OrgVerdict {
    Analyzer::new(m, o).delegation_closed()
}

pub fn check_efficient(m: &Model, o: OrgId, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
    Analyzer::new(m, o).efficient(pool)
}

/// `(I_Z H_VU φ ∧ ◊(H_VU φ ∧ EX ¬φ)) → I_Z φ`.
pub fn supervising_duty_formula(
    z: &BTreeSet<String>,
    v: &BTreeSet<String>,
    u: &BTreeSet<String>,
    phi: &Formula,
) -> Formula {
    let attempt = Formula::Attempt(Holder::ReaGroup(v.clone(), u.clone()), Box::new(phi.clone()));
    let initiative = |f: Formula| Formula::Initiative(RoleSel::Many(z.clone()), Box::new(f));
    let failure = Formula::AF(Box::new(Formula::and(
        attempt.clone(),
        Formula::EX(Box::new(Formula::not(phi.clone()))),
    )));
    Formula::implies(
        Formula::and(initiative(attempt), failure),
        initiative(phi.clone()),
    )
}

pub fn eval_supervising_duty(
    m: &Model,
    w: WorldId,
    o: OrgId,
    z: &BTreeSet<String>,
    v: &BTreeSet<String>,
    u: &BTreeSet<String>,
    phi: &Formula,
) -> Result<bool, EvalError> {
    let f = supervising_duty_formula(z, v, u, phi);
    Checker::new(m).scoped(o).holds(w, &f)
}

struct Analyzer<'m> {
    m: &'m Model,
    o: OrgId,
    ck: Checker<'m>,
}

impl<'m> Analyzer<'m> {
    fn new(m: &'m Model, o: OrgId) -> Analyzer<'m> {
        Analyzer {
            m,
            o,
            ck: Checker::new(m).scoped(o),
        }
    }

    fn org_name(&self) -> &'m str {
        &self.m.org(self.o).id
    }

    fn roles(&self, w: WorldId) -> Vec<RoleId> {
        self.m.org(self.o).roles[w.0].iter().copied().collect()
    }

    fn role_name(&self, r: RoleId) -> String {
        self.m.role_name(r).to_string()
    }

    fn wit(&self, w: WorldId, phi: Option<&Formula>, detail: String) -> Witness {
        Witness {
            world: self.m.world_name(w).to_string(),
            formula: phi.map(Formula::to_string),
            detail,
        }
    }

    fn org_capability(&mut self, w: WorldId, phi: &Formula) -> Result<bool, EvalError> {
        let members: Vec<AgentId> = self.m.org(self.o).members[w.0].iter().copied().collect();
        if members.is_empty() {
            return Ok(false);
        }
        let body = self.ck.sat(phi)?;
        Ok(cap_at(self.m, &ResolvedHolder::Agents(members), w, &body))
    }

    fn desire(&self, phi: &Formula) -> Formula {
        Formula::Desire {
            org: self.org_name().to_string(),
            body: Box::new(phi.clone()),
        }
    }

    fn initiative(&mut self, w: WorldId, r: RoleId, phi: &Formula) -> Result<bool, EvalError> {
        let f = Formula::Initiative(RoleSel::One(self.role_name(r)), Box::new(phi.clone()));
        self.ck.holds(w, &f)
    }

    fn structurally_well_defined(&self) -> OrgVerdict {
        let org = self.m.org(self.o);
        let mut wit = Vec::new();
        for w in self.m.world_ids() {
            for &f in &org.desires[w.0] {
                if !org.roles[w.0].iter().any(|&r| org.in_charge(w, r, f)) {
                    wit.push(self.wit(
                        w,
                        None,
                        format!("no role is in charge of {}", self.m.fact_name(f)),
                    ));
                }
            }
        }
        OrgVerdict::new(self.org_name(), "structurally-well-defined", wit)
    }

    fn well_defined(&mut self, pool: &FormulaPool, successful: bool) -> Result<OrgVerdict, EvalError> {
        let mut wit = Vec::new();
        for w in self.m.world_ids() {
            for phi in pool.formulas() {
                if !self.ck.holds(w, &self.desire(phi))? {
                    continue;
                }
                if successful && !self.org_capability(w, phi)? {
                    wit.push(self.wit(w, Some(phi), "organization is not capable".into()));
                }
                let mut any = false;
                for r in self.roles(w) {
                    if self.initiative(w, r, phi)? {
                        any = true;
                        break;
                    }
                }
                if !any {
                    wit.push(self.wit(w, Some(phi), "no role has the initiative".into()));
                }
            }
        }
        let name = if successful { "successful" } else { "well-defined" };
        Ok(OrgVerdict::new(self.org_name(), name, wit))
    }

    fn good(&mut self, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
        let m = self.m;
        let mut wit = Vec::new();
        for w in m.world_ids() {
            let roles = self.roles(w);
            let groups = nonempty_subsets(&roles);
            for phi in pool.formulas() {
                if !self.org_capability(w, phi)? {
                    continue;
                }
                let body = self.ck.sat(phi)?;
                for z in &groups {
                    let zs: BTreeSet<String> = z.iter().map(|&r| self.role_name(r)).collect();
                    let init = Formula::Initiative(RoleSel::Many(zs.clone()), Box::new(phi.clone()));
                    if !self.ck.holds(w, &init)? {
                        continue;
                    }
                    let org = m.org(self.o);
                    let delegated = groups.iter().any(|u| {
                        let dep = u
                            .iter()
                            .all(|&q| z.iter().any(|&r| org.dep(w, r, q)));
                        if !dep {
                            return false;
                        }
                        let players: Vec<AgentId> = u
                            .iter()
                            .flat_map(|&q| org.players(w, q))
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .collect();
                        !players.is_empty()
                            && cap_at(m, &ResolvedHolder::ReaGroup(players, u.clone()), w, &body)
                    });
                    if !delegated {
                        let names: Vec<&str> = zs.iter().map(String::as_str).collect();
                        wit.push(self.wit(
                            w,
                            Some(phi),
                            format!(
                                "roles {{{}}} have the initiative but no dependent roles are capable",
                                names.join(",")
                            ),
                        ));
                    }
                }
            }
        }
        Ok(OrgVerdict::new(self.org_name(), "good", wit))
    }

    fn good_property(&mut self, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
        let m = self.m;
        let mut wit = Vec::new();
        for w in m.world_ids() {
            let members: BTreeSet<String> = m.org(self.o).members[w.0]
                .iter()
                .map(|&a| m.agent_name(a).to_string())
                .collect();
            for phi in pool.formulas() {
                for r in self.roles(w) {
                    if !self.initiative(w, r, phi)? {
                        continue;
                    }
                    let attempted = !members.is_empty() && {
                        let f = Formula::AF(Box::new(Formula::Attempt(
                            Holder::Agents(members.clone()),
                            Box::new(phi.clone()),
                        )));
                        self.ck.holds(w, &f)?
                    };
                    if !attempted {
                        wit.push(self.wit(
                            w,
                            Some(phi),
                            format!(
                                "{} has the initiative but the members never attempt it",
                                self.role_name(r)
                            ),
                        ));
                    }
                }
            }
        }
        Ok(OrgVerdict::new(self.org_name(), "good-property", wit))
    }

    fn delegation_closed(&self) -> OrgVerdict {
        let m = self.m;
        let org = m.org(self.o);
        let mut wit = Vec::new();
        for w in m.world_ids() {
            for &(a, r) in &org.rea[w.0] {
                let Some(cr) = m.cr(a, r, w) else { continue };
                for &(r2, q) in &org.dep[w.0] {
                    if r2 != r {
                        continue;
                    }
                    for f in org.objectives(w, r) {
                        let atom = ControlAtom::InCharge {
                            org: self.o,
                            role: q,
                            fact: f,
                        };
                        if !cr.contains(&atom) {
                            wit.push(self.wit(
                                w,
                                None,
                                format!(
                                    "cr({}, {}) lacks {}",
                                    m.agent_name(a),
                                    m.role_name(r),
                                    m.atom_label(atom)
                                ),
                            ));
                        }
                    }
                }
            }
        }
        OrgVerdict::new(self.org_name(), "delegation-closed", wit)
    }

    /// Whether `K⁺` at `w` records that `b` enacting `q` can bring about
    /// every fact of `φ`.
    fn knows_capability(&self, w: WorldId, b: AgentId, q: RoleId, phi: &Formula) -> bool {
        let m = self.m;
        let known = &m.org(self.o).know_plus[w.0];
        phi.facts().iter().all(|f| {
            let name = capability_fact(m.agent_name(b), m.role_name(q), f);
            m.fact_id(&name).is_some_and(|id| known.contains(&id))
        })
    }

    fn efficient(&mut self, pool: &FormulaPool) -> Result<OrgVerdict, EvalError> {
        let m = self.m;
        let mut wit = Vec::new();
        for w in m.world_ids() {
            let roles = self.roles(w);
            for phi in pool.formulas() {
                let body = self.ck.sat(phi)?;
                for &r in &roles {
                    let org = m.org(self.o);
                    let players: Vec<AgentId> = org.players(w, r).collect();
                    for &q in &roles {
                        if q == r || !org.dep(w, r, q) {
                            continue;
                        }
                        let incharge = Formula::InCharge {
                            org: org.id.clone(),
                            role: self.role_name(q),
                            body: Box::new(phi.clone()),
                        };
                        let q_players: Vec<AgentId> = org.players(w, q).collect();
                        let known = q_players
                            .iter()
                            .any(|&b| self.knows_capability(w, b, q, phi));

                        // Putting q in charge is only efficient when the
                        // delegate's capability is known.
                        let newly = !self.ck.holds(w, &incharge)?;
                        for &a in players.iter().filter(|_| newly && !known) {
                            let attempt = Formula::Attempt(
                                Holder::Rea(m.agent_name(a).to_string(), self.role_name(r)),
                                Box::new(incharge.clone()),
                            );
                            if self.ck.holds(w, &attempt)? {
                                wit.push(self.wit(
                                    w,
                                    Some(phi),
                                    format!(
                                        "{}:{} delegates to {} without knowing its capability",
                                        m.agent_name(a),
                                        m.role_name(r),
                                        m.role_name(q)
                                    ),
                                ));
                            }
                        }

                        if !known {
                            continue;
                        }
                        let incapable = players.iter().all(|&a| {
                            !cap_at(m, &ResolvedHolder::Rea(a, r), w, &body)
                        });
                        if !incapable || !self.initiative(w, r, phi)? {
                            continue;
                        }
                        let mut delegated = false;
                        for &a in &players {
                            let stit = Formula::Stit(
                                Holder::Rea(m.agent_name(a).to_string(), self.role_name(r)),
                                Box::new(incharge.clone()),
                            );
                            if self.ck.holds(w, &stit)? {
                                delegated = true;
                                break;
                            }
                        }
                        if !delegated {
                            wit.push(self.wit(
                                w,
                                Some(phi),
                                format!(
                                    "{} cannot achieve it and does not put the known-capable {} in charge",
                                    m.role_name(r),
                                    m.role_name(q)
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(OrgVerdict::new(self.org_name(), "efficient", wit))
    }
}

/// Structural labels that hold at every world.
pub fn classify_structure(m: &Model, o: OrgId) -> BTreeSet<Structure> {
    let mut out: BTreeSet<Structure> = Structure::ALL.into_iter().collect();
    for w in m.world_ids() {
        let here = classify_at(m, o, w);
        out.retain(|s| here.contains(s));
    }
    out
}

fn classify_at(m: &Model, o: OrgId, w: WorldId) -> BTreeSet<Structure> {
    let org = m.org(o);
    let roles: Vec<RoleId> = org.roles[w.0].iter().copied().collect();
    let desires = &org.desires[w.0];
    let dep = |r, s| org.dep(w, r, s);
    let covers = |ms: &[RoleId]| {
        desires
            .iter()
            .all(|&f| ms.iter().any(|&r| org.in_charge(w, r, f)))
    };
    let mut out = BTreeSet::new();

    let antisymmetric = roles
        .iter()
        .all(|&r| roles.iter().all(|&s| r == s || !(dep(r, s) && dep(s, r))));
    let is_managers = |ms: &[RoleId]| {
        ms.iter()
            .all(|&mg| desires.iter().any(|&f| org.in_charge(w, mg, f)))
            && covers(ms)
            && roles
                .iter()
                .filter(|r| !ms.contains(r))
                .all(|&r| ms.iter().any(|&mg| dep(mg, r)))
    };
    if antisymmetric && nonempty_subsets(&roles).iter().any(|ms| is_managers(ms)) {
        out.insert(Structure::Hierarchy);
        let flat = roles.iter().any(|&mg| {
            is_managers(&[mg])
                && roles.iter().all(|&r| dep(mg, r))
                && roles.iter().all(|&r| {
                    !roles
                        .iter()
                        .any(|&s| s != mg && s != r && dep(s, r))
                })
        });
        if flat {
            out.insert(Structure::FlatHierarchy);
        }
    }

    let network = roles
        .iter()
        .all(|&r| desires.iter().any(|&f| org.in_charge(w, r, f)))
        && covers(&roles)
        && roles.iter().all(|&r| roles.iter().any(|&s| dep(r, s)));
    if network {
        out.insert(Structure::Network);
        if roles.iter().all(|&r| roles.iter().all(|&s| dep(r, s))) {
            out.insert(Structure::FullyConnectedNetwork);
        }
        if roles
            .iter()
            .all(|&r| roles.iter().all(|&s| !dep(r, s) || dep(s, r)))
        {
            out.insert(Structure::Team);
        }
    }
    out
}
