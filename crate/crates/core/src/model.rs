//! The semantic structure: facts, agents, roles, worlds, labeled transitions,
//! capability maps and organization structures.
//!
//! Everything that the structure indexes by world is stored fully expanded
//! (one entry per world). The JSON file format accepts a world-independent
//! `default` plus per-world `at` overrides and [`load_model`] expands them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(FactId);
id_type!(AgentId);
id_type!(RoleId);
id_type!(WorldId);
id_type!(OrgId);

/// Something an agent can control: a domain fact, or the assignment of a
/// fact to a role's objectives within an organization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ControlAtom {
    Fact(FactId),
    InCharge {
        org: OrgId,
        role: RoleId,
        fact: FactId,
    },
}

pub type AtomSet = BTreeSet<ControlAtom>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub id: String,
    pub facts: BTreeSet<FactId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub src: WorldId,
    pub dst: WorldId,
    pub labels: BTreeSet<(AgentId, RoleId)>,
}

/// `c`, `cn` and `cr`, each expanded per world.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Capabilities {
    /// `[agent][world]`
    pub c: Vec<Vec<AtomSet>>,
    /// `[role][world]`
    pub cn: Vec<Vec<AtomSet>>,
    /// Explicit role-enacting capabilities. A missing entry means
    /// `cr(a, r, w) = c(a, w)` wherever `a` plays `r`.
    pub cr: BTreeMap<(AgentId, RoleId), Vec<AtomSet>>,
}

/// One organization, every component indexed by world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgStructure {
    pub id: String,
    pub members: Vec<BTreeSet<AgentId>>,
    pub roles: Vec<BTreeSet<RoleId>>,
    pub rea: Vec<BTreeSet<(AgentId, RoleId)>>,
    pub dep: Vec<BTreeSet<(RoleId, RoleId)>>,
    pub desires: Vec<BTreeSet<FactId>>,
    /// `[world][role]`; roles without an entry have no objectives.
    pub objectives: Vec<BTreeMap<RoleId, BTreeSet<FactId>>>,
    pub know_plus: Vec<BTreeSet<FactId>>,
    pub know_minus: Vec<BTreeSet<FactId>>,
}

impl OrgStructure {
    pub fn plays(&self, w: WorldId, a: AgentId, r: RoleId) -> bool {
        self.rea[w.0].contains(&(a, r))
    }

    pub fn dep(&self, w: WorldId, r: RoleId, q: RoleId) -> bool {
        self.dep[w.0].contains(&(r, q))
    }

    pub fn objectives(&self, w: WorldId, r: RoleId) -> impl Iterator<Item = FactId> + '_ {
        self.objectives[w.0].get(&r).into_iter().flatten().copied()
    }

    pub fn in_charge(&self, w: WorldId, r: RoleId, f: FactId) -> bool {
        self.objectives[w.0].get(&r).is_some_and(|s| s.contains(&f))
    }

    /// Agents playing `r` at `w`.
    pub fn players(&self, w: WorldId, r: RoleId) -> impl Iterator<Item = AgentId> + '_ {
        self.rea[w.0].iter().filter(move |(_, q)| *q == r).map(|(a, _)| *a)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Totality {
    #[default]
    Error,
    SelfLoop,
}

/// The unvalidated pieces of a model. Build one, then call
/// [`Model::from_parts`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelParts {
    pub facts: Vec<String>,
    pub agents: Vec<String>,
    pub roles: Vec<String>,
    pub worlds: Vec<World>,
    pub transitions: Vec<Transition>,
    pub capabilities: Capabilities,
    pub orgs: Vec<OrgStructure>,
    pub totality: Totality,
}

/// An immutable, total, reference-checked model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    parts: ModelParts,
    outgoing: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown {kind} `{name}` referenced in {context}")]
    UnknownIdentifier {
        kind: &'static str,
        name: String,
        context: String,
    },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("{0} non-empty violated")]
    Empty(&'static str),
    #[error("label without rea: ({agent}, {role}) on transition {src} -> {dst}")]
    LabelWithoutRea {
        src: String,
        dst: String,
        agent: String,
        role: String,
    },
    #[error("world `{0}` has no outgoing transition (totality policy is `error`)")]
    NoSuccessor(String),
    #[error("{kind} index {index} out of range")]
    IndexOutOfRange { kind: &'static str, index: usize },
}

impl Model {
    /// Checks references, applies the totality policy and indexes successors.
    ///
    /// Fails on empty `Ψ`, `A` or `W`, on dangling indices, on labels that no
    /// organization licenses through `rea`, and on sink worlds under the
    /// `error` totality policy.
    pub fn from_parts(mut parts: ModelParts) -> Result<Model, ModelError> {
        if parts.facts.is_empty() {
            return Err(ModelError::Empty("Ψ"));
        }
        if parts.agents.is_empty() {
            return Err(ModelError::Empty("A"));
        }
        if parts.worlds.is_empty() {
            return Err(ModelError::Empty("W"));
        }
        check_unique("fact", &parts.facts)?;
        check_unique("agent", &parts.agents)?;
        check_unique("role", &parts.roles)?;
        check_unique("world", parts.worlds.iter().map(|w| &w.id))?;
        check_unique("org", parts.orgs.iter().map(|o| &o.id))?;
        check_shapes(&parts)?;

        let n = parts.worlds.len();
        for t in &parts.transitions {
            for &(a, r) in &t.labels {
                if !parts.orgs.iter().any(|o| o.plays(t.src, a, r)) {
                    return Err(ModelError::LabelWithoutRea {
                        src: parts.worlds[t.src.0].id.clone(),
                        dst: parts.worlds[t.dst.0].id.clone(),
                        agent: parts.agents[a.0].clone(),
                        role: parts.roles[r.0].clone(),
                    });
                }
            }
        }

        let mut has_succ = vec![false; n];
        for t in &parts.transitions {
            has_succ[t.src.0] = true;
        }
        for (i, ok) in has_succ.iter().enumerate() {
            if !ok {
                match parts.totality {
                    Totality::Error => {
                        return Err(ModelError::NoSuccessor(parts.worlds[i].id.clone()))
                    }
                    Totality::SelfLoop => parts.transitions.push(Transition {
                        src: WorldId(i),
                        dst: WorldId(i),
                        labels: BTreeSet::new(),
                    }),
                }
            }
        }

        let mut outgoing = vec![Vec::new(); n];
        for (i, t) in parts.transitions.iter().enumerate() {
            outgoing[t.src.0].push(i);
        }
        Ok(Model { parts, outgoing })
    }

    pub fn parts(&self) -> &ModelParts {
        &self.parts
    }

    pub fn into_parts(self) -> ModelParts {
        self.parts
    }

    pub fn facts(&self) -> &[String] {
        &self.parts.facts
    }

    pub fn agents(&self) -> &[String] {
        &self.parts.agents
    }

    pub fn roles(&self) -> &[String] {
        &self.parts.roles
    }

    pub fn worlds(&self) -> &[World] {
        &self.parts.worlds
    }

    pub fn world_count(&self) -> usize {
        self.parts.worlds.len()
    }

    pub fn world_ids(&self) -> impl Iterator<Item = WorldId> {
        (0..self.parts.worlds.len()).map(WorldId)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.parts.transitions
    }

    pub fn orgs(&self) -> &[OrgStructure] {
        &self.parts.orgs
    }

    pub fn org(&self, o: OrgId) -> &OrgStructure {
        &self.parts.orgs[o.0]
    }

    pub fn capabilities(&self) -> &Capabilities {
        &self.parts.capabilities
    }

    pub fn totality(&self) -> Totality {
        self.parts.totality
    }

    /// Indices into [`Model::transitions`] of the transitions leaving `w`.
    pub fn outgoing(&self, w: WorldId) -> &[usize] {
        &self.outgoing[w.0]
    }

    pub fn successors(&self, w: WorldId) -> impl Iterator<Item = WorldId> + '_ {
        self.outgoing[w.0]
            .iter()
            .map(move |&i| self.parts.transitions[i].dst)
    }

    pub fn fact_id(&self, name: &str) -> Option<FactId> {
        self.parts.facts.iter().position(|f| f == name).map(FactId)
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.parts.agents.iter().position(|f| f == name).map(AgentId)
    }

    pub fn role_id(&self, name: &str) -> Option<RoleId> {
        self.parts.roles.iter().position(|f| f == name).map(RoleId)
    }

    pub fn world_id(&self, name: &str) -> Option<WorldId> {
        self.parts.worlds.iter().position(|w| w.id == name).map(WorldId)
    }

    pub fn org_id(&self, name: &str) -> Option<OrgId> {
        self.parts.orgs.iter().position(|o| o.id == name).map(OrgId)
    }

    pub fn world_name(&self, w: WorldId) -> &str {
        &self.parts.worlds[w.0].id
    }

    pub fn fact_name(&self, f: FactId) -> &str {
        &self.parts.facts[f.0]
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.parts.agents[a.0]
    }

    pub fn role_name(&self, r: RoleId) -> &str {
        &self.parts.roles[r.0]
    }

    pub fn holds_fact(&self, w: WorldId, f: FactId) -> bool {
        self.parts.worlds[w.0].facts.contains(&f)
    }

    /// Truth of a control atom at a world.
    pub fn atom_holds(&self, atom: ControlAtom, w: WorldId) -> bool {
        match atom {
            ControlAtom::Fact(f) => self.holds_fact(w, f),
            ControlAtom::InCharge { org, role, fact } => {
                self.parts.orgs[org.0].in_charge(w, role, fact)
            }
        }
    }

    /// Whether `a` plays `r` at `w` in any organization.
    pub fn plays_any(&self, w: WorldId, a: AgentId, r: RoleId) -> bool {
        self.parts.orgs.iter().any(|o| o.plays(w, a, r))
    }

    pub fn c(&self, a: AgentId, w: WorldId) -> &AtomSet {
        &self.parts.capabilities.c[a.0][w.0]
    }

    pub fn cn(&self, r: RoleId, w: WorldId) -> &AtomSet {
        &self.parts.capabilities.cn[r.0][w.0]
    }

    /// `cr(a, r, w)`, defined only where `a` plays `r`.
    pub fn cr(&self, a: AgentId, r: RoleId, w: WorldId) -> Option<&AtomSet> {
        if !self.plays_any(w, a, r) {
            return None;
        }
        Some(match self.parts.capabilities.cr.get(&(a, r)) {
            Some(per_world) => &per_world[w.0],
            None => self.c(a, w),
        })
    }

    pub fn atom_label(&self, atom: ControlAtom) -> String {
        match atom {
            ControlAtom::Fact(f) => self.fact_name(f).to_string(),
            ControlAtom::InCharge { org, role, fact } => format!(
                "incharge({}, {}, {})",
                self.parts.orgs[org.0].id,
                self.role_name(role),
                self.fact_name(fact)
            ),
        }
    }

    /// Canonical JSON in the model file format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&to_file(&self.parts)).expect("model serializes")
    }

    /// Stable hash of the canonical form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(&to_file(&self.parts)).expect("model serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hex::encode(&hash[..8])
    }
}

fn check_unique<'a>(
    kind: &'static str,
    names: impl IntoIterator<Item = &'a String>,
) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Duplicate {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

fn check_shapes(p: &ModelParts) -> Result<(), ModelError> {
    let n = p.worlds.len();
    let bad = |kind, index| Err(ModelError::IndexOutOfRange { kind, index });
    let atom_ok = |a: &ControlAtom| match *a {
        ControlAtom::Fact(f) => f.0 < p.facts.len(),
        ControlAtom::InCharge { org, role, fact } => {
            org.0 < p.orgs.len() && role.0 < p.roles.len() && fact.0 < p.facts.len()
        }
    };
    for w in &p.worlds {
        if let Some(f) = w.facts.iter().find(|f| f.0 >= p.facts.len()) {
            return bad("fact", f.0);
        }
    }
    for t in &p.transitions {
        if t.src.0 >= n || t.dst.0 >= n {
            return bad("world", t.src.0.max(t.dst.0));
        }
        for &(a, r) in &t.labels {
            if a.0 >= p.agents.len() || r.0 >= p.roles.len() {
                return bad("label", a.0.max(r.0));
            }
        }
    }
    let caps = &p.capabilities;
    if caps.c.len() != p.agents.len() {
        return bad("capability agent", caps.c.len());
    }
    if caps.cn.len() != p.roles.len() {
        return bad("capability role", caps.cn.len());
    }
    let per_world = caps
        .c
        .iter()
        .chain(caps.cn.iter())
        .chain(caps.cr.values());
    for v in per_world {
        if v.len() != n {
            return bad("capability world", v.len());
        }
        if !v.iter().flatten().all(atom_ok) {
            return bad("capability atom", 0);
        }
    }
    for &(a, r) in caps.cr.keys() {
        if a.0 >= p.agents.len() || r.0 >= p.roles.len() {
            return bad("cr key", a.0.max(r.0));
        }
    }
    for o in &p.orgs {
        let lens = [
            o.members.len(),
            o.roles.len(),
            o.rea.len(),
            o.dep.len(),
            o.desires.len(),
            o.objectives.len(),
            o.know_plus.len(),
            o.know_minus.len(),
        ];
        if let Some(&l) = lens.iter().find(|&&l| l != n) {
            return bad("org world", l);
        }
    }
    Ok(())
}

/// A broken model invariant. Violations are data: a model can carry several.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "invariant")]
pub enum Violation {
    Reflexivity {
        org: String,
        world: String,
        role: String,
    },
    Transitivity {
        org: String,
        world: String,
        from: String,
        via: String,
        to: String,
    },
    DepOutsideRoles {
        org: String,
        world: String,
        from: String,
        to: String,
    },
    ReaOutsideOrg {
        org: String,
        world: String,
        agent: String,
        role: String,
    },
    ObjectiveOutsideRoles {
        org: String,
        world: String,
        role: String,
    },
    /// `cn(r, w) ⊄ c(a, w)` for a player `a` of `r`.
    RoleCapability {
        world: String,
        agent: String,
        role: String,
        missing: String,
    },
    /// `c(a, w) ⊄ cr(a, r, w)`.
    RoleEnhancement {
        world: String,
        agent: String,
        role: String,
        missing: String,
    },
    KnowledgeSoundness {
        org: String,
        world: String,
        fact: String,
    },
    NegativeKnowledge {
        org: String,
        world: String,
        fact: String,
    },
    LabelWithoutRea {
        world: String,
        target: String,
        agent: String,
        role: String,
    },
    NoSuccessor {
        world: String,
    },
}

impl Violation {
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::Reflexivity { .. } => "Reflexivity",
            Violation::Transitivity { .. } => "Transitivity",
            Violation::DepOutsideRoles { .. } => "DepOutsideRoles",
            Violation::ReaOutsideOrg { .. } => "ReaOutsideOrg",
            Violation::ObjectiveOutsideRoles { .. } => "ObjectiveOutsideRoles",
            Violation::RoleCapability { .. } => "RoleCapability",
            Violation::RoleEnhancement { .. } => "RoleEnhancement",
            Violation::KnowledgeSoundness { .. } => "KnowledgeSoundness",
            Violation::NegativeKnowledge { .. } => "NegativeKnowledge",
            Violation::LabelWithoutRea { .. } => "LabelWithoutRea",
            Violation::NoSuccessor { .. } => "NoSuccessor",
        }
    }

    pub fn world(&self) -> &str {
        match self {
            Violation::Reflexivity { world, .. }
            | Violation::Transitivity { world, .. }
            | Violation::DepOutsideRoles { world, .. }
            | Violation::ReaOutsideOrg { world, .. }
            | Violation::ObjectiveOutsideRoles { world, .. }
            | Violation::RoleCapability { world, .. }
            | Violation::RoleEnhancement { world, .. }
            | Violation::KnowledgeSoundness { world, .. }
            | Violation::NegativeKnowledge { world, .. }
            | Violation::LabelWithoutRea { world, .. }
            | Violation::NoSuccessor { world } => world,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Reflexivity { org, world, role } => {
                write!(f, "{}({world}): {org}: dep({role}, {role}) missing", self.invariant())
            }
            Violation::Transitivity {
                org,
                world,
                from,
                via,
                to,
            } => write!(
                f,
                "{}({world}): {org}: dep({from}, {via}) and dep({via}, {to}) but not dep({from}, {to})",
                self.invariant()
            ),
            Violation::DepOutsideRoles { org, world, from, to } => write!(
                f,
                "{}({world}): {org}: dep({from}, {to}) names a role outside the organization",
                self.invariant()
            ),
            Violation::ReaOutsideOrg { org, world, agent, role } => write!(
                f,
                "{}({world}): {org}: play({agent}, {role}) outside members x roles",
                self.invariant()
            ),
            Violation::ObjectiveOutsideRoles { org, world, role } => write!(
                f,
                "{}({world}): {org}: objectives for non-member role {role}",
                self.invariant()
            ),
            Violation::RoleCapability { world, agent, role, missing } => write!(
                f,
                "{}({world}): {agent} plays {role} but lacks required capability {missing}",
                self.invariant()
            ),
            Violation::RoleEnhancement { world, agent, role, missing } => write!(
                f,
                "{}({world}): {missing} in c({agent}) but not in cr({agent}, {role})",
                self.invariant()
            ),
            Violation::KnowledgeSoundness { org, world, fact } => write!(
                f,
                "{}({world}): {org} knows {fact} but it is false",
                self.invariant()
            ),
            Violation::NegativeKnowledge { org, world, fact } => write!(
                f,
                "{}({world}): {org} knows !{fact} but it is true",
                self.invariant()
            ),
            Violation::LabelWithoutRea { world, target, agent, role } => write!(
                f,
                "{}({world}): label ({agent}, {role}) on {world} -> {target} without rea",
                self.invariant()
            ),
            Violation::NoSuccessor { world } => {
                write!(f, "{}({world}): no outgoing transition", self.invariant())
            }
        }
    }
}

/// Checks every structural invariant and returns the violations found,
/// sorted. An empty list means the model is valid.
pub fn validate_model(m: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    let wname = |w: usize| m.worlds()[w].id.clone();
    let rname = |r: RoleId| m.role_name(r).to_string();
    let aname = |a: AgentId| m.agent_name(a).to_string();

    for o in m.orgs() {
        for w in 0..m.world_count() {
            let roles = &o.roles[w];
            let dep = &o.dep[w];
            for &r in roles {
                if !dep.contains(&(r, r)) {
                    out.push(Violation::Reflexivity {
                        org: o.id.clone(),
                        world: wname(w),
                        role: rname(r),
                    });
                }
            }
            for &(p, r) in dep {
                if !roles.contains(&p) || !roles.contains(&r) {
                    out.push(Violation::DepOutsideRoles {
                        org: o.id.clone(),
                        world: wname(w),
                        from: rname(p),
                        to: rname(r),
                    });
                }
                for &(r2, q) in dep {
                    if r2 == r && !dep.contains(&(p, q)) {
                        out.push(Violation::Transitivity {
                            org: o.id.clone(),
                            world: wname(w),
                            from: rname(p),
                            via: rname(r),
                            to: rname(q),
                        });
                    }
                }
            }
            for &(a, r) in &o.rea[w] {
                if !o.members[w].contains(&a) || !roles.contains(&r) {
                    out.push(Violation::ReaOutsideOrg {
                        org: o.id.clone(),
                        world: wname(w),
                        agent: aname(a),
                        role: rname(r),
                    });
                }
            }
            for (&r, facts) in &o.objectives[w] {
                if !facts.is_empty() && !roles.contains(&r) {
                    out.push(Violation::ObjectiveOutsideRoles {
                        org: o.id.clone(),
                        world: wname(w),
                        role: rname(r),
                    });
                }
            }
            let val = &m.worlds()[w].facts;
            for f in o.know_plus[w].difference(val) {
                out.push(Violation::KnowledgeSoundness {
                    org: o.id.clone(),
                    world: wname(w),
                    fact: m.fact_name(*f).to_string(),
                });
            }
            for f in o.know_minus[w].intersection(val) {
                out.push(Violation::NegativeKnowledge {
                    org: o.id.clone(),
                    world: wname(w),
                    fact: m.fact_name(*f).to_string(),
                });
            }
        }
    }

    // Capability constraints are checked once per (world, agent, role) that
    // some organization licenses.
    let mut played = BTreeSet::new();
    for o in m.orgs() {
        for (w, rea) in o.rea.iter().enumerate() {
            for &(a, r) in rea {
                played.insert((w, a, r));
            }
        }
    }
    for &(w, a, r) in &played {
        let wid = WorldId(w);
        let c = m.c(a, wid);
        for atom in m.cn(r, wid).difference(c) {
            out.push(Violation::RoleCapability {
                world: wname(w),
                agent: aname(a),
                role: rname(r),
                missing: m.atom_label(*atom),
            });
        }
        if let Some(cr) = m.cr(a, r, wid) {
            for atom in c.difference(cr) {
                out.push(Violation::RoleEnhancement {
                    world: wname(w),
                    agent: aname(a),
                    role: rname(r),
                    missing: m.atom_label(*atom),
                });
            }
        }
    }

    for t in m.transitions() {
        for &(a, r) in &t.labels {
            if !m.plays_any(t.src, a, r) {
                out.push(Violation::LabelWithoutRea {
                    world: wname(t.src.0),
                    target: wname(t.dst.0),
                    agent: aname(a),
                    role: rname(r),
                });
            }
        }
    }
    for w in m.world_ids() {
        if m.outgoing(w).is_empty() {
            out.push(Violation::NoSuccessor { world: wname(w.0) });
        }
    }

    out.sort();
    out.dedup();
    out
}

/// Replaces every organization's dependency relation by its
/// reflexive-transitive closure over the organization's roles at each world.
pub fn close_dependencies(m: &Model) -> Model {
    let mut parts = m.parts().clone();
    for o in &mut parts.orgs {
        for w in 0..o.dep.len() {
            o.dep[w] = closure(&o.roles[w], &o.dep[w]);
        }
    }
    Model::from_parts(parts).expect("closure preserves model well-formedness")
}

pub(crate) fn closure(
    roles: &BTreeSet<RoleId>,
    pairs: &BTreeSet<(RoleId, RoleId)>,
) -> BTreeSet<(RoleId, RoleId)> {
    let mut out: BTreeSet<_> = pairs.clone();
    out.extend(roles.iter().map(|&r| (r, r)));
    loop {
        let mut added = Vec::new();
        for &(p, r) in &out {
            for &(r2, q) in &out {
                if r == r2 && !out.contains(&(p, q)) {
                    added.push((p, q));
                }
            }
        }
        if added.is_empty() {
            return out;
        }
        out.extend(added);
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerWorld<T> {
    #[serde(default)]
    default: T,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    at: BTreeMap<String, T>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
enum AtomEntry {
    Fact(String),
    InCharge { incharge: InChargeEntry },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InChargeEntry {
    org: String,
    role: String,
    fact: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelEntry {
    agent: String,
    role: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldEntry {
    id: String,
    #[serde(default)]
    facts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<LabelEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapabilitiesFile {
    #[serde(default)]
    c: BTreeMap<String, PerWorld<Vec<AtomEntry>>>,
    #[serde(default)]
    cn: BTreeMap<String, PerWorld<Vec<AtomEntry>>>,
    #[serde(default)]
    cr: BTreeMap<String, PerWorld<Vec<AtomEntry>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct OrgFile {
    id: String,
    #[serde(default)]
    members: PerWorld<Vec<String>>,
    #[serde(default)]
    roles: PerWorld<Vec<String>>,
    #[serde(default)]
    rea: PerWorld<Vec<LabelEntry>>,
    #[serde(default)]
    dep: PerWorld<Vec<(String, String)>>,
    #[serde(default)]
    dep_closure: bool,
    #[serde(default)]
    desires: PerWorld<Vec<String>>,
    #[serde(default)]
    objectives: BTreeMap<String, PerWorld<Vec<String>>>,
    #[serde(default)]
    know_plus: PerWorld<Vec<String>>,
    #[serde(default)]
    know_minus: PerWorld<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    totality: Totality,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    facts: Vec<String>,
    agents: Vec<String>,
    #[serde(default)]
    roles: Vec<String>,
    worlds: Vec<WorldEntry>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
    #[serde(default)]
    capabilities: CapabilitiesFile,
    #[serde(default)]
    orgs: Vec<OrgFile>,
    #[serde(default)]
    config: ConfigFile,
}

struct Names<'a> {
    facts: &'a [String],
    agents: &'a [String],
    roles: &'a [String],
    worlds: Vec<&'a str>,
    orgs: Vec<&'a str>,
}

fn lookup<T>(
    names: &[impl AsRef<str>],
    kind: &'static str,
    name: &str,
    context: &str,
    wrap: fn(usize) -> T,
) -> Result<T, ModelError> {
    names
        .iter()
        .position(|n| n.as_ref() == name)
        .map(wrap)
        .ok_or_else(|| ModelError::UnknownIdentifier {
            kind,
            name: name.to_string(),
            context: context.to_string(),
        })
}

impl Names<'_> {
    fn fact(&self, n: &str, ctx: &str) -> Result<FactId, ModelError> {
        lookup(self.facts, "fact", n, ctx, FactId)
    }
    fn agent(&self, n: &str, ctx: &str) -> Result<AgentId, ModelError> {
        lookup(self.agents, "agent", n, ctx, AgentId)
    }
    fn role(&self, n: &str, ctx: &str) -> Result<RoleId, ModelError> {
        lookup(self.roles, "role", n, ctx, RoleId)
    }
    fn world(&self, n: &str, ctx: &str) -> Result<WorldId, ModelError> {
        lookup(&self.worlds, "world", n, ctx, WorldId)
    }
    fn org(&self, n: &str, ctx: &str) -> Result<OrgId, ModelError> {
        lookup(&self.orgs, "org", n, ctx, OrgId)
    }

    fn atom(&self, a: &AtomEntry, ctx: &str) -> Result<ControlAtom, ModelError> {
        Ok(match a {
            AtomEntry::Fact(f) => ControlAtom::Fact(self.fact(f, ctx)?),
            AtomEntry::InCharge { incharge } => ControlAtom::InCharge {
                org: self.org(&incharge.org, ctx)?,
                role: self.role(&incharge.role, ctx)?,
                fact: self.fact(&incharge.fact, ctx)?,
            },
        })
    }

    /// Expands `default`/`at` into one value per world, converting entries.
    fn expand<T: Clone, U>(
        &self,
        pw: &PerWorld<T>,
        ctx: &str,
        conv: impl Fn(&T) -> Result<U, ModelError>,
    ) -> Result<Vec<U>, ModelError> {
        for w in pw.at.keys() {
            self.world(w, ctx)?;
        }
        self.worlds
            .iter()
            .map(|w| conv(pw.at.get(*w).unwrap_or(&pw.default)))
            .collect()
    }
}

/// Parses a model file and builds a validated-reference [`Model`].
///
/// Per-world overrides are expanded, dependency closure is applied for
/// organizations that request it, and the totality policy is enforced.
/// Semantic invariants (see [`validate_model`]) are not checked here.
pub fn load_model(source: &str) -> Result<Model, ModelError> {
    let file: ModelFile = serde_json::from_str(source).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_file(&file)
}

fn from_file(file: &ModelFile) -> Result<Model, ModelError> {
    if file.worlds.is_empty() {
        return Err(ModelError::Empty("W"));
    }
    check_unique("fact", &file.facts)?;
    check_unique("agent", &file.agents)?;
    check_unique("role", &file.roles)?;
    check_unique("world", file.worlds.iter().map(|w| &w.id))?;
    check_unique("org", file.orgs.iter().map(|o| &o.id))?;
    let names = Names {
        facts: &file.facts,
        agents: &file.agents,
        roles: &file.roles,
        worlds: file.worlds.iter().map(|w| w.id.as_str()).collect(),
        orgs: file.orgs.iter().map(|o| o.id.as_str()).collect(),
    };

    let worlds = file
        .worlds
        .iter()
        .map(|w| {
            let ctx = format!("world {}", w.id);
            Ok(World {
                id: w.id.clone(),
                facts: w
                    .facts
                    .iter()
                    .map(|f| names.fact(f, &ctx))
                    .collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let transitions = file
        .transitions
        .iter()
        .map(|t| {
            let ctx = format!("transition {} -> {}", t.from, t.to);
            Ok(Transition {
                src: names.world(&t.from, &ctx)?,
                dst: names.world(&t.to, &ctx)?,
                labels: t
                    .labels
                    .iter()
                    .map(|l| Ok((names.agent(&l.agent, &ctx)?, names.role(&l.role, &ctx)?)))
                    .collect::<Result<_, ModelError>>()?,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let atoms = |ctx: &str, v: &Vec<AtomEntry>| -> Result<AtomSet, ModelError> {
        v.iter().map(|a| names.atom(a, ctx)).collect()
    };
    let n = worlds.len();
    let mut caps = Capabilities {
        c: vec![vec![AtomSet::new(); n]; file.agents.len()],
        cn: vec![vec![AtomSet::new(); n]; file.roles.len()],
        cr: BTreeMap::new(),
    };
    for (agent, pw) in &file.capabilities.c {
        let ctx = format!("capabilities.c.{agent}");
        let a = names.agent(agent, &ctx)?;
        caps.c[a.0] = names.expand(pw, &ctx, |v| atoms(&ctx, v))?;
    }
    for (role, pw) in &file.capabilities.cn {
        let ctx = format!("capabilities.cn.{role}");
        let r = names.role(role, &ctx)?;
        caps.cn[r.0] = names.expand(pw, &ctx, |v| atoms(&ctx, v))?;
    }
    for (key, pw) in &file.capabilities.cr {
        let ctx = format!("capabilities.cr.{key}");
        let (agent, role) = key.split_once(':').ok_or_else(|| ModelError::Syntax {
            line: 0,
            column: 0,
            message: format!("cr key `{key}` must have the form agent:role"),
        })?;
        let a = names.agent(agent, &ctx)?;
        let r = names.role(role, &ctx)?;
        caps.cr.insert((a, r), names.expand(pw, &ctx, |v| atoms(&ctx, v))?);
    }

    let mut orgs = Vec::with_capacity(file.orgs.len());
    for o in &file.orgs {
        let ctx = format!("org {}", o.id);
        let agent_set = |v: &Vec<String>| -> Result<BTreeSet<AgentId>, ModelError> {
            v.iter().map(|a| names.agent(a, &ctx)).collect()
        };
        let role_set = |v: &Vec<String>| -> Result<BTreeSet<RoleId>, ModelError> {
            v.iter().map(|r| names.role(r, &ctx)).collect()
        };
        let fact_set = |v: &Vec<String>| -> Result<BTreeSet<FactId>, ModelError> {
            v.iter().map(|f| names.fact(f, &ctx)).collect()
        };
        let members = names.expand(&o.members, &ctx, agent_set)?;
        let roles = names.expand(&o.roles, &ctx, role_set)?;
        let rea = names.expand(&o.rea, &ctx, |v: &Vec<LabelEntry>| {
            v.iter()
                .map(|l| Ok((names.agent(&l.agent, &ctx)?, names.role(&l.role, &ctx)?)))
                .collect()
        })?;
        let mut dep = names.expand(&o.dep, &ctx, |v: &Vec<(String, String)>| {
            v.iter()
                .map(|(a, b)| Ok((names.role(a, &ctx)?, names.role(b, &ctx)?)))
                .collect()
        })?;
        if o.dep_closure {
            for w in 0..n {
                dep[w] = closure(&roles[w], &dep[w]);
            }
        }
        let mut objectives = vec![BTreeMap::new(); n];
        for (role, pw) in &o.objectives {
            let r = names.role(role, &ctx)?;
            for (w, facts) in names.expand(pw, &ctx, fact_set)?.into_iter().enumerate() {
                if !facts.is_empty() {
                    objectives[w].insert(r, facts);
                }
            }
        }
        orgs.push(OrgStructure {
            id: o.id.clone(),
            members,
            roles,
            rea,
            dep,
            desires: names.expand(&o.desires, &ctx, fact_set)?,
            objectives,
            know_plus: names.expand(&o.know_plus, &ctx, fact_set)?,
            know_minus: names.expand(&o.know_minus, &ctx, fact_set)?,
        });
    }

    Model::from_parts(ModelParts {
        facts: file.facts.clone(),
        agents: file.agents.clone(),
        roles: file.roles.clone(),
        worlds,
        transitions,
        capabilities: caps,
        orgs,
        totality: file.config.totality,
    })
}

/// Collapses a per-world vector into `default` plus overrides, choosing the
/// most frequent value as the default so the output stays small.
fn collapse<T: Clone + Ord>(worlds: &[World], values: Vec<T>) -> PerWorld<T> {
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for v in &values {
        *counts.entry(v).or_default() += 1;
    }
    let default = counts
        .iter()
        .max_by_key(|(_, c)| **c)
        .map(|(v, _)| (*v).clone())
        .expect("at least one world");
    let at = worlds
        .iter()
        .zip(values.iter())
        .filter(|(_, v)| **v != default)
        .map(|(w, v)| (w.id.clone(), v.clone()))
        .collect();
    PerWorld { default, at }
}

fn to_file(p: &ModelParts) -> ModelFile {
    let fact = |f: &FactId| p.facts[f.0].clone();
    let agent = |a: &AgentId| p.agents[a.0].clone();
    let role = |r: &RoleId| p.roles[r.0].clone();
    let atom = |a: &ControlAtom| match *a {
        ControlAtom::Fact(f) => AtomEntry::Fact(p.facts[f.0].clone()),
        ControlAtom::InCharge { org, role, fact } => AtomEntry::InCharge {
            incharge: InChargeEntry {
                org: p.orgs[org.0].id.clone(),
                role: p.roles[role.0].clone(),
                fact: p.facts[fact.0].clone(),
            },
        },
    };
    let atoms = |v: &Vec<AtomSet>| collapse(&p.worlds, v.iter().map(|s| s.iter().map(atom).collect()).collect());
    let label = |(a, r): &(AgentId, RoleId)| LabelEntry {
        agent: agent(a),
        role: role(r),
    };
    let caps = &p.capabilities;
    let capabilities = CapabilitiesFile {
        c: caps
            .c
            .iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|s| !s.is_empty()))
            .map(|(i, v)| (p.agents[i].clone(), atoms(v)))
            .collect(),
        cn: caps
            .cn
            .iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|s| !s.is_empty()))
            .map(|(i, v)| (p.roles[i].clone(), atoms(v)))
            .collect(),
        cr: caps
            .cr
            .iter()
            .map(|((a, r), v)| (format!("{}:{}", agent(a), role(r)), atoms(v)))
            .collect(),
    };
    let orgs = p
        .orgs
        .iter()
        .map(|o| {
            let facts = |v: &Vec<BTreeSet<FactId>>| {
                collapse(&p.worlds, v.iter().map(|s| s.iter().map(fact).collect()).collect())
            };
            let mut objective_roles: BTreeSet<RoleId> = BTreeSet::new();
            for m in &o.objectives {
                objective_roles.extend(m.keys());
            }
            OrgFile {
                id: o.id.clone(),
                members: collapse(
                    &p.worlds,
                    o.members.iter().map(|s| s.iter().map(agent).collect()).collect(),
                ),
                roles: collapse(
                    &p.worlds,
                    o.roles.iter().map(|s| s.iter().map(role).collect()).collect(),
                ),
                rea: collapse(
                    &p.worlds,
                    o.rea.iter().map(|s| s.iter().map(label).collect()).collect(),
                ),
                dep: collapse(
                    &p.worlds,
                    o.dep
                        .iter()
                        .map(|s| s.iter().map(|(a, b)| (role(a), role(b))).collect())
                        .collect(),
                ),
                dep_closure: false,
                desires: facts(&o.desires),
                objectives: objective_roles
                    .iter()
                    .map(|r| {
                        let per: Vec<Vec<String>> = o
                            .objectives
                            .iter()
                            .map(|m| m.get(r).into_iter().flatten().map(fact).collect())
                            .collect();
                        (role(r), collapse(&p.worlds, per))
                    })
                    .collect(),
                know_plus: facts(&o.know_plus),
                know_minus: facts(&o.know_minus),
            }
        })
        .collect();
    ModelFile {
        facts: p.facts.clone(),
        agents: p.agents.clone(),
        roles: p.roles.clone(),
        worlds: p
            .worlds
            .iter()
            .map(|w| WorldEntry {
                id: w.id.clone(),
                facts: w.facts.iter().map(fact).collect(),
            })
            .collect(),
        transitions: p
            .transitions
            .iter()
            .map(|t| TransitionEntry {
                from: p.worlds[t.src.0].id.clone(),
                to: p.worlds[t.dst.0].id.clone(),
                labels: t.labels.iter().map(label).collect(),
            })
            .collect(),
        capabilities,
        orgs,
        config: ConfigFile {
            totality: p.totality,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_world(label_role: &str) -> String {
        format!(
            r#"{{
            "facts": ["p"], "agents": ["a", "t"], "roles": ["r", "monopolist"],
            "worlds": [{{"id": "w0", "facts": []}}, {{"id": "w1", "facts": ["p"]}}],
            "transitions": [
                {{"from": "w0", "to": "w1", "labels": [{{"agent": "t", "role": "{label_role}"}}]}},
                {{"from": "w1", "to": "w1"}}
            ],
            "orgs": [{{"id": "O", "members": {{"default": ["a", "t"]}},
                       "roles": {{"default": ["r", "monopolist"]}},
                       "rea": {{"default": [{{"agent": "t", "role": "r"}}]}},
                       "depClosure": true}}]
        }}"#
        )
    }

    #[test]
    fn label_without_rea_is_rejected() {
        let err = load_model(&two_world("monopolist")).unwrap_err();
        assert!(err.to_string().contains("label without rea"), "{err}");
        assert!(load_model(&two_world("r")).is_ok());
    }

    #[test]
    fn zero_worlds_is_rejected() {
        let err = load_model(r#"{"facts":["p"],"agents":["a"],"worlds":[]}"#).unwrap_err();
        assert_eq!(err.to_string(), "W non-empty violated");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = load_model("{\n  \"facts\": [\"p\",]\n}").unwrap_err();
        match err {
            ModelError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_duplicate_ids() {
        let err = load_model(
            r#"{"facts":["p"],"agents":["a"],"worlds":[{"id":"w","facts":["q"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownIdentifier { kind: "fact", .. }));
        let err = load_model(
            r#"{"facts":["p"],"agents":["a","a"],"worlds":[{"id":"w"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::Duplicate { kind: "agent", .. }));
    }

    #[test]
    fn totality_policy() {
        let src = |policy: &str| {
            format!(
                r#"{{"facts":["p"],"agents":["a"],"worlds":[{{"id":"w"}}],
                    "config":{{"totality":"{policy}"}}}}"#
            )
        };
        assert!(matches!(
            load_model(&src("error")),
            Err(ModelError::NoSuccessor(_))
        ));
        let m = load_model(&src("self-loop")).unwrap();
        assert_eq!(m.transitions().len(), 1);
        assert!(m.transitions()[0].labels.is_empty());
    }

    #[test]
    fn knowledge_violation_is_reported() {
        let m = load_model(
            r#"{"facts":["p"],"agents":["a"],"worlds":[{"id":"w0"}],
                "transitions":[{"from":"w0","to":"w0"}],
                "orgs":[{"id":"O","knowPlus":{"default":["p"]}}]}"#,
        )
        .unwrap();
        let v = validate_model(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "KnowledgeSoundness");
        assert_eq!(v[0].world(), "w0");
    }

    #[test]
    fn missing_transitive_pair_is_reported() {
        let m = load_model(
            r#"{"facts":["p"],"agents":["x"],"roles":["a","b","c"],"worlds":[{"id":"w"}],
                "transitions":[{"from":"w","to":"w"}],
                "orgs":[{"id":"O","roles":{"default":["a","b","c"]},
                         "dep":{"default":[["a","a"],["b","b"],["c","c"],["a","b"],["b","c"]]}}]}"#,
        )
        .unwrap();
        let v = validate_model(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].invariant(), "Transitivity");
        let closed = close_dependencies(&m);
        assert!(validate_model(&closed).is_empty());
    }

    #[test]
    fn closure_examples() {
        let r = RoleId(0);
        let q = RoleId(1);
        let roles: BTreeSet<_> = [r, q].into();
        let got = closure(&roles, &[(r, q)].into());
        assert_eq!(got, [(r, r), (q, q), (r, q)].into());
        let got = closure(&[r].into(), &BTreeSet::new());
        assert_eq!(got, [(r, r)].into());
    }

    #[test]
    fn per_world_override_and_canonical_roundtrip() {
        let m = load_model(
            r#"{"facts":["p","q"],"agents":["a"],"worlds":[{"id":"w0"},{"id":"w1","facts":["p"]}],
                "transitions":[{"from":"w0","to":"w1"},{"from":"w1","to":"w0"}],
                "capabilities":{"c":{"a":{"default":["p"],"at":{"w1":["q"]}}}}}"#,
        )
        .unwrap();
        let a = m.agent_id("a").unwrap();
        let p = m.fact_id("p").unwrap();
        let q = m.fact_id("q").unwrap();
        assert!(m.c(a, WorldId(0)).contains(&ControlAtom::Fact(p)));
        assert!(m.c(a, WorldId(1)).contains(&ControlAtom::Fact(q)));
        let again = load_model(&m.to_json()).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.digest(), m.digest());
    }
}
