//! The satisfaction engine.
//!
//! [`Checker`] labels each subformula with its satisfying set of worlds,
//! bottom-up, and memoizes the sets so temporal fixpoints and capability
//! checks are shared. The temporal layer has two backends: the standard
//! fixpoint algorithms, and an explicit lasso-path enumeration used as a
//! test oracle on small models.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{Formula, Holder, RoleSel};
use crate::model::{AgentId, AtomSet, ControlAtom, Model, OrgId, RoleId, WorldId};

/// A set of worlds, indexed by [`WorldId`].
pub type WorldSet = FixedBitSet;

/// Largest model the lasso oracle accepts.
pub const ORACLE_BOUND: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("ill-formed formula: {0}")]
    IllFormed(String),
    #[error("model has {worlds} worlds; the path oracle is limited to {bound}")]
    OracleBound { worlds: usize, bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temporal {
    Fixpoint,
    Lasso,
}

/// A holder with names resolved against a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedHolder {
    Agent(AgentId),
    Agents(Vec<AgentId>),
    Rea(AgentId, RoleId),
    ReaGroup(Vec<AgentId>, Vec<RoleId>),
}

pub fn resolve_holder(m: &Model, h: &Holder) -> Result<ResolvedHolder, EvalError> {
    let agent = |n: &String| {
        m.agent_id(n).ok_or_else(|| EvalError::Unknown {
            kind: "agent",
            name: n.clone(),
        })
    };
    let role = |n: &String| {
        m.role_id(n).ok_or_else(|| EvalError::Unknown {
            kind: "role",
            name: n.clone(),
        })
    };
    let nonempty = |s: &BTreeSet<String>| {
        if s.is_empty() {
            Err(EvalError::IllFormed("empty holder group".into()))
        } else {
            Ok(())
        }
    };
    Ok(match h {
        Holder::Agent(a) => ResolvedHolder::Agent(agent(a)?),
        Holder::Agents(z) => {
            nonempty(z)?;
            ResolvedHolder::Agents(z.iter().map(agent).collect::<Result<_, _>>()?)
        }
        Holder::Rea(a, r) => ResolvedHolder::Rea(agent(a)?, role(r)?),
        Holder::ReaGroup(v, u) => {
            nonempty(v)?;
            nonempty(u)?;
            ResolvedHolder::ReaGroup(
                v.iter().map(agent).collect::<Result<_, _>>()?,
                u.iter().map(role).collect::<Result<_, _>>()?,
            )
        }
    })
}

/// The control atoms a holder has at `w`: `c`, the union of `c`, `cr`, or
/// the union of `cr` over the licensed (agent, role) pairs.
pub fn controlled(m: &Model, h: &ResolvedHolder, w: WorldId) -> AtomSet {
    match h {
        ResolvedHolder::Agent(a) => m.c(*a, w).clone(),
        ResolvedHolder::Agents(z) => z.iter().flat_map(|a| m.c(*a, w)).copied().collect(),
        ResolvedHolder::Rea(a, r) => m.cr(*a, *r, w).cloned().unwrap_or_default(),
        ResolvedHolder::ReaGroup(v, u) => v
            .iter()
            .flat_map(|a| u.iter().filter_map(move |r| m.cr(*a, *r, w)))
            .flatten()
            .copied()
            .collect(),
    }
}

/// Indices (into [`Model::transitions`]) of the transitions out of `w` that
/// the holder influences.
pub fn influence_of(m: &Model, h: &ResolvedHolder, w: WorldId) -> Vec<usize> {
    m.outgoing(w)
        .iter()
        .copied()
        .filter(|&i| {
            m.transitions()[i].labels.iter().any(|&(a, r)| match h {
                ResolvedHolder::Agent(b) => a == *b,
                ResolvedHolder::Agents(z) => z.contains(&a),
                ResolvedHolder::Rea(b, q) => a == *b && r == *q,
                ResolvedHolder::ReaGroup(v, u) => {
                    v.contains(&a) && u.contains(&r) && m.plays_any(w, a, r)
                }
            })
        })
        .collect()
}

/// Transition influence of a holder at a world.
pub fn influence(m: &Model, w: WorldId, h: &Holder) -> Result<Vec<usize>, EvalError> {
    Ok(influence_of(m, &resolve_holder(m, h)?, w))
}

/// Whether some consistent partial assignment over `atoms` entails the set
/// `target`, both taken relative to the worlds of the model.
///
/// A partial assignment picks out a union of "signature classes" (worlds
/// that agree on every atom), so it suffices to find one non-empty class
/// inside `target`.
pub fn sigma_entails_set(m: &Model, atoms: &AtomSet, target: &WorldSet) -> bool {
    if atoms.is_empty() {
        return false;
    }
    let atoms: Vec<ControlAtom> = atoms.iter().copied().collect();
    let signature =
        |w: WorldId| -> Vec<bool> { atoms.iter().map(|&a| m.atom_holds(a, w)).collect() };
    let mut classes: HashMap<Vec<bool>, bool> = HashMap::new();
    for w in m.world_ids() {
        let inside = target.contains(w.0);
        classes
            .entry(signature(w))
            .and_modify(|all| *all &= inside)
            .or_insert(inside);
    }
    classes.values().any(|&all| all)
}

pub fn sigma_entails(
    m: &Model,
    atoms: &AtomSet,
    phi: &Formula,
    _w: WorldId,
) -> Result<bool, EvalError> {
    let target = Checker::new(m).sat(phi)?;
    Ok(sigma_entails_set(m, atoms, &target))
}

/// Evaluates `f` at a single world.
pub fn eval(m: &Model, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
    Checker::new(m).holds(w, f)
}

/// The set of worlds satisfying `f`.
pub fn eval_all(m: &Model, f: &Formula) -> Result<WorldSet, EvalError> {
    Checker::new(m).sat(f)
}

/// Sorted world ids of a set.
pub fn worlds_of(set: &WorldSet) -> Vec<WorldId> {
    set.ones().map(WorldId).collect()
}

pub struct Checker<'m> {
    model: &'m Model,
    temporal: Temporal,
    scope: Option<OrgId>,
    memo: HashMap<Formula, WorldSet>,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m Model) -> Checker<'m> {
        Checker {
            model,
            temporal: Temporal::Fixpoint,
            scope: None,
            memo: HashMap::new(),
        }
    }

    /// A checker whose temporal operators are decided by lasso-path
    /// enumeration instead of fixpoints.
    pub fn oracle(model: &'m Model) -> Result<Checker<'m>, EvalError> {
        if model.world_count() > ORACLE_BOUND {
            return Err(EvalError::OracleBound {
                worlds: model.world_count(),
                bound: ORACLE_BOUND,
            });
        }
        Ok(Checker {
            temporal: Temporal::Lasso,
            ..Checker::new(model)
        })
    }

    /// Restricts initiative to the roles of a single organization.
    pub fn scoped(mut self, org: OrgId) -> Checker<'m> {
        self.scope = Some(org);
        self
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn holds(&mut self, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.sat(f)?.contains(w.0))
    }

    pub fn sat(&mut self, f: &Formula) -> Result<WorldSet, EvalError> {
        if let Some(s) = self.memo.get(f) {
            return Ok(s.clone());
        }
        let s = self.compute(f)?;
        self.memo.insert(f.clone(), s.clone());
        Ok(s)
    }

    fn n(&self) -> usize {
        self.model.world_count()
    }

    fn full(&self) -> WorldSet {
        let mut s = WorldSet::with_capacity(self.n());
        s.insert_range(..);
        s
    }

    fn filter(&self, mut pred: impl FnMut(WorldId) -> bool) -> WorldSet {
        let mut s = WorldSet::with_capacity(self.n());
        for w in self.model.world_ids() {
            if pred(w) {
                s.insert(w.0);
            }
        }
        s
    }

    fn try_filter(
        &mut self,
        mut pred: impl FnMut(&mut Self, WorldId) -> Result<bool, EvalError>,
    ) -> Result<WorldSet, EvalError> {
        let mut s = WorldSet::with_capacity(self.n());
        for w in self.model.world_ids() {
            if pred(self, w)? {
                s.insert(w.0);
            }
        }
        Ok(s)
    }

    fn compute(&mut self, f: &Formula) -> Result<WorldSet, EvalError> {
        let m = self.model;
        Ok(match f {
            Formula::True => self.full(),
            Formula::False => WorldSet::with_capacity(self.n()),
            Formula::Atom(p) => {
                let fact = m.fact_id(p).ok_or_else(|| EvalError::Unknown {
                    kind: "fact",
                    name: p.clone(),
                })?;
                self.filter(|w| m.holds_fact(w, fact))
            }
            Formula::Not(a) => {
                let mut s = self.sat(a)?;
                s.toggle_range(..);
                s
            }
            Formula::And(a, b) => {
                let mut s = self.sat(a)?;
                s.intersect_with(&self.sat(b)?);
                s
            }
            Formula::Or(a, b) => {
                let mut s = self.sat(a)?;
                s.union_with(&self.sat(b)?);
                s
            }
            Formula::Implies(a, b) => {
                let mut s = self.sat(a)?;
                s.toggle_range(..);
                s.union_with(&self.sat(b)?);
                s
            }
            Formula::Iff(a, b) => {
                let mut s = self.sat(a)?;
                s.symmetric_difference_with(&self.sat(b)?);
                s.toggle_range(..);
                s
            }
            Formula::AX(a) | Formula::EX(a) | Formula::AF(a) | Formula::EF(a)
            | Formula::AG(a) | Formula::EG(a) => {
                let body = self.sat(a)?;
                match self.temporal {
                    Temporal::Fixpoint => fixpoint_unary(m, f, &body),
                    Temporal::Lasso => lasso_unary(m, f, &body),
                }
            }
            Formula::AU(a, b) | Formula::EU(a, b) => {
                let l = self.sat(a)?;
                let r = self.sat(b)?;
                let universal = matches!(f, Formula::AU(..));
                match self.temporal {
                    Temporal::Fixpoint => until(m, universal, &l, &r),
                    Temporal::Lasso => lasso_until(m, universal, &l, &r),
                }
            }
            Formula::Cap(h, a) => {
                let h = resolve_holder(m, h)?;
                let body = self.sat(a)?;
                self.filter(|w| cap_at(m, &h, w, &body))
            }
            Formula::JointCap(z, a) => {
                let h = resolve_holder(m, &Holder::Agents(z.clone()))?;
                let ResolvedHolder::Agents(agents) = h else {
                    unreachable!()
                };
                let body = self.sat(a)?;
                self.filter(|w| joint_cap_at(m, &agents, w, &body))
            }
            Formula::Ability(h, a) => {
                let h = resolve_holder(m, h)?;
                let body = self.sat(a)?;
                self.filter(|w| ability_at(m, &h, w, &body))
            }
            Formula::Attempt(h, a) => {
                let h = resolve_holder(m, h)?;
                let body = self.sat(a)?;
                self.filter(|w| attempt_at(m, &h, w, &body))
            }
            Formula::InControl(h) => {
                let h = resolve_holder(m, h)?;
                self.filter(|w| in_control_at(m, &h, w))
            }
            Formula::Stit(h, a) => {
                let h = resolve_holder(m, h)?;
                let body = self.sat(a)?;
                self.filter(|w| attempt_at(m, &h, w, &body) && in_control_at(m, &h, w))
            }
            Formula::Initiative(sel, a) => self.initiative(sel, a)?,
            Formula::Member { agent, org } => {
                let o = self.org(org)?;
                let a = self.agent(agent)?;
                self.filter(|w| m.org(o).members[w.0].contains(&a))
            }
            Formula::RoleOf { role, org } => {
                let o = self.org(org)?;
                let r = self.role(role)?;
                self.filter(|w| m.org(o).roles[w.0].contains(&r))
            }
            Formula::Play { agent, role, org } => {
                let o = self.org(org)?;
                let a = self.agent(agent)?;
                let r = self.role(role)?;
                self.filter(|w| m.org(o).plays(w, a, r))
            }
            Formula::Dep { org, from, to } => {
                let o = self.org(org)?;
                let from = self.roles(from)?;
                let to = self.roles(to)?;
                self.filter(|w| dep_holds(m, o, w, &from, &to))
            }
            Formula::Know { org, body } => {
                let o = self.org(org)?;
                let lits = self.literals(body, true)?;
                let org = m.org(o);
                self.filter(|w| {
                    lits.iter().all(|lit| match *lit {
                        Some((f, true)) => org.know_plus[w.0].contains(&f),
                        Some((f, false)) => org.know_minus[w.0].contains(&f),
                        None => false,
                    })
                })
            }
            Formula::InCharge { org, role, body } => {
                let o = self.org(org)?;
                let r = self.role(role)?;
                let lits = self.literals(body, false)?;
                let org = m.org(o);
                self.filter(|w| {
                    lits.iter()
                        .all(|lit| lit.is_some_and(|(f, _)| org.in_charge(w, r, f)))
                })
            }
            Formula::Desire { org, body } => {
                let o = self.org(org)?;
                let lits = self.literals(body, false)?;
                let org = m.org(o);
                self.filter(|w| {
                    lits.iter()
                        .all(|lit| lit.is_some_and(|(f, _)| org.desires[w.0].contains(&f)))
                })
            }
        })
    }

    fn org(&self, name: &str) -> Result<OrgId, EvalError> {
        self.model.org_id(name).ok_or_else(|| EvalError::Unknown {
            kind: "org",
            name: name.to_string(),
        })
    }

    fn agent(&self, name: &str) -> Result<AgentId, EvalError> {
        self.model.agent_id(name).ok_or_else(|| EvalError::Unknown {
            kind: "agent",
            name: name.to_string(),
        })
    }

    fn role(&self, name: &str) -> Result<RoleId, EvalError> {
        self.model.role_id(name).ok_or_else(|| EvalError::Unknown {
            kind: "role",
            name: name.to_string(),
        })
    }

    fn roles(&self, sel: &RoleSel) -> Result<(bool, Vec<RoleId>), EvalError> {
        let ids = sel
            .names()
            .into_iter()
            .map(|r| self.role(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((matches!(sel, RoleSel::Many(_)), ids))
    }

    /// Decomposes an org-predicate body into `(fact, positive)` literals;
    /// `None` stands for a `true`/`false` leaf, which no label set contains.
    fn literals(
        &self,
        body: &Formula,
        negation: bool,
    ) -> Result<Vec<Option<(crate::model::FactId, bool)>>, EvalError> {
        body.conjuncts()
            .into_iter()
            .map(|c| {
                let fact = |p: &String| {
                    self.model.fact_id(p).ok_or_else(|| EvalError::Unknown {
                        kind: "fact",
                        name: p.clone(),
                    })
                };
                match c {
                    Formula::Atom(p) => Ok(Some((fact(p)?, true))),
                    Formula::Not(inner) if negation => match &**inner {
                        Formula::Atom(p) => Ok(Some((fact(p)?, false))),
                        _ => Err(EvalError::IllFormed(format!(
                            "non-literal inside org predicate: {c}"
                        ))),
                    },
                    Formula::True | Formula::False => Ok(None),
                    _ => Err(EvalError::IllFormed(format!(
                        "non-literal inside org predicate: {c}"
                    ))),
                }
            })
            .collect()
    }

    fn orgs_in_scope(&self) -> Vec<OrgId> {
        match self.scope {
            Some(o) => vec![o],
            None => (0..self.model.orgs().len()).map(OrgId).collect(),
        }
    }

    fn initiative(&mut self, sel: &RoleSel, phi: &Formula) -> Result<WorldSet, EvalError> {
        let m = self.model;
        let (_, roles) = self.roles(sel)?;
        let orgs = self.orgs_in_scope();
        match sel {
            RoleSel::One(_) => {
                let r = roles[0];
                self.try_filter(|ck, w| {
                    for &o in &orgs {
                        let players: Vec<AgentId> = m.org(o).players(w, r).collect();
                        for a in players {
                            let goal = single_initiative_goal(m, o, w, a, r, phi);
                            if ck.holds(w, &goal)? {
                                return Ok(true);
                            }
                        }
                    }
                    Ok(false)
                })
            }
            RoleSel::Many(_) => self.try_filter(|ck, w| {
                for &o in &orgs {
                    let org = m.org(o);
                    let players: BTreeSet<AgentId> = roles
                        .iter()
                        .flat_map(|&r| org.players(w, r))
                        .collect();
                    let players: Vec<AgentId> = players.into_iter().collect();
                    for u in nonempty_subsets(&players) {
                        let goal = group_initiative_goal(m, o, w, &u, &roles, phi);
                        if ck.holds(w, &goal)? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }),
        }
    }
}

/// `AF (H_(a,r) φ ∨ ⋁_q H_(a,r) incharge(O, q, φ))` over the other roles
/// `q` of the organization at `w`, with the delegation disjuncts only when
/// `φ` is a conjunction of facts.
pub fn single_initiative_goal(
    m: &Model,
    o: OrgId,
    w: WorldId,
    a: AgentId,
    r: RoleId,
    phi: &Formula,
) -> Formula {
    let holder = Holder::Rea(m.agent_name(a).to_string(), m.role_name(r).to_string());
    let org = m.org(o);
    let mut options = vec![Formula::Attempt(holder.clone(), Box::new(phi.clone()))];
    if phi.positive_atoms().is_some() {
        for &q in org.roles[w.0].iter().filter(|&&q| q != r) {
            options.push(Formula::Attempt(
                holder.clone(),
                Box::new(Formula::InCharge {
                    org: org.id.clone(),
                    role: m.role_name(q).to_string(),
                    body: Box::new(phi.clone()),
                }),
            ));
        }
    }
    Formula::AF(Box::new(Formula::disj(options)))
}

/// Group form: the agents `U` enacting roles `Z` eventually attempt `φ`, or
/// attempt to put some non-empty set of roles outside `Z` jointly in charge
/// of it.
pub fn group_initiative_goal(
    m: &Model,
    o: OrgId,
    w: WorldId,
    agents: &[AgentId],
    roles: &[RoleId],
    phi: &Formula,
) -> Formula {
    let holder = Holder::ReaGroup(
        agents.iter().map(|&a| m.agent_name(a).to_string()).collect(),
        roles.iter().map(|&r| m.role_name(r).to_string()).collect(),
    );
    let org = m.org(o);
    let mut options = vec![Formula::Attempt(holder.clone(), Box::new(phi.clone()))];
    if phi.positive_atoms().is_some() {
        let all: Vec<RoleId> = org.roles[w.0]
            .iter()
            .copied()
            .filter(|q| !roles.contains(q))
            .collect();
        for qs in nonempty_subsets(&all) {
            let target = Formula::conj(qs.iter().map(|&q| Formula::InCharge {
                org: org.id.clone(),
                role: m.role_name(q).to_string(),
                body: Box::new(phi.clone()),
            }));
            options.push(Formula::Attempt(holder.clone(), Box::new(target)));
        }
    }
    Formula::AF(Box::new(Formula::disj(options)))
}

/// All non-empty subsets, smallest first.
pub fn nonempty_subsets<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    let n = items.len();
    let mut out: Vec<Vec<T>> = (1u64..(1u64 << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| items[i])
                .collect()
        })
        .collect();
    out.sort_by_key(|s| s.len());
    out
}

pub(crate) fn dep_holds(
    m: &Model,
    o: OrgId,
    w: WorldId,
    from: &(bool, Vec<RoleId>),
    to: &(bool, Vec<RoleId>),
) -> bool {
    let org = m.org(o);
    let (from_group, from) = from;
    let (_, to) = to;
    if *from_group {
        to.iter()
            .all(|&q| from.iter().any(|&r| org.dep(w, r, q)))
    } else {
        to.iter().all(|&q| org.dep(w, from[0], q))
    }
}

/// Some world other than `w` falsifies the body.
pub(crate) fn falsifiable_elsewhere(m: &Model, w: WorldId, body: &WorldSet) -> bool {
    m.world_ids().any(|v| v != w && !body.contains(v.0))
}

pub fn cap_at(m: &Model, h: &ResolvedHolder, w: WorldId, body: &WorldSet) -> bool {
    falsifiable_elsewhere(m, w, body) && sigma_entails_set(m, &controlled(m, h, w), body)
}

pub fn joint_cap_at(m: &Model, z: &[AgentId], w: WorldId, body: &WorldSet) -> bool {
    cap_at(m, &ResolvedHolder::Agents(z.to_vec()), w, body)
        && nonempty_subsets(z)
            .into_iter()
            .filter(|s| s.len() < z.len())
            .all(|s| !cap_at(m, &ResolvedHolder::Agents(s), w, body))
}

pub fn ability_at(m: &Model, h: &ResolvedHolder, w: WorldId, body: &WorldSet) -> bool {
    cap_at(m, h, w, body)
        && influence_of(m, h, w)
            .iter()
            .any(|&i| body.contains(m.transitions()[i].dst.0))
}

pub fn attempt_at(m: &Model, h: &ResolvedHolder, w: WorldId, body: &WorldSet) -> bool {
    ability_at(m, h, w, body)
        && influence_of(m, h, w)
            .iter()
            .all(|&i| body.contains(m.transitions()[i].dst.0))
}

pub fn in_control_at(m: &Model, h: &ResolvedHolder, w: WorldId) -> bool {
    influence_of(m, h, w).len() == m.outgoing(w).len()
}

// ---------------------------------------------------------------------------
// Fixpoint backend

fn pre_exists(m: &Model, s: &WorldSet) -> WorldSet {
    let mut out = WorldSet::with_capacity(m.world_count());
    for w in m.world_ids() {
        if m.successors(w).any(|v| s.contains(v.0)) {
            out.insert(w.0);
        }
    }
    out
}

fn pre_forall(m: &Model, s: &WorldSet) -> WorldSet {
    let mut out = WorldSet::with_capacity(m.world_count());
    for w in m.world_ids() {
        if m.successors(w).all(|v| s.contains(v.0)) {
            out.insert(w.0);
        }
    }
    out
}

/// Least fixpoint of `Z = r ∪ (l ∩ pre(Z))`.
fn until(m: &Model, universal: bool, l: &WorldSet, r: &WorldSet) -> WorldSet {
    let mut z = r.clone();
    loop {
        let mut next = if universal {
            pre_forall(m, &z)
        } else {
            pre_exists(m, &z)
        };
        next.intersect_with(l);
        next.union_with(r);
        if next == z {
            return z;
        }
        z = next;
    }
}

/// Greatest fixpoint of `Z = s ∩ EX Z`.
fn eg(m: &Model, s: &WorldSet) -> WorldSet {
    let mut z = s.clone();
    loop {
        let mut next = pre_exists(m, &z);
        next.intersect_with(s);
        if next == z {
            return z;
        }
        z = next;
    }
}

fn fixpoint_unary(m: &Model, f: &Formula, body: &WorldSet) -> WorldSet {
    let mut all = WorldSet::with_capacity(m.world_count());
    all.insert_range(..);
    let complement = |s: &WorldSet| {
        let mut c = s.clone();
        c.toggle_range(..);
        c
    };
    match f {
        Formula::AX(_) => pre_forall(m, body),
        Formula::EX(_) => pre_exists(m, body),
        Formula::AF(_) => until(m, true, &all, body),
        Formula::EF(_) => until(m, false, &all, body),
        Formula::EG(_) => eg(m, body),
        Formula::AG(_) => complement(&until(m, false, &all, &complement(body))),
        _ => unreachable!("not a unary temporal operator"),
    }
}

// ---------------------------------------------------------------------------
// Lasso backend

/// Visits every lasso from `start`: a simple path `v0..vk` plus a back edge
/// from `vk` to some `vi`. The callback receives the path positions in
/// order and the index `i` where the loop re-enters.
fn for_each_lasso(m: &Model, start: WorldId, visit: &mut impl FnMut(&[WorldId], usize) -> bool) {
    fn go(
        m: &Model,
        path: &mut Vec<WorldId>,
        visit: &mut impl FnMut(&[WorldId], usize) -> bool,
    ) -> bool {
        let last = *path.last().expect("non-empty path");
        let succs: Vec<WorldId> = m.successors(last).collect();
        for s in succs {
            if let Some(i) = path.iter().position(|&v| v == s) {
                if !visit(path, i) {
                    return false;
                }
            } else {
                path.push(s);
                let go_on = go(m, path, visit);
                path.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
    let mut path = vec![start];
    go(m, &mut path, visit);
}

/// Quantifies a path predicate over the lassos from every world. The
/// predicate sees the positions of the path in order (the loop only revisits
/// them) and the loop index.
fn lasso_quantify(
    m: &Model,
    universal: bool,
    pred: impl Fn(&[WorldId], usize) -> bool,
) -> WorldSet {
    let mut out = WorldSet::with_capacity(m.world_count());
    for w in m.world_ids() {
        let mut verdict = universal;
        for_each_lasso(m, w, &mut |path, i| {
            let ok = pred(path, i);
            if ok != universal {
                verdict = ok;
                false
            } else {
                true
            }
        });
        if verdict {
            out.insert(w.0);
        }
    }
    out
}

fn path_until(path: &[WorldId], l: &WorldSet, r: &WorldSet) -> bool {
    for v in path {
        if r.contains(v.0) {
            return true;
        }
        if !l.contains(v.0) {
            return false;
        }
    }
    false
}

fn lasso_unary(m: &Model, f: &Formula, body: &WorldSet) -> WorldSet {
    let next = |path: &[WorldId], i: usize| -> WorldId {
        if path.len() > 1 {
            path[1]
        } else {
            path[i]
        }
    };
    match f {
        Formula::AX(_) | Formula::EX(_) => {
            lasso_quantify(m, matches!(f, Formula::AX(_)), |p, i| {
                body.contains(next(p, i).0)
            })
        }
        Formula::AF(_) | Formula::EF(_) => {
            lasso_quantify(m, matches!(f, Formula::AF(_)), |p, _| {
                p.iter().any(|v| body.contains(v.0))
            })
        }
        Formula::AG(_) | Formula::EG(_) => {
            lasso_quantify(m, matches!(f, Formula::AG(_)), |p, _| {
                p.iter().all(|v| body.contains(v.0))
            })
        }
        _ => unreachable!("not a unary temporal operator"),
    }
}

fn lasso_until(m: &Model, universal: bool, l: &WorldSet, r: &WorldSet) -> WorldSet {
    lasso_quantify(m, universal, |p, _| path_until(p, l, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;

    fn holds(m: &Model, w: &str, f: &str) -> bool {
        eval(m, m.world_id(w).unwrap(), &parse(f).unwrap()).unwrap()
    }

    #[test]
    fn fig1_agency_examples() {
        let m = fixtures::fig1();
        assert!(holds(&m, "w0", "G[a] p"));
        assert!(holds(&m, "w0", "H[a] p"));
        assert!(!holds(&m, "w0", "C[a] (p & q)"));
        assert!(!holds(&m, "w0", "G[a] (p & q)"));
        assert!(!holds(&m, "w0", "E[a] p"));
        for w in ["w0", "w1", "w2", "w3", "w4"] {
            assert!(!holds(&m, w, "C[a] true"));
        }
    }

    #[test]
    fn fig1_influence() {
        let m = fixtures::fig1();
        let w0 = m.world_id("w0").unwrap();
        let got: Vec<(String, String)> = influence(&m, w0, &Holder::Agent("a".into()))
            .unwrap()
            .into_iter()
            .map(|i| {
                let t = &m.transitions()[i];
                (m.world_name(t.src).into(), m.world_name(t.dst).into())
            })
            .collect();
        assert_eq!(
            got,
            vec![("w0".into(), "w1".into()), ("w0".into(), "w3".into())]
        );
    }

    #[test]
    fn fig1_sigma() {
        let m = fixtures::fig1();
        let p = ControlAtom::Fact(m.fact_id("p").unwrap());
        let w0 = WorldId(0);
        let atoms: AtomSet = [p].into();
        assert!(sigma_entails(&m, &atoms, &parse("p").unwrap(), w0).unwrap());
        assert!(!sigma_entails(&m, &atoms, &parse("p & q").unwrap(), w0).unwrap());
        assert!(!sigma_entails(&m, &AtomSet::new(), &parse("p").unwrap(), w0).unwrap());
    }

    #[test]
    fn eval_all_reads_valuation() {
        let m = fixtures::fig1();
        let names: Vec<&str> = worlds_of(&eval_all(&m, &parse("p").unwrap()).unwrap())
            .into_iter()
            .map(|w| m.world_name(w))
            .collect();
        assert_eq!(names, ["w1", "w3", "w4"]);
        assert_eq!(eval_all(&m, &Formula::True).unwrap().count_ones(..), 5);
    }

    #[test]
    fn unknown_names_error() {
        let m = fixtures::fig1();
        let err = eval(&m, WorldId(0), &parse("zz").unwrap()).unwrap_err();
        assert!(matches!(err, EvalError::Unknown { kind: "fact", .. }));
        let err = eval(&m, WorldId(0), &parse("C[nobody] p").unwrap()).unwrap_err();
        assert!(matches!(err, EvalError::Unknown { kind: "agent", .. }));
    }

    #[test]
    fn temporal_backends_agree_on_fig1() {
        let m = fixtures::fig1();
        let mut fix = Checker::new(&m);
        let mut las = Checker::oracle(&m).unwrap();
        for f in [
            "AF p", "EF q", "AG (p | q)", "EG !q", "AX p", "EX q", "E[!p U q]", "A[!q U p]",
            "AG true",
        ] {
            let f = parse(f).unwrap();
            assert_eq!(fix.sat(&f).unwrap(), las.sat(&f).unwrap(), "{f}");
        }
    }

    #[test]
    fn subsets_smallest_first() {
        let s = nonempty_subsets(&[1, 2, 3]);
        assert_eq!(s.len(), 7);
        assert_eq!(s[0].len(), 1);
        assert_eq!(s[6], vec![1, 2, 3]);
    }
}
