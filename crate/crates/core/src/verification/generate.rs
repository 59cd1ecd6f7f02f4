//! Seeded random models.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    closure, AgentId, AtomSet, Capabilities, ControlAtom, FactId, Model, ModelParts, OrgId,
    OrgStructure, RoleId, Totality, Transition, World, WorldId,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("bound `{0}` must be at least 1")]
    ZeroBound(&'static str),
    #[error("density `{name}` = {value} is outside [0, 1]")]
    Density { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub seed: u64,
    pub max_facts: usize,
    pub max_agents: usize,
    pub max_roles: usize,
    pub max_worlds: usize,
    pub max_out_degree: usize,
    /// Chance that a licensed (agent, role) pair labels a transition.
    pub label_density: f64,
    /// Chance that an agent controls a given fact.
    pub capability_density: f64,
}

impl GenParams {
    /// Bounds `(facts, agents, roles, worlds, out-degree)` with default
    /// densities.
    pub fn new(seed: u64, bounds: [usize; 5]) -> GenParams {
        let [max_facts, max_agents, max_roles, max_worlds, max_out_degree] = bounds;
        GenParams {
            seed,
            max_facts,
            max_agents,
            max_roles,
            max_worlds,
            max_out_degree,
            label_density: 0.5,
            capability_density: 0.5,
        }
    }

    pub fn with_seed(&self, seed: u64) -> GenParams {
        GenParams {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        for (name, v) in [
            ("facts", self.max_facts),
            ("agents", self.max_agents),
            ("roles", self.max_roles),
            ("worlds", self.max_worlds),
            ("out-degree", self.max_out_degree),
        ] {
            if v == 0 {
                return Err(GenError::ZeroBound(name));
            }
        }
        for (name, value) in [
            ("label", self.label_density),
            ("capability", self.capability_density),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::Density { name, value });
            }
        }
        Ok(())
    }
}

impl Default for GenParams {
    /// The bounds used by the soundness runs: 4 facts, 3 agents, 2 roles,
    /// 8 worlds, out-degree 3.
    fn default() -> GenParams {
        GenParams::new(0, [4, 3, 2, 8, 3])
    }
}

const ORG: OrgId = OrgId(0);

/// Builds a valid model from `p`; the same parameters always yield the same
/// model.
///
/// There is one organization, `O`. Role-enacting pairs are drawn first and
/// everything that depends on them (labels, `cn`, `cr`) is derived from
/// them, so every invariant of [`crate::model::validate_model`] holds by
/// construction.
pub fn generate_model(p: &GenParams) -> Result<Model, GenError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let nf = rng.gen_range(1..=p.max_facts);
    let na = rng.gen_range(1..=p.max_agents);
    let nr = rng.gen_range(1..=p.max_roles);
    let nw = rng.gen_range(1..=p.max_worlds);

    let facts: Vec<FactId> = (0..nf).map(FactId).collect();
    let agents: Vec<AgentId> = (0..na).map(AgentId).collect();
    let roles: Vec<RoleId> = (0..nr).map(RoleId).collect();

    let worlds: Vec<World> = (0..nw)
        .map(|w| World {
            id: format!("w{w}"),
            facts: facts.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
        })
        .collect();

    let mut org = OrgStructure {
        id: "O".into(),
        members: Vec::with_capacity(nw),
        roles: Vec::with_capacity(nw),
        rea: Vec::with_capacity(nw),
        dep: Vec::with_capacity(nw),
        desires: Vec::with_capacity(nw),
        objectives: Vec::with_capacity(nw),
        know_plus: Vec::with_capacity(nw),
        know_minus: Vec::with_capacity(nw),
    };
    for world in &worlds {
        let members: BTreeSet<AgentId> =
            agents.iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
        let rs: BTreeSet<RoleId> = roles.iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
        let mut rea = BTreeSet::new();
        for &a in &members {
            for &r in &rs {
                if rng.gen_bool(0.6) {
                    rea.insert((a, r));
                }
            }
        }
        let mut dep = BTreeSet::new();
        for &r in &rs {
            for &q in &rs {
                if r != q && rng.gen_bool(0.3) {
                    dep.insert((r, q));
                }
            }
        }
        let mut objectives = BTreeMap::new();
        for &r in &rs {
            let obj: BTreeSet<FactId> =
                facts.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            if !obj.is_empty() {
                objectives.insert(r, obj);
            }
        }
        org.desires
            .push(facts.iter().copied().filter(|_| rng.gen_bool(0.3)).collect());
        org.know_plus
            .push(world.facts.iter().copied().filter(|_| rng.gen_bool(0.5)).collect());
        org.know_minus.push(
            facts
                .iter()
                .copied()
                .filter(|f| !world.facts.contains(f) && rng.gen_bool(0.5))
                .collect(),
        );
        org.dep.push(closure(&rs, &dep));
        org.members.push(members);
        org.roles.push(rs);
        org.rea.push(rea);
        org.objectives.push(objectives);
    }

    // Delegation atoms an agent may additionally control.
    let incharge_atoms: Vec<ControlAtom> = roles
        .iter()
        .flat_map(|&role| {
            facts.iter().map(move |&fact| ControlAtom::InCharge {
                org: ORG,
                role,
                fact,
            })
        })
        .collect();
    let pick = |rng: &mut ChaCha8Rng, fact_p: f64, ic_p: f64| -> AtomSet {
        let mut s: AtomSet = facts
            .iter()
            .filter(|_| rng.gen_bool(fact_p))
            .map(|&f| ControlAtom::Fact(f))
            .collect();
        s.extend(incharge_atoms.iter().filter(|_| rng.gen_bool(ic_p)).copied());
        s
    };

    let dens = p.capability_density;
    let c: Vec<Vec<AtomSet>> = agents
        .iter()
        .map(|_| (0..nw).map(|_| pick(&mut rng, dens, dens / 4.0)).collect())
        .collect();

    // cn(r, w) is a subset of what every player of r controls at w.
    let mut cn = Vec::with_capacity(nr);
    for &r in &roles {
        let mut per_world = Vec::with_capacity(nw);
        for w in 0..nw {
            let players: Vec<AgentId> = org.players(WorldId(w), r).collect();
            let pool: AtomSet = match players.split_first() {
                Some((first, rest)) => c[first.0][w]
                    .iter()
                    .filter(|atom| rest.iter().all(|b| c[b.0][w].contains(atom)))
                    .copied()
                    .collect(),
                None => pick(&mut rng, dens, 0.0),
            };
            per_world.push(pool.into_iter().filter(|_| rng.gen_bool(0.5)).collect());
        }
        cn.push(per_world);
    }

    // cr(a, r, w) extends c(a, w) for pairs that are ever licensed.
    let mut cr = BTreeMap::new();
    for &a in &agents {
        for &r in &roles {
            if !(0..nw).any(|w| org.rea[w].contains(&(a, r))) || rng.gen_bool(0.3) {
                continue;
            }
            let per_world: Vec<AtomSet> = (0..nw)
                .map(|w| {
                    let mut s = c[a.0][w].clone();
                    s.extend(pick(&mut rng, dens / 2.0, dens / 2.0));
                    s
                })
                .collect();
            cr.insert((a, r), per_world);
        }
    }

    let mut transitions = Vec::new();
    let targets: Vec<WorldId> = (0..nw).map(WorldId).collect();
    for src in 0..nw {
        let degree = rng.gen_range(1..=p.max_out_degree.min(nw));
        let rea: Vec<(AgentId, RoleId)> = org.rea[src].iter().copied().collect();
        for &dst in targets.choose_multiple(&mut rng, degree) {
            let labels = rea
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(p.label_density))
                .collect();
            transitions.push(Transition {
                src: WorldId(src),
                dst,
                labels,
            });
        }
    }
    transitions.sort_by_key(|t| (t.src, t.dst));

    let parts = ModelParts {
        facts: (0..nf).map(|i| format!("p{i}")).collect(),
        agents: (0..na).map(|i| format!("a{i}")).collect(),
        roles: (0..nr).map(|i| format!("r{i}")).collect(),
        worlds,
        transitions,
        capabilities: Capabilities { c, cn, cr },
        orgs: vec![org],
        totality: Totality::Error,
    };
    Ok(Model::from_parts(parts).expect("generated parts are well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn small_bounds() {
        let m = generate_model(&GenParams::new(1, [2, 2, 1, 4, 2])).unwrap();
        assert!(validate_model(&m).is_empty());
        assert!(m.world_count() <= 4 && m.facts().len() <= 2);
    }

    #[test]
    fn deterministic() {
        let p = GenParams::default().with_seed(42);
        assert_eq!(generate_model(&p).unwrap(), generate_model(&p).unwrap());
    }

    #[test]
    fn five_hundred_seeds_validate() {
        let base = GenParams::default();
        for seed in 0..500 {
            let m = generate_model(&base.with_seed(seed)).unwrap();
            let v = validate_model(&m);
            assert!(v.is_empty(), "seed {seed}: {v:?}");
            for w in m.world_ids() {
                assert!(m.outgoing(w).len() <= base.max_out_degree);
            }
        }
    }

    #[test]
    fn zero_bounds_rejected() {
        let mut p = GenParams::default();
        p.max_roles = 0;
        assert_eq!(generate_model(&p), Err(GenError::ZeroBound("roles")));
        let mut p = GenParams::default();
        p.label_density = 1.5;
        assert!(matches!(p.validate(), Err(GenError::Density { .. })));
    }
}
