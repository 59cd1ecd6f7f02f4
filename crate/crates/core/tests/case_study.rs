use std::collections::BTreeSet;

use lao_core::fixtures;
use lao_core::formula::parse;
use lao_core::model::{ControlAtom, Model, ModelParts};
use lao_core::org::{self, FormulaPool, Structure};
use lao_core::semantics::{eval, eval_all, worlds_of};

fn holds(m: &Model, w: &str, f: &str) -> bool {
    let w = m.world_id(w).unwrap_or_else(|| panic!("no world {w}"));
    eval(m, w, &parse(f).unwrap()).unwrap()
}

fn analysis(m: &Model) -> org::Analysis {
    let o = m.org_id("Ogas").unwrap();
    org::analyze(m, o, &FormulaPool::default_for(m, o)).unwrap()
}

fn verdict(a: &org::Analysis, p: &str) -> bool {
    a.verdict(p).unwrap().holds
}

fn structures(names: &[Structure]) -> BTreeSet<Structure> {
    names.iter().copied().collect()
}

#[test]
fn gas0_verdicts() {
    let m = fixtures::gas0();
    let a = analysis(&m);
    for p in [
        "structurally-well-defined",
        "well-defined",
        "successful",
        "good",
        "good-property",
        "delegation-closed",
    ] {
        assert!(verdict(&a, p), "{p}: {:?}", a.verdict(p));
    }
    assert_eq!(
        a.classification,
        structures(&[Structure::Hierarchy, Structure::FlatHierarchy])
    );
}

#[test]
fn gas0prime_verdicts() {
    let m = fixtures::gas0prime();
    let a = analysis(&m);
    assert!(verdict(&a, "well-defined"), "{:?}", a.verdict("well-defined"));
    assert!(verdict(&a, "successful"), "{:?}", a.verdict("successful"));
    let eff = a.verdict("efficient").unwrap();
    assert!(!eff.holds);
    assert!(!eff.witnesses.is_empty());
    assert_eq!(
        a.classification,
        structures(&[
            Structure::Network,
            Structure::FullyConnectedNetwork,
            Structure::Team
        ])
    );
}

#[test]
fn informed_network_is_efficient() {
    let m = fixtures::load("gas0prime_informed");
    let a = analysis(&m);
    assert!(verdict(&a, "efficient"), "{:?}", a.verdict("efficient"));
}

#[test]
fn derivation_replay() {
    let m = fixtures::gas0prime();
    for (step, world, f) in fixtures::GAS0PRIME_DERIVATION {
        assert!(holds(&m, world, f), "step {step} at {world}: {f}");
    }
}

#[test]
fn gas0_membership_everywhere() {
    let m = fixtures::gas0();
    let s = eval_all(&m, &parse("member(t, Ogas)").unwrap()).unwrap();
    assert_eq!(s.count_ones(..), m.world_count());
    let f = parse("desire(Ogas, provide_gas) -> I[monopolist] provide_gas").unwrap();
    assert_eq!(eval_all(&m, &f).unwrap().count_ones(..), m.world_count());
}

#[test]
fn gas0prime_initial_incharge() {
    let m = fixtures::gas0prime();
    assert!(holds(&m, "s1", "incharge(Ogas, trader, provide_gas)"));
}

fn without_agent(m: &Model, agent: &str) -> Model {
    let a = m.agent_id(agent).unwrap();
    let mut parts: ModelParts = m.parts().clone();
    for o in &mut parts.orgs {
        for w in 0..o.members.len() {
            o.members[w].remove(&a);
            o.rea[w].retain(|(b, _)| *b != a);
        }
    }
    for t in &mut parts.transitions {
        t.labels.retain(|(b, _)| *b != a);
    }
    Model::from_parts(parts).unwrap()
}

#[test]
fn org_capability_depends_on_members() {
    let m = fixtures::gas0();
    let o = m.org_id("Ogas").unwrap();
    let g0 = m.world_id("g0").unwrap();
    let all = parse("buy_gas & transport_gas & local_flow").unwrap();
    assert!(org::org_capability(&m, g0, o, &all).unwrap());
    assert!(org::org_capability(&m, g0, o, &parse("provide_gas").unwrap()).unwrap());

    let reduced = without_agent(&m, "t");
    let buy = parse("buy_gas").unwrap();
    for w in reduced.world_ids() {
        assert!(!org::org_capability(&reduced, w, o, &buy).unwrap());
    }
    let witness = org::capable_subgroup(&m, g0, o, &buy).unwrap().unwrap();
    assert_eq!(witness, vec![m.agent_id("t").unwrap()]);
}

#[test]
fn removing_the_monopolist() {
    let m = fixtures::gas0();
    let mono = m.role_id("monopolist").unwrap();
    let mut parts = without_agent(&m, "m").into_parts();
    for o in &mut parts.orgs {
        for w in 0..o.objectives.len() {
            o.objectives[w].remove(&mono);
        }
    }
    let m2 = Model::from_parts(parts).unwrap();
    let o = m2.org_id("Ogas").unwrap();
    let sw = org::check_structurally_well_defined(&m2, o);
    assert!(!sw.holds);
    assert!(sw.witnesses.iter().any(|w| w.detail.contains("provide_gas")));
    let wd = org::check_well_defined(&m2, o, &FormulaPool::default_for(&m2, o)).unwrap();
    assert!(!wd.holds);
}

#[test]
fn losing_a_capability_breaks_success() {
    let m = fixtures::gas0();
    let t = m.agent_id("t").unwrap();
    let buy = ControlAtom::Fact(m.fact_id("buy_gas").unwrap());
    let mut parts = m.parts().clone();
    for set in &mut parts.capabilities.c[t.0] {
        set.remove(&buy);
    }
    for set in &mut parts.capabilities.cn[m.role_id("trader").unwrap().0] {
        set.remove(&buy);
    }
    let m2 = Model::from_parts(parts).unwrap();
    let o = m2.org_id("Ogas").unwrap();
    let pool = FormulaPool::default_for(&m2, o);
    assert!(!org::check_successful(&m2, o, &pool).unwrap().holds);
}

#[test]
fn good_needs_dependencies() {
    let m = fixtures::gas0();
    let mut parts = m.parts().clone();
    for o in &mut parts.orgs {
        for w in 0..o.dep.len() {
            o.dep[w].retain(|(r, q)| r == q);
        }
    }
    let m2 = Model::from_parts(parts).unwrap();
    let o = m2.org_id("Ogas").unwrap();
    let v = org::check_good(&m2, o, &FormulaPool::default_for(&m2, o)).unwrap();
    assert!(!v.holds);
    assert!(v.witnesses.iter().any(|w| w.detail.contains("{monopolist}")));
}

#[test]
fn delegation_atoms_are_required() {
    let m = fixtures::gas0();
    let mut parts = m.parts().clone();
    let key = (m.agent_id("m").unwrap(), m.role_id("monopolist").unwrap());
    for set in parts.capabilities.cr.get_mut(&key).unwrap() {
        set.retain(|a| !matches!(a, ControlAtom::InCharge { .. }));
    }
    let m2 = Model::from_parts(parts).unwrap();
    let o = m2.org_id("Ogas").unwrap();
    assert!(!org::check_delegation_closed(&m2, o).holds);
}

#[test]
fn supervision_fixture() {
    let m = fixtures::supervision();
    let o = m.org_id("Oproj").unwrap();
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let (z, v, u) = (set(&["leader"]), set(&["q"]), set(&["programmer"]));
    let phi = parse("module").unwrap();
    let v0 = m.world_id("v0").unwrap();
    let antecedent = org::supervising_duty_formula(&z, &v, &u, &phi);
    let lao_core::Formula::Implies(ante, _) = &antecedent else {
        unreachable!()
    };
    assert!(eval(&m, v0, ante).unwrap(), "antecedent must hold at v0");
    assert!(org::eval_supervising_duty(&m, v0, o, &z, &v, &u, &phi).unwrap());
    let v4 = m.world_id("v4").unwrap();
    assert!(!eval(&m, v4, ante).unwrap());
    assert!(org::eval_supervising_duty(&m, v4, o, &z, &v, &u, &phi).unwrap());

    // The leader no longer steps in after the programmer fails.
    let mut parts = m.parts().clone();
    let v3 = m.world_id("v3").unwrap();
    for t in &mut parts.transitions {
        if t.src == v3 {
            t.labels.clear();
        }
    }
    let lazy = Model::from_parts(parts).unwrap();
    assert!(!org::eval_supervising_duty(&lazy, v0, o, &z, &v, &u, &phi).unwrap());
}

#[test]
fn fig1_satisfying_worlds() {
    let m = fixtures::fig1();
    let names: Vec<&str> = worlds_of(&eval_all(&m, &parse("p").unwrap()).unwrap())
        .into_iter()
        .map(|w| m.world_name(w))
        .collect();
    assert_eq!(names, ["w1", "w3", "w4"]);
}
