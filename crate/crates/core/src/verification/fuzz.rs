//! Random well-formed formulas for parser round-trip testing.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Holder, RoleSel};

const FACTS: &[&str] = &["p", "q", "buy_gas", "local-flow", "x1"];
const AGENTS: &[&str] = &["a", "b", "t"];
const ROLES: &[&str] = &["r", "trader", "local-transport"];
const ORGS: &[&str] = &["O", "Ogas"];

/// `count` random formulas of nesting depth at most `depth`, deterministic
/// in `seed`.
pub fn fuzz_formulas(seed: u64, count: usize, depth: u32) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_formula(&mut rng, depth)).collect()
}

pub fn random_formula(rng: &mut impl Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    let d = depth - 1;
    let sub = |rng: &mut _| Box::new(random_formula(rng, d));
    match rng.gen_range(0..20) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        2 => Formula::Or(sub(rng), sub(rng)),
        3 => Formula::Implies(sub(rng), sub(rng)),
        4 => Formula::Iff(sub(rng), sub(rng)),
        5 => Formula::AX(sub(rng)),
        6 => Formula::EX(sub(rng)),
        7 => Formula::AF(sub(rng)),
        8 => Formula::EF(sub(rng)),
        9 => Formula::AG(sub(rng)),
        10 => Formula::EG(sub(rng)),
        11 => Formula::AU(sub(rng), sub(rng)),
        12 => Formula::EU(sub(rng), sub(rng)),
        13 => Formula::Cap(holder(rng), sub(rng)),
        14 => Formula::JointCap(names(rng, AGENTS), sub(rng)),
        15 => Formula::Ability(holder(rng), sub(rng)),
        16 => Formula::Attempt(holder(rng), sub(rng)),
        17 => Formula::Stit(holder(rng), sub(rng)),
        18 => Formula::Initiative(role_sel(rng), sub(rng)),
        _ => Formula::InControl(holder(rng)),
    }
}

fn pick(rng: &mut impl Rng, xs: &[&str]) -> String {
    xs.choose(rng).expect("non-empty vocabulary").to_string()
}

fn names(rng: &mut impl Rng, xs: &[&str]) -> BTreeSet<String> {
    let n = rng.gen_range(1..=xs.len());
    xs.choose_multiple(rng, n).map(|s| s.to_string()).collect()
}

fn holder(rng: &mut impl Rng) -> Holder {
    match rng.gen_range(0..4) {
        0 => Holder::Agent(pick(rng, AGENTS)),
        1 => Holder::Agents(names(rng, AGENTS)),
        2 => Holder::Rea(pick(rng, AGENTS), pick(rng, ROLES)),
        _ => Holder::ReaGroup(names(rng, AGENTS), names(rng, ROLES)),
    }
}

fn role_sel(rng: &mut impl Rng) -> RoleSel {
    if rng.gen_bool(0.5) {
        RoleSel::One(pick(rng, ROLES))
    } else {
        RoleSel::Many(names(rng, ROLES))
    }
}

fn atoms(rng: &mut impl Rng, negation: bool) -> Box<Formula> {
    let n = rng.gen_range(1..=3);
    Box::new(Formula::conj((0..n).map(|_| {
        let a = Formula::Atom(pick(rng, FACTS));
        if negation && rng.gen_bool(0.4) {
            Formula::not(a)
        } else {
            a
        }
    })))
}

fn leaf(rng: &mut impl Rng) -> Formula {
    match rng.gen_range(0..12) {
        0 => Formula::True,
        1 => Formula::False,
        2 => Formula::Member {
            agent: pick(rng, AGENTS),
            org: pick(rng, ORGS),
        },
        3 => Formula::RoleOf {
            role: pick(rng, ROLES),
            org: pick(rng, ORGS),
        },
        4 => Formula::Play {
            agent: pick(rng, AGENTS),
            role: pick(rng, ROLES),
            org: pick(rng, ORGS),
        },
        5 => Formula::Dep {
            org: pick(rng, ORGS),
            from: role_sel(rng),
            to: role_sel(rng),
        },
        6 => Formula::Know {
            org: pick(rng, ORGS),
            body: atoms(rng, true),
        },
        7 => Formula::InCharge {
            org: pick(rng, ORGS),
            role: pick(rng, ROLES),
            body: atoms(rng, false),
        },
        8 => Formula::Desire {
            org: pick(rng, ORGS),
            body: atoms(rng, false),
        },
        _ => Formula::Atom(pick(rng, FACTS)),
    }
}
