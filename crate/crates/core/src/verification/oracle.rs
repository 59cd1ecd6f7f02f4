//! Independent oracles for the temporal layer and for capability
//! entailment.

use crate::formula::Formula;
use crate::model::{AtomSet, ControlAtom, Model, WorldId};
use crate::semantics::{Checker, EvalError, WorldSet};

/// Evaluates `f` at `w` with every temporal operator decided by explicit
/// enumeration of lasso paths.
pub fn path_oracle(m: &Model, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
    Checker::oracle(m)?.holds(w, f)
}

/// Formulas of temporal depth at most 2 over the names every generated
/// model has (`p0`, `a0`, `r0`), mixing agency into temporal operators.
pub const ORACLE_POOL: &[&str] = &[
    "AF p0",
    "EF p0",
    "AG p0",
    "EG !p0",
    "AX p0",
    "EX !p0",
    "A[p0 U !p0]",
    "E[!p0 U p0]",
    "AF H[a0] p0",
    "EF G[a0] p0",
    "AG (p0 -> EX p0)",
    "EG (!p0 | C[a0] p0)",
    "AF E[a0] p0",
    "EX AF p0",
    "AX EG !p0",
    "E[p0 U AX p0]",
    "A[true U H[a0:r0] p0]",
    "AG EF p0",
    "EF AG p0",
    "AF AG !p0",
    "EG AF p0",
    "AX (p0 & EX !p0)",
    "I[r0] p0",
    "EF I[r0] !p0",
    "EF IC[a0]",
    "AG (H[a0] p0 -> AX p0)",
    "E[G[a0:r0] p0 U p0]",
    "A[!p0 U E[a0:r0] p0]",
    "EX H[a0] !p0",
    "AF (p0 & EX p0)",
];

/// [`ORACLE_POOL`], parsed.
pub fn oracle_pool() -> Vec<Formula> {
    ORACLE_POOL
        .iter()
        .map(|s| crate::formula::parse(s).expect("oracle pool parses"))
        .collect()
}

/// Largest atom set [`sigma_by_assignments`] will enumerate.
pub const SIGMA_ORACLE_ATOMS: usize = 12;

/// Capability entailment by brute force: some partial assignment over
/// `atoms` (at least one atom fixed) is satisfied by a world, and every
/// world satisfying it lies in `target`.
///
/// # Panics
///
/// If `atoms` has more than [`SIGMA_ORACLE_ATOMS`] elements.
pub fn sigma_by_assignments(m: &Model, atoms: &AtomSet, target: &WorldSet) -> bool {
    let atoms: Vec<ControlAtom> = atoms.iter().copied().collect();
    assert!(atoms.len() <= SIGMA_ORACLE_ATOMS, "too many atoms to enumerate");
    let cases = 3usize.pow(atoms.len() as u32);
    // Digit 0 leaves the atom out, 1 requires it true, 2 requires it false.
    (1..cases).any(|code| {
        let mut digits = Vec::with_capacity(atoms.len());
        let mut c = code;
        for _ in &atoms {
            digits.push(c % 3);
            c /= 3;
        }
        let satisfies = |w: WorldId| {
            atoms.iter().zip(&digits).all(|(&a, &d)| match d {
                0 => true,
                1 => m.atom_holds(a, w),
                _ => !m.atom_holds(a, w),
            })
        };
        let mut any = false;
        for w in m.world_ids() {
            if satisfies(w) {
                if !target.contains(w.0) {
                    return false;
                }
                any = true;
            }
        }
        any
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;
    use crate::semantics::{eval, eval_all, sigma_entails_set};

    #[test]
    fn fig1_examples() {
        let m = fixtures::fig1();
        let w0 = m.world_id("w0").unwrap();
        for f in ["AF p", "AG true", "E[!p U q]", "EG !q", "A[!q U p]"] {
            let f = parse(f).unwrap();
            assert_eq!(path_oracle(&m, w0, &f).unwrap(), eval(&m, w0, &f).unwrap(), "{f}");
        }
        assert!(path_oracle(&m, w0, &parse("AG true").unwrap()).unwrap());
    }

    #[test]
    fn sigma_oracle_on_fig1() {
        let m = fixtures::fig1();
        let p: AtomSet = [ControlAtom::Fact(m.fact_id("p").unwrap())].into();
        let pq = eval_all(&m, &parse("p & q").unwrap()).unwrap();
        assert!(!sigma_by_assignments(&m, &p, &pq));
        let only_p = eval_all(&m, &parse("p").unwrap()).unwrap();
        assert!(sigma_by_assignments(&m, &p, &only_p));
        assert!(!sigma_by_assignments(&m, &AtomSet::new(), &only_p));
        assert!(!sigma_entails_set(&m, &p, &pq));
    }

    #[test]
    fn too_large_for_the_path_oracle() {
        use crate::verification::{generate_model, GenParams};
        let m = (0..)
            .map(|seed| generate_model(&GenParams::new(seed, [1, 1, 1, 9, 1])).unwrap())
            .find(|m| m.world_count() == 9)
            .unwrap();
        assert!(matches!(
            path_oracle(&m, WorldId(0), &parse("AF p0").unwrap()),
            Err(EvalError::OracleBound { worlds: 9, .. })
        ));
    }
}
