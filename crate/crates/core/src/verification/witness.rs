//! Models demonstrating that expected-but-invalid principles fail.

use crate::fixtures;
use crate::formula::{parse, Formula};
use crate::model::{Model, WorldId};

#[derive(Debug, Clone)]
pub struct Demonstration {
    pub fixture: &'static str,
    pub model: Model,
    pub world: WorldId,
    /// Satisfiable at `world`, refuting the principle in `refutes`.
    pub formula: Formula,
    pub refutes: &'static str,
}

/// Parallel attempts at `p` and `!p`, and a nested stit that cannot be
/// unnested.
pub fn non_theorem_witnesses() -> Vec<Demonstration> {
    let demo = |fixture, world, formula: &str, refutes| {
        let model = fixtures::load(fixture);
        let world = model.world_id(world).expect("fixture world exists");
        Demonstration {
            fixture,
            model,
            world,
            formula: parse(formula).expect("witness formula parses"),
            refutes,
        }
    };
    vec![
        demo(
            "interfere",
            "w0",
            "H[a] p & H[b] !p",
            "H[a] p -> !H[b] !p",
        ),
        demo(
            "nesting",
            "n0",
            "E[a] E[a] p & !E[a] p",
            "E[a] E[a] p -> E[a] p",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval;
    use crate::verification::path_oracle;

    #[test]
    fn witnesses_hold_under_both_backends() {
        let ws = non_theorem_witnesses();
        assert_eq!(ws.len(), 2);
        for d in &ws {
            assert!(eval(&d.model, d.world, &d.formula).unwrap(), "{}", d.formula);
            assert!(path_oracle(&d.model, d.world, &d.formula).unwrap());
            let refuted = parse(d.refutes).unwrap();
            assert!(!eval(&d.model, d.world, &refuted).unwrap());
        }
    }
}
