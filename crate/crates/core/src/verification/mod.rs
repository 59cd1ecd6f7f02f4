//! Random models, the axiomatization as executable properties, and
//! independent oracles.

mod fuzz;
mod generate;
mod oracle;
mod suite;
mod witness;

pub use fuzz::{fuzz_formulas, random_formula};
pub use generate::{generate_model, GenError, GenParams};
pub use oracle::{
    oracle_pool, path_oracle, sigma_by_assignments, ORACLE_POOL, SIGMA_ORACLE_ATOMS,
};
pub use suite::{
    literal_pool, run_axiom_suite, run_random_suite, Counterexample, SchemaOutcome, SuiteError,
    SuiteReport, REFUTABLE, SCHEMAS,
};
pub use witness::{non_theorem_witnesses, Demonstration};
