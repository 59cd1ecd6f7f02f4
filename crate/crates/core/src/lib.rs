//! Model checking and organization analysis for agent organizations.
//!
//! A [`Model`] is a finite Kripke structure whose transitions carry
//! `(agent, role)` labels, extended with capability maps and a set of
//! organization structures. Formulas ([`Formula`]) combine CTL with agency
//! operators (capability, ability, attempt, in-control, stit), initiative
//! and organizational predicates; [`semantics`] evaluates them and [`org`]
//! grades whole organizations.

pub mod fixtures;
pub mod formula;
pub mod model;
pub mod org;
pub mod semantics;
pub mod verification;

pub use formula::{parse, print, Formula, Holder, ParseError, RoleSel};
pub use model::{load_model, ControlAtom, Model, ModelError, Violation};
pub use semantics::{eval, eval_all, Checker, EvalError, WorldSet};
