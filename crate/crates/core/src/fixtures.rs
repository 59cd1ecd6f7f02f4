//! Bundled example models.
//!
//! - `fig1`: one agent influencing two of three transitions out of `w0`.
//! - `gas0`: the gas market run by a monopolist that delegates to a trader.
//! - `gas0prime`: the liberalized gas market, a peer network of three roles,
//!   unfolded so that each step of the trader-led negotiation holds at a
//!   designated world.
//! - `gas0prime_informed`: `gas0prime` where the organization knows the
//!   capabilities it delegates to.
//! - `interfere`: two agents attempting contradictory outcomes at once.
//! - `nesting`: a two-step chain where `E[a] E[a] p` holds but `E[a] p` does not.
//! - `supervision`: a leader assigns a module, the programmer may fail, and
//!   the leader takes over.

use crate::model::{load_model, Model};

pub const NAMES: &[&str] = &[
    "fig1",
    "gas0",
    "gas0prime",
    "gas0prime_informed",
    "interfere",
    "nesting",
    "supervision",
];

/// JSON source of a bundled fixture.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../fixtures/fig1.json"),
        "gas0" => include_str!("../fixtures/gas0.json"),
        "gas0prime" => include_str!("../fixtures/gas0prime.json"),
        "gas0prime_informed" => include_str!("../fixtures/gas0prime_informed.json"),
        "interfere" => include_str!("../fixtures/interfere.json"),
        "nesting" => include_str!("../fixtures/nesting.json"),
        "supervision" => include_str!("../fixtures/supervision.json"),
        _ => return None,
    })
}

/// Loads a bundled fixture.
///
/// # Panics
///
/// If `name` is not in [`NAMES`]; the bundled sources are known to load.
pub fn load(name: &str) -> Model {
    let src = source(name).unwrap_or_else(|| panic!("no fixture named `{name}`"));
    load_model(src).unwrap_or_else(|e| panic!("fixture `{name}`: {e}"))
}

pub fn all() -> Vec<(&'static str, Model)> {
    NAMES.iter().map(|&n| (n, load(n))).collect()
}

pub fn fig1() -> Model {
    load("fig1")
}

pub fn gas0() -> Model {
    load("gas0")
}

pub fn gas0prime() -> Model {
    load("gas0prime")
}

pub fn interfere() -> Model {
    load("interfere")
}

pub fn nesting() -> Model {
    load("nesting")
}

pub fn supervision() -> Model {
    load("supervision")
}

/// The negotiation steps of the liberalized gas market as
/// `(step, world, formula)`.
pub const GAS0PRIME_DERIVATION: &[(&str, &str, &str)] = &[
    ("s1a", "s1", "incharge(Ogas, trader, provide_gas)"),
    ("s1b", "s1", "I[trader] (buy_gas & transport_gas & local_flow)"),
    (
        "s1c",
        "s1",
        "C[t:trader] incharge(Ogas, shipper, transport_gas) \
         & C[t:trader] incharge(Ogas, local-transport, local_flow)",
    ),
    ("s2", "s2", "E[t:trader] incharge(Ogas, shipper, transport_gas)"),
    ("s3", "s3", "E[t:trader] incharge(Ogas, local-transport, local_flow)"),
    ("s4a", "s4", "I[trader] buy_gas & C[t:trader] buy_gas"),
    ("s4b", "s4", "I[shipper] transport_gas & C[s:shipper] transport_gas"),
    (
        "s4c",
        "s4",
        "I[local-transport] local_flow & C[l:local-transport] local_flow",
    ),
    ("s5", "s5", "H[t:trader] buy_gas"),
    ("s6", "s5", "H[s:shipper] transport_gas"),
    ("s7", "s5", "H[l:local-transport] local_flow"),
    ("s8", "s8", "buy_gas & transport_gas & local_flow"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn every_fixture_loads_and_validates() {
        for (name, m) in all() {
            let v = validate_model(&m);
            assert!(v.is_empty(), "{name}: {v:?}");
        }
        assert!(source("nope").is_none());
    }
}
