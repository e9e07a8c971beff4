//! The shipped instance corpus, embedded so both the library self-checks
//! and the CLI see the same bytes as the files under `catalog/`.

use crate::docs::Model;
use crate::error::{Error, Result};
use crate::heis::ExtGroup;

pub const INTEGER_JSON: &str = include_str!("../../../catalog/integer.json");
pub const SMALL64_JSON: &str = include_str!("../../../catalog/small64.json");
pub const ODD243_JSON: &str = include_str!("../../../catalog/odd243.json");
pub const MIXED128_JSON: &str = include_str!("../../../catalog/mixed128.json");
/// Rank-2 center with a vector-valued pairing.
pub const WIDEC128_JSON: &str = include_str!("../../../catalog/widec128.json");
/// Two K generators, one acting purely through a hom part.
pub const TWOK128_JSON: &str = include_str!("../../../catalog/twok128.json");
/// A spec that must be *rejected*: its `k_p` admits no graded extension.
pub const NO_EXTENSION_JSON: &str = include_str!("../../../catalog/no_extension.json");

/// The loadable finite instances, in a fixed order.
pub fn finite_instances() -> Result<Vec<(String, ExtGroup)>> {
    let mut out = Vec::new();
    for (name, json) in [
        ("small64", SMALL64_JSON),
        ("mixed128", MIXED128_JSON),
        ("odd243", ODD243_JSON),
        ("widec128", WIDEC128_JSON),
        ("twok128", TWOK128_JSON),
    ] {
        match Model::parse_json(json)? {
            Model::Explicit(g) => out.push((name.to_string(), *g)),
            Model::Integer => {
                return Err(Error::Spec(format!(
                    "catalog instance {name} is not finite"
                )))
            }
        }
    }
    Ok(out)
}
