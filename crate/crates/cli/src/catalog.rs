//! Scenario bundles shipped with the binary.

use crate::scenario::Scenario;
use crate::CliError;

const BUNDLED: [(&str, &str); 10] = [
    ("ce1", include_str!("../scenarios/ce1.toml")),
    ("ce2", include_str!("../scenarios/ce2.toml")),
    ("ce3", include_str!("../scenarios/ce3.toml")),
    ("thpert-sweep", include_str!("../scenarios/thpert-sweep.toml")),
    ("normal-sweep", include_str!("../scenarios/normal-sweep.toml")),
    ("dH-scenario", include_str!("../scenarios/dH-scenario.toml")),
    ("reversal-instance", include_str!("../scenarios/reversal-instance.toml")),
    ("toeplitz-lambda", include_str!("../scenarios/toeplitz-lambda.toml")),
    ("glt-product", include_str!("../scenarios/glt-product.toml")),
    ("bauer-fike", include_str!("../scenarios/bauer-fike.toml")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub anchor: String,
}

pub fn ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

pub fn source(id: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(k, _)| *k == id).map(|(_, s)| *s)
}

pub fn scenario(id: &str) -> Result<Scenario, CliError> {
    let text = source(id).ok_or_else(|| {
        CliError::Config(format!("unknown scenario `{id}`; known: {}", ids().collect::<Vec<_>>().join(", ")))
    })?;
    Scenario::parse(text).map_err(|e| CliError::Config(format!("bundled scenario `{id}`: {e}")))
}

pub fn entries() -> Vec<CatalogEntry> {
    ids()
        .map(|id| {
            let s = scenario(id).expect("bundled scenarios parse");
            CatalogEntry {
                id: s.id,
                description: s.description,
                anchor: s.anchor,
            }
        })
        .collect()
}
