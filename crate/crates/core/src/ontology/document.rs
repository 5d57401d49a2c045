use serde::{Deserialize, Serialize};

use super::{Direction, Kind};

/// On-disk form of an ontology (JSON).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyDocument {
    pub concepts: Vec<ConceptDoc>,
    #[serde(default)]
    pub equivalences: Vec<Vec<String>>,
    pub units: Vec<UnitDoc>,
    #[serde(default)]
    pub conversions: Vec<ConversionDoc>,
    #[serde(default)]
    pub functions: Vec<FunctionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    pub kind: Kind,
    pub direction: Direction,
    pub canonical_unit: String,
    pub domain: DomainDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitDoc {
    pub name: String,
    pub dimension: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversionDoc {
    pub from: String,
    pub to: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub target: String,
    pub operands: Vec<String>,
    pub expr: String,
}
