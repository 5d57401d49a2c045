//! Components, requests and their QoS profiles.
//!
//! Everything here is validated against an [`Ontology`] at load time and
//! canonicalized: every constraint ends up as a closed interval in its
//! concept's canonical unit, inside the concept's domain range.

pub mod constraint;
mod document;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::ontology::{ConceptId, DomainRange, Ontology, OntologyError};

pub use constraint::{Bound, ConstraintExpr, SyntaxError};
pub use document::{CatalogDocument, ComponentDoc, ConstraintDoc, InterfaceDoc, RequestDocument};

/// Unit aliases accepted in constraint text.
const UNIT_ALIASES: &[(&str, &str)] = &[("%", "percent")];

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{location}: {kind}")]
    Invalid { location: String, kind: InvalidKind },
    #[error("cannot read document: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum InvalidKind {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("unit '{unit}' does not measure '{concept}' (canonical unit '{canonical}')")]
    DimensionMismatch {
        concept: String,
        unit: String,
        canonical: String,
    },
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("constraints on '{first}' and '{second}' refer to equivalent concepts")]
    DuplicateConcept { first: String, second: String },
    #[error("duplicate interface '{0}'")]
    DuplicateInterface(String),
    #[error("duplicate component '{0}'")]
    DuplicateComponent(String),
    #[error("no interfaces declared")]
    NoInterfaces,
    #[error("QoS profile has no metrics")]
    EmptyProfile,
    #[error("constraint needs exactly one of 'expr', 'concept' with 'min'/'max', or 'concept' with 'operands' (no unit)")]
    ConstraintShape,
    #[error("'{0}' has no function in the ontology, so operand values cannot be used")]
    NoFunction(String),
    #[error("'{operand}' is not an operand of the function for '{target}'")]
    UnknownOperand { target: String, operand: String },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("mu must be between 1 and the request's interface count {interfaces}, got {mu}")]
    InvalidMu { mu: u64, interfaces: usize },
    #[error("rank threshold must be a non-negative number, got {0}")]
    InvalidThreshold(f64),
}

/// Non-fatal finding recorded while loading.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// A loaded value plus the warnings produced while loading it.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Declared,
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricConstraint {
    pub concept: ConceptId,
    pub concept_name: String,
    pub interval: Interval,
    /// Always the concept's canonical unit after loading.
    pub unit: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QosProfile {
    pub constraints: Vec<MetricConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Provided,
    Required,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Provided => "provided",
            Polarity::Required => "required",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub name: String,
    pub polarity: Polarity,
    pub profile: QosProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    /// Descriptive metadata (version, technology, ...). Never used for matching.
    pub metadata: BTreeMap<String, String>,
    pub provided: Vec<Interface>,
    pub required: Vec<Interface>,
}

impl Component {
    pub fn interfaces(&self) -> impl Iterator<Item = &Interface> {
        self.provided.iter().chain(&self.required)
    }

    pub fn interface(&self, name: &str, polarity: Polarity) -> Option<&Interface> {
        let list = match polarity {
            Polarity::Provided => &self.provided,
            Polarity::Required => &self.required,
        };
        list.iter().find(|i| i.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub name: String,
    pub provided: Vec<Interface>,
    pub required: Vec<Interface>,
    pub mu: usize,
    pub rank_threshold: Option<f64>,
}

impl Request {
    pub fn interfaces(&self) -> impl Iterator<Item = &Interface> {
        self.provided.iter().chain(&self.required)
    }

    pub fn interface_count(&self) -> usize {
        self.provided.len() + self.required.len()
    }

    /// Replaces μ, validating it against the interface count.
    pub fn with_mu(mut self, mu: u64) -> Result<Self, CatalogError> {
        self.mu = check_mu(mu, self.interface_count()).map_err(|kind| CatalogError::Invalid {
            location: format!("request '{}'", self.name),
            kind,
        })?;
        Ok(self)
    }

    pub fn with_threshold(mut self, threshold: Option<f64>) -> Result<Self, CatalogError> {
        if let Some(t) = threshold {
            check_threshold(t).map_err(|kind| CatalogError::Invalid {
                location: format!("request '{}'", self.name),
                kind,
            })?;
        }
        self.rank_threshold = threshold;
        Ok(self)
    }
}

fn check_mu(mu: u64, interfaces: usize) -> Result<usize, InvalidKind> {
    if mu == 0 || mu > interfaces as u64 {
        return Err(InvalidKind::InvalidMu { mu, interfaces });
    }
    Ok(mu as usize)
}

fn check_threshold(t: f64) -> Result<(), InvalidKind> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(InvalidKind::InvalidThreshold(t))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    pub components: Vec<Component>,
}

impl Catalog {
    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn from_json(src: &str, o: &Ontology) -> Result<Loaded<Catalog>, CatalogError> {
        let doc: CatalogDocument = serde_json::from_str(src)?;
        Self::from_document(&doc, o)
    }

    pub fn from_path(
        path: impl AsRef<Path>,
        o: &Ontology,
    ) -> Result<Loaded<Catalog>, CatalogError> {
        Self::from_json(&std::fs::read_to_string(path)?, o)
    }

    pub fn from_document(
        doc: &CatalogDocument,
        o: &Ontology,
    ) -> Result<Loaded<Catalog>, CatalogError> {
        let mut warnings = Vec::new();
        let mut seen = BTreeSet::new();
        let mut components = Vec::with_capacity(doc.components.len());
        for c in &doc.components {
            let location = format!("component '{}'", c.name);
            if !seen.insert(c.name.as_str()) {
                return Err(CatalogError::Invalid {
                    location,
                    kind: InvalidKind::DuplicateComponent(c.name.clone()),
                });
            }
            let provided =
                load_interfaces(&location, Polarity::Provided, &c.provided, o, &mut warnings)?;
            let required =
                load_interfaces(&location, Polarity::Required, &c.required, o, &mut warnings)?;
            if provided.is_empty() && required.is_empty() {
                return Err(CatalogError::Invalid {
                    location,
                    kind: InvalidKind::NoInterfaces,
                });
            }
            components.push(Component {
                name: c.name.clone(),
                metadata: c.metadata.clone(),
                provided,
                required,
            });
        }
        Ok(Loaded {
            value: Catalog { components },
            warnings,
        })
    }

    /// Serializes back to the document form, with every constraint written
    /// as an explicit canonical interval.
    pub fn to_document(&self) -> CatalogDocument {
        CatalogDocument {
            components: self
                .components
                .iter()
                .map(|c| ComponentDoc {
                    name: c.name.clone(),
                    metadata: c.metadata.clone(),
                    provided: c.provided.iter().map(interface_doc).collect(),
                    required: c.required.iter().map(interface_doc).collect(),
                })
                .collect(),
        }
    }
}

fn interface_doc(i: &Interface) -> InterfaceDoc {
    InterfaceDoc {
        name: i.name.clone(),
        metrics: i
            .profile
            .constraints
            .iter()
            .map(|m| ConstraintDoc {
                concept: Some(m.concept_name.clone()),
                min: Some(m.interval.lo),
                max: Some(m.interval.hi),
                unit: Some(m.unit.clone()),
                ..ConstraintDoc::default()
            })
            .collect(),
    }
}

impl Request {
    pub fn from_json(src: &str, o: &Ontology) -> Result<Loaded<Request>, CatalogError> {
        let doc: RequestDocument = serde_json::from_str(src)?;
        Self::from_document(&doc, o)
    }

    pub fn from_path(
        path: impl AsRef<Path>,
        o: &Ontology,
    ) -> Result<Loaded<Request>, CatalogError> {
        Self::from_json(&std::fs::read_to_string(path)?, o)
    }

    pub fn from_document(
        doc: &RequestDocument,
        o: &Ontology,
    ) -> Result<Loaded<Request>, CatalogError> {
        let mut warnings = Vec::new();
        let location = format!("request '{}'", doc.name);
        let provided = load_interfaces(
            &location,
            Polarity::Provided,
            &doc.provided,
            o,
            &mut warnings,
        )?;
        let required = load_interfaces(
            &location,
            Polarity::Required,
            &doc.required,
            o,
            &mut warnings,
        )?;
        let interfaces = provided.len() + required.len();
        if interfaces == 0 {
            return Err(CatalogError::Invalid {
                location,
                kind: InvalidKind::NoInterfaces,
            });
        }
        let mu = check_mu(doc.mu.unwrap_or(interfaces as u64), interfaces).map_err(|kind| {
            CatalogError::Invalid {
                location: location.clone(),
                kind,
            }
        })?;
        if let Some(t) = doc.rank_threshold {
            check_threshold(t).map_err(|kind| CatalogError::Invalid {
                location: location.clone(),
                kind,
            })?;
        }
        Ok(Loaded {
            value: Request {
                name: doc.name.clone(),
                provided,
                required,
                mu,
                rank_threshold: doc.rank_threshold,
            },
            warnings,
        })
    }
}

/// Loads a requests file holding either one request object or an array of them.
pub fn load_requests(src: &str, o: &Ontology) -> Result<Loaded<Vec<Request>>, CatalogError> {
    let docs: Vec<RequestDocument> = if src.trim_start().starts_with('[') {
        serde_json::from_str(src)?
    } else {
        vec![serde_json::from_str(src)?]
    };
    let mut warnings = Vec::new();
    let mut requests = Vec::with_capacity(docs.len());
    let mut seen = BTreeSet::new();
    for doc in &docs {
        if !seen.insert(doc.name.as_str()) {
            return Err(CatalogError::Invalid {
                location: format!("request '{}'", doc.name),
                kind: InvalidKind::DuplicateComponent(doc.name.clone()),
            });
        }
        let loaded = Request::from_document(doc, o)?;
        warnings.extend(loaded.warnings);
        requests.push(loaded.value);
    }
    Ok(Loaded {
        value: requests,
        warnings,
    })
}

fn load_interfaces(
    owner: &str,
    polarity: Polarity,
    docs: &[InterfaceDoc],
    o: &Ontology,
    warnings: &mut Vec<Warning>,
) -> Result<Vec<Interface>, CatalogError> {
    let mut out: Vec<Interface> = Vec::with_capacity(docs.len());
    for doc in docs {
        let location = format!("{owner}, {polarity} interface '{}'", doc.name);
        let invalid = |kind| CatalogError::Invalid {
            location: location.clone(),
            kind,
        };
        if out.iter().any(|i| i.name == doc.name) {
            return Err(invalid(InvalidKind::DuplicateInterface(doc.name.clone())));
        }
        if doc.metrics.is_empty() {
            return Err(invalid(InvalidKind::EmptyProfile));
        }
        let mut constraints: Vec<MetricConstraint> = Vec::with_capacity(doc.metrics.len());
        for m in &doc.metrics {
            let c = load_constraint(m, o, &location, warnings).map_err(invalid)?;
            if let Some(prev) = constraints
                .iter()
                .find(|p| o.equivalent_id(p.concept, c.concept))
            {
                return Err(invalid(InvalidKind::DuplicateConcept {
                    first: prev.concept_name.clone(),
                    second: c.concept_name.clone(),
                }));
            }
            constraints.push(c);
        }
        out.push(Interface {
            name: doc.name.clone(),
            polarity,
            profile: QosProfile { constraints },
        });
    }
    Ok(out)
}

fn load_constraint(
    doc: &ConstraintDoc,
    o: &Ontology,
    location: &str,
    warnings: &mut Vec<Warning>,
) -> Result<MetricConstraint, InvalidKind> {
    let has_range = doc.min.is_some() || doc.max.is_some();
    match (&doc.expr, &doc.concept, has_range, &doc.operands) {
        (Some(text), None, false, None) if doc.unit.is_none() => {
            let expr = ConstraintExpr::parse(text)?;
            resolve(&expr, o, location, warnings)
        }
        (None, Some(concept), true, None) => {
            let bound = match (doc.min, doc.max) {
                (Some(lo), Some(hi)) if lo > hi => {
                    return Err(InvalidKind::EmptyInterval { lo, hi })
                }
                (Some(lo), Some(hi)) => Bound::Between(lo, hi),
                (Some(lo), None) => Bound::AtLeast(lo),
                (None, Some(hi)) => Bound::AtMost(hi),
                (None, None) => unreachable!("has_range"),
            };
            let expr = ConstraintExpr {
                concept: concept.clone(),
                bound,
                unit: doc.unit.clone(),
            };
            resolve(&expr, o, location, warnings)
        }
        (None, Some(concept), false, Some(operands)) if doc.unit.is_none() => {
            derive(concept, operands, o, location, warnings)
        }
        _ => Err(InvalidKind::ConstraintShape),
    }
}

fn resolve_unit<'a>(written: Option<&'a str>, canonical: &'a str) -> &'a str {
    match written {
        None => canonical,
        Some(u) => UNIT_ALIASES
            .iter()
            .find(|(alias, _)| *alias == u)
            .map_or(u, |(_, name)| name),
    }
}

fn to_canonical(
    o: &Ontology,
    concept: ConceptId,
    value: f64,
    unit: &str,
) -> Result<f64, InvalidKind> {
    let c = o.concept(concept);
    o.convert(value, unit, &c.canonical_unit)
        .map_err(|e| match e {
            OntologyError::UnknownUnit(u) => InvalidKind::UnknownUnit(u),
            OntologyError::DimensionMismatch { .. } => InvalidKind::DimensionMismatch {
                concept: c.name.clone(),
                unit: unit.to_string(),
                canonical: c.canonical_unit.clone(),
            },
            other => InvalidKind::Ontology(other),
        })
}

/// Resolves a parsed constraint against the ontology: converts to the
/// canonical unit, closes open ends with the domain range, and clamps.
pub fn resolve(
    expr: &ConstraintExpr,
    o: &Ontology,
    location: &str,
    warnings: &mut Vec<Warning>,
) -> Result<MetricConstraint, InvalidKind> {
    let id = o
        .id(&expr.concept)
        .map_err(|_| InvalidKind::UnknownConcept(expr.concept.clone()))?;
    let concept = o.concept(id);
    let unit = resolve_unit(expr.unit.as_deref(), &concept.canonical_unit);
    let conv = |v| to_canonical(o, id, v, unit);
    let domain = concept.domain;
    let (lo, hi) = match expr.bound {
        Bound::AtLeast(v) => (conv(v)?, domain.max),
        Bound::AtMost(v) => (domain.min, conv(v)?),
        Bound::Exactly(v) => {
            let v = conv(v)?;
            (v, v)
        }
        Bound::Between(a, b) => {
            if a > b {
                return Err(InvalidKind::EmptyInterval { lo: a, hi: b });
            }
            (conv(a)?, conv(b)?)
        }
    };
    let interval = clamp_interval(
        &expr.concept,
        Interval { lo, hi },
        domain,
        location,
        warnings,
    );
    Ok(MetricConstraint {
        concept: id,
        concept_name: concept.name.clone(),
        interval,
        unit: concept.canonical_unit.clone(),
        origin: Origin::Declared,
    })
}

fn clamp_interval(
    concept: &str,
    raw: Interval,
    domain: DomainRange,
    location: &str,
    warnings: &mut Vec<Warning>,
) -> Interval {
    let clamped = Interval {
        lo: domain.clamp(raw.lo),
        hi: domain.clamp(raw.hi),
    };
    if clamped != raw {
        warnings.push(Warning {
            location: location.to_string(),
            message: format!(
                "{concept} interval {raw} lies outside domain [{}, {}]; clamped to {clamped}",
                domain.min, domain.max
            ),
        });
    }
    clamped
}

fn derive(
    concept: &str,
    operands: &BTreeMap<String, f64>,
    o: &Ontology,
    location: &str,
    warnings: &mut Vec<Warning>,
) -> Result<MetricConstraint, InvalidKind> {
    let id = o
        .id(concept)
        .map_err(|_| InvalidKind::UnknownConcept(concept.to_string()))?;
    let function = o
        .function_for(id)
        .ok_or_else(|| InvalidKind::NoFunction(concept.to_string()))?;
    if let Some(unknown) = operands.keys().find(|k| {
        !function
            .operands
            .iter()
            .any(|&op| o.concept(op).name == **k)
    }) {
        return Err(InvalidKind::UnknownOperand {
            target: concept.to_string(),
            operand: unknown.clone(),
        });
    }
    let value = o.eval_function(function, operands)?;
    let target = o.concept(id);
    if value.out_of_range {
        warnings.push(Warning {
            location: location.to_string(),
            message: format!(
                "derived {concept} = {} is outside domain [{}, {}]",
                value.value, target.domain.min, target.domain.max
            ),
        });
    }
    let interval = clamp_interval(
        concept,
        Interval::point(value.value),
        target.domain,
        location,
        &mut Vec::new(),
    );
    Ok(MetricConstraint {
        concept: id,
        concept_name: target.name.clone(),
        interval,
        unit: target.canonical_unit.clone(),
        origin: Origin::Derived,
    })
}

/// Parses one constraint in the textual grammar and resolves it.
pub fn parse_constraint(text: &str, o: &Ontology) -> Result<Loaded<MetricConstraint>, InvalidKind> {
    let expr = ConstraintExpr::parse(text)?;
    let mut warnings = Vec::new();
    let value = resolve(&expr, o, "constraint", &mut warnings)?;
    Ok(Loaded { value, warnings })
}
