//! Knowledge base of metric concepts.
//!
//! An [`Ontology`] holds the metric-concept taxonomy (a parent forest over
//! equivalence classes), the unit table with conversion rates, and the
//! derived-metric functions. It is immutable once loaded and is the only
//! source of subsumption answers for the matcher and of normalization bounds
//! for the ranker.

mod document;
pub mod expr;
pub mod units;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use document::{ConceptDoc, ConversionDoc, DomainDoc, FunctionDoc, OntologyDocument, UnitDoc};
pub use expr::{Expr, ExprError};
pub use units::{Conversion, Unit, UnitTable};

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("malformed ontology document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate concept '{0}'")]
    DuplicateConcept(String),
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error("concept '{concept}' names unknown parent '{parent}'")]
    DanglingParent { concept: String, parent: String },
    #[error("subsumption cycle through concept '{0}'")]
    Cycle(String),
    #[error("concept '{concept}' inherits conflicting parents '{first}' and '{second}' through its equivalence class")]
    ConflictingParents {
        concept: String,
        first: String,
        second: String,
    },
    #[error("concept '{0}' has an invalid domain (min must be finite and not exceed max)")]
    InvalidDomain(String),
    #[error("equivalence axiom needs at least two distinct members: {0:?}")]
    DegenerateEquivalence(Vec<String>),
    #[error("concept '{0}' appears in more than one equivalence axiom")]
    OverlappingEquivalence(String),
    #[error("equivalent concepts '{a}' and '{b}' have units of different dimensions")]
    EquivalenceDimension { a: String, b: String },
    #[error("duplicate unit '{0}'")]
    DuplicateUnit(String),
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("conversion {from} -> {to} has non-positive factor {factor}")]
    NonPositiveFactor {
        from: String,
        to: String,
        factor: f64,
    },
    #[error("conversion {from} -> {to} crosses dimensions")]
    ConversionAcrossDimensions { from: String, to: String },
    #[error("unit '{unit}' is not connected to '{reference}' by any conversion path")]
    DisconnectedUnit { unit: String, reference: String },
    #[error(
        "conversion {from} -> {to} is inconsistent: composed round-trip factor is {round_trip}"
    )]
    InconsistentConversion {
        from: String,
        to: String,
        round_trip: f64,
    },
    #[error("cannot convert between units '{from}' and '{to}' of different dimensions")]
    DimensionMismatch { from: String, to: String },
    #[error("function for '{target}': {source}")]
    Function {
        target: String,
        #[source]
        source: ExprError,
    },
    #[error("function for '{target}' uses '{variable}', which is not one of its operands")]
    FreeVariable { target: String, variable: String },
    #[error("concept '{0}' has more than one function")]
    DuplicateFunction(String),
    #[error("cannot read ontology: {0}")]
    Io(#[from] std::io::Error),
}

/// Index of a concept inside the [`Ontology`] that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(u32);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Service,
    Resource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        })
    }
}

/// Closed numeric range in a concept's canonical unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainRange {
    pub min: f64,
    pub max: f64,
}

impl DomainRange {
    pub fn new(min: f64, max: f64) -> Self {
        DomainRange { min, max }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.min <= value && value <= self.max
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone)]
pub struct MetricConcept {
    pub name: String,
    pub parent: Option<ConceptId>,
    pub kind: Kind,
    pub direction: Direction,
    pub canonical_unit: String,
    pub domain: DomainRange,
}

/// A derived metric: `target` is computed from `operands` by `expr`.
#[derive(Debug, Clone)]
pub struct MetricFunction {
    pub target: ConceptId,
    pub operands: Vec<ConceptId>,
    pub expr: Expr,
    pub source: String,
}

/// Result of evaluating a [`MetricFunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionValue {
    pub value: f64,
    /// Set when the value lies outside the target concept's domain range.
    pub out_of_range: bool,
}

#[derive(Debug, Clone)]
struct EquivalenceClass {
    members: Vec<ConceptId>,
    parent: Option<usize>,
    depth: usize,
}

#[derive(Debug, Clone)]
pub struct Ontology {
    concepts: Vec<MetricConcept>,
    by_name: HashMap<String, ConceptId>,
    class_of: Vec<usize>,
    classes: Vec<EquivalenceClass>,
    units: UnitTable,
    functions: Vec<MetricFunction>,
    function_by_target: HashMap<ConceptId, usize>,
}

impl Ontology {
    pub fn from_json(src: &str) -> Result<Self, OntologyError> {
        let doc: OntologyDocument = serde_json::from_str(src)?;
        Self::from_document(&doc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        let src = std::fs::read_to_string(path)?;
        Self::from_json(&src)
    }

    pub fn from_document(doc: &OntologyDocument) -> Result<Self, OntologyError> {
        let units = UnitTable::new(
            doc.units
                .iter()
                .map(|u| Unit {
                    name: u.name.clone(),
                    dimension: u.dimension.clone(),
                })
                .collect(),
            doc.conversions
                .iter()
                .map(|c| Conversion {
                    from: c.from.clone(),
                    to: c.to.clone(),
                    factor: c.factor,
                })
                .collect(),
        )?;

        let mut by_name = HashMap::with_capacity(doc.concepts.len());
        for (idx, c) in doc.concepts.iter().enumerate() {
            if by_name
                .insert(c.name.clone(), ConceptId(idx as u32))
                .is_some()
            {
                return Err(OntologyError::DuplicateConcept(c.name.clone()));
            }
        }

        let mut concepts = Vec::with_capacity(doc.concepts.len());
        for c in &doc.concepts {
            let parent = match &c.parent {
                None => None,
                Some(p) => Some(
                    *by_name
                        .get(p)
                        .ok_or_else(|| OntologyError::DanglingParent {
                            concept: c.name.clone(),
                            parent: p.clone(),
                        })?,
                ),
            };
            if !units.contains(&c.canonical_unit) {
                return Err(OntologyError::UnknownUnit(c.canonical_unit.clone()));
            }
            let domain = DomainRange::new(c.domain.min, c.domain.max);
            if !(domain.min.is_finite() && domain.max.is_finite() && domain.min <= domain.max) {
                return Err(OntologyError::InvalidDomain(c.name.clone()));
            }
            concepts.push(MetricConcept {
                name: c.name.clone(),
                parent,
                kind: c.kind,
                direction: c.direction,
                canonical_unit: c.canonical_unit.clone(),
                domain,
            });
        }

        let (class_of, classes) = build_classes(&concepts, &by_name, &units, &doc.equivalences)?;

        let mut ontology = Ontology {
            concepts,
            by_name,
            class_of,
            classes,
            units,
            functions: Vec::new(),
            function_by_target: HashMap::new(),
        };

        for f in &doc.functions {
            let function = ontology.compile_function(f)?;
            if ontology
                .function_by_target
                .insert(function.target, ontology.functions.len())
                .is_some()
            {
                return Err(OntologyError::DuplicateFunction(f.target.clone()));
            }
            ontology.functions.push(function);
        }
        Ok(ontology)
    }

    fn compile_function(&self, f: &FunctionDoc) -> Result<MetricFunction, OntologyError> {
        let target = self.id(&f.target)?;
        let operands = f
            .operands
            .iter()
            .map(|name| self.id(name))
            .collect::<Result<Vec<_>, _>>()?;
        let expr = Expr::parse(&f.expr).map_err(|source| OntologyError::Function {
            target: f.target.clone(),
            source,
        })?;
        if let Some(free) = expr
            .variables()
            .into_iter()
            .find(|v| !f.operands.iter().any(|o| o == v))
        {
            return Err(OntologyError::FreeVariable {
                target: f.target.clone(),
                variable: free.to_string(),
            });
        }
        Ok(MetricFunction {
            target,
            operands,
            expr,
            source: f.expr.clone(),
        })
    }

    pub fn id(&self, name: &str) -> Result<ConceptId, OntologyError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| OntologyError::UnknownConcept(name.to_string()))
    }

    pub fn concept(&self, id: ConceptId) -> &MetricConcept {
        &self.concepts[id.index()]
    }

    pub fn concepts(&self) -> impl Iterator<Item = (ConceptId, &MetricConcept)> {
        self.concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (ConceptId(i as u32), c))
    }

    pub fn units(&self) -> &UnitTable {
        &self.units
    }

    pub fn functions(&self) -> &[MetricFunction] {
        &self.functions
    }

    pub fn function_for(&self, target: ConceptId) -> Option<&MetricFunction> {
        self.function_by_target
            .get(&target)
            .map(|&i| &self.functions[i])
    }

    /// Decides `a ⊑ b` on concept ids.
    pub fn subsumes_id(&self, a: ConceptId, b: ConceptId) -> bool {
        let target = self.class_of[b.index()];
        let mut class = Some(self.class_of[a.index()]);
        while let Some(c) = class {
            if c == target {
                return true;
            }
            class = self.classes[c].parent;
        }
        false
    }

    pub fn equivalent_id(&self, a: ConceptId, b: ConceptId) -> bool {
        self.class_of[a.index()] == self.class_of[b.index()]
    }

    /// Decides `a ⊑ b`: reflexive, transitive, and true in both directions
    /// between members of one equivalence class.
    pub fn subsumes(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        Ok(self.subsumes_id(self.id(a)?, self.id(b)?))
    }

    pub fn equivalent(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        Ok(self.equivalent_id(self.id(a)?, self.id(b)?))
    }

    /// Number of parent steps from the concept's class to its root.
    pub fn depth(&self, id: ConceptId) -> usize {
        self.classes[self.class_of[id.index()]].depth
    }

    /// Members of the concept's equivalence class, including itself.
    pub fn equivalents(&self, id: ConceptId) -> &[ConceptId] {
        &self.classes[self.class_of[id.index()]].members
    }

    /// Concept names along the parent chain from `a` up to `b`, if `a ⊑ b`.
    ///
    /// Intermediate classes are represented by their first-declared member;
    /// the endpoints keep the names asked for.
    pub fn subsumption_chain(&self, a: ConceptId, b: ConceptId) -> Option<Vec<&str>> {
        if !self.subsumes_id(a, b) {
            return None;
        }
        let mut chain = vec![self.concept(a).name.as_str()];
        let target = self.class_of[b.index()];
        let mut class = self.class_of[a.index()];
        while class != target {
            class = self.classes[class].parent.expect("subsumption holds");
            if class == target {
                break;
            }
            chain.push(self.concept(self.classes[class].members[0]).name.as_str());
        }
        if a != b {
            chain.push(self.concept(b).name.as_str());
        }
        Some(chain)
    }

    pub fn convert(
        &self,
        value: f64,
        from_unit: &str,
        to_unit: &str,
    ) -> Result<f64, OntologyError> {
        self.units.convert(value, from_unit, to_unit)
    }

    /// Evaluates a derived-metric function over operand values given in each
    /// operand concept's canonical unit.
    pub fn eval_function(
        &self,
        function: &MetricFunction,
        operand_values: &BTreeMap<String, f64>,
    ) -> Result<FunctionValue, OntologyError> {
        let target = self.concept(function.target);
        let mut vars = BTreeMap::new();
        for &op in &function.operands {
            let name = &self.concept(op).name;
            let value = operand_values
                .get(name)
                .ok_or_else(|| OntologyError::Function {
                    target: target.name.clone(),
                    source: ExprError::MissingOperand(name.clone()),
                })?;
            vars.insert(name.clone(), *value);
        }
        let value = function
            .expr
            .eval(&vars)
            .map_err(|source| OntologyError::Function {
                target: target.name.clone(),
                source,
            })?;
        Ok(FunctionValue {
            value,
            out_of_range: !target.domain.contains(value),
        })
    }
}

fn build_classes(
    concepts: &[MetricConcept],
    by_name: &HashMap<String, ConceptId>,
    units: &UnitTable,
    axioms: &[Vec<String>],
) -> Result<(Vec<usize>, Vec<EquivalenceClass>), OntologyError> {
    let mut class_of: Vec<Option<usize>> = vec![None; concepts.len()];
    let mut classes: Vec<EquivalenceClass> = Vec::new();

    for axiom in axioms {
        let mut members = Vec::with_capacity(axiom.len());
        for name in axiom {
            let id = *by_name
                .get(name)
                .ok_or_else(|| OntologyError::UnknownConcept(name.clone()))?;
            if members.contains(&id) {
                return Err(OntologyError::DegenerateEquivalence(axiom.clone()));
            }
            if class_of[id.index()].is_some() {
                return Err(OntologyError::OverlappingEquivalence(name.clone()));
            }
            members.push(id);
        }
        if members.len() < 2 {
            return Err(OntologyError::DegenerateEquivalence(axiom.clone()));
        }
        let dim = units.dimension(&concepts[members[0].index()].canonical_unit);
        for m in &members[1..] {
            if units.dimension(&concepts[m.index()].canonical_unit) != dim {
                return Err(OntologyError::EquivalenceDimension {
                    a: concepts[members[0].index()].name.clone(),
                    b: concepts[m.index()].name.clone(),
                });
            }
        }
        for m in &members {
            class_of[m.index()] = Some(classes.len());
        }
        members.sort();
        classes.push(EquivalenceClass {
            members,
            parent: None,
            depth: 0,
        });
    }
    for (idx, slot) in class_of.iter_mut().enumerate() {
        if slot.is_none() {
            *slot = Some(classes.len());
            classes.push(EquivalenceClass {
                members: vec![ConceptId(idx as u32)],
                parent: None,
                depth: 0,
            });
        }
    }
    let class_of: Vec<usize> = class_of.into_iter().map(|c| c.expect("assigned")).collect();

    // Lift parent links to classes; every member must agree.
    for (class_idx, class) in classes.iter_mut().enumerate() {
        let mut lifted: Option<(usize, ConceptId)> = None;
        for &m in &class.members {
            let Some(p) = concepts[m.index()].parent else {
                continue;
            };
            let pc = class_of[p.index()];
            if pc == class_idx {
                return Err(OntologyError::Cycle(concepts[m.index()].name.clone()));
            }
            match lifted {
                Some((existing, first)) if existing != pc => {
                    return Err(OntologyError::ConflictingParents {
                        concept: concepts[m.index()].name.clone(),
                        first: concepts[first.index()].name.clone(),
                        second: concepts[p.index()].name.clone(),
                    });
                }
                Some(_) => {}
                None => lifted = Some((pc, p)),
            }
        }
        class.parent = lifted.map(|(pc, _)| pc);
    }

    // Depths; a walk longer than the class count means a cycle.
    for start in 0..classes.len() {
        let mut depth = 0;
        let mut cur = classes[start].parent;
        while let Some(c) = cur {
            depth += 1;
            if depth > classes.len() {
                let name = &concepts[classes[start].members[0].index()].name;
                return Err(OntologyError::Cycle(name.clone()));
            }
            cur = classes[c].parent;
        }
        classes[start].depth = depth;
    }

    Ok((class_of, classes))
}
