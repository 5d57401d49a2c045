//! Random taxonomies, catalogs and requests for benchmarks and randomized
//! checks.
//!
//! Every concept shares one unit and the domain `[0, 1]`, so interval values
//! are already normalized. [`Taxonomy`] keeps the generating forest so callers
//! can decide subsumption without going through [`Ontology`].

use qosmatch_core::ontology::{ConceptDoc, Direction, DomainDoc, Kind, OntologyDocument, UnitDoc};
use qosmatch_core::{
    Catalog, Component, ConceptId, Interface, Interval, MetricConstraint, Ontology, Origin,
    Polarity, QosProfile, Request,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const UNIT: &str = "u";

pub struct Taxonomy {
    pub ontology: Ontology,
    pub names: Vec<String>,
    /// Equivalence class of each concept.
    pub class_of: Vec<usize>,
    pub class_parent: Vec<Option<usize>>,
}

impl Taxonomy {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, concept: usize) -> ConceptId {
        self.ontology
            .id(&self.names[concept])
            .expect("generated name")
    }

    pub fn index(&self, id: ConceptId) -> usize {
        let name = &self.ontology.concept(id).name;
        self.names
            .iter()
            .position(|n| n == name)
            .expect("generated name")
    }

    /// `a ⊑ b` read off the generating forest.
    pub fn subsumes(&self, a: usize, b: usize) -> bool {
        let target = self.class_of[b];
        let mut class = Some(self.class_of[a]);
        while let Some(c) = class {
            if c == target {
                return true;
            }
            class = self.class_parent[c];
        }
        false
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    pub fn class_count(&self) -> usize {
        self.class_parent.len()
    }
}

/// A random forest of equivalence classes over `concepts` concepts.
pub fn taxonomy<R: Rng>(rng: &mut R, concepts: usize) -> Taxonomy {
    assert!(concepts > 0);
    let mut class_of = Vec::with_capacity(concepts);
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..concepts {
        if !members.is_empty() && rng.gen_bool(0.25) {
            let c = rng.gen_range(0..members.len());
            members[c].push(i);
            class_of.push(c);
        } else {
            members.push(vec![i]);
            class_of.push(members.len() - 1);
        }
    }
    let class_parent: Vec<Option<usize>> = (0..members.len())
        .map(|k| (k > 0 && rng.gen_bool(0.7)).then(|| rng.gen_range(0..k)))
        .collect();

    let names: Vec<String> = (0..concepts).map(|i| format!("K{i}")).collect();
    let concept_docs = (0..concepts)
        .map(|i| {
            let class = class_of[i];
            let first = members[class][0] == i;
            let parent = class_parent[class]
                .filter(|_| first || rng.gen_bool(0.5))
                .map(|p| names[*members[p].choose(rng).expect("non-empty class")].clone());
            ConceptDoc {
                name: names[i].clone(),
                parent,
                kind: Kind::Service,
                direction: Direction::Increasing,
                canonical_unit: UNIT.into(),
                domain: DomainDoc { min: 0.0, max: 1.0 },
            }
        })
        .collect();
    let equivalences = members
        .iter()
        .filter(|m| m.len() > 1)
        .map(|m| m.iter().map(|&i| names[i].clone()).collect())
        .collect();
    let doc = OntologyDocument {
        concepts: concept_docs,
        equivalences,
        units: vec![UnitDoc {
            name: UNIT.into(),
            dimension: "d".into(),
        }],
        conversions: Vec::new(),
        functions: Vec::new(),
    };
    Taxonomy {
        ontology: Ontology::from_document(&doc).expect("generated ontology is valid"),
        names,
        class_of,
        class_parent,
    }
}

pub fn interval<R: Rng>(rng: &mut R) -> Interval {
    let a = rng.gen_range(0..=100) as f64 / 100.0;
    let b = rng.gen_range(0..=100) as f64 / 100.0;
    Interval::new(a.min(b), a.max(b))
}

pub fn constraint<R: Rng>(rng: &mut R, tax: &Taxonomy, concept: usize) -> MetricConstraint {
    MetricConstraint {
        concept: tax.id(concept),
        concept_name: tax.names[concept].clone(),
        interval: interval(rng),
        unit: UNIT.into(),
        origin: Origin::Declared,
    }
}

/// Between 1 and `max_metrics` metrics, no two from the same equivalence class.
pub fn profile<R: Rng>(rng: &mut R, tax: &Taxonomy, max_metrics: usize) -> QosProfile {
    let mut concepts: Vec<usize> = (0..tax.len()).collect();
    concepts.shuffle(rng);
    let want = rng.gen_range(1..=max_metrics.max(1));
    let mut classes = Vec::new();
    let mut constraints = Vec::new();
    for c in concepts {
        if constraints.len() == want {
            break;
        }
        if !classes.contains(&tax.class_of[c]) {
            classes.push(tax.class_of[c]);
            constraints.push(constraint(rng, tax, c));
        }
    }
    QosProfile { constraints }
}

/// Interface `I{j}` is provided for even `j` and required for odd `j`.
pub fn interface_name(j: usize) -> (String, Polarity) {
    let polarity = if j.is_multiple_of(2) {
        Polarity::Provided
    } else {
        Polarity::Required
    };
    (format!("I{j}"), polarity)
}

fn split(interfaces: Vec<Interface>) -> (Vec<Interface>, Vec<Interface>) {
    interfaces
        .into_iter()
        .partition(|i| i.polarity == Polarity::Provided)
}

pub fn component<R: Rng>(
    rng: &mut R,
    tax: &Taxonomy,
    name: String,
    interfaces: usize,
    max_metrics: usize,
) -> Component {
    let mut present: Vec<usize> = (0..interfaces).filter(|_| rng.gen_bool(0.85)).collect();
    if present.is_empty() {
        present.push(rng.gen_range(0..interfaces));
    }
    let list = present
        .into_iter()
        .map(|j| {
            let (name, polarity) = interface_name(j);
            Interface {
                name,
                polarity,
                profile: profile(rng, tax, max_metrics),
            }
        })
        .collect();
    let (provided, required) = split(list);
    Component {
        name,
        metadata: Default::default(),
        provided,
        required,
    }
}

pub fn catalog<R: Rng>(
    rng: &mut R,
    tax: &Taxonomy,
    components: usize,
    interfaces: usize,
    max_metrics: usize,
) -> Catalog {
    Catalog {
        components: (0..components)
            .map(|i| component(rng, tax, format!("C{i:05}"), interfaces, max_metrics))
            .collect(),
    }
}

pub fn request<R: Rng>(
    rng: &mut R,
    tax: &Taxonomy,
    interfaces: usize,
    max_metrics: usize,
    mu: usize,
) -> Request {
    let list = (0..interfaces)
        .map(|j| {
            let (name, polarity) = interface_name(j);
            Interface {
                name,
                polarity,
                profile: profile(rng, tax, max_metrics),
            }
        })
        .collect();
    let (provided, required) = split(list);
    Request {
        name: "R".into(),
        provided,
        required,
        mu: mu.clamp(1, interfaces),
        rank_threshold: None,
    }
}
