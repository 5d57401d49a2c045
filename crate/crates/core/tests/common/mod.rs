#![allow(dead_code)]

use std::path::PathBuf;

use qosmatch_core::{Catalog, Interval, MetricConstraint, Ontology, Origin, QosProfile, Request};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::json;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn ontology() -> Ontology {
    Ontology::from_path(fixture("ontology.json")).unwrap()
}

pub fn camera() -> (Ontology, Catalog, Request) {
    let o = ontology();
    let cat = Catalog::from_path(fixture("camera/catalog.json"), &o)
        .unwrap()
        .value;
    let req = Request::from_path(fixture("camera/request.json"), &o)
        .unwrap()
        .value;
    (o, cat, req)
}

/// A random taxonomy plus the forest it was generated from.
pub struct Forest {
    pub ontology: Ontology,
    pub names: Vec<String>,
    pub class_of: Vec<usize>,
    pub class_parent: Vec<Option<usize>>,
}

impl Forest {
    pub fn subsumes(&self, a: usize, b: usize) -> bool {
        let mut c = Some(self.class_of[a]);
        while let Some(k) = c {
            if k == self.class_of[b] {
                return true;
            }
            c = self.class_parent[k];
        }
        false
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    pub fn metric(&self, concept: usize, interval: Interval) -> MetricConstraint {
        MetricConstraint {
            concept: self.ontology.id(&self.names[concept]).unwrap(),
            concept_name: self.names[concept].clone(),
            interval,
            unit: "u".into(),
            origin: Origin::Declared,
        }
    }

    pub fn index(&self, m: &MetricConstraint) -> usize {
        self.names
            .iter()
            .position(|n| *n == m.concept_name)
            .unwrap()
    }

    /// 1..=max metrics over distinct classes, random intervals in [0, 1].
    pub fn profile(&self, rng: &mut StdRng, max: usize) -> QosProfile {
        let mut order: Vec<usize> = (0..self.names.len()).collect();
        order.shuffle(rng);
        let want = rng.gen_range(1..=max);
        let mut seen = Vec::new();
        let mut constraints = Vec::new();
        for c in order {
            if constraints.len() < want && !seen.contains(&self.class_of[c]) {
                seen.push(self.class_of[c]);
                constraints.push(self.metric(c, interval(rng)));
            }
        }
        QosProfile { constraints }
    }
}

pub fn interval(rng: &mut StdRng) -> Interval {
    let (a, b): (f64, f64) = (rng.gen(), rng.gen());
    Interval::new(a.min(b), a.max(b))
}

pub fn forest(seed: u64, n: usize) -> Forest {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut class_of = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if !members.is_empty() && rng.gen_bool(0.3) {
            let k = rng.gen_range(0..members.len());
            members[k].push(i);
            class_of.push(k);
        } else {
            class_of.push(members.len());
            members.push(vec![i]);
        }
    }
    let class_parent: Vec<Option<usize>> = (0..members.len())
        .map(|k| (k > 0 && rng.gen_bool(0.75)).then(|| rng.gen_range(0..k)))
        .collect();
    let names: Vec<String> = (0..n).map(|i| format!("M{i}")).collect();
    let concepts: Vec<_> = (0..n)
        .map(|i| {
            let k = class_of[i];
            let mut c = json!({
                "name": names[i], "kind": "service", "direction": "increasing",
                "canonical_unit": "u", "domain": {"min": 0, "max": 1}
            });
            if let Some(p) = class_parent[k] {
                if members[k][0] == i || rng.gen_bool(0.5) {
                    c["parent"] = json!(names[*members[p].choose(&mut rng).unwrap()]);
                }
            }
            c
        })
        .collect();
    let equivalences: Vec<Vec<&str>> = members
        .iter()
        .filter(|m| m.len() > 1)
        .map(|m| m.iter().map(|&i| names[i].as_str()).collect())
        .collect();
    let doc = json!({
        "concepts": concepts,
        "equivalences": equivalences,
        "units": [{"name": "u", "dimension": "d"}],
    });
    Forest {
        ontology: Ontology::from_json(&doc.to_string()).unwrap(),
        names,
        class_of,
        class_parent,
    }
}
