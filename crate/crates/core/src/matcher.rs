//! Subsumption-based matching of QoS profiles and μ-thresholded admission of
//! candidate components.
//!
//! For a request profile `M1 ⊓ … ⊓ Mt` and a candidate profile
//! `M'1 ⊓ … ⊓ M'v`:
//!
//! * **Plugin**: every `Mk` has some `M'k ⊑ Mk`;
//! * **Subsume**: every `M'k` has some `Mk ⊑ M'k`;
//! * **Exact**: every metric on either side has an equivalent on the other.
//!
//! Matching looks at concepts only; interval values are left to the ranker.

use std::cmp::Reverse;
use std::fmt;

use rayon::prelude::*;

use crate::catalog::{Catalog, Component, MetricConstraint, Polarity, QosProfile, Request};
use crate::ontology::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchLevel {
    Plugin,
    Subsume,
    Exact,
    Fail,
}

impl fmt::Display for MatchLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchLevel::Plugin => "Plugin",
            MatchLevel::Subsume => "Subsume",
            MatchLevel::Exact => "Exact",
            MatchLevel::Fail => "Fail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// candidate ⊑ request, strictly
    CandidateSubsumedByRequest,
    /// request ⊑ candidate, strictly
    RequestSubsumedByCandidate,
    Equivalent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricPairing {
    pub request: MetricConstraint,
    pub candidate: MetricConstraint,
    pub relation: Relation,
}

/// Which of the three rule bodies hold for a profile pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleConditions {
    pub plugin: bool,
    pub subsume: bool,
    pub exact: bool,
}

impl RuleConditions {
    /// Exact takes precedence, then Plugin, then Subsume.
    pub fn level(self) -> MatchLevel {
        if self.exact {
            MatchLevel::Exact
        } else if self.plugin {
            MatchLevel::Plugin
        } else if self.subsume {
            MatchLevel::Subsume
        } else {
            MatchLevel::Fail
        }
    }

    /// The level an interface of the given polarity receives, or `None` when
    /// no accepted level applies (Fail, Subsume-only on a provided interface,
    /// Plugin-only on a required one).
    pub fn resolve(self, polarity: Polarity) -> Option<MatchLevel> {
        match polarity {
            _ if self.exact => Some(MatchLevel::Exact),
            Polarity::Provided if self.plugin => Some(MatchLevel::Plugin),
            Polarity::Required if self.subsume => Some(MatchLevel::Subsume),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatch {
    pub level: MatchLevel,
    pub conditions: RuleConditions,
    /// Witnesses for the Plugin condition (empty unless it holds).
    pub plugin_pairings: Vec<MetricPairing>,
    /// Witnesses for the Subsume condition (empty unless it holds).
    pub subsume_pairings: Vec<MetricPairing>,
    /// Equivalence witnesses (empty unless Exact holds).
    pub exact_pairings: Vec<MetricPairing>,
    /// Request metrics that no candidate metric is subsumed by.
    pub plugin_unwitnessed: Vec<String>,
    /// Candidate metrics that no request metric is subsumed by.
    pub subsume_unwitnessed: Vec<String>,
}

impl ProfileMatch {
    pub fn pairings_for(&self, level: MatchLevel) -> &[MetricPairing] {
        match level {
            MatchLevel::Plugin => &self.plugin_pairings,
            MatchLevel::Subsume => &self.subsume_pairings,
            MatchLevel::Exact => &self.exact_pairings,
            MatchLevel::Fail => &[],
        }
    }

    pub fn pairings(&self) -> &[MetricPairing] {
        self.pairings_for(self.level)
    }
}

fn relation(
    o: &Ontology,
    request: &MetricConstraint,
    candidate: &MetricConstraint,
) -> Option<Relation> {
    if o.equivalent_id(request.concept, candidate.concept) {
        Some(Relation::Equivalent)
    } else if o.subsumes_id(candidate.concept, request.concept) {
        Some(Relation::CandidateSubsumedByRequest)
    } else if o.subsumes_id(request.concept, candidate.concept) {
        Some(Relation::RequestSubsumedByCandidate)
    } else {
        None
    }
}

/// Assigns each metric of `driving` at most one unused witness from
/// `witnesses` satisfying `eligible`, preferring the deepest concept and then
/// the smallest name. Pairings are always oriented (request, candidate).
fn assign_witnesses(
    o: &Ontology,
    driving: &[MetricConstraint],
    witnesses: &[MetricConstraint],
    driving_is_request: bool,
    eligible: impl Fn(&MetricConstraint, &MetricConstraint) -> bool,
) -> Vec<MetricPairing> {
    let mut used = vec![false; witnesses.len()];
    let mut out = Vec::new();
    for d in driving {
        let best = witnesses
            .iter()
            .enumerate()
            .filter(|(i, w)| !used[*i] && eligible(d, w))
            .min_by_key(|(_, w)| (Reverse(o.depth(w.concept)), w.concept_name.as_str()));
        if let Some((i, w)) = best {
            used[i] = true;
            let (request, candidate) = if driving_is_request { (d, w) } else { (w, d) };
            out.push(MetricPairing {
                request: request.clone(),
                candidate: candidate.clone(),
                relation: relation(o, request, candidate).expect("eligible pairs are related"),
            });
        }
    }
    out
}

/// Decides the match level between a request profile and a candidate profile.
pub fn match_profiles(o: &Ontology, request: &QosProfile, candidate: &QosProfile) -> ProfileMatch {
    let req = &request.constraints;
    let cand = &candidate.constraints;

    let plugin_unwitnessed: Vec<String> = req
        .iter()
        .filter(|r| !cand.iter().any(|c| o.subsumes_id(c.concept, r.concept)))
        .map(|r| r.concept_name.clone())
        .collect();
    let subsume_unwitnessed: Vec<String> = cand
        .iter()
        .filter(|c| !req.iter().any(|r| o.subsumes_id(r.concept, c.concept)))
        .map(|c| c.concept_name.clone())
        .collect();
    let exact = req
        .iter()
        .all(|r| cand.iter().any(|c| o.equivalent_id(r.concept, c.concept)))
        && cand
            .iter()
            .all(|c| req.iter().any(|r| o.equivalent_id(r.concept, c.concept)));

    let conditions = RuleConditions {
        plugin: plugin_unwitnessed.is_empty(),
        subsume: subsume_unwitnessed.is_empty(),
        exact,
    };

    let plugin_pairings = if conditions.plugin {
        assign_witnesses(o, req, cand, true, |r, c| {
            o.subsumes_id(c.concept, r.concept)
        })
    } else {
        Vec::new()
    };
    let subsume_pairings = if conditions.subsume {
        assign_witnesses(o, cand, req, false, |c, r| {
            o.subsumes_id(r.concept, c.concept)
        })
    } else {
        Vec::new()
    };
    let exact_pairings = if conditions.exact {
        assign_witnesses(o, req, cand, true, |r, c| {
            o.equivalent_id(r.concept, c.concept)
        })
    } else {
        Vec::new()
    };

    ProfileMatch {
        level: conditions.level(),
        conditions,
        plugin_pairings,
        subsume_pairings,
        exact_pairings,
        plugin_unwitnessed,
        subsume_unwitnessed,
    }
}

/// One entry of the QoSMatch vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMatch {
    pub interface_name: String,
    pub polarity: Polarity,
    pub level: MatchLevel,
    /// 2 for Plugin on a provided or Subsume on a required interface, 1 for Exact.
    pub weight: u8,
    pub pairings: Vec<MetricPairing>,
}

impl InterfaceMatch {
    pub fn weight_for(level: MatchLevel, polarity: Polarity) -> Option<u8> {
        match (level, polarity) {
            (MatchLevel::Exact, _) => Some(1),
            (MatchLevel::Plugin, Polarity::Provided)
            | (MatchLevel::Subsume, Polarity::Required) => Some(2),
            _ => None,
        }
    }

    fn from_profile_match(name: &str, polarity: Polarity, pm: &ProfileMatch) -> Option<Self> {
        let level = pm.conditions.resolve(polarity)?;
        let weight = Self::weight_for(level, polarity).expect("resolved levels carry a weight");
        Some(InterfaceMatch {
            interface_name: name.to_string(),
            polarity,
            level,
            weight,
            pairings: pm.pairings_for(level).to_vec(),
        })
    }

    pub fn weight_is_consistent(&self) -> bool {
        Self::weight_for(self.level, self.polarity) == Some(self.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub component_name: String,
    /// The compacted QoSMatch vector: only interfaces that matched.
    pub interface_matches: Vec<InterfaceMatch>,
    pub matched_count: usize,
}

/// Per-request-interface detail, including failures.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceAnalysis {
    pub interface_name: String,
    pub polarity: Polarity,
    /// `None` when the candidate has no interface with this name and polarity.
    pub profile_match: Option<ProfileMatch>,
    pub accepted: Option<InterfaceMatch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentAnalysis {
    pub component_name: String,
    pub interfaces: Vec<InterfaceAnalysis>,
    pub mu: usize,
}

impl ComponentAnalysis {
    pub fn matched_count(&self) -> usize {
        self.interfaces
            .iter()
            .filter(|i| i.accepted.is_some())
            .count()
    }

    pub fn admitted(&self) -> bool {
        self.matched_count() >= self.mu
    }

    pub fn into_outcome(self) -> MatchOutcome {
        let interface_matches: Vec<InterfaceMatch> = self
            .interfaces
            .into_iter()
            .filter_map(|i| i.accepted)
            .collect();
        MatchOutcome {
            component_name: self.component_name,
            matched_count: interface_matches.len(),
            interface_matches,
        }
    }
}

/// Matches every request interface against the same-name, same-polarity
/// interface of the candidate, whether or not the candidate is admitted.
pub fn analyze_component(
    o: &Ontology,
    request: &Request,
    component: &Component,
) -> ComponentAnalysis {
    let interfaces = request
        .interfaces()
        .map(|ri| {
            let profile_match = component
                .interface(&ri.name, ri.polarity)
                .map(|ci| match_profiles(o, &ri.profile, &ci.profile));
            let accepted = profile_match
                .as_ref()
                .and_then(|pm| InterfaceMatch::from_profile_match(&ri.name, ri.polarity, pm));
            InterfaceAnalysis {
                interface_name: ri.name.clone(),
                polarity: ri.polarity,
                profile_match,
                accepted,
            }
        })
        .collect();
    ComponentAnalysis {
        component_name: component.name.clone(),
        interfaces,
        mu: request.mu,
    }
}

/// Returns the candidate's outcome iff at least μ interfaces matched.
pub fn match_component(
    o: &Ontology,
    request: &Request,
    component: &Component,
) -> Option<MatchOutcome> {
    let analysis = analyze_component(o, request, component);
    analysis.admitted().then(|| analysis.into_outcome())
}

/// All admitted candidates, ordered by component name.
pub fn match_all(o: &Ontology, request: &Request, catalog: &Catalog) -> Vec<MatchOutcome> {
    let mut sigma: Vec<MatchOutcome> = catalog
        .components
        .par_iter()
        .filter_map(|c| match_component(o, request, c))
        .collect();
    sigma.sort_by(|a, b| a.component_name.cmp(&b.component_name));
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{parse_constraint, Interval};

    fn ontology() -> Ontology {
        Ontology::from_json(
            r#"{
            "concepts": [
                {"name": "Reliability", "kind": "service", "direction": "increasing", "canonical_unit": "percent", "domain": {"min": 99, "max": 100}},
                {"name": "MTTF", "parent": "Reliability", "kind": "service", "direction": "increasing", "canonical_unit": "percent", "domain": {"min": 99, "max": 100}},
                {"name": "Deep", "parent": "MTTF", "kind": "service", "direction": "increasing", "canonical_unit": "percent", "domain": {"min": 99, "max": 100}},
                {"name": "FrameRate", "kind": "service", "direction": "increasing", "canonical_unit": "fps", "domain": {"min": 25, "max": 72}},
                {"name": "FrameOutput", "kind": "service", "direction": "increasing", "canonical_unit": "fps", "domain": {"min": 25, "max": 72}},
                {"name": "ResponseTime", "kind": "resource", "direction": "decreasing", "canonical_unit": "ms", "domain": {"min": 0, "max": 1000}}
            ],
            "equivalences": [["FrameRate", "FrameOutput"]],
            "units": [{"name": "percent", "dimension": "p"}, {"name": "fps", "dimension": "f"}, {"name": "ms", "dimension": "t"}]
        }"#,
        )
        .unwrap()
    }

    fn profile(o: &Ontology, exprs: &[&str]) -> QosProfile {
        QosProfile {
            constraints: exprs
                .iter()
                .map(|e| parse_constraint(e, o).unwrap().value)
                .collect(),
        }
    }

    #[test]
    fn request_more_specific_is_subsume() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["MTTF >= 99.5"]),
            &profile(&o, &["Reliability >= 99.5"]),
        );
        assert_eq!(m.level, MatchLevel::Subsume);
        assert_eq!(m.pairings().len(), 1);
        assert_eq!(
            m.pairings()[0].relation,
            Relation::RequestSubsumedByCandidate
        );
    }

    #[test]
    fn identical_is_exact() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["FrameRate >= 25"]),
            &profile(&o, &["FrameRate >= 30"]),
        );
        assert_eq!(m.level, MatchLevel::Exact);
        let m = match_profiles(
            &o,
            &profile(&o, &["FrameOutput >= 25"]),
            &profile(&o, &["FrameRate >= 30"]),
        );
        assert_eq!(m.level, MatchLevel::Exact);
        assert_eq!(m.pairings()[0].relation, Relation::Equivalent);
    }

    #[test]
    fn unwitnessed_request_metric_blocks_plugin() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["FrameRate >= 25", "ResponseTime <= 10"]),
            &profile(&o, &["FrameRate >= 30"]),
        );
        assert_eq!(
            m.conditions,
            RuleConditions {
                plugin: false,
                subsume: true,
                exact: false
            }
        );
        assert_eq!(m.level, MatchLevel::Subsume);
        assert_eq!(m.plugin_unwitnessed, vec!["ResponseTime".to_string()]);
    }

    #[test]
    fn unrelated_is_fail() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["FrameRate >= 25"]),
            &profile(&o, &["MTTF >= 99"]),
        );
        assert_eq!(m.level, MatchLevel::Fail);
        assert!(m.pairings().is_empty());
    }

    #[test]
    fn deepest_witness_wins() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["Reliability >= 99"]),
            &profile(&o, &["MTTF >= 99.1", "Deep >= 99.2"]),
        );
        assert_eq!(m.level, MatchLevel::Plugin);
        assert_eq!(m.pairings().len(), 1);
        assert_eq!(m.pairings()[0].candidate.concept_name, "Deep");
        assert_eq!(
            m.pairings()[0].candidate.interval,
            Interval::new(99.2, 100.0)
        );
    }

    #[test]
    fn pairings_never_exceed_smaller_profile() {
        let o = ontology();
        let m = match_profiles(
            &o,
            &profile(&o, &["Reliability >= 99", "MTTF >= 99"]),
            &profile(&o, &["Deep >= 99.2"]),
        );
        assert!(m.conditions.plugin);
        assert_eq!(m.plugin_pairings.len(), 1);
    }

    #[test]
    fn polarity_resolution() {
        let both = RuleConditions {
            plugin: true,
            subsume: true,
            exact: false,
        };
        assert_eq!(both.resolve(Polarity::Provided), Some(MatchLevel::Plugin));
        assert_eq!(both.resolve(Polarity::Required), Some(MatchLevel::Subsume));
        let plugin_only = RuleConditions {
            plugin: true,
            ..Default::default()
        };
        assert_eq!(plugin_only.resolve(Polarity::Required), None);
        assert_eq!(
            InterfaceMatch::weight_for(MatchLevel::Subsume, Polarity::Provided),
            None
        );
        assert_eq!(
            InterfaceMatch::weight_for(MatchLevel::Exact, Polarity::Required),
            Some(1)
        );
    }
}
