//! Interval-distance ranking of matched candidates.
//!
//! Each paired metric interval is min-max normalized against its concept's
//! domain range, the distance between request and candidate intervals is
//! `(|hi - hi'| + |lo - lo'|) / 2`, and a candidate's CRank is
//!
//! ```text
//! CRank = Σ_j (1 / weight_j) · Σ_k δ(M_k, M'_k)
//! ```
//!
//! over its matched interfaces `j` and their metric pairings `k`. Smaller is
//! better.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::catalog::{MetricConstraint, Request};
use crate::matcher::{MatchOutcome, MetricPairing};
use crate::ontology::{DomainRange, Ontology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl NormalizedInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi);
        NormalizedInterval { lo, hi }
    }
}

/// Min-max normalization into `[0, 1]`. Values outside the range are clamped
/// first; a degenerate range maps everything to 0.
pub fn normalize(value: f64, range: DomainRange) -> f64 {
    let clamped = range.clamp(value);
    if clamped != value {
        log::warn!(
            "value {value} outside [{}, {}] clamped before normalization",
            range.min,
            range.max
        );
    }
    if range.max == range.min {
        return 0.0;
    }
    (clamped - range.min) / (range.max - range.min)
}

pub fn normalize_interval(c: &MetricConstraint, range: DomainRange) -> NormalizedInterval {
    NormalizedInterval::new(
        normalize(c.interval.lo, range),
        normalize(c.interval.hi, range),
    )
}

/// Distance between two normalized intervals.
pub fn delta(a: NormalizedInterval, b: NormalizedInterval) -> f64 {
    ((a.hi - b.hi).abs() + (a.lo - b.lo).abs()) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    pub request_concept: String,
    pub candidate_concept: String,
    pub request: NormalizedInterval,
    pub candidate: NormalizedInterval,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceContribution {
    pub interface_name: String,
    pub weight: u8,
    pub delta_sum: f64,
    /// `delta_sum / weight`
    pub contribution: f64,
    pub terms: Vec<DeltaTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub component_name: String,
    pub crank: f64,
    pub outcome: MatchOutcome,
    pub contributions: Vec<InterfaceContribution>,
}

fn term(o: &Ontology, p: &MetricPairing) -> DeltaTerm {
    let request = normalize_interval(&p.request, o.concept(p.request.concept).domain);
    let candidate = normalize_interval(&p.candidate, o.concept(p.candidate.concept).domain);
    DeltaTerm {
        request_concept: p.request.concept_name.clone(),
        candidate_concept: p.candidate.concept_name.clone(),
        request,
        candidate,
        delta: delta(request, candidate),
    }
}

/// Scores one matcher outcome. Interface weights are taken from the outcome.
pub fn crank(o: &Ontology, outcome: &MatchOutcome) -> RankedCandidate {
    let contributions: Vec<InterfaceContribution> = outcome
        .interface_matches
        .iter()
        .map(|im| {
            let terms: Vec<DeltaTerm> = im.pairings.iter().map(|p| term(o, p)).collect();
            let delta_sum: f64 = terms.iter().map(|t| t.delta).sum();
            InterfaceContribution {
                interface_name: im.interface_name.clone(),
                weight: im.weight,
                delta_sum,
                contribution: delta_sum / f64::from(im.weight),
                terms,
            }
        })
        .collect();
    RankedCandidate {
        component_name: outcome.component_name.clone(),
        crank: contributions.iter().map(|c| c.contribution).sum(),
        outcome: outcome.clone(),
        contributions,
    }
}

/// Ascending CRank, then component name.
pub fn compare(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    a.crank
        .total_cmp(&b.crank)
        .then_with(|| a.component_name.cmp(&b.component_name))
}

/// Scores all outcomes, keeps those within the request's rank threshold (all
/// of them when it has none), and sorts best first.
pub fn rank_all(o: &Ontology, request: &Request, sigma: &[MatchOutcome]) -> Vec<RankedCandidate> {
    let mut ranked: Vec<RankedCandidate> = sigma
        .par_iter()
        .map(|outcome| crank(o, outcome))
        .filter(|rc| request.rank_threshold.map_or(true, |t| rc.crank <= t))
        .collect();
    ranked.sort_by(compare);
    ranked
}
