//! QoS-aware component selection.
//!
//! Selection runs in two steps. The [`matcher`] decides, per interface,
//! whether a candidate's QoS profile relates to the request's by subsumption
//! over the metric-concept taxonomy in the [`ontology`], and admits
//! candidates with at least μ matching interfaces. The [`ranker`] then
//! compares metric value intervals of admitted candidates and orders them by
//! their CRank dissimilarity. The [`evaluator`] measures precision and recall
//! of either step against relevance judgments.

pub mod catalog;
pub mod evaluator;
pub mod matcher;
pub mod ontology;
pub mod ranker;

use thiserror::Error;

pub use catalog::{
    load_requests, parse_constraint, Catalog, CatalogError, Component, Interface, Interval, Loaded,
    MetricConstraint, Origin, Polarity, QosProfile, Request, Warning,
};
pub use evaluator::{precision_recall, run_eval, EvalError, EvalReport, Mode, RelevanceJudgments};
pub use matcher::{
    analyze_component, match_all, match_component, match_profiles, InterfaceMatch, MatchLevel,
    MatchOutcome, MetricPairing, ProfileMatch, Relation,
};
pub use ontology::{
    ConceptId, DomainRange, MetricConcept, MetricFunction, Ontology, OntologyError,
};
pub use ranker::{
    crank, delta, normalize, normalize_interval, rank_all, NormalizedInterval, RankedCandidate,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    /// True when the failure came from reading a file rather than its content.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Ontology(OntologyError::Io(_)) | Error::Catalog(CatalogError::Io(_))
        )
    }
}
