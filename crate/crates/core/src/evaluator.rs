//! Precision and recall of the selection pipeline against relevance
//! judgments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::{Catalog, Request};
use crate::matcher::match_all;
use crate::ontology::Ontology;
use crate::ranker::rank_all;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("malformed judgments document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("no relevance judgment for request '{0}'")]
    MissingJudgment(String),
    #[error("judgment for request '{request}' names unknown component '{component}'")]
    UnknownComponent { request: String, component: String },
}

/// Relevant component names per request name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelevanceJudgments(pub BTreeMap<String, BTreeSet<String>>);

impl RelevanceJudgments {
    pub fn from_json(src: &str) -> Result<Self, EvalError> {
        Ok(RelevanceJudgments(serde_json::from_str(src)?))
    }

    pub fn relevant(&self, request: &str) -> Option<&BTreeSet<String>> {
        self.0.get(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    MatchOnly,
    MatchAndRank,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::MatchOnly => "match_only",
            Mode::MatchAndRank => "match_and_rank",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "match_only" => Ok(Mode::MatchOnly),
            "match_and_rank" => Ok(Mode::MatchAndRank),
            other => Err(format!(
                "unknown mode '{other}' (expected match_only or match_and_rank)"
            )),
        }
    }
}

/// `(precision, recall)`. An empty selection has precision 1; an empty
/// relevant set has recall 1.
pub fn precision_recall(selected: &BTreeSet<String>, relevant: &BTreeSet<String>) -> (f64, f64) {
    let hits = selected.intersection(relevant).count() as f64;
    let precision = if selected.is_empty() {
        1.0
    } else {
        hits / selected.len() as f64
    };
    let recall = if relevant.is_empty() {
        1.0
    } else {
        hits / relevant.len() as f64
    };
    (precision, recall)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestEval {
    pub request: String,
    pub selected: BTreeSet<String>,
    pub relevant_selected_count: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: Mode,
    pub requests: Vec<RequestEval>,
    pub average_precision: f64,
    pub average_recall: f64,
}

/// Components the pipeline selects for one request in the given mode.
pub fn select(o: &Ontology, catalog: &Catalog, request: &Request, mode: Mode) -> BTreeSet<String> {
    let sigma = match_all(o, request, catalog);
    match mode {
        Mode::MatchOnly => sigma.into_iter().map(|s| s.component_name).collect(),
        Mode::MatchAndRank => rank_all(o, request, &sigma)
            .into_iter()
            .map(|r| r.component_name)
            .collect(),
    }
}

pub fn run_eval(
    o: &Ontology,
    catalog: &Catalog,
    requests: &[Request],
    judgments: &RelevanceJudgments,
    mode: Mode,
) -> Result<EvalReport, EvalError> {
    for r in requests {
        let relevant = judgments
            .relevant(&r.name)
            .ok_or_else(|| EvalError::MissingJudgment(r.name.clone()))?;
        if let Some(unknown) = relevant.iter().find(|c| catalog.component(c).is_none()) {
            return Err(EvalError::UnknownComponent {
                request: r.name.clone(),
                component: unknown.clone(),
            });
        }
    }

    let rows: Vec<RequestEval> = requests
        .par_iter()
        .map(|r| {
            let relevant = &judgments.0[&r.name];
            let selected = select(o, catalog, r, mode);
            let (precision, recall) = precision_recall(&selected, relevant);
            RequestEval {
                request: r.name.clone(),
                relevant_selected_count: selected.intersection(relevant).count(),
                selected,
                precision,
                recall,
            }
        })
        .collect();

    let count = rows.len().max(1) as f64;
    let average_precision = rows.iter().map(|r| r.precision).sum::<f64>() / count;
    let average_recall = rows.iter().map(|r| r.recall).sum::<f64>() / count;
    Ok(EvalReport {
        mode,
        requests: rows,
        average_precision,
        average_recall,
    })
}
