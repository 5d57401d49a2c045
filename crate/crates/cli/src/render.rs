//! Table and JSON renderings of command results.
//!
//! JSON objects come out with sorted keys (serde_json's default map) and
//! numbers with a fixed number of decimals, so reports diff cleanly.

use qosmatch_core::matcher::MetricPairing;
use qosmatch_core::ranker::{DeltaTerm, NormalizedInterval};
use qosmatch_core::{EvalReport, InterfaceMatch, MatchOutcome, RankedCandidate, Relation, Request};
use serde_json::{json, Number, Value};

pub(crate) const SCORE_DECIMALS: usize = 6;
pub(crate) const RATIO_DECIMALS: usize = 3;

/// A JSON number printed with exactly `decimals` digits after the point.
pub(crate) fn fixed(x: f64, decimals: usize) -> Value {
    let text = format!("{x:.decimals$}");
    let text = if text.starts_with('-') && text[1..].bytes().all(|b| b == b'0' || b == b'.') {
        text[1..].to_string()
    } else {
        text
    };
    Value::Number(
        text.parse::<Number>()
            .expect("formatted float is a JSON number"),
    )
}

pub(crate) fn score(x: f64) -> Value {
    fixed(x, SCORE_DECIMALS)
}

pub(crate) fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub(crate) fn relation_str(r: Relation) -> &'static str {
    match r {
        Relation::Equivalent => "equivalent",
        Relation::CandidateSubsumedByRequest => "candidate_subsumed_by_request",
        Relation::RequestSubsumedByCandidate => "request_subsumed_by_candidate",
    }
}

pub(crate) fn pairing_json(p: &MetricPairing) -> Value {
    json!({
        "request": p.request.concept_name,
        "candidate": p.candidate.concept_name,
        "relation": relation_str(p.relation),
    })
}

fn interface_match_json(im: &InterfaceMatch) -> Value {
    json!({
        "name": im.interface_name,
        "polarity": im.polarity.to_string(),
        "level": im.level.to_string(),
        "weight": im.weight,
        "pairings": im.pairings.iter().map(pairing_json).collect::<Vec<_>>(),
    })
}

fn threshold_json(r: &Request) -> Value {
    r.rank_threshold.map_or(Value::Null, score)
}

fn threshold_text(r: &Request) -> String {
    r.rank_threshold.map_or("none".into(), |t| format!("{t}"))
}

/// Left-aligned columns separated by two spaces.
fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|i| {
            rows.iter()
                .filter_map(|r| r.get(i))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i + 1 < row.len() {
                line += &format!("{cell:<w$}  ", w = widths[i]);
            } else {
                line += cell;
            }
        }
        out += line.trim_end();
        out.push('\n');
    }
    out
}

fn levels_summary(outcome: &MatchOutcome) -> String {
    outcome
        .interface_matches
        .iter()
        .map(|im| format!("{}={}", im.interface_name, im.level))
        .collect::<Vec<_>>()
        .join(", ")
}

fn weights(outcome: &MatchOutcome) -> String {
    let w: Vec<String> = outcome
        .interface_matches
        .iter()
        .map(|im| im.weight.to_string())
        .collect();
    format!("[{}]", w.join(", "))
}

pub(crate) fn match_table(request: &Request, sigma: &[MatchOutcome]) -> String {
    let mut out = format!(
        "request {}: {} of {} interfaces must match (mu = {})\n",
        request.name,
        request.mu,
        request.interface_count(),
        request.mu
    );
    if sigma.is_empty() {
        out += "no candidates matched\n";
        return out;
    }
    let mut rows = vec![vec![
        "component".into(),
        "matched".into(),
        "weights".into(),
        "levels".into(),
    ]];
    for s in sigma {
        rows.push(vec![
            s.component_name.clone(),
            s.matched_count.to_string(),
            weights(s),
            levels_summary(s),
        ]);
    }
    out.push('\n');
    out += &columns(&rows);
    out
}

pub(crate) fn match_json(request: &Request, sigma: &[MatchOutcome]) -> String {
    to_text(&json!({
        "request": request.name,
        "mu": request.mu,
        "candidates": sigma.iter().map(|s| json!({
            "component": s.component_name,
            "matched_count": s.matched_count,
            "interfaces": s.interface_matches.iter().map(interface_match_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    }))
}

pub(crate) fn interval_text(n: NormalizedInterval) -> String {
    format!("[{:.2}, {:.2}]", n.lo, n.hi)
}

pub(crate) fn interval_json(n: NormalizedInterval) -> Value {
    json!([score(n.lo), score(n.hi)])
}

pub(crate) fn term_json(t: &DeltaTerm) -> Value {
    json!({
        "request": {"concept": t.request_concept, "normalized": interval_json(t.request)},
        "candidate": {"concept": t.candidate_concept, "normalized": interval_json(t.candidate)},
        "delta": score(t.delta),
    })
}

pub(crate) fn select_table(
    request: &Request,
    matched: usize,
    ranked: &[RankedCandidate],
) -> String {
    let mut out = format!(
        "request {}: {} matched (mu = {}), {} ranked (threshold {})\n",
        request.name,
        matched,
        request.mu,
        ranked.len(),
        threshold_text(request)
    );
    if ranked.is_empty() {
        out += "no candidates selected\n";
        return out;
    }
    let mut rows = vec![vec![
        "rank".into(),
        "component".into(),
        "crank".into(),
        "weights".into(),
        "levels".into(),
    ]];
    for (i, rc) in ranked.iter().enumerate() {
        rows.push(vec![
            (i + 1).to_string(),
            rc.component_name.clone(),
            format!("{:.2}", rc.crank),
            weights(&rc.outcome),
            levels_summary(&rc.outcome),
        ]);
    }
    out.push('\n');
    out += &columns(&rows);
    for rc in ranked {
        out += &format!("\n{}  crank {:.2}\n", rc.component_name, rc.crank);
        let mut rows = Vec::new();
        for c in &rc.contributions {
            rows.push(vec![
                format!("  {}", c.interface_name),
                format!("weight {}", c.weight),
                format!("delta sum {:.2}", c.delta_sum),
                format!("contribution {:.2}", c.contribution),
            ]);
            for t in &c.terms {
                rows.push(vec![
                    format!("    {} {}", t.request_concept, interval_text(t.request)),
                    format!("{} {}", t.candidate_concept, interval_text(t.candidate)),
                    format!("delta {:.2}", t.delta),
                ]);
            }
        }
        out += &columns(&rows);
    }
    out
}

pub(crate) fn select_json(request: &Request, matched: usize, ranked: &[RankedCandidate]) -> String {
    to_text(&json!({
        "request": request.name,
        "mu": request.mu,
        "threshold": threshold_json(request),
        "matched_count": matched,
        "candidates": ranked.iter().enumerate().map(|(i, rc)| json!({
            "rank": i + 1,
            "component": rc.component_name,
            "crank": score(rc.crank),
            "interfaces": rc.outcome.interface_matches.iter().zip(&rc.contributions).map(|(im, c)| json!({
                "name": im.interface_name,
                "polarity": im.polarity.to_string(),
                "level": im.level.to_string(),
                "weight": im.weight,
                "delta_sum": score(c.delta_sum),
                "contribution": score(c.contribution),
                "terms": c.terms.iter().map(term_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    }))
}

fn ratio(x: f64) -> String {
    format!("{x:.RATIO_DECIMALS$}")
}

pub(crate) fn eval_table(reports: &[EvalReport]) -> String {
    let mut blocks = Vec::new();
    for report in reports {
        let mut rows = vec![vec!["Request".into(), "Precision".into(), "Recall".into()]];
        for r in &report.requests {
            rows.push(vec![r.request.clone(), ratio(r.precision), ratio(r.recall)]);
        }
        rows.push(vec![
            "Average".into(),
            ratio(report.average_precision),
            ratio(report.average_recall),
        ]);
        blocks.push(format!("{}\n{}", report.mode, columns(&rows)));
    }
    blocks.join("\n")
}

pub(crate) fn eval_json(reports: &[EvalReport]) -> String {
    to_text(&json!({
        "reports": reports.iter().map(|report| json!({
            "mode": report.mode.as_str(),
            "average_precision": fixed(report.average_precision, RATIO_DECIMALS),
            "average_recall": fixed(report.average_recall, RATIO_DECIMALS),
            "requests": report.requests.iter().map(|r| json!({
                "request": r.request,
                "selected": r.selected.iter().collect::<Vec<_>>(),
                "relevant_selected": r.relevant_selected_count,
                "precision": fixed(r.precision, RATIO_DECIMALS),
                "recall": fixed(r.recall, RATIO_DECIMALS),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    }))
}
