//! `explain`: why a component did or did not match, and where its CRank
//! comes from.

use qosmatch_core::matcher::{ComponentAnalysis, InterfaceAnalysis, MetricPairing};
use qosmatch_core::ranker::{crank, InterfaceContribution};
use qosmatch_core::{
    Component, Interface, MatchLevel, MetricConstraint, Ontology, Polarity, Relation, Request,
};
use serde_json::{json, Value};

use crate::render::{interval_json, interval_text, relation_str, score, term_json, to_text};

fn request_interface<'a>(request: &'a Request, name: &str, polarity: Polarity) -> &'a Interface {
    request
        .interfaces()
        .find(|i| i.name == name && i.polarity == polarity)
        .expect("analysis follows the request's interfaces")
}

/// `A ⊑ B ⊑ C` along the parent chain, or `A ≡ B`.
fn witness_chain(o: &Ontology, p: &MetricPairing) -> String {
    let (lower, upper) = match p.relation {
        Relation::Equivalent => {
            return format!("{} ≡ {}", p.request.concept_name, p.candidate.concept_name);
        }
        Relation::CandidateSubsumedByRequest => (&p.candidate, &p.request),
        Relation::RequestSubsumedByCandidate => (&p.request, &p.candidate),
    };
    o.subsumption_chain(lower.concept, upper.concept)
        .map(|names| names.join(" ⊑ "))
        .unwrap_or_else(|| format!("{} ⊑ {}", lower.concept_name, upper.concept_name))
}

fn related(o: &Ontology, a: &MetricConstraint, b: &MetricConstraint) -> bool {
    o.subsumes_id(a.concept, b.concept) || o.subsumes_id(b.concept, a.concept)
}

fn reasons(
    o: &Ontology,
    request: &Request,
    component: &Component,
    ia: &InterfaceAnalysis,
) -> Vec<String> {
    let (Some(pm), Some(ci)) = (
        &ia.profile_match,
        component.interface(&ia.interface_name, ia.polarity),
    ) else {
        return vec![format!(
            "candidate has no {} interface named {}",
            ia.polarity, ia.interface_name
        )];
    };
    if ia.accepted.is_some() {
        return Vec::new();
    }
    if pm.level != MatchLevel::Fail {
        let needed = match ia.polarity {
            Polarity::Provided => "Plugin",
            Polarity::Required => "Subsume",
        };
        return vec![format!(
            "{} holds, but a {} interface needs {needed} or Exact",
            pm.level, ia.polarity
        )];
    }
    let req = &request_interface(request, &ia.interface_name, ia.polarity)
        .profile
        .constraints;
    let cand = &ci.profile.constraints;
    let mut out = Vec::new();
    for r in req {
        if !cand.iter().any(|c| related(o, r, c)) {
            let names: Vec<&str> = cand.iter().map(|c| c.concept_name.as_str()).collect();
            out.push(format!(
                "no subsumption between {} and {}",
                names.join(", "),
                r.concept_name
            ));
        }
    }
    if out.is_empty() {
        for r in &pm.plugin_unwitnessed {
            out.push(format!(
                "Plugin fails: no candidate metric is subsumed by {r}"
            ));
        }
        for c in &pm.subsume_unwitnessed {
            out.push(format!(
                "Subsume fails: no request metric is subsumed by {c}"
            ));
        }
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

struct Explained<'a> {
    analysis: &'a InterfaceAnalysis,
    contribution: Option<&'a InterfaceContribution>,
    reasons: Vec<String>,
}

fn explained<'a>(
    o: &Ontology,
    request: &Request,
    component: &Component,
    analysis: &'a ComponentAnalysis,
    contributions: &'a [InterfaceContribution],
) -> Vec<Explained<'a>> {
    let mut accepted = contributions.iter();
    analysis
        .interfaces
        .iter()
        .map(|ia| Explained {
            analysis: ia,
            contribution: ia.accepted.as_ref().and_then(|_| accepted.next()),
            reasons: reasons(o, request, component, ia),
        })
        .collect()
}

pub(crate) fn text(
    o: &Ontology,
    request: &Request,
    component: &Component,
    analysis: &ComponentAnalysis,
) -> String {
    let ranked = crank(o, &analysis.clone().into_outcome());
    let mut out = format!(
        "{} against request {} (mu = {})\n",
        component.name, request.name, request.mu
    );
    for e in explained(o, request, component, analysis, &ranked.contributions) {
        let ia = e.analysis;
        out += &format!("\n{} {}: ", ia.polarity, ia.interface_name);
        match &ia.accepted {
            Some(im) => out += &format!("{} (weight {})\n", im.level, im.weight),
            None => out += "Fail\n",
        }
        if let Some(pm) = &ia.profile_match {
            out += &format!(
                "  conditions: plugin {}, subsume {}, exact {}\n",
                yes_no(pm.conditions.plugin),
                yes_no(pm.conditions.subsume),
                yes_no(pm.conditions.exact)
            );
        }
        for r in &e.reasons {
            out += &format!("  {r}\n");
        }
        if let (Some(im), Some(c)) = (&ia.accepted, e.contribution) {
            for (p, t) in im.pairings.iter().zip(&c.terms) {
                out += &format!("  {}\n", witness_chain(o, p));
                out += &format!(
                    "    request   {} {} {}  normalized {}\n",
                    p.request.concept_name,
                    p.request.interval,
                    p.request.unit,
                    interval_text(t.request)
                );
                out += &format!(
                    "    candidate {} {} {}  normalized {}\n",
                    p.candidate.concept_name,
                    p.candidate.interval,
                    p.candidate.unit,
                    interval_text(t.candidate)
                );
                out += &format!("    delta {:.2}\n", t.delta);
            }
            out += &format!(
                "  delta sum {:.2} / weight {} = {:.2}\n",
                c.delta_sum, c.weight, c.contribution
            );
        }
    }
    out += &format!(
        "\n{} of {} interfaces matched: {} (mu = {})\n",
        analysis.matched_count(),
        analysis.interfaces.len(),
        if analysis.admitted() {
            "admitted"
        } else {
            "not admitted"
        },
        analysis.mu
    );
    out += &format!("crank {:.2}", ranked.crank);
    match request.rank_threshold {
        Some(t) if ranked.crank > t => out += &format!(" (above threshold {t})"),
        Some(t) => out += &format!(" (within threshold {t})"),
        None => {}
    }
    out.push('\n');
    out
}

pub(crate) fn json(
    o: &Ontology,
    request: &Request,
    component: &Component,
    analysis: &ComponentAnalysis,
) -> String {
    let ranked = crank(o, &analysis.clone().into_outcome());
    let interfaces: Vec<Value> = explained(o, request, component, analysis, &ranked.contributions)
        .into_iter()
        .map(|e| {
            let ia = e.analysis;
            let mut v = json!({
                "name": ia.interface_name,
                "polarity": ia.polarity.to_string(),
                "candidate_has_interface": ia.profile_match.is_some(),
                "level": ia.accepted.as_ref().map_or(MatchLevel::Fail, |im| im.level).to_string(),
                "reasons": e.reasons,
            });
            if let Some(pm) = &ia.profile_match {
                v["conditions"] = json!({
                    "plugin": pm.conditions.plugin,
                    "subsume": pm.conditions.subsume,
                    "exact": pm.conditions.exact,
                });
            }
            if let (Some(im), Some(c)) = (&ia.accepted, e.contribution) {
                v["weight"] = json!(im.weight);
                v["delta_sum"] = score(c.delta_sum);
                v["contribution"] = score(c.contribution);
                v["witnesses"] = im
                    .pairings
                    .iter()
                    .zip(&c.terms)
                    .map(|(p, t)| {
                        let mut w = term_json(t);
                        w["relation"] = json!(relation_str(p.relation));
                        w["chain"] = json!(witness_chain(o, p));
                        w["request"]["interval"] =
                            json!([score(p.request.interval.lo), score(p.request.interval.hi)]);
                        w["candidate"]["interval"] = json!([
                            score(p.candidate.interval.lo),
                            score(p.candidate.interval.hi)
                        ]);
                        w["request"]["normalized"] = interval_json(t.request);
                        w
                    })
                    .collect();
            }
            v
        })
        .collect();
    to_text(&json!({
        "component": component.name,
        "request": request.name,
        "mu": request.mu,
        "matched_count": analysis.matched_count(),
        "admitted": analysis.admitted(),
        "crank": score(ranked.crank),
        "interfaces": interfaces,
    }))
}
