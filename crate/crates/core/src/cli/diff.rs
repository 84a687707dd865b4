//! Sentence-validity comparison across the eight presentations.
//!
//! A sentence is *valid over a corpus* for a presentation when it is
//! true at every world of every admissible corpus member.  The
//! constant-domain and bidirectional presentations are definitional
//! relativizations — the same clauses over a narrower class — so the
//! report recomputes their columns through the base clauses and flags
//! any divergence.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::kripke::{generate_random_model, ClassReq, KripkeModel, RandomModelParams};
use crate::semantics::{check_admissible, eval, Logic};
use crate::syntax::{parse_formula, Signature};

/// Per-sentence verdicts keyed by presentation label.
#[derive(Debug, Clone, Serialize)]
pub struct SentenceReport {
    pub sentence: String,
    pub verdicts: BTreeMap<String, String>,
}

/// Validity table over a fixed corpus.
#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub corpus: usize,
    pub admissible: BTreeMap<String, usize>,
    pub sentences: Vec<SentenceReport>,
    pub relativizations_ok: bool,
}

/// A deterministic mixed-class corpus: the seeds cycle through the four
/// admissibility classes so every presentation has members to quantify
/// over.
pub fn seeded_corpus(sig: &Signature, seeds: usize, seed: u64) -> Vec<(String, KripkeModel)> {
    let classes = [ClassReq::Any, ClassReq::In, ClassReq::Su, ClassReq::Bi];
    (0..seeds)
        .filter_map(|i| {
            let params = RandomModelParams {
                sig: sig.clone(),
                max_worlds: 4,
                max_domain: 3,
                class: classes[i % classes.len()],
                rooted: false,
            };
            let case = seed.wrapping_add(i as u64);
            generate_random_model(case, &params)
                .ok()
                .map(|m| (format!("seed:{case}"), m))
        })
        .collect()
}

fn verdict(logic: Logic, sentence: &str, members: &[&(String, KripkeModel)]) -> String {
    if members.is_empty() {
        return "n/a (no admissible models)".to_string();
    }
    for (label, m) in members {
        let f = match parse_formula(sentence, m.sig()) {
            Ok(f) => f,
            Err(e) => return format!("n/a ({e})"),
        };
        for w in m.worlds() {
            match eval(logic, m, w, &f, &[]) {
                Ok(true) => {}
                Ok(false) => return format!("countermodel {label}@{w}"),
                Err(e) => return format!("n/a ({e})"),
            }
        }
    }
    "valid".to_string()
}

/// Builds the verdict table and checks the definitional relativizations
/// (each non-base column must equal the base clauses run over its own
/// admissible subcorpus).
pub fn diff_logics(sentences: &[String], corpus: &[(String, KripkeModel)]) -> DiffReport {
    let mut admissible = BTreeMap::new();
    let mut members: BTreeMap<Logic, Vec<&(String, KripkeModel)>> = BTreeMap::new();
    for logic in Logic::ALL {
        let hits: Vec<&(String, KripkeModel)> = corpus
            .iter()
            .filter(|(_, m)| check_admissible(logic, m).is_ok())
            .collect();
        admissible.insert(logic.to_string(), hits.len());
        members.insert(logic, hits);
    }

    // Inapplicability messages name the presentation, so `n/a` rows
    // compare as a class rather than verbatim.
    fn comparable(v: &str) -> &str {
        if v.starts_with("n/a") {
            "n/a"
        } else {
            v
        }
    }

    let mut reports = Vec::new();
    let mut relativizations_ok = true;
    for sentence in sentences {
        let mut verdicts = BTreeMap::new();
        for logic in Logic::ALL {
            let own = verdict(logic, sentence, &members[&logic]);
            let base = if logic.has_equality() { Logic::IlEq } else { Logic::Il };
            if logic != base
                && comparable(&verdict(base, sentence, &members[&logic])) != comparable(&own)
            {
                relativizations_ok = false;
            }
            verdicts.insert(logic.to_string(), own);
        }
        reports.push(SentenceReport {
            sentence: sentence.clone(),
            verdicts,
        });
    }

    DiffReport {
        corpus: corpus.len(),
        admissible,
        sentences: reports,
        relativizations_ok,
    }
}
