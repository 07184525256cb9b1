//! Ranking the root verbs of candidate sentences against a property and its
//! qualifiers.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::embeddings::VectorModel;
use crate::ids::EntityId;
use crate::labeler::{Label, LabeledSentence, LabeledToken};
use crate::scalar::Real;
use crate::surface::DefinitionTerms;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPredicate<F> {
    pub predicate: String,
    /// Normalized to `[0, 1]`.
    pub score: F,
    pub raw: F,
    pub dist_local: F,
    pub dist_global: F,
    pub tf: F,
}

/// The root word of a sentence when it is one of its redundant words.
pub fn root_predicate(ls: &LabeledSentence) -> Option<String> {
    let root = ls.root?;
    ls.redundant_words
        .iter()
        .find(|(_, i)| *i == root)
        .map(|(w, _)| w.to_lowercase())
}

fn qualifier_tokens(ls: &LabeledSentence, only: Option<EntityId>) -> Vec<String> {
    ls.tokens
        .iter()
        .filter_map(|t| match t {
            LabeledToken::Label {
                label: l @ Label::Qualifier { property, .. },
                ..
            } if only.is_none_or(|q| q == *property) => Some(l.to_string()),
            _ => None,
        })
        .collect()
}

/// Mean normalized similarity of `word` to `targets`; unknown pairs count
/// zero and an empty target set gives zero.
pub fn mean_sim<F: Real, S: AsRef<str>>(word: &str, targets: &[S], model: &VectorModel<F>) -> F {
    if targets.is_empty() {
        return F::zero();
    }
    let sum: F = targets
        .iter()
        .map(|t| model.sim01(word, t.as_ref()).unwrap_or(F::zero()))
        .sum();
    sum / F::from_count(targets.len() as u64)
}

/// `ln(3 dl dg tf / (dl + dg + tf))`, negative infinity when any factor is zero.
pub fn raw_score<F: Real>(dl: F, dg: F, tf: F) -> F {
    let den = dl + dg + tf;
    if den <= F::zero() {
        return F::neg_infinity();
    }
    (F::lit(3.0) * dl * dg * tf / den).ln()
}

/// Min-max normalization. Negative infinity maps to zero; when all finite
/// values coincide they all map to one.
pub fn normalize<F: Real>(raw: &[F]) -> Vec<F> {
    let finite: Vec<F> = raw.iter().copied().filter(|x| x.is_finite()).collect();
    let Some(min) = finite.iter().copied().reduce(F::min) else {
        return vec![F::zero(); raw.len()];
    };
    let max = finite.iter().copied().fold(min, F::max);
    raw.iter()
        .map(|&x| {
            if !x.is_finite() {
                F::zero()
            } else if max == min {
                F::one()
            } else {
                (x - min) / (max - min)
            }
        })
        .collect()
}

fn rank<F: Real>(
    dataset: &[LabeledSentence],
    qualifier: Option<EntityId>,
    local: &VectorModel<F>,
    global: &VectorModel<F>,
    terms: &DefinitionTerms,
) -> Vec<RankedPredicate<F>> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut cooc: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for ls in dataset {
        let tokens = qualifier_tokens(ls, qualifier);
        if qualifier.is_some() && tokens.is_empty() {
            continue;
        }
        let Some(p) = root_predicate(ls) else { continue };
        *counts.entry(p.clone()).or_default() += 1;
        cooc.entry(p).or_default().extend(tokens);
    }
    let total: u64 = counts.values().sum();
    let definition: Vec<&str> = terms.terms.iter().map(String::as_str).collect();
    let mut out: Vec<RankedPredicate<F>> = counts
        .iter()
        .map(|(p, &n)| {
            let q: Vec<&String> = cooc[p].iter().collect();
            let dist_local = mean_sim(p, &q, local);
            let dist_global = mean_sim(p, &definition, global);
            let tf = F::from_count(n) / F::from_count(total);
            RankedPredicate {
                predicate: p.clone(),
                score: F::zero(),
                raw: raw_score(dist_local, dist_global, tf),
                dist_local,
                dist_global,
                tf,
            }
        })
        .collect();
    let scores = normalize(&out.iter().map(|r| r.raw).collect::<Vec<_>>());
    for (r, s) in out.iter_mut().zip(scores) {
        r.score = s;
    }
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("finite")
            .then_with(|| a.predicate.cmp(&b.predicate))
    });
    out
}

/// Root predicates of `dataset` ranked against the property whose
/// definition terms are given. Empty when no sentence has a redundant root.
pub fn predicate_relevance<F: Real>(
    dataset: &[LabeledSentence],
    local: &VectorModel<F>,
    global: &VectorModel<F>,
    terms: &DefinitionTerms,
) -> Vec<RankedPredicate<F>> {
    rank(dataset, None, local, global, terms)
}

/// One ranking per qualifier property, each over the sentences carrying a
/// label of that qualifier.
pub fn qualifier_relevance<F: Real>(
    dataset: &[LabeledSentence],
    local: &VectorModel<F>,
    global: &VectorModel<F>,
    terms: &DefinitionTerms,
) -> BTreeMap<EntityId, Vec<RankedPredicate<F>>> {
    let qualifiers: BTreeSet<EntityId> = dataset
        .iter()
        .flat_map(|ls| ls.substitutions())
        .filter_map(|(_, l)| match l {
            Label::Qualifier { property, .. } => Some(*property),
            _ => None,
        })
        .collect();
    qualifiers
        .into_iter()
        .map(|q| (q, rank(dataset, Some(q), local, global, terms)))
        .collect()
}
