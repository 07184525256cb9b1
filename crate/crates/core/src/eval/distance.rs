//! Distances between the redundant words of a labeled sentence and its quad
//! items, and the per-sentence feature vectors built from them.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::embeddings::VectorModel;
use crate::error::{Error, Result};
use crate::labeler::LabeledSentence;
use crate::scalar::Real;

/// Lower bound applied to a word distance before the product form.
pub const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    None,
    Tf,
    Idf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductForm {
    /// `-ln ∏ ln(1 + 1/d)` with `d` clamped at [`EPSILON`].
    #[default]
    Clamped,
    /// `-ln ∏ ln(1/d)`, undefined when any `d >= 1`.
    Raw,
}

/// Token and document frequencies over the whitespace tokens of labeled
/// sentences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermStats {
    pub tf: BTreeMap<String, u64>,
    pub df: BTreeMap<String, u64>,
    pub docs: u64,
}

impl TermStats {
    pub fn from_corpus(corpus: &[LabeledSentence]) -> TermStats {
        let mut stats = TermStats::default();
        for ls in corpus {
            stats.add(&ls.labeled);
        }
        stats
    }

    pub fn add(&mut self, text: &str) {
        self.docs += 1;
        let mut seen = BTreeSet::new();
        for w in text.split_whitespace() {
            *self.tf.entry(w.to_string()).or_default() += 1;
            if seen.insert(w) {
                *self.df.entry(w.to_string()).or_default() += 1;
            }
        }
    }

    /// Raw corpus count.
    pub fn tf<F: Real>(&self, word: &str) -> F {
        F::from_u64(self.tf.get(word).copied().unwrap_or(0)).expect("count")
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf<F: Real>(&self, word: &str) -> F {
        let df = self.df.get(word).copied().unwrap_or(0) as f64;
        F::lit(((1.0 + self.docs as f64) / (1.0 + df)).ln() + 1.0)
    }

    pub fn weight<F: Real>(&self, word: &str, weighting: Weighting) -> F {
        match weighting {
            Weighting::None => F::one(),
            Weighting::Tf => self.tf(word),
            Weighting::Idf => self.idf(word),
        }
    }
}

/// Mean normalized similarity of `w` to the items of `q`, times `weight`.
/// Out-of-vocabulary pairs count as zero.
pub fn word_quad_distance<F: Real>(w: &str, q: &[String], model: &VectorModel<F>, weight: F) -> Result<F> {
    if q.is_empty() {
        return Err(Error::Empty("quad item set"));
    }
    let sum: F = q.iter().map(|item| model.sim01(w, item).unwrap_or(F::zero())).sum();
    Ok(weight * sum / F::from_usize(q.len()).expect("count"))
}

/// Sum and product forms over per-word distances.
pub fn combine<F: Real>(dists: &[F], form: ProductForm) -> (F, F) {
    if dists.is_empty() {
        return (F::zero(), F::zero());
    }
    let sum: F = dists.iter().copied().sum();
    let eps = F::lit(EPSILON);
    let prod = match form {
        ProductForm::Clamped => dists
            .iter()
            .map(|&d| (F::one() + F::one() / d.max(eps)).ln())
            .fold(F::one(), |acc, x| acc * x),
        ProductForm::Raw => dists
            .iter()
            .map(|&d| (F::one() / d).ln())
            .fold(F::one(), |acc, x| acc * x),
    };
    (sum, -prod.ln())
}

/// `(sum, prod)` distances of a sentence's redundant words to `q`.
pub fn sentence_distances<F: Real>(
    ls: &LabeledSentence,
    q: &[String],
    model: &VectorModel<F>,
    stats: &TermStats,
    weighting: Weighting,
    form: ProductForm,
) -> Result<(F, F)> {
    if ls.redundant_words.is_empty() {
        return Ok((F::zero(), F::zero()));
    }
    let dists = ls
        .redundant_words
        .iter()
        .map(|(w, _)| word_quad_distance(w, q, model, stats.weight(w, weighting)))
        .collect::<Result<Vec<F>>>()?;
    Ok(combine(&dists, form))
}

/// Words of the original text behind the quad-item labels, for models that
/// do not know the label tokens.
pub fn global_items(ls: &LabeledSentence) -> Vec<String> {
    ls.quad_item_texts()
        .iter()
        .flat_map(|t| t.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureVector<F> {
    pub prod_tf: F,
    pub prod_idf: F,
    pub prod_local: F,
    pub prod_global: F,
}

impl<F: Real> FeatureVector<F> {
    pub fn to_vec(&self) -> Vec<F> {
        vec![self.prod_tf, self.prod_idf, self.prod_local, self.prod_global]
    }
}

/// Which reading of the four-component vector to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VectorLayout {
    /// `(prod_tf, prod_idf, prod_local, prod_global)`
    #[default]
    TfIdf,
    /// `(prod_idf, prod_idf, prod_local, prod_global)`, as printed.
    IdfIdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureOptions {
    pub layout: VectorLayout,
    pub form: ProductForm,
}

/// One feature vector per sentence. The weighted and local components use
/// the label tokens against the local model; the global component uses the
/// words behind the labels against the global model.
pub fn feature_vectors<F: Real>(
    corpus: &[LabeledSentence],
    local: &VectorModel<F>,
    global: &VectorModel<F>,
    options: FeatureOptions,
) -> Result<Vec<FeatureVector<F>>> {
    let stats = TermStats::from_corpus(corpus);
    corpus
        .par_iter()
        .map(|ls| {
            if ls.redundant_words.is_empty() {
                return Ok(FeatureVector {
                    prod_tf: F::zero(),
                    prod_idf: F::zero(),
                    prod_local: F::zero(),
                    prod_global: F::zero(),
                });
            }
            let q_local = ls.quad_items();
            let q_global = global_items(ls);
            let prod = |q: &[String], model: &VectorModel<F>, w: Weighting| -> Result<F> {
                if q.is_empty() {
                    return Ok(F::zero());
                }
                sentence_distances(ls, q, model, &stats, w, options.form).map(|(_, p)| p)
            };
            let prod_idf = prod(&q_local, local, Weighting::Idf)?;
            let prod_tf = match options.layout {
                VectorLayout::TfIdf => prod(&q_local, local, Weighting::Tf)?,
                VectorLayout::IdfIdf => prod_idf,
            };
            Ok(FeatureVector {
                prod_tf,
                prod_idf,
                prod_local: prod(&q_local, local, Weighting::None)?,
                prod_global: prod(&q_global, global, Weighting::None)?,
            })
        })
        .collect()
}
