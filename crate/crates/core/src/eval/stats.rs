//! Basic corpus statistics over labeled sentences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::labeler::{LabeledSentence, LabeledToken};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats<F> {
    /// Mean sentence length in characters.
    pub feature1: F,
    /// Mean whitespace-separated words per sentence.
    pub feature2: F,
    /// Mean parser tokens per sentence.
    pub feature3: F,
    /// Tokens per quad.
    pub feature4: F,
    /// Tokens per quad item.
    pub feature5: F,
}

/// Parser tokens of the original sentence, counting labeled spans in full.
pub fn token_count(ls: &LabeledSentence) -> usize {
    ls.tokens
        .iter()
        .map(|t| match t {
            LabeledToken::Word { .. } => 1,
            LabeledToken::Label { label, sp, ep, .. } => {
                if label.is_quad_item()
                    || matches!(
                        label,
                        crate::labeler::Label::Det(_) | crate::labeler::Label::SubjectPossessive
                    )
                {
                    ep - sp + 1
                } else {
                    0
                }
            }
        })
        .sum()
}

/// Statistics of a dataset whose sentences realise `quads` quads in total.
pub fn corpus_stats<F: Real>(sentences: &[LabeledSentence], quads: usize) -> Result<CorpusStats<F>> {
    if sentences.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if quads == 0 {
        return Err(Error::InvalidArgument("quad count must be positive".into()));
    }
    let mut chars = 0usize;
    let mut words = 0usize;
    let mut tokens = 0usize;
    let mut items = 0usize;
    for ls in sentences {
        chars += ls.raw.chars().count();
        words += ls.raw.split_whitespace().count();
        tokens += token_count(ls);
        items += ls.quad_items().len();
    }
    let n = F::from_usize(sentences.len()).expect("count");
    let f = |x: usize| F::from_usize(x).expect("count");
    let feature5 = if items == 0 { F::zero() } else { f(tokens) / f(items) };
    Ok(CorpusStats {
        feature1: f(chars) / n,
        feature2: f(words) / n,
        feature3: f(tokens) / n,
        feature4: f(tokens) / f(quads),
        feature5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeler::fixtures::{divorced, labeled};
    use approx::assert_relative_eq;

    fn fifty_chars() -> LabeledSentence {
        // 50 characters, 8 words, 10 tokens, 4 quad items
        let raw = "Marianne Smithson wed Robert Rayes in Paris, 1990.";
        let mut ls = labeled(
            raw,
            &[
                ("[s]", "", ""),
                ("wed", "VERB", "ROOT"),
                ("[o0]", "", ""),
                ("in", "ADP", "prep"),
                ("[o0:P2842-qualifier]", "", ""),
                (",", "PUNCT", "punct"),
                ("[o0:P580-qualifier]", "", ""),
                (".", "PUNCT", "punct"),
            ],
            1,
        );
        // the subject and object each cover two tokens
        for k in [0, 2] {
            if let LabeledToken::Label { ep, .. } = &mut ls.tokens[k] {
                *ep += 1;
            }
        }
        ls
    }

    #[test]
    fn single_sentence_arithmetic() {
        let ls = fifty_chars();
        let s: CorpusStats<f64> = corpus_stats(&[ls], 1).unwrap();
        assert_eq!(
            (s.feature1, s.feature2, s.feature3, s.feature4, s.feature5),
            (50.0, 8.0, 10.0, 10.0, 2.5)
        );
    }

    #[test]
    fn three_sentence_oracle() {
        let a = divorced();
        let b = fifty_chars();
        let c = divorced().with_options(crate::labeler::LabelOptions {
            boundaries: true,
            normalize_determiners: false,
        });
        let corpus = vec![a.clone(), b.clone(), c.clone()];
        let s: CorpusStats<f64> = corpus_stats(&corpus, 3).unwrap();
        let chars = (38 + 50 + 38) as f64;
        let words = (7 + 8 + 7) as f64;
        let tokens = (7 + 10 + 7) as f64;
        let items = (3 + 4 + 3) as f64;
        assert_relative_eq!(s.feature1, chars / 3.0);
        assert_relative_eq!(s.feature2, words / 3.0);
        assert_relative_eq!(s.feature3, tokens / 3.0);
        assert_relative_eq!(s.feature4, tokens / 3.0);
        assert_relative_eq!(s.feature5, tokens / items);
    }

    #[test]
    fn candidates_are_denser_in_items() {
        let long = labeled(
            "long",
            &[
                ("[s]", "", ""),
                ("married", "VERB", "ROOT"),
                ("now", "ADV", "advmod"),
                ("NFL", "PROPN", "compound"),
                ("Commissioner", "PROPN", "compound"),
                ("[o0]", "", ""),
                ("and", "CCONJ", "cc"),
                ("resides", "VERB", "conj"),
                ("in", "ADP", "prep"),
                ("Westchester", "PROPN", "pobj"),
                ("in", "ADP", "prep"),
                ("[o0:P580-qualifier]", "", ""),
            ],
            1,
        );
        let all = vec![divorced(), long];
        let cands: Vec<_> = all.iter().filter(|l| l.is_candidate).cloned().collect();
        let full: CorpusStats<f64> = corpus_stats(&all, all.len()).unwrap();
        let sub: CorpusStats<f64> = corpus_stats(&cands, cands.len()).unwrap();
        assert!(sub.feature5 <= full.feature5);
    }

    #[test]
    fn empty_errors() {
        assert!(corpus_stats::<f64>(&[], 1).is_err());
    }
}
