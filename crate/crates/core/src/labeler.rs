//! Labeled sentences: matched spans replaced by `[s]`, `[o0]`,
//! `[o0:P580-qualifier]` style tokens, plus redundant-word extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::EntityId;
use crate::matcher::MatchResult;
use crate::stopwords::is_filtered_token;
use crate::store::EntityStore;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Label {
    Subject,
    Object(usize),
    Qualifier {
        object: usize,
        property: EntityId,
    },
    Extra {
        object: usize,
        property: EntityId,
        name: String,
    },
    Start,
    End,
    Det(String),
    SubjectPossessive,
}

impl Label {
    /// Labels that stand for an element of the quad.
    pub fn is_quad_item(&self) -> bool {
        matches!(
            self,
            Label::Subject | Label::Object(_) | Label::Qualifier { .. } | Label::Extra { .. }
        )
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Subject => f.write_str("[s]"),
            Label::Object(k) => write!(f, "[o{k}]"),
            Label::Qualifier { object, property } => write!(f, "[o{object}:{property}-qualifier]"),
            Label::Extra { object, property, name } => write!(f, "[o{object}:{property}-{name}]"),
            Label::Start => f.write_str("[start]"),
            Label::End => f.write_str("[end]"),
            Label::Det(d) => write!(f, "[det:{d}]"),
            Label::SubjectPossessive => f.write_str("[s:poss]"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Accepts the canonical forms plus `[o:…]` (object 0) and `[tripN:…]`
    /// (object N-1).
    fn from_str(s: &str) -> Result<Label> {
        let bad = || Error::InvalidArgument(format!("not a label: {s:?}"));
        let inner = s.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(bad)?;
        match inner {
            "s" => return Ok(Label::Subject),
            "start" => return Ok(Label::Start),
            "end" => return Ok(Label::End),
            "s:poss" => return Ok(Label::SubjectPossessive),
            _ => {}
        }
        if let Some(d) = inner.strip_prefix("det:") {
            return Ok(Label::Det(d.to_string()));
        }
        let (owner, rest) = match inner.split_once(':') {
            Some((o, r)) => (o, Some(r)),
            None => (inner, None),
        };
        let object = if let Some(n) = owner.strip_prefix("trip") {
            let n: usize = n.parse().map_err(|_| bad())?;
            n.checked_sub(1).ok_or_else(bad)?
        } else if owner == "o" {
            0
        } else if let Some(n) = owner.strip_prefix('o') {
            n.parse().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        let Some(rest) = rest else {
            return Ok(Label::Object(object));
        };
        let (prop, name) = rest.split_once('-').ok_or_else(bad)?;
        let property: EntityId = prop.parse().map_err(|_| bad())?;
        if name == "qualifier" {
            Ok(Label::Qualifier { object, property })
        } else {
            Ok(Label::Extra {
                object,
                property,
                name: name.to_string(),
            })
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `instance of` → `instance_of`
pub fn snake_label(label: &str) -> String {
    label.split_whitespace().collect::<Vec<_>>().join("_").to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LabeledToken {
    Word {
        i: usize,
        text: String,
        upos: String,
        dep: String,
    },
    Label {
        label: Label,
        sp: usize,
        ep: usize,
        text: String,
    },
}

impl LabeledToken {
    pub fn surface(&self) -> String {
        match self {
            LabeledToken::Word { text, .. } => text.clone(),
            LabeledToken::Label { label, .. } => label.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelOptions {
    /// Wrap the sentence in `[start]` … `[end]`.
    pub boundaries: bool,
    /// Replace determiners with `[det:the]`/`[det:a-an]` and possessive
    /// pronouns with `[s:poss]`.
    pub normalize_determiners: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub raw: String,
    pub labeled: String,
    pub tokens: Vec<LabeledToken>,
    pub redundant_words: Vec<(String, usize)>,
    pub is_candidate: bool,
    pub root: Option<usize>,
}

impl LabeledSentence {
    /// Builds a labeled sentence from tokens, deriving the text, redundant
    /// words and candidacy.
    pub fn from_tokens(raw: String, tokens: Vec<LabeledToken>, root: Option<usize>) -> Self {
        let labeled = tokens.iter().map(LabeledToken::surface).collect::<Vec<_>>().join(" ");
        let redundant_words = redundant_words(&tokens);
        let is_candidate = is_candidate(&redundant_words, root);
        LabeledSentence {
            raw,
            labeled,
            tokens,
            redundant_words,
            is_candidate,
            root,
        }
    }

    /// `(span, label)` pairs of every substitution.
    pub fn substitutions(&self) -> Vec<((usize, usize), &Label)> {
        self.tokens
            .iter()
            .filter_map(|t| match t {
                LabeledToken::Label { label, sp, ep, .. } => Some(((*sp, *ep), label)),
                _ => None,
            })
            .collect()
    }

    /// Label tokens that stand for quad elements, in sentence order.
    pub fn quad_items(&self) -> Vec<String> {
        self.substitutions()
            .into_iter()
            .filter(|(_, l)| l.is_quad_item())
            .map(|(_, l)| l.to_string())
            .collect()
    }

    /// Original text under the quad-item labels.
    pub fn quad_item_texts(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter_map(|t| match t {
                LabeledToken::Label { label, text, .. } if label.is_quad_item() => Some(text.clone()),
                _ => None,
            })
            .collect()
    }

    /// Puts the original span texts back in place of the labels.
    pub fn restore(&self) -> String {
        self.tokens
            .iter()
            .filter(|t| {
                !matches!(
                    t,
                    LabeledToken::Label {
                        label: Label::Start | Label::End,
                        ..
                    }
                )
            })
            .map(|t| match t {
                LabeledToken::Word { text, .. } => text.clone(),
                LabeledToken::Label { text, .. } => text.clone(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Re-renders with the optional passes applied.
    pub fn with_options(&self, options: LabelOptions) -> LabeledSentence {
        let mut tokens: Vec<LabeledToken> = self
            .tokens
            .iter()
            .filter(|t| {
                !matches!(
                    t,
                    LabeledToken::Label {
                        label: Label::Start | Label::End,
                        ..
                    }
                )
            })
            .cloned()
            .collect();
        if options.normalize_determiners {
            for t in &mut tokens {
                if let LabeledToken::Word { i, text, upos, dep } = t {
                    let lower = text.to_lowercase();
                    let label = match (upos.as_str(), dep.as_str(), lower.as_str()) {
                        ("DET", _, "the") => Some(Label::Det("the".into())),
                        ("DET", _, "a" | "an") => Some(Label::Det("a-an".into())),
                        ("PRON", "poss", _) | ("DET", "poss", _) => Some(Label::SubjectPossessive),
                        _ => None,
                    };
                    if let Some(label) = label {
                        *t = LabeledToken::Label {
                            label,
                            sp: *i,
                            ep: *i,
                            text: text.clone(),
                        };
                    }
                }
            }
        }
        if options.boundaries && !tokens.is_empty() {
            let last = match tokens.last() {
                Some(LabeledToken::Word { i, .. }) => *i,
                Some(LabeledToken::Label { ep, .. }) => *ep,
                None => 0,
            };
            tokens.insert(0, boundary(Label::Start, 0));
            tokens.push(boundary(Label::End, last));
        }
        LabeledSentence::from_tokens(self.raw.clone(), tokens, self.root)
    }
}

fn boundary(label: Label, at: usize) -> LabeledToken {
    LabeledToken::Label {
        label,
        sp: at,
        ep: at,
        text: String::new(),
    }
}

/// Words left after removing labels, stopwords and filtered tags.
pub fn redundant_words(tokens: &[LabeledToken]) -> Vec<(String, usize)> {
    tokens
        .iter()
        .filter_map(|t| match t {
            LabeledToken::Word { i, text, upos, dep } if !is_filtered_token(text, upos, dep) => {
                Some((text.clone(), *i))
            }
            _ => None,
        })
        .collect()
}

/// Exactly one redundant word, and it is the root.
pub fn is_candidate(redundant: &[(String, usize)], root: Option<usize>) -> bool {
    matches!((redundant, root), ([(_, i)], Some(r)) if *i == r)
}

/// Substitutes matched spans with labels.
pub fn label_sentence(result: &MatchResult<'_>, store: &EntityStore, options: LabelOptions) -> Result<LabeledSentence> {
    let sentence = result.sentence;
    let mut subs: Vec<((usize, usize), Label)> = vec![(result.subject.term.span(), Label::Subject)];
    for (k, o) in result.objects.iter().enumerate() {
        subs.push((o.term.span(), Label::Object(k)));
    }
    for q in &result.qualifiers {
        subs.push((
            q.term.span(),
            Label::Qualifier {
                object: q.object,
                property: q.qualifier.property,
            },
        ));
    }
    for e in &result.extras {
        let name = store
            .label(e.property)
            .map(snake_label)
            .unwrap_or_else(|| e.property.to_string().to_lowercase());
        subs.push((
            e.term.span(),
            Label::Extra {
                object: e.object,
                property: e.property,
                name,
            },
        ));
    }
    subs.sort_by_key(|(span, _)| *span);
    for w in subs.windows(2) {
        if w[1].0 .0 <= w[0].0 .1 {
            return Err(Error::OverlappingLabels(w[1].0 .0, w[0].0 .1));
        }
    }

    let mut tokens = Vec::with_capacity(sentence.tokens.len());
    let mut subs = subs.into_iter().peekable();
    let mut i = 0;
    while i < sentence.tokens.len() {
        if let Some(((sp, ep), _)) = subs.peek() {
            if *sp == i {
                let ((sp, ep), label) = subs.next().expect("peeked");
                tokens.push(LabeledToken::Label {
                    label,
                    sp,
                    ep,
                    text: sentence.span_text(sp, ep),
                });
                i = ep + 1;
                continue;
            }
            debug_assert!(*ep >= i);
        }
        let t = &sentence.tokens[i];
        tokens.push(LabeledToken::Word {
            i,
            text: t.text.clone(),
            upos: t.upos.clone(),
            dep: t.dep.clone(),
        });
        i += 1;
    }
    let base = LabeledSentence::from_tokens(sentence.text.clone(), tokens, sentence.root());
    if options == LabelOptions::default() {
        Ok(base)
    } else {
        Ok(base.with_options(options))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Builds a labeled sentence from `(text, upos, dep)` triples; texts in
    /// brackets become labels.
    pub fn labeled(raw: &str, spec: &[(&str, &str, &str)], root: usize) -> LabeledSentence {
        let tokens = spec
            .iter()
            .enumerate()
            .map(|(i, (text, upos, dep))| match text.parse::<Label>() {
                Ok(label) => LabeledToken::Label {
                    label,
                    sp: i,
                    ep: i,
                    text: String::new(),
                },
                Err(_) => LabeledToken::Word {
                    i,
                    text: text.to_string(),
                    upos: upos.to_string(),
                    dep: dep.to_string(),
                },
            })
            .collect();
        LabeledSentence::from_tokens(raw.into(), tokens, Some(root))
    }

    /// "She and David Birney divorced in 1989."
    pub fn divorced() -> LabeledSentence {
        labeled(
            "She and David Birney divorced in 1989.",
            &[
                ("[s]", "PRON", "nsubj"),
                ("and", "CCONJ", "cc"),
                ("[o0]", "PROPN", "conj"),
                ("divorced", "VERB", "ROOT"),
                ("in", "ADP", "prep"),
                ("[o0:P582-qualifier]", "NUM", "pobj"),
                (".", "PUNCT", "punct"),
            ],
            3,
        )
    }
}
