//! Parsed sentences and their subject, verb and entity term sets.
//!
//! Parsing happens outside this crate. Documents arrive as JSON Lines, one
//! page per line, each carrying tokens with POS tags and dependency heads
//! plus the subject, verb, entity and noun-chunk spans.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type given to noun chunks and their roots.
pub const NOUN_CHUNK: &str = "NOUN CHUNK";
/// Type given to dependency phrases.
pub const DEP_PHRASE: &str = "DP";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub i: usize,
    pub text: String,
    #[serde(default)]
    pub lemma: String,
    pub upos: String,
    pub dep: String,
    pub head: usize,
}

/// A sentence span `(tv, sp, ep, ty, rw)` with inclusive token bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub tv: String,
    pub sp: usize,
    pub ep: usize,
    pub ty: String,
    pub rw: String,
}

impl Term {
    pub fn new(tv: &str, sp: usize, ep: usize, ty: &str, rw: &str) -> Term {
        Term {
            tv: tv.into(),
            sp,
            ep,
            ty: ty.into(),
            rw: rw.into(),
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (self.sp, self.ep)
    }

    pub fn len(&self) -> usize {
        self.ep - self.sp + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &Term) -> bool {
        spans_overlap(self.span(), other.span())
    }
}

pub fn spans_overlap(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub text: String,
    pub tokens: Vec<Token>,
    /// U
    pub subjects: Vec<Term>,
    /// V
    pub verbs: Vec<Term>,
    /// E: named entities, noun chunks and noun-chunk roots.
    pub entities: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref: Option<String>,
}

impl ParsedSentence {
    /// Index of the token whose dependency relation is `ROOT`.
    pub fn root(&self) -> Option<usize> {
        self.tokens
            .iter()
            .find(|t| t.dep.eq_ignore_ascii_case("root"))
            .map(|t| t.i)
    }

    pub fn span_text(&self, sp: usize, ep: usize) -> String {
        self.tokens[sp..=ep]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// True when `token` is `ancestor` or sits below it in the tree.
    fn descends_from(&self, mut token: usize, ancestor: usize) -> bool {
        for _ in 0..=self.tokens.len() {
            if token == ancestor {
                return true;
            }
            let head = self.tokens[token].head;
            if head == token {
                return false;
            }
            token = head;
        }
        false
    }
}

/// One page of annotations as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationDoc {
    pub title: String,
    pub sentences: Vec<RawSentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSentence {
    pub text: String,
    pub tokens: Vec<Token>,
    #[serde(default)]
    pub subjects: Vec<Term>,
    #[serde(default)]
    pub verbs: Vec<Term>,
    #[serde(default)]
    pub entities: Vec<Term>,
    #[serde(default)]
    pub noun_chunks: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub title: String,
    pub sentences: Vec<ParsedSentence>,
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn schema(text: &str, detail: String) -> Error {
    Error::Schema {
        sentence: text.to_string(),
        detail,
    }
}

fn check_term(raw: &RawSentence, term: &Term) -> Result<()> {
    if term.ep < term.sp {
        return Err(schema(
            &raw.text,
            format!("term {:?} ends at {} before its start {}", term.tv, term.ep, term.sp),
        ));
    }
    if term.ep >= raw.tokens.len() {
        return Err(schema(
            &raw.text,
            format!("term {:?} ends past token {}", term.tv, raw.tokens.len()),
        ));
    }
    let joined: String = raw.tokens[term.sp..=term.ep].iter().map(|t| t.text.as_str()).collect();
    if squash(&joined) != squash(&term.tv) {
        return Err(schema(
            &raw.text,
            format!("term {:?} does not match tokens {}..={}", term.tv, term.sp, term.ep),
        ));
    }
    Ok(())
}

impl RawSentence {
    /// Validates spans and heads, then assembles the entity set.
    pub fn into_parsed(self) -> Result<ParsedSentence> {
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.i != pos {
                return Err(schema(&self.text, format!("token {pos} carries index {}", tok.i)));
            }
            if tok.head >= self.tokens.len() {
                return Err(schema(
                    &self.text,
                    format!("token {pos} has head {} out of range", tok.head),
                ));
            }
        }
        for term in self
            .subjects
            .iter()
            .chain(&self.verbs)
            .chain(&self.entities)
            .chain(&self.noun_chunks)
        {
            check_term(&self, term)?;
        }

        let taken: BTreeSet<(usize, usize)> = self.subjects.iter().chain(&self.verbs).map(Term::span).collect();
        let mut seen = taken.clone();
        let mut entities = Vec::new();
        let mut push = |t: Term, entities: &mut Vec<Term>| {
            if seen.insert(t.span()) {
                entities.push(t);
            }
        };
        for t in self.entities.iter().cloned() {
            push(t, &mut entities);
        }
        for t in self.noun_chunks.iter().cloned() {
            push(t, &mut entities);
        }
        for chunk in &self.noun_chunks {
            let root = (chunk.sp..=chunk.ep)
                .rev()
                .find(|&i| self.tokens[i].text.eq_ignore_ascii_case(&chunk.rw));
            if let Some(i) = root {
                let text = &self.tokens[i].text;
                push(Term::new(text, i, i, NOUN_CHUNK, text), &mut entities);
            }
        }

        Ok(ParsedSentence {
            text: self.text,
            tokens: self.tokens,
            subjects: self.subjects,
            verbs: self.verbs,
            entities,
            coref: self.coref,
        })
    }
}

impl AnnotationDoc {
    pub fn into_parsed(self) -> Result<ParsedDocument> {
        let sentences = self
            .sentences
            .into_iter()
            .map(RawSentence::into_parsed)
            .collect::<Result<_>>()?;
        Ok(ParsedDocument {
            title: self.title,
            sentences,
        })
    }
}

/// Reads an annotation JSON Lines stream.
pub fn ingest_annotations<R: BufRead>(reader: R) -> Result<Vec<ParsedDocument>> {
    let mut docs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("<annotations line {}>", n + 1), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: AnnotationDoc = serde_json::from_str(&line)?;
        docs.push(doc.into_parsed()?);
    }
    Ok(docs)
}

/// One subject, placed before the root.
pub fn eligible(sentence: &ParsedSentence) -> bool {
    let [subject] = sentence.subjects.as_slice() else {
        return false;
    };
    match sentence.root() {
        Some(root) => subject.ep < root,
        None => false,
    }
}

fn is_nominal(upos: &str) -> bool {
    matches!(upos, "NOUN" | "PROPN" | "NUM" | "ADJ")
}

/// Nominal dependents of a verbal root expanded into n-grams. Phrases that
/// overlap `exclude` are dropped; the rest come longest first, then leftmost.
pub fn dependency_phrases(sentence: &ParsedSentence, exclude: &[(usize, usize)]) -> Vec<Term> {
    let Some(root) = sentence.root() else {
        return Vec::new();
    };
    if sentence.tokens[root].upos != "VERB" {
        return Vec::new();
    }
    let tokens = &sentence.tokens;
    let keep: Vec<bool> = tokens
        .iter()
        .map(|t| t.i != root && is_nominal(&t.upos) && sentence.descends_from(t.i, root))
        .collect();

    // Contiguous nominal runs, split where neighbours are not linked
    // through the tree inside the run.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !keep[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < tokens.len() && keep[j + 1] {
            j += 1;
        }
        split_connected(sentence, i, j, &mut runs);
        i = j + 1;
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in runs {
        for sp in a..=b {
            for ep in sp..=b {
                if exclude.iter().any(|&x| spans_overlap(x, (sp, ep))) {
                    continue;
                }
                if !seen.insert((sp, ep)) {
                    continue;
                }
                let rw = phrase_root(sentence, sp, ep);
                out.push(Term::new(&sentence.span_text(sp, ep), sp, ep, DEP_PHRASE, rw));
            }
        }
    }
    out.sort_by(|x, y| y.len().cmp(&x.len()).then(x.sp.cmp(&y.sp)));
    out
}

/// Splits `a..=b` into pieces whose tokens are connected by head links
/// staying inside the run.
fn split_connected(sentence: &ParsedSentence, a: usize, b: usize, runs: &mut Vec<(usize, usize)>) {
    let n = b - a + 1;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for k in a..=b {
        let h = sentence.tokens[k].head;
        if (a..=b).contains(&h) && h != k {
            let (x, y) = (find(&mut parent, k - a), find(&mut parent, h - a));
            parent[x] = y;
        }
    }
    let mut start = a;
    for k in a..b {
        if find(&mut parent, k - a) != find(&mut parent, k + 1 - a) {
            runs.push((start, k));
            start = k + 1;
        }
    }
    runs.push((start, b));
}

/// The token of a span whose head lies outside it, else the last token.
fn phrase_root(sentence: &ParsedSentence, sp: usize, ep: usize) -> &str {
    let t = (sp..=ep)
        .find(|&k| {
            let h = sentence.tokens[k].head;
            h < sp || h > ep || h == k
        })
        .unwrap_or(ep);
    &sentence.tokens[t].text
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn tok(i: usize, text: &str, upos: &str, dep: &str, head: usize) -> Token {
        Token {
            i,
            text: text.into(),
            lemma: text.to_lowercase(),
            upos: upos.into(),
            dep: dep.into(),
            head,
        }
    }

    /// "He moved to the Serie A club Bologna in July 2011."
    pub fn bologna_raw() -> RawSentence {
        let tokens = vec![
            tok(0, "He", "PRON", "nsubj", 1),
            tok(1, "moved", "VERB", "ROOT", 1),
            tok(2, "to", "ADP", "prep", 1),
            tok(3, "the", "DET", "det", 7),
            tok(4, "Serie", "PROPN", "compound", 5),
            tok(5, "A", "PROPN", "compound", 6),
            tok(6, "club", "NOUN", "compound", 7),
            tok(7, "Bologna", "PROPN", "pobj", 2),
            tok(8, "in", "ADP", "prep", 1),
            tok(9, "July", "PROPN", "pobj", 8),
            tok(10, "2011", "NUM", "nummod", 9),
            tok(11, ".", "PUNCT", "punct", 1),
        ];
        RawSentence {
            text: "He moved to the Serie A club Bologna in July 2011.".into(),
            tokens,
            subjects: vec![Term::new("He", 0, 0, "PRON", "He")],
            verbs: vec![Term::new("moved", 1, 1, "ROOT", "moved")],
            entities: vec![
                Term::new("Serie A club", 4, 6, "ORG", "club"),
                Term::new("Bologna", 7, 7, "FAC", "Bologna"),
                Term::new("July 2011", 9, 10, "DATE", "2011"),
            ],
            noun_chunks: vec![
                Term::new("July", 9, 9, NOUN_CHUNK, "July"),
                Term::new("Serie A", 4, 5, NOUN_CHUNK, "A"),
                Term::new("club", 6, 6, NOUN_CHUNK, "club"),
                Term::new("A club", 5, 6, NOUN_CHUNK, "club"),
                Term::new("Serie", 4, 4, NOUN_CHUNK, "Serie"),
                Term::new("A", 5, 5, NOUN_CHUNK, "A"),
            ],
            coref: None,
        }
    }

    pub fn bologna_sentence() -> ParsedSentence {
        bologna_raw().into_parsed().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bologna_sets() {
        let s = bologna_sentence();
        assert_eq!(s.subjects, [Term::new("He", 0, 0, "PRON", "He")]);
        assert_eq!(s.verbs, [Term::new("moved", 1, 1, "ROOT", "moved")]);
        assert_eq!(s.entities.len(), 9);
        assert!(s.entities.contains(&Term::new("Serie A club", 4, 6, "ORG", "club")));
        assert!(s.entities.contains(&Term::new("July 2011", 9, 10, "DATE", "2011")));
        assert!(eligible(&s));
    }

    #[test]
    fn ner_beats_noun_chunk_on_same_span() {
        let mut raw = bologna_raw();
        raw.noun_chunks.push(Term::new("Bologna", 7, 7, NOUN_CHUNK, "Bologna"));
        let s = raw.into_parsed().unwrap();
        let bologna: Vec<_> = s.entities.iter().filter(|t| t.span() == (7, 7)).collect();
        assert_eq!(bologna.len(), 1);
        assert_eq!(bologna[0].ty, "FAC");
    }

    #[test]
    fn reversed_span_is_schema_error() {
        let mut raw = bologna_raw();
        raw.entities.push(Term::new("x", 5, 2, "ORG", "x"));
        match raw.into_parsed() {
            Err(Error::Schema { sentence, .. }) => assert!(sentence.starts_with("He moved")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_head_is_schema_error() {
        let mut raw = bologna_raw();
        raw.tokens[3].head = 99;
        assert!(matches!(raw.into_parsed(), Err(Error::Schema { .. })));
    }

    #[test]
    fn mismatched_term_text_is_schema_error() {
        let mut raw = bologna_raw();
        raw.entities[1].tv = "Roma".into();
        assert!(matches!(raw.into_parsed(), Err(Error::Schema { .. })));
    }

    #[test]
    fn eligibility_rules() {
        let mut s = bologna_sentence();
        s.subjects.push(Term::new("Serie", 4, 4, "PROPN", "Serie"));
        assert!(!eligible(&s));
        let mut s = bologna_sentence();
        s.subjects = vec![Term::new("Bologna", 7, 7, "PROPN", "Bologna")];
        assert!(!eligible(&s));
        let mut s = bologna_sentence();
        s.verbs.clear();
        for t in &mut s.tokens {
            t.dep = "dep".into();
        }
        assert!(!eligible(&s));
    }

    #[test]
    fn dependency_phrases_of_bologna() {
        let s = bologna_sentence();
        let dp = dependency_phrases(&s, &[(7, 7), (9, 10)]);
        let tvs: Vec<&str> = dp.iter().map(|t| t.tv.as_str()).collect();
        assert_eq!(tvs, ["Serie A club", "Serie A", "A club", "Serie", "A", "club"]);
        assert!(!tvs.contains(&"Bologna"));
    }

    #[test]
    fn nominal_root_gives_nothing() {
        let mut s = bologna_sentence();
        s.tokens[1].upos = "NOUN".into();
        assert!(dependency_phrases(&s, &[]).is_empty());
    }

    #[test]
    fn ingest_is_stable() {
        let doc = AnnotationDoc {
            title: "Simone Loria".into(),
            sentences: vec![bologna_raw()],
        };
        let line = serde_json::to_string(&doc).unwrap();
        let input = format!("{line}\n\n{line}\n");
        let a = ingest_annotations(input.as_bytes()).unwrap();
        let b = ingest_annotations(input.as_bytes()).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    proptest! {
        #[test]
        fn dp_respects_exclusion(a in 0usize..12, len in 0usize..3) {
            let s = bologna_sentence();
            let ex = (a, (a + len).min(11));
            let dp = dependency_phrases(&s, &[ex]);
            let mut spans = BTreeSet::new();
            for t in &dp {
                prop_assert!(!spans_overlap(t.span(), ex));
                prop_assert!(spans.insert(t.span()));
                prop_assert_eq!(&t.tv, &s.span_text(t.sp, t.ep));
            }
            // every n-gram of the surviving nominal run is present
            for sp in 4..=7usize {
                for ep in sp..=7usize {
                    if !spans_overlap((sp, ep), ex) {
                        prop_assert!(spans.contains(&(sp, ep)));
                    }
                }
            }
        }
    }
}
