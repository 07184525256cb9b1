//! Subject, object, qualifier, extra and predicate matching, and the
//! orchestration that maps quads onto the sentences of a page.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::embeddings::VectorModel;
use crate::error::{Error, Result};
use crate::ids::EntityId;
use crate::scalar::Real;
use crate::sentence::{dependency_phrases, eligible, spans_overlap, ParsedSentence, Term};
use crate::stopwords::content_words;
use crate::store::{DataValue, EntityStore, Quad, Qualifier, TimePrecision};
use crate::surface::{g_set, month_name, value_forms, GSet};

/// Strength of a phrase match. `Exact` orders above `Partial`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchKind {
    Partial,
    Exact,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

/// Compares a surface form with a sentence term, case-insensitively.
pub fn match_phrase(g: &str, t: &Term) -> Option<MatchKind> {
    let g = words(g);
    let tv = words(&t.tv);
    if g.is_empty() || tv.is_empty() {
        return None;
    }
    if g == tv {
        return Some(MatchKind::Exact);
    }
    let head = g.last().expect("nonempty");
    if t.rw.to_lowercase() == *head {
        return Some(MatchKind::Partial);
    }
    if tv.len() < g.len() && g.windows(tv.len()).any(|w| w == tv.as_slice()) {
        return Some(MatchKind::Partial);
    }
    None
}

/// DATE terms carrying the year, plus the month name when the value is at
/// least month-precise.
fn time_matches(value: &DataValue, t: &Term) -> bool {
    let (DataValue::Time { precision, .. }, Some(date)) = (value, value.date()) else {
        return false;
    };
    if t.ty != "DATE" {
        return false;
    }
    let tv = words(&t.tv);
    if !tv.contains(&date.year.to_string()) {
        return false;
    }
    match (precision, month_name(date.month)) {
        (TimePrecision::Year, _) => true,
        (_, Some(m)) => tv.contains(&m.to_lowercase()),
        (_, None) => true,
    }
}

fn value_match(value: &DataValue, forms: &[String], t: &Term) -> Option<MatchKind> {
    if matches!(value, DataValue::Time { .. }) {
        return time_matches(value, t).then_some(MatchKind::Exact);
    }
    forms.iter().filter_map(|g| match_phrase(g, t)).max()
}

/// Ranking used for every tie-break: exact first, then longer, then earlier.
fn rank(a: (MatchKind, &Term), b: (MatchKind, &Term)) -> Ordering {
    b.0.cmp(&a.0).then(b.1.len().cmp(&a.1.len())).then(a.1.sp.cmp(&b.1.sp))
}

/// Removes `taken` and every term overlapping it.
fn consume(pool: &mut Vec<Term>, taken: &Term) {
    pool.retain(|t| !t.overlaps(taken));
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectMatch {
    pub subject: EntityId,
    pub form: String,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMatch {
    /// Position of the object in the quad.
    pub index: usize,
    pub value: DataValue,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualifierMatch {
    /// Position of the owning object in K.
    pub object: usize,
    pub qualifier: Qualifier,
    pub term: Term,
}

/// An entity matched against a simple statement `(s_i, p, o)` of a matched
/// object.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraMatch {
    /// Position of the owning object in K.
    pub object: usize,
    pub subject: EntityId,
    pub property: EntityId,
    pub value: DataValue,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateMatch<F> {
    pub word: String,
    pub distance: F,
    pub verb: Term,
}

/// The expanded predicate word set `B_p`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredicateSet<F> {
    pub entries: Vec<(String, F)>,
}

impl<F: Real> PredicateSet<F> {
    /// Union keeping the highest distance per word, first-seen order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, F)>) -> Self {
        let mut entries: Vec<(String, F)> = Vec::new();
        let mut at: BTreeMap<String, usize> = BTreeMap::new();
        for (w, d) in pairs {
            match at.get(&w) {
                Some(&i) => {
                    if d > entries[i].1 {
                        entries[i].1 = d;
                    }
                }
                None => {
                    at.insert(w.clone(), entries.len());
                    entries.push((w, d));
                }
            }
        }
        PredicateSet { entries }
    }

    pub fn get(&self, word: &str) -> Option<F> {
        let lower = word.to_lowercase();
        self.entries
            .iter()
            .find(|(w, _)| w.to_lowercase() == lower)
            .map(|(_, d)| *d)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Picks the best term for a subject G set; the longest matching form wins.
pub fn match_subject(gs: &GSet, u: &[Term], subject: EntityId) -> Option<SubjectMatch> {
    let mut best: Option<(MatchKind, usize, &String, &Term)> = None;
    for term in u {
        for g in gs.forms() {
            let Some(kind) = match_phrase(g, term) else {
                continue;
            };
            let better = match best {
                None => true,
                Some((k, len, _, t)) => {
                    (kind, g.chars().count()) > (k, len) || ((kind, g.chars().count()) == (k, len) && term.sp < t.sp)
                }
            };
            if better {
                best = Some((kind, g.chars().count(), g, term));
            }
        }
    }
    best.map(|(_, _, g, t)| SubjectMatch {
        subject,
        form: g.clone(),
        term: t.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectStage {
    Matched {
        k: Vec<ObjectMatch>,
        e_y: Vec<Term>,
    },
    /// An object matched separate mentions equally well.
    Ambiguous {
        object: usize,
    },
}

/// Sequential object matching with consumption. Candidate spans that
/// overlap form one mention; if the best-ranked candidates of an object fall
/// in more than one mention the whole mapping is abandoned.
pub fn match_objects(quad: &Quad, e: &[Term], store: &EntityStore) -> Result<ObjectStage> {
    if quad.objects.is_empty() {
        return Err(Error::EmptyObjects);
    }
    let mut pool = e.to_vec();
    let mut k = Vec::new();
    for (index, object) in quad.objects.iter().enumerate() {
        let forms = value_forms(object, store);
        let mut cands: Vec<(MatchKind, Term)> = pool
            .iter()
            .filter_map(|t| value_match(object, &forms, t).map(|kind| (kind, t.clone())))
            .collect();
        if cands.is_empty() {
            continue;
        }
        let top = cands.iter().map(|c| c.0).max().expect("nonempty");
        let best: Vec<&Term> = cands.iter().filter(|c| c.0 == top).map(|c| &c.1).collect();
        if mentions(&cands.iter().map(|c| &c.1).collect::<Vec<_>>(), &best) > 1 {
            log::debug!("object {} of {} is ambiguous", index, quad.subject);
            return Ok(ObjectStage::Ambiguous { object: index });
        }
        cands.sort_by(|a, b| rank((a.0, &a.1), (b.0, &b.1)));
        let (_, term) = cands.swap_remove(0);
        consume(&mut pool, &term);
        k.push(ObjectMatch {
            index,
            value: object.clone(),
            term,
        });
    }
    Ok(ObjectStage::Matched { k, e_y: pool })
}

/// Number of overlap-connected mention groups among `all` that contain at
/// least one of `best`.
fn mentions(all: &[&Term], best: &[&Term]) -> usize {
    let n = all.len();
    let mut group: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if all[i].overlaps(all[j]) && group[j] < group[i] {
                    group[i] = group[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let hit: BTreeSet<usize> = (0..n)
        .filter(|&i| best.iter().any(|b| b.span() == all[i].span()))
        .map(|i| group[i])
        .collect();
    hit.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualifierStage {
    pub l: Vec<QualifierMatch>,
    pub e_z: Vec<Term>,
}

/// Matches the qualifiers of every matched object against the remaining
/// entities, consuming each match.
pub fn match_qualifiers(o_x: &[ObjectMatch], quad: &Quad, e_y: &[Term], store: &EntityStore) -> QualifierStage {
    let mut pool = e_y.to_vec();
    let mut l = Vec::new();
    for (k, object) in o_x.iter().enumerate() {
        for q in quad.qualifiers_of(object.index) {
            let forms = value_forms(&q.value, store);
            let best = pool
                .iter()
                .filter_map(|t| value_match(&q.value, &forms, t).map(|kind| (kind, t)))
                .min_by(|a, b| rank(*a, *b))
                .map(|(_, t)| t.clone());
            if let Some(term) = best {
                consume(&mut pool, &term);
                l.push(QualifierMatch {
                    object: k,
                    qualifier: q.clone(),
                    term,
                });
            }
        }
    }
    QualifierStage { l, e_z: pool }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOptions {
    pub extra: bool,
    /// Fall back to dependency phrases when `E_z` is empty.
    pub dependency_phrases: bool,
    /// Use dependency phrases first and `E_z` only when they are empty.
    pub prefer_dependency_phrases: bool,
    pub predicates: Option<PredicateSet<f64>>,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            extra: true,
            dependency_phrases: true,
            prefer_dependency_phrases: false,
            predicates: None,
        }
    }
}

struct Tuple {
    subject: EntityId,
    property: EntityId,
    value: DataValue,
    forms: Vec<String>,
}

/// Maps leftover entities onto the simple statements of matched objects.
/// An entity matching two different statements is skipped; each statement
/// and each entity is used at most once.
pub fn match_extra(
    o_x: &[ObjectMatch],
    e_z: &[Term],
    matched: &[(usize, usize)],
    sentence: &ParsedSentence,
    store: &EntityStore,
    options: &MatchOptions,
) -> Vec<ExtraMatch> {
    let dp = || {
        if options.dependency_phrases || options.prefer_dependency_phrases {
            dependency_phrases(sentence, matched)
        } else {
            Vec::new()
        }
    };
    let mut pool = if options.prefer_dependency_phrases {
        let p = dp();
        if p.is_empty() {
            e_z.to_vec()
        } else {
            p
        }
    } else if e_z.is_empty() {
        dp()
    } else {
        e_z.to_vec()
    };

    let mut out = Vec::new();
    for (k, object) in o_x.iter().enumerate() {
        let Some(record) = object.value.as_item().and_then(|id| store.get(id)) else {
            continue;
        };
        let mut tuples: Vec<Tuple> = Vec::new();
        for claim in record.simple_claims() {
            if tuples
                .iter()
                .any(|t| t.property == claim.property && t.value == claim.value)
            {
                continue;
            }
            tuples.push(Tuple {
                subject: record.id,
                property: claim.property,
                value: claim.value.clone(),
                forms: value_forms(&claim.value, store),
            });
        }

        let mut cands: Vec<(MatchKind, usize, usize)> = Vec::new();
        for (ei, entry) in pool.iter().enumerate() {
            let hits: Vec<(usize, MatchKind)> = tuples
                .iter()
                .enumerate()
                .filter_map(|(ti, t)| value_match(&t.value, &t.forms, entry).map(|kind| (ti, kind)))
                .collect();
            if let [(ti, kind)] = hits.as_slice() {
                cands.push((*kind, *ti, ei));
            }
        }
        cands.sort_by(|a, b| rank((a.0, &pool[a.2]), (b.0, &pool[b.2])).then(a.1.cmp(&b.1)));

        let mut used_tuple = BTreeSet::new();
        let mut taken: Vec<Term> = Vec::new();
        for (_, ti, ei) in cands {
            let entry = &pool[ei];
            if used_tuple.contains(&ti) || taken.iter().any(|t| t.overlaps(entry)) {
                continue;
            }
            used_tuple.insert(ti);
            taken.push(entry.clone());
            let t = &tuples[ti];
            out.push(ExtraMatch {
                object: k,
                subject: t.subject,
                property: t.property,
                value: t.value.clone(),
                term: entry.clone(),
            });
        }
        for t in &taken {
            consume(&mut pool, t);
        }
    }
    out
}

/// Builds `B_p` from the non-stopword words of `G_p` and their top-`t`
/// neighbours, keeping the highest similarity per word.
pub fn expand_predicate_set<F: Real>(g_p: &GSet, model: &VectorModel<F>, t: usize) -> PredicateSet<F> {
    let c_p = content_words(g_p.forms().iter().map(String::as_str));
    let mut pairs = Vec::new();
    for c in &c_p {
        if !model.contains(c) {
            continue;
        }
        pairs.push((c.clone(), F::one()));
        pairs.extend(model.top_t(c, t));
    }
    if pairs.is_empty() {
        log::warn!("no word of {:?} is in the vector vocabulary", c_p);
    }
    PredicateSet::from_pairs(pairs)
}

/// Verbs found in `B_p`. Reported only; never gates a mapping.
pub fn match_predicate<F: Real>(b_p: &PredicateSet<F>, v: &[Term]) -> Vec<PredicateMatch<F>> {
    v.iter()
        .filter_map(|verb| {
            b_p.get(&verb.tv).map(|d| PredicateMatch {
                word: verb.tv.to_lowercase(),
                distance: d,
                verb: verb.clone(),
            })
        })
        .collect()
}

/// Outcome of mapping one quad onto one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<'a> {
    pub quad: &'a Quad,
    pub sentence: &'a ParsedSentence,
    pub subject: SubjectMatch,
    pub objects: Vec<ObjectMatch>,
    pub qualifiers: Vec<QualifierMatch>,
    pub extras: Vec<ExtraMatch>,
    pub e_y: Vec<Term>,
    pub e_z: Vec<Term>,
    pub predicates: Vec<PredicateMatch<f64>>,
}

impl MatchResult<'_> {
    /// Spans of the subject, object and qualifier matches.
    pub fn matched_spans(&self) -> Vec<(usize, usize)> {
        std::iter::once(self.subject.term.span())
            .chain(self.objects.iter().map(|o| o.term.span()))
            .chain(self.qualifiers.iter().map(|q| q.term.span()))
            .collect()
    }

    pub fn ms_pairs(&self) -> Vec<(String, String)> {
        vec![(self.subject.subject.to_string(), self.subject.term.tv.clone())]
    }

    pub fn mo_pairs(&self) -> Vec<(String, String)> {
        self.objects
            .iter()
            .map(|o| {
                (
                    o.value.as_item().map_or_else(|| o.value.canonical(), |i| i.to_string()),
                    o.term.tv.clone(),
                )
            })
            .collect()
    }

    pub fn mq_pairs(&self) -> Vec<(String, String)> {
        self.qualifiers
            .iter()
            .map(|q| (q.qualifier.property.to_string(), q.term.tv.clone()))
            .collect()
    }

    pub fn me_pairs(&self) -> Vec<(String, String)> {
        self.extras
            .iter()
            .map(|e| (format!("{}:{}", e.subject, e.property), e.term.tv.clone()))
            .collect()
    }
}

/// Subject, object and qualifier stages, each able to drop the mapping,
/// then the optional extra and predicate stages.
pub fn map_quad_to_sentence<'a>(
    quad: &'a Quad,
    sentence: &'a ParsedSentence,
    store: &EntityStore,
    options: &MatchOptions,
) -> Result<Option<MatchResult<'a>>> {
    if !eligible(sentence) {
        return Ok(None);
    }
    let Some(record) = store.get(quad.subject) else {
        log::debug!("subject {} missing from the store", quad.subject);
        return Ok(None);
    };
    let gs = g_set(record, true, store)?;
    let Some(subject) = match_subject(&gs, &sentence.subjects, quad.subject) else {
        return Ok(None);
    };
    let e: Vec<Term> = sentence
        .entities
        .iter()
        .filter(|t| !t.overlaps(&subject.term))
        .cloned()
        .collect();
    let (objects, e_y) = match match_objects(quad, &e, store)? {
        ObjectStage::Matched { k, e_y } if !k.is_empty() => (k, e_y),
        _ => return Ok(None),
    };
    let QualifierStage { l, e_z } = match_qualifiers(&objects, quad, &e_y, store);
    if l.is_empty() {
        return Ok(None);
    }
    let mut result = MatchResult {
        quad,
        sentence,
        subject,
        objects,
        qualifiers: l,
        extras: Vec::new(),
        e_y,
        e_z,
        predicates: Vec::new(),
    };
    if options.extra {
        let matched = result.matched_spans();
        result.extras = match_extra(&result.objects, &result.e_z, &matched, sentence, store, options);
    }
    if let Some(b_p) = &options.predicates {
        result.predicates = match_predicate(b_p, &sentence.verbs);
    }
    Ok(Some(result))
}

/// Maps every quad of an item onto the sentences of its page. A sentence
/// matched by more than one quad is dropped. Results come back ordered by
/// quad, then sentence index.
pub fn map_item_page<'a>(
    quads: &'a [Quad],
    sentences: &'a [ParsedSentence],
    store: &EntityStore,
    options: &MatchOptions,
) -> Result<Vec<(usize, MatchResult<'a>)>> {
    if quads.is_empty() || sentences.is_empty() {
        log::info!(
            "discarding pair with {} quads and {} sentences",
            quads.len(),
            sentences.len()
        );
        return Ok(Vec::new());
    }
    let mut found: Vec<(usize, MatchResult<'a>)> = Vec::new();
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for quad in quads {
        for (si, sentence) in sentences.iter().enumerate() {
            if let Some(r) = map_quad_to_sentence(quad, sentence, store, options)? {
                *hits.entry(si).or_default() += 1;
                found.push((si, r));
            }
        }
    }
    found.retain(|(si, _)| hits[si] == 1);
    Ok(found)
}

/// True when no two spans of the matched terms overlap.
pub fn spans_disjoint(result: &MatchResult<'_>) -> bool {
    let mut spans = result.matched_spans();
    spans.extend(result.extras.iter().map(|e| e.term.span()));
    for i in 0..spans.len() {
        for j in i + 1..spans.len() {
            if spans_overlap(spans[i], spans[j]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::store::{quads_by_property, EntityStore, Quad, Tables};

    pub fn loria_store() -> EntityStore {
        let tables = Tables::read_csv(
            include_str!("../tests/fixtures/loria_tables/quads.csv").as_bytes(),
            include_str!("../tests/fixtures/loria_tables/triples.csv").as_bytes(),
        )
        .unwrap();
        EntityStore::from_tables(&tables).unwrap()
    }

    pub fn loria_quad(store: &EntityStore) -> Quad {
        let rec = store.get(crate::EntityId::item(1372810)).unwrap();
        quads_by_property(rec.qualified_claims()).remove(0)
    }
}
