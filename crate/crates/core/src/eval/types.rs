//! NER label to Wikidata type checks over the `P31`/`P279` hierarchy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{known, EntityId};
use crate::store::{Datatype, EntityStore};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeTargets {
    pub classes: BTreeSet<EntityId>,
    pub datatypes: BTreeSet<Datatype>,
}

/// NER label → Wikidata classes and basic datatypes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NerTypeMap {
    entries: BTreeMap<String, TypeTargets>,
}

const BUNDLED: &str = include_str!("../../data/ner_types.tsv");

impl NerTypeMap {
    pub fn bundled() -> NerTypeMap {
        Self::parse(BUNDLED).expect("bundled NER map parses")
    }

    pub fn parse(text: &str) -> Result<NerTypeMap> {
        let mut entries: BTreeMap<String, TypeTargets> = BTreeMap::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let label = parts.next().unwrap_or_default().to_uppercase();
            let targets = entries.entry(label).or_default();
            for part in parts {
                if let Ok(id) = part.parse::<EntityId>() {
                    targets.classes.insert(id.expect_item()?);
                } else if let Ok(dt) = part.parse::<Datatype>() {
                    targets.datatypes.insert(dt);
                } else {
                    return Err(Error::Table {
                        row,
                        detail: format!("unknown type target {part:?}"),
                    });
                }
            }
        }
        Ok(NerTypeMap { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NerTypeMap> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, label: &str) -> Option<&TypeTargets> {
        self.entries.get(&label.to_uppercase())
    }
}

/// What a matched term is expected to be.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    /// The term names this item; compare against its `instance of` classes.
    Item(EntityId),
    /// Compare against these classes directly.
    Classes(BTreeSet<EntityId>),
    /// A literal qualifier value.
    Datatype(Datatype),
}

/// `classes` plus their superclasses up to `level` `subclass of` hops.
pub fn superclass_closure(store: &EntityStore, classes: &BTreeSet<EntityId>, level: usize) -> BTreeSet<EntityId> {
    let mut seen = classes.clone();
    let mut queue: VecDeque<(EntityId, usize)> = classes.iter().map(|c| (*c, 0)).collect();
    while let Some((c, depth)) = queue.pop_front() {
        if depth == level {
            continue;
        }
        if let Some(rec) = store.get(c) {
            for parent in rec.item_values(known::SUBCLASS_OF) {
                if seen.insert(parent) {
                    queue.push_back((parent, depth + 1));
                }
            }
        }
    }
    seen
}

/// True when the NER label of a term agrees with the expected type at the
/// given hypernym level.
pub fn type_match(
    term_type: &str,
    expected: &Expected,
    level: usize,
    store: &EntityStore,
    mapping: &NerTypeMap,
) -> bool {
    let Some(targets) = mapping.get(term_type) else {
        log::debug!("no type mapping for NER label {term_type:?}");
        return false;
    };
    match expected {
        Expected::Datatype(dt) => targets.datatypes.contains(dt),
        Expected::Item(item) => {
            let closure = store.hypernym_closure(*item, level);
            !targets.classes.is_disjoint(&closure)
        }
        Expected::Classes(classes) => {
            let closure = superclass_closure(store, classes, level);
            !targets.classes.is_disjoint(&closure)
        }
    }
}
