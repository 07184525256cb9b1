use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::claim::{Claim, Wst};
use super::value::DataValue;
use crate::error::{Error, Result};
use crate::ids::{known, EntityId};

/// An item or property with its English terms and classified claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: EntityId,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub claims: Vec<Claim>,
    #[serde(default)]
    pub sitelinks: BTreeMap<String, String>,
}

impl EntityRecord {
    pub fn new(id: EntityId, label: impl Into<String>) -> Self {
        EntityRecord {
            id,
            label: label.into(),
            description: String::new(),
            aliases: Vec::new(),
            claims: Vec::new(),
            sitelinks: BTreeMap::new(),
        }
    }

    pub fn with_aliases<I, S>(mut self, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for alias in aliases {
            self.push_alias(alias.into());
        }
        self
    }

    pub fn with_claim(mut self, property: EntityId, value: DataValue) -> Self {
        self.claims.push(Claim::simple(self.id, property, value));
        self
    }

    /// Adds an alias unless an identical one is already present.
    pub fn push_alias(&mut self, alias: String) {
        let alias = alias.trim().to_string();
        if !alias.is_empty() && !self.aliases.contains(&alias) {
            self.aliases.push(alias);
        }
    }

    /// Values of the given property across all claims, in claim order.
    pub fn values(&self, property: EntityId) -> impl Iterator<Item = &DataValue> {
        self.claims
            .iter()
            .filter(move |c| c.property == property)
            .map(|c| &c.value)
    }

    pub fn item_values(&self, property: EntityId) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = Vec::new();
        for id in self.values(property).filter_map(DataValue::as_item) {
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    /// WST1 and WST2 claims, the statements extra matching works from.
    pub fn simple_claims(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| matches!(c.wst, Wst::Wst1 | Wst::Wst2))
    }

    pub fn qualified_claims(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| c.wst.is_qualified())
    }

    pub fn is_human(&self) -> bool {
        self.item_values(known::INSTANCE_OF).contains(&known::HUMAN)
    }
}

/// In-memory entity store. Built once, then read-only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityStore {
    records: BTreeMap<EntityId, EntityRecord>,
}

impl EntityStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: EntityRecord) {
        self.records.insert(record.id, record);
    }

    pub fn get(&self, id: EntityId) -> Option<&EntityRecord> {
        self.records.get(&id)
    }

    pub(crate) fn get_or_create(&mut self, id: EntityId) -> &mut EntityRecord {
        self.records.entry(id).or_insert_with(|| EntityRecord::new(id, ""))
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.records.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &EntityRecord> {
        self.records.values()
    }

    /// English label, or `None` when unknown or empty.
    pub fn label(&self, id: EntityId) -> Option<&str> {
        self.get(id).map(|r| r.label.as_str()).filter(|l| !l.is_empty())
    }

    /// Reads newline-delimited JSON, one [`EntityRecord`] per line.
    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut store = EntityStore::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            store.insert(serde_json::from_str(&line)?);
        }
        Ok(store)
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for record in self.records() {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Classes reachable from `item` through one `instance of` hop followed
    /// by up to `level` `subclass of` hops. Unknown items give an empty set.
    pub fn hypernym_closure(&self, item: EntityId, level: usize) -> BTreeSet<EntityId> {
        let Some(record) = self.get(item) else {
            return BTreeSet::new();
        };
        let mut closure: BTreeSet<EntityId> = record.item_values(known::INSTANCE_OF).into_iter().collect();
        let mut frontier: Vec<EntityId> = closure.iter().copied().collect();
        for _ in 0..level {
            let mut next = Vec::new();
            for class in frontier {
                let Some(rec) = self.get(class) else { continue };
                for parent in rec.item_values(known::SUBCLASS_OF) {
                    if closure.insert(parent) {
                        next.push(parent);
                    }
                }
            }
            frontier = next;
        }
        closure
    }
}

impl FromIterator<EntityRecord> for EntityStore {
    fn from_iter<T: IntoIterator<Item = EntityRecord>>(iter: T) -> Self {
        let mut store = EntityStore::new();
        for r in iter {
            store.insert(r);
        }
        store
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn item(n: u64) -> EntityId {
        EntityId::item(n)
    }

    fn fixture() -> EntityStore {
        // Q1372810 -P31-> Q5 -P279-> Q100 -P279-> Q200, Q5 -P279-> Q101
        [
            EntityRecord::new(item(1372810), "Simone Loria").with_claim(known::INSTANCE_OF, DataValue::Item(item(5))),
            EntityRecord::new(item(5), "human")
                .with_claim(known::SUBCLASS_OF, DataValue::Item(item(100)))
                .with_claim(known::SUBCLASS_OF, DataValue::Item(item(101))),
            EntityRecord::new(item(100), "person").with_claim(known::SUBCLASS_OF, DataValue::Item(item(200))),
            EntityRecord::new(item(200), "agent"),
        ]
        .into_iter()
        .collect()
    }

    /// Breadth-first search over an explicit edge list, independent of the store.
    fn bfs_oracle(start: &[u64], edges: &[(u64, u64)], depth: usize) -> BTreeSet<EntityId> {
        let mut seen: BTreeSet<u64> = start.iter().copied().collect();
        let mut queue: VecDeque<(u64, usize)> = start.iter().map(|&s| (s, 0)).collect();
        while let Some((node, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for &(_, to) in edges.iter().filter(|(from, _)| *from == node) {
                if seen.insert(to) {
                    queue.push_back((to, d + 1));
                }
            }
        }
        seen.into_iter().map(item).collect()
    }

    #[test]
    fn closure_levels() {
        let store = fixture();
        let edges = [(5, 100), (5, 101), (100, 200)];
        assert_eq!(store.hypernym_closure(item(1372810), 0), BTreeSet::from([item(5)]));
        for level in 0..4 {
            assert_eq!(
                store.hypernym_closure(item(1372810), level),
                bfs_oracle(&[5], &edges, level),
                "level {level}"
            );
        }
        assert_eq!(
            store.hypernym_closure(item(1372810), 1),
            BTreeSet::from([item(5), item(100), item(101)])
        );
        assert!(store.hypernym_closure(item(999), 2).is_empty());
    }

    #[test]
    fn jsonl_round_trip() {
        let store = fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        store.save_jsonl(&path).unwrap();
        assert_eq!(EntityStore::load_jsonl(&path).unwrap(), store);
    }

    #[test]
    fn aliases_deduplicated() {
        let r = EntityRecord::new(item(1), "x").with_aliases(["a", "a", " ", "b"]);
        assert_eq!(r.aliases, vec!["a", "b"]);
    }

    proptest! {
        #[test]
        fn closure_is_monotone(edges in prop::collection::vec((1u64..8, 1u64..8), 0..20), k in 0usize..4) {
            let mut store = EntityStore::new();
            store.insert(EntityRecord::new(item(100), "root")
                .with_claim(known::INSTANCE_OF, DataValue::Item(item(1))));
            for (from, to) in &edges {
                store.get_or_create(item(*from))
                    .claims
                    .push(Claim::simple(item(*from), known::SUBCLASS_OF, DataValue::Item(item(*to))));
            }
            let a = store.hypernym_closure(item(100), k);
            let b = store.hypernym_closure(item(100), k + 1);
            prop_assert!(a.is_subset(&b));
        }
    }
}
