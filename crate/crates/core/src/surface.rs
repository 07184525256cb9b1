//! Surface forms of entities and values (G sets), plus property definition
//! terms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{known, EntityId};
use crate::stopwords::content_words;
use crate::store::{DataValue, EntityRecord, EntityStore, TimePrecision};

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// English long month name for `1..=12`.
pub fn month_name(month: u32) -> Option<&'static str> {
    MONTHS.get(month.checked_sub(1)? as usize).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub enum GSetOwner {
    Entity(EntityId),
    Value(DataValue),
}

/// Label and aliases of an entity, deduplicated case-insensitively.
#[derive(Debug, Clone, PartialEq)]
pub struct GSet {
    pub owner: GSetOwner,
    forms: Vec<String>,
}

impl GSet {
    pub fn new(owner: GSetOwner, forms: impl IntoIterator<Item = String>) -> Result<GSet> {
        let mut set = GSet {
            owner,
            forms: Vec::new(),
        };
        for form in forms {
            set.push(form);
        }
        if set.forms.is_empty() {
            let name = match &set.owner {
                GSetOwner::Entity(id) => id.to_string(),
                GSetOwner::Value(v) => v.canonical(),
            };
            return Err(Error::EmptyGSet(name));
        }
        Ok(set)
    }

    fn push(&mut self, form: String) {
        let form = form.trim();
        if form.is_empty() {
            return;
        }
        let lower = form.to_lowercase();
        if !self.forms.iter().any(|f| f.to_lowercase() == lower) {
            self.forms.push(form.to_string());
        }
    }

    pub fn forms(&self) -> &[String] {
        &self.forms
    }

    pub fn contains(&self, form: &str) -> bool {
        let lower = form.to_lowercase();
        self.forms.iter().any(|f| f.to_lowercase() == lower)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// `{label} ∪ aliases`. In subject mode a human also gets the given-name and
/// family-name labels, nicknames and a gendered pronoun.
pub fn g_set(entity: &EntityRecord, subject_mode: bool, store: &EntityStore) -> Result<GSet> {
    let mut forms = vec![entity.label.clone()];
    forms.extend(entity.aliases.iter().cloned());
    if subject_mode && entity.is_human() {
        for prop in [known::GIVEN_NAME, known::FAMILY_NAME] {
            for id in entity.item_values(prop) {
                if let Some(label) = store.label(id) {
                    forms.push(label.to_string());
                }
            }
        }
        for value in entity.values(known::NICKNAME) {
            if let DataValue::Text(nick) = value {
                forms.push(nick.clone());
            }
        }
        for id in entity.item_values(known::SEX_OR_GENDER) {
            match store.label(id) {
                Some("male") => forms.push("he".into()),
                Some("female") => forms.push("she".into()),
                _ => {}
            }
        }
    }
    GSet::new(GSetOwner::Entity(entity.id), forms)
}

/// G set of an id, looked up in the store.
pub fn g_set_of(id: EntityId, subject_mode: bool, store: &EntityStore) -> Result<GSet> {
    match store.get(id) {
        Some(record) => g_set(record, subject_mode, store),
        None => Err(Error::EmptyGSet(id.to_string())),
    }
}

/// Text renderings of a literal value. Items and coordinates have none here.
pub fn value_surface_forms(value: &DataValue) -> Vec<String> {
    match value {
        DataValue::Time { precision, .. } => {
            let Some(date) = value.date() else {
                return Vec::new();
            };
            let year = date.year.to_string();
            let month = month_name(date.month);
            match (precision, month) {
                (TimePrecision::Year, _) | (_, None) => vec![year],
                (TimePrecision::Month, Some(m)) => vec![format!("{m} {year}"), year],
                (TimePrecision::Day, Some(m)) if date.day > 0 => {
                    vec![format!("{} {m} {year}", date.day), format!("{m} {year}"), year]
                }
                (TimePrecision::Day, Some(m)) => vec![format!("{m} {year}"), year],
            }
        }
        DataValue::Quantity { amount, .. } => vec![amount.clone()],
        DataValue::Text(s) | DataValue::Url(s) => vec![s.clone()],
        DataValue::Item(_) | DataValue::Coordinate { .. } => Vec::new(),
    }
}

/// Forms of any value: the G set for items, literal renderings otherwise.
pub fn value_forms(value: &DataValue, store: &EntityStore) -> Vec<String> {
    match value {
        DataValue::Item(id) => g_set_of(*id, false, store)
            .map(|g| g.forms().to_vec())
            .unwrap_or_default(),
        other => value_surface_forms(other),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefinitionTerms {
    pub property: EntityId,
    pub terms: BTreeSet<String>,
}

/// Property → definition terms, read from a tab-separated file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DefinitionDictionary {
    entries: BTreeMap<EntityId, BTreeSet<String>>,
}

const BUNDLED_DEFINITIONS: &str = include_str!("../data/definition_terms.tsv");

impl DefinitionDictionary {
    /// The dictionary shipped with the crate.
    pub fn bundled() -> DefinitionDictionary {
        Self::parse(BUNDLED_DEFINITIONS).expect("bundled definition terms parse")
    }

    pub fn parse(text: &str) -> Result<DefinitionDictionary> {
        let mut entries = BTreeMap::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let id: EntityId = parts.next().unwrap_or_default().parse()?;
            let id = id.expect_property()?;
            let terms: BTreeSet<String> = parts.map(str::to_lowercase).collect();
            if terms.is_empty() {
                return Err(Error::Table {
                    row,
                    detail: format!("{id} has no definition terms"),
                });
            }
            entries.entry(id).or_insert_with(BTreeSet::new).extend(terms);
        }
        Ok(DefinitionDictionary { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DefinitionDictionary> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, property: EntityId) -> Option<&BTreeSet<String>> {
        self.entries.get(&property)
    }

    pub fn insert(&mut self, property: EntityId, terms: impl IntoIterator<Item = String>) {
        self.entries.entry(property).or_default().extend(terms);
    }
}

/// Configured terms of a property, falling back to the non-stopword words of
/// its G set.
pub fn definition_terms(
    property: EntityId,
    dictionary: &DefinitionDictionary,
    store: &EntityStore,
) -> Result<DefinitionTerms> {
    if let Some(terms) = dictionary.get(property) {
        return Ok(DefinitionTerms {
            property,
            terms: terms.clone(),
        });
    }
    let g = store
        .get(property)
        .map(|record| {
            let mut forms = vec![record.label.as_str()];
            forms.extend(record.aliases.iter().map(String::as_str));
            content_words(forms)
        })
        .unwrap_or_default();
    if g.is_empty() {
        return Err(Error::EmptyGSet(property.to_string()));
    }
    Ok(DefinitionTerms {
        property,
        terms: g.into_iter().collect(),
    })
}
