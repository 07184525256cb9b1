use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Item,
    Property,
}

/// A Wikidata identifier, `Q<n>` for items and `P<n>` for properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    pub kind: EntityKind,
    pub number: u64,
}

impl EntityId {
    pub const fn item(number: u64) -> Self {
        EntityId {
            kind: EntityKind::Item,
            number,
        }
    }

    pub const fn property(number: u64) -> Self {
        EntityId {
            kind: EntityKind::Property,
            number,
        }
    }

    pub fn is_item(&self) -> bool {
        self.kind == EntityKind::Item
    }

    pub fn is_property(&self) -> bool {
        self.kind == EntityKind::Property
    }

    /// Parses either a bare id or an entity URI such as
    /// `http://www.wikidata.org/entity/Q42`.
    pub fn from_uri(s: &str) -> Result<Self, Error> {
        let tail = s.trim().rsplit('/').next().unwrap_or_default();
        tail.parse()
    }

    pub fn expect_property(self) -> Result<Self, Error> {
        if self.is_property() {
            Ok(self)
        } else {
            Err(Error::WrongIdKind {
                expected: "property",
                got: self,
            })
        }
    }

    pub fn expect_item(self) -> Result<Self, Error> {
        if self.is_item() {
            Ok(self)
        } else {
            Err(Error::WrongIdKind {
                expected: "item",
                got: self,
            })
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            EntityKind::Item => 'Q',
            EntityKind::Property => 'P',
        };
        write!(f, "{prefix}{}", self.number)
    }
}

impl FromStr for EntityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidId(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('Q') => EntityKind::Item,
            Some('P') => EntityKind::Property,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(bad());
        }
        let number = digits.parse().map_err(|_| bad())?;
        Ok(EntityId { kind, number })
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Well-known identifiers used by the matcher.
pub mod known {
    use super::EntityId;

    pub const INSTANCE_OF: EntityId = EntityId::property(31);
    pub const SUBCLASS_OF: EntityId = EntityId::property(279);
    pub const SEX_OR_GENDER: EntityId = EntityId::property(21);
    pub const GIVEN_NAME: EntityId = EntityId::property(735);
    pub const FAMILY_NAME: EntityId = EntityId::property(734);
    pub const NICKNAME: EntityId = EntityId::property(1449);
    pub const HUMAN: EntityId = EntityId::item(5);
}
