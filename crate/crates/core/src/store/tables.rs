//! QUAD/TRIPLE table encoding of entity records.
//!
//! Qualified claims go to the QUAD table as `(s, p, o, trip_id:q)` rows; their
//! qualifier values, unqualified claims and entity terms go to the TRIPLE
//! table as `(x, y, z)` rows. A qualifier value is found by joining the
//! `trip_id:q` cell against a TRIPLE row whose `x` is the same reference and
//! whose `y` is `:value`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::claim::{Claim, Qualifier};
use super::entity::{EntityRecord, EntityStore};
use super::value::{DataValue, Datatype};
use crate::error::{Error, Result};
use crate::ids::EntityId;

pub const QUAD_HEADER: [&str; 4] = ["s", "p", "o", "trip_id:q"];
pub const TRIPLE_HEADER: [&str; 3] = ["x", "y", "z"];

/// Deterministic identifier of an `(s, p, o)` triple.
pub fn trip_id(subject: EntityId, property: EntityId, object: &DataValue) -> String {
    let canonical = format!("{subject}\t{property}\t{}", object.canonical());
    let digest = Sha256::digest(canonical.as_bytes());
    let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    format!("trip_{hex}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRow {
    pub s: EntityId,
    pub p: EntityId,
    pub o: DataValue,
    pub trip_id: String,
    pub q: EntityId,
}

impl QuadRow {
    /// The `trip_id:q` reference joining this row to its value triple.
    pub fn reference(&self) -> String {
        format!("{}:{}", self.trip_id, self.q)
    }
}

/// The collapsed QUAD form `(s, p, o, trip_id:QL)` with all qualifiers of a
/// triple on one row.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactQuadRow {
    pub s: EntityId,
    pub p: EntityId,
    pub o: DataValue,
    pub trip_id: String,
    pub qualifiers: Vec<EntityId>,
}

impl fmt::Display for CompactQuadRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ql: Vec<String> = self.qualifiers.iter().map(ToString::to_string).collect();
        write!(
            f,
            "({}, {}, {}, {}:\"{}\")",
            self.s,
            self.p,
            self.o.canonical(),
            self.trip_id,
            ql.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TripleSubject {
    Entity(EntityId),
    Qualifier { trip_id: String, qualifier: EntityId },
}

impl fmt::Display for TripleSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleSubject::Entity(id) => write!(f, "{id}"),
            TripleSubject::Qualifier { trip_id, qualifier } => write!(f, "{trip_id}:{qualifier}"),
        }
    }
}

impl FromStr for TripleSubject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.rsplit_once(':') {
            Some((trip, q)) => Ok(TripleSubject::Qualifier {
                trip_id: normalize_trip(trip),
                qualifier: q.trim().parse()?,
            }),
            None => Ok(TripleSubject::Entity(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TriplePredicate {
    Label,
    Description,
    Alias,
    /// Several aliases in one cell, comma separated.
    AliasList,
    Value,
    Property(EntityId),
}

impl fmt::Display for TriplePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriplePredicate::Label => f.write_str(":label"),
            TriplePredicate::Description => f.write_str(":description"),
            TriplePredicate::Alias => f.write_str(":alias"),
            TriplePredicate::AliasList => f.write_str(":aliases"),
            TriplePredicate::Value => f.write_str(":value"),
            TriplePredicate::Property(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for TriplePredicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            ":label" => Ok(TriplePredicate::Label),
            ":description" => Ok(TriplePredicate::Description),
            ":alias" => Ok(TriplePredicate::Alias),
            ":aliases" => Ok(TriplePredicate::AliasList),
            ":value" => Ok(TriplePredicate::Value),
            other => Ok(TriplePredicate::Property(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleRow {
    pub x: TripleSubject,
    pub y: TriplePredicate,
    pub z: DataValue,
}

impl TripleRow {
    fn term(id: EntityId, y: TriplePredicate, text: &str) -> Self {
        TripleRow {
            x: TripleSubject::Entity(id),
            y,
            z: DataValue::Text(text.to_string()),
        }
    }
}

/// Table references in the wild carry spaces (`trip 1`); drop them.
fn normalize_trip(raw: &str) -> String {
    raw.split_whitespace().collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub quads: Vec<QuadRow>,
    pub triples: Vec<TripleRow>,
}

/// Encodes one entity. Terms come first, then claims in record order: WST1
/// and WST2 claims become triples, qualified claims become quad rows plus one
/// `:value` triple per qualifier.
pub fn encode_tables(entity: &EntityRecord) -> Tables {
    let mut out = Tables::default();
    let id = entity.id;
    if !entity.label.is_empty() {
        out.triples
            .push(TripleRow::term(id, TriplePredicate::Label, &entity.label));
    }
    if !entity.description.is_empty() {
        out.triples
            .push(TripleRow::term(id, TriplePredicate::Description, &entity.description));
    }
    for alias in &entity.aliases {
        out.triples.push(TripleRow::term(id, TriplePredicate::Alias, alias));
    }
    for claim in &entity.claims {
        if claim.qualifiers.is_empty() {
            out.triples.push(TripleRow {
                x: TripleSubject::Entity(claim.subject),
                y: TriplePredicate::Property(claim.property),
                z: claim.value.clone(),
            });
            continue;
        }
        let trip = trip_id(claim.subject, claim.property, &claim.value);
        for q in &claim.qualifiers {
            out.quads.push(QuadRow {
                s: claim.subject,
                p: claim.property,
                o: claim.value.clone(),
                trip_id: trip.clone(),
                q: q.property,
            });
            out.triples.push(TripleRow {
                x: TripleSubject::Qualifier {
                    trip_id: trip.clone(),
                    qualifier: q.property,
                },
                y: TriplePredicate::Value,
                z: q.value.clone(),
            });
        }
    }
    out
}

/// Collapses quad rows sharing a trip id into the compact form.
pub fn compact_quads(rows: &[QuadRow]) -> Vec<CompactQuadRow> {
    let mut out: Vec<CompactQuadRow> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|c| c.trip_id == row.trip_id) {
            Some(c) => {
                if !c.qualifiers.contains(&row.q) {
                    c.qualifiers.push(row.q);
                }
            }
            None => out.push(CompactQuadRow {
                s: row.s,
                p: row.p,
                o: row.o.clone(),
                trip_id: row.trip_id.clone(),
                qualifiers: vec![row.q],
            }),
        }
    }
    out
}

impl EntityStore {
    /// Encodes every record, in id order.
    pub fn encode(&self) -> Tables {
        let mut out = Tables::default();
        for record in self.records() {
            let t = encode_tables(record);
            out.quads.extend(t.quads);
            out.triples.extend(t.triples);
        }
        out
    }

    /// Rebuilds a store from tables. Qualifier values are resolved by joining
    /// each quad row's `trip_id:q` with the matching `:value` triple.
    pub fn from_tables(tables: &Tables) -> Result<EntityStore> {
        let mut store = EntityStore::new();
        let mut values: Vec<(&str, EntityId, &DataValue)> = Vec::new();
        for (row, t) in tables.triples.iter().enumerate() {
            match (&t.x, t.y) {
                (TripleSubject::Entity(id), TriplePredicate::Label) => {
                    store.get_or_create(*id).label = text_of(&t.z, row)?;
                }
                (TripleSubject::Entity(id), TriplePredicate::Description) => {
                    store.get_or_create(*id).description = text_of(&t.z, row)?;
                }
                (TripleSubject::Entity(id), TriplePredicate::Alias) => {
                    let alias = text_of(&t.z, row)?;
                    store.get_or_create(*id).push_alias(alias);
                }
                (TripleSubject::Entity(id), TriplePredicate::AliasList) => {
                    let record = store.get_or_create(*id);
                    for alias in text_of(&t.z, row)?.split(", ") {
                        record.push_alias(alias.to_string());
                    }
                }
                (TripleSubject::Entity(id), TriplePredicate::Property(p)) => {
                    let claim = Claim::simple(*id, p, t.z.clone());
                    store.get_or_create(*id).claims.push(claim);
                }
                (TripleSubject::Qualifier { trip_id, qualifier }, TriplePredicate::Value) => {
                    values.push((trip_id.as_str(), *qualifier, &t.z));
                }
                _ => {
                    return Err(Error::Table {
                        row,
                        detail: format!("unsupported triple ({}, {}, ...)", t.x, t.y),
                    })
                }
            }
        }
        // Rows sharing (s, p, o) form one claim with several qualifiers.
        let mut grouped: Vec<(String, Claim)> = Vec::new();
        for (row, quad) in tables.quads.iter().enumerate() {
            let value = values
                .iter()
                .find(|(trip, q, _)| *trip == quad.trip_id && *q == quad.q)
                .map(|(_, _, v)| (*v).clone())
                .ok_or_else(|| Error::Table {
                    row,
                    detail: format!("no :value triple for {}", quad.reference()),
                })?;
            let qualifier = Qualifier {
                property: quad.q,
                datatype: Datatype::of_value(&value),
                value,
            };
            match grouped.iter_mut().find(|(trip, _)| *trip == quad.trip_id) {
                Some((_, claim)) => claim.qualifiers.push(qualifier),
                None => {
                    let mut claim = Claim::simple(quad.s, quad.p, quad.o.clone());
                    claim.qualifiers.push(qualifier);
                    grouped.push((quad.trip_id.clone(), claim));
                }
            }
        }
        for (_, mut claim) in grouped {
            claim.wst = if claim.qualifiers[0].datatype == Datatype::WikibaseItem {
                super::Wst::Wst3b
            } else {
                super::Wst::Wst3a
            };
            for part in claim.decompose()? {
                store.get_or_create(part.subject).claims.push(part);
            }
        }
        Ok(store)
    }
}

fn text_of(z: &DataValue, row: usize) -> Result<String> {
    match z {
        DataValue::Text(s) => Ok(s.clone()),
        other => Err(Error::Table {
            row,
            detail: format!("expected a text literal, got {}", other.canonical()),
        }),
    }
}

impl Tables {
    pub fn write_quads_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(QUAD_HEADER)?;
        for r in &self.quads {
            out.write_record([r.s.to_string(), r.p.to_string(), r.o.canonical(), r.reference()])?;
        }
        out.flush().map_err(|e| Error::io("<quad csv>", e))
    }

    pub fn write_triples_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRIPLE_HEADER)?;
        for r in &self.triples {
            out.write_record([r.x.to_string(), r.y.to_string(), r.z.canonical()])?;
        }
        out.flush().map_err(|e| Error::io("<triple csv>", e))
    }

    pub fn read_csv<Q: Read, T: Read>(quads: Q, triples: T) -> Result<Tables> {
        let mut out = Tables::default();
        let mut rdr = csv::Reader::from_reader(quads);
        check_header(rdr.headers()?, &QUAD_HEADER)?;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cell = |i: usize| rec.get(i).unwrap_or_default();
            let reference: TripleSubject = cell(3).parse()?;
            let TripleSubject::Qualifier { trip_id, qualifier } = reference else {
                return Err(Error::Table {
                    row,
                    detail: format!("malformed trip_id:q cell {:?}", cell(3)),
                });
            };
            out.quads.push(QuadRow {
                s: cell(0).trim().parse()?,
                p: cell(1).trim().parse()?,
                o: DataValue::parse_canonical(cell(2))?,
                trip_id,
                q: qualifier,
            });
        }
        let mut rdr = csv::Reader::from_reader(triples);
        check_header(rdr.headers()?, &TRIPLE_HEADER)?;
        for rec in rdr.records() {
            let rec = rec?;
            let cell = |i: usize| rec.get(i).unwrap_or_default();
            out.triples.push(TripleRow {
                x: cell(0).parse()?,
                y: cell(1).parse()?,
                z: DataValue::parse_canonical(cell(2))?,
            });
        }
        Ok(out)
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Table {
            row: 0,
            detail: format!("expected header {expected:?}, found {found:?}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::known;
    use crate::store::claim::tests_support::loria_p54;
    use crate::store::value::TimePrecision;

    fn simone() -> EntityRecord {
        let mut r = EntityRecord::new(EntityId::item(1372810), "Simone Loria").with_aliases(["Loria"]);
        r.description = "Italian footballer".into();
        r = r.with_claim(known::INSTANCE_OF, DataValue::Item(known::HUMAN));
        r.claims.push(Claim::simple(
            r.id,
            EntityId::property(569),
            DataValue::time("+1976-10-28T00:00:00Z", Some(TimePrecision::Day)).unwrap(),
        ));
        let p54 = Claim::from_raw(&loria_p54()).unwrap();
        r.claims.extend(p54.decompose().unwrap());
        r
    }

    #[test]
    fn loria_quad_rows_share_trip_id() {
        let t = encode_tables(&simone());
        assert_eq!(t.quads.len(), 5);
        let trip = &t.quads[0].trip_id;
        assert!(trip.starts_with("trip_"));
        assert!(t.quads.iter().all(|r| &r.trip_id == trip));
        let quals: Vec<u64> = t.quads.iter().map(|r| r.q.number).collect();
        assert_eq!(quals, [580, 582, 1350, 1351, 1642]);
        let p580 = t
            .triples
            .iter()
            .find(|r| r.x.to_string() == format!("{trip}:P580"))
            .unwrap();
        assert_eq!(p580.y, TriplePredicate::Value);
        assert_eq!(p580.z.canonical(), "\"+2011-01-01T00:00:00Z\":datetime");
        assert_eq!(p580.z.date().unwrap().year, 2011);
    }

    #[test]
    fn trip_id_is_stable() {
        let o = DataValue::Item(EntityId::item(1893));
        let a = trip_id(EntityId::item(1372810), EntityId::property(54), &o);
        assert_eq!(a, trip_id(EntityId::item(1372810), EntityId::property(54), &o));
        assert_ne!(a, trip_id(EntityId::item(1372810), EntityId::property(26), &o));
    }

    #[test]
    fn terms_only_entity() {
        let r = EntityRecord::new(EntityId::item(5), "human").with_aliases(["person"]);
        let t = encode_tables(&r);
        assert!(t.quads.is_empty());
        let ys: Vec<_> = t.triples.iter().map(|r| r.y).collect();
        assert_eq!(ys, [TriplePredicate::Label, TriplePredicate::Alias]);
    }

    #[test]
    fn compact_form() {
        let t = encode_tables(&simone());
        let compact = compact_quads(&t.quads);
        assert_eq!(compact.len(), 1);
        let shown = compact[0].to_string();
        assert!(shown.ends_with(":\"P580, P582, P1350, P1351, P1642\")"), "{shown}");
    }

    #[test]
    fn encoding_is_lossless_for_qualifiers() {
        let mut store = EntityStore::new();
        store.insert(simone());
        let tables = store.encode();
        let back = EntityStore::from_tables(&tables).unwrap();
        assert_eq!(back, store);

        let mut q = Vec::new();
        let mut t = Vec::new();
        tables.write_quads_csv(&mut q).unwrap();
        tables.write_triples_csv(&mut t).unwrap();
        let header = String::from_utf8(q.clone()).unwrap();
        assert!(header.starts_with("s,p,o,trip_id:q\n"));
        assert!(String::from_utf8(t.clone()).unwrap().starts_with("x,y,z\n"));
        let reread = Tables::read_csv(&q[..], &t[..]).unwrap();
        assert_eq!(reread, tables);
    }

    #[test]
    fn missing_value_triple_is_an_error() {
        let mut tables = encode_tables(&simone());
        tables.triples.retain(|r| r.y != TriplePredicate::Value);
        assert!(matches!(EntityStore::from_tables(&tables), Err(Error::Table { .. })));
    }

    #[test]
    fn spaced_trip_references_parse() {
        let s: TripleSubject = "trip 1: P580".parse().unwrap();
        assert_eq!(
            s,
            TripleSubject::Qualifier {
                trip_id: "trip1".into(),
                qualifier: EntityId::property(580)
            }
        );
    }
}
