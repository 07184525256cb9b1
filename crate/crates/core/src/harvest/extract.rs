//! Claim extraction from Wikidata entity JSON, plus the tuple rendering used
//! to inspect it.

use std::fmt;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ids::EntityId;
use crate::store::{decompose_all, Claim, DataValue, EntityRecord, RawClaim, RawQualifier, TimePrecision, Wst};

/// A qualifier property with its non-empty values.
#[derive(Debug, Clone, PartialEq)]
pub struct QualifierTuple {
    pub property: EntityId,
    pub datatype: String,
    pub values: Vec<String>,
}

/// One extracted statement value: tag, subject, property, datatype, value
/// and qualifiers, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimTuple {
    pub wst: Wst,
    pub subject: EntityId,
    pub property: EntityId,
    pub datatype: String,
    pub value: String,
    pub qualifiers: Vec<QualifierTuple>,
}

impl ClaimTuple {
    pub fn tag(&self) -> &'static str {
        self.wst.record_tag()
    }
}

/// Python `repr` of a string.
pub fn py_str(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 || c as u32 == 0x7f => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

fn py_tuple(items: &[String]) -> String {
    match items {
        [one] => format!("({one},)"),
        _ => format!("({})", items.join(", ")),
    }
}

/// Renders as a nested Python tuple, e.g.
/// `('r2', ('Q1', 'P31', 'wikibase-item', 'Q5'))`.
impl fmt::Display for ClaimTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut inner = vec![py_str(&self.subject.to_string()), py_str(&self.property.to_string())];
        if self.wst.is_qualified() {
            inner.push(py_str(&self.value));
            inner.push(py_str(&self.datatype));
        } else {
            inner.push(py_str(&self.datatype));
            inner.push(py_str(&self.value));
        }
        for q in &self.qualifiers {
            let mut parts = vec![py_str(&q.property.to_string()), py_str(&q.datatype)];
            parts.extend(q.values.iter().map(|v| py_str(v)));
            inner.push(py_tuple(&parts));
        }
        write!(f, "{}", py_tuple(&[py_str(self.tag()), py_tuple(&inner)]))
    }
}

fn payload(path: &str, detail: impl Into<String>) -> Error {
    Error::Payload {
        path: path.to_string(),
        detail: detail.into(),
    }
}

/// The entity object, unwrapping an `{"entities": {...}}` envelope.
fn entity_object(doc: &Value) -> Result<&Map<String, Value>> {
    let obj = doc.as_object().ok_or_else(|| payload("$", "not an object"))?;
    if let Some(entities) = obj.get("entities") {
        let map = entities
            .as_object()
            .ok_or_else(|| payload("entities", "not an object"))?;
        let (_, first) = map.iter().next().ok_or_else(|| payload("entities", "empty"))?;
        return first.as_object().ok_or_else(|| payload("entities.*", "not an object"));
    }
    Ok(obj)
}

/// A snak value as (display string, typed value). `None` for `somevalue`,
/// `novalue` and empty payloads.
fn snak_value(snak: &Value, path: &str) -> Result<Option<(String, DataValue)>> {
    if snak.get("snaktype").and_then(Value::as_str).unwrap_or("value") != "value" {
        return Ok(None);
    }
    let Some(dv) = snak.get("datavalue") else {
        return Ok(None);
    };
    let kind = dv.get("type").and_then(Value::as_str).unwrap_or_default();
    let v = dv
        .get("value")
        .ok_or_else(|| payload(path, "datavalue without value"))?;
    let bad = |detail: &str| payload(&format!("{path}.datavalue"), detail);
    let out = match kind {
        "wikibase-entityid" => {
            let id = match v.get("id").and_then(Value::as_str) {
                Some(id) => id.to_string(),
                None => {
                    let n = v
                        .get("numeric-id")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| bad("entity id"))?;
                    match v.get("entity-type").and_then(Value::as_str) {
                        Some("property") => format!("P{n}"),
                        _ => format!("Q{n}"),
                    }
                }
            };
            let parsed: EntityId = id.parse().map_err(|_| bad("entity id"))?;
            (id, DataValue::Item(parsed))
        }
        "time" => {
            let ts = v.get("time").and_then(Value::as_str).ok_or_else(|| bad("time"))?;
            let precision = v.get("precision").and_then(Value::as_u64).map(TimePrecision::from_code);
            (ts.to_string(), DataValue::time(ts, precision)?)
        }
        "quantity" => {
            let amount = v.get("amount").and_then(Value::as_str).ok_or_else(|| bad("amount"))?;
            let unit = v
                .get("unit")
                .and_then(Value::as_str)
                .map(|u| u.rsplit('/').next().unwrap_or(u));
            (amount.to_string(), DataValue::quantity(amount, unit)?)
        }
        "string" => {
            let s = v.as_str().ok_or_else(|| bad("string"))?;
            (s.to_string(), DataValue::Text(s.to_string()))
        }
        "monolingualtext" => {
            let s = v.get("text").and_then(Value::as_str).ok_or_else(|| bad("text"))?;
            (s.to_string(), DataValue::Text(s.to_string()))
        }
        "globecoordinate" => {
            let lat = v
                .get("latitude")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("latitude"))?;
            let lon = v
                .get("longitude")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("longitude"))?;
            (format!("{lat},{lon}"), DataValue::Coordinate { lat, lon })
        }
        other => return Err(bad(&format!("unsupported value type {other:?}"))),
    };
    if out.0.is_empty() {
        return Ok(None);
    }
    Ok(Some(out))
}

fn snak_datatype(snak: &Value, path: &str) -> Result<String> {
    snak.get("datatype")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| payload(path, "missing datatype"))
}

/// Text-like datatypes carry a string the typed value can't tell apart.
fn typed_value(datatype: &str, value: DataValue) -> DataValue {
    match (datatype, value) {
        ("url", DataValue::Text(s)) => DataValue::Url(s),
        (_, v) => v,
    }
}

struct Extracted {
    tuple: ClaimTuple,
    raw: RawClaim,
}

fn extract(doc: &Value) -> Result<(EntityId, Vec<Extracted>)> {
    let entity = entity_object(doc)?;
    let subject: EntityId = entity
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| payload("id", "missing"))?
        .parse()?;
    let mut out = Vec::new();
    let Some(claims) = entity.get("claims").and_then(Value::as_object) else {
        return Ok((subject, out));
    };
    for (pkey, group) in claims {
        let property: EntityId = pkey.parse()?;
        let group = group
            .as_array()
            .ok_or_else(|| payload(&format!("claims.{pkey}"), "not an array"))?;
        for (ci, claim) in group.iter().enumerate() {
            let path = format!("claims.{pkey}[{ci}]");
            let snak = claim
                .get("mainsnak")
                .ok_or_else(|| payload(&path, "missing mainsnak"))?;
            let snak_path = format!("{path}.mainsnak");
            let datatype = snak_datatype(snak, &snak_path)?;
            let Some((value, typed)) = snak_value(snak, &snak_path)? else {
                log::debug!("{subject} {property}: claim {ci} has no value");
                continue;
            };
            let mut tuples = Vec::new();
            let mut raw_qualifiers = Vec::new();
            if let Some(quals) = claim.get("qualifiers").and_then(Value::as_object) {
                let order: Vec<String> = match claim.get("qualifiers-order").and_then(Value::as_array) {
                    Some(o) => o.iter().filter_map(|x| x.as_str().map(str::to_string)).collect(),
                    None => quals.keys().cloned().collect(),
                };
                for qkey in order {
                    let Some(snaks) = quals.get(&qkey).and_then(Value::as_array) else {
                        continue;
                    };
                    let qprop: EntityId = qkey.parse()?;
                    let mut qt = QualifierTuple {
                        property: qprop,
                        datatype: String::new(),
                        values: Vec::new(),
                    };
                    for (qi, qsnak) in snaks.iter().enumerate() {
                        let qpath = format!("{path}.qualifiers.{qkey}[{qi}]");
                        qt.datatype = snak_datatype(qsnak, &qpath)?;
                        if let Some((qv, qtyped)) = snak_value(qsnak, &qpath)? {
                            qt.values.push(qv);
                            raw_qualifiers.push(RawQualifier {
                                property: qprop,
                                datatype: qt.datatype.clone(),
                                value: typed_value(&qt.datatype, qtyped),
                            });
                        }
                    }
                    if !qt.values.is_empty() {
                        tuples.push(qt);
                    }
                }
            }
            let wst = match raw_qualifiers.first() {
                Some(q) if q.datatype == "wikibase-item" => Wst::Wst3b,
                Some(_) => Wst::Wst3a,
                None if datatype == "wikibase-item" => Wst::Wst2,
                None => Wst::Wst1,
            };
            let raw = RawClaim {
                subject,
                property,
                datatype: datatype.clone(),
                value: typed_value(&datatype, typed),
                qualifiers: raw_qualifiers,
            };
            out.push(Extracted {
                tuple: ClaimTuple {
                    wst,
                    subject,
                    property,
                    datatype,
                    value,
                    qualifiers: tuples,
                },
                raw,
            });
        }
    }
    Ok((subject, out))
}

fn parse(json: &str) -> Result<Value> {
    serde_json::from_str(json).map_err(|e| payload("$", e.to_string()))
}

/// Every statement value of the entity as a tagged tuple, in document order.
/// Qualifier snaks without a value are left out.
pub fn extract_claims(json: &str) -> Result<Vec<ClaimTuple>> {
    Ok(extract(&parse(json)?)?.1.into_iter().map(|e| e.tuple).collect())
}

/// The raw claims of the entity, ready for classification.
pub fn extract_raw_claims(json: &str) -> Result<Vec<RawClaim>> {
    Ok(extract(&parse(json)?)?.1.into_iter().map(|e| e.raw).collect())
}

fn english<'a>(entity: &'a Map<String, Value>, field: &str) -> Option<&'a str> {
    entity.get(field)?.get("en")?.get("value")?.as_str()
}

/// Builds a store record: English terms, enwiki sitelink and the claims
/// split to one qualifier each. Claims with datatypes the classifier does
/// not know, and heterogeneous ones, are dropped.
pub fn entity_record(json: &str) -> Result<EntityRecord> {
    let doc = parse(json)?;
    let (id, extracted) = extract(&doc)?;
    let entity = entity_object(&doc)?;
    let mut record = EntityRecord::new(id, english(entity, "labels").unwrap_or_default());
    record.description = english(entity, "descriptions").unwrap_or_default().to_string();
    if let Some(aliases) = entity
        .get("aliases")
        .and_then(|a| a.get("en"))
        .and_then(Value::as_array)
    {
        for a in aliases {
            if let Some(v) = a.get("value").and_then(Value::as_str) {
                record.push_alias(v.to_string());
            }
        }
    }
    if let Some(title) = entity
        .get("sitelinks")
        .and_then(|s| s.get("enwiki"))
        .and_then(|s| s.get("title"))
        .and_then(Value::as_str)
    {
        record.sitelinks.insert("enwiki".into(), title.to_string());
    }
    let mut classified = Vec::new();
    for e in extracted {
        match Claim::from_raw(&e.raw) {
            Ok(c) => classified.push(c),
            Err(err) => log::debug!("{id}: {err}"),
        }
    }
    let parts = decompose_all(&classified);
    if parts.heterogeneous > 0 {
        log::debug!("{id}: {} heterogeneous claims skipped", parts.heterogeneous);
    }
    record.claims = parts.claims;
    Ok(record)
}


#[cfg(test)]
mod tests {
    use super::fixtures::SIMONE_LORIA;
    use super::*;

    #[test]
    fn python_strings() {
        assert_eq!(py_str("Q1"), "'Q1'");
        assert_eq!(py_str("it's"), "\"it's\"");
        assert_eq!(py_str("a'b\"c"), "'a\\'b\"c'");
        assert_eq!(py_str("x\\y\n"), "'x\\\\y\\n'");
        assert_eq!(py_tuple(&["'a'".into()]), "('a',)");
    }

    #[test]
    fn qualified_tuple() {
        let claims = extract_claims(SIMONE_LORIA).unwrap();
        let p54 = claims.iter().find(|c| c.property == EntityId::property(54)).unwrap();
        assert_eq!(p54.tag(), "r3");
        assert_eq!(
            p54.to_string(),
            "('r3', ('Q1372810', 'P54', 'Q1893', 'wikibase-item', \
             ('P580', 'time', '+2011-01-01T00:00:00Z'), \
             ('P582', 'time', '+2012-01-01T00:00:00Z'), \
             ('P1350', 'quantity', '+9'), \
             ('P1351', 'quantity', '+1'), \
             ('P1642', 'wikibase-item', 'Q3622633')))"
        );
    }

    #[test]
    fn unqualified_tuples() {
        let claims = extract_claims(SIMONE_LORIA).unwrap();
        let dob = claims.iter().find(|c| c.property == EntityId::property(569)).unwrap();
        assert_eq!(
            dob.to_string(),
            "('r1', ('Q1372810', 'P569', 'time', '+1976-10-28T00:00:00Z'))"
        );
        let human = claims.iter().find(|c| c.property == EntityId::property(31)).unwrap();
        assert_eq!(human.to_string(), "('r2', ('Q1372810', 'P31', 'wikibase-item', 'Q5'))");
    }

    #[test]
    fn only_birth_date() {
        let json = r#"{"id":"Q9","claims":{"P569":[{"mainsnak":{"snaktype":"value","property":"P569","datatype":"time",
            "datavalue":{"type":"time","value":{"time":"+1950-02-03T00:00:00Z","precision":11}}}}]}}"#;
        let claims = extract_claims(json).unwrap();
        assert_eq!(claims.len(), 1);
        assert_eq!(claims[0].tag(), "r1");
    }

    #[test]
    fn record_is_decomposed() {
        let r = entity_record(SIMONE_LORIA).unwrap();
        assert_eq!(r.label, "Simone Loria");
        assert_eq!(r.sitelinks["enwiki"], "Simone Loria");
        let p54: Vec<_> = r
            .claims
            .iter()
            .filter(|c| c.property == EntityId::property(54))
            .collect();
        assert_eq!(p54.len(), 5);
        assert!(p54.iter().all(|c| c.qualifiers.len() == 1));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            extract_claims(SIMONE_LORIA).unwrap(),
            extract_claims(SIMONE_LORIA).unwrap()
        );
    }

    #[test]
    fn malformed_payload() {
        let err = extract_claims(r#"{"id":"Q1","claims":{"P31":[{"nomainsnak":1}]}}"#).unwrap_err();
        assert!(err.to_string().contains("claims.P31[0]"), "{err}");
        assert!(matches!(extract_claims("not json"), Err(Error::Payload { .. })));
    }
}
