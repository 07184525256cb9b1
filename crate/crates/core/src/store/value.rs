use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ids::EntityId;

/// Wikidata datatypes understood by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Datatype {
    WikibaseItem,
    WikibaseProperty,
    String,
    ExternalId,
    MonolingualText,
    Quantity,
    Time,
    Url,
    GlobeCoordinate,
    CommonsMedia,
}

impl Datatype {
    pub const ALL: [Datatype; 10] = [
        Datatype::WikibaseItem,
        Datatype::WikibaseProperty,
        Datatype::String,
        Datatype::ExternalId,
        Datatype::MonolingualText,
        Datatype::Quantity,
        Datatype::Time,
        Datatype::Url,
        Datatype::GlobeCoordinate,
        Datatype::CommonsMedia,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Datatype::WikibaseItem => "wikibase-item",
            Datatype::WikibaseProperty => "wikibase-property",
            Datatype::String => "string",
            Datatype::ExternalId => "external-id",
            Datatype::MonolingualText => "monolingualtext",
            Datatype::Quantity => "quantity",
            Datatype::Time => "time",
            Datatype::Url => "url",
            Datatype::GlobeCoordinate => "globe-coordinate",
            Datatype::CommonsMedia => "commonsMedia",
        }
    }

    /// The datatype a bare value implies when no explicit datatype is stored.
    pub fn of_value(value: &DataValue) -> Datatype {
        match value {
            DataValue::Item(id) if id.is_property() => Datatype::WikibaseProperty,
            DataValue::Item(_) => Datatype::WikibaseItem,
            DataValue::Text(_) => Datatype::String,
            DataValue::Time { .. } => Datatype::Time,
            DataValue::Quantity { .. } => Datatype::Quantity,
            DataValue::Url(_) => Datatype::Url,
            DataValue::Coordinate { .. } => Datatype::GlobeCoordinate,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Datatype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Datatype::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown datatype {s:?}")))
    }
}

impl From<Datatype> for String {
    fn from(d: Datatype) -> String {
        d.as_str().to_string()
    }
}

impl TryFrom<String> for Datatype {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimePrecision {
    Year,
    Month,
    Day,
}

impl TimePrecision {
    /// Maps a Wikidata precision code. Anything coarser than a year collapses
    /// to year, anything finer than a day collapses to day.
    pub fn from_code(code: u64) -> TimePrecision {
        match code {
            0..=9 => TimePrecision::Year,
            10 => TimePrecision::Month,
            _ => TimePrecision::Day,
        }
    }

    pub fn code(&self) -> u64 {
        match self {
            TimePrecision::Year => 9,
            TimePrecision::Month => 10,
            TimePrecision::Day => 11,
        }
    }
}

/// A statement or qualifier value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum DataValue {
    Item(EntityId),
    Text(String),
    Time {
        timestamp: String,
        precision: TimePrecision,
    },
    Quantity {
        amount: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<String>,
    },
    Url(String),
    Coordinate {
        lat: f64,
        lon: f64,
    },
}

/// Calendar fields of a Wikidata timestamp such as `+2011-01-01T00:00:00Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalendarDate {
    pub year: i64,
    pub month: u32,
    pub day: u32,
}

pub fn parse_timestamp(ts: &str) -> Option<CalendarDate> {
    let ts = ts.trim();
    let (sign, rest) = match ts.as_bytes().first()? {
        b'+' => (1, &ts[1..]),
        b'-' => (-1, &ts[1..]),
        _ => (1, ts),
    };
    let date = rest.split('T').next()?;
    let mut parts = date.split('-');
    let year: i64 = parts.next()?.parse().ok()?;
    let month: u32 = parts.next().unwrap_or("0").parse().ok()?;
    let day: u32 = parts.next().unwrap_or("0").parse().ok()?;
    if month > 12 || day > 31 {
        return None;
    }
    Some(CalendarDate {
        year: sign * year,
        month,
        day,
    })
}

impl DataValue {
    /// Builds a time value, inferring the precision when none is given: a
    /// January-1 (or zero month/day) timestamp is a year, anything else a day.
    pub fn time(timestamp: &str, precision: Option<TimePrecision>) -> Result<DataValue, Error> {
        let date = parse_timestamp(timestamp).ok_or_else(|| Error::InvalidValue {
            datatype: "time".into(),
            detail: timestamp.to_string(),
        })?;
        let precision = precision.unwrap_or_else(|| infer_precision(date));
        Ok(DataValue::Time {
            timestamp: timestamp.trim().to_string(),
            precision,
        })
    }

    /// Builds a quantity with its canonical decimal amount (no leading `+`).
    pub fn quantity(amount: &str, unit: Option<&str>) -> Result<DataValue, Error> {
        let canonical = canonical_amount(amount).ok_or_else(|| Error::InvalidValue {
            datatype: "quantity".into(),
            detail: amount.to_string(),
        })?;
        let unit = unit
            .map(str::trim)
            .filter(|u| !u.is_empty() && *u != "1")
            .map(str::to_string);
        Ok(DataValue::Quantity {
            amount: canonical,
            unit,
        })
    }

    pub fn as_item(&self) -> Option<EntityId> {
        match self {
            DataValue::Item(id) => Some(*id),
            _ => None,
        }
    }

    pub fn date(&self) -> Option<CalendarDate> {
        match self {
            DataValue::Time { timestamp, .. } => parse_timestamp(timestamp),
            _ => None,
        }
    }

    /// Stable textual rendering used for hashing and for the `z` column of
    /// the TRIPLE table.
    pub fn canonical(&self) -> String {
        match self {
            DataValue::Item(id) => id.to_string(),
            DataValue::Text(s) => format!("\"{s}\""),
            DataValue::Time { timestamp, precision } => {
                let inferred = parse_timestamp(timestamp).map(infer_precision);
                if inferred == Some(*precision) {
                    format!("\"{timestamp}\":datetime")
                } else {
                    format!("\"{timestamp}/{}\":datetime", precision.code())
                }
            }
            DataValue::Quantity { amount, unit } => match unit {
                Some(u) => format!("\"{amount}|{u}\":quantity"),
                None => format!("\"{amount}\":quantity"),
            },
            DataValue::Url(u) => format!("\"{u}\":url"),
            DataValue::Coordinate { lat, lon } => format!("\"{lat},{lon}\":coordinate"),
        }
    }

    /// Inverse of [`DataValue::canonical`].
    pub fn parse_canonical(s: &str) -> Result<DataValue, Error> {
        let s = s.trim();
        let bad = || Error::InvalidValue {
            datatype: "literal".into(),
            detail: s.to_string(),
        };
        if !s.starts_with('"') {
            return Ok(DataValue::Item(s.parse()?));
        }
        let close = s.rfind('"').filter(|&i| i > 0).ok_or_else(bad)?;
        let body = &s[1..close];
        let suffix = &s[close + 1..];
        let kind = match suffix {
            "" => "string",
            _ => suffix.strip_prefix(':').ok_or_else(bad)?,
        };
        match kind {
            "string" | "text" => Ok(DataValue::Text(body.to_string())),
            "datetime" | "time" => match body.rsplit_once('/') {
                Some((ts, code)) if code.bytes().all(|b| b.is_ascii_digit()) => {
                    let code = code.parse().map_err(|_| bad())?;
                    DataValue::time(ts, Some(TimePrecision::from_code(code)))
                }
                _ => DataValue::time(body, None),
            },
            "quantity" => match body.split_once('|') {
                Some((amount, unit)) => DataValue::quantity(amount, Some(unit)),
                None => DataValue::quantity(body, None),
            },
            "url" => Ok(DataValue::Url(body.to_string())),
            "coordinate" => {
                let (lat, lon) = body.split_once(',').ok_or_else(bad)?;
                Ok(DataValue::Coordinate {
                    lat: lat.trim().parse().map_err(|_| bad())?,
                    lon: lon.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

fn infer_precision(date: CalendarDate) -> TimePrecision {
    match (date.month, date.day) {
        (0, _) | (1, 1) => TimePrecision::Year,
        (_, 0) => TimePrecision::Month,
        _ => TimePrecision::Day,
    }
}

/// Strips a leading `+`, redundant leading zeros and trailing fractional zeros.
pub fn canonical_amount(raw: &str) -> Option<String> {
    let raw = raw.trim();
    let (neg, digits) = match raw.as_bytes().first()? {
        b'+' => (false, &raw[1..]),
        b'-' => (true, &raw[1..]),
        _ => (false, raw),
    };
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let int = int.trim_start_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    let frac = frac.trim_end_matches('0');
    let mut out = String::new();
    if neg && !(int == "0" && frac.is_empty()) {
        out.push('-');
    }
    out.push_str(int);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_strips_plus() {
        assert_eq!(canonical_amount("+9").as_deref(), Some("9"));
        assert_eq!(canonical_amount("+0010.500").as_deref(), Some("10.5"));
        assert_eq!(canonical_amount("-3").as_deref(), Some("-3"));
        assert_eq!(canonical_amount("-0").as_deref(), Some("0"));
        assert_eq!(canonical_amount("abc"), None);
    }

    #[test]
    fn january_first_is_year_precision() {
        let v = DataValue::time("+2011-01-01T00:00:00Z", None).unwrap();
        assert!(matches!(
            v,
            DataValue::Time {
                precision: TimePrecision::Year,
                ..
            }
        ));
        let v = DataValue::time("+1976-10-28T00:00:00Z", None).unwrap();
        assert!(matches!(
            v,
            DataValue::Time {
                precision: TimePrecision::Day,
                ..
            }
        ));
        let v = DataValue::time("+1989-00-00T00:00:00Z", None).unwrap();
        assert!(matches!(
            v,
            DataValue::Time {
                precision: TimePrecision::Year,
                ..
            }
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let values = vec![
            DataValue::Item(EntityId::item(5)),
            DataValue::Text("Simone Loria".into()),
            DataValue::time("+2011-01-01T00:00:00Z", None).unwrap(),
            DataValue::time("+2011-07-01T00:00:00Z", Some(TimePrecision::Month)).unwrap(),
            DataValue::quantity("+9", None).unwrap(),
            DataValue::quantity("12", Some("http://www.wikidata.org/entity/Q11573")).unwrap(),
            DataValue::Url("https://example.org/a".into()),
            DataValue::Coordinate { lat: 44.5, lon: 11.25 },
        ];
        for v in values {
            assert_eq!(DataValue::parse_canonical(&v.canonical()).unwrap(), v);
        }
        assert_eq!(
            DataValue::parse_canonical("\"2011\":datetime")
                .unwrap()
                .date()
                .unwrap()
                .year,
            2011
        );
    }

    #[test]
    fn datatype_strings() {
        for d in Datatype::ALL {
            assert_eq!(d.as_str().parse::<Datatype>().unwrap(), d);
        }
        assert!("wikibase-lexeme".parse::<Datatype>().is_err());
    }
}
