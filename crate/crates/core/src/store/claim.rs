use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::value::{DataValue, Datatype};
use crate::error::{Error, Result};
use crate::ids::EntityId;

/// Statement type by qualifier presence and value datatype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wst {
    /// No qualifiers, value is not an item.
    #[serde(rename = "WST1")]
    Wst1,
    /// No qualifiers, value is an item.
    #[serde(rename = "WST2")]
    Wst2,
    /// Qualified, qualifier value is not an item.
    #[serde(rename = "WST3a")]
    Wst3a,
    /// Qualified, qualifier value is an item.
    #[serde(rename = "WST3b")]
    Wst3b,
}

impl Wst {
    pub fn is_qualified(&self) -> bool {
        matches!(self, Wst::Wst3a | Wst::Wst3b)
    }

    /// The `r1`/`r2`/`r3` tag of the extraction tuples.
    pub fn record_tag(&self) -> &'static str {
        match self {
            Wst::Wst1 => "r1",
            Wst::Wst2 => "r2",
            Wst::Wst3a | Wst::Wst3b => "r3",
        }
    }
}

impl fmt::Display for Wst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wst::Wst1 => "WST-1",
            Wst::Wst2 => "WST-2",
            Wst::Wst3a => "WST-3a",
            Wst::Wst3b => "WST-3b",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qualifier {
    pub property: EntityId,
    pub datatype: Datatype,
    pub value: DataValue,
}

/// A qualifier as it arrives from a payload, datatype not yet validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RawQualifier {
    pub property: EntityId,
    pub datatype: String,
    pub value: DataValue,
}

/// A claim as it arrives from a payload, before classification.
#[derive(Debug, Clone, PartialEq)]
pub struct RawClaim {
    pub subject: EntityId,
    pub property: EntityId,
    pub datatype: String,
    pub value: DataValue,
    pub qualifiers: Vec<RawQualifier>,
}

/// One classified claim: a single value with zero or more qualifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub subject: EntityId,
    pub property: EntityId,
    pub datatype: Datatype,
    pub value: DataValue,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qualifiers: Vec<Qualifier>,
    pub wst: Wst,
}

fn wst_for(datatype: Datatype, first_qualifier: Option<Datatype>) -> Wst {
    match first_qualifier {
        None if datatype == Datatype::WikibaseItem => Wst::Wst2,
        None => Wst::Wst1,
        Some(Datatype::WikibaseItem) => Wst::Wst3b,
        Some(_) => Wst::Wst3a,
    }
}

/// Classifies a raw claim.
///
/// A claim carrying several qualifiers takes the sub-type of its first
/// qualifier; [`Claim::decompose`] re-tags every single-qualifier part.
pub fn classify_statement(raw: &RawClaim) -> Result<Wst> {
    Ok(classify(raw)?.wst)
}

fn classify(raw: &RawClaim) -> Result<Claim> {
    let unknown = |datatype: &str| Error::UnknownDatatype {
        subject: raw.subject,
        property: raw.property,
        datatype: datatype.to_string(),
    };
    let datatype: Datatype = raw.datatype.parse().map_err(|_| unknown(&raw.datatype))?;
    let qualifiers = raw
        .qualifiers
        .iter()
        .map(|q| {
            Ok(Qualifier {
                property: q.property,
                datatype: q.datatype.parse().map_err(|_| unknown(&q.datatype))?,
                value: q.value.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wst = wst_for(datatype, qualifiers.first().map(|q| q.datatype));
    Ok(Claim {
        subject: raw.subject,
        property: raw.property,
        datatype,
        value: raw.value.clone(),
        qualifiers,
        wst,
    })
}

impl Claim {
    pub fn from_raw(raw: &RawClaim) -> Result<Claim> {
        classify(raw)
    }

    /// An unqualified claim, tagged WST1 or WST2 by its datatype.
    pub fn simple(subject: EntityId, property: EntityId, value: DataValue) -> Claim {
        let datatype = Datatype::of_value(&value);
        Claim {
            subject,
            property,
            datatype,
            value,
            qualifiers: Vec::new(),
            wst: wst_for(datatype, None),
        }
    }

    /// Splits the claim into one claim per qualifier. Unqualified and
    /// single-qualifier claims come back unchanged. A qualifier property that
    /// occurs more than once is heterogeneous and rejects the claim.
    pub fn decompose(&self) -> Result<Vec<Claim>> {
        let mut seen = BTreeSet::new();
        for q in &self.qualifiers {
            if !seen.insert(q.property) {
                return Err(Error::HeterogeneousQualifier {
                    subject: self.subject,
                    property: self.property,
                    qualifier: q.property,
                });
            }
        }
        if self.qualifiers.len() <= 1 {
            return Ok(vec![self.clone()]);
        }
        Ok(self
            .qualifiers
            .iter()
            .map(|q| Claim {
                qualifiers: vec![q.clone()],
                wst: wst_for(self.datatype, Some(q.datatype)),
                ..self.clone()
            })
            .collect())
    }

    pub fn qualifier(&self) -> Option<&Qualifier> {
        self.qualifiers.first()
    }
}

/// One value of a (possibly multi-valued) statement with its qualifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNode {
    pub value: DataValue,
    pub qualifiers: Vec<RawQualifier>,
}

/// A statement group entry for one property, possibly with several values.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub subject: EntityId,
    pub property: EntityId,
    pub datatype: String,
    pub values: Vec<ValueNode>,
}

/// Splits a statement into atomic claims: one per value, and one per
/// qualifier of each value. Order follows the input.
pub fn decompose_statement(statement: &Statement) -> Result<Vec<Claim>> {
    let mut out = Vec::new();
    for node in &statement.values {
        let raw = RawClaim {
            subject: statement.subject,
            property: statement.property,
            datatype: statement.datatype.clone(),
            value: node.value.clone(),
            qualifiers: node.qualifiers.clone(),
        };
        out.extend(classify(&raw)?.decompose()?);
    }
    Ok(out)
}

/// Outcome of decomposing many claims where heterogeneous ones are skipped.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Decomposition {
    pub claims: Vec<Claim>,
    pub heterogeneous: usize,
}

pub fn decompose_all<'a>(claims: impl IntoIterator<Item = &'a Claim>) -> Decomposition {
    let mut out = Decomposition::default();
    for claim in claims {
        match claim.decompose() {
            Ok(parts) => out.claims.extend(parts),
            Err(e) => {
                log::debug!("{e}");
                out.heterogeneous += 1;
            }
        }
    }
    out
}
