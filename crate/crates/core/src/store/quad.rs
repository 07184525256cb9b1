use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::claim::{Claim, Qualifier};
use super::value::{DataValue, Datatype};
use crate::error::{Error, Result};
use crate::ids::EntityId;

/// The mapping unit `(s, p, O_n, Q_m)`.
///
/// `qualifier_sets[i]` is `Y(o_i)`, the qualifiers attached to `objects[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    pub subject: EntityId,
    pub property: EntityId,
    pub objects: Vec<DataValue>,
    pub qualifier_sets: Vec<Vec<Qualifier>>,
}

impl Quad {
    pub fn n(&self) -> usize {
        self.objects.len()
    }

    /// Total qualifier count, the sum of `|Y(o_i)|`.
    pub fn m(&self) -> usize {
        self.qualifier_sets.iter().map(Vec::len).sum()
    }

    pub fn qualifiers_of(&self, object: usize) -> &[Qualifier] {
        self.qualifier_sets.get(object).map_or(&[], Vec::as_slice)
    }

    /// Re-expands the quad into single-qualifier claims, object by object.
    pub fn to_claims(&self) -> Vec<Claim> {
        let mut out = Vec::with_capacity(self.m());
        for (object, quals) in self.objects.iter().zip(&self.qualifier_sets) {
            let datatype = Datatype::of_value(object);
            for q in quals {
                out.push(Claim {
                    subject: self.subject,
                    property: self.property,
                    datatype,
                    value: object.clone(),
                    qualifiers: vec![q.clone()],
                    wst: if q.datatype == Datatype::WikibaseItem {
                        super::Wst::Wst3b
                    } else {
                        super::Wst::Wst3a
                    },
                });
            }
        }
        out
    }
}

/// Aggregates qualified claims sharing `(s, p)` into one quad. Objects are
/// deduplicated in first-seen order and every qualifier lands in the set of
/// the object it was attached to.
pub fn build_quad(claims: &[Claim]) -> Result<Quad> {
    let first = claims.first().ok_or(Error::EmptyObjects)?;
    let (subject, property) = (first.subject, first.property);
    let mut objects: Vec<DataValue> = Vec::new();
    let mut qualifier_sets: Vec<Vec<Qualifier>> = Vec::new();
    for claim in claims {
        if claim.subject != subject || claim.property != property {
            return Err(Error::MixedQuad);
        }
        let idx = match objects.iter().position(|o| *o == claim.value) {
            Some(i) => i,
            None => {
                objects.push(claim.value.clone());
                qualifier_sets.push(Vec::new());
                objects.len() - 1
            }
        };
        qualifier_sets[idx].extend(claim.qualifiers.iter().cloned());
    }
    let quad = Quad {
        subject,
        property,
        objects,
        qualifier_sets,
    };
    if quad.m() == 0 {
        return Err(Error::EmptyQualifiers { subject, property });
    }
    Ok(quad)
}

/// One quad per property among the qualified claims, in first-seen order.
pub fn quads_by_property<'a>(claims: impl IntoIterator<Item = &'a Claim>) -> Vec<Quad> {
    let mut groups: Vec<(EntityId, Vec<Claim>)> = Vec::new();
    let mut index: BTreeMap<(EntityId, EntityId), usize> = BTreeMap::new();
    for claim in claims.into_iter().filter(|c| c.wst.is_qualified()) {
        let key = (claim.subject, claim.property);
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push((claim.property, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(claim.clone());
    }
    groups
        .into_iter()
        .filter_map(|(_, claims)| build_quad(&claims).ok())
        .collect()
}
