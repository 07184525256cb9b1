//! Entities, statements and their QUAD/TRIPLE encoding.

mod claim;
mod entity;
mod quad;
mod tables;
mod value;

pub use claim::{
    classify_statement, decompose_all, decompose_statement, Claim, Decomposition, Qualifier, RawClaim, RawQualifier,
    Statement, ValueNode, Wst,
};
pub use entity::{EntityRecord, EntityStore};
pub use quad::{build_quad, quads_by_property, Quad};
pub use tables::{
    compact_quads, encode_tables, trip_id, CompactQuadRow, QuadRow, Tables, TriplePredicate, TripleRow, TripleSubject,
    QUAD_HEADER, TRIPLE_HEADER,
};
pub use value::{canonical_amount, parse_timestamp, CalendarDate, DataValue, Datatype, TimePrecision};
