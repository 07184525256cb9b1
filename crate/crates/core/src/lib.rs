//! Align qualified Wikidata statements (quads) with English Wikipedia
//! sentences and evaluate the labeled corpus that comes out of it.
//!
//! The pipeline runs in this order:
//!
//! 1. [`store`] models entities, classifies claims into statement types and
//!    encodes them as QUAD/TRIPLE tables.
//! 2. [`surface`] produces the surface forms (G sets) of items and values.
//! 3. [`sentence`] ingests parser annotations into subject/verb/entity terms.
//! 4. [`matcher`] runs subject, object, qualifier, extra and predicate matching.
//! 5. [`labeler`] turns a match into a labeled sentence.
//! 6. [`harvest`] drives SPARQL page-list generation, fetching and scanning.
//! 7. [`embeddings`] and [`eval`] score, filter and rank the corpus.
//!
//! Numeric code is generic over the scalar type. The aliases below pin the
//! common instantiations.

pub mod embeddings;
pub mod error;
pub mod eval;
pub mod harvest;
pub mod ids;
pub mod labeler;
pub mod matcher;
pub mod scalar;
pub mod sentence;
pub mod stopwords;
pub mod store;
pub mod surface;

pub use error::{Error, Result};
pub use ids::{EntityId, EntityKind};
pub use scalar::Scalar;

/// Word-vector model with `f32` components, the usual on-disk precision.
pub type VectorModelF32 = embeddings::VectorModel<f32>;
/// Word-vector model with `f64` components.
pub type VectorModelF64 = embeddings::VectorModel<f64>;
/// Matching scores as floating point ratios.
pub type MatchScoreF64 = eval::scores::MatchScore<f64>;
/// Matching scores as exact rationals.
pub type ExactMatchScore = eval::scores::MatchScore<num_rational::Rational64>;
/// Feature vector of one labeled sentence.
pub type FeatureVectorF64 = eval::distance::FeatureVector<f64>;
/// Clustering report over `f64` feature vectors.
pub type ClusterReportF64 = eval::cluster::ClusterReport<f64>;
