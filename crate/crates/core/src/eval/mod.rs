//! Corpus evaluation: matching scores, type checks, statistics, distances,
//! noise filtering and predicate ranking.

pub mod cluster;
pub mod distance;
pub mod metrics;
pub mod relevance;
pub mod scores;
pub mod stats;
pub mod types;
