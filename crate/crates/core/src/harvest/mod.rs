//! Collecting the corpus: queries, fetching, claim extraction and scanning.

pub mod extract;
pub mod fetch;
pub mod scan;
pub mod sparql;
pub mod text;

pub use extract::{entity_record, extract_claims, ClaimTuple};
pub use fetch::{FetchConfig, Fetcher, HttpGet, HttpResponse};
pub use scan::{load_page_list, scan_property, AnnotationIndex, PagePair, ScanOptions, ScanRecord};
pub use sparql::{page_list_query, qualifier_census_query};
