//! The per-property scan: page list in, labeled corpus out.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract::entity_record;
use super::fetch::Fetcher;
use crate::error::{Error, Result};
use crate::ids::{known, EntityId};
use crate::labeler::{label_sentence, LabelOptions, LabeledSentence};
use crate::matcher::{map_item_page, MatchOptions, MatchResult};
use crate::sentence::{ingest_annotations, ParsedDocument};
use crate::store::{quads_by_property, DataValue, EntityStore};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PagePair {
    pub item: EntityId,
    pub page_title: String,
}

/// Reads a page list with either two columns (item, title) or the six
/// columns of the page-list query (item, title, object, property, value,
/// sitelink). Item URIs are reduced to their id; a header row is skipped;
/// repeated pairs keep their first position.
pub fn read_page_list<R: Read>(reader: R) -> Result<Vec<PagePair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 && rec.len() != 6 {
            return Err(Error::Table {
                row: row + 1,
                detail: format!("expected 2 or 6 columns, found {}", rec.len()),
            });
        }
        let item = match EntityId::from_uri(&rec[0]) {
            Ok(id) => id,
            Err(_) if row == 0 => continue,
            Err(e) => {
                return Err(Error::Table {
                    row: row + 1,
                    detail: e.to_string(),
                })
            }
        };
        let pair = PagePair {
            item,
            page_title: rec[1].trim().to_string(),
        };
        if seen.insert(pair.clone()) {
            out.push(pair);
        }
    }
    Ok(out)
}

pub fn load_page_list(path: impl AsRef<Path>) -> Result<Vec<PagePair>> {
    let path = path.as_ref();
    read_page_list(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Parsed annotation documents keyed by page title.
#[derive(Debug, Clone, Default)]
pub struct AnnotationIndex {
    docs: BTreeMap<String, ParsedDocument>,
}

impl AnnotationIndex {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_docs(ingest_annotations(BufReader::new(file))?))
    }

    pub fn from_docs(docs: impl IntoIterator<Item = ParsedDocument>) -> Self {
        AnnotationIndex {
            docs: docs.into_iter().map(|d| (d.title.clone(), d)).collect(),
        }
    }

    pub fn get(&self, title: &str) -> Option<&ParsedDocument> {
        self.docs.get(title)
    }
}

/// One labeled sentence of the output corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub property: EntityId,
    pub pair: PagePair,
    pub sentence_index: usize,
    pub raw: String,
    pub labeled: String,
    pub ms: Vec<(String, String)>,
    pub mo: Vec<(String, String)>,
    pub mq: Vec<(String, String)>,
    pub me: Vec<(String, String)>,
}

pub const OUTPUT_HEADER: [&str; 10] = [
    "property",
    "item",
    "page_title",
    "sentence_index",
    "raw_sentence",
    "labeled_sentence",
    "ms",
    "mo",
    "mq",
    "me",
];

fn pairs_json(pairs: &[(String, String)]) -> String {
    serde_json::to_string(pairs).expect("string pairs serialize")
}

impl ScanRecord {
    pub fn from_result(
        property: EntityId,
        pair: &PagePair,
        index: usize,
        result: &MatchResult<'_>,
        ls: &LabeledSentence,
    ) -> Self {
        ScanRecord {
            property,
            pair: pair.clone(),
            sentence_index: index,
            raw: result.sentence.text.clone(),
            labeled: ls.labeled.clone(),
            ms: result.ms_pairs(),
            mo: result.mo_pairs(),
            mq: result.mq_pairs(),
            me: result.me_pairs(),
        }
    }

    pub fn to_row(&self) -> [String; 10] {
        [
            self.property.to_string(),
            self.pair.item.to_string(),
            self.pair.page_title.clone(),
            self.sentence_index.to_string(),
            self.raw.clone(),
            self.labeled.clone(),
            pairs_json(&self.ms),
            pairs_json(&self.mo),
            pairs_json(&self.mq),
            pairs_json(&self.me),
        ]
    }

    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        let bad = |detail: String| Error::Table { row: 0, detail };
        if row.len() != 10 {
            return Err(bad(format!("expected 10 columns, found {}", row.len())));
        }
        let pairs = |i: usize| -> Result<Vec<(String, String)>> { Ok(serde_json::from_str(&row[i])?) };
        Ok(ScanRecord {
            property: row[0].parse()?,
            pair: PagePair {
                item: row[1].parse()?,
                page_title: row[2].to_string(),
            },
            sentence_index: row[3]
                .parse()
                .map_err(|_| bad(format!("bad sentence index {:?}", &row[3])))?,
            raw: row[4].to_string(),
            labeled: row[5].to_string(),
            ms: pairs(6)?,
            mo: pairs(7)?,
            mq: pairs(8)?,
            me: pairs(9)?,
        })
    }
}

/// Reads an output CSV written by [`scan_property`].
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ScanRecord>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.records().map(|r| ScanRecord::from_row(&r?)).collect()
}

/// One line of the corpus sidecar: where the sentence came from plus its
/// labeled form with tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub item: EntityId,
    pub page_title: String,
    pub sentence_index: usize,
    pub sentence: LabeledSentence,
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub matching: MatchOptions,
    pub labeling: LabelOptions,
    /// Pairs processed per parallel batch; results are written after each.
    pub batch: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            matching: MatchOptions::default(),
            labeling: LabelOptions::default(),
            batch: 16,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub pairs: usize,
    pub resumed: usize,
    pub failed: usize,
    pub records: usize,
}

/// Paths of the files a scan writes next to `out`.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    let dir = out.parent().unwrap_or(Path::new(""));
    (
        dir.join(format!("{stem}.corpus.jsonl")),
        dir.join(format!("{stem}.done")),
    )
}

/// Entities needed to match `item` on `property`: the item, its name and
/// gender values, objects of the property with their simple claims, and
/// every property and qualifier item involved.
pub fn neighbourhood(fetcher: &Fetcher, item: EntityId, property: EntityId) -> Result<EntityStore> {
    let mut store = EntityStore::new();
    let record = entity_record(&fetcher.fetch_entity(item)?)?;
    let mut wanted: BTreeSet<EntityId> = BTreeSet::from([property]);
    for p in [known::GIVEN_NAME, known::FAMILY_NAME, known::SEX_OR_GENDER] {
        wanted.extend(record.item_values(p));
    }
    let mut objects = BTreeSet::new();
    for claim in record.claims.iter().filter(|c| c.property == property) {
        if let Some(o) = claim.value.as_item() {
            objects.insert(o);
        }
        for q in &claim.qualifiers {
            wanted.insert(q.property);
            if let Some(v) = q.value.as_item() {
                wanted.insert(v);
            }
        }
    }
    store.insert(record);
    let fetch = |id: EntityId, store: &mut EntityStore| {
        if store.contains(id) {
            return;
        }
        match fetcher.fetch_entity(id).and_then(|j| entity_record(&j)) {
            Ok(r) => store.insert(r),
            Err(e) => log::warn!("{item}: neighbour {id} unavailable: {e}"),
        }
    };
    for o in &objects {
        fetch(*o, &mut store);
        let Some(rec) = store.get(*o) else { continue };
        let mut next = BTreeSet::new();
        for c in rec.simple_claims() {
            next.insert(c.property);
            if let DataValue::Item(v) = &c.value {
                next.insert(*v);
            }
        }
        wanted.extend(next);
    }
    for id in wanted {
        fetch(id, &mut store);
    }
    Ok(store)
}

type PairOutput = (Vec<ScanRecord>, Vec<CorpusEntry>);

fn scan_pair(
    property: EntityId,
    pair: &PagePair,
    fetcher: &Fetcher,
    annotations: &AnnotationIndex,
    options: &ScanOptions,
) -> Result<PairOutput> {
    let doc = annotations.get(&pair.page_title).ok_or_else(|| Error::Missing {
        key: format!("annotations for {:?}", pair.page_title),
    })?;
    let store = neighbourhood(fetcher, pair.item, property)?;
    let record = store.get(pair.item).expect("item inserted first");
    let quads: Vec<_> = quads_by_property(record.qualified_claims())
        .into_iter()
        .filter(|q| q.property == property)
        .collect();
    let results = map_item_page(&quads, &doc.sentences, &store, &options.matching)?;
    let mut records = Vec::new();
    let mut corpus = Vec::new();
    for (index, result) in &results {
        let ls = label_sentence(result, &store, options.labeling)?;
        records.push(ScanRecord::from_result(property, pair, *index, result, &ls));
        corpus.push(CorpusEntry {
            item: pair.item,
            page_title: pair.page_title.clone(),
            sentence_index: *index,
            sentence: ls,
        });
    }
    Ok((records, corpus))
}

fn done_key(pair: &PagePair) -> String {
    format!("{}\t{}", pair.item, pair.page_title)
}

/// Keeps only rows of earlier runs whose pair finished, so an interrupted
/// batch is redone cleanly.
fn truncate_to_done(out: &Path, corpus: &Path, done: &BTreeSet<String>) -> Result<()> {
    if out.exists() {
        let kept: Vec<ScanRecord> = read_records(out)?
            .into_iter()
            .filter(|r| done.contains(&done_key(&r.pair)))
            .collect();
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(OUTPUT_HEADER)?;
        for r in &kept {
            w.write_record(r.to_row())?;
        }
        w.flush().map_err(|e| Error::io(out, e))?;
    }
    if corpus.exists() {
        let kept: Vec<CorpusEntry> = read_corpus(corpus)?
            .into_iter()
            .filter(|c| {
                done.contains(&done_key(&PagePair {
                    item: c.item,
                    page_title: c.page_title.clone(),
                }))
            })
            .collect();
        let mut w = BufWriter::new(File::create(corpus).map_err(|e| Error::io(corpus, e))?);
        for c in &kept {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n").map_err(|e| Error::io(corpus, e))?;
        }
        w.flush().map_err(|e| Error::io(corpus, e))?;
    }
    Ok(())
}

fn append(path: &Path) -> Result<File> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))
}

/// Scans every pair and appends matches to `out`, with a `.corpus.jsonl`
/// sidecar holding the labeled tokens and a `.done` list of finished pairs.
/// Pairs already listed in `.done` are skipped. Pairs that fail are logged
/// and skipped; they are not marked done, so a later run retries them.
pub fn scan_property(
    property: EntityId,
    pairs: &[PagePair],
    fetcher: &Fetcher,
    annotations: &AnnotationIndex,
    out: &Path,
    options: &ScanOptions,
) -> Result<ScanSummary> {
    property.expect_property()?;
    let (corpus_path, done_path) = sidecar_paths(out);
    let done: BTreeSet<String> = match fs::read_to_string(&done_path) {
        Ok(text) => text.lines().map(str::to_string).collect(),
        Err(_) => BTreeSet::new(),
    };
    if done.is_empty() {
        for p in [out, corpus_path.as_path()] {
            if p.exists() {
                fs::remove_file(p).map_err(|e| Error::io(p, e))?;
            }
        }
    } else {
        truncate_to_done(out, &corpus_path, &done)?;
    }
    if !out.exists() {
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(OUTPUT_HEADER)?;
        w.flush().map_err(|e| Error::io(out, e))?;
    }
    let pending: Vec<&PagePair> = pairs.iter().filter(|p| !done.contains(&done_key(p))).collect();
    let mut summary = ScanSummary {
        pairs: pairs.len(),
        resumed: pairs.len() - pending.len(),
        ..ScanSummary::default()
    };
    for chunk in pending.chunks(options.batch.max(1)) {
        let outputs: Vec<Result<PairOutput>> = chunk
            .par_iter()
            .map(|pair| scan_pair(property, pair, fetcher, annotations, options))
            .collect();
        let mut csv_out = csv::Writer::from_writer(append(out)?);
        let mut corpus_out = BufWriter::new(append(&corpus_path)?);
        let mut done_out = append(&done_path)?;
        for (pair, output) in chunk.iter().zip(outputs) {
            match output {
                Ok((records, corpus)) => {
                    for r in &records {
                        csv_out.write_record(r.to_row())?;
                    }
                    for c in &corpus {
                        serde_json::to_writer(&mut corpus_out, c)?;
                        corpus_out.write_all(b"\n").map_err(|e| Error::io(&corpus_path, e))?;
                    }
                    summary.records += records.len();
                    csv_out.flush().map_err(|e| Error::io(out, e))?;
                    corpus_out.flush().map_err(|e| Error::io(&corpus_path, e))?;
                    writeln!(done_out, "{}", done_key(pair)).map_err(|e| Error::io(&done_path, e))?;
                }
                Err(e) => {
                    log::warn!("{} {:?}: {e}", pair.item, pair.page_title);
                    summary.failed += 1;
                }
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scan")
    }

    #[test]
    fn page_list_shapes() {
        let two = "item,title\nhttp://www.wikidata.org/entity/Q1,A\nQ2,B\nQ1,A\n";
        let pairs = read_page_list(two.as_bytes()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].item, EntityId::item(1));
        let six = "item,title,object,property,value,sitelink\n\
                   http://www.wikidata.org/entity/Q7,Ada,s1,Q9,2000,https://en.wikipedia.org/wiki/Ada\n";
        assert_eq!(read_page_list(six.as_bytes()).unwrap()[0].page_title, "Ada");
        assert!(read_page_list("Q1,A,x\n".as_bytes()).is_err());
    }

    #[test]
    fn neighbourhood_has_labels() {
        let f = Fetcher::offline(fixtures());
        let store = neighbourhood(&f, EntityId::item(1372810), EntityId::property(54)).unwrap();
        for id in [
            "Q1893",
            "Q1584",
            "Q476028",
            "P118",
            "P31",
            "Q6581097",
            "Q18067255",
            "P580",
            "Q3622633",
        ] {
            assert!(store.contains(id.parse().unwrap()), "{id}");
        }
    }

    #[test]
    fn two_pairs_one_record() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("output_P54.csv");
        let f = Fetcher::offline(fixtures());
        let ann = AnnotationIndex::load(fixtures().join("annotations.jsonl")).unwrap();
        let pairs = load_page_list(fixtures().join("P54.csv")).unwrap();
        assert_eq!(pairs.len(), 2);
        let s = scan_property(EntityId::property(54), &pairs, &f, &ann, &out, &ScanOptions::default()).unwrap();
        assert_eq!(s.records, 1);
        let recs = read_records(&out).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].sentence_index, 1);
        assert_eq!(recs[0].ms, [("Q1372810".to_string(), "He".to_string())]);
        assert_eq!(recs[0].mo, [("Q1893".to_string(), "Bologna".to_string())]);
        assert_eq!(recs[0].mq, [("P580".to_string(), "July 2011".to_string())]);
        let corpus = read_corpus(sidecar_paths(&out).0).unwrap();
        assert_eq!(corpus[0].sentence.labeled, recs[0].labeled);
    }

    #[test]
    fn rerun_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o.csv");
        let f = Fetcher::offline(fixtures());
        let ann = AnnotationIndex::load(fixtures().join("annotations.jsonl")).unwrap();
        let pairs = load_page_list(fixtures().join("P54.csv")).unwrap();
        let opts = ScanOptions::default();
        scan_property(EntityId::property(54), &pairs[..1], &f, &ann, &out, &opts).unwrap();
        // A stray row from an interrupted batch is dropped on resume.
        let mut w = csv::Writer::from_writer(append(&out).unwrap());
        let mut stray = read_records(&out).unwrap()[0].clone();
        stray.pair.page_title = "Marco Bianchi".into();
        stray.pair.item = EntityId::item(3847365);
        w.write_record(stray.to_row()).unwrap();
        w.flush().unwrap();
        drop(w);
        let s = scan_property(EntityId::property(54), &pairs, &f, &ann, &out, &opts).unwrap();
        assert_eq!(s.resumed, 1);
        let resumed = fs::read(&out).unwrap();
        let fresh_out = dir.path().join("fresh.csv");
        scan_property(EntityId::property(54), &pairs, &f, &ann, &fresh_out, &opts).unwrap();
        assert_eq!(resumed, fs::read(&fresh_out).unwrap());
    }

    #[test]
    fn missing_everything_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("none.csv");
        let f = Fetcher::offline(dir.path());
        let pairs = vec![PagePair {
            item: EntityId::item(1),
            page_title: "Nothing".into(),
        }];
        let s = scan_property(
            EntityId::property(54),
            &pairs,
            &f,
            &AnnotationIndex::default(),
            &out,
            &ScanOptions::default(),
        )
        .unwrap();
        assert_eq!((s.records, s.failed), (0, 1));
        assert_eq!(read_records(&out).unwrap().len(), 0);
    }
}
