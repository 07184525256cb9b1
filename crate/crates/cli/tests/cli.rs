use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn quadmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadmap"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = quadmap(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn scan_into(dir: &Path) -> PathBuf {
    let scan = fixtures().join("scan");
    let out = dir.join("output_P54.csv");
    ok(&[
        "--offline",
        "scan",
        "P54",
        "--pages",
        scan.join("P54.csv").to_str().unwrap(),
        "--fixtures",
        scan.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    out
}

#[test]
fn census_prints_query() {
    let q = ok(&["census", "P26"]);
    assert!(q.contains("?item p:P26 ?statement ."));
    assert!(q.trim_end().ends_with("ORDER BY DESC(?count) ASC(?qualLabel)"));
}

#[test]
fn pagelist_prints_query() {
    let q = ok(&["pagelist", "P26", "--qualifiers", "P580,P582", "--limit", "10"]);
    assert!(q.contains("pq:P580|pq:P582 ?value."));
    assert!(q.trim_end().ends_with("LIMIT 10"));
}

#[test]
fn offline_forbids_running_queries() {
    let out = quadmap(&["--offline", "census", "P26", "--run"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("offline"));
}

#[test]
fn bad_property_is_rejected() {
    assert!(!quadmap(&["census", "Q26"]).status.success());
}

#[test]
fn scan_twice_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = fs::read(scan_into(a.path())).unwrap();
    let second = fs::read(scan_into(b.path())).unwrap();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("Simone Loria"));
}

#[test]
fn sentences_from_cache() {
    let scan = fixtures().join("scan");
    let text = ok(&[
        "--offline",
        "sentences",
        "Simone Loria",
        "--fixtures",
        scan.to_str().unwrap(),
    ]);
    assert!(text.lines().any(|l| l.contains("Bologna")));
    let out = quadmap(&[
        "--offline",
        "sentences",
        "No Such Page",
        "--fixtures",
        scan.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn label_stats_and_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let out = scan_into(dir.path());
    let corpus = dir.path().join("output_P54.corpus.jsonl");
    let corpus = corpus.to_str().unwrap();

    let labeled = ok(&["label", "--corpus", corpus, "--boundaries"]);
    assert!(labeled.contains("[start] [s] moved"));

    let stats = ok(&["stats", "--corpus", corpus]);
    assert!(stats.starts_with("sentences\t1\n"));
    assert!(stats.contains("mean_tokens\t12.0000"));

    let global = fixtures().join("vectors/global.vec");
    let ranked = ok(&[
        "rank-predicates",
        "--corpus",
        corpus,
        "--global",
        global.to_str().unwrap(),
        "--property",
        "P54",
        "--dim",
        "4",
    ]);
    let mut lines = ranked.lines();
    assert_eq!(lines.next(), Some("property,predicate,score"));
    assert_eq!(lines.next(), Some("P54,moved,1.000000"));
    assert!(out.exists());
}

#[test]
fn filter_noise_appends_mask() {
    let dir = tempfile::tempdir().unwrap();
    let out = scan_into(dir.path());
    // Five copies of the one matched sentence.
    let csv = fs::read_to_string(&out).unwrap();
    let (header, row) = csv.split_once('\n').unwrap();
    let corpus = fs::read_to_string(dir.path().join("output_P54.corpus.jsonl")).unwrap();
    let input = dir.path().join("in.csv");
    let jsonl = dir.path().join("in.jsonl");
    fs::write(&input, format!("{header}\n{}", row.repeat(5))).unwrap();
    fs::write(&jsonl, corpus.repeat(5)).unwrap();
    let result = dir.path().join("filtered.csv");
    let projection = dir.path().join("projection.csv");
    let global = fixtures().join("vectors/global.vec");
    ok(&[
        "filter-noise",
        "--corpus",
        jsonl.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--global",
        global.to_str().unwrap(),
        "--dim",
        "4",
        "--out",
        result.to_str().unwrap(),
        "--projection",
        projection.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&result).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with(",noise_mask"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.ends_with(",false")));
    assert_eq!(fs::read_to_string(&projection).unwrap().lines().count(), 6);

    // Mismatched corpus and output are refused.
    fs::write(&jsonl, corpus.repeat(4)).unwrap();
    let bad = quadmap(&[
        "filter-noise",
        "--corpus",
        jsonl.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--global",
        global.to_str().unwrap(),
        "--out",
        result.to_str().unwrap(),
    ]);
    assert!(!bad.status.success());
}
