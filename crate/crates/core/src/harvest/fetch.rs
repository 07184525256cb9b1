//! Entity and page retrieval through an on-disk cache.
//!
//! Cached payloads are served without touching the network. Misses go to the
//! configured client unless the fetcher is offline.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use super::text::page_sentences;
use crate::error::{Error, Result};
use crate::ids::EntityId;

pub const WIKIDATA_API: &str = "https://www.wikidata.org/w/api.php";
pub const WIKIPEDIA_API: &str = "https://en.wikipedia.org/w/api.php";
pub const QUERY_SERVICE: &str = "https://query.wikidata.org/sparql";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal blocking GET. Transport failures are reported as `Err` with a
/// description; HTTP error statuses come back as responses.
pub trait HttpGet: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String>;
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub wikidata_api: String,
    pub wikipedia_api: String,
    pub min_delay: Duration,
    pub attempts: u32,
    pub backoff: Duration,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            wikidata_api: WIKIDATA_API.into(),
            wikipedia_api: WIKIPEDIA_API.into(),
            min_delay: Duration::from_millis(200),
            attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

pub struct Fetcher {
    cache: PathBuf,
    client: Option<Box<dyn HttpGet>>,
    config: FetchConfig,
    last: Mutex<Option<Instant>>,
}

/// File name for a page title: spaces become underscores, anything outside
/// a safe set is percent-encoded.
pub fn page_key(title: &str) -> String {
    let underscored = title.trim().replace(' ', "_");
    url::form_urlencoded::byte_serialize(underscored.as_bytes())
        .collect::<String>()
        .replace("%2C", ",")
        .replace("%28", "(")
        .replace("%29", ")")
}

impl Fetcher {
    /// Cache-only fetcher; every miss is an error.
    pub fn offline(cache: impl Into<PathBuf>) -> Self {
        Fetcher {
            cache: cache.into(),
            client: None,
            config: FetchConfig::default(),
            last: Mutex::new(None),
        }
    }

    pub fn online(cache: impl Into<PathBuf>, client: Box<dyn HttpGet>, config: FetchConfig) -> Self {
        Fetcher {
            cache: cache.into(),
            client: Some(client),
            config,
            last: Mutex::new(None),
        }
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache
    }

    pub fn is_offline(&self) -> bool {
        self.client.is_none()
    }

    fn entity_path(&self, id: EntityId) -> PathBuf {
        self.cache.join("entities").join(format!("{id}.json"))
    }

    fn page_path(&self, title: &str) -> PathBuf {
        self.cache.join("pages").join(format!("{}.json", page_key(title)))
    }

    /// Raw entity JSON.
    pub fn fetch_entity(&self, id: EntityId) -> Result<String> {
        let params = url::form_urlencoded::Serializer::new(String::new())
            .append_pair("action", "wbgetentities")
            .append_pair("ids", &id.to_string())
            .append_pair("languages", "en")
            .append_pair("format", "json")
            .finish();
        let url = format!("{}?{params}", self.config.wikidata_api);
        let body = self.cached(&self.entity_path(id), &id.to_string(), &url)?;
        // The API reports unknown ids inside a 200 response.
        let doc: serde_json::Value = serde_json::from_str(&body)?;
        let entity = doc.pointer(&format!("/entities/{id}")).unwrap_or(&doc);
        if entity.get("missing").is_some() {
            return Err(Error::Missing { key: id.to_string() });
        }
        Ok(body)
    }

    /// Rendered page as returned by the parse API.
    pub fn fetch_page_html(&self, title: &str) -> Result<String> {
        let params = url::form_urlencoded::Serializer::new(String::new())
            .append_pair("action", "parse")
            .append_pair("page", title)
            .append_pair("prop", "text")
            .append_pair("format", "json")
            .append_pair("formatversion", "2")
            .finish();
        let url = format!("{}?{params}", self.config.wikipedia_api);
        let body = self.cached(&self.page_path(title), title, &url)?;
        let doc: serde_json::Value = serde_json::from_str(&body)?;
        if doc.pointer("/error/code").and_then(|c| c.as_str()) == Some("missingtitle") {
            return Err(Error::Missing { key: title.into() });
        }
        doc.pointer("/parse/text")
            .and_then(|t| t.as_str().or_else(|| t.get("*").and_then(|x| x.as_str())))
            .map(str::to_string)
            .ok_or_else(|| Error::Payload {
                path: "parse.text".into(),
                detail: format!("no page text for {title:?}"),
            })
    }

    /// Plain-text sentences of a page.
    pub fn fetch_page(&self, title: &str) -> Result<Vec<String>> {
        Ok(page_sentences(&self.fetch_page_html(title)?))
    }

    fn cached(&self, path: &Path, key: &str, url: &str) -> Result<String> {
        if path.exists() {
            return fs::read_to_string(path).map_err(|e| Error::io(path, e));
        }
        let Some(client) = &self.client else {
            return Err(Error::Fetch {
                key: key.into(),
                detail: format!("not in cache {} and network disabled", self.cache.display()),
            });
        };
        let body = self.get_with_retry(client.as_ref(), key, url)?;
        write_atomic(path, &body)?;
        Ok(body)
    }

    fn throttle(&self) {
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(at) = *last {
            let since = at.elapsed();
            if since < self.config.min_delay {
                thread::sleep(self.config.min_delay - since);
            }
        }
        *last = Some(Instant::now());
    }

    fn get_with_retry(&self, client: &dyn HttpGet, key: &str, url: &str) -> Result<String> {
        let mut detail = String::new();
        for attempt in 0..self.config.attempts.max(1) {
            if attempt > 0 {
                thread::sleep(self.config.backoff * 2u32.pow(attempt - 1));
            }
            self.throttle();
            log::debug!("GET {url}");
            match client.get(url) {
                Ok(r) if r.status == 200 => return Ok(r.body),
                Ok(r) if r.status == 404 => return Err(Error::Missing { key: key.into() }),
                Ok(r) => detail = format!("HTTP {}", r.status),
                Err(e) => detail = e,
            }
            log::warn!("{key}: attempt {} failed: {detail}", attempt + 1);
        }
        Err(Error::Fetch {
            key: key.into(),
            detail,
        })
    }

    /// GET through the throttle and retry policy, bypassing the cache.
    pub fn get_uncached(&self, key: &str, url: &str) -> Result<String> {
        let Some(client) = &self.client else {
            return Err(Error::Fetch {
                key: key.into(),
                detail: "network disabled".into(),
            });
        };
        self.get_with_retry(client.as_ref(), key, url)
    }
}

/// Writes through a temporary sibling so readers never see partial files.
fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Replays canned responses and counts calls.
    struct Recorded {
        responses: Mutex<VecDeque<std::result::Result<HttpResponse, String>>>,
        calls: Arc<AtomicUsize>,
    }

    impl HttpGet for Recorded {
        fn get(&self, _url: &str) -> std::result::Result<HttpResponse, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.responses
                .lock()
                .unwrap()
                .pop_front()
                .unwrap_or(Err("exhausted".into()))
        }
    }

    fn fast() -> FetchConfig {
        FetchConfig {
            min_delay: Duration::ZERO,
            backoff: Duration::ZERO,
            ..FetchConfig::default()
        }
    }

    fn recorded(responses: Vec<std::result::Result<HttpResponse, String>>) -> (Box<dyn HttpGet>, Arc<AtomicUsize>) {
        let calls = Arc::new(AtomicUsize::new(0));
        (
            Box::new(Recorded {
                responses: Mutex::new(responses.into()),
                calls: calls.clone(),
            }),
            calls,
        )
    }

    fn ok(body: &str) -> std::result::Result<HttpResponse, String> {
        Ok(HttpResponse {
            status: 200,
            body: body.into(),
        })
    }

    #[test]
    fn cache_hit_without_network() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/scan");
        let f = Fetcher::offline(dir);
        let body = f.fetch_entity(EntityId::item(1372810)).unwrap();
        assert!(body.contains("Simone Loria"));
        let sentences = f.fetch_page("Simone Loria").unwrap();
        assert_eq!(sentences[1], "He moved to the Serie A club Bologna in July 2011.");
    }

    #[test]
    fn offline_miss_names_key() {
        let dir = tempfile::tempdir().unwrap();
        let err = Fetcher::offline(dir.path())
            .fetch_entity(EntityId::item(42))
            .unwrap_err();
        assert!(err.is_retriable());
        assert!(err.to_string().contains("Q42"));
    }

    #[test]
    fn live_fetch_caches() {
        let dir = tempfile::tempdir().unwrap();
        let payload = r#"{"entities":{"Q42":{"id":"Q42","claims":{}}}}"#;
        let (client, calls) = recorded(vec![ok(payload)]);
        let f = Fetcher::online(dir.path(), client, fast());
        let first = f.fetch_entity(EntityId::item(42)).unwrap();
        let second = f.fetch_entity(EntityId::item(42)).unwrap();
        assert_eq!(first.as_bytes(), second.as_bytes());
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert!(dir.path().join("entities/Q42.json").exists());
    }

    #[test]
    fn retries_then_gives_up() {
        let dir = tempfile::tempdir().unwrap();
        let (client, calls) = recorded(vec![
            Err("reset".into()),
            Ok(HttpResponse {
                status: 503,
                body: String::new(),
            }),
            ok(r#"{"entities":{"Q1":{"id":"Q1","claims":{}}}}"#),
        ]);
        let f = Fetcher::online(dir.path(), client, fast());
        assert!(f.fetch_entity(EntityId::item(1)).is_ok());
        assert_eq!(calls.load(Ordering::SeqCst), 3);

        let (client, _) = recorded(vec![Err("a".into()), Err("b".into()), Err("c".into())]);
        let f = Fetcher::online(dir.path(), client, fast());
        assert!(f.fetch_entity(EntityId::item(2)).unwrap_err().is_retriable());
    }

    #[test]
    fn not_found_is_permanent() {
        let dir = tempfile::tempdir().unwrap();
        let (client, calls) = recorded(vec![Ok(HttpResponse {
            status: 404,
            body: String::new(),
        })]);
        let f = Fetcher::online(dir.path(), client, fast());
        let err = f.fetch_page("No such page").unwrap_err();
        assert!(matches!(err, Error::Missing { .. }));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn page_keys() {
        assert_eq!(page_key("Simone Loria"), "Simone_Loria");
        assert_eq!(page_key("AC/DC"), "AC%2FDC");
        assert_eq!(page_key("Bologna F.C. 1909"), "Bologna_F.C._1909");
    }
}
