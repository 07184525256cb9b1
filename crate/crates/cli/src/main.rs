use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use quadmap::embeddings::train_local;
use quadmap::eval::cluster::{cluster_and_filter, Algorithm, Method};
use quadmap::eval::distance::{feature_vectors, FeatureOptions, ProductForm, VectorLayout};
use quadmap::eval::relevance::{predicate_relevance, qualifier_relevance, RankedPredicate};
use quadmap::eval::stats::{corpus_stats, token_count};
use quadmap::harvest::fetch::{HttpGet, HttpResponse, QUERY_SERVICE, WIKIDATA_API, WIKIPEDIA_API};
use quadmap::harvest::scan::{read_corpus, read_records, OUTPUT_HEADER};
use quadmap::harvest::sparql::{parse_bindings, query_url};
use quadmap::harvest::{
    entity_record, load_page_list, page_list_query, qualifier_census_query, scan_property, AnnotationIndex,
    FetchConfig, Fetcher, ScanOptions,
};
use quadmap::labeler::{LabelOptions, LabeledSentence};
use quadmap::matcher::MatchOptions;
use quadmap::store::EntityStore;
use quadmap::surface::{definition_terms, DefinitionDictionary};
use quadmap::{EntityId, VectorModelF64};

#[derive(Parser)]
#[command(
    name = "quadmap",
    version,
    about = "Map Wikidata qualified statements onto Wikipedia sentences"
)]
struct Cli {
    /// Never touch the network; cache misses are errors.
    #[arg(long, global = true)]
    offline: bool,
    #[arg(long, global = true, env = "QUADMAP_WIKIDATA_API", default_value = WIKIDATA_API)]
    wikidata_api: String,
    #[arg(long, global = true, env = "QUADMAP_WIKIPEDIA_API", default_value = WIKIPEDIA_API)]
    wikipedia_api: String,
    #[arg(long, global = true, env = "QUADMAP_SPARQL_ENDPOINT", default_value = QUERY_SERVICE)]
    sparql_endpoint: String,
    /// Minimum delay between requests, in milliseconds.
    #[arg(long, global = true, default_value_t = 200)]
    delay_ms: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Qualifier census query for a property; `--run` sends it.
    Census {
        property: EntityId,
        #[arg(long)]
        run: bool,
    },
    /// Page-list query for a property and qualifiers; `--run` sends it and
    /// writes the six-column CSV.
    Pagelist {
        property: EntityId,
        #[arg(long, value_delimiter = ',', required = true)]
        qualifiers: Vec<EntityId>,
        #[arg(long, default_value_t = 50000)]
        limit: usize,
        #[arg(long)]
        run: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan (item, page) pairs and write the labeled corpus.
    Scan(ScanArgs),
    /// Sentences of a page, one per line.
    Sentences {
        title: String,
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Re-render a corpus with the optional label passes.
    Label {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        normalize_determiners: bool,
        #[arg(long)]
        boundaries: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        /// Only sentences whose single redundant word is the root.
        #[arg(long)]
        candidates_only: bool,
        /// Per-sentence token counts, for a histogram.
        #[arg(long)]
        per_sentence: Option<PathBuf>,
    },
    /// Cluster feature vectors and mark noisy sentences.
    FilterNoise(FilterArgs),
    /// Rank root predicates against a property.
    RankPredicates(RankArgs),
}

#[derive(Args)]
struct ScanArgs {
    property: EntityId,
    #[arg(long)]
    pages: PathBuf,
    /// Cache directory holding `entities/` and `pages/`.
    #[arg(long)]
    fixtures: PathBuf,
    /// Annotation JSON Lines; defaults to `annotations.jsonl` in the cache.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_extra: bool,
    #[arg(long)]
    no_dependency_phrases: bool,
    #[arg(long)]
    prefer_dependency_phrases: bool,
    #[arg(long)]
    normalize_determiners: bool,
    #[arg(long)]
    boundaries: bool,
    #[arg(long, default_value_t = 16)]
    batch: usize,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Local vector file; trained from the corpus when absent.
    #[arg(long)]
    local: Option<PathBuf>,
    #[arg(long)]
    global: PathBuf,
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cm1,
    Cm2,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Kmeans,
    Dbscan,
    NearestNeighbors,
    Lof,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    TfIdf,
    IdfIdf,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    models: ModelArgs,
    /// Scan output CSV the corpus belongs to.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cm1")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "dbscan")]
    algo: AlgoArg,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 4)]
    min_samples: usize,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 0.95)]
    quantile: f64,
    #[arg(long, default_value_t = 3.0)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "tf-idf")]
    layout: LayoutArg,
    /// Product distance without the +1 inside the logarithm.
    #[arg(long)]
    raw_product: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    projection: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long)]
    property: EntityId,
    /// Definition terms TSV; the bundled one otherwise.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Cache directory used when the property is not in the dictionary.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// One ranking per qualifier.
    #[arg(long)]
    by_qualifier: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct UreqClient {
    agent: ureq::Agent,
}

impl UreqClient {
    fn new() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .user_agent(concat!("quadmap/", env!("CARGO_PKG_VERSION")))
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        UreqClient { agent }
    }
}

impl HttpGet for UreqClient {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String> {
        let mut resp = self
            .agent
            .get(url)
            .header("Accept", "application/json")
            .call()
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

fn fetcher(cli: &Cli, cache: &Path) -> Fetcher {
    if cli.offline {
        return Fetcher::offline(cache);
    }
    let config = FetchConfig {
        wikidata_api: cli.wikidata_api.clone(),
        wikipedia_api: cli.wikipedia_api.clone(),
        min_delay: Duration::from_millis(cli.delay_ms),
        ..FetchConfig::default()
    };
    Fetcher::online(cache, Box::new(UreqClient::new()), config)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_query(cli: &Cli, query: &str) -> Result<Vec<quadmap::harvest::sparql::Binding>> {
    ensure!(!cli.offline, "--run needs the network; drop --offline");
    // Query results are never cached, so any directory will do.
    let f = fetcher(cli, &std::env::temp_dir());
    let body = f.get_uncached("sparql", &query_url(&cli.sparql_endpoint, query))?;
    Ok(parse_bindings(&body)?)
}

fn load_corpus(path: &Path) -> Result<Vec<LabeledSentence>> {
    Ok(read_corpus(path)
        .with_context(|| format!("reading corpus {}", path.display()))?
        .into_iter()
        .map(|e| e.sentence)
        .collect())
}

fn models(args: &ModelArgs, corpus: &[LabeledSentence]) -> Result<(VectorModelF64, VectorModelF64)> {
    let local = match &args.local {
        Some(p) => VectorModelF64::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => {
            let texts: Vec<&str> = corpus.iter().map(|ls| ls.labeled.as_str()).collect();
            train_local(&texts, args.dim, args.window)?
        }
    };
    let global = VectorModelF64::load(&args.global).with_context(|| format!("loading {}", args.global.display()))?;
    Ok((local, global))
}

fn census(cli: &Cli, property: EntityId, run: bool) -> Result<()> {
    let query = qualifier_census_query(property)?;
    if !run {
        print!("{query}");
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["qualifier", "label", "count"])?;
    for row in run_query(cli, &query)? {
        let qual = row
            .get("qual")
            .map(|u| u.rsplit('/').next().unwrap_or(u))
            .unwrap_or_default();
        w.write_record([
            qual,
            row.get("qualLabel").map_or("", String::as_str),
            row.get("count").map_or("", String::as_str),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn pagelist(
    cli: &Cli,
    property: EntityId,
    qualifiers: &[EntityId],
    limit: usize,
    run: bool,
    out: Option<&Path>,
) -> Result<()> {
    let query = page_list_query(property, qualifiers, limit)?;
    if !run {
        write!(output(out)?, "{query}")?;
        return Ok(());
    }
    let cols = ["item", "title", "object", "property", "value", "sitelink"];
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(cols)?;
    for row in run_query(cli, &query)? {
        w.write_record(cols.map(|c| row.get(c).map_or("", String::as_str)))?;
    }
    w.flush()?;
    Ok(())
}

fn scan(cli: &Cli, args: &ScanArgs) -> Result<()> {
    let pairs = load_page_list(&args.pages).with_context(|| format!("reading {}", args.pages.display()))?;
    let ann_path = args
        .annotations
        .clone()
        .unwrap_or_else(|| args.fixtures.join("annotations.jsonl"));
    let annotations = AnnotationIndex::load(&ann_path).with_context(|| format!("reading {}", ann_path.display()))?;
    let options = ScanOptions {
        matching: MatchOptions {
            extra: !args.no_extra,
            dependency_phrases: !args.no_dependency_phrases,
            prefer_dependency_phrases: args.prefer_dependency_phrases,
            predicates: None,
        },
        labeling: LabelOptions {
            boundaries: args.boundaries,
            normalize_determiners: args.normalize_determiners,
        },
        batch: args.batch,
    };
    let f = fetcher(cli, &args.fixtures);
    let summary = scan_property(args.property, &pairs, &f, &annotations, &args.out, &options)?;
    log::info!(
        "{} pairs, {} resumed, {} failed, {} records",
        summary.pairs,
        summary.resumed,
        summary.failed,
        summary.records
    );
    Ok(())
}

fn label(corpus: &Path, options: LabelOptions, out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record([
        "item",
        "page_title",
        "sentence_index",
        "labeled_sentence",
        "redundant_words",
        "is_candidate",
    ])?;
    for entry in read_corpus(corpus)? {
        let ls = entry.sentence.with_options(options);
        let redundant: Vec<&str> = ls.redundant_words.iter().map(|(w, _)| w.as_str()).collect();
        w.write_record([
            entry.item.to_string(),
            entry.page_title,
            entry.sentence_index.to_string(),
            ls.labeled.clone(),
            redundant.join(" "),
            ls.is_candidate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn stats(corpus: &Path, candidates_only: bool, per_sentence: Option<&Path>) -> Result<()> {
    let mut sentences = load_corpus(corpus)?;
    if candidates_only {
        sentences.retain(|ls| ls.is_candidate);
    }
    // Each corpus sentence realises one quad.
    let s = corpus_stats::<f64>(&sentences, sentences.len())?;
    println!("sentences\t{}", sentences.len());
    println!("mean_chars\t{:.4}", s.feature1);
    println!("mean_words\t{:.4}", s.feature2);
    println!("mean_tokens\t{:.4}", s.feature3);
    println!("tokens_per_quad\t{:.4}", s.feature4);
    println!("tokens_per_quad_item\t{:.4}", s.feature5);
    if let Some(p) = per_sentence {
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(["sentence", "tokens"])?;
        for (i, ls) in sentences.iter().enumerate() {
            w.write_record([i.to_string(), token_count(ls).to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn filter_noise(args: &FilterArgs) -> Result<()> {
    let entries = read_corpus(&args.models.corpus)?;
    let records = read_records(&args.input)?;
    ensure!(
        entries.len() == records.len(),
        "corpus has {} sentences but {} has {} rows",
        entries.len(),
        args.input.display(),
        records.len()
    );
    for (e, r) in entries.iter().zip(&records) {
        ensure!(
            e.item == r.pair.item && e.sentence_index == r.sentence_index,
            "corpus and output rows disagree at {} {}",
            r.pair.item,
            r.sentence_index
        );
    }
    let corpus: Vec<LabeledSentence> = entries.into_iter().map(|e| e.sentence).collect();
    let (local, global) = models(&args.models, &corpus)?;
    let options = FeatureOptions {
        layout: match args.layout {
            LayoutArg::TfIdf => VectorLayout::TfIdf,
            LayoutArg::IdfIdf => VectorLayout::IdfIdf,
        },
        form: if args.raw_product {
            ProductForm::Raw
        } else {
            ProductForm::Clamped
        },
    };
    let vectors: Vec<Vec<f64>> = feature_vectors(&corpus, &local, &global, options)?
        .iter()
        .map(|v| v.to_vec())
        .collect();
    let method = match args.method {
        MethodArg::Cm1 => Method::Cm1,
        MethodArg::Cm2 => Method::Cm2,
    };
    let algo = match args.algo {
        AlgoArg::Kmeans => Algorithm::kmeans(),
        AlgoArg::Dbscan => Algorithm::dbscan(args.eps, args.min_samples),
        AlgoArg::NearestNeighbors => Algorithm::nearest_neighbors(args.k, args.quantile),
        AlgoArg::Lof => Algorithm::lof(args.k, args.threshold),
    };
    let report = cluster_and_filter(&vectors, method, algo, None)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    let mut header: Vec<&str> = OUTPUT_HEADER.to_vec();
    header.push("noise_mask");
    w.write_record(&header)?;
    for (r, noise) in records.iter().zip(&report.noise_mask) {
        let mut row = r.to_row().to_vec();
        row.push(noise.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    if let Some(p) = &args.projection {
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(["item", "sentence_index", "x", "y", "label", "noise"])?;
        for (i, r) in records.iter().enumerate() {
            let [x, y] = report.projection[i];
            w.write_record([
                r.pair.item.to_string(),
                r.sentence_index.to_string(),
                format!("{x:.12}"),
                format!("{y:.12}"),
                report.labels[i].to_string(),
                report.noise_mask[i].to_string(),
            ])?;
        }
        w.flush()?;
    }
    log::info!("noise rate {:.4} over {} sentences", report.noise_rate, records.len());
    Ok(())
}

fn rank_predicates(cli: &Cli, args: &RankArgs) -> Result<()> {
    let corpus = load_corpus(&args.models.corpus)?;
    let (local, global) = models(&args.models, &corpus)?;
    let dictionary = match &args.dictionary {
        Some(p) => DefinitionDictionary::load(p)?,
        None => DefinitionDictionary::bundled(),
    };
    let mut store = EntityStore::new();
    if dictionary.get(args.property).is_none() {
        let Some(cache) = &args.fixtures else {
            bail!(
                "{} has no definition terms; pass --dictionary or --fixtures",
                args.property
            );
        };
        store.insert(entity_record(&fetcher(cli, cache).fetch_entity(args.property)?)?);
    }
    let terms = definition_terms(args.property, &dictionary, &store)?;
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    let score = |r: &RankedPredicate<f64>| format!("{:.6}", r.score);
    if args.by_qualifier {
        w.write_record(["property", "qualifier", "predicate", "score"])?;
        for (q, ranked) in qualifier_relevance(&corpus, &local, &global, &terms) {
            for r in &ranked {
                w.write_record([args.property.to_string(), q.to_string(), r.predicate.clone(), score(r)])?;
            }
        }
    } else {
        w.write_record(["property", "predicate", "score"])?;
        for r in &predicate_relevance(&corpus, &local, &global, &terms) {
            w.write_record([args.property.to_string(), r.predicate.clone(), score(r)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Census { property, run } => census(&cli, *property, *run),
        Command::Pagelist {
            property,
            qualifiers,
            limit,
            run,
            out,
        } => pagelist(&cli, *property, qualifiers, *limit, *run, out.as_deref()),
        Command::Scan(args) => scan(&cli, args),
        Command::Sentences { title, fixtures } => {
            for s in fetcher(&cli, fixtures).fetch_page(title)? {
                println!("{s}");
            }
            Ok(())
        }
        Command::Label {
            corpus,
            normalize_determiners,
            boundaries,
            out,
        } => label(
            corpus,
            LabelOptions {
                boundaries: *boundaries,
                normalize_determiners: *normalize_determiners,
            },
            out.as_deref(),
        ),
        Command::Stats {
            corpus,
            candidates_only,
            per_sentence,
        } => stats(corpus, *candidates_only, per_sentence.as_deref()),
        Command::FilterNoise(args) => filter_noise(args),
        Command::RankPredicates(args) => rank_predicates(&cli, args),
    }
}
