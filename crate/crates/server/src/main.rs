use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand};

use sentisearch_core::crawler::{
    self, CrawlConfig, ExtractConfig, Extractor, Fetcher, FixtureFetcher, SystemClock,
};
use sentisearch_core::eval::{self, Qrels};
use sentisearch_core::index::FieldPolicy;
use sentisearch_core::sentiment;
use sentisearch_core::text::{self, PipelineConfig};
use sentisearch_core::{Corpus, Index, Query, Ranker, RankingParams};
use sentisearch_server::fetch::HttpFetcher;
use sentisearch_server::snapshot::load_lexicon;
use sentisearch_server::{router, AppState, SnapshotPaths};

const DEFAULT_CORPUS: &str = "data/news.jsonl";
const DEFAULT_INDEX: &str = "data/index";

#[derive(Parser)]
#[command(
    name = "sentisearch",
    version,
    about = "Category-aware news search with sentiment scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SnapshotArgs {
    #[arg(long, default_value = DEFAULT_INDEX)]
    index: PathBuf,
    #[arg(long, default_value = DEFAULT_CORPUS)]
    corpus: PathBuf,
    /// Lexicon TSV; the bundled starter lexicon when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl SnapshotArgs {
    fn paths(&self) -> SnapshotPaths {
        SnapshotPaths {
            corpus: self.corpus.clone(),
            index: self.index.clone(),
            lexicon: self.lexicon.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fetch seed pages politely and stage them as corpus JSONL.
    Crawl {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value = DEFAULT_CORPUS)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        interval_ms: u64,
        /// RFC 3339 timestamp to wait for before the first fetch.
        #[arg(long)]
        start: Option<DateTime<Utc>>,
        /// RFC 3339 timestamp after which no fetch starts.
        #[arg(long)]
        end: Option<DateTime<Utc>>,
        /// Read pages from saved HTML files instead of the network.
        #[arg(long)]
        fixture_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        timeout_secs: u64,
    },
    /// Print the normalized tokens of some text, one per line.
    Pipeline {
        #[arg(long)]
        text: String,
        #[arg(long)]
        stem: bool,
    },
    /// Build an index directory from a corpus.
    Index {
        #[arg(long, default_value = DEFAULT_CORPUS)]
        corpus: PathBuf,
        #[arg(long, default_value = DEFAULT_INDEX)]
        out: PathBuf,
        #[arg(long)]
        stem: bool,
        /// Comma-separated fields to index.
        #[arg(long, default_value = "title,article")]
        fields: String,
    },
    /// Run one query.
    Search {
        text: String,
        #[arg(long)]
        category: Option<String>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long, default_value = "bm25")]
        ranker: Ranker,
        #[arg(long, default_value_t = 1.2)]
        k1: f64,
        #[arg(long, default_value_t = 0.75)]
        b: f64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        snapshot: SnapshotArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[command(flatten)]
        snapshot: SnapshotArgs,
    },
    /// Sentiment of one document, or the polarity report of the corpus.
    Sentiment {
        #[arg(long, default_value = DEFAULT_CORPUS)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        id: Option<u64>,
    },
    /// Documents most similar to a given one.
    Related {
        #[arg(long)]
        id: u64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = DEFAULT_INDEX)]
        index: PathBuf,
        #[arg(long, default_value = DEFAULT_CORPUS)]
        corpus: PathBuf,
    },
    /// Precision and recall of a run against relevance judgments.
    Eval {
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long)]
        run: PathBuf,
        /// Second run to compare against the first.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match Cli::parse().command {
        Command::Crawl {
            seeds,
            out,
            interval_ms,
            start,
            end,
            fixture_dir,
            timeout_secs,
        } => {
            let seed_text = fs::read_to_string(&seeds)
                .with_context(|| format!("reading {}", seeds.display()))?;
            let mut config = CrawlConfig::new(
                crawler::parse_seeds(&seed_text),
                Duration::from_millis(interval_ms),
                out,
            );
            config.start_time = start;
            config.end_time = end;
            match fixture_dir {
                Some(dir) => crawl(&config, FixtureFetcher::new(dir)),
                None => crawl(
                    &config,
                    HttpFetcher::new(Duration::from_secs(timeout_secs))?,
                ),
            }
        }
        Command::Pipeline { text: input, stem } => {
            let config = PipelineConfig::default().with_stemming(stem);
            for token in text::analyze(&input, &config) {
                println!("{token}");
            }
            Ok(())
        }
        Command::Index {
            corpus,
            out,
            stem,
            fields,
        } => {
            let fields = FieldPolicy::parse(&fields)?;
            let corpus = Corpus::load(&corpus)?;
            let index = Index::build(
                &corpus,
                &PipelineConfig::default().with_stemming(stem),
                &fields,
            );
            index.save(&out)?;
            let stats = index.stats();
            tracing::info!(
                n_docs = stats.n_docs,
                n_terms = stats.n_terms,
                skipped = corpus.len() - stats.n_docs,
                "index written to {}",
                out.display()
            );
            Ok(())
        }
        Command::Search {
            text,
            category,
            top,
            ranker,
            k1,
            b,
            json,
            snapshot,
        } => {
            let engine = snapshot.paths().load()?;
            let mut query = Query::new(text)
                .limit(top)
                .ranker(ranker)
                .params(RankingParams::new(k1, b)?);
            if let Some(c) = category {
                query = query.category(c);
            }
            let resp = engine.search(&query)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&resp)?);
                return Ok(());
            }
            if resp.category_unknown {
                eprintln!(
                    "unknown category; known: {}",
                    engine.corpus().labels().collect::<Vec<_>>().join(", ")
                );
            }
            for (raw, used) in resp
                .results
                .first()
                .map(|r| &r.fuzzy_substitutions)
                .into_iter()
                .flatten()
            {
                println!("showing results for {used:?} instead of {raw:?}");
            }
            for (rank, r) in resp.results.iter().enumerate() {
                println!(
                    "{:>3}  {:>6}  {:>8.4}  {:<8} {:+.3}  [{}] {}",
                    rank + 1,
                    r.id,
                    r.score,
                    r.sentiment.class,
                    r.sentiment.polarity,
                    r.label,
                    r.title
                );
            }
            println!(
                "{} of {} candidates",
                resp.results.len(),
                resp.total_candidates
            );
            Ok(())
        }
        Command::Serve {
            port,
            host,
            snapshot,
        } => {
            let paths = snapshot.paths();
            let engine = paths.load()?;
            tracing::info!(n_docs = engine.index().stats().n_docs, "snapshot loaded");
            let app = router(AppState::new(engine, Some(paths)));
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let addr = SocketAddr::new(host, port);
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                tracing::info!("listening on http://{addr}");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })
        }
        Command::Sentiment {
            corpus,
            lexicon,
            id,
        } => {
            let corpus = Corpus::load(&corpus)?;
            let lexicon = load_lexicon(lexicon.as_ref())?;
            let out = match id {
                Some(id) => {
                    let Some(doc) = corpus.get(id) else {
                        bail!("no document with id {id}")
                    };
                    serde_json::to_string_pretty(&sentiment::score_document(doc, &lexicon))?
                }
                None => serde_json::to_string_pretty(&sentiment::corpus_polarity_report(
                    &corpus, &lexicon,
                ))?,
            };
            println!("{out}");
            Ok(())
        }
        Command::Related {
            id,
            k,
            index,
            corpus,
        } => {
            let index = Index::load(&index)?;
            let corpus = Corpus::load(&corpus)?;
            for r in sentisearch_core::similarity::related(id, k, &index)? {
                let title = corpus.get(r.doc_id).map_or("", |d| d.title.as_str());
                println!("{:>6}  {:.4}  {title}", r.doc_id, r.similarity);
            }
            Ok(())
        }
        Command::Eval {
            qrels,
            queries,
            run,
            compare,
            json,
        } => {
            let qrels = Qrels::load(&qrels, queries.as_deref())?;
            let run_a = eval::load_run(&run)?;
            match compare {
                Some(other) => {
                    let cmp = eval::compare_runs(&qrels, &run_a, &eval::load_run(&other)?)?;
                    print_report(json, &cmp, || cmp.render_table())
                }
                None => {
                    let report = eval::evaluate_run(&qrels, &run_a)?;
                    print_report(json, &report, || report.render_table())
                }
            }
        }
    }
}

fn print_report<T: serde::Serialize>(
    json: bool,
    value: &T,
    table: impl FnOnce() -> String,
) -> anyhow::Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", table());
    }
    Ok(())
}

fn crawl<F: Fetcher>(config: &CrawlConfig, fetcher: F) -> anyhow::Result<()> {
    let extractor = Extractor::new(&ExtractConfig::default())?;
    let clock = SystemClock;
    let mut pages = crawler::fetch_all(config, fetcher, &clock)?;
    let mut candidates = Vec::new();
    for page in pages.by_ref() {
        match extractor.extract(&page) {
            Ok(c) => candidates.push(c),
            Err(e) => tracing::warn!("skipping {}: {e}", page.url),
        }
    }
    for f in pages.failures() {
        tracing::warn!("fetch failed for {}: {}", f.url, f.error);
    }
    ensure_parent(&config.output_path)?;
    let n = crawler::stage_documents(candidates, &config.output_path)?;
    tracing::info!("staged {n} documents in {}", config.output_path.display());
    Ok(())
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => {
            fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
        }
        _ => Ok(()),
    }
}
