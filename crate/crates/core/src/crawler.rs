//! Polite seed fetcher and news-page extractor.
//!
//! Seeds are fetched strictly one after another; two fetch starts are never
//! closer than `fetch_interval`. A failing URL is recorded and skipped.
//! Fetching and time are injected ([`Fetcher`], [`Clock`]) so crawls can run
//! against fixture files with a simulated clock.

use std::cell::{Cell, RefCell};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, NaiveDate, Utc};
use scraper::{ElementRef, Html, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{write_document, DocId, Document};

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("invalid crawl config: {0}")]
    InvalidConfig(String),
    #[error("{url}: no extractable title")]
    MissingTitle { url: String },
    #[error("invalid selector {0:?}")]
    Selector(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct FetchError(pub String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrawlConfig {
    /// Minimum delay between two fetch starts.
    pub fetch_interval: Duration,
    pub output_path: PathBuf,
    pub start_time: Option<DateTime<Utc>>,
    pub end_time: Option<DateTime<Utc>>,
    pub seeds: Vec<String>,
}

impl CrawlConfig {
    pub fn new(
        seeds: Vec<String>,
        fetch_interval: Duration,
        output_path: impl Into<PathBuf>,
    ) -> Self {
        CrawlConfig {
            fetch_interval,
            output_path: output_path.into(),
            start_time: None,
            end_time: None,
            seeds,
        }
    }

    pub fn validate(&self) -> Result<(), CrawlError> {
        if let (Some(start), Some(end)) = (self.start_time, self.end_time) {
            if start > end {
                return Err(CrawlError::InvalidConfig(format!(
                    "start time {start} is after end time {end}"
                )));
            }
        }
        if self.seeds.iter().any(|s| s.trim().is_empty()) {
            return Err(CrawlError::InvalidConfig("empty seed URL".into()));
        }
        Ok(())
    }
}

/// Reads a seeds file: one URL per line, `#` starts a comment.
pub fn parse_seeds(input: &str) -> Vec<String> {
    input
        .lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPage {
    pub url: String,
    pub html: String,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FetchFailure {
    pub url: String,
    pub error: String,
    pub at: DateTime<Utc>,
}

pub trait Fetcher {
    fn fetch(&self, url: &str) -> Result<String, FetchError>;
}

impl<F: Fetcher + ?Sized> Fetcher for &F {
    fn fetch(&self, url: &str) -> Result<String, FetchError> {
        (**self).fetch(url)
    }
}

pub trait Clock {
    fn now(&self) -> DateTime<Utc>;
    fn sleep(&self, duration: Duration);
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Simulated clock: `sleep` advances time instantly and is logged so tests
/// can inspect the waits.
#[derive(Debug)]
pub struct MockClock {
    now: Cell<DateTime<Utc>>,
    slept: RefCell<Vec<Duration>>,
}

impl MockClock {
    pub fn new(start: DateTime<Utc>) -> MockClock {
        MockClock {
            now: Cell::new(start),
            slept: RefCell::new(Vec::new()),
        }
    }

    pub fn advance(&self, by: Duration) {
        self.now
            .set(self.now.get() + chrono::Duration::from_std(by).expect("duration in range"));
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.slept.borrow().clone()
    }
}

impl Clock for MockClock {
    fn now(&self) -> DateTime<Utc> {
        self.now.get()
    }

    fn sleep(&self, duration: Duration) {
        self.slept.borrow_mut().push(duration);
        self.advance(duration);
    }
}

/// Resolves URLs to HTML files in a directory; see [`FixtureFetcher::path_for`].
#[derive(Clone, Debug)]
pub struct FixtureFetcher {
    dir: PathBuf,
}

impl FixtureFetcher {
    pub fn new(dir: impl Into<PathBuf>) -> FixtureFetcher {
        FixtureFetcher { dir: dir.into() }
    }

    /// `http://news.example/a/b?x=1` maps to `news.example_a_b_x_1.html`: the
    /// scheme is dropped and every character outside `[A-Za-z0-9.-]` becomes
    /// `_`. `file://` URLs are read as-is.
    pub fn path_for(&self, url: &str) -> PathBuf {
        if let Some(path) = url.strip_prefix("file://") {
            return PathBuf::from(path);
        }
        let rest = url.split_once("://").map_or(url, |(_, rest)| rest);
        let mut name: String = rest
            .trim_end_matches('/')
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        if !name.ends_with(".html") {
            name.push_str(".html");
        }
        self.dir.join(name)
    }
}

impl Fetcher for FixtureFetcher {
    fn fetch(&self, url: &str) -> Result<String, FetchError> {
        let path = self.path_for(url);
        fs::read_to_string(&path).map_err(|e| FetchError(format!("{}: {e}", path.display())))
    }
}

/// Iterator over fetched pages, in seed order.
pub struct Crawl<'a, F: Fetcher, C: Clock> {
    config: &'a CrawlConfig,
    fetcher: F,
    clock: &'a C,
    next_seed: usize,
    last_start: Option<DateTime<Utc>>,
    fetch_starts: Vec<DateTime<Utc>>,
    failures: Vec<FetchFailure>,
    done: bool,
}

pub fn fetch_all<'a, F: Fetcher, C: Clock>(
    config: &'a CrawlConfig,
    fetcher: F,
    clock: &'a C,
) -> Result<Crawl<'a, F, C>, CrawlError> {
    config.validate()?;
    Ok(Crawl {
        config,
        fetcher,
        clock,
        next_seed: 0,
        last_start: None,
        fetch_starts: Vec::new(),
        failures: Vec::new(),
        done: false,
    })
}

impl<F: Fetcher, C: Clock> Crawl<'_, F, C> {
    /// Start time of every fetch attempted so far, failed ones included.
    pub fn fetch_starts(&self) -> &[DateTime<Utc>] {
        &self.fetch_starts
    }

    pub fn failures(&self) -> &[FetchFailure] {
        &self.failures
    }

    fn past_end(&self) -> bool {
        self.config
            .end_time
            .is_some_and(|end| self.clock.now() >= end)
    }

    fn wait_for_slot(&self) {
        let mut earliest = self.config.start_time;
        if let Some(last) = self.last_start {
            let interval = chrono::Duration::from_std(self.config.fetch_interval)
                .unwrap_or(chrono::Duration::MAX);
            let next = last
                .checked_add_signed(interval)
                .unwrap_or(DateTime::<Utc>::MAX_UTC);
            earliest = Some(earliest.map_or(next, |e| e.max(next)));
        }
        if let Some(at) = earliest {
            let now = self.clock.now();
            if at > now {
                self.clock.sleep((at - now).to_std().unwrap_or_default());
            }
        }
    }
}

impl<F: Fetcher, C: Clock> Iterator for Crawl<'_, F, C> {
    type Item = RawPage;

    fn next(&mut self) -> Option<RawPage> {
        while !self.done && self.next_seed < self.config.seeds.len() {
            self.wait_for_slot();
            if self.past_end() {
                self.done = true;
                break;
            }
            let url = &self.config.seeds[self.next_seed];
            self.next_seed += 1;
            let started = self.clock.now();
            self.last_start = Some(started);
            self.fetch_starts.push(started);
            match self.fetcher.fetch(url) {
                Ok(html) => {
                    return Some(RawPage {
                        url: url.clone(),
                        html,
                        fetched_at: started,
                    })
                }
                Err(e) => self.failures.push(FetchFailure {
                    url: url.clone(),
                    error: e.to_string(),
                    at: started,
                }),
            }
        }
        None
    }
}

/// A document as extracted from a page, before an id is assigned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentCandidate {
    pub label: String,
    pub url: String,
    pub title: String,
    pub dt: NaiveDate,
    pub article: String,
}

impl DocumentCandidate {
    pub fn into_document(self, id: DocId) -> Document {
        Document {
            id,
            label: self.label,
            url: self.url,
            title: self.title,
            dt: self.dt,
            article: self.article,
        }
    }
}

pub const UNLABELED: &str = "Unlabeled";

/// Where title, label and date are read from. Each list is tried in order;
/// the first selector yielding a non-empty value wins. Values come from the
/// `content` or `datetime` attribute when present, else from element text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractConfig {
    pub title_selectors: Vec<String>,
    pub label_selectors: Vec<String>,
    pub date_selectors: Vec<String>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            title_selectors: vec!["h1".into(), "title".into()],
            label_selectors: vec![
                r#"meta[property="article:section"]"#.into(),
                "[data-label]".into(),
            ],
            date_selectors: vec![
                "time[datetime]".into(),
                r#"meta[property="article:published_time"]"#.into(),
            ],
        }
    }
}

/// Compiled form of [`ExtractConfig`].
pub struct Extractor {
    title: Vec<Selector>,
    label: Vec<Selector>,
    date: Vec<Selector>,
}

fn compile(list: &[String]) -> Result<Vec<Selector>, CrawlError> {
    list.iter()
        .map(|s| Selector::parse(s).map_err(|_| CrawlError::Selector(s.clone())))
        .collect()
}

fn collapse_ws<'a>(pieces: impl Iterator<Item = &'a str>) -> String {
    let joined: String = pieces.collect();
    joined.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn element_value(el: ElementRef<'_>) -> String {
    let attrs = el.value();
    if let Some(v) = attrs
        .attr("content")
        .or(attrs.attr("datetime"))
        .or(attrs.attr("data-label"))
    {
        return collapse_ws(std::iter::once(v));
    }
    collapse_ws(el.text())
}

fn first_value(doc: &Html, selectors: &[Selector]) -> Option<String> {
    selectors
        .iter()
        .find_map(|sel| doc.select(sel).map(element_value).find(|v| !v.is_empty()))
}

fn parse_date(value: &str) -> Option<NaiveDate> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return Some(dt.date_naive());
    }
    value
        .get(..10)
        .and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok())
}

/// Text of `p` and `em` elements in document order. An `em` inside a `p`
/// is part of the paragraph's text, not a separate piece. Other markup
/// (`div`, `span`, ...) contributes nothing by itself.
fn article_pieces(node: ElementRef<'_>, out: &mut Vec<String>) {
    for child in node.children().filter_map(ElementRef::wrap) {
        match child.value().name() {
            "p" | "em" => {
                let text = collapse_ws(child.text());
                if !text.is_empty() {
                    out.push(text);
                }
            }
            "script" | "style" | "noscript" | "template" | "head" => {}
            _ => article_pieces(child, out),
        }
    }
}

impl Extractor {
    pub fn new(config: &ExtractConfig) -> Result<Extractor, CrawlError> {
        Ok(Extractor {
            title: compile(&config.title_selectors)?,
            label: compile(&config.label_selectors)?,
            date: compile(&config.date_selectors)?,
        })
    }

    pub fn extract(&self, page: &RawPage) -> Result<DocumentCandidate, CrawlError> {
        let doc = Html::parse_document(&page.html);
        let title = first_value(&doc, &self.title).ok_or_else(|| CrawlError::MissingTitle {
            url: page.url.clone(),
        })?;
        let label = first_value(&doc, &self.label).unwrap_or_else(|| UNLABELED.to_owned());
        let dt = first_value(&doc, &self.date)
            .and_then(|v| parse_date(&v))
            .unwrap_or_else(|| page.fetched_at.date_naive());
        let mut pieces = Vec::new();
        article_pieces(doc.root_element(), &mut pieces);
        Ok(DocumentCandidate {
            label,
            url: page.url.clone(),
            title,
            dt,
            article: pieces.join(" "),
        })
    }
}

/// Extracts with the default selectors.
pub fn extract_document(page: &RawPage) -> Result<DocumentCandidate, CrawlError> {
    Extractor::new(&ExtractConfig::default())?.extract(page)
}

/// Writes candidates as corpus JSONL, numbering ids from 1 in order.
pub fn stage_documents(
    candidates: impl IntoIterator<Item = DocumentCandidate>,
    out: &Path,
) -> Result<usize, CrawlError> {
    let io_err = |source| CrawlError::Io {
        path: out.to_owned(),
        source,
    };
    let mut writer = BufWriter::new(fs::File::create(out).map_err(io_err)?);
    let mut count = 0;
    for (i, candidate) in candidates.into_iter().enumerate() {
        write_document(&mut writer, &candidate.into_document(i as DocId + 1)).map_err(io_err)?;
        count += 1;
    }
    writer.flush().map_err(io_err)?;
    Ok(count)
}
