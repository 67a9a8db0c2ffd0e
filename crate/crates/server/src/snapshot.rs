//! Loading a search snapshot from disk.

use std::path::PathBuf;

use anyhow::Context;
use sentisearch_core::{Corpus, Index, Lexicon, SearchEngine};

/// Files a snapshot is read from. Without a lexicon path the bundled starter
/// lexicon is used.
#[derive(Clone, Debug)]
pub struct SnapshotPaths {
    pub corpus: PathBuf,
    pub index: PathBuf,
    pub lexicon: Option<PathBuf>,
}

pub fn load_lexicon(path: Option<&PathBuf>) -> anyhow::Result<Lexicon> {
    match path {
        Some(p) => Lexicon::load(p).with_context(|| format!("loading lexicon {}", p.display())),
        None => Ok(Lexicon::starter()),
    }
}

impl SnapshotPaths {
    pub fn load(&self) -> anyhow::Result<SearchEngine> {
        let corpus = Corpus::load(&self.corpus)
            .with_context(|| format!("loading corpus {}", self.corpus.display()))?;
        let index = Index::load(&self.index)
            .with_context(|| format!("loading index {}", self.index.display()))?;
        let lexicon = load_lexicon(self.lexicon.as_ref())?;
        SearchEngine::new(corpus, index, lexicon)
            .context("index and corpus come from different builds")
    }
}
