//! Network fetcher for the crawler.

use std::time::Duration;

use sentisearch_core::crawler::{FetchError, Fetcher};

pub struct HttpFetcher {
    client: reqwest::blocking::Client,
}

impl HttpFetcher {
    pub fn new(timeout: Duration) -> reqwest::Result<HttpFetcher> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(concat!("sentisearch/", env!("CARGO_PKG_VERSION")))
            .timeout(timeout)
            .build()?;
        Ok(HttpFetcher { client })
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &str) -> Result<String, FetchError> {
        let resp = self
            .client
            .get(url)
            .send()
            .map_err(|e| FetchError(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(FetchError(format!("HTTP {status}")));
        }
        resp.text().map_err(|e| FetchError(e.to_string()))
    }
}
