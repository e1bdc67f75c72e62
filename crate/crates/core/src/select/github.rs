use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;

use chrono::{DateTime, Months, Utc};
use rayon::prelude::*;
use regex::Regex;
use reqwest::blocking::{Client, Response};
use reqwest::header::{HeaderMap, ACCEPT, AUTHORIZATION, LINK};
use reqwest::StatusCode;
use serde::Deserialize;

use super::RepoMeta;

pub const DEFAULT_API_URL: &str = "https://api.github.com";

static REPO_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z0-9_.\-]+/[A-Za-z0-9_.\-]+$").unwrap());
static LAST_PAGE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"[?&]page=(\d+)[^>]*>;\s*rel="last""#).unwrap());

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid repository name {0:?}, expected owner/repo")]
    InvalidName(String),
    #[error("repository {0} not found")]
    NotFound(String),
    #[error("rate limited, retry after {}s", .0.as_secs())]
    RateLimited(Duration),
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response from {url}: {message}")]
    BadResponse { url: String, message: String },
    #[error("cache: {0}")]
    Cache(String),
}

#[derive(Debug, Deserialize)]
struct RepoResponse {
    stargazers_count: u64,
    forks_count: u64,
    created_at: DateTime<Utc>,
    #[serde(default)]
    archived: bool,
    default_branch: Option<String>,
}

/// Blocking client for the GitHub REST API with an optional on-disk cache
/// and retry on rate limiting.
#[derive(Debug, Clone)]
pub struct GitHubClient {
    http: Client,
    base_url: String,
    token: Option<String>,
    cache_dir: Option<PathBuf>,
    max_retries: u32,
    max_backoff: Duration,
    now: DateTime<Utc>,
}

impl GitHubClient {
    pub fn new(base_url: &str, token: Option<String>) -> Result<Self, FetchError> {
        let http = Client::builder()
            .user_agent(concat!("lineheat/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(60))
            .build()?;
        Ok(GitHubClient {
            http,
            base_url: base_url.trim_end_matches('/').to_string(),
            token: token.filter(|t| !t.is_empty()),
            cache_dir: None,
            max_retries: 5,
            max_backoff: Duration::from_secs(900),
            now: Utc::now(),
        })
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_retries(mut self, max_retries: u32, max_backoff: Duration) -> Self {
        self.max_retries = max_retries;
        self.max_backoff = max_backoff;
        self
    }

    /// Fixes the reference time used for bucket boundaries and cache keys.
    pub fn with_now(mut self, now: DateTime<Utc>) -> Self {
        self.now = now;
        self
    }

    fn cache_path(&self, name: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let file = format!(
            "{}__{}.json",
            name.replace('/', "__"),
            self.now.format("%Y-%m-%d")
        );
        Some(dir.join(file))
    }

    fn read_cache(path: &Path) -> Option<RepoMeta> {
        let text = std::fs::read_to_string(path).ok()?;
        match serde_json::from_str(&text) {
            Ok(meta) => Some(meta),
            Err(err) => {
                log::warn!("ignoring unreadable cache entry {}: {err}", path.display());
                None
            }
        }
    }

    fn retry_delay(&self, headers: &HeaderMap, attempt: u32) -> Duration {
        let header_u64 = |name: &str| headers.get(name)?.to_str().ok()?.trim().parse::<u64>().ok();
        if let Some(secs) = header_u64("retry-after") {
            return Duration::from_secs(secs);
        }
        if let Some(reset) = header_u64("x-ratelimit-reset") {
            let now = Utc::now().timestamp().max(0) as u64;
            return Duration::from_secs(reset.saturating_sub(now) + 1);
        }
        Duration::from_secs(1u64 << attempt.min(10))
    }

    fn get(&self, path: &str, query: &[(&str, String)]) -> Result<Response, FetchError> {
        let url = format!("{}{}", self.base_url, path);
        let mut attempt = 0;
        loop {
            let mut req = self
                .http
                .get(&url)
                .header(ACCEPT, "application/vnd.github+json")
                .query(query);
            if let Some(token) = &self.token {
                req = req.header(AUTHORIZATION, format!("Bearer {token}"));
            }
            let resp = req.send()?;
            let status = resp.status();
            let limited = status == StatusCode::TOO_MANY_REQUESTS
                || (status == StatusCode::FORBIDDEN
                    && (resp.headers().contains_key("retry-after")
                        || resp
                            .headers()
                            .get("x-ratelimit-remaining")
                            .is_some_and(|v| v == "0")));
            if !limited {
                return Ok(resp);
            }
            let delay = self.retry_delay(resp.headers(), attempt);
            if attempt >= self.max_retries {
                return Err(FetchError::RateLimited(delay));
            }
            let wait = delay.min(self.max_backoff);
            log::info!("rate limited on {url}, retrying in {}ms", wait.as_millis());
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    /// Number of commits matching `query`, read from the last-page link of a
    /// one-per-page listing.
    fn count_commits(&self, name: &str, query: &[(&str, String)]) -> Result<u64, FetchError> {
        let mut q = query.to_vec();
        q.push(("per_page", "1".to_string()));
        let path = format!("/repos/{name}/commits");
        let resp = self.get(&path, &q)?;
        match resp.status() {
            StatusCode::NOT_FOUND => return Err(FetchError::NotFound(name.to_string())),
            // Empty repositories answer 409.
            StatusCode::CONFLICT => return Ok(0),
            s if !s.is_success() => {
                return Err(FetchError::BadResponse {
                    url: path,
                    message: format!("status {s}"),
                })
            }
            _ => {}
        }
        if let Some(link) = resp.headers().get(LINK).and_then(|v| v.to_str().ok()) {
            if let Some(c) = LAST_PAGE.captures(link) {
                return c[1].parse().map_err(|_| FetchError::BadResponse {
                    url: path.clone(),
                    message: format!("bad link header {link:?}"),
                });
            }
        }
        let items: Vec<serde_json::Value> = resp.json()?;
        Ok(items.len() as u64)
    }

    pub fn fetch_repo_meta(&self, name: &str) -> Result<RepoMeta, FetchError> {
        if !REPO_NAME.is_match(name) {
            return Err(FetchError::InvalidName(name.to_string()));
        }
        let cache = self.cache_path(name);
        if let Some(meta) = cache.as_deref().and_then(Self::read_cache) {
            return Ok(meta);
        }

        let resp = self.get(&format!("/repos/{name}"), &[])?;
        if resp.status() == StatusCode::NOT_FOUND {
            return Err(FetchError::NotFound(name.to_string()));
        }
        if !resp.status().is_success() {
            return Err(FetchError::BadResponse {
                url: format!("/repos/{name}"),
                message: format!("status {}", resp.status()),
            });
        }
        let repo: RepoResponse = resp.json()?;
        let branch: Vec<(&str, String)> = repo
            .default_branch
            .iter()
            .map(|b| ("sha", b.clone()))
            .collect();
        let total_commits = self.count_commits(name, &branch)?;

        let mut buckets = Vec::new();
        let mut start = repo.created_at;
        while start < self.now {
            let end = start
                .checked_add_months(Months::new(6))
                .unwrap_or(self.now)
                .min(self.now);
            let mut q = branch.clone();
            q.push(("since", start.to_rfc3339()));
            q.push(("until", end.to_rfc3339()));
            buckets.push(self.count_commits(name, &q)?);
            start = end;
        }

        let meta = RepoMeta {
            owner_and_name: name.to_string(),
            stars: repo.stargazers_count,
            forks: repo.forks_count,
            total_commits,
            created_at: repo.created_at,
            half_year_commit_buckets: buckets,
            archived: repo.archived,
        };
        if let Some(path) = cache {
            let write = || -> std::io::Result<()> {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                let tmp = path.with_extension("json.tmp");
                std::fs::write(&tmp, serde_json::to_vec_pretty(&meta)?)?;
                std::fs::rename(tmp, &path)
            };
            write().map_err(|e| FetchError::Cache(format!("{}: {e}", path.display())))?;
        }
        Ok(meta)
    }

    /// Fetches `names` with at most `workers` requests in flight; results
    /// keep the input order.
    pub fn fetch_many(
        &self,
        names: &[String],
        workers: usize,
    ) -> Vec<Result<RepoMeta, FetchError>> {
        let fetch_all = || names.par_iter().map(|n| self.fetch_repo_meta(n)).collect();
        match rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
        {
            Ok(pool) => pool.install(fetch_all),
            Err(_) => names.iter().map(|n| self.fetch_repo_meta(n)).collect(),
        }
    }
}
