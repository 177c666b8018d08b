//! Repository search against the GitHub REST API.

use std::time::Duration;

use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde::Deserialize;
use vcf_core::ingest::{ApiError, RepoHit, RepoSearch, SearchPage};

pub const TOKEN_VAR: &str = "VCF_API_TOKEN";
const PER_PAGE: usize = 100;
/// The search endpoint serves at most 1000 results per query.
const MAX_PAGE: u32 = 10;

#[derive(Debug, Deserialize)]
struct SearchBody {
    items: Vec<Item>,
}

#[derive(Debug, Deserialize)]
struct Item {
    full_name: String,
    html_url: String,
    stargazers_count: u64,
    #[serde(default)]
    fork: bool,
    license: Option<License>,
}

#[derive(Debug, Deserialize)]
struct License {
    key: String,
}

#[derive(Debug, Deserialize)]
struct LicenseBody {
    license: Option<License>,
}

pub struct GitHubClient {
    client: Client,
    api_base: String,
    token: Option<String>,
}

impl GitHubClient {
    pub fn new(api_base: &str, token: Option<String>) -> Result<Self, reqwest::Error> {
        let client = Client::builder()
            .user_agent(concat!("vcf/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(60))
            .build()?;
        Ok(Self { client, api_base: api_base.trim_end_matches('/').to_string(), token })
    }

    pub fn from_env() -> Result<Self, reqwest::Error> {
        let token = std::env::var(TOKEN_VAR).ok().filter(|t| !t.is_empty());
        if token.is_none() {
            tracing::warn!("{TOKEN_VAR} is not set; unauthenticated requests are heavily rate limited");
        }
        Self::new("https://api.github.com", token)
    }

    fn get(&self, url: &str, query: &[(&str, String)]) -> Result<Response, ApiError> {
        let mut req = self.client.get(url).query(query).header("Accept", "application/vnd.github+json");
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| ApiError::Transient(e.to_string()))?;
        classify(resp)
    }
}

fn classify(resp: Response) -> Result<Response, ApiError> {
    let status = resp.status();
    if status.is_success() || status == StatusCode::NOT_FOUND {
        return Ok(resp);
    }
    let retry_after = resp
        .headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs);
    match status {
        StatusCode::UNAUTHORIZED => Err(ApiError::Auth(status.to_string())),
        StatusCode::FORBIDDEN | StatusCode::TOO_MANY_REQUESTS => Err(ApiError::RateLimited { retry_after }),
        s => Err(ApiError::Transient(s.to_string())),
    }
}

impl RepoSearch for GitHubClient {
    fn search(&mut self, language: &str, page: Option<&str>) -> Result<SearchPage, ApiError> {
        let n: u32 = page.and_then(|p| p.parse().ok()).unwrap_or(1);
        let url = format!("{}/search/repositories", self.api_base);
        let query = [
            ("q", format!("language:{language}")),
            ("sort", "stars".to_string()),
            ("order", "desc".to_string()),
            ("per_page", PER_PAGE.to_string()),
            ("page", n.to_string()),
        ];
        let resp = self.get(&url, &query)?;
        if resp.status() == StatusCode::NOT_FOUND {
            return Ok(SearchPage::default());
        }
        let body: SearchBody = resp.json().map_err(|e| ApiError::Transient(e.to_string()))?;
        let full = body.items.len() == PER_PAGE;
        let hits = body
            .items
            .into_iter()
            .map(|i| RepoHit {
                full_name: i.full_name,
                html_url: i.html_url,
                stars: i.stargazers_count,
                license_key: i.license.map(|l| l.key),
                fork: i.fork,
            })
            .collect();
        let next_page = (full && n < MAX_PAGE).then(|| (n + 1).to_string());
        Ok(SearchPage { hits, next_page })
    }

    fn license(&mut self, full_name: &str) -> Result<Option<String>, ApiError> {
        let url = format!("{}/repos/{full_name}/license", self.api_base);
        let resp = self.get(&url, &[])?;
        if resp.status() == StatusCode::NOT_FOUND {
            return Ok(None);
        }
        let body: LicenseBody = resp.json().map_err(|e| ApiError::Transient(e.to_string()))?;
        Ok(body.license.map(|l| l.key))
    }
}
