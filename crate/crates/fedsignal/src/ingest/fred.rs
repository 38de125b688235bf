//! Minimal client for the FRED `series/observations` endpoint.

use std::thread;
use std::time::Duration;

use chrono::NaiveDate;
use fedsignal_core::types::SeriesError;
use fedsignal_core::MacroSeries;
use serde::Deserialize;
use thiserror::Error;

use super::macro_csv::Frequency;
use super::{parse_date, parse_value};

pub const FRED_ENDPOINT: &str = "https://api.stlouisfed.org/fred/series/observations";

/// Hard cap on retries regardless of configuration.
pub const MAX_RETRIES: u32 = 3;

#[derive(Debug, Error)]
pub enum FredError {
    #[error("FRED_API_KEY is not set")]
    MissingApiKey,
    #[error("FRED rejected the API key: {0}")]
    Auth(String),
    #[error("FRED returned HTTP {0}")]
    Http(u16),
    #[error("could not reach FRED: {0}")]
    Transport(String),
    #[error("unexpected FRED response: {0}")]
    Parse(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone)]
pub struct FredOptions {
    pub endpoint: String,
    pub timeout: Duration,
    /// Clamped to [`MAX_RETRIES`].
    pub max_retries: u32,
    pub backoff: Duration,
}

impl Default for FredOptions {
    fn default() -> Self {
        Self {
            endpoint: FRED_ENDPOINT.into(),
            timeout: Duration::from_secs(30),
            max_retries: MAX_RETRIES,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Deserialize)]
struct Body {
    observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct Observation {
    date: String,
    value: String,
}

pub struct FredClient {
    agent: ureq::Agent,
    api_key: String,
    opts: FredOptions,
}

enum Attempt {
    Retry(FredError),
    Fail(FredError),
}

impl FredClient {
    pub fn new(api_key: impl Into<String>, opts: FredOptions) -> Result<Self, FredError> {
        let api_key = api_key.into();
        if api_key.trim().is_empty() {
            return Err(FredError::MissingApiKey);
        }
        let agent = ureq::AgentBuilder::new().timeout(opts.timeout).build();
        Ok(Self { agent, api_key, opts })
    }

    /// Reads the key from `FRED_API_KEY`.
    pub fn from_env(opts: FredOptions) -> Result<Self, FredError> {
        Self::new(std::env::var("FRED_API_KEY").unwrap_or_default(), opts)
    }

    /// Raw observations in `[start, end]`, with `"."` placeholders dropped.
    /// Retries transport failures, 429 and 5xx; never returns a partial
    /// series.
    pub fn observations(&self, series_id: &str, start: NaiveDate, end: NaiveDate) -> Result<Vec<(NaiveDate, f64)>, FredError> {
        let retries = self.opts.max_retries.min(MAX_RETRIES);
        let mut attempt = 0;
        loop {
            match self.try_once(series_id, start, end) {
                Ok(obs) => return Ok(obs),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    thread::sleep(self.opts.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
            }
        }
    }

    fn try_once(&self, series_id: &str, start: NaiveDate, end: NaiveDate) -> Result<Vec<(NaiveDate, f64)>, Attempt> {
        let resp = self
            .agent
            .get(&self.opts.endpoint)
            .query("series_id", series_id)
            .query("observation_start", &start.format("%Y-%m-%d").to_string())
            .query("observation_end", &end.format("%Y-%m-%d").to_string())
            .query("file_type", "json")
            .query("api_key", &self.api_key)
            .call();
        let body = match resp {
            Ok(r) => r.into_string().map_err(|e| Attempt::Retry(FredError::Transport(e.to_string())))?,
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(classify(code, &text));
            }
            Err(ureq::Error::Transport(t)) => return Err(Attempt::Retry(FredError::Transport(t.to_string()))),
        };
        parse_observations(&body).map_err(Attempt::Fail)
    }
}

fn classify(code: u16, body: &str) -> Attempt {
    match code {
        401 | 403 => Attempt::Fail(FredError::Auth(format!("HTTP {code}"))),
        400 if body.to_ascii_lowercase().contains("api_key") => Attempt::Fail(FredError::Auth(extract_message(body))),
        429 | 500..=599 => Attempt::Retry(FredError::Http(code)),
        _ => Attempt::Fail(FredError::Http(code)),
    }
}

fn extract_message(body: &str) -> String {
    serde_json::from_str::<serde_json::Value>(body)
        .ok()
        .and_then(|v| v.get("error_message").and_then(|m| m.as_str()).map(str::to_string))
        .unwrap_or_else(|| body.chars().take(200).collect())
}

pub fn parse_observations(body: &str) -> Result<Vec<(NaiveDate, f64)>, FredError> {
    let b: Body = serde_json::from_str(body).map_err(|e| FredError::Parse(e.to_string()))?;
    let mut out = Vec::with_capacity(b.observations.len());
    for o in b.observations {
        if o.value.trim() == "." {
            continue;
        }
        let date = parse_date(&o.date).ok_or_else(|| FredError::Parse(format!("bad date {:?}", o.date)))?;
        let value = parse_value(o.value.trim()).ok_or_else(|| FredError::Parse(format!("bad value {:?}", o.value)))?;
        out.push((date, value));
    }
    Ok(out)
}

/// Fetches one series and stores it under `name` (the id used in features).
pub fn fetch_fred_series(
    client: &FredClient,
    fred_id: &str,
    name: &str,
    start: NaiveDate,
    end: NaiveDate,
    frequency: Frequency,
) -> Result<MacroSeries, FredError> {
    let obs = client.observations(fred_id, start, end)?;
    Ok(match frequency {
        Frequency::Monthly => MacroSeries::from_monthly(name, obs)?,
        Frequency::Daily => MacroSeries::from_daily(name, obs)?,
    })
}
