use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::ArmMeans;
use crate::index::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("invalid value for key {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("malformed entry {0:?}, expected key=value")]
    Syntax(String),
}

impl ConfigError {
    fn invalid(key: &str, reason: impl fmt::Display) -> Self {
        Self::Invalid { key: key.to_string(), reason: reason.to_string() }
    }

    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Missing(k) => Some(k),
            Self::Invalid { key, .. } | Self::UnknownKey(key) => Some(key),
            Self::Syntax(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dpe,
    Centralized,
    Oracle,
    /// Every player picks a uniformly random arm each round.
    Random,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dpe => "dpe",
            Self::Centralized => "centralized",
            Self::Oracle => "oracle",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dpe" => Ok(Self::Dpe),
            "centralized" => Ok(Self::Centralized),
            "oracle" => Ok(Self::Oracle),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub num_arms: usize,
    pub num_players: usize,
    pub means: ArmMeans,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub algorithm: Algorithm,
    pub checkpoints: Vec<u64>,
    pub output_path: PathBuf,
    pub bisection_tolerance: f64,
    pub lemma_truncation: u64,
}

pub const DEFAULT_SEED_COUNT: u64 = 10;
pub const DEFAULT_TRUNCATION: u64 = 1_000_000;

/// Powers of ten from 100 below `horizon`, then `horizon` itself.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(100u64), |c| c.checked_mul(10))
        .take_while(|&c| c < horizon)
        .collect();
    out.push(horizon);
    out
}

impl Config {
    /// Minimal valid configuration with defaults for everything else.
    pub fn new(means: Vec<f64>, num_players: usize, horizon: u64, algorithm: Algorithm) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        raw.insert("means".to_string(), join(&means));
        raw.insert("M".to_string(), num_players.to_string());
        raw.insert("T".to_string(), horizon.to_string());
        raw.insert("algo".to_string(), algorithm.name().to_string());
        from_entries(raw)
    }

    /// Copy with a different horizon. Checkpoints are the configured ones
    /// up to the new horizon merged with its default grid.
    pub fn with_horizon(&self, horizon: u64) -> Self {
        let mut checkpoints: Vec<u64> = self.checkpoints.iter().copied().filter(|&c| c <= horizon).collect();
        checkpoints.extend(default_checkpoints(horizon));
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Self { horizon, checkpoints, ..self.clone() }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `key=value` entries separated by whitespace or newlines (`#`
/// starts a comment), or a single JSON object with the same keys.
///
/// Keys: `K`, `M`, `means`, `T`, `seeds` (a count `n` for seeds `1..=n`,
/// or a comma list / JSON array), `algo`, `checkpoints`, `out`,
/// `tolerance`, `truncation`.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let trimmed = text.trim_start();
    let raw = if trimmed.starts_with('{') {
        json_entries(trimmed)?
    } else {
        kv_entries(text)?
    };
    from_entries(raw)
}

fn kv_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| ConfigError::Syntax(token.to_string()))?;
            out.insert(canonical_key(k)?, v.to_string());
        }
    }
    Ok(out)
}

fn json_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let doc: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (k, v) in doc {
        let key = canonical_key(&k)?;
        let value = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                // an explicit list, even of length one
                format!("[{}]", parts.join(","))
            }
            other => other.to_string(),
        };
        out.insert(key, value);
    }
    Ok(out)
}

fn canonical_key(key: &str) -> Result<String, ConfigError> {
    let k = match key {
        "K" | "k" | "arms" => "K",
        "M" | "m" | "players" => "M",
        "means" | "mu" => "means",
        "T" | "horizon" => "T",
        "seeds" => "seeds",
        "algo" | "algorithm" => "algo",
        "checkpoints" => "checkpoints",
        "out" | "output" | "output_path" => "out",
        "tolerance" | "bisection_tolerance" => "tolerance",
        "truncation" | "lemma_truncation" => "truncation",
        other => return Err(ConfigError::UnknownKey(other.to_string())),
    };
    Ok(k.to_string())
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::invalid(key, format!("{value:?}: {e}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number(key, s))
        .collect()
}

fn from_entries(raw: BTreeMap<String, String>) -> Result<Config, ConfigError> {
    let get = |k: &str| raw.get(k).map(String::as_str);

    let means_raw: Vec<f64> = list("means", get("means").ok_or(ConfigError::Missing("means"))?)?;
    let num_arms = match get("K") {
        Some(v) => number::<usize>("K", v)?,
        None => means_raw.len(),
    };
    if num_arms < 2 {
        return Err(ConfigError::invalid("K", "need at least 2 arms"));
    }
    if means_raw.len() != num_arms {
        return Err(ConfigError::invalid("means", format!("{} values for K = {num_arms}", means_raw.len())));
    }
    let means = ArmMeans::new(means_raw).map_err(|e| ConfigError::invalid("means", e))?;

    let num_players: usize = number("M", get("M").ok_or(ConfigError::Missing("M"))?)?;
    if num_players == 0 || num_players >= num_arms {
        return Err(ConfigError::invalid("M", format!("need 1 <= M < K = {num_arms}, got {num_players}")));
    }

    let horizon: u64 = number("T", get("T").ok_or(ConfigError::Missing("T"))?)?;
    if horizon == 0 {
        return Err(ConfigError::invalid("T", "horizon must be at least 1"));
    }

    let seeds = match get("seeds") {
        None => (1..=DEFAULT_SEED_COUNT).collect(),
        Some(v) if v.contains(',') || v.trim_start().starts_with('[') => list::<u64>("seeds", v)?,
        Some(v) => {
            let n: u64 = number("seeds", v)?;
            (1..=n).collect()
        }
    };
    if seeds.is_empty() {
        return Err(ConfigError::invalid("seeds", "no seeds"));
    }

    let algorithm = match get("algo") {
        None => Algorithm::Dpe,
        Some(v) => v.trim_matches('"').parse().map_err(|e: String| ConfigError::invalid("algo", e))?,
    };

    let checkpoints = match get("checkpoints") {
        None => default_checkpoints(horizon),
        Some(v) => list::<u64>("checkpoints", v)?,
    };
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::invalid("checkpoints", "must be a nonempty strictly increasing list"));
    }
    if checkpoints[0] == 0 || *checkpoints.last().unwrap() > horizon {
        return Err(ConfigError::invalid("checkpoints", format!("must lie in 1..={horizon}")));
    }

    let output_path = PathBuf::from(get("out").unwrap_or("trace.csv").trim_matches('"'));

    let bisection_tolerance = match get("tolerance") {
        None => DEFAULT_TOLERANCE,
        Some(v) => number("tolerance", v)?,
    };
    if !(bisection_tolerance > 0.0 && bisection_tolerance <= 1e-6) {
        return Err(ConfigError::invalid("tolerance", "must lie in (0, 1e-6]"));
    }

    let lemma_truncation = match get("truncation") {
        None => DEFAULT_TRUNCATION,
        Some(v) => number("truncation", v)?,
    };
    if lemma_truncation < crate::diagnostics::MIN_LEMMA2_TRUNCATION {
        return Err(ConfigError::invalid(
            "truncation",
            format!("must be at least {}", crate::diagnostics::MIN_LEMMA2_TRUNCATION),
        ));
    }

    Ok(Config {
        num_arms,
        num_players,
        means,
        horizon,
        seeds,
        algorithm,
        checkpoints,
        output_path,
        bisection_tolerance,
        lemma_truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_reference_line() {
        let c = parse_config("K=6 M=3 means=0.9,0.8,0.7,0.6,0.5,0.4 T=1000000 seeds=50 algo=dpe").unwrap();
        assert_eq!((c.num_arms, c.num_players, c.horizon), (6, 3, 1_000_000));
        assert_eq!(c.seeds, (1..=50).collect::<Vec<_>>());
        assert_eq!(c.algorithm, Algorithm::Dpe);
        assert_eq!(c.checkpoints, vec![100, 1_000, 10_000, 100_000, 1_000_000]);
        assert_eq!(c.bisection_tolerance, 1e-9);
        assert_eq!(c.output_path, PathBuf::from("trace.csv"));
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("K=3 M=3 means=0.9,0.8,0.7 T=10").unwrap_err();
        assert_eq!(e.key(), Some("M"));
        let e = parse_config("K=4 M=2 means=0.9,0.8,0.7 T=10").unwrap_err();
        assert_eq!(e.key(), Some("means"));
        let e = parse_config("K=3 M=1 means=0.9,0.9,0.7 T=10").unwrap_err();
        assert_eq!(e.key(), Some("means"));
        let e = parse_config("K=3 M=1 means=0.9,0.8,0.7").unwrap_err();
        assert_eq!(e, ConfigError::Missing("T"));
        let e = parse_config("K=3 M=1 means=0.9,0.8,0.7 T=10 checkpoints=5,20").unwrap_err();
        assert_eq!(e.key(), Some("checkpoints"));
        let e = parse_config("K=3 M=1 means=0.9,0.8,0.7 T=10 colour=red").unwrap_err();
        assert_eq!(e.key(), Some("colour"));
        let e = parse_config("K=3 M=1 means=0.9,0.8,0.7 T=10 algo=greedy").unwrap_err();
        assert_eq!(e.key(), Some("algo"));
        let e = parse_config("K=3 M=1 means=0.9,0.8,0.7 T=10 truncation=10").unwrap_err();
        assert_eq!(e.key(), Some("truncation"));
        assert!(matches!(parse_config("K=3 oops"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn multiline_with_comments_and_lists() {
        let text = "# instance\nmeans=0.2,0.4,0.6\nM=1\nT=500 # short\nseeds=4,9\ncheckpoints=[10,500]\nalgo=centralized\nout=x.csv\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.num_arms, 3);
        assert_eq!(c.seeds, vec![4, 9]);
        assert_eq!(c.checkpoints, vec![10, 500]);
        assert_eq!(c.algorithm, Algorithm::Centralized);
        assert_eq!(c.output_path, PathBuf::from("x.csv"));
    }

    #[test]
    fn json_document() {
        let c = parse_config(r#"{"K": 4, "M": 2, "means": [0.1, 0.2, 0.3, 0.4], "T": 50, "seeds": [7], "algo": "oracle"}"#)
            .unwrap();
        assert_eq!(c.seeds, vec![7]);
        assert_eq!(c.algorithm, Algorithm::Oracle);
        assert_eq!(c.checkpoints, vec![50]);
    }

    #[test]
    fn default_grid() {
        assert_eq!(default_checkpoints(50), vec![50]);
        assert_eq!(default_checkpoints(100), vec![100]);
        assert_eq!(default_checkpoints(12_345), vec![100, 1_000, 10_000, 12_345]);
    }

    #[test]
    fn horizon_change_merges_grids() {
        let c = parse_config("means=0.2,0.4,0.6 M=1 T=500 checkpoints=50,500").unwrap();
        assert_eq!(c.with_horizon(2_000).checkpoints, vec![50, 100, 500, 1_000, 2_000]);
        assert_eq!(c.with_horizon(60).checkpoints, vec![50, 60]);
    }
}
