use std::collections::HashMap;
use std::str::FromStr;

use thiserror::Error;

use super::comparator::ComparatorClass;
use super::runner::{Algorithm, ExperimentConfig};
use crate::environments::EnvironmentKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("duplicate key {0:?}")]
    Duplicate(String),
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: String, value: String },
}

const KEYS: &[&str] = &[
    "algorithm",
    "kind",
    "dimension",
    "horizon",
    "replicates",
    "seed",
    "env_seed",
    "gamma",
    "epsilon",
    "depth",
    "components",
    "bid_center",
    "bid_noise",
    "comparator",
    "comparator_resolution",
    "action_resolution",
    "dictionary_knots",
    "dictionary_levels",
    "dictionary_resolution",
];

/// Parses the flat `key = value` format; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut map: HashMap<&str, &str> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { line: i + 1, key: k.to_string() });
        }
        if map.insert(k, v).is_some() {
            return Err(ConfigError::Duplicate(k.to_string()));
        }
    }
    fn get<T: FromStr>(map: &HashMap<&str, &str>, key: &str) -> Result<Option<T>, ConfigError> {
        map.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v.to_string() })
            })
            .transpose()
    }
    let algorithm: Algorithm = map
        .get("algorithm")
        .ok_or(ConfigError::Missing("algorithm"))?
        .parse()
        .map_err(|_| ConfigError::BadValue { key: "algorithm".into(), value: map["algorithm"].into() })?;
    let kind: EnvironmentKind = map
        .get("kind")
        .ok_or(ConfigError::Missing("kind"))?
        .parse()
        .map_err(|_| ConfigError::BadValue { key: "kind".into(), value: map["kind"].into() })?;
    let horizon: usize = get(&map, "horizon")?.ok_or(ConfigError::Missing("horizon"))?;
    let dimension: usize = get(&map, "dimension")?.unwrap_or(1);
    if horizon == 0 || dimension == 0 {
        return Err(ConfigError::BadValue { key: "horizon/dimension".into(), value: "0".into() });
    }
    let mut c = ExperimentConfig::new(algorithm, kind, dimension, horizon);
    c.replicates = get(&map, "replicates")?.unwrap_or(1);
    c.seed = get(&map, "seed")?.unwrap_or(0);
    c.environment.seed = get(&map, "env_seed")?.unwrap_or(c.seed);
    c.gamma = get(&map, "gamma")?;
    c.epsilon = get(&map, "epsilon")?;
    c.depth = get(&map, "depth")?;
    if let Some(n) = get(&map, "components")? {
        c.environment.components = n;
    }
    c.environment.bid_center = get(&map, "bid_center")?;
    if let Some(v) = get(&map, "bid_noise")? {
        c.environment.bid_noise = v;
    }
    if let Some(v) = map.get("comparator") {
        c.comparator.class = ComparatorClass::from_str(v)
            .map_err(|_| ConfigError::BadValue { key: "comparator".into(), value: v.to_string() })?;
    }
    if let Some(v) = get(&map, "comparator_resolution")? {
        c.comparator.context_bins = v;
    }
    if let Some(v) = get(&map, "action_resolution")? {
        c.comparator.action_points = v;
    }
    if let Some(v) = get(&map, "dictionary_knots")? {
        c.dictionary_knots = v;
    }
    if let Some(v) = get(&map, "dictionary_levels")? {
        c.dictionary_levels = v;
    }
    if let Some(v) = get(&map, "dictionary_resolution")? {
        c.dictionary_resolution = v;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let c = parse_config("algorithm = exp3-rtb\nkind = auction-iid # bids\nhorizon = 10\nseed=4\n").unwrap();
        assert_eq!(c.algorithm, Algorithm::Exp3Rtb);
        assert_eq!((c.horizon, c.seed, c.environment.seed), (10, 4, 4));
        assert!(matches!(parse_config("horizon = 3\nfoo = 1"), Err(ConfigError::UnknownKey { .. })));
        assert_eq!(parse_config("kind = auction-iid\nhorizon = 3"), Err(ConfigError::Missing("algorithm")));
    }
}
