//! `key = value` configuration files presetting search budgets.
//!
//! Recognised keys: `contexts`, `rmws`, `event-cap`, `jobs`, `seed`,
//! `max-nodes`, `json`. Blank lines and `#` comments are ignored. Command-line
//! flags always override values read here.

use std::collections::BTreeMap;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub contexts: Option<usize>,
    pub rmws: Option<usize>,
    pub event_cap: Option<usize>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub max_nodes: Option<u64>,
    pub json: Option<bool>,
}

const KEYS: [&str; 7] = [
    "contexts",
    "rmws",
    "event-cap",
    "jobs",
    "seed",
    "max-nodes",
    "json",
];

pub fn parse_config(text: &str) -> Result<Config, String> {
    let mut raw: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", k + 1))?;
        let key = key.trim();
        let key = KEYS
            .iter()
            .find(|&&known| known == key || known.replace('-', "_") == key)
            .ok_or_else(|| format!("config line {}: unknown key `{key}`", k + 1))?;
        raw.insert(key, (k + 1, val.trim().trim_matches('"')));
    }
    fn num<T: std::str::FromStr>(
        raw: &BTreeMap<&str, (usize, &str)>,
        key: &str,
    ) -> Result<Option<T>, String> {
        raw.get(key)
            .map(|(line, v)| {
                v.parse().map_err(|_| {
                    format!("config line {line}: `{key}` expects a non-negative integer")
                })
            })
            .transpose()
    }
    let json = raw
        .get("json")
        .map(|(line, v)| match *v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(format!("config line {line}: `json` expects true or false")),
        })
        .transpose()?;
    Ok(Config {
        contexts: num(&raw, "contexts")?,
        rmws: num(&raw, "rmws")?,
        event_cap: num(&raw, "event-cap")?,
        jobs: num(&raw, "jobs")?,
        seed: num(&raw, "seed")?,
        max_nodes: num(&raw, "max-nodes")?,
        json,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c = parse_config("# budgets\ncontexts = 3\nevent_cap=8\njson = true\n").unwrap();
        assert_eq!(c.contexts, Some(3));
        assert_eq!(c.event_cap, Some(8));
        assert_eq!(c.json, Some(true));
        assert_eq!(c.rmws, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(parse_config("depth = 2")
            .unwrap_err()
            .contains("unknown key"));
        assert!(parse_config("contexts = two")
            .unwrap_err()
            .contains("contexts"));
        assert!(parse_config("contexts")
            .unwrap_err()
            .contains("key = value"));
    }
}
