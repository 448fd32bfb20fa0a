//! Line-oriented record files: one record per line, written either as a JSON
//! array or as numbers separated by commas or whitespace. Blank lines and
//! lines starting with `#` are skipped.

use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

pub fn parse<T>(text: &str) -> Result<Vec<Vec<T>>>
where
    T: FromStr + DeserializeOwned,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record = if line.starts_with('[') {
            serde_json::from_str(line).with_context(|| format!("line {}", n + 1))?
        } else {
            line.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(T::from_str)
                .collect::<Result<Vec<T>, _>>()
                .with_context(|| format!("line {}", n + 1))?
        };
        out.push(record);
    }
    Ok(out)
}

pub fn read<T>(path: &Path) -> Result<Vec<Vec<T>>>
where
    T: FromStr + DeserializeOwned,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}
