//! Flat `key = value` text with optional `[section]` headers.
//!
//! Keys inside a section are reported as `section.key`. Lines starting with
//! `#` and blank lines are ignored.

use std::collections::BTreeMap;

use crate::error::ParseError;

pub type KvMap = BTreeMap<String, String>;

pub fn parse_kv(text: &str) -> Result<KvMap, ParseError> {
    let mut out = KvMap::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(n + 1, 1, "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(ParseError::new(n + 1, 1, "empty section name"));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ParseError::new(n + 1, 1, format!("expected `key = value`, found `{line}`"))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ParseError::new(n + 1, 1, "empty key"));
        }
        let key = if section.is_empty() {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ParseError::new(n + 1, 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

/// Writes keys grouped by their `section.` prefix, sections in sorted order
/// with unsectioned keys first.
pub fn write_kv(map: &KvMap) -> String {
    let mut plain = Vec::new();
    let mut sections: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for (k, v) in map {
        match k.split_once('.') {
            Some((s, rest)) => sections.entry(s).or_default().push((rest, v)),
            None => plain.push((k.as_str(), v.as_str())),
        }
    }
    let mut s = String::new();
    for (k, v) in plain {
        s.push_str(&format!("{k} = {v}\n"));
    }
    for (name, entries) in sections {
        s.push_str(&format!("\n[{name}]\n"));
        for (k, v) in entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
    }
    s
}

pub fn get_f64(map: &KvMap, key: &str) -> Result<Option<f64>, String> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| format!("`{key}`: `{v}` is not a number"))
        })
        .transpose()
}
