//! Flat `key=value` text files, used for metadata sidecars and experiment configs.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are written in
//! sorted order so output is byte-stable.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub type KeyValues = BTreeMap<String, String>;

pub fn parse(text: &str, origin: &Path) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: i as u64 + 1,
            message: format!("expected key=value, found `{line}`"),
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn render(values: &KeyValues) -> String {
    values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn read(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

pub fn write(path: &Path, values: &KeyValues) -> Result<()> {
    std::fs::write(path, render(values)).map_err(|e| Error::io(path, e))
}

/// Typed lookup of a required key.
pub fn get<T: std::str::FromStr>(values: &KeyValues, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = values.get(key).ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
    raw.parse().map_err(|e| Error::Config(format!("key `{key}` = `{raw}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let kv = parse("# comment\nb = 2\n\na=x=y\n", Path::new("m")).unwrap();
        assert_eq!(kv["a"], "x=y");
        assert_eq!(render(&kv), "a=x=y\nb=2\n");
        assert_eq!(get::<u32>(&kv, "b").unwrap(), 2);
        assert!(get::<u32>(&kv, "c").is_err());
        let err = parse("ok=1\nbroken\n", Path::new("m")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
