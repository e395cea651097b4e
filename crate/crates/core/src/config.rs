//! Flat `key = value` text format shared by experiment configs, model files
//! and system sidecars.
//!
//! Lines starting with `#` and blank lines are ignored. Keys are unique.
//! Integer lists use either `a:b:step` ranges (inclusive) or comma-separated
//! values.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Parsed entries keyed by name; each value keeps its 1-based line number.
pub type KeyValues = BTreeMap<String, (usize, String)>;

pub fn parse_key_values<R: BufRead>(input: R) -> Result<KeyValues> {
    let mut map = KeyValues::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| {
            Error::parse(lineno, format!("expected 'key = value', got '{trimmed}'"))
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::parse(lineno, "empty key"));
        }
        if map.contains_key(&key) {
            return Err(Error::parse(lineno, format!("duplicate key '{key}'")));
        }
        map.insert(key, (lineno, value.trim().to_string()));
    }
    Ok(map)
}

/// Parses `a:b:step` (inclusive range) or `v1,v2,...`.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidArgument("empty list".into()));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| Error::InvalidArgument(format!("bad integer '{}': {e}", s.trim())))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "range '{text}' must be a:b or a:b:step"
                )))
            }
        };
        if step == 0 || start > end {
            return Err(Error::InvalidArgument(format!(
                "empty or invalid range '{text}'"
            )));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        text.split(',').map(num).collect()
    }
}

/// Renders a list back in the compact form accepted by [`parse_usize_list`].
pub fn format_usize_list(values: &[usize]) -> String {
    if values.len() >= 3 {
        let step = values[1].wrapping_sub(values[0]);
        if step > 0 && values.windows(2).all(|w| w[1].wrapping_sub(w[0]) == step) {
            return format!("{}:{}:{}", values[0], values[values.len() - 1], step);
        }
    }
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated list of floats.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad number '{}': {e}", s.trim())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(
            parse_usize_list("5:50:5").unwrap(),
            vec![5, 10, 15, 20, 25, 30, 35, 40, 45, 50]
        );
        assert_eq!(parse_usize_list("60:120:10").unwrap().len(), 7);
        assert_eq!(parse_usize_list("3,7, 9").unwrap(), vec![3, 7, 9]);
        assert_eq!(parse_usize_list("4:6").unwrap(), vec![4, 5, 6]);
        assert!(parse_usize_list("5:1:1").is_err());
        assert!(parse_usize_list("1:5:0").is_err());
        assert!(parse_usize_list("x").is_err());
    }

    #[test]
    fn list_formatting_round_trips() {
        for text in ["5:50:5", "3,7,9", "4"] {
            let v = parse_usize_list(text).unwrap();
            assert_eq!(parse_usize_list(&format_usize_list(&v)).unwrap(), v);
        }
    }

    #[test]
    fn key_values() {
        let text = "# comment\nkernel = gaussian\n\nsigma_f= 1.5\n";
        let kv = parse_key_values(Cursor::new(text)).unwrap();
        assert_eq!(kv["kernel"], (2, "gaussian".to_string()));
        assert_eq!(kv["sigma_f"].1, "1.5");
        assert!(parse_key_values(Cursor::new("a = 1\na = 2\n")).is_err());
        assert!(matches!(
            parse_key_values(Cursor::new("novalue\n")),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
