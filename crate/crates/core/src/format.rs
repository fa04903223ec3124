//! Deterministic number formatting and key-value sidecar files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats `v` rounded to 9 significant digits, in the shortest decimal form
/// that parses back to the rounded value.
pub fn fmt_sig9(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("scientific literal");
    if rounded == 0.0 {
        return "0".to_string();
    }
    format!("{rounded}")
}

/// Rounds `v` to 9 significant digits.
pub fn round_sig9(v: f64) -> f64 {
    fmt_sig9(v).parse().expect("formatted float")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig9).unwrap_or_default()
}

/// Parses `key = value` (or `key=value`) lines; `#` starts a comment.
pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return Err(Error::parse(path, i as u64 + 1, format!("expected key=value, got {raw:?}")));
        };
        let key = k.trim().to_string();
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::integrity(path, i as u64 + 1, format!("duplicate key {key:?}")));
        }
    }
    Ok(out)
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text, path)
}

pub fn write_key_values<'a>(path: &Path, pairs: impl IntoIterator<Item = (&'a str, String)>) -> Result<()> {
    let mut text = String::new();
    for (k, v) in pairs {
        text.push_str(k);
        text.push('=');
        text.push_str(&v);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_f64_field(raw: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = raw.trim().parse().map_err(|_| format!("{name}: cannot parse {raw:?} as a number"))?;
    if !v.is_finite() {
        return Err(format!("{name}: value must be finite"));
    }
    Ok(v)
}

pub(crate) fn value_f64(map: &BTreeMap<String, String>, key: &str, path: &Path) -> Result<f64> {
    let raw = map
        .get(key)
        .ok_or_else(|| Error::Schema(format!("{}: missing key {key:?}", path.display())))?;
    parse_f64_field(raw, key).map_err(|m| Error::Schema(format!("{}: {m}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig9(123.456789012), "123.456789");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(1.0e-7 / 3.0), "0.0000000333333333");
    }

    #[test]
    fn key_values() {
        let m = parse_key_values("fps = 29.97\n# note\nn_frames=10\n", Path::new("x")).unwrap();
        assert_eq!(m["fps"], "29.97");
        assert_eq!(m["n_frames"], "10");
        assert!(parse_key_values("a=1\na=2\n", Path::new("x")).is_err());
        assert!(parse_key_values("garbage\n", Path::new("x")).is_err());
    }

    proptest! {
        #[test]
        fn formatting_is_a_fixed_point(v in proptest::num::f64::NORMAL) {
            let s = fmt_sig9(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(fmt_sig9(back), s);
            prop_assert!(((back - v) / v).abs() <= 5e-9);
        }
    }
}
