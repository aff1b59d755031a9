//! Flat numeric text files: an optional `#` header, then one value per line.
//! Values use Rust's shortest round-trip formatting, so reading a file back
//! reproduces every `f64` bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn format_values(values: &[f64]) -> String {
    let mut out = format!("# dqffl-values v1 count={}\n", values.len());
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_values(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut declared = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(header) = line.strip_prefix('#') {
            declared = header
                .split_whitespace()
                .find_map(|f| f.strip_prefix("count="))
                .and_then(|c| c.parse::<usize>().ok())
                .or(declared);
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::parse(origin, format!("line {}: not a number: {line:?}", n + 1)))?;
        values.push(v);
    }
    if let Some(count) = declared {
        if count != values.len() {
            return Err(Error::parse(
                origin,
                format!("header declares {count} values, found {}", values.len()),
            ));
        }
    }
    Ok(values)
}

pub fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, format_values(values)).map_err(|e| Error::io(path, e))
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_values(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_count_mismatch_and_garbage() {
        let p = Path::new("x");
        assert!(parse_values("# count=3\n1\n2\n", p).is_err());
        assert!(parse_values("1\nabc\n", p).is_err());
        assert_eq!(
            parse_values("1.5\n\n-2e-300\n", p).unwrap(),
            vec![1.5, -2e-300]
        );
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(vs in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..50)) {
            let back = parse_values(&format_values(&vs), Path::new("mem")).unwrap();
            prop_assert_eq!(back.len(), vs.len());
            for (a, b) in back.iter().zip(&vs) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
