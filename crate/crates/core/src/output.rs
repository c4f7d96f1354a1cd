//! CSV and JSON writers. Numbers are printed like C's `%.12e`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{QbeError, Result};

/// Format a float as `%.12e` would: `-1.234567890123e+02`.
pub fn fmt_e12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Render a CSV table with a header row; every column must have equal length.
pub fn render_csv(headers: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(headers.len(), columns.len(), "header/column count mismatch");
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
    let mut out = headers.join(",");
    out.push('\n');
    for r in 0..rows {
        for (i, c) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}", fmt_e12(c[r])).expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| QbeError::io(path, e))
}

pub fn write_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    write_text(path, &render_csv(headers, columns))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| QbeError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_formatting() {
        assert_eq!(fmt_e12(123.4567890123), "1.234567890123e+02");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(-1.5e-7), "-1.500000000000e-07");
        assert_eq!(fmt_e12(2.0e150), "2.000000000000e+150");
        assert_eq!(fmt_e12(f64::NAN), "nan");
        assert_eq!(fmt_e12(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn header_only_when_empty() {
        assert_eq!(render_csv(&["a", "b"], &[&[], &[]]), "a,b\n");
    }

    #[test]
    fn rows_are_lf_terminated() {
        let s = render_csv(&["x"], &[&[1.0, 2.0]]);
        assert_eq!(s, "x\n1.000000000000e+00\n2.000000000000e+00\n");
    }

    #[test]
    fn unwritable_path_reports_path() {
        let err = write_text(Path::new("/nonexistent-dir/sub/file.csv"), "x").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/sub/file.csv"));
    }
}
