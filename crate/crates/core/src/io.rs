//! Shared text-file helpers: real formatting and solution vectors (`u.csv`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Reals are written with 17 significant digits so that they round-trip.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_real(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {field:?}")))
}

pub(crate) fn parse_index(path: &Path, line: usize, field: &str, what: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {field:?}")))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `id,value` rows.
pub fn write_vector_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 28 + 16);
    out.push_str("id,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_real(*v)));
    }
    write_text(path, &out)
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "id,value")) => {}
        _ => return Err(Error::parse(path, 1, "expected header `id,value`")),
    }
    let mut values = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(id), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(path, lineno, "expected two fields"));
        };
        let id = parse_index(path, lineno, id, "id")?;
        if id != values.len() {
            return Err(Error::parse(path, lineno, format!("expected id {}, found {id}", values.len())));
        }
        values.push(parse_real(path, lineno, v, "value")?);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let v = vec![0.1, -2.0 / 3.0, 1e-300, 0.0];
        write_vector_csv(&path, &v).unwrap();
        assert_eq!(read_vector_csv(&path).unwrap(), v);
    }

    #[test]
    fn malformed_line_reports_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, "id,value\n0,1.0\n1,abc\n").unwrap();
        match read_vector_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
