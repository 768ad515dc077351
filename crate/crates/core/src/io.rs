//! Matrix files, role-named matrix directories and key=value configs.
//!
//! A matrix file holds one JSON object
//! `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major order.
//! Doubles round-trip bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{c64, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let expected = f
            .rows
            .checked_mul(f.cols)
            .ok_or_else(|| Error::Parse(format!("matrix shape {}x{} overflows", f.rows, f.cols)))?;
        if f.data.len() != expected {
            return Err(Error::Parse(format!(
                "expected {expected} entries for a {}x{} matrix, found {}",
                f.rows,
                f.cols,
                f.data.len()
            )));
        }
        if f.data
            .iter()
            .any(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix::from_fn(f.rows, f.cols, |r, c| {
            let [re, im] = f.data[r * f.cols + c];
            c64(re, im)
        }))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(m)).expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let f: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.try_into()
}

pub fn write_matrix(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    matrix_from_json(&fs::read_to_string(path)?)
}

/// Matrix roles used in matrix directories; each is stored as `<role>.json`.
pub const ROLES: [&str; 10] = ["U1", "U2", "H1", "H2", "H3", "P", "X1", "X2", "X3", "X4"];

fn check_role(role: &str) -> Result<()> {
    if ROLES.contains(&role) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("unknown matrix role `{role}`")))
    }
}

pub fn write_role(dir: impl AsRef<Path>, role: &str, m: &ComplexMatrix) -> Result<()> {
    check_role(role)?;
    fs::create_dir_all(dir.as_ref())?;
    write_matrix(dir.as_ref().join(format!("{role}.json")), m)
}

/// `Ok(None)` when the directory has no file for `role`.
pub fn read_role(dir: impl AsRef<Path>, role: &str) -> Result<Option<ComplexMatrix>> {
    check_role(role)?;
    let path = dir.as_ref().join(format!("{role}.json"));
    if !path.exists() {
        return Ok(None);
    }
    read_matrix(path).map(Some)
}

pub fn require_role(dir: impl AsRef<Path>, role: &str) -> Result<ComplexMatrix> {
    let dir = dir.as_ref();
    read_role(dir, role)?
        .ok_or_else(|| Error::InvalidSpec(format!("{} has no {role}.json", dir.display())))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// repeated keys are an error.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::Parse(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Splits a list value on commas and whitespace; an empty value gives an
/// empty list.
pub fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad list element `{s}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, rng};

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = random_matrix(&mut rng(1), 5);
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let text = r#"{"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(matrix_from_json(text), Err(Error::Parse(_))));
        assert!(matrix_from_json("not json").is_err());
    }

    #[test]
    fn row_major_layout() {
        let text = r#"{"rows": 1, "cols": 2, "data": [[1,2],[3,4]]}"#;
        let m = matrix_from_json(text).unwrap();
        assert_eq!(m[(0, 1)], c64(3.0, 4.0));
    }

    #[test]
    fn role_directory() {
        let dir = tempfile::tempdir().unwrap();
        let m = random_matrix(&mut rng(2), 3);
        write_role(dir.path(), "U1", &m).unwrap();
        assert_eq!(read_role(dir.path(), "U1").unwrap(), Some(m));
        assert_eq!(read_role(dir.path(), "U2").unwrap(), None);
        assert!(write_role(dir.path(), "Q", &identity()).is_err());
        assert!(require_role(dir.path(), "P").is_err());
    }

    fn identity() -> ComplexMatrix {
        crate::matkernel::identity(1)
    }

    #[test]
    fn config_parsing() {
        let map = parse_config("# grid\nn = 4, 8 ,16\n\nflux=0.25 # trailing\n").unwrap();
        assert_eq!(map["flux"], "0.25");
        assert_eq!(parse_list::<usize>(&map["n"]).unwrap(), vec![4, 8, 16]);
        assert!(parse_list::<usize>("").unwrap().is_empty());
        assert!(parse_config("novalue").is_err());
        assert!(parse_config("a=1\na=2").is_err());
    }
}
