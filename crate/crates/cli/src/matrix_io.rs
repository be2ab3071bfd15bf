//! Matrix files: a JSON array of rows, each entry a real number or an
//! `[re, im]` pair.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use specshift::{ComplexMatrix, HermitianOperator};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<Entry>> = serde_json::from_str(text).map_err(|e| CliError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Invalid {
            field: "matrix".into(),
            message: "needs at least one row".into(),
        });
    }
    let cols = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(CliError::Invalid {
            field: format!("matrix row {i}"),
            message: format!("has {} entries, expected {cols}", rows[i].len()),
        });
    }
    let data = rows.into_iter().flatten().map(Entry::value).collect();
    Ok(ComplexMatrix::new(n, cols, data)?)
}

pub fn read_hermitian(path: &Path) -> Result<HermitianOperator, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let matrix = parse_matrix(&text).map_err(|e| e.in_file(path))?;
    HermitianOperator::new(matrix).map_err(|e| CliError::from(e).in_file(path))
}

/// Row-major rows with real entries written as numbers.
pub fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Entry>> {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m[(r, c)];
                    if z.im == 0.0 {
                        Entry::Real(z.re)
                    } else {
                        Entry::Complex([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}
