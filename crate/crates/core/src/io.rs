//! Plain CSV matrix files: one line per row, comma-separated decimal fields,
//! no header.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write followed by a read reproduces every entry bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: None,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        let expected = *cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                line,
                column: None,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (k, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: Some(k + 1),
                message: format!("`{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: Some(k + 1),
                    message: format!("`{field}` is not finite"),
                });
            }
            data.push(value);
        }
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(Error::Parse {
            line: 1,
            column: None,
            message: "empty matrix file".into(),
        });
    };
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn format_matrix_csv(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        let fields: Vec<String> = a.row(i).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_csv(&text)
}

pub fn write_matrix_csv(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(format_matrix_csv(a).as_bytes())
        .map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, Distribution, GenSpec};
    use proptest::prelude::*;

    #[test]
    fn identity_round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i2.csv");
        write_matrix_csv(&DenseMatrix::identity(2), &path).unwrap();
        assert_eq!(read_matrix_csv(&path).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn ragged_rows_name_the_line() {
        match parse_matrix_csv("1,2\n3").unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, None);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_field_names_line_and_field() {
        match parse_matrix_csv("1,x\n0,1").unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, Some(2));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let msg = parse_matrix_csv("1,x\n0,1").unwrap_err().to_string();
        assert!(msg.contains("line 1, field 2"), "{msg}");
    }

    #[test]
    fn empty_and_non_finite_inputs_fail() {
        assert!(matches!(
            parse_matrix_csv("").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_matrix_csv("1,NaN\n").unwrap_err(),
            Error::Parse {
                line: 1,
                column: Some(2),
                ..
            }
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_matrix_csv("/nonexistent/matrix.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/matrix.csv"));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(n in 1usize..8, seed in any::<u64>(), scale in -300i32..300) {
            let a = gen_matrix(&GenSpec {
                n, distribution: Distribution::UniformSigned, max_mag: 1.0, seed,
            }).unwrap().scale(10f64.powi(scale)).unwrap();
            let back = parse_matrix_csv(&format_matrix_csv(&a)).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
