//! Matrix and vector I/O: JSON (`{"d": n, "rows": [[...], ...]}`) and
//! headerless CSV. Every float is written with 17 significant digits so
//! documents re-parse to bit-identical values.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::chain::{validate_stochastic, StochasticMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Pretty JSON with floats in `{:.16e}` form.
struct SignificantFormatter<'a>(PrettyFormatter<'a>);

fn write_float<W: ?Sized + Write>(writer: &mut W, value: f64) -> std::io::Result<()> {
    if value.is_finite() {
        write!(writer, "{value:.16e}")
    } else {
        writer.write_all(b"null")
    }
}

impl Formatter for SignificantFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write_float(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write_float(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any document with full-precision floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        SignificantFormatter(PrettyFormatter::new()),
    );
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{cell:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Parses a matrix from JSON (object with `d` and `rows`, or a bare array of
/// rows) or from headerless CSV.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        Ok(serde_json::from_str::<Matrix>(trimmed)?)
    } else if trimmed.starts_with('[') {
        let rows: Vec<Vec<f64>> = serde_json::from_str(trimmed)?;
        Matrix::from_rows(&rows)
    } else {
        Matrix::from_rows(&parse_csv_rows(text)?)
    }
}

/// Parses a vector from a JSON array, a `{"probs": [...]}` object, or a
/// single CSV line.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        #[derive(serde::Deserialize)]
        struct Doc {
            probs: Vec<f64>,
        }
        Ok(serde_json::from_str::<Doc>(trimmed)?.probs)
    } else if trimmed.starts_with('[') {
        Ok(serde_json::from_str(trimmed)?)
    } else {
        let rows = parse_csv_rows(text)?;
        Ok(rows.into_iter().flatten().collect())
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn read_stochastic(path: &Path) -> Result<StochasticMatrix> {
    validate_stochastic(&read_matrix(path)?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vector(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::examples::m2;

    #[test]
    fn json_matrix_shape() {
        let text = to_json_string(m2().matrix()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["d"], 3);
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert!(text.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m =
            Matrix::from_rows(&[[0.1 + 0.2, 1.0 - (0.1 + 0.2)], [1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let back = parse_matrix(&to_json_string(&m).unwrap()).unwrap();
        assert_eq!(m.as_slice(), back.as_slice());
    }

    #[test]
    fn csv_round_trip_and_forms() {
        let m = Matrix::from_rows(&[[0.25, 0.75], [1.0 / 7.0, 6.0 / 7.0]]).unwrap();
        let back = parse_matrix(&matrix_to_csv(&m)).unwrap();
        assert_eq!(m.as_slice(), back.as_slice());
        assert_eq!(parse_matrix("[[0, 1], [1, 0]]").unwrap().dim(), 2);
        assert_eq!(
            parse_vector("0.5, 0.25,0.25\n").unwrap(),
            vec![0.5, 0.25, 0.25]
        );
        assert_eq!(parse_vector("[1, 2]").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn declared_dimension_must_match() {
        let err = parse_matrix(r#"{"d": 3, "rows": [[0, 1], [1, 0]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(parse_matrix("0.5,x\n1,0\n").is_err());
    }
}
