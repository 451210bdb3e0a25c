//! Problem file format and CSV sample output.
//!
//! A problem file is a JSON object:
//!
//! ```json
//! { "n": 2, "mu": [0, 0], "sigma": [[1, 0], [0, 1]],
//!   "A": [[1, 0]], "b": [0], "C": [[0, 1]], "d": [-1] }
//! ```
//!
//! `A`/`b` and `C`/`d` are optional but must appear in pairs.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::linalg::{Matrix, Vector};
use crate::oracles::ValidationTransform;
use crate::problem::ProblemSpec;
use crate::samples::Samples;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Problem(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, FormatError> {
        let n = self.n;
        if self.mu.len() != n {
            return Err(FormatError::Shape(format!(
                "mu has length {}, expected {n}",
                self.mu.len()
            )));
        }
        let sigma = rows_to_matrix("sigma", &self.sigma, n)?;
        if sigma.nrows() != n {
            return Err(FormatError::Shape(format!(
                "sigma has {} rows, expected {n}",
                sigma.nrows()
            )));
        }
        let inequalities = block("A", "b", self.a.as_deref(), self.b.as_deref(), n)?;
        let equalities = block("C", "d", self.c.as_deref(), self.d.as_deref(), n)?;
        Ok(ProblemSpec::new(
            Vector::from_column_slice(&self.mu),
            sigma,
            inequalities,
            equalities,
        )?)
    }

    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let opt_rows = |m: &Matrix| (m.nrows() > 0).then(|| matrix_to_rows(m));
        let opt_vec = |v: &Vector| (!v.is_empty()).then(|| v.iter().copied().collect());
        Self {
            n: spec.dim(),
            mu: spec.mu().iter().copied().collect(),
            sigma: matrix_to_rows(spec.sigma()),
            a: opt_rows(spec.a()),
            b: opt_vec(spec.b()),
            c: opt_rows(spec.c()),
            d: opt_vec(spec.d()),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, FormatError> {
    ProblemFile::parse(text)?.to_spec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformFile {
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl TransformFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_transform(&self) -> Result<ValidationTransform, FormatError> {
        let n = self.offset.len();
        let t = rows_to_matrix("T", &self.t, n)?;
        Ok(ValidationTransform::new(t, Vector::from_column_slice(&self.offset))?)
    }

    pub fn from_transform(vt: &ValidationTransform) -> Self {
        Self {
            t: matrix_to_rows(vt.t()),
            offset: vt.offset().iter().copied().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn block(
    mat: &str,
    vec: &str,
    rows: Option<&[Vec<f64>]>,
    rhs: Option<&[f64]>,
    n: usize,
) -> Result<Option<(Matrix, Vector)>, FormatError> {
    match (rows, rhs) {
        (None, None) => Ok(None),
        (Some(rows), Some(rhs)) => {
            if rows.len() != rhs.len() {
                return Err(FormatError::Shape(format!(
                    "{mat} has {} rows but {vec} has length {}",
                    rows.len(),
                    rhs.len()
                )));
            }
            Ok(Some((rows_to_matrix(mat, rows, n)?, Vector::from_column_slice(rhs))))
        }
        _ => Err(FormatError::Shape(format!("{mat} and {vec} must be given together"))),
    }
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>], cols: usize) -> Result<Matrix, FormatError> {
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(FormatError::Shape(format!(
            "{name} row {i} has {} entries, expected {cols}",
            row.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Writes samples as CSV with header `x1,...,xn`.
///
/// Values use 17 significant digits so the text round-trips to the same
/// `f64` bits.
pub fn write_csv<W: Write>(samples: &Samples, mut out: W) -> io::Result<()> {
    let header: Vec<String> = (1..=samples.dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in samples.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            write!(line, "{v:.16e}").expect("writing to a String");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Samples, FormatError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FormatError::Shape("empty CSV".into()))?;
    let dim = header.split(',').count();
    let mut samples = Samples::new(dim);
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| FormatError::Shape(format!("row {}: {e}", i + 1)))?;
        if row.len() != dim {
            return Err(FormatError::Shape(format!(
                "row {} has {} fields, expected {dim}",
                i + 1,
                row.len()
            )));
        }
        samples.push(&row);
    }
    Ok(samples)
}
