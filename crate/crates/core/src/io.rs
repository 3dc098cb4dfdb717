//! JSON file formats.
//!
//! A matrix is `{"dim": m, "entries": [[[re, im], …], …]}` in row-major order;
//! a weighted tuple is `{"weights": [...], "matrices": [<matrix>, …]}`.
//! Writers emit every real number with 17 significant digits so files round-trip
//! exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Hermitian, PdMatrix, C64};
use crate::means::{PdTuple, WeightVector};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleDoc {
    weights: Vec<f64>,
    matrices: Vec<MatrixDoc>,
}

impl MatrixDoc {
    fn into_matrix(self) -> Result<CMatrix> {
        if self.dim == 0 {
            return Err(Error::Parse("matrix dimension must be positive".into()));
        }
        if self.entries.len() != self.dim {
            return Err(Error::Parse(format!(
                "expected {} rows, found {}",
                self.dim,
                self.entries.len()
            )));
        }
        if let Some((i, row)) = self
            .entries
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.dim)
        {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                self.dim
            )));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i][j];
            C64::new(re, im)
        }))
    }
}

/// Formats a real number with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    let _ = write!(out, "{{\"dim\": {}, \"entries\": [", m.nrows());
    for i in 0..m.nrows() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = m[(i, j)];
            let _ = write!(out, "[{}, {}]", format_real(z.re), format_real(z.im));
        }
        out.push(']');
    }
    out.push_str("]}");
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    let mut out = String::new();
    write_matrix(&mut out, m);
    out.push('\n');
    out
}

pub fn tuple_to_json(weights: &WeightVector, tuple: &PdTuple) -> String {
    let mut out = String::from("{\"weights\": [");
    let ws: Vec<String> = weights.iter().map(|w| format_real(*w)).collect();
    out.push_str(&ws.join(", "));
    out.push_str("], \"matrices\": [");
    for (k, a) in tuple.iter().enumerate() {
        out.push_str(if k == 0 { "\n  " } else { ",\n  " });
        write_matrix(&mut out, a.matrix());
    }
    out.push_str("\n]}\n");
    out
}

/// Parses a raw square matrix without checking Hermitian symmetry.
pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    serde_json::from_str::<MatrixDoc>(text)?.into_matrix()
}

pub fn pd_from_json(text: &str) -> Result<PdMatrix> {
    PdMatrix::new(Hermitian::new(matrix_from_json(text)?)?)
}

pub fn tuple_from_json(text: &str) -> Result<(WeightVector, PdTuple)> {
    let doc: TupleDoc = serde_json::from_str(text)?;
    if doc.weights.len() != doc.matrices.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: doc.matrices.len(),
            found: doc.weights.len(),
        });
    }
    let items = doc
        .matrices
        .into_iter()
        .map(|m| PdMatrix::new(Hermitian::new(m.into_matrix()?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((WeightVector::new(doc.weights)?, PdTuple::new(items)?))
}

pub fn read_pd(path: &Path) -> Result<PdMatrix> {
    pd_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_tuple(path: &Path) -> Result<(WeightVector, PdTuple)> {
    tuple_from_json(&std::fs::read_to_string(path)?)
}
