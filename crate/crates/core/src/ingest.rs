//! Loaders for interaction matrices and dense factor files, plus a
//! rank-R factorizer (block power iteration) so experiments can start
//! from a raw interaction matrix.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Matrix;

/// Explicit feedback stores observed ratings (zero means "no match");
/// implicit feedback stores only positive observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Implicit,
    Explicit,
}

/// Sparse coordinate matrix of (row, col, value) interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub entries: Vec<(u32, u32, f64)>,
    pub feedback: Feedback,
}

impl InteractionMatrix {
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        entries: Vec<(u32, u32, f64)>,
        feedback: Feedback,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(row, col, v) in &entries {
            if row as usize >= num_rows || col as usize >= num_cols {
                return Err(Error::Config(format!(
                    "entry ({row}, {col}) out of range for {num_rows}x{num_cols} matrix"
                )));
            }
            if !seen.insert((row, col)) {
                return Err(Error::Config(format!("duplicate entry ({row}, {col})")));
            }
            if feedback == Feedback::Implicit && v <= 0.0 {
                return Err(Error::Config(format!(
                    "implicit feedback requires positive values, got {v} at ({row}, {col})"
                )));
            }
        }
        Ok(InteractionMatrix {
            num_rows,
            num_cols,
            entries,
            feedback,
        })
    }

    /// Dense copy with missing entries as zeros.
    pub fn densify(&self) -> Matrix {
        let mut m = Matrix::zeros(self.num_rows, self.num_cols);
        for &(row, col, v) in &self.entries {
            m.set(row as usize, col as usize, v);
        }
        m
    }
}

/// Parse the coordinate text format: first line "num_rows num_cols",
/// then "row col value" triples, 0-based indices.
pub fn load_coordinate(path: impl AsRef<Path>) -> Result<InteractionMatrix> {
    load_coordinate_with_feedback(path, Feedback::Explicit)
}

pub fn load_coordinate_with_feedback(
    path: impl AsRef<Path>,
    feedback: Feedback,
) -> Result<InteractionMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.into(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(1, format!("expected \"num_rows num_cols\", got {header:?}")));
    }
    let num_rows: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(1, format!("bad row count {:?}", dims[0])))?;
    let num_cols: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(1, format!("bad col count {:?}", dims[1])))?;

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, format!("expected \"row col value\", got {line:?}")));
        }
        let row: u32 = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad row index {:?}", fields[0])))?;
        let col: u32 = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad col index {:?}", fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad value {:?}", fields[2])))?;
        if row as usize >= num_rows || col as usize >= num_cols {
            return Err(Error::IndexOutOfRange {
                path: path.into(),
                line: lineno,
                row,
                col,
                num_rows: num_rows as u32,
                num_cols: num_cols as u32,
            });
        }
        if !seen.insert((row, col)) {
            return Err(Error::DuplicateEntry {
                path: path.into(),
                line: lineno,
                row,
                col,
            });
        }
        if !value.is_finite() {
            return Err(parse_err(lineno, format!("non-finite value {value}")));
        }
        if feedback == Feedback::Implicit && value <= 0.0 {
            return Err(parse_err(
                lineno,
                format!("implicit feedback requires positive values, got {value}"),
            ));
        }
        entries.push((row, col, value));
    }
    Ok(InteractionMatrix {
        num_rows,
        num_cols,
        entries,
        feedback,
    })
}

pub fn save_coordinate(m: &InteractionMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{} {}\n", m.num_rows, m.num_cols);
    for &(row, col, v) in &m.entries {
        writeln!(out, "{row} {col} {v}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a dense CSV matrix, one row per line.
pub fn load_dense(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.into(),
                    line: i + 1,
                    message: format!("non-numeric field {:?}", f.trim()),
                })
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: i + 1,
                    message: format!("ragged row: {} fields, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    Matrix::new(rows.len(), cols, rows.into_iter().flatten().collect())
}

/// Write a dense matrix as CSV. Values are printed in the shortest
/// form that parses back to the same f64, so a round-trip is lossless.
pub fn save_dense(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..m.rows {
        for j in 0..m.cols {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", m.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Query- and target-side factor matrices sharing rank R.
#[derive(Debug, Clone)]
pub struct FactorPair {
    /// N x R query-side factors with singular values folded in.
    pub u: Matrix,
    /// M x R target-side factors, orthonormal columns.
    pub t: Matrix,
    pub rank: usize,
}

/// Truncated rank-R decomposition of the densified interaction matrix
/// via block power iteration with re-orthonormalization. Deterministic
/// for a fixed seed; missing entries are treated as zeros.
pub fn factorize(
    m: &InteractionMatrix,
    rank: usize,
    iterations: usize,
    seed: u64,
) -> Result<FactorPair> {
    let limit = m.num_rows.min(m.num_cols);
    if rank == 0 || rank > limit {
        return Err(Error::RankTooLarge { rank, limit });
    }
    let iterations = iterations.max(1);
    let a = m.densify();
    let cols = a.cols;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Matrix::zeros(cols, rank);
    for i in 0..cols {
        for j in 0..rank {
            t.set(i, j, rng.random::<f64>() * 2.0 - 1.0);
        }
    }
    orthonormalize(&mut t);

    for _ in 0..iterations {
        // t <- orth(A' (A t))
        let y = mat_mul(&a, &t, false); // rows x rank
        let z = mat_mul(&a, &y, true); // cols x rank
        t = z;
        orthonormalize(&mut t);
    }
    let u = mat_mul(&a, &t, false); // rows x rank, singular values folded in
    Ok(FactorPair { u, t, rank })
}

/// b is (rows x k) when transpose_a is false (computes A b, rows_a x k),
/// or (rows_a x k) when true (computes A' b, cols_a x k).
fn mat_mul(a: &Matrix, b: &Matrix, transpose_a: bool) -> Matrix {
    let k = b.cols;
    if transpose_a {
        let mut out = Matrix::zeros(a.cols, k);
        for i in 0..a.rows {
            for j in 0..a.cols {
                let av = a.get(i, j);
                if av == 0.0 {
                    continue;
                }
                for c in 0..k {
                    out.set(j, c, out.get(j, c) + av * b.get(i, c));
                }
            }
        }
        out
    } else {
        let mut out = Matrix::zeros(a.rows, k);
        for i in 0..a.rows {
            for j in 0..a.cols {
                let av = a.get(i, j);
                if av == 0.0 {
                    continue;
                }
                for c in 0..k {
                    out.set(i, c, out.get(i, c) + av * b.get(j, c));
                }
            }
        }
        out
    }
}

/// Modified Gram-Schmidt over columns. A column that collapses to zero
/// (rank-deficient input) is replaced by a deterministic basis vector
/// orthogonalized against the previous columns.
fn orthonormalize(m: &mut Matrix) {
    let (rows, cols) = (m.rows, m.cols);
    for j in 0..cols {
        for prev in 0..j {
            let dot: f64 = (0..rows).map(|i| m.get(i, j) * m.get(i, prev)).sum();
            for i in 0..rows {
                m.set(i, j, m.get(i, j) - dot * m.get(i, prev));
            }
        }
        let mut norm: f64 = (0..rows).map(|i| m.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm < 1e-12 {
            for basis in 0..rows {
                for i in 0..rows {
                    m.set(i, j, if i == basis { 1.0 } else { 0.0 });
                }
                for prev in 0..j {
                    let dot: f64 = (0..rows).map(|i| m.get(i, j) * m.get(i, prev)).sum();
                    for i in 0..rows {
                        m.set(i, j, m.get(i, j) - dot * m.get(i, prev));
                    }
                }
                norm = (0..rows).map(|i| m.get(i, j).powi(2)).sum::<f64>().sqrt();
                if norm >= 1e-6 {
                    break;
                }
            }
        }
        for i in 0..rows {
            m.set(i, j, m.get(i, j) / norm);
        }
    }
}
