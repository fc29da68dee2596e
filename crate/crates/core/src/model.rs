//! Separable linear relational (SEP-LR) representations and the score
//! function `s(x, y) = u(x)' t(y)`, plus adapters that reduce cosine
//! similarity, low-rank factor models and bilinear pairwise models to
//! `(u, t)` form.

use crate::error::{Error, Result};

/// Plain dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// The M x R target-side representation t(y), dense or sparse.
///
/// Sparse storage keeps only strictly positive entries per target, with
/// dim indices strictly increasing. Signed data must use dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFactors {
    num_targets: usize,
    num_dims: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(Vec<Vec<(u32, f64)>>),
}

impl TargetFactors {
    /// Dense M x R row-major factors. All values must be finite.
    pub fn dense(num_targets: usize, num_dims: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_targets * num_dims {
            return Err(Error::DimensionMismatch {
                expected: num_targets * num_dims,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("target {} dim {}", pos / num_dims.max(1), pos % num_dims.max(1)),
            });
        }
        Ok(TargetFactors {
            num_targets,
            num_dims,
            storage: Storage::Dense(values),
        })
    }

    /// Sparse per-target rows of (dim, value) pairs; values strictly
    /// positive, dims strictly increasing and < num_dims.
    pub fn sparse(num_targets: usize, num_dims: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if rows.len() != num_targets {
            return Err(Error::DimensionMismatch {
                expected: num_targets,
                got: rows.len(),
            });
        }
        for (y, row) in rows.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for &(dim, v) in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        context: format!("target {y} dim {dim}"),
                    });
                }
                if v <= 0.0 {
                    return Err(Error::SparseValue {
                        context: format!("target {y} dim {dim} value {v}"),
                    });
                }
                if dim as usize >= num_dims || prev.is_some_and(|p| dim <= p) {
                    return Err(Error::SparseDims {
                        context: format!("target {y} dim {dim}"),
                    });
                }
                prev = Some(dim);
            }
        }
        Ok(TargetFactors {
            num_targets,
            num_dims,
            storage: Storage::Sparse(rows),
        })
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        TargetFactors::dense(m.rows, m.cols, m.data().to_vec())
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn num_dims(&self) -> usize {
        self.num_dims
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Value t_r(y); zero for entries absent from a sparse row.
    pub fn value(&self, target: u32, dim: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[target as usize * self.num_dims + dim],
            Storage::Sparse(rows) => {
                let row = &rows[target as usize];
                match row.binary_search_by_key(&(dim as u32), |&(d, _)| d) {
                    Ok(i) => row[i].1,
                    Err(_) => 0.0,
                }
            }
        }
    }

    pub fn sparse_row(&self, target: u32) -> Option<&[(u32, f64)]> {
        match &self.storage {
            Storage::Sparse(rows) => Some(&rows[target as usize]),
            Storage::Dense(_) => None,
        }
    }

    /// Dense copy of the same factors; values are carried over bit-exactly.
    pub fn densify(&self) -> TargetFactors {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Sparse(rows) => {
                let mut values = vec![0.0; self.num_targets * self.num_dims];
                for (y, row) in rows.iter().enumerate() {
                    for &(dim, v) in row {
                        values[y * self.num_dims + dim as usize] = v;
                    }
                }
                TargetFactors {
                    num_targets: self.num_targets,
                    num_dims: self.num_dims,
                    storage: Storage::Dense(values),
                }
            }
        }
    }

    /// Keep only the listed targets, renumbering them 0..len-1 in the
    /// given order.
    pub fn subset(&self, targets: &[u32]) -> Result<TargetFactors> {
        for &y in targets {
            if y as usize >= self.num_targets {
                return Err(Error::TargetOutOfRange {
                    target: y,
                    num_targets: self.num_targets,
                });
            }
        }
        match &self.storage {
            Storage::Dense(v) => {
                let mut out = Vec::with_capacity(targets.len() * self.num_dims);
                for &y in targets {
                    let y = y as usize;
                    out.extend_from_slice(&v[y * self.num_dims..(y + 1) * self.num_dims]);
                }
                Ok(TargetFactors {
                    num_targets: targets.len(),
                    num_dims: self.num_dims,
                    storage: Storage::Dense(out),
                })
            }
            Storage::Sparse(rows) => Ok(TargetFactors {
                num_targets: targets.len(),
                num_dims: self.num_dims,
                storage: Storage::Sparse(
                    targets.iter().map(|&y| rows[y as usize].clone()).collect(),
                ),
            }),
        }
    }

    /// s(x, y) without precondition checks; accumulation is strictly
    /// left-to-right over r = 0..R so scores, prefix sums and bounds
    /// stay bit-consistent.
    #[inline]
    pub(crate) fn score_unchecked(&self, u: &QueryVector, target: u32) -> f64 {
        match &self.storage {
            Storage::Dense(v) => {
                let row = &v[target as usize * self.num_dims..(target as usize + 1) * self.num_dims];
                let mut acc = 0.0;
                for (r, &t) in row.iter().enumerate() {
                    acc += u.values[r] * t;
                }
                acc
            }
            Storage::Sparse(rows) => {
                // Absent entries contribute an exact 0, so summing only the
                // stored entries in dim order matches the dense order.
                let mut acc = 0.0;
                for &(dim, t) in &rows[target as usize] {
                    acc += u.values[dim as usize] * t;
                }
                acc
            }
        }
    }
}

/// The R-dimensional query-side representation u(x). Signed values allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector {
    values: Vec<f64>,
}

impl QueryVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("query dim {pos}"),
            });
        }
        Ok(QueryVector { values })
    }

    /// Build from (dim, value) pairs; unnamed dims are zero.
    pub fn from_pairs(num_dims: usize, pairs: &[(u32, f64)]) -> Result<Self> {
        let mut values = vec![0.0; num_dims];
        for &(dim, v) in pairs {
            if dim as usize >= num_dims {
                return Err(Error::DimensionMismatch {
                    expected: num_dims,
                    got: dim as usize + 1,
                });
            }
            values[dim as usize] = v;
        }
        QueryVector::new(values)
    }

    pub fn num_dims(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Weight matrix W of a bilinear pairwise model psi(x)' W phi(y).
#[derive(Debug, Clone)]
pub struct BilinearModel {
    weights: Matrix,
}

impl BilinearModel {
    pub fn new(weights: Matrix) -> Result<Self> {
        if let Some(pos) = weights.data().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("weight entry {pos}"),
            });
        }
        Ok(BilinearModel { weights })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }
}

/// s(x, y) = sum_r u_r t_r(y), accumulated left-to-right in f64.
pub fn score(u: &QueryVector, target: u32, t: &TargetFactors) -> Result<f64> {
    if u.num_dims() != t.num_dims() {
        return Err(Error::DimensionMismatch {
            expected: t.num_dims(),
            got: u.num_dims(),
        });
    }
    if target as usize >= t.num_targets() {
        return Err(Error::TargetOutOfRange {
            target,
            num_targets: t.num_targets(),
        });
    }
    Ok(t.score_unchecked(u, target))
}

fn l2_norm(values: impl Iterator<Item = f64>) -> f64 {
    values.map(|v| v * v).sum::<f64>().sqrt()
}

/// Scale the query and every target row to unit L2 norm so score()
/// equals cosine similarity. Sparse targets stay sparse.
pub fn cosine_adapter(
    raw_query: &[f64],
    raw_targets: &TargetFactors,
) -> Result<(QueryVector, TargetFactors)> {
    if raw_query.len() != raw_targets.num_dims() {
        return Err(Error::DimensionMismatch {
            expected: raw_targets.num_dims(),
            got: raw_query.len(),
        });
    }
    let qn = l2_norm(raw_query.iter().copied());
    if qn == 0.0 {
        return Err(Error::ZeroVector {
            what: "query".to_string(),
        });
    }
    let u = QueryVector::new(raw_query.iter().map(|v| v / qn).collect())?;

    let m = raw_targets.num_targets();
    let r = raw_targets.num_dims();
    let t = match &raw_targets.storage {
        Storage::Dense(v) => {
            let mut out = Vec::with_capacity(v.len());
            for y in 0..m {
                let row = &v[y * r..(y + 1) * r];
                let n = l2_norm(row.iter().copied());
                if n == 0.0 {
                    return Err(Error::ZeroVector {
                        what: format!("target {y}"),
                    });
                }
                out.extend(row.iter().map(|v| v / n));
            }
            TargetFactors::dense(m, r, out)?
        }
        Storage::Sparse(rows) => {
            let mut out = Vec::with_capacity(rows.len());
            for (y, row) in rows.iter().enumerate() {
                let n = l2_norm(row.iter().map(|&(_, v)| v));
                if n == 0.0 {
                    return Err(Error::ZeroVector {
                        what: format!("target {y}"),
                    });
                }
                out.push(row.iter().map(|&(d, v)| (d, v / n)).collect());
            }
            TargetFactors::sparse(m, r, out)?
        }
    };
    Ok((u, t))
}

/// Reduce psi(x)' W phi(y) to SEP-LR form: u = W' psi (length Q) and
/// t(y) = phi(y).
pub fn bilinear_adapter(
    psi: &[f64],
    model: &BilinearModel,
    phi: &Matrix,
) -> Result<(QueryVector, TargetFactors)> {
    let w = model.weights();
    if psi.len() != w.rows {
        return Err(Error::DimensionMismatch {
            expected: w.rows,
            got: psi.len(),
        });
    }
    if phi.cols != w.cols {
        return Err(Error::DimensionMismatch {
            expected: w.cols,
            got: phi.cols,
        });
    }
    let mut u = vec![0.0; w.cols];
    for (i, &p) in psi.iter().enumerate() {
        for j in 0..w.cols {
            u[j] += p * w.get(i, j);
        }
    }
    Ok((QueryVector::new(u)?, TargetFactors::from_matrix(phi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_data::toy_factors;

    #[test]
    fn toy_best_item_scores_4_7() {
        let t = toy_factors();
        let u = QueryVector::new(vec![0.1, 2.5, 1.0, 0.5]).unwrap();
        // 0.1*1.0 + 2.5*1.6 + 1.0*0.9 + 0.5*(-0.6) = 4.7 exactly in f64
        assert_eq!(score(&u, 5, &t).unwrap(), 4.7);
    }

    #[test]
    fn zero_query_scores_zero() {
        let t = toy_factors();
        let u = QueryVector::new(vec![0.0; 4]).unwrap();
        for y in 0..10 {
            assert_eq!(score(&u, y, &t).unwrap(), 0.0);
        }
    }

    #[test]
    fn score_rejects_dimension_mismatch_and_bad_target() {
        let t = toy_factors();
        let u = QueryVector::new(vec![1.0; 3]).unwrap();
        assert!(matches!(
            score(&u, 0, &t),
            Err(Error::DimensionMismatch { .. })
        ));
        let u = QueryVector::new(vec![1.0; 4]).unwrap();
        assert!(matches!(
            score(&u, 10, &t),
            Err(Error::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn score_matches_arbitrary_order_oracle() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r = 8;
            let m = 5;
            let vals: Vec<f64> = (0..m * r).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let t = TargetFactors::dense(m, r, vals.clone()).unwrap();
            let uv: Vec<f64> = (0..r).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let u = QueryVector::new(uv.clone()).unwrap();
            for y in 0..m {
                // oracle sums in reverse order
                let mut oracle = 0.0;
                for rr in (0..r).rev() {
                    oracle += uv[rr] * vals[y * r + rr];
                }
                let got = score(&u, y as u32, &t).unwrap();
                assert!((got - oracle).abs() <= 1e-12, "{got} vs {oracle}");
            }
        }
    }

    #[test]
    fn cosine_adapter_identical_and_orthogonal() {
        let t = TargetFactors::dense(1, 2, vec![3.0, 4.0]).unwrap();
        let (u, tn) = cosine_adapter(&[3.0, 4.0], &t).unwrap();
        assert!((score(&u, 0, &tn).unwrap() - 1.0).abs() <= 1e-12);

        let t = TargetFactors::dense(1, 2, vec![0.0, 1.0]).unwrap();
        let (u, tn) = cosine_adapter(&[1.0, 0.0], &t).unwrap();
        assert_eq!(score(&u, 0, &tn).unwrap(), 0.0);
    }

    #[test]
    fn cosine_adapter_rejects_zero_rows() {
        let t = TargetFactors::dense(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let err = cosine_adapter(&[1.0, 1.0], &t).unwrap_err();
        assert!(err.to_string().contains("target 1"), "{err}");
        let t = TargetFactors::dense(1, 2, vec![1.0, 0.0]).unwrap();
        let err = cosine_adapter(&[0.0, 0.0], &t).unwrap_err();
        assert!(err.to_string().contains("query"), "{err}");
    }

    #[test]
    fn cosine_adapter_keeps_sparse_sparse_and_unit_norm() {
        let rows = vec![vec![(0, 2.0)], vec![(1, 3.0), (2, 4.0)]];
        let t = TargetFactors::sparse(2, 3, rows).unwrap();
        let (_, tn) = cosine_adapter(&[1.0, 1.0, 1.0], &t).unwrap();
        assert!(tn.is_sparse());
        for y in 0..2 {
            let n: f64 = (0..3).map(|r| tn.value(y, r).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn bilinear_adapter_identity_and_zero() {
        let w = Matrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let model = BilinearModel::new(w).unwrap();
        let phi = Matrix::new(1, 2, vec![3.0, 4.0]).unwrap();
        let (u, t) = bilinear_adapter(&[1.0, 2.0], &model, &phi).unwrap();
        assert_eq!(score(&u, 0, &t).unwrap(), 11.0);

        let w = Matrix::zeros(2, 2);
        let model = BilinearModel::new(w).unwrap();
        let (u, t) = bilinear_adapter(&[1.0, 2.0], &model, &phi).unwrap();
        assert_eq!(score(&u, 0, &t).unwrap(), 0.0);
    }

    #[test]
    fn bilinear_adapter_matches_triple_product_oracle() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, q, m) = (3, 4, 10);
        let w: Vec<f64> = (0..p * q).map(|_| rng.random::<f64>() - 0.5).collect();
        let phi: Vec<f64> = (0..m * q).map(|_| rng.random::<f64>() - 0.5).collect();
        let psi: Vec<f64> = (0..p).map(|_| rng.random::<f64>() - 0.5).collect();
        let model = BilinearModel::new(Matrix::new(p, q, w.clone()).unwrap()).unwrap();
        let phi_m = Matrix::new(m, q, phi.clone()).unwrap();
        let (u, t) = bilinear_adapter(&psi, &model, &phi_m).unwrap();
        for y in 0..m {
            let mut oracle = 0.0;
            for i in 0..p {
                for j in 0..q {
                    oracle += psi[i] * w[i * q + j] * phi[y * q + j];
                }
            }
            let got = score(&u, y as u32, &t).unwrap();
            assert!((got - oracle).abs() <= 1e-12);
        }
    }

    #[test]
    fn sparse_rejects_nonpositive_and_unsorted() {
        assert!(TargetFactors::sparse(1, 3, vec![vec![(0, -1.0)]]).is_err());
        assert!(TargetFactors::sparse(1, 3, vec![vec![(0, 0.0)]]).is_err());
        assert!(TargetFactors::sparse(1, 3, vec![vec![(1, 1.0), (1, 2.0)]]).is_err());
        assert!(TargetFactors::sparse(1, 3, vec![vec![(3, 1.0)]]).is_err());
    }
}
