//! Shared random-instance generators for the integration suites.
// each suite uses a different subset of the generators
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use seplr::model::{QueryVector, TargetFactors};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense Gaussian M x R factors.
pub fn gen_dense(rng: &mut ChaCha8Rng, m: usize, r: usize) -> TargetFactors {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let values: Vec<f64> = (0..m * r).map(|_| normal.sample(rng)).collect();
    TargetFactors::dense(m, r, values).unwrap()
}

/// Dense Gaussian factors whose per-dimension scale decays
/// geometrically, mimicking the dominant leading dimensions of trained
/// low-rank factor models.
pub fn gen_dense_decaying(rng: &mut ChaCha8Rng, m: usize, r: usize, decay: f64) -> TargetFactors {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let scales: Vec<f64> = (0..r).map(|i| decay.powi(i as i32)).collect();
    let mut values = Vec::with_capacity(m * r);
    for _ in 0..m {
        for &s in &scales {
            values.push(normal.sample(rng) * s);
        }
    }
    TargetFactors::dense(m, r, values).unwrap()
}

/// Query drawn from the same decaying-scale Gaussian as
/// [`gen_dense_decaying`].
pub fn gen_decaying_query(rng: &mut ChaCha8Rng, r: usize, decay: f64) -> QueryVector {
    let normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let values: Vec<f64> = (0..r)
            .map(|i| normal.sample(rng) * decay.powi(i as i32))
            .collect();
        if values.iter().any(|&v| v != 0.0) {
            return QueryVector::new(values).unwrap();
        }
    }
}

/// Sparse non-negative factors with roughly `density` filled entries.
/// Every kept value is strictly positive.
pub fn gen_sparse(rng: &mut ChaCha8Rng, m: usize, r: usize, density: f64) -> TargetFactors {
    let rows: Vec<Vec<(u32, f64)>> = (0..m)
        .map(|_| {
            let mut row = Vec::new();
            for dim in 0..r as u32 {
                if rng.random::<f64>() < density {
                    row.push((dim, rng.random::<f64>() + 1e-3));
                }
            }
            row
        })
        .collect();
    TargetFactors::sparse(m, r, rows).unwrap()
}

/// Gaussian query; always has at least one nonzero weight.
pub fn gen_query(rng: &mut ChaCha8Rng, r: usize) -> QueryVector {
    let normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let values: Vec<f64> = (0..r).map(|_| normal.sample(rng)).collect();
        if values.iter().any(|&v| v != 0.0) {
            return QueryVector::new(values).unwrap();
        }
    }
}

/// Strictly positive query weights (useful on sparse indices when the
/// skip rule should stay out of the picture).
pub fn gen_positive_query(rng: &mut ChaCha8Rng, r: usize) -> QueryVector {
    let values: Vec<f64> = (0..r).map(|_| rng.random::<f64>() + 1e-3).collect();
    QueryVector::new(values).unwrap()
}
