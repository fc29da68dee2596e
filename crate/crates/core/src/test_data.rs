//! Small built-in datasets used by tests and examples.
//!
//! The 10x4 toy dataset is written with 0-based target ids. Printed
//! discussions of this dataset elsewhere use 1-based item labels, so
//! "item 6" there is target id 5 here.

use crate::model::{QueryVector, TargetFactors};

/// The 10x4 toy factors (row = target, column = dimension).
pub fn toy_factors() -> TargetFactors {
    #[rustfmt::skip]
    let values = vec![
        -0.5, -1.4, -0.8, -1.0,
         0.9, -1.9, -0.3,  0.5,
        -0.8, -0.4, -0.1,  0.9,
        -0.7, -1.7,  0.2, -2.5,
         0.8,  0.2,  0.0,  0.7,
         1.0,  1.6,  0.9, -0.6,
         0.1,  0.4, -0.6, -2.0,
        -2.4,  0.6,  0.4, -0.4,
        -1.6,  0.2,  1.0,  0.3,
         0.0,  1.0, -0.6,  1.4,
    ];
    TargetFactors::dense(10, 4, values).unwrap()
}

/// The query paired with the toy factors; its top-1 target is id 5
/// with score 4.7.
pub fn toy_query() -> QueryVector {
    QueryVector::new(vec![0.1, 2.5, 1.0, 0.5]).unwrap()
}

/// Adversarial R=2 instance on which Fagin's random-access phase needs
/// M/2 depth steps while the threshold algorithm stops at depth 2.
///
/// List 1 sorts targets as 0, 1, ..., M-1. List 2 starts M-1, M-2, ...
/// and places target M/2-1 at position M/2, so that is the first target
/// common to both list prefixes. All values are distinct (no ties).
/// The unique top-1 target is id 0. `m` must be even and >= 4.
pub fn adversarial_factors(m: usize) -> TargetFactors {
    assert!(m >= 4 && m % 2 == 0);
    let delta = 1e-7;
    let mut values = vec![0.0; m * 2];

    // t1 strictly decreasing in id.
    values[0] = 1.1;
    for j in 1..m - 1 {
        values[j * 2] = 0.5 - (j - 1) as f64 * delta;
    }
    values[(m - 1) * 2] = 0.1;

    // t2 realizes the list-2 order: position p (1-based) holds id
    // M-1-p for p < M/2, id M/2-1 at p = M/2, then the leftovers
    // in descending id order.
    let mut order: Vec<usize> = Vec::with_capacity(m);
    order.push(m - 1);
    for p in 2..m / 2 {
        order.push(m - p);
    }
    order.push(m / 2 - 1);
    order.push(m / 2);
    for j in (0..m / 2 - 1).rev() {
        order.push(j);
    }
    debug_assert_eq!(order.len(), m);
    values[(m - 1) * 2 + 1] = 1.0;
    for (p, &id) in order.iter().enumerate().skip(1) {
        values[id * 2 + 1] = 0.5 - (p - 1) as f64 * delta;
    }

    TargetFactors::dense(m, 2, values).unwrap()
}

/// The all-ones query used with [`adversarial_factors`].
pub fn adversarial_query() -> QueryVector {
    QueryVector::new(vec![1.0, 1.0]).unwrap()
}
