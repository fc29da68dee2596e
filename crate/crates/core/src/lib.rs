//! Exact top-K retrieval for separable linear relational models.
//!
//! A SEP-LR model scores a query/target pair as the inner product of an
//! R-dimensional query vector u(x) and target vector t(y). Given the
//! target factors, this crate builds per-dimension sorted lists and
//! answers "which K targets maximize s(x, y)" exactly, usually scoring
//! far fewer than all M targets:
//!
//! ```
//! use seplr::index::build_index;
//! use seplr::model::{QueryVector, TargetFactors};
//! use seplr::retrieval::threshold_topk;
//!
//! let t = TargetFactors::dense(3, 2, vec![1.0, 0.0, 0.5, 0.5, 0.0, 1.0]).unwrap();
//! let idx = build_index(&t);
//! let u = QueryVector::new(vec![2.0, 1.0]).unwrap();
//! let top = threshold_topk(&u, &idx, &t, 1).unwrap();
//! assert_eq!(top.entries[0].target, 0);
//! ```
//!
//! Five algorithms share one result type: `naive` (score everything),
//! `fagin`, `threshold`, `partial` (threshold with early-aborted score
//! computations) and `halted` (threshold under a depth budget, possibly
//! inexact but with reported bounds). All exact variants return the
//! identical entry set under canonical tie-breaking: score descending,
//! target id ascending.

pub mod bench;
pub mod error;
pub mod index;
pub mod ingest;
pub mod model;
pub mod retrieval;
#[doc(hidden)]
pub mod test_data;

pub use error::{Error, Result};
