//! Controlled experiments comparing the algorithms across M, R, K and
//! sparsity, emitting CSV rows with per-query counters.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Normal};

use crate::error::{Error, Result};
use crate::index::build_index;
use crate::ingest::load_dense;
use crate::model::{Matrix, QueryVector, TargetFactors};
use crate::retrieval::{
    fagin_topk, halted_threshold_topk, naive_topk, partial_threshold_topk, threshold_topk,
    TopKResult,
};

pub const CSV_HEADER: &str =
    "dataset,M,R,K,fraction,algorithm,query_idx,full_scores,partial_terms,depth,relative_scores,wall_ns";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticDistribution {
    /// Standard normal, dense signed factors.
    Gaussian,
    /// Uniform non-negative factors; eligible for sparse storage.
    UniformNonneg,
    /// Exponential(1) factors with zeros; the default sparse choice.
    Exponential,
}

impl fmt::Display for SyntheticDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticDistribution::Gaussian => "gaussian",
            SyntheticDistribution::UniformNonneg => "uniform-nonneg",
            SyntheticDistribution::Exponential => "exponential",
        })
    }
}

impl FromStr for SyntheticDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SyntheticDistribution::Gaussian),
            "uniform-nonneg" => Ok(SyntheticDistribution::UniformNonneg),
            "exponential" => Ok(SyntheticDistribution::Exponential),
            other => Err(Error::Config(format!("unknown distribution {other:?}"))),
        }
    }
}

/// Elementwise transform applied to file-loaded factor values. Real
/// interaction data is often heavy-tailed; whether a plain or shifted
/// logarithm fits better is dataset-specific, so both are offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueTransform {
    #[default]
    None,
    /// ln(v); requires strictly positive values.
    Log,
    /// ln(1 + v); requires values > -1.
    Log1p,
}

impl fmt::Display for ValueTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueTransform::None => "none",
            ValueTransform::Log => "log",
            ValueTransform::Log1p => "log1p",
        })
    }
}

impl FromStr for ValueTransform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ValueTransform::None),
            "log" => Ok(ValueTransform::Log),
            "log1p" => Ok(ValueTransform::Log1p),
            other => Err(Error::Config(format!("unknown transform {other:?}"))),
        }
    }
}

fn apply_transform(m: &mut Matrix, transform: ValueTransform, what: &str) -> Result<()> {
    let f: fn(f64) -> f64 = match transform {
        ValueTransform::None => return Ok(()),
        ValueTransform::Log => f64::ln,
        ValueTransform::Log1p => f64::ln_1p,
    };
    for i in 0..m.rows {
        for j in 0..m.cols {
            let v = f(m.get(i, j));
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "transform {transform} undefined for {what} value {}",
                    m.get(i, j)
                )));
            }
            m.set(i, j, v);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchAlgorithm {
    Naive,
    Fagin,
    Threshold,
    Partial,
    Halted,
}

impl fmt::Display for BenchAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchAlgorithm::Naive => "naive",
            BenchAlgorithm::Fagin => "fagin",
            BenchAlgorithm::Threshold => "threshold",
            BenchAlgorithm::Partial => "partial",
            BenchAlgorithm::Halted => "halted",
        })
    }
}

impl FromStr for BenchAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(BenchAlgorithm::Naive),
            "fagin" => Ok(BenchAlgorithm::Fagin),
            "threshold" => Ok(BenchAlgorithm::Threshold),
            "partial" => Ok(BenchAlgorithm::Partial),
            "halted" => Ok(BenchAlgorithm::Halted),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum DatasetSpec {
    Synthetic {
        distribution: SyntheticDistribution,
        num_targets: usize,
        num_dims: usize,
        /// Fraction of entries forced to zero, in [0, 1). Positive
        /// sparsity stores the factors sparse (non-negative
        /// distributions only).
        sparsity: f64,
    },
    Files {
        factors_u: String,
        factors_t: String,
    },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub dataset: DatasetSpec,
    pub k_values: Vec<usize>,
    pub algorithms: Vec<BenchAlgorithm>,
    pub queries_per_cell: usize,
    pub seed: u64,
    pub fractions: Vec<f64>,
    /// Depth budget for the halted algorithm.
    pub halted_budget: usize,
    /// Applied to file-loaded factor values; rejected for synthetic.
    pub transform: ValueTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub dataset: String,
    pub num_targets: usize,
    pub num_dims: usize,
    pub k: usize,
    pub fraction: f64,
    pub algorithm: String,
    pub query_idx: usize,
    pub full_scores: u64,
    pub partial_terms: u64,
    pub depth: u64,
    pub relative_scores: f64,
    pub wall_ns: u64,
}

/// Parse the flat `key = value` config format; list values are
/// comma-separated. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<BenchConfig> {
    let mut dataset = "synthetic".to_string();
    let mut distribution = SyntheticDistribution::Gaussian;
    let mut m = 1000usize;
    let mut r = 5usize;
    let mut sparsity = 0.0f64;
    let mut factors_u = None;
    let mut factors_t = None;
    let mut k_values = vec![1usize];
    let mut algorithms = vec![BenchAlgorithm::Naive, BenchAlgorithm::Threshold];
    let mut queries = 10usize;
    let mut seed = 42u64;
    let mut fractions = vec![1.0f64];
    let mut halted_budget = 100usize;
    let mut transform = ValueTransform::None;

    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| Error::Config(format!("line {}: bad {what} {value:?}", i + 1));
        match key {
            "dataset" => dataset = value.to_string(),
            "distribution" => distribution = value.parse()?,
            "m" => m = value.parse().map_err(|_| bad("m"))?,
            "r" => r = value.parse().map_err(|_| bad("r"))?,
            "sparsity" => sparsity = value.parse().map_err(|_| bad("sparsity"))?,
            "factors_u" => factors_u = Some(value.to_string()),
            "factors_t" => factors_t = Some(value.to_string()),
            "k" => {
                k_values = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad("k")))
                    .collect::<Result<_>>()?
            }
            "algorithms" => {
                algorithms = value
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<Result<_>>()?
            }
            "queries" => queries = value.parse().map_err(|_| bad("queries"))?,
            "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
            "fractions" => {
                fractions = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad("fractions")))
                    .collect::<Result<_>>()?
            }
            "budget" => halted_budget = value.parse().map_err(|_| bad("budget"))?,
            "transform" => transform = value.parse()?,
            other => return Err(Error::Config(format!("line {}: unknown key {other:?}", i + 1))),
        }
    }

    let dataset = match dataset.as_str() {
        "synthetic" => DatasetSpec::Synthetic {
            distribution,
            num_targets: m,
            num_dims: r,
            sparsity,
        },
        "files" => DatasetSpec::Files {
            factors_u: factors_u.ok_or_else(|| Error::Config("dataset = files requires factors_u".into()))?,
            factors_t: factors_t.ok_or_else(|| Error::Config("dataset = files requires factors_t".into()))?,
        },
        other => return Err(Error::Config(format!("unknown dataset {other:?}"))),
    };

    let cfg = BenchConfig {
        dataset,
        k_values,
        algorithms,
        queries_per_cell: queries,
        seed,
        fractions,
        halted_budget,
        transform,
    };
    validate_config(&cfg)?;
    Ok(cfg)
}

fn validate_config(cfg: &BenchConfig) -> Result<()> {
    if cfg.k_values.is_empty() || cfg.k_values.iter().any(|&k| k == 0) {
        return Err(Error::Config("k values must be positive".into()));
    }
    if cfg.queries_per_cell == 0 {
        return Err(Error::Config("queries must be positive".into()));
    }
    if cfg.algorithms.is_empty() {
        return Err(Error::Config("algorithms must be non-empty".into()));
    }
    if cfg.fractions.is_empty() || cfg.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config("fractions must lie in (0, 1]".into()));
    }
    if cfg.halted_budget == 0 {
        return Err(Error::Config("budget must be positive".into()));
    }
    if matches!(cfg.dataset, DatasetSpec::Synthetic { .. })
        && cfg.transform != ValueTransform::None
    {
        return Err(Error::Config(
            "transform applies only to dataset = files".into(),
        ));
    }
    if let DatasetSpec::Synthetic {
        distribution,
        num_targets,
        num_dims,
        sparsity,
    } = &cfg.dataset
    {
        if *num_targets == 0 || *num_dims == 0 {
            return Err(Error::Config("m and r must be positive".into()));
        }
        if !(0.0..1.0).contains(sparsity) {
            return Err(Error::Config("sparsity must lie in [0, 1)".into()));
        }
        if *sparsity > 0.0 && *distribution == SyntheticDistribution::Gaussian {
            return Err(Error::Config(
                "sparse storage requires a non-negative distribution".into(),
            ));
        }
    }
    Ok(())
}

/// Sample synthetic target factors. Positive sparsity yields sparse
/// storage (non-negative distributions only).
pub fn synthetic_factors(
    distribution: SyntheticDistribution,
    num_targets: usize,
    num_dims: usize,
    sparsity: f64,
    rng: &mut ChaCha8Rng,
) -> TargetFactors {
    if sparsity > 0.0 {
        let mut rows = Vec::with_capacity(num_targets);
        for _ in 0..num_targets {
            let mut row = Vec::new();
            for dim in 0..num_dims as u32 {
                if rng.random::<f64>() < sparsity {
                    continue;
                }
                let v = sample_positive(distribution, rng);
                row.push((dim, v));
            }
            rows.push(row);
        }
        TargetFactors::sparse(num_targets, num_dims, rows).unwrap()
    } else {
        let values = (0..num_targets * num_dims)
            .map(|_| sample_value(distribution, rng))
            .collect();
        TargetFactors::dense(num_targets, num_dims, values).unwrap()
    }
}

/// Sample a synthetic query from the same distribution family.
pub fn synthetic_query(
    distribution: SyntheticDistribution,
    num_dims: usize,
    rng: &mut ChaCha8Rng,
) -> QueryVector {
    QueryVector::new((0..num_dims).map(|_| sample_value(distribution, rng)).collect()).unwrap()
}

fn sample_value(distribution: SyntheticDistribution, rng: &mut ChaCha8Rng) -> f64 {
    match distribution {
        SyntheticDistribution::Gaussian => Normal::new(0.0, 1.0).unwrap().sample(rng),
        SyntheticDistribution::UniformNonneg => rng.random::<f64>(),
        SyntheticDistribution::Exponential => Exp::new(1.0).unwrap().sample(rng),
    }
}

fn sample_positive(distribution: SyntheticDistribution, rng: &mut ChaCha8Rng) -> f64 {
    let v = sample_value(distribution, rng).abs();
    if v > 0.0 {
        v
    } else {
        f64::MIN_POSITIVE
    }
}

fn run_algorithm(
    algo: BenchAlgorithm,
    u: &QueryVector,
    idx: &crate::index::SortedIndex,
    t: &TargetFactors,
    k: usize,
    budget: usize,
) -> Result<TopKResult> {
    match algo {
        BenchAlgorithm::Naive => naive_topk(u, t, k),
        BenchAlgorithm::Fagin => fagin_topk(u, idx, t, k),
        BenchAlgorithm::Threshold => threshold_topk(u, idx, t, k),
        BenchAlgorithm::Partial => partial_threshold_topk(u, idx, t, k),
        BenchAlgorithm::Halted => halted_threshold_topk(u, idx, t, k, budget),
    }
}

/// Run every (fraction, K, algorithm, query) cell of the config.
/// Deterministic counters for a fixed seed; wall times vary.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    validate_config(cfg)?;
    let mut base_rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (dataset_name, base_factors, queries): (String, TargetFactors, Vec<QueryVector>) =
        match &cfg.dataset {
            DatasetSpec::Synthetic {
                distribution,
                num_targets,
                num_dims,
                sparsity,
            } => {
                let t = synthetic_factors(*distribution, *num_targets, *num_dims, *sparsity, &mut base_rng);
                let queries = (0..cfg.queries_per_cell)
                    .map(|_| synthetic_query(*distribution, *num_dims, &mut base_rng))
                    .collect();
                (distribution.to_string(), t, queries)
            }
            DatasetSpec::Files {
                factors_u,
                factors_t,
            } => {
                let mut u = load_dense(factors_u)?;
                let mut t = load_dense(factors_t)?;
                apply_transform(&mut u, cfg.transform, "factors_u")?;
                apply_transform(&mut t, cfg.transform, "factors_t")?;
                if u.cols != t.cols {
                    return Err(Error::DimensionMismatch {
                        expected: t.cols,
                        got: u.cols,
                    });
                }
                if u.rows < cfg.queries_per_cell {
                    return Err(Error::Config(format!(
                        "factors_u has {} rows, need {} queries",
                        u.rows, cfg.queries_per_cell
                    )));
                }
                let queries = (0..cfg.queries_per_cell)
                    .map(|i| QueryVector::new(u.row(i).to_vec()).unwrap())
                    .collect();
                ("files".to_string(), TargetFactors::from_matrix(&t)?, queries)
            }
        };

    let m = base_factors.num_targets();
    let mut records = Vec::new();
    for &fraction in &cfg.fractions {
        let keep = ((fraction * m as f64).round() as usize).clamp(1, m);
        let mut ids: Vec<u32> = (0..m as u32).collect();
        ids.shuffle(&mut base_rng);
        ids.truncate(keep);
        ids.sort_unstable();
        let t = base_factors.subset(&ids)?;
        let idx = build_index(&t);

        for &k in &cfg.k_values {
            for &algo in &cfg.algorithms {
                for (query_idx, u) in queries.iter().enumerate() {
                    let res = run_algorithm(algo, u, &idx, &t, k, cfg.halted_budget)?;
                    records.push(BenchRecord {
                        dataset: dataset_name.clone(),
                        num_targets: keep,
                        num_dims: t.num_dims(),
                        k,
                        fraction,
                        algorithm: algo.to_string(),
                        query_idx,
                        full_scores: res.stats.full_scores_computed,
                        partial_terms: res.stats.partial_terms_computed,
                        depth: res.stats.depth_reached,
                        relative_scores: res.stats.full_scores_computed as f64 / keep as f64,
                        wall_ns: res.stats.wall_time_ns,
                    });
                }
            }
        }
    }
    Ok(records)
}

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for rec in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            rec.dataset,
            rec.num_targets,
            rec.num_dims,
            rec.k,
            rec.fraction,
            rec.algorithm,
            rec.query_idx,
            rec.full_scores,
            rec.partial_terms,
            rec.depth,
            rec.relative_scores,
            rec.wall_ns
        )
        .unwrap();
    }
    out
}

/// Write one header row then one row per record.
pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> BenchConfig {
        BenchConfig {
            dataset: DatasetSpec::Synthetic {
                distribution: SyntheticDistribution::Gaussian,
                num_targets: 1000,
                num_dims: 5,
                sparsity: 0.0,
            },
            k_values: vec![1],
            algorithms: vec![BenchAlgorithm::Threshold],
            queries_per_cell: 4,
            seed: 42,
            fractions: vec![1.0],
            halted_budget: 100,
            transform: ValueTransform::None,
        }
    }

    #[test]
    fn transform_applies_to_file_datasets() {
        let dir = tempfile::tempdir().unwrap();
        let up = dir.path().join("u.csv");
        let tp = dir.path().join("t.csv");
        fs::write(&up, "1.0,2.0\n3.0,4.0\n").unwrap();
        fs::write(&tp, "1.0,7.0\n").unwrap();
        let cfg = BenchConfig {
            dataset: DatasetSpec::Files {
                factors_u: up.to_str().unwrap().into(),
                factors_t: tp.to_str().unwrap().into(),
            },
            k_values: vec![1],
            algorithms: vec![BenchAlgorithm::Naive],
            queries_per_cell: 1,
            seed: 1,
            fractions: vec![1.0],
            halted_budget: 100,
            transform: ValueTransform::Log1p,
        };
        // naive on one target: the single score is u(0) . log1p(t(0))
        let records = run_bench(&cfg).unwrap();
        assert_eq!(records.len(), 1);
        // log of a zero value is rejected
        fs::write(&tp, "0.0,7.0\n").unwrap();
        let cfg = BenchConfig {
            transform: ValueTransform::Log,
            ..cfg
        };
        assert!(run_bench(&cfg).is_err());
    }

    #[test]
    fn transform_rejected_for_synthetic() {
        let cfg = BenchConfig {
            transform: ValueTransform::Log,
            ..small_cfg()
        };
        assert!(run_bench(&cfg).is_err());
        assert!(parse_config("transform = log\n").is_err());
        assert!(parse_config("transform = banana\n").is_err());
    }

    #[test]
    fn relative_scores_bounded() {
        let records = run_bench(&small_cfg()).unwrap();
        assert_eq!(records.len(), 4);
        for rec in &records {
            assert!(rec.relative_scores > 0.0 && rec.relative_scores <= 1.0);
        }
    }

    #[test]
    fn deterministic_counters_for_fixed_seed() {
        let a = run_bench(&small_cfg()).unwrap();
        let b = run_bench(&small_cfg()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            let strip = |r: &BenchRecord| {
                let mut r = r.clone();
                r.wall_ns = 0;
                r
            };
            assert_eq!(strip(x), strip(y));
        }
    }

    #[test]
    fn k_trend_small_top_is_cheaper() {
        let mut cfg = small_cfg();
        cfg.dataset = DatasetSpec::Synthetic {
            distribution: SyntheticDistribution::Gaussian,
            num_targets: 10_000,
            num_dims: 5,
            sparsity: 0.0,
        };
        cfg.k_values = vec![1, 50];
        cfg.queries_per_cell = 5;
        let records = run_bench(&cfg).unwrap();
        let mean = |k: usize| {
            let rs: Vec<f64> = records
                .iter()
                .filter(|r| r.k == k)
                .map(|r| r.relative_scores)
                .collect();
            rs.iter().sum::<f64>() / rs.len() as f64
        };
        assert!(mean(1) < mean(50), "{} vs {}", mean(1), mean(50));
    }

    #[test]
    fn csv_shape() {
        let records = run_bench(&small_cfg()).unwrap();
        let csv = records_to_csv(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(records_to_csv(&[]).lines().count(), 1);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 12);
        }
    }

    #[test]
    fn csv_round_trips_through_generic_parser() {
        let mut cfg = small_cfg();
        cfg.algorithms = vec![BenchAlgorithm::Naive, BenchAlgorithm::Threshold];
        cfg.k_values = vec![1, 10];
        let records = run_bench(&cfg).unwrap();
        let csv = records_to_csv(&records);
        for (line, rec) in csv.lines().skip(1).zip(&records) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0], rec.dataset);
            assert_eq!(f[1].parse::<usize>().unwrap(), rec.num_targets);
            assert_eq!(f[3].parse::<usize>().unwrap(), rec.k);
            assert_eq!(f[4].parse::<f64>().unwrap(), rec.fraction);
            assert_eq!(f[5], rec.algorithm);
            assert_eq!(f[7].parse::<u64>().unwrap(), rec.full_scores);
            assert_eq!(f[10].parse::<f64>().unwrap(), rec.relative_scores);
            assert_eq!(f[11].parse::<u64>().unwrap(), rec.wall_ns);
        }
    }

    #[test]
    fn config_parsing_and_rejection() {
        let cfg = parse_config(
            "dataset = synthetic\ndistribution = uniform-nonneg\nm = 100\nr = 4\n\
             sparsity = 0.5\nk = 1, 5\nalgorithms = naive, threshold\nqueries = 2\n\
             seed = 7\nfractions = 0.1, 0.5, 1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.k_values, vec![1, 5]);
        assert_eq!(cfg.fractions, vec![0.1, 0.5, 1.0]);
        assert_eq!(cfg.seed, 7);

        assert!(parse_config("bogus = 1\n").is_err());
        assert!(parse_config("fractions = 0.0\n").is_err());
        assert!(parse_config("k = 0\n").is_err());
        // gaussian cannot be stored sparse
        assert!(parse_config("distribution = gaussian\nsparsity = 0.5\n").is_err());
    }

    #[test]
    fn partial_never_exceeds_full_work_in_records() {
        let mut cfg = small_cfg();
        cfg.algorithms = vec![BenchAlgorithm::Fagin, BenchAlgorithm::Threshold];
        cfg.k_values = vec![3];
        let records = run_bench(&cfg).unwrap();
        for q in 0..cfg.queries_per_cell {
            let get = |a: &str| {
                records
                    .iter()
                    .find(|r| r.algorithm == a && r.query_idx == q)
                    .unwrap()
                    .full_scores
            };
            assert!(get("threshold") <= get("fagin"));
            assert!(get("fagin") <= 1000);
        }
    }
}
