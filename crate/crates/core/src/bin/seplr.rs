//! Command-line surface for building indices, running queries,
//! factorizing interaction matrices and running benchmarks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use seplr::bench::{emit_csv, parse_config, run_bench};
use seplr::index::{build_index, SortedIndex};
use seplr::ingest::{factorize, load_coordinate, load_dense, save_dense};
use seplr::model::{QueryVector, TargetFactors};
use seplr::retrieval::{
    fagin_topk, halted_threshold_topk, naive_topk, partial_threshold_topk, threshold_topk,
    TopKResult,
};
use seplr::Error;

const FACTORIZE_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "seplr", version, about = "Exact top-K retrieval for SEP-LR models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a sorted-list index from a factors file.
    BuildIndex {
        /// Target factors: dense CSV, or coordinate text with --sparse.
        #[arg(long)]
        factors: PathBuf,
        /// Output index file.
        #[arg(long)]
        out: PathBuf,
        /// Treat the factors file as a sparse coordinate matrix
        /// (targets x dims, non-negative values).
        #[arg(long)]
        sparse: bool,
    },
    /// Run a top-K query against an index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Factors file matching the index (dense CSV, or coordinate
        /// text when the index is sparse).
        #[arg(long)]
        factors: PathBuf,
        /// Inline comma-separated values, or a path to a one-row CSV.
        #[arg(long)]
        query: String,
        #[arg(long)]
        k: usize,
        /// One of: naive, fagin, threshold, partial, halted.
        #[arg(long)]
        algo: String,
        /// Depth budget (halted only).
        #[arg(long)]
        budget: Option<usize>,
        /// Print a trailing stats line.
        #[arg(long)]
        stats: bool,
    },
    /// Run a benchmark config and write CSV records.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factorize a coordinate interaction matrix into rank-R factors.
    Factorize {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        out_u: PathBuf,
        #[arg(long)]
        out_t: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::FaginSparseIndex => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BuildIndex {
            factors,
            out,
            sparse,
        } => {
            let t = load_factors(&factors, sparse)?;
            let started = Instant::now();
            let idx = build_index(&t);
            let build_ns = started.elapsed().as_nanos();
            idx.save(&out)?;
            println!(
                "M={} R={} build_ns={}",
                idx.num_targets(),
                idx.num_dims(),
                build_ns
            );
            Ok(())
        }
        Command::Query {
            index,
            factors,
            query,
            k,
            algo,
            budget,
            stats,
        } => {
            let idx = SortedIndex::load(&index)?;
            let t = load_factors(&factors, idx.is_sparse())?;
            let u = parse_query(&query, idx.num_dims())?;
            let res = run_query(&algo, &u, &idx, &t, k, budget)?;
            for (rank, entry) in res.entries.iter().enumerate() {
                println!("{},{},{}", rank + 1, entry.target, entry.score);
            }
            if stats {
                let s = &res.stats;
                println!(
                    "stats: full_scores={} partial_terms={} sorted_accesses={} depth={} heap_updates={} wall_ns={}",
                    s.full_scores_computed,
                    s.partial_terms_computed,
                    s.sorted_accesses,
                    s.depth_reached,
                    s.heap_updates,
                    s.wall_time_ns
                );
            }
            if !res.exact {
                eprintln!(
                    "warning: result is not exact (lower bound {}, upper bound {})",
                    res.lower_bound, res.upper_bound
                );
            }
            Ok(())
        }
        Command::Bench { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let cfg = parse_config(&text)?;
            let records = run_bench(&cfg)?;
            emit_csv(&records, &out)?;
            println!("wrote {} records", records.len());
            Ok(())
        }
        Command::Factorize {
            matrix,
            rank,
            iters,
            out_u,
            out_t,
        } => {
            let m = load_coordinate(&matrix)?;
            let pair = factorize(&m, rank, iters, FACTORIZE_SEED)?;
            save_dense(&pair.u, &out_u)?;
            save_dense(&pair.t, &out_t)?;
            println!(
                "U: {}x{} -> {}, T: {}x{} -> {}",
                pair.u.rows,
                pair.u.cols,
                out_u.display(),
                pair.t.rows,
                pair.t.cols,
                out_t.display()
            );
            Ok(())
        }
    }
}

fn load_factors(path: &Path, sparse: bool) -> Result<TargetFactors, Error> {
    if sparse {
        let coo = load_coordinate(path)?;
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); coo.num_rows];
        let mut entries = coo.entries;
        entries.sort_by_key(|&(row, col, _)| (row, col));
        for (row, col, v) in entries {
            rows[row as usize].push((col, v));
        }
        TargetFactors::sparse(coo.num_rows, coo.num_cols, rows)
    } else {
        let m = load_dense(path)?;
        TargetFactors::from_matrix(&m)
    }
}

fn parse_query(spec: &str, num_dims: usize) -> Result<QueryVector, Error> {
    let path = Path::new(spec);
    let values: Vec<f64> = if path.is_file() {
        let m = load_dense(path)?;
        if m.rows != 1 {
            return Err(Error::Config(format!(
                "query file must contain exactly one row, got {}",
                m.rows
            )));
        }
        m.row(0).to_vec()
    } else {
        spec.split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad query value {:?}", f.trim())))
            })
            .collect::<Result<_, _>>()?
    };
    if values.len() != num_dims {
        return Err(Error::DimensionMismatch {
            expected: num_dims,
            got: values.len(),
        });
    }
    QueryVector::new(values)
}

fn run_query(
    algo: &str,
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
    budget: Option<usize>,
) -> Result<TopKResult, Error> {
    match algo {
        "naive" => naive_topk(u, t, k),
        "fagin" => fagin_topk(u, idx, t, k),
        "threshold" => threshold_topk(u, idx, t, k),
        "partial" => partial_threshold_topk(u, idx, t, k),
        "halted" => {
            let budget = budget
                .ok_or_else(|| Error::Config("--algo halted requires --budget".into()))?;
            halted_threshold_topk(u, idx, t, k, budget)
        }
        other => Err(Error::Config(format!(
            "unknown algorithm {other:?} (expected naive, fagin, threshold, partial or halted)"
        ))),
    }
}
