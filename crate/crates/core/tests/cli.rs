//! End-to-end tests for the `seplr` binary.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_seplr");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_toy_factors(path: &Path) {
    // 10x4 toy dataset; row index is the target id
    let csv = "\
-0.5,-1.4,-0.8,-1.0
0.9,-1.9,-0.3,0.5
-0.8,-0.4,-0.1,0.9
-0.7,-1.7,0.2,-2.5
0.8,0.2,0.0,0.7
1.0,1.6,0.9,-0.6
0.1,0.4,-0.6,-2.0
-2.4,0.6,0.4,-0.4
-1.6,0.2,1.0,0.3
0.0,1.0,-0.6,1.4
";
    std::fs::write(path, csv).unwrap();
}

#[test]
fn build_index_and_query_all_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let factors = dir.path().join("toy.csv");
    let index = dir.path().join("toy.slrx");
    write_toy_factors(&factors);

    let out = run(&[
        "build-index",
        "--factors",
        factors.to_str().unwrap(),
        "--out",
        index.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("M=10 R=4"));

    let mut lines = Vec::new();
    for algo in ["naive", "fagin", "threshold", "partial"] {
        let out = run(&[
            "query",
            "--index",
            index.to_str().unwrap(),
            "--factors",
            factors.to_str().unwrap(),
            "--query",
            "0.1,2.5,1,0.5",
            "--k",
            "1",
            "--algo",
            algo,
            "--stats",
        ]);
        assert!(out.status.success(), "{algo}: {out:?}");
        let text = stdout(&out);
        let mut it = text.lines();
        lines.push(it.next().unwrap().to_string());
        let stats = it.next().unwrap();
        assert!(stats.starts_with("stats: full_scores="), "{stats}");
        match algo {
            "naive" => assert!(stats.contains("full_scores=10"), "{stats}"),
            "fagin" => assert!(stats.contains("full_scores=9"), "{stats}"),
            "threshold" => assert!(stats.contains("full_scores=5"), "{stats}"),
            // partial attempts the same 5 targets but may abort
            // mid-computation, so only completed scores are counted
            "partial" => assert!(stats.contains("partial_terms="), "{stats}"),
            _ => unreachable!(),
        }
    }
    // target ids are 0-based, so the best item prints as id 5
    for line in &lines {
        assert_eq!(line, "1,5,4.7");
    }

    // halted with a generous budget matches too, exactly
    let out = run(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--factors",
        factors.to_str().unwrap(),
        "--query",
        "0.1,2.5,1,0.5",
        "--k",
        "1",
        "--algo",
        "halted",
        "--budget",
        "10",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next().unwrap(), "1,5,4.7");
    assert!(out.stderr.is_empty());

    // budget 1 is inexact: result still prints, warning goes to stderr
    let out = run(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--factors",
        factors.to_str().unwrap(),
        "--query",
        "0.1,2.5,1,0.5",
        "--k",
        "1",
        "--algo",
        "halted",
        "--budget",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next().unwrap(), "1,5,4.7");
    assert!(String::from_utf8_lossy(&out.stderr).contains("not exact"));
}

#[test]
fn rebuild_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let factors = dir.path().join("toy.csv");
    write_toy_factors(&factors);
    let a = dir.path().join("a.slrx");
    let b = dir.path().join("b.slrx");
    for out in [&a, &b] {
        let r = run(&[
            "build-index",
            "--factors",
            factors.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn missing_file_exits_one_and_names_path() {
    let out = run(&[
        "build-index",
        "--factors",
        "/nonexistent/factors.csv",
        "--out",
        "/tmp/ignored.slrx",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/factors.csv"));
}

#[test]
fn unknown_flag_exits_one() {
    let out = run(&["query", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fagin_on_sparse_index_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let coo = dir.path().join("m.coo");
    std::fs::write(&coo, "4 3\n0 0 1.5\n1 2 2.0\n2 1 0.5\n3 0 1.0\n").unwrap();
    let index = dir.path().join("sparse.slrx");
    let out = run(&[
        "build-index",
        "--factors",
        coo.to_str().unwrap(),
        "--out",
        index.to_str().unwrap(),
        "--sparse",
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--factors",
        coo.to_str().unwrap(),
        "--query",
        "1,1,1",
        "--k",
        "2",
        "--algo",
        "fagin",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // threshold on the same sparse index works
    let out = run(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--factors",
        coo.to_str().unwrap(),
        "--query",
        "1,1,1",
        "--k",
        "2",
        "--algo",
        "threshold",
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn bench_runs_and_is_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.cfg");
    std::fs::write(
        &cfg,
        "dataset = synthetic\ndistribution = gaussian\nm = 200\nr = 4\nk = 1,3\n\
         algorithms = naive,threshold,partial\nqueries = 2\nseed = 7\n",
    )
    .unwrap();

    let strip_wall = |csv: &str| -> String {
        csv.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };

    let mut runs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_path = dir.path().join(name);
        let out = run(&[
            "bench",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        runs.push(std::fs::read_to_string(&out_path).unwrap());
    }
    let csv = &runs[0];
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "dataset,M,R,K,fraction,algorithm,query_idx,full_scores,partial_terms,depth,relative_scores,wall_ns"
    );
    // 2 K values x 3 algorithms x 2 queries
    assert_eq!(lines.count(), 12);
    assert_eq!(strip_wall(&runs[0]), strip_wall(&runs[1]));
}

#[test]
fn factorize_round_trips_a_rank_one_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let coo = dir.path().join("rank1.coo");
    // rank-1: entry(i, j) = (i+1) * (j+1)
    let mut text = String::from("3 4\n");
    for i in 0..3 {
        for j in 0..4 {
            text.push_str(&format!("{i} {j} {}\n", (i + 1) * (j + 1)));
        }
    }
    std::fs::write(&coo, text).unwrap();

    let u = dir.path().join("u.csv");
    let t = dir.path().join("t.csv");
    let out = run(&[
        "factorize",
        "--matrix",
        coo.to_str().unwrap(),
        "--rank",
        "1",
        "--iters",
        "20",
        "--out-u",
        u.to_str().unwrap(),
        "--out-t",
        t.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let parse = |p: &Path| -> Vec<Vec<f64>> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let um = parse(&u);
    let tm = parse(&t);
    assert_eq!((um.len(), um[0].len()), (3, 1));
    assert_eq!((tm.len(), tm[0].len()), (4, 1));
    for i in 0..3 {
        for j in 0..4 {
            let approx = um[i][0] * tm[j][0];
            let want = ((i + 1) * (j + 1)) as f64;
            assert!(
                (approx - want).abs() < 1e-6,
                "({i},{j}): {approx} vs {want}"
            );
        }
    }
}
