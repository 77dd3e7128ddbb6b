use std::path::Path;
use std::process::{Command, Output};

use admm_mcp::io::{InstanceDocument, SolutionDocument, SWEEP_HEADER, TRACE_HEADER};
use admm_mcp::RunManifest;

fn run(args: &str, cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admm-mcp")).args(args.split_whitespace()).current_dir(cwd).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_writes_a_noiseless_consistent_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("gen --n 8 --m 4 --tau 2 --sigma 0 --seed 1 --out i.json", dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let doc: InstanceDocument = read_json(&dir.path().join("i.json"));
    assert_eq!((doc.version, doc.n, doc.m, doc.tau, doc.seed), (1, 8, 4, 2, 1));
    let x0 = doc.x0.unwrap();
    for i in 0..4 {
        let ax: f64 = (0..8).map(|j| doc.a_row_major[i * 8 + j] * x0[j]).sum();
        assert_eq!(ax, doc.b[i]);
    }
    let manifest: RunManifest = read_json(&dir.path().join("i.json.manifest.json"));
    assert_eq!(manifest.seeds, vec![1]);
}

#[test]
fn gen_rejects_tau_above_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("gen --n 8 --tau 5 --m 4", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("tau <= m"), "{}", text(&out.stderr));
    assert!(!dir.path().join("instance.json").exists());
}

#[test]
fn solve_recovers_an_easy_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run("gen --n 128 --m 64 --tau 4 --sigma 0 --seed 3 --out e.json", d).status.success());
    let out = run("solve --instance e.json --algo admm-mcp --lambda-mode adaptive --out r", d);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("converged: true"), "{stdout}");
    let sol: SolutionDocument = read_json(&d.join("r/solution.json"));
    assert!(sol.rel_err.unwrap() <= 0.01);
    let trace = std::fs::read_to_string(d.join("r/trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER);
    assert_eq!(trace.lines().count() - 1, sol.iterations);
}

#[test]
fn iht_trace_is_bounded_by_max_iter() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run("solve --n 64 --m 32 --tau 3 --sigma 0 --algo iht --max-iter 40 --out r", d);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let trace = std::fs::read_to_string(d.join("r/trace.csv")).unwrap();
    assert!(trace.lines().count() - 1 <= 40);
    // IHT has no lambda column.
    assert!(trace.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn unknown_algorithm_lists_valid_tags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve --algo lasso", dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    for tag in ["admm-mcp", "admm-mcp-exact", "admm-l0", "iht", "niht"] {
        assert!(err.contains(tag), "{err}");
    }
}

#[test]
fn conflicting_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve --rho-mode theory --rho 2", dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run("solve --lambda-mode fixed", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_3_and_keeps_the_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // A matrix with a large spectral norm makes the unit IHT step blow up.
    let doc = InstanceDocument {
        version: 1,
        n: 3,
        m: 2,
        tau: 1,
        sigma: 0.0,
        seed: 0,
        a_row_major: vec![10.0, 10.0, 10.0, 10.0, -10.0, 10.0],
        x0: None,
        b: vec![1.0, 2.0],
    };
    std::fs::write(d.join("bad.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run("solve --instance bad.json --algo iht --out r", d);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    let trace = std::fs::read_to_string(d.join("r/trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
    assert!(d.join("r/manifest.json").exists());
    assert!(!d.join("r/solution.json").exists());
}

#[test]
fn sweep_with_one_trial_on_an_easy_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run("sweep --n 64 --tau 2 --sigma 0 --m-list 32,40 --trials 1 --algos admm-mcp,admm-l0 --out s.csv", d);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[7] == "1"), "{csv}");
    assert!(d.join("s.csv.manifest.json").exists());
}

#[test]
fn replayed_solve_matches_the_original() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = "solve --n 96 --m 40 --tau 3 --seed 17 --algo niht --out a";
    assert!(run(args, d).status.success());
    assert!(run("replay --manifest a/manifest.json --out b", d).status.success());
    for f in ["trace.csv", "solution.json"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let m: RunManifest = read_json(&d.join("b/manifest.json"));
    assert_eq!(m.seeds, vec![17]);
}
