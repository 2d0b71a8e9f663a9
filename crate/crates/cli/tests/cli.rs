// End-to-end tests of the feedsolve binary: flags, file outputs, exit
// codes, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_feedsolve"))
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn summary_value(summary: &str, key: &str) -> String {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in summary:\n{summary}"))
        .to_string()
}

#[test]
fn solve_independent_chain_reports_full_speedup() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"independent\"\nt = 10\nseed = 3\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success(), "{out:?}");
    let summary = read(dir.path(), "summary.txt");
    assert_eq!(summary_value(&summary, "exact_convergence_sweep"), "1");
    assert_eq!(
        summary_value(&summary, "theoretical_speedup"),
        "1.0000000000000000e1"
    );
    let trace = read(dir.path(), "trace.csv");
    assert!(trace.starts_with("sweep,forward_diff,error,cum_sim_time\n"));
}

#[test]
fn solve_markov_chain_reports_no_speedup() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 10\nseed = 3\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success());
    let summary = read(dir.path(), "summary.txt");
    assert_eq!(summary_value(&summary, "exact_convergence_sweep"), "10");
    assert_eq!(
        summary_value(&summary, "theoretical_speedup"),
        "1.0000000000000000e0"
    );
}

#[test]
fn invalid_partition_exits_2_and_names_the_gap() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 5\n[solver]\nmethod = \"jacobi-gs\"\npartition = \"1-3,4-4\"\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("uncovered index 5"), "{err}");
}

#[test]
fn unknown_key_exits_2_and_names_the_key() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 5\nwibble = true\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wibble"));
}

#[test]
fn block_method_without_partition_exits_2() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 5\n",
    );
    let out = run_in(
        dir.path(),
        &["solve", "--spec", &spec, "--method", "gs-jacobi"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partition"));
}

#[test]
fn numeric_overflow_exits_3_with_step_in_summary() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"linear\"\nt = 4\nseed = 1\nmask = \"full\"\nweight_scale = 1e200\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let summary = read(dir.path(), "summary.txt");
    assert_eq!(summary_value(&summary, "status"), "numeric-failure");
    let step: usize = summary_value(&summary, "failed_step").parse().unwrap();
    assert!(step >= 2, "overflow needs one multiplication: {summary}");
}

#[test]
fn identical_spec_and_seed_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"made\"\nt = 64\nseed = 12\n",
    );
    let run = |trace: &str, summary: &str| {
        let out = run_in(
            dir.path(),
            &[
                "solve", "--spec", &spec, "--trace", trace, "--summary", summary,
            ],
        );
        assert!(out.status.success(), "{out:?}");
    };
    run("a.csv", "a.txt");
    run("b.csv", "b.txt");
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("a.txt")).unwrap(),
        std::fs::read(dir.path().join("b.txt")).unwrap()
    );
}

#[test]
fn analyze_reports_depth_and_predictions() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 100\nseed = 0\n",
    );
    let out = run_in(dir.path(), &["analyze", "--spec", &spec]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("dependency_depth = 100"), "{report}");
    assert!(
        report.contains("method = jacobi: iterations = 100"),
        "{report}"
    );

    // adjacent layers keep a dense network at full depth
    let spec = write_spec(
        dir.path(),
        "d.toml",
        "version = 1\n[model]\nkind = \"mlp-dense\"\nt = 6\nseed = 0\n",
    );
    let out = run_in(dir.path(), &["analyze", "--spec", &spec]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("dependency_depth = 6"), "{report}");
}

#[test]
fn bench_writes_one_row_per_method() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"independent\"\nt = 10\nseed = 5\n[bench]\nmethods = [\"feedforward\", \"jacobi\"]\nrepeats = 4\n",
    );
    let out = run_in(dir.path(), &["bench", "--spec", &spec]);
    assert!(out.status.success(), "{out:?}");
    let table = read(dir.path(), "bench.csv");
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(
        rows[0],
        "method,sweeps_mean,sweeps_std,sim_time,theoretical_speedup"
    );
    assert!(rows[1].starts_with("feedforward,1.0000000000000000e1,"));
    assert!(rows[2].starts_with("jacobi,1.0000000000000000e0,0.0000000000000000e0,"));
    assert_eq!(rows.len(), 3);

    // a single repeat still produces a zero standard deviation
    let out = run_in(dir.path(), &["bench", "--spec", &spec, "--repeats", "1"]);
    assert!(out.status.success());
    let table = read(dir.path(), "bench.csv");
    assert!(table.lines().nth(1).unwrap().contains(",0.0000000000000000e0,"));
}

#[test]
fn cached_feedforward_charges_the_serial_lane() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 3\nseed = 1\n[solver]\nmethod = \"feedforward-cached\"\n[cost]\nparallel = [2.0, 1.0, 1.0]\nserial = [1.0, 1.0, 1.0]\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success(), "{out:?}");
    let summary = read(dir.path(), "summary.txt");
    assert_eq!(summary_value(&summary, "sim_time"), "3.0000000000000000e0");
    assert_eq!(
        summary_value(&summary, "sim_time_feedforward"),
        "4.0000000000000000e0"
    );
    assert_eq!(
        summary_value(&summary, "sim_time_feedforward_cached"),
        "3.0000000000000000e0"
    );
}

#[test]
fn jacobi_gs_solves_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 6\nseed = 2\n[solver]\nmethod = \"jacobi-gs\"\nblock_size = 3\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success(), "{out:?}");
    let summary = read(dir.path(), "summary.txt");
    // two blocks of three markov states converge in two outer sweeps
    assert_eq!(summary_value(&summary, "exact_convergence_sweep"), "2");
    assert_eq!(summary_value(&summary, "partition"), "1-3,4-6");
    assert_eq!(
        summary_value(&summary, "theoretical_speedup"),
        "3.0000000000000000e0"
    );
}

#[test]
fn disabling_ground_truth_empties_error_column() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 4\nseed = 2\n[solver]\nground_truth = false\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success());
    let trace = read(dir.path(), "trace.csv");
    for row in trace.lines().skip(1) {
        assert_eq!(row.split(',').nth(2), Some(""), "{row}");
    }
    let summary = read(dir.path(), "summary.txt");
    assert!(!summary.contains("exact_convergence_sweep"), "{summary}");
    // without ground truth the executed sweeps stand in for convergence
    assert_eq!(summary_value(&summary, "method_iterations"), "4");
}

#[test]
fn bench_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"linear\"\nt = 12\nseed = 7\nmask = \"random:0.4\"\n[bench]\nmethods = [\"feedforward\", \"feedforward-cached\", \"jacobi\"]\nrepeats = 6\n",
    );
    let run = |name: &str| {
        let out = run_in(
            dir.path(),
            &["bench", "--spec", &spec, "--summary", name],
        );
        assert!(out.status.success(), "{out:?}");
        std::fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn trace_ends_at_tolerance_or_cap() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 12\nseed = 8\n[solver]\nepsilon = 1e-3\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec]);
    assert!(out.status.success());
    let trace = read(dir.path(), "trace.csv");
    let rows: Vec<&str> = trace.lines().skip(1).collect();
    let last_fd: f64 = rows.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(
        last_fd < 1e-3 || rows.len() == 12,
        "last fd {last_fd} with {} rows",
        rows.len()
    );
}

#[test]
fn unknown_method_flag_exits_2() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "version = 1\n[model]\nkind = \"markov\"\nt = 5\n",
    );
    let out = run_in(dir.path(), &["solve", "--spec", &spec, "--method", "sor"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sor"));
}
