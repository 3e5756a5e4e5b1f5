//! End-to-end tests driving the compiled binary: ingest flags, output
//! determinism, validation exit codes, and benchmark plumbing.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homophily"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Two J nodes joined through one K node: the worked fixture whose
/// same-class z-score is +1/sqrt(2).
fn path_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let nodes = write(dir, "nodes.tsv", "# label\tclass\na\tJ\nb\tJ\nc\tK\n");
    let edges = write(dir, "edges.tsv", "a\tb\nb\tc\n");
    (nodes, edges)
}

#[test]
fn analyze_writes_all_outputs_with_frozen_zscore() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let out_dir = tmp.path().join("out");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));

    for name in ["report.json", "matrices.csv", "heatmap.svg", "z0.svg"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("0.7071067811865476"), "z11 missing");
    assert!(stdout(&run).contains("n=3 m=2 s=2"));
}

#[test]
fn analyze_report_is_byte_identical_across_reruns_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let mut reports = Vec::new();
    for (sub, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out_dir = tmp.path().join(sub);
        let run = bin()
            .arg("analyze")
            .args([&nodes, &edges])
            .args(["--threads", threads])
            .args(["--alpha", "0.05,0.2"])
            .args(["--out".as_ref(), out_dir.as_os_str()])
            .output()
            .unwrap();
        assert!(run.status.success(), "stderr: {}", stderr(&run));
        reports.push(fs::read(out_dir.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1], "rerun changed report.json");
    assert_eq!(reports[0], reports[2], "thread count changed report.json");
}

#[test]
fn analyze_clamp_flag_reaches_the_legend() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let out_dir = tmp.path().join("out");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--clamp", "-100", "100"])
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let svg = fs::read_to_string(out_dir.join("heatmap.svg")).unwrap();
    assert!(svg.contains("clamped to [-100, 100]"));

    let default_dir = tmp.path().join("default");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--out".as_ref(), default_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success());
    let svg = fs::read_to_string(default_dir.join("heatmap.svg")).unwrap();
    assert!(svg.contains("clamped to [-10, 60]"), "default clamp bounds");
}

#[test]
fn analyze_rejects_alpha_outside_unit_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--alpha", "1.5"])
        .args(["--out".as_ref(), tmp.path().join("out").as_os_str()])
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(stderr(&run).contains("alpha"));
}

#[test]
fn ingest_errors_propagate_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = write(tmp.path(), "nodes.tsv", "a\tJ\nbroken-line\nc\tK\n");
    let edges = write(tmp.path(), "edges.tsv", "a\tc\n");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--out".as_ref(), tmp.path().join("out").as_os_str()])
        .output()
        .unwrap();
    assert!(!run.status.success());
    let err = stderr(&run);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("nodes.tsv"), "stderr names the file: {err}");
}

#[test]
fn cutoff_on_weightless_edges_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--cutoff", "700"])
        .args(["--out".as_ref(), tmp.path().join("out").as_os_str()])
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(stderr(&run).contains("no weight column"), "stderr: {}", stderr(&run));
}

#[test]
fn cutoff_and_mutual_only_shape_the_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = write(tmp.path(), "nodes.tsv", "a\tJ\nb\tJ\nc\tK\n");
    // a<->b mutual at high weight; b->c one-way; a->c mutual but under
    // the cutoff in one direction.
    let edges = write(
        tmp.path(),
        "edges.tsv",
        "a\tb\t800\nb\ta\t900\nb\tc\t850\na\tc\t700\nc\ta\t699\n",
    );
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--cutoff", "700", "--mutual-only"])
        .args(["--out".as_ref(), tmp.path().join("out").as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    // c->a dropped by cutoff, so a-c is not mutual; b-c never mutual.
    assert!(stdout(&run).contains("n=2 m=1"), "stdout: {}", stdout(&run));
}

#[test]
fn suffix_merge_and_alias_flags_flow_through() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = write(
        tmp.path(),
        "nodes.tsv",
        "p1_1\tJ\np1_2\tK\nq7\tR\nr9\tJ\n",
    );
    let edges = write(tmp.path(), "edges.tsv", "p1_1\tq7\np1_2\tr9\n");
    let aliases = write(tmp.path(), "aliases.csv", "R,X\n");
    let out_dir = tmp.path().join("out");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--merge-suffix", r"_\d+", "--conflict-class", "X"])
        .args(["--alias-config".as_ref(), aliases.as_os_str()])
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    // p1_1/p1_2 merge to p1 with conflicting classes -> X; q7's R -> X.
    assert!(stdout(&run).contains("n=3 m=2"), "stdout: {}", stdout(&run));
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"X\""));
    assert!(!report.contains("\"R\""));
    assert!(!report.contains("p1_1"));
}

#[test]
fn bucket_config_turns_ages_into_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = write(tmp.path(), "nodes.tsv", "u1\t17\nu2\t17\nu3\t30\nu4\tnone\n");
    let edges = write(tmp.path(), "edges.tsv", "u1\tu2\nu2\tu3\nu3\tu4\n");
    let rule = write(
        tmp.path(),
        "buckets.csv",
        "12,18,C\n18,25,D\n25,40,E\nfallback,X\n",
    );
    let out_dir = tmp.path().join("out");
    let run = bin()
        .arg("analyze")
        .args([&nodes, &edges])
        .args(["--bucket-config".as_ref(), rule.as_os_str()])
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    for class in ["\"C\"", "\"E\"", "\"X\""] {
        assert!(report.contains(class), "missing {class}: {report}");
    }
    assert!(!report.contains("\"17\""), "raw attribute leaked into classes");
}

#[test]
fn validate_exact_passes_and_prints_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let run = bin()
        .arg("validate")
        .args([&nodes, &edges])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let out = stdout(&run);
    assert!(out.contains("exact enumeration over 3 colorings"));
    assert!(out.contains("mean_edges[0][0]"));
    assert!(out.contains("var_isolated[1]"));
    assert!(out.contains("validation passed"));
}

#[test]
fn validate_injected_error_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let run = bin()
        .arg("validate")
        .args([&nodes, &edges])
        .arg("--inject-moment-error")
        .output()
        .unwrap();
    assert!(!run.status.success(), "injection must trip the comparison");
    assert!(stderr(&run).contains("validation FAILED"));
}

#[test]
fn validate_sample_mode_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (nodes, edges) = path_fixture(tmp.path());
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let run = bin()
            .arg("validate")
            .args([&nodes, &edges])
            .args(["--mode", "sample", "--samples", "20000", "--seed", "7"])
            .output()
            .unwrap();
        assert!(run.status.success(), "stderr: {}", stderr(&run));
        outputs.push(stdout(&run));
    }
    assert_eq!(outputs[0], outputs[1], "same seed, same table");
    assert!(outputs[0].contains("20000 sampled colorings"));

    let other = bin()
        .arg("validate")
        .args([&nodes, &edges])
        .args(["--mode", "sample", "--samples", "20000", "--seed", "8"])
        .output()
        .unwrap();
    assert!(other.status.success());
    assert_ne!(outputs[0], stdout(&other), "seed must matter");
}

#[test]
fn benchmark_writes_throughput_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("bench");
    let run = bin()
        .arg("benchmark")
        .args(["--nodes", "200", "--edges", "600", "--classes", "3"])
        .args(["--repetitions", "2", "--seed", "1"])
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let csv = fs::read_to_string(out_dir.join("benchmark.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "stage,nodes,edges,classes,repetitions,median_seconds,throughput,throughput_unit"
    );
    assert!(csv.contains("edge_zscores,200,600,3,2,"));
    assert!(csv.contains("moment_table,200,600,3,2,"));
    assert!(csv.contains("edges_per_second"));
    assert!(csv.contains("squared_degrees_per_second"));
}
