use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lloyd(out: &Path, args: &[&str]) -> Output {
    let output = Command::new(env!("CARGO_BIN_EXE_lloyd"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(output.status.success(), "lloyd {args:?}: {}", String::from_utf8_lossy(&output.stderr));
    output
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn gen_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        lloyd(dir.path(), &["gen", "gmm", "--k", "3", "--d", "4", "--per-cluster", "5", "--sigma", "0.5", "--seed", "7"]);
    }
    for f in ["data.csv", "truth.txt", "centers.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn noiseless_gmm_sits_on_centers() {
    let dir = TempDir::new().unwrap();
    lloyd(dir.path(), &["gen", "gmm", "--k", "3", "--d", "3", "--per-cluster", "4", "--sigma", "0"]);
    let data = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    let truth = fs::read_to_string(dir.path().join("truth.txt")).unwrap();
    let rows: Vec<&str> = data.lines().skip(1).collect();
    assert_eq!(data.lines().next(), Some("12,3"));
    for (row, label) in rows.iter().zip(truth.lines()) {
        let values: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        let g: usize = label.parse().unwrap();
        let expected: Vec<f64> = (1..=3).map(|j| f64::from(u8::from(j == g))).collect();
        assert_eq!(values, expected);
    }
}

#[test]
fn sbm_preset_size() {
    let dir = TempDir::new().unwrap();
    lloyd(dir.path(), &["gen", "sbm", "--preset", "balanced", "--seed", "3"]);
    let truth = fs::read_to_string(dir.path().join("truth.txt")).unwrap();
    assert_eq!(truth.lines().count(), 2000);
    let edges = fs::read_to_string(dir.path().join("edges.txt")).unwrap();
    assert!(edges.lines().count() > 100_000);
}

#[test]
fn fit_lloyd_recovers_noiseless_mixture() {
    let dir = TempDir::new().unwrap();
    lloyd(dir.path(), &["gen", "gmm", "--k", "4", "--d", "6", "--per-cluster", "10", "--sigma", "0"]);
    let out = lloyd(
        dir.path(),
        &["fit", "lloyd", "--data", &path(&dir, "data.csv"), "--k", "4", "--truth", &path(&dir, "truth.txt")],
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("final misclustering rate: 0"));
    let eval = lloyd(dir.path(), &["eval", "--truth", &path(&dir, "truth.txt"), "--pred", &path(&dir, "labels.txt")]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("misclustering (best map): 0\n"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("preset,replicate,iteration,A,G,Lambda,objective,elapsed_ms"));
}

#[test]
fn fit_commu_separates_two_cliques() {
    let dir = TempDir::new().unwrap();
    let mut edges = String::new();
    for block in [0, 8] {
        for u in 1..=8 {
            for v in u + 1..=8 {
                edges.push_str(&format!("{} {}\n", block + u, block + v));
            }
        }
    }
    edges.push_str("1 9\n");
    fs::write(dir.path().join("edges.txt"), edges).unwrap();
    let truth: String = (0..16).map(|i| format!("{}\n", 1 + i / 8)).collect();
    fs::write(dir.path().join("truth.txt"), truth).unwrap();
    lloyd(dir.path(), &["fit", "commu", "--data", &path(&dir, "edges.txt"), "--k", "2"]);
    let eval = lloyd(dir.path(), &["eval", "--truth", &path(&dir, "truth.txt"), "--pred", &path(&dir, "labels.txt")]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("misclustering (best map): 0\n"));
}

#[test]
fn eval_counts_errors_up_to_relabeling() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("t.txt"), "1\n1\n2\n2\n").unwrap();
    for (pred, want) in [("1\n1\n2\n2\n", "0"), ("2\n2\n1\n1\n", "0"), ("1\n1\n2\n1\n", "0.25")] {
        fs::write(dir.path().join("p.txt"), pred).unwrap();
        let eval = lloyd(dir.path(), &["eval", "--truth", &path(&dir, "t.txt"), "--pred", &path(&dir, "p.txt")]);
        let stdout = String::from_utf8_lossy(&eval.stdout).into_owned();
        assert!(stdout.contains(&format!("misclustering (best map): {want}\n")), "{stdout}");
    }
}

#[test]
fn fit_crowd_writes_confusion() {
    let dir = TempDir::new().unwrap();
    lloyd(dir.path(), &["gen", "crowd", "--workers", "20", "--items", "200", "--lo", "0.6", "--hi", "0.9"]);
    let out = lloyd(
        dir.path(),
        &["fit", "crowd", "--data", &path(&dir, "crowd.csv"), "--truth", &path(&dir, "truth.txt")],
    );
    assert!(out.status.success());
    let labels = fs::read_to_string(dir.path().join("labels.txt")).unwrap();
    assert_eq!(labels.lines().count(), 200);
    assert!(dir.path().join("confusion.csv").exists());
}

#[test]
fn experiment_writes_csv_and_svg() {
    let dir = TempDir::new().unwrap();
    lloyd(dir.path(), &["experiment", "fig2-k", "--reps", "2", "--iters", "3"]);
    let csv = fs::read_to_string(dir.path().join("fig2-k.csv")).unwrap();
    // 4 arms, 2 replicates, 3 iterations plus the initializer
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 4);
    let svg = fs::read_to_string(dir.path().join("fig2-k.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.txt"), "1 1\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_lloyd"))
        .arg("--out")
        .arg(dir.path())
        .args(["fit", "commu", "--data", &path(&dir, "bad.txt")])
        .output()
        .unwrap();
    assert!(!output.status.success());
}
