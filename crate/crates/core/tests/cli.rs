use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rphgnn(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rphgnn"));
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().unwrap()
}

fn toy(dir: &Path) -> std::path::PathBuf {
    let graph = dir.join("toy");
    let out = rphgnn(&["synth", "--toy"], &[("--out", &graph)]);
    assert!(out.status.success());
    graph
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let out = dir.path().join("run");
    let res = rphgnn(&["run", "--max-epochs", "5"], &[("--graph", &graph), ("--out", &out)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["groups.rphg", "manifest.json", "precompute.json", "model.ckpt", "metrics.json", "history.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let metrics: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(metrics["accuracy"].is_number());
}

#[test]
fn precompute_then_train_from_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let out = dir.path().join("pre");
    let res = rphgnn(&["precompute", "--scheme", "local", "--iterations", "3"], &[("--graph", &graph), ("--out", &out)]);
    assert_eq!(res.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["groups"].as_array().unwrap().len(), 3);
    let res = rphgnn(&["train", "--max-epochs", "3"], &[("--archive", &out.join("groups.rphg"))]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn single_threaded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let res = rphgnn(
            &["--threads", "1", "run", "--max-epochs", "8", "--seed", "3"],
            &[("--graph", &graph), ("--out", &out)],
        );
        assert!(res.status.success());
        ["groups.rphg", "model.ckpt", "metrics.json"].map(|f| fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn ledger_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let res = rphgnn(&["ledger", "--scheme", "local", "--iterations", "4"], &[("--graph", &graph)]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("(0,raw)") && text.contains("(3)"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let out = dir.path().join("o");

    let unknown = rphgnn(&["precompute", "--bogus"], &[("--graph", &graph), ("--out", &out)]);
    assert_eq!(unknown.status.code(), Some(3));

    let zero_k = rphgnn(&["precompute", "--iterations", "0"], &[("--graph", &graph), ("--out", &out)]);
    assert_eq!(zero_k.status.code(), Some(3));

    let capped = rphgnn(
        &["precompute", "--scheme", "two-hop", "--relation-cap", "2"],
        &[("--graph", &graph), ("--out", &out)],
    );
    assert_eq!(capped.status.code(), Some(4));

    let ok = rphgnn(&["precompute"], &[("--graph", &graph), ("--out", &out)]);
    assert_eq!(ok.status.code(), Some(0));
    let archive = out.join("groups.rphg");
    let mut bytes = fs::read(&archive).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&archive, bytes).unwrap();
    let corrupt = rphgnn(&["train"], &[("--archive", &archive)]);
    assert_eq!(corrupt.status.code(), Some(2));

    let missing = rphgnn(&["precompute"], &[("--graph", &dir.path().join("nope")), ("--out", &out)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn explicit_patience_above_max_epochs_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let graph = toy(dir.path());
    let res = rphgnn(
        &["run", "--max-epochs", "3", "--patience", "5"],
        &[("--graph", &graph), ("--out", &dir.path().join("o"))],
    );
    assert_eq!(res.status.code(), Some(3));
}
