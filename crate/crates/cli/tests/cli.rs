//! End-to-end tests of the binary: exit codes, output shapes, determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ultramet"))
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ultramet-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &std::path::Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

const T3: &str = r#"{"points": ["a","b","c"],
    "distances": [["a","b","1/2"], ["a","c","1"], ["b","c","1"]]}"#;

#[test]
fn check_verdicts_drive_exit_codes() {
    let dir = workdir();
    let t3 = write(&dir, "t3.space", T3);

    let out = bin().args(["check", "--homogeneous"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("homogeneous: false"));

    let c4 = dir.join("c4.space");
    let gen = bin().args(["gen", "cantor", "--depth", "2", "-o"]).arg(&c4).output().unwrap();
    assert_eq!(gen.status.code(), Some(0));

    let out = bin().args(["check", "--homogeneous"]).arg(&c4).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("homogeneous: true"));

    let out = bin().args(["check", "--homogeneous", "--brute-force"]).arg(&c4).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    // Brute force past the size gate is an input error unless the limit
    // is raised explicitly.
    let c8 = dir.join("c8.space");
    bin().args(["gen", "cantor", "--depth", "3", "-o"]).arg(&c8).output().unwrap();
    let out = bin().args(["check", "--homogeneous", "--brute-force"]).arg(&c8).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["check", "--transitive", "--brute-force", "--partial-limit", "8"])
        .arg(&c8)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn validate_reports_triangle_violations() {
    let dir = workdir();
    let bad = write(
        &dir,
        "bad.space",
        r#"{"points": ["a","b","c"],
            "distances": [["a","b","1/2"], ["a","c","1"], ["b","c","1/3"]]}"#,
    );
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("\"a\"") && err.contains("\"c\"") && err.contains("\"b\""), "{err}");

    let t3 = write(&dir, "t3v.space", T3);
    let out = bin().arg("validate").arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("valid: 3 points"));
}

#[test]
fn extend_distinguishes_failure_kinds() {
    let dir = workdir();
    let t3 = write(&dir, "t3e.space", T3);

    // A non-extendable but genuine partial isometry: verdict false.
    let out = bin().args(["extend", "--map", "a:c"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("extends: false"));

    // An extendable one: the witness is printed.
    let out = bin().args(["extend", "--map", "a:b"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("a -> b"));

    // Not an isometry at all: an input error.
    let out = bin().args(["extend", "--map", "a:c,b:a"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown point: an input error.
    let out = bin().args(["extend", "--map", "z:a"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generators_are_deterministic_files() {
    let dir = workdir();
    let first = dir.join("r1.space");
    let second = dir.join("r2.space");
    for target in [&first, &second] {
        let out = bin()
            .args(["gen", "random", "--points", "6", "--seed", "11", "--pool", "1/5,1/4,1/3,1/2,1", "-o"])
            .arg(target)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let out = bin().arg("validate").arg(&first).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn product_generator_and_isometric() {
    let dir = workdir();
    let prod = dir.join("p22.space");
    let gen = bin()
        .args(["gen", "product", "--spectrum", "1/2:2,1:2", "-o"])
        .arg(&prod)
        .output()
        .unwrap();
    assert_eq!(gen.status.code(), Some(0));

    let c4 = dir.join("c4i.space");
    bin().args(["gen", "cantor", "--depth", "2", "-o"]).arg(&c4).output().unwrap();

    let out = bin().arg("isometric").arg(&prod).arg(&c4).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("isometric: true"));

    let t3 = write(&dir, "t3i.space", T3);
    let out = bin().arg("isometric").arg(&prod).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("isometric: false"));
}

#[test]
fn nerve_text_and_machine_formats() {
    let dir = workdir();
    let t3 = write(&dir, "t3n.space", T3);

    let out = bin().arg("nerve").arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("1 {a, b, c}"));
    assert!(text.contains("  1/2 {a, b}"));

    let out = bin().args(["nerve", "--machine"]).arg(&t3).output().unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["points"].as_array().unwrap().len(), 3);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 5);
    assert_eq!(doc["nodes"][0]["diameter"], "1");
}

#[test]
fn decompose_agrees_with_nerve() {
    let dir = workdir();
    let t3 = write(&dir, "t3d.space", T3);
    let out = bin().args(["decompose", "--verify-nerve"]).arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("decomposition tree matches nerve: true"));
}

#[test]
fn embed_prints_the_function_space_image() {
    let dir = workdir();
    let t3 = write(&dir, "t3m.space", T3);
    let out = bin().arg("embed").arg(&t3).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("a -> {}"));
    assert!(text.contains("b -> {1/2: 1}"));
    assert!(text.contains("c -> {1: 1}"));
    assert!(text.contains("degrees: {1/2: 2, 1: 2}"));
}
