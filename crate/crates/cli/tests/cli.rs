use std::process::{Command, Output};

use serde_json::Value;

fn cam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

#[test]
fn shows_w3() {
    let out = cam(&["words", "show", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = lines(&out);
    assert_eq!(v[0]["kind"], "words.show");
    assert!(String::from_utf8_lossy(&out.stdout).contains("0100010"));
}

#[test]
fn lazy_letter_at_depth() {
    let out = cam(&["words", "at", "--n", "81", "--i", "123456789012345678901234567890"]);
    assert_eq!(out.status.code(), Some(0));
    let letter = &lines(&out)[0]["letter"];
    assert!(letter == 0 || letter == 1, "{letter}");
}

#[test]
fn verified_decomposition() {
    let out = cam(&["decomp", "--n", "2", "--k", "1", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"first_last_ok\":true"), "{text}");
}

#[test]
fn missing_witness_exits_one() {
    let out = cam(&["witness", "--k", "1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(lines(&out).last().unwrap()["kind"], "error");
}

#[test]
fn materialize_cap_exits_two() {
    let out = cam(&["--materialize-cap", "100", "words", "show", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(cam(&["words", "show"]).status.code(), Some(2));
    assert_eq!(cam(&["group", "build", "--scales", "4,7"]).status.code(), Some(2));
}

#[test]
fn certificate_for_radius_eight() {
    let out = cam(&["quotient", "cert", "--r", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"level\":3"), "{text}");
}

#[test]
fn touching_layout_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cramped.cfg");
    std::fs::write(
        &path,
        "d = 2\nscales = 5,7\nball.1.0.0 = 0,0@1\nball.1.0.1 = 1,0@1\n",
    )
    .unwrap();
    let out = cam(&["group", "build", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exports_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.pgm");
    let out = cam(&[
        "group", "export", "--scales", "5,7", "--level", "2", "--out",
        path.to_str().unwrap(), "--scale", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&path).unwrap();
    assert!(bytes.starts_with(b"P5\n70 70\n255\n"));
    assert_eq!(bytes.len(), b"P5\n70 70\n255\n".len() + 70 * 70);
}
