use std::path::Path;
use std::process::{Command, Output};

fn klab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klab"))
        .args(args)
        .current_dir(dir)
        .env_remove("KLAB_SEED")
        .output()
        .expect("klab binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_loxodromic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("m.json"),
        "[[0.5, 0, 0], [0, 2, 0], [0, 0, 1]]",
    )
    .unwrap();
    let out = klab(&["classify", "m.json"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["kind"], "loxodromic");
    assert_eq!(v["cyclic_limit_set"]["lines"].as_array().unwrap().len(), 2);
}

#[test]
fn classify_elliptic_has_note() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("m.json"),
        "[[1, 0, 0], [0, -1, 0], [0, 0, -1]]",
    )
    .unwrap();
    let out = klab(&["classify", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["kind"], "elliptic");
    assert!(v["cyclic_limit_set"].is_null());
    assert!(v["note"].is_string());
}

#[test]
fn export_then_limit_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(&["gallery", "export", "--out", "specs"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let spec = dir.path().join("specs/coordinate_triangle.json");
    assert!(spec.exists());
    let out = klab(
        &["limit-set", spec.to_str().unwrap(), "--radius", "6"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["census"]["li"], "3");
    assert_eq!(v["ball"]["radius"], 6);
}

#[test]
fn gallery_entry_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(
        &[
            "gallery",
            "run",
            "--id",
            "triangular_lox",
            "--out",
            "r",
            "--format",
            "json",
            "--format",
            "csv",
            "--format",
            "svg",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "triangular_lox.json",
        "triangular_lox.svg",
        "triangular_lox_lines.csv",
        "triangular_lox_points.csv",
        "triangular_lox_summary.csv",
    ] {
        assert!(dir.path().join("r").join(f).exists(), "{f} missing");
    }

    let out = klab(&["plot", "r/triangular_lox.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("<svg"));
}

#[test]
fn exit_code_follows_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(
        &["gallery", "run", "--id", "translations", "--radius", "3"],
        dir.path(),
    );
    let code = out.status.code().unwrap();
    let v = json(&out);
    let expected = match v["outcome"].as_str().unwrap() {
        "pass" | "no_expectation" => 0,
        "mismatch" => 1,
        _ => 3,
    };
    assert_eq!(code, expected);
}

#[test]
fn census_of_a_line_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("lines.json"),
        "{\"lines\": [[1,0,0],[0,1,0],[0,0,1],[1,1,1]]}",
    )
    .unwrap();
    let out = klab(&["census", "lines.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["census"]["lig"], "4");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"generators\": \"x\"}").unwrap();
    assert_eq!(
        klab(&["limit-set", "bad.json"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        klab(&["limit-set", "missing.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        klab(&["gallery", "run", "--id", "nope"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        klab(
            &["gallery", "run", "--id", "translations", "--format", "csv"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        klab(
            &["gallery", "run", "--id", "translations", "--radius", "1"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("sing.json"), "[[1,0,0],[0,1,0],[0,0,0]]").unwrap();
    assert_eq!(
        klab(&["classify", "sing.json"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn bad_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_klab"))
        .args(["gallery", "run", "--id", "translations"])
        .current_dir(dir.path())
        .env("KLAB_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("KLAB_SEED"));
}
