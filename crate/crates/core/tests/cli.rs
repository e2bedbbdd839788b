use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan-lab"))
        .args(args)
        .output()
        .expect("run cartan-lab")
}

fn scenario(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn json_is_byte_identical_for_a_fixed_seed() {
    let args = [
        "check",
        &scenario("randers_skew.toml"),
        "--format",
        "json",
        "--samples",
        "40",
        "--seed",
        "13",
    ];
    let a = bin(&args);
    let b = bin(&args);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["environment"]["seed"], 13);
    assert_eq!(v["environment"]["samples"], 40);
}

#[test]
fn seed_changes_the_report() {
    let run = |seed: &str| {
        bin(&[
            "check",
            &scenario("sphere.toml"),
            "--format",
            "json",
            "--samples",
            "10",
            "--seed",
            seed,
        ])
        .stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn passing_scenario_exits_zero() {
    let o = bin(&["check", &scenario("euclidean.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("overall: PASS"));
}

#[test]
fn failing_check_exits_one() {
    let o = bin(&[
        "check",
        &scenario("sphere.toml"),
        "--samples",
        "20",
        "--only",
        "nijenhuis",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("nijenhuis") && text.contains("FAIL"));
}

#[test]
fn only_restricts_the_checks() {
    let o = bin(&[
        "check",
        &scenario("euclidean.toml"),
        "--format",
        "json",
        "--only",
        "euler,J_squared",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["euler", "J_squared"]);
}

#[test]
fn toml_syntax_error_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "bad.toml",
        "dim = 2\nmetric = \"euclidean\"\nfoo = \n",
    );
    let o = bin(&["check", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column 7"), "{}", stderr(&o));
}

#[test]
fn expression_error_reports_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "bad.toml",
        "dim = 2\n[metric]\nfamily = \"expression\"\nf = \"x1*(y1^2\"\n",
    );
    let o = bin(&["check", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 9"), "{}", stderr(&o));
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        &dir,
        "a.toml",
        "dim = 2\nmetric = \"euclidean\"\nchecks = [\"nope\"]\n",
    );
    let not_skew = write(
        &dir,
        "b.toml",
        "dim = 2\nmetric = \"euclidean\"\n[torsion.s]\nkind = \"constant\"\n\
         values = [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]\n",
    );
    for p in [
        unknown,
        not_skew,
        dir.path()
            .join("missing.toml")
            .to_string_lossy()
            .into_owned(),
    ] {
        let o = bin(&["check", &p]);
        assert_eq!(o.status.code(), Some(2), "{p}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"));
    }
    let o = bin(&["check", &scenario("euclidean.toml"), "--atol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["check", &scenario("euclidean.toml"), "--only", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&["check"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn checks_lists_every_registered_name() {
    let o = bin(&["checks"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for c in cartan_lab::CheckId::ALL {
        assert!(
            text.lines().any(|l| l.starts_with(c.name())),
            "{}",
            c.name()
        );
    }
}
