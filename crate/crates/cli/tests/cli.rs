use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = r#"
trials = 3
seed = 11

[base]
n = 4000
k = 200
e_max = 1.0

[sweep]
attack = [{ kind = "none" }, { kind = "probabilistic-clone-resend" }]
"#;

fn qkdmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdmask"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("spec.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_emits_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let a = qkdmask(&["run", "--spec", &spec]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = qkdmask(&["run", "--spec", &spec]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("cell,variant,attack,"));
}

#[test]
fn flags_override_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let out = dir.path().join("out.jsonl");
    let status = qkdmask(&[
        "run", "--spec", &spec, "--format", "records", "--trials", "2", "--seed", "5", "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("\"trials\":2"));
}

#[test]
fn dump_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let dump = dir.path().join("dump.jsonl");
    assert!(qkdmask(&["run", "--spec", &spec, "--dump", dump.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 6);
    let out = qkdmask(&["analyze", "--input", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("cell,variant,attack,sessions"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn replay_prints_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let out = qkdmask(&["replay", "--spec", &spec, "--trial", "1", "--cell", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0,alice,sample-positions,"));
    assert!(text.contains(",alice,masked-bases,"));
    assert!(!text.contains(",alice,bases,"));
    let again = qkdmask(&["replay", "--spec", &spec, "--trial", "1", "--cell", "1"]);
    assert_eq!(text.as_bytes(), again.stdout.as_slice());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(qkdmask(&["run", "--spec", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write_spec(dir.path(), "trials = 0\n");
    assert_eq!(qkdmask(&["run", "--spec", &bad]).status.code(), Some(1));
    assert_eq!(qkdmask(&["run"]).status.code(), Some(1));
    assert_eq!(qkdmask(&["run", "--spec", &bad, "--format", "xml"]).status.code(), Some(1));
    let good = write_spec(dir.path(), SPEC);
    assert_eq!(
        qkdmask(&["replay", "--spec", &good, "--trial", "99"]).status.code(),
        Some(1)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        qkdmask(&["run", "--spec", &good, "--out", unwritable.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(qkdmask(&["--help"]).status.code(), Some(0));
}
