use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chaoscast(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoscast")).args(args).current_dir(cwd).output().unwrap()
}

const SMALL_NGRC: &str = r#"
experiment_id = "{id}"
system = "lorenz"
method = "ngrc"
total_points = {total}
split = { warmup = 2, train = 598, test = 200 }
"#;

fn small(id: &str, total: usize) -> String {
    SMALL_NGRC.replace("{id}", id).replace("{total}", &total.to_string())
}

#[test]
fn missing_config_and_unknown_flag_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(chaoscast(&["run", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(chaoscast(&["generate", "--system", "lorenz", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(chaoscast(&["generate", "--system", "pendulum"], dir.path()).status.code(), Some(2));
}

#[test]
fn generate_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = chaoscast(&["generate", "--system", "chen", "--steps", "300", "-o", "chen.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("chen.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,y,z"));
    assert_eq!(text.lines().count(), 301);

    let stdout = chaoscast(&["generate", "--system", "lorenz"], dir.path()).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap().lines().count(), 5001);
}

#[test]
fn run_then_inspect_weights() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), small("tiny", 800)).unwrap();
    let out = chaoscast(&["run", "exp.toml", "-o", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["data.csv", "truth.csv", "prediction.csv", "weights.csv", "model.json", "report.json"] {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }
    let out = chaoscast(&["inspect-weights", "res/model.json"], dir.path());
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 29);
    assert!(table.starts_with("feature,dim_x,dim_y,dim_z\nconst,"));
    assert_eq!(chaoscast(&["inspect-weights", "res/report.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn empty_suite_writes_header_only_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("suite.toml"), "").unwrap();
    let out = chaoscast(&["suite", "suite.toml", "-o", "s"], dir.path());
    assert!(out.status.success());
    let summary = fs::read_to_string(dir.path().join("s/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1);
}

#[test]
fn suite_isolates_a_bad_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let text = [small("good-a", 800), small("bad", 500), small("good-b", 800)]
        .map(|e| format!("[[experiment]]{e}"))
        .join("\n");
    fs::write(dir.path().join("suite.toml"), text).unwrap();
    let out = chaoscast(&["suite", "suite.toml", "-o", "s"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let summary = fs::read_to_string(dir.path().join("s/summary.csv")).unwrap();
    let rows: Vec<_> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("good-a,lorenz,ngrc,ok,"));
    assert!(rows[1].starts_with("bad,lorenz,ngrc,") && !rows[1].contains(",ok,"));
    assert!(rows[2].starts_with("good-b,lorenz,ngrc,ok,"));
    assert!(dir.path().join("s/good-b/report.json").is_file());
}

#[test]
fn presets_list_names_every_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = chaoscast(&["presets", "--list"], dir.path());
    let ids = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ids.lines().count(), 29);
    assert!(ids.lines().any(|l| l == "longhorizon-chen-ngrc"));
}
