use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_said-sim"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("said-sim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn run_writes_long_csv() {
    let out = tmp("fig7.csv");
    let st = bin()
        .args(["run", "--scenario", "builtin:fig7", "--seed", "3", "--duration", "4", "--checks", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed = 3"));
    assert!(text.contains("# duration_s = 4.0"));
    assert!(text.lines().any(|l| l == "time,entity,metric,value"));
}

#[test]
fn run_reads_scenario_files() {
    let out = tmp("line.csv");
    let file = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/line.toml");
    let st = bin().args(["run", "--scenario"]).arg(&file).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
}

#[test]
fn analyze_reports_agreement() {
    let out = tmp("region.csv");
    let st = bin().args(["analyze", "--grid", "step=10,F=100/400,k=1/3", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let rows = std::fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(rows, 1 + 10 * 11 * 2 * 2);
}

#[test]
fn bad_input_exits_nonzero() {
    let out = tmp("x.csv");
    let st = bin().args(["run", "--scenario", "builtin:nope", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = bin().args(["analyze", "--grid", "step=0", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn accept_single_criterion() {
    let o = bin().args(["accept", "--only", "1"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("PASS [ 1]"), "{text}");
}
