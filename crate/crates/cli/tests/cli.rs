use std::path::Path;
use std::process::{Command, Output};

fn chainstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const FIG2: &str = r#"{
    "schema_version": "1",
    "sim": {"N": 10, "dt": 0.1, "horizon": "fig2"},
    "controller": {"name": "pd-asymmetric", "params": {"a": 1, "b1": 2, "b2": 0.5}},
    "disturbance": {"kind": "ramp-step", "alpha": 1.0, "T": "fig2"}
}"#;

fn sweep_config(definition: u8, sizes: &str) -> String {
    format!(
        r#"{{
    "schema_version": "1",
    "sim": {{"N": {sizes}, "dt": 0.1, "horizon": "lemma-window"}},
    "controller": {{"name": "pd-asymmetric", "params": {{"a": 1, "b1": 2, "b2": 0.5}}}},
    "disturbance": {{"kind": "ramp-windowed", "alpha": "budget", "T": "lemma-window"}},
    "criterion": {{"definition": {definition}, "p": 2, "q": 2, "C1": 1.0}}
}}"#
    )
}

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig2.json", FIG2);
    let out = dir.path().join("out");
    let result = chainstab(&["simulate", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("n,t,k,x,v,e,edot,d1,d2,in_window\n"));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"oracle_max_deviation\""));
}

#[test]
fn simulate_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig2.json", FIG2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(chainstab(&["simulate", "--config", &cfg, "--out-dir", out.to_str().unwrap()]).status.success());
    }
    for name in ["trajectory.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn config_errors_exit_with_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad_dt = write_config(dir.path(), "dt.json", &FIG2.replace("\"dt\": 0.1", "\"dt\": 0"));
    let result = chainstab(&["simulate", "--config", &bad_dt]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("sim.dt"));

    let unknown = write_config(dir.path(), "extra.json", &FIG2.replace("\"dt\": 0.1", "\"dt\": 0.1, \"extra\": 1"));
    assert_eq!(chainstab(&["simulate", "--config", &unknown]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(chainstab(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let two_sizes = write_config(dir.path(), "two.json", &sweep_config(1, "[40, 80]"));
    assert_eq!(chainstab(&["sweep", "--config", &two_sizes]).status.code(), Some(2));
}

#[test]
fn verify_lemma_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lemma.json", &sweep_config(2, "[10, 50]"));
    let result = chainstab(&["verify-lemma", "--config", &cfg, "--tolerance", "1e-9"]);
    assert_eq!(result.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&result.stdout).contains("\"passed\": true"));
}

#[test]
fn sweep_exit_code_follows_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let def4 = write_config(dir.path(), "def4.json", &sweep_config(4, "[40, 80, 160, 320]"));
    let result = chainstab(&["sweep", "--config", &def4, "--jobs", "2", "--oracle-only"]);
    assert_eq!(result.status.code(), Some(0));
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(text.contains("\"reference_exponent\": 1.0"), "{text}");

    // A sweep whose fit lands outside the tolerance reports a test failure.
    let tight = write_config(
        dir.path(),
        "tight.json",
        &sweep_config(4, "[40, 80, 160, 320]").replace(
            "\"C1\": 1.0}",
            "\"C1\": 1.0}, \"sweep\": {\"exponent_tolerance\": 0.001}",
        ),
    );
    assert_eq!(chainstab(&["sweep", "--config", &tight, "--oracle-only"]).status.code(), Some(1));
}

#[test]
fn figdata_writes_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = chainstab(&["figdata", "--scenario", "fig1", "--N", "10", "--out-dir", out]);
    assert_eq!(result.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("fig1_d1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11 * 11);
    assert_eq!(chainstab(&["figdata", "--scenario", "fig9", "--N", "10"]).status.code(), Some(2));
}

#[test]
fn properties_subcommand_records_seeds() {
    let result = chainstab(&["properties", "--seed", "11", "--cases", "5"]);
    assert_eq!(result.status.code(), Some(0));
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(text.contains("\"seed\": 11") && text.contains("\"seed\": 14"));
}
