use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn thermoqfi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoqfi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const LMG: &str = "model = 'lmg'\ntwice_j = 6\nlambda = 0.5\nbeta_grid = [0.5, 1.1, 2.0]\nt_grid = [0.5, 1.0, 3.14]\n";

#[test]
fn compute_qubit_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoqfi(
        &[
            "compute",
            "--model",
            "linear",
            "--twice-j",
            "1",
            "--beta",
            "2",
            "--t",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v["rows"][0];
    for key in ["f_general", "f_thermal", "f_sld", "closed_qfi"] {
        let f = row[key].as_f64().unwrap();
        assert!((f - 1f64.tanh().powi(2)).abs() < 1e-12, "{key} = {f}");
    }
    assert_eq!(row["ordering_ok"], true);
}

#[test]
fn compute_csv_is_header_plus_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoqfi(
        &[
            "compute",
            "--model",
            "oat",
            "--twice-j",
            "4",
            "--p",
            "0.5",
            "--t",
            "1",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("model,J,beta,P,t,lambda,f_general,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoqfi(
        &[
            "compute",
            "--model",
            "lmg",
            "--twice-j",
            "2",
            "--beta",
            "1",
            "--t",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`lambda`"));

    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "model = 'oat'\ntwice_j = 2\nbeta_grid = [2.0, 1.0]\nt_grid = [1.0]\n",
    )
    .unwrap();
    let o = thermoqfi(&["sweep", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta_grid[1]"));

    let o = thermoqfi(&["sweep", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_output_independent_of_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lmg.toml");
    fs::write(&config, LMG).unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "8", "1"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.csv"));
        let o = thermoqfi(
            &[
                "sweep",
                "--config",
                config.to_str().unwrap(),
                "--parallelism",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        outputs.push(fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(
        String::from_utf8(outputs[0].clone())
            .unwrap()
            .lines()
            .count(),
        10
    );
}

#[test]
fn sweep_json_and_config_output_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("lmg.toml"),
        format!("{LMG}output_path = 'rows.json'\n"),
    )
    .unwrap();
    let o = thermoqfi(
        &["sweep", "--config", "lmg.toml", "--format", "json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rows.json")).unwrap()).unwrap();
    assert_eq!(v["row_count"], 9);
    assert_eq!(v["rows"][0]["closed_qfi"], serde_json::Value::Null);
}

#[test]
fn figures_writes_runnable_configs() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoqfi(&["figures", "--out", "figs"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("figs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "linear_vs_p.toml",
            "lmg_vs_beta.toml",
            "lmg_vs_t.toml",
            "oat_bounds_vs_p.toml",
            "oat_vs_p.toml"
        ]
    );
    let o = thermoqfi(&["sweep", "--config", "figs/lmg_vs_beta.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("figs/lmg_vs_beta.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_table_and_summary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoqfi(
        &["verify", "--parallelism", "4", "--out", "summary.json"],
        dir.path(),
    );
    let table = stdout(&o);
    assert_eq!(
        table
            .lines()
            .filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]"))
            .count(),
        11
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let passed = summary["passed"].as_bool().unwrap();
    assert_eq!(summary["checks"].as_array().unwrap().len(), 11);
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    if !passed {
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert!(stderr.contains("first failure"), "{stderr}");
    }
}
