use std::fs;

use thermoqfi::parallel::Parallelism;
use thermoqfi::sweep::{
    emit_csv, emit_json, figure_configs, run_sweep, SweepConfig, SweepError, CSV_HEADER,
};

fn config(name: &str) -> SweepConfig {
    figure_configs()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
        .unwrap()
}

#[test]
fn csv_file_is_byte_stable_across_threads_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("lmg_vs_beta");
    let mut files = Vec::new();
    for (i, threads) in [1, 4, 8, 1].into_iter().enumerate() {
        let rows = run_sweep(&c, Some(Parallelism::new(threads))).unwrap();
        let path = dir.path().join(format!("{i}.csv"));
        emit_csv(&rows, &path).unwrap();
        files.push(fs::read(&path).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(files.remove(0)).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
}

#[test]
fn every_canonical_row_is_consistent() {
    for (name, c) in figure_configs() {
        let rows = run_sweep(&c, Some(Parallelism::new(4))).unwrap();
        assert_eq!(rows.len(), c.points().unwrap().len(), "{name}");
        for r in &rows {
            assert!(r.ordering_ok, "{name}: {:?}", r.failed_checks);
            assert!((r.p - (r.beta / 2.0).tanh()).abs() <= 1e-12, "{name}");
        }
    }
}

#[test]
fn polarization_overlay_shapes() {
    let peak = |name| {
        let rows = run_sweep(&config(name), None).unwrap();
        let f: Vec<f64> = rows.iter().map(|r| r.f_general.unwrap()).collect();
        let (i, _) = f
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        (i, f.len(), f)
    };
    let (i, n, _) = peak("oat_vs_p");
    assert!(i > 0 && i + 1 < n, "OAT maximum should be interior");
    let (_, _, linear) = peak("linear_vs_p");
    assert!(linear.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn json_document_round_trips_values() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("lmg_vs_t");
    let rows = run_sweep(&c, None).unwrap();
    let path = dir.path().join("rows.json");
    emit_json(&c, &rows, &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["row_count"].as_u64().unwrap() as usize, rows.len());
    assert_eq!(v["config"]["model"], "lmg");
    for (json, row) in v["rows"].as_array().unwrap().iter().zip(&rows) {
        assert_eq!(json["f_general"].as_f64(), row.f_general);
        assert_eq!(json["t"].as_f64(), Some(row.t));
    }
}

#[test]
fn io_errors_carry_the_path() {
    let rows = run_sweep(&config("lmg_vs_beta"), None).unwrap();
    let missing = std::path::Path::new("/nonexistent-dir/out.csv");
    match emit_csv(&rows, missing) {
        Err(e @ SweepError::Io { .. }) => {
            assert!(e.to_string().contains("/nonexistent-dir/out.csv"))
        }
        other => panic!("expected an I/O error, got {other:?}"),
    }
}
