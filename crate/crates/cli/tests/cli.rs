//! End-to-end tests of the framepack binary: flag validation, output
//! schemas, exit codes, determinism, and the documented oracle values.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn framepack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("framepack_cli_{}_{}", std::process::id(), name));
    p
}

/// Strip the wall-time fields, the one part of any payload that is not
/// reproducible run-to-run.
fn strip_wall_time(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove("wall_time_ms");
            for v in map.values_mut() {
                strip_wall_time(v);
            }
        }
        Value::Array(items) => {
            for v in items {
                strip_wall_time(v);
            }
        }
        _ => {}
    }
}

#[test]
fn optimize_simplex_reports_third_coherence() {
    let out = framepack(&[
        "optimize", "--d", "3", "--n", "4", "--s", "2", "--restarts", "20", "--seed", "7",
    ]);
    let json = stdout_json(&out);
    let coherence = json["metrics"]["coherence"].as_f64().unwrap();
    assert!((coherence - 1.0 / 3.0).abs() < 1e-4, "coherence {coherence}");
    assert_eq!(json["coordinates"].as_array().unwrap().len(), 4);
}

#[test]
fn optimize_half_circle_coherence_at_log_kernel() {
    let out = framepack(&[
        "optimize", "--d", "2", "--n", "5", "--s", "0", "--restarts", "20", "--seed", "3",
    ]);
    let json = stdout_json(&out);
    let coherence = json["metrics"]["coherence"].as_f64().unwrap();
    let expect = (std::f64::consts::PI / 5.0).cos();
    assert!((coherence - expect).abs() < 1e-6, "coherence {coherence}");
}

#[test]
fn optimize_missing_n_is_usage_error() {
    let out = framepack(&["optimize", "--d", "3", "--s", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_requires_exactly_one_kernel() {
    let out = framepack(&["optimize", "--d", "3", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = framepack(&[
        "optimize", "--d", "3", "--n", "4", "--s", "2", "--frame-potential",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_is_bit_deterministic_modulo_wall_time() {
    let args = [
        "optimize", "--d", "3", "--n", "5", "--s", "2", "--restarts", "5", "--seed", "11",
    ];
    let mut a = stdout_json(&framepack(&args));
    let mut b = stdout_json(&framepack(&args));
    strip_wall_time(&mut a);
    strip_wall_time(&mut b);
    assert_eq!(a, b);
}

#[test]
fn sweep_grid_has_expected_cells_and_consistent_columns() {
    let out = framepack(&[
        "sweep",
        "--d",
        "3",
        "--n-range",
        "3:10",
        "--s-list",
        "fp,0,2",
        "--restarts",
        "8",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "d,n,s,best_energy,coherence,tightness_residual,welch,levenstein,sep_bound,restarts_used,seed,converged,wall_time_ms"
    );
    // 8 values of N times 3 kernels.
    assert_eq!(lines.len(), 1 + 24);

    let mut coh_at_n8 = Vec::new();
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let (d, n): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert_eq!(d, 3);
        let welch: f64 = f[6].parse().unwrap();
        assert!((welch - framepack::metrics::welch_bound(d, n)).abs() < 1e-14);
        if n == 8 && f[2] != "fp" {
            coh_at_n8.push((f[2].to_string(), f[4].parse::<f64>().unwrap()));
        }
    }
    // Coherence falls (within slack) as s grows at fixed N=8.
    assert_eq!(coh_at_n8.len(), 2);
    assert!(coh_at_n8[1].1 <= coh_at_n8[0].1 + 5e-3, "{coh_at_n8:?}");
}

#[test]
fn sweep_skip_existing_reuses_rows_bitwise() {
    let path = temp_path("sweep.csv");
    let base = [
        "sweep",
        "--d",
        "3",
        "--n-range",
        "3:5",
        "--s-list",
        "fp,2",
        "--restarts",
        "4",
        "--seed",
        "9",
    ];
    let mut first = base.to_vec();
    first.extend(["--out", path.to_str().unwrap()]);
    assert!(framepack(&first).status.success());
    let written = std::fs::read_to_string(&path).unwrap();

    let mut resumed = first.clone();
    resumed.push("--skip-existing");
    assert!(framepack(&resumed).status.success());
    let rewritten = std::fs::read_to_string(&path).unwrap();
    // Every cell already existed, so the file is reproduced byte for byte
    // (wall times included, since nothing was recomputed).
    assert_eq!(written, rewritten);
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_rows_are_deterministic_besides_wall_time() {
    let args = [
        "sweep", "--d", "3", "--n-range", "3:4", "--s-list", "2", "--restarts", "4", "--seed",
        "13",
    ];
    let strip = |out: Output| -> Vec<String> {
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                fields[..fields.len() - 1].join(",")
            })
            .collect()
    };
    assert_eq!(strip(framepack(&args)), strip(framepack(&args)));
}

#[test]
fn sweep_bad_range_is_usage_error() {
    let out = framepack(&[
        "sweep", "--d", "3", "--n-range", "oops", "--s-list", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_reports_both_stages_and_warns_on_small_exponent() {
    let out = framepack(&[
        "pipeline", "--d", "3", "--n", "7", "--s-sep", "3", "--restarts", "6", "--seed", "2",
    ]);
    let json = stdout_json(&out);
    let res3 = json["stage3"]["metrics"]["tightness_residual"]
        .as_f64()
        .unwrap();
    assert!(res3 < 1e-6, "stage-3 residual {res3}");
    let coh2 = json["stage2"]["metrics"]["coherence"].as_f64().unwrap();
    let coh3 = json["stage3"]["metrics"]["coherence"].as_f64().unwrap();
    // The tight polish must not destroy separation badly (heuristic bound).
    assert!(coh3 <= coh2 + 0.05, "stage2 {coh2} stage3 {coh3}");
    assert!(json["warning"].is_null());

    // s-sep at or below d-1 warns on stderr but still runs.
    let out = framepack(&[
        "pipeline", "--d", "3", "--n", "5", "--s-sep", "0.5", "--restarts", "4", "--seed", "2",
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    let json = stdout_json(&out);
    assert!(json["warning"].is_string());
}

#[test]
fn gradcheck_passes_for_all_kernel_cases() {
    for extra in [vec![], vec!["--s", "0"], vec!["--s", "-2"]] {
        let mut args = vec!["gradcheck"];
        args.extend(extra.iter().copied());
        let out = framepack(&args);
        let json = stdout_json(&out);
        assert_eq!(json["pass"], Value::Bool(true));
        assert!(json["max_rel_error_ambient"].as_f64().unwrap() < 1e-5);
        assert!(json["max_rel_error_spherical"].as_f64().unwrap() < 1e-5);
    }
}

#[test]
fn reference_then_metrics_recovers_icosahedral_coherence() {
    let path = temp_path("icosa.txt");
    let out = framepack(&[
        "reference", "--kind", "icosa6", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = framepack(&[
        "metrics", "--in", path.to_str().unwrap(), "--d", "3", "--n", "6",
    ]);
    let json = stdout_json(&out);
    let coherence = json["coherence"].as_f64().unwrap();
    assert!((coherence - 1.0 / 5.0_f64.sqrt()).abs() < 1e-10);
    assert_eq!(json["equiangular"], Value::Bool(true));
    std::fs::remove_file(&path).ok();
}

#[test]
fn reference_simplex_writes_five_vectors_with_zero_residual() {
    let path = temp_path("simplex4.txt");
    let out = framepack(&[
        "reference", "--kind", "simplex", "--d", "4", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = framepack(&[
        "metrics", "--in", path.to_str().unwrap(), "--d", "4", "--n", "5",
    ]);
    let json = stdout_json(&out);
    assert!(json["tightness_residual"].as_f64().unwrap() < 1e-10);
    assert!((json["coherence"].as_f64().unwrap() - 0.25).abs() < 1e-10);
    std::fs::remove_file(&path).ok();
}

#[test]
fn reference_validates_flag_combinations() {
    assert_eq!(
        framepack(&["reference", "--kind", "half-circle"]).status.code(),
        Some(2)
    );
    assert_eq!(
        framepack(&["reference", "--kind", "simplex", "--d", "3", "--n", "9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn compare_file_with_itself_is_equivalent() {
    let path = temp_path("cmp.txt");
    assert!(framepack(&[
        "reference", "--kind", "icosa6", "--out", path.to_str().unwrap()
    ])
    .status
    .success());
    let out = framepack(&[
        "compare",
        "--in-a",
        path.to_str().unwrap(),
        "--in-b",
        path.to_str().unwrap(),
        "--d",
        "3",
        "--n",
        "6",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["comparison"]["coherence_diff"].as_f64().unwrap(), 0.0);
    assert_eq!(
        json["comparison"]["projectively_equivalent"],
        Value::Bool(true)
    );
    std::fs::remove_file(&path).ok();
}

#[test]
fn compare_missing_file_is_input_error() {
    let out = framepack(&[
        "compare", "--in-a", "/nonexistent/a.txt", "--in-b", "/nonexistent/b.txt", "--d", "3",
        "--n", "6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_writes_packing_file_that_reloads() {
    let path = temp_path("opt.txt");
    let out = framepack(&[
        "optimize",
        "--d",
        "2",
        "--n",
        "4",
        "--s",
        "1",
        "--restarts",
        "10",
        "--seed",
        "4",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("d,n,s,"));
    let out = framepack(&[
        "metrics", "--in", path.to_str().unwrap(), "--d", "2", "--n", "4",
    ]);
    let json = stdout_json(&out);
    let expect = (std::f64::consts::PI / 4.0).cos();
    assert!((json["coherence"].as_f64().unwrap() - expect).abs() < 1e-6);
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_json_format_emits_records_with_stable_keys() {
    let out = framepack(&[
        "sweep", "--d", "3", "--n-range", "3:4", "--s-list", "fp,2", "--restarts", "4",
        "--seed", "21", "--format", "json",
    ]);
    let json = stdout_json(&out);
    let records = json.as_array().unwrap();
    assert_eq!(records.len(), 4);
    for rec in records {
        let obj = rec.as_object().unwrap();
        for key in [
            "d", "n", "s", "best_energy", "coherence", "tightness_residual", "welch",
            "levenstein", "sep_bound", "restarts_used", "seed", "converged", "wall_time_ms",
        ] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
    }
    assert_eq!(records[0]["s"], "fp");
    assert_eq!(records[1]["s"], "2");
}

#[test]
fn spherical_parametrization_reaches_the_same_optimum() {
    let out = framepack(&[
        "optimize", "--d", "2", "--n", "5", "--s", "2", "--restarts", "10", "--seed", "6",
        "--param", "spherical",
    ]);
    let json = stdout_json(&out);
    let coherence = json["metrics"]["coherence"].as_f64().unwrap();
    let expect = (std::f64::consts::PI / 5.0).cos();
    assert!((coherence - expect).abs() < 1e-6, "coherence {coherence}");
    assert_eq!(json["parametrization"], "spherical");
}

#[test]
fn thread_count_does_not_change_results() {
    let args = [
        "optimize", "--d", "3", "--n", "5", "--s", "2", "--restarts", "6", "--seed", "31",
    ];
    let run_with = |threads: Option<&str>| -> Value {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_framepack"));
        cmd.args(args);
        if let Some(t) = threads {
            cmd.env("THREADS", t);
        }
        let out = cmd.output().expect("binary runs");
        let mut json = stdout_json(&out);
        strip_wall_time(&mut json);
        json
    };
    assert_eq!(run_with(Some("1")), run_with(Some("2")));
    assert_eq!(run_with(Some("1")), run_with(None));
}

#[test]
fn bad_threads_value_is_usage_error() {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framepack"));
    cmd.args(["optimize", "--d", "3", "--n", "4", "--s", "2"]);
    cmd.env("THREADS", "zero");
    let out = cmd.output().expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
}
