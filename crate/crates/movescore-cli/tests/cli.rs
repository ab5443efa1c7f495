use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_movescore")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("MOVESCORE_PENALTY_P")
        .output()
        .expect("spawn movescore")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Step series: 0 for t = 1..50, 10 for t = 51..100, with small noise.
fn write_step_csv(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut text = String::from("time,obs,good,biased\n");
    for t in 1..=100 {
        let mu = if t <= 50 { 0.0 } else { 10.0 };
        let y = mu + 0.3 * rng.gen_range(-1.0..1.0);
        let g = mu + 0.3 * rng.gen_range(-1.0..1.0);
        let b = mu + 1.5 + 0.3 * rng.gen_range(-1.0..1.0);
        text.push_str(&format!("{t},{y},{g},{b}\n"));
    }
    fs::write(path, text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn detect_finds_the_step_at_fifty() {
    let dir = tempfile::tempdir().unwrap();
    write_step_csv(&dir.path().join("step.csv"));
    let out = run_in(dir.path(), &["detect", "--input", "step.csv", "--out", "o"]);
    assert_ok(&out);
    let report = json(&dir.path().join("o/detect.json"));
    assert_eq!(report["series"][0]["changepoints"], serde_json::json!([50]));
    let segments = fs::read_to_string(dir.path().join("o/segments.csv")).unwrap();
    assert_eq!(segments.lines().count(), 3); // header + two segments
}

#[test]
fn detect_constant_series_reports_no_changepoints() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("time,obs\n");
    for t in 1..=60 {
        text.push_str(&format!("{t},4.25\n"));
    }
    fs::write(dir.path().join("const.csv"), text).unwrap();
    let out = run_in(
        dir.path(),
        &["detect", "--input", "const.csv", "--out", "o"],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/detect.json"));
    assert_eq!(report["series"][0]["num_changepoints"], 0);
    let segments = fs::read_to_string(dir.path().join("o/segments.csv")).unwrap();
    assert_eq!(segments.lines().count(), 2);
}

#[test]
fn malformed_csv_exits_nonzero_with_line_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.csv"),
        "time,obs\n1,1.0\n2,not-a-number\n3,2.0\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["detect", "--input", "bad.csv", "--out", "o"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn missing_value_sentinel_is_rejected_in_used_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("na.csv"), "time,obs\n1,1.0\n2,NA\n").unwrap();
    let out = run_in(
        dir.path(),
        &["detect", "--input", "na.csv", "--na", "NA", "--out", "o"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing value"));
}

#[test]
fn evaluate_model_equal_to_obs_scores_zero_pw_and_positive_moving() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut text = String::from("time,obs,self\n");
    for t in 1..=120 {
        let y: f64 = rng.gen_range(-1.0..1.0) + if t > 60 { 5.0 } else { 0.0 };
        text.push_str(&format!("{t},{y},{y}\n"));
    }
    fs::write(dir.path().join("selfie.csv"), text).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "evaluate",
            "--input",
            "selfie.csv",
            "--rule",
            "crps",
            "--out",
            "o",
        ],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/evaluation.json"));
    let mut pw = None;
    let mut dv = None;
    for entry in report["averages"].as_array().unwrap() {
        match entry["method"].as_str().unwrap() {
            "PW" => pw = entry["mean"].as_f64(),
            "DV" => dv = entry["mean"].as_f64(),
            _ => {}
        }
    }
    assert_eq!(pw.unwrap(), 0.0);
    // the moving sample spreads around the observation: a small positive score
    assert!(dv.unwrap() > 0.0);
}

#[test]
fn identical_model_columns_share_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut text = String::from("time,obs,twin_a,twin_b\n");
    for t in 1..=80 {
        let y: f64 = rng.gen_range(-1.0..1.0);
        let x: f64 = rng.gen_range(-1.0..1.0);
        text.push_str(&format!("{t},{y},{x},{x}\n"));
    }
    fs::write(dir.path().join("twins.csv"), text).unwrap();
    let out = run_in(
        dir.path(),
        &["evaluate", "--input", "twins.csv", "--out", "o"],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/evaluation.json"));
    for (_, per_method) in report["ranks"].as_object().unwrap() {
        for (_, ranks) in per_method.as_object().unwrap() {
            assert_eq!(ranks["twin_a"], 1);
            assert_eq!(ranks["twin_b"], 1);
        }
    }
}

#[test]
fn window_plan_roundtrip_reproduces_the_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    write_step_csv(&dir.path().join("step.csv"));
    assert_ok(&run_in(
        dir.path(),
        &["windows", "--input", "step.csv", "--out", "w"],
    ));
    assert_ok(&run_in(
        dir.path(),
        &["evaluate", "--input", "step.csv", "--out", "direct"],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "evaluate",
            "--input",
            "step.csv",
            "--plan-of",
            "w/windows_of.csv",
            "--plan-ov",
            "w/windows_ov.csv",
            "--plan-dv",
            "w/windows_dv.csv",
            "--out",
            "replay",
        ],
    ));
    for name in ["scores.csv", "evaluation.json"] {
        let a = fs::read(dir.path().join("direct").join(name)).unwrap();
        let b = fs::read(dir.path().join("replay").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs after plan round-trip");
    }
}

#[test]
fn windows_rejects_gridded_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("grid.csv"),
        "time,obs,location\n1,1.0,a\n1,2.0,b\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["windows", "--input", "grid.csv", "--out", "o"],
    );
    assert!(!out.status.success());
}

#[test]
fn simulate_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert_ok(&run_in(
            dir.path(),
            &["simulate", "C", "--reps", "16", "--seed", "1", "--out", out],
        ));
    }
    for name in ["tables.json", "series.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let other = run_in(
        dir.path(),
        &["simulate", "C", "--reps", "16", "--seed", "2", "--out", "c"],
    );
    assert_ok(&other);
    assert_ne!(
        fs::read(dir.path().join("a/tables.json")).unwrap(),
        fs::read(dir.path().join("c/tables.json")).unwrap()
    );
}

#[test]
fn simulate_st_columns_follow_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(
        dir.path(),
        &["simulate", "C", "--reps", "4", "--seed", "1", "--out", "c"],
    ));
    let c = json(&dir.path().join("c/tables.json"));
    let methods_c: Vec<&str> = c["tables"]["CRPS"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(methods_c.contains(&"ST"));

    assert_ok(&run_in(
        dir.path(),
        &["simulate", "P", "--reps", "2", "--seed", "1", "--out", "p"],
    ));
    let p = json(&dir.path().join("p/tables.json"));
    let methods_p: Vec<&str> = p["tables"]["CRPS"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(!methods_p.contains(&"ST"));

    assert_ok(&run_in(
        dir.path(),
        &[
            "simulate",
            "P",
            "--reps",
            "2",
            "--seed",
            "1",
            "--force-st",
            "--out",
            "pst",
        ],
    ));
    let pst = json(&dir.path().join("pst/tables.json"));
    assert!(pst["tables"]["CRPS"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v == "ST"));
}

#[test]
fn simulate_rejects_unknown_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["simulate", "Q", "--reps", "2", "--out", "o"]);
    assert!(!out.status.success());
}

fn write_trend_csv(path: &Path, slopes: &[(&str, f64)]) {
    let mut text = String::from("time,value,location\n");
    for (loc, slope) in slopes {
        for year in 1961..=1990 {
            for month in 1..=4 {
                let v = slope * year as f64 + 2.0;
                text.push_str(&format!("{year}-{month:02}-15,{v},{loc}\n"));
            }
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn trend_of_identical_inputs_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_trend_csv(&dir.path().join("m.csv"), &[("a", 0.02), ("b", -0.01)]);
    let out = run_in(
        dir.path(),
        &[
            "trend",
            "--model",
            "m.csv",
            "--reference",
            "m.csv",
            "--out",
            "o",
        ],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/trend.json"));
    assert!(report["spatial_mean_decadal"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn trend_two_location_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    write_trend_csv(&dir.path().join("m.csv"), &[("a", 0.02), ("b", 0.05)]);
    write_trend_csv(&dir.path().join("r.csv"), &[("a", 0.03), ("b", 0.01)]);
    let out = run_in(
        dir.path(),
        &[
            "trend",
            "--model",
            "m.csv",
            "--reference",
            "r.csv",
            "--out",
            "o",
        ],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/trend.json"));
    // decadal errors: |0.02-0.03|*10 = 0.1 and |0.05-0.01|*10 = 0.4
    assert!((report["per_location"]["a"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert!((report["per_location"]["b"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert!((report["spatial_mean_decadal"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn trend_with_ragged_locations_fails() {
    let dir = tempfile::tempdir().unwrap();
    write_trend_csv(&dir.path().join("m.csv"), &[("a", 0.02), ("b", 0.05)]);
    write_trend_csv(&dir.path().join("r.csv"), &[("a", 0.03), ("c", 0.01)]);
    let out = run_in(
        dir.path(),
        &[
            "trend",
            "--model",
            "m.csv",
            "--reference",
            "r.csv",
            "--out",
            "o",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("location keys"));
}

#[test]
fn flags_override_config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_step_csv(&dir.path().join("step.csv"));
    // huge penalty from the config file suppresses the changepoint
    fs::write(dir.path().join("cfg.toml"), "penalty_p = 1000.0\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "detect", "--input", "step.csv", "--config", "cfg.toml", "--out", "a",
        ],
    );
    assert_ok(&out);
    assert_eq!(
        json(&dir.path().join("a/detect.json"))["series"][0]["num_changepoints"],
        0
    );
    // explicit flag wins over the config file
    let out = run_in(
        dir.path(),
        &[
            "detect",
            "--input",
            "step.csv",
            "--config",
            "cfg.toml",
            "--penalty-p",
            "3",
            "--out",
            "b",
        ],
    );
    assert_ok(&out);
    assert_eq!(
        json(&dir.path().join("b/detect.json"))["series"][0]["num_changepoints"],
        1
    );
    // environment variable applies when no flag is given
    let out = Command::new(bin())
        .args(["detect", "--input", "step.csv", "--out", "c"])
        .current_dir(dir.path())
        .env("MOVESCORE_PENALTY_P", "1000")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        json(&dir.path().join("c/detect.json"))["series"][0]["num_changepoints"],
        0
    );
}

#[test]
fn grouped_reports_cover_every_group_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut text = String::from("time,obs,m1,location\n");
    for loc in ["north", "south"] {
        let mut date = chrono::NaiveDate::from_ymd_opt(1961, 1, 1).unwrap();
        for _ in 0..90 {
            let y: f64 = rng.gen_range(-1.0..1.0);
            let x: f64 = rng.gen_range(-1.0..1.0);
            text.push_str(&format!("{},{y},{x},{loc}\n", date.format("%Y-%m-%d")));
            date = date.succ_opt().unwrap();
        }
    }
    fs::write(dir.path().join("grid.csv"), text).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "evaluate",
            "--input",
            "grid.csv",
            "--rule",
            "crps",
            "--group-by",
            "month",
            "--group-by",
            "location",
            "--out",
            "o",
        ],
    );
    assert_ok(&out);
    let report = json(&dir.path().join("o/evaluation.json"));
    let months = report["groups"]["month"].as_object().unwrap();
    assert_eq!(months.len(), 3); // Jan-Mar 1961
    assert!(months.contains_key("1961-02"));
    let locations = report["groups"]["location"].as_object().unwrap();
    assert_eq!(locations.len(), 2);
    // every group carries one entry per (model, method)
    for (_, entries) in locations {
        assert_eq!(entries.as_array().unwrap().len(), 4); // 1 model x (OF,OV,DV,PW)
    }
}

#[test]
fn output_paths_land_in_the_requested_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_step_csv(&dir.path().join("step.csv"));
    let deep: PathBuf = dir.path().join("nested/reports");
    assert_ok(&run_in(
        dir.path(),
        &[
            "detect",
            "--input",
            "step.csv",
            "--out",
            deep.to_str().unwrap(),
        ],
    ));
    assert!(deep.join("segments.csv").is_file());
    assert!(deep.join("detect.json").is_file());
}
