use std::path::Path;
use std::process::{Command, Output};

fn uplink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uplink"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eval_prints_one_row_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", "{}");
    let o = uplink(&["eval", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "eta_a,eta_w,P_gw,F_ic,P_S,eta_tot,F,error");
}

#[test]
fn eval_accepts_toml_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "altitude_m = 200e3\nground_separation_m = 300e3\n",
    );
    let out = dir.path().join("r.json");
    let o = uplink(&[
        "eval",
        "--config",
        &cfg,
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"F\": 9."));
}

#[test]
fn defaults_flag_prints_loadable_document() {
    let o = uplink(&["--defaults"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", &String::from_utf8(o.stdout).unwrap());
    assert_eq!(uplink(&["eval", "--config", &cfg]).status.code(), Some(0));
}

#[test]
fn zero_window_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.json", r#"{"gating_window_s": 0}"#);
    let o = uplink(&["eval", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gating_window_s > 0"));
}

#[test]
fn unknown_key_names_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.json",
        "{\n  \"beam\": {\n    \"aperture_radus_m\": 1}}",
    );
    let o = uplink(&["eval", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("beam.aperture_radus_m"), "{e}");
    assert!(e.contains("line 3"), "{e}");
}

#[test]
fn missing_config_file_is_exit_one() {
    let o = uplink(&["eval", "--config", "/nonexistent/s.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_arguments_are_exit_one() {
    assert_eq!(uplink(&["bogus"]).status.code(), Some(1));
    assert_eq!(uplink(&[]).status.code(), Some(1));
    assert_eq!(
        uplink(&["figure", "--preset", "fig9", "--out", "x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn below_horizon_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", r#"{"altitude_m": 1000}"#);
    let o = uplink(&["eval", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon"));
}

#[test]
fn unwritable_output_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", "{}");
    let o = uplink(&["eval", "--config", &cfg, "--out", "/nonexistent/dir/r.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sw.json",
        r#"{"axes": [{"param": "altitude_m", "start": 300e3, "stop": 900e3, "step": 100e3},
                     {"param": "gating_window_s", "values": [20e-9, 40e-9]}]}"#,
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = uplink(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 1 + 7 * 2);
    assert!(text.starts_with("altitude_m,gating_window_s,eta_a,"));
}

#[test]
fn sweep_records_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sw.json",
        r#"{"scenario": {"ground_separation_m": 1000e3},
            "axes": [{"param": "altitude_m", "values": [10e3, 500e3]}]}"#,
    );
    let out = dir.path().join("r.csv");
    let o = uplink(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("1 of 2"));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("horizon"));
}

#[test]
fn figure_preset_writes_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = uplink(&["figure", "--preset", "fig2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 50);
    assert!(text.starts_with("temporal_width_s,gating_window_s,"));
}

#[test]
fn optimizer_budget_exhaustion_is_exit_three_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"free": [{"param": "gating_window_s", "lower": 5e-9, "upper": 100e-9},
                     {"param": "altitude_m", "lower": 300e3, "upper": 1200e3}],
            "max_evaluations": 8, "restarts": 1}"#,
    );
    let out = dir.path().join("trace.csv");
    let o = uplink(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("gating_window_s,altitude_m,"));
    assert!(text.lines().count() > 1);
}

#[test]
fn optimizer_converges_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"free": [{"param": "gating_window_s", "lower": 5e-9, "upper": 100e-9}],
            "max_evaluations": 400, "restarts": 2}"#,
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let mut stdouts = Vec::new();
    for out in [&a, &b] {
        let o = uplink(&[
            "optimize",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdouts.push(o.stdout);
    }
    assert_eq!(stdouts[0], stdouts[1]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
