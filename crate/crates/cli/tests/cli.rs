use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tcm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcm"))
        .args(args)
        .current_dir(dir)
        .env_remove("TCM_THREADS")
        .output()
        .expect("spawn tcm")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, horizon: f64) {
    let text = format!(
        "[grid]\nn = 8\n\n[integrator]\nstepping = \"fixed\"\ndt = 0.01\nhorizon = {horizon:?}\nsample_every = 0.05\n\n[initial]\nc0 = 0.01\n\n[output]\ndir = \"out\"\n"
    );
    fs::write(dir.join(name), text).unwrap();
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(String::from)
        .collect()
}

#[test]
fn zero_horizon_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.toml", 0.0);
    let o = tcm(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("time,"));
    assert!(dir.path().join("out/final.tcms").exists());
}

#[test]
fn usage_and_config_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tcm(dir.path(), &["simulate"])), 2);
    assert_eq!(code(&tcm(dir.path(), &["nonsense"])), 2);

    fs::write(dir.path().join("bad.toml"), "[model]\nnu = -1.0\n").unwrap();
    let o = tcm(dir.path(), &["simulate", "--config", "bad.toml"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.nu"));

    fs::write(dir.path().join("typo.toml"), "[grid]\nnn = 8\n").unwrap();
    assert_eq!(code(&tcm(dir.path(), &["simulate", "--config", "typo.toml"])), 3);

    assert_eq!(code(&tcm(dir.path(), &["simulate", "--config", "absent.toml"])), 4);
    write_config(dir.path(), "run.toml", 0.1);
    let o = tcm(dir.path(), &["simulate", "--config", "run.toml", "--resume", "absent.tcms"]);
    assert_eq!(code(&o), 4);
    let o = tcm(dir.path(), &["--threads", "0", "simulate", "--config", "run.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn resume_appends_to_the_series() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "first.toml", 0.1);
    write_config(dir.path(), "second.toml", 0.2);
    let o = tcm(dir.path(), &["simulate", "--config", "first.toml"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&dir.path().join("out/series.csv")).len(), 3);
    fs::copy(dir.path().join("out/final.tcms"), dir.path().join("mid.tcms")).unwrap();

    let o = tcm(
        dir.path(),
        &["simulate", "--config", "second.toml", "--resume", "mid.tcms"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let resumed = data_lines(&dir.path().join("out/series.csv"));
    assert_eq!(resumed.len(), 5);

    fs::remove_dir_all(dir.path().join("out")).unwrap();
    let o = tcm(dir.path(), &["simulate", "--config", "second.toml"]);
    assert_eq!(code(&o), 0);
    let straight = data_lines(&dir.path().join("out/series.csv"));
    let time = |l: &String| l.split(',').next().unwrap().parse::<f64>().unwrap();
    let times: Vec<f64> = resumed.iter().map(time).collect();
    let expect: Vec<f64> = straight.iter().map(time).collect();
    for (a, b) in times.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }

    let mut other = fs::read_to_string(dir.path().join("second.toml")).unwrap();
    other.push_str("\n[model]\nnu = 2.0\n");
    fs::write(dir.path().join("other.toml"), other).unwrap();
    let o = tcm(
        dir.path(),
        &["simulate", "--config", "other.toml", "--resume", "mid.tcms"],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn sweep_writes_one_row_per_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.toml", 0.1);
    let o = tcm(
        dir.path(),
        &["sweep", "--config", "run.toml", "--c0", "1e-3,1e-2", "--out", "s.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("c0,R,violations"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains("decay")));

    let o = tcm(dir.path(), &["sweep", "--config", "run.toml", "--c0", "x"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn plotdata_splits_columns() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.toml", 0.1);
    assert_eq!(code(&tcm(dir.path(), &["simulate", "--config", "run.toml"])), 0);
    let o = tcm(
        dir.path(),
        &["plotdata", "--series", "out/series.csv", "--out", "plots"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pi = fs::read_to_string(dir.path().join("plots/pi.dat")).unwrap();
    let lines: Vec<&str> = pi.lines().collect();
    assert_eq!(lines[0], "# time pi");
    assert_eq!(lines.len(), 4);
    let n_files = fs::read_dir(dir.path().join("plots")).unwrap().count();
    assert_eq!(n_files, 18);
}

#[test]
fn inequalities_write_ratios() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.toml", 0.1);
    let args = ["inequalities", "--config", "run.toml", "--samples", "4", "--seed", "1"];
    assert_eq!(code(&tcm(dir.path(), &args)), 3);
    let mut text = fs::read_to_string(dir.path().join("run.toml")).unwrap();
    text = text.replace("c0 = 0.01\n", "c0 = 0.01\nband = 2\n");
    fs::write(dir.path().join("run.toml"), text).unwrap();
    let o = tcm(
        dir.path(),
        &[
            "inequalities", "--config", "run.toml", "--samples", "4", "--seed", "1", "--out",
            "ineq.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("ineq.csv")).unwrap();
    assert!(text.lines().count() > 1);
}

#[test]
fn verify_passes_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[grid]\nn = 16\n").unwrap();
    let o = tcm(dir.path(), &["--threads", "1", "verify", "--config", "run.toml"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}\n{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout.contains("all 4 checks passed"));
}
