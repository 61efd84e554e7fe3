use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshfree-bench"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn table1_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = bench(&["table1", "--out", arg(path)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 10);
    assert!(!text.contains('\r'));
    assert!(text.starts_with("scheme,mode,n,problem,tip_mm,"));
    let ns: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ns, ["3", "5", "10", "15", "20", "30", "40", "50", "60"]);
    let timing = std::fs::read_to_string(dir.path().join("a.csv.timing")).unwrap();
    assert_eq!(timing.lines().count(), 10);
}

#[test]
fn run_writes_a_profile() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, profile) = (dir.path().join("run.csv"), dir.path().join("profile.csv"));
    let out = bench(&["run", "--n", "20", "--out", arg(&csv), "--profile", arg(&profile), "--timing", "inline"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<String> = std::fs::read_to_string(&profile).unwrap().lines().map(String::from).collect();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0], "position_mm,displacement_mm,oracle_mm");
    let tip: f64 = rows[100].split(',').nth(1).unwrap().parse().unwrap();
    assert!((tip - 0.0248).abs() <= 5e-4);
    let summary = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(summary.lines().count(), 2);
    let wall = summary.lines().nth(1).unwrap().split(',').nth(10).unwrap();
    assert!(wall.parse::<f64>().is_ok());
}

#[test]
fn config_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bar.cfg");
    std::fs::write(&config, "# corrected bar\nmode = corrected\nn_list = 5, 10\n").unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = bench(&["sweep", "--config", arg(&config), "--out", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.starts_with("fpm,corrected,") && l.ends_with(",ok")));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "colour = red\n").unwrap();
    assert_eq!(bench(&["run", "--config", arg(&config)]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--mode", "corrected", "--n", "2"]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--full"]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--scheme", "fem"]).status.code(), Some(2));
}

#[test]
fn failed_runs_exit_with_1() {
    let out = bench(&["run", "--n", "200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("assembly failed"));
}

#[test]
fn fig3_reports_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3.csv");
    let profile = dir.path().join("axis.csv");
    let out = bench(&["beam3d-fig3", "--out", arg(&csv), "--profile", arg(&profile)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
    assert!(dir.path().join("axis_fpm-n30-plain.csv").exists());
    assert!(dir.path().join("axis_fpm-n30-stab.csv").exists());
}
