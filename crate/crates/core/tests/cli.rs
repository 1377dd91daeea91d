use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, config: &str, flags: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_warped-torsion"))
        .arg(&cfg)
        .args(flags)
        .output()
        .unwrap()
}

#[test]
fn verify_writes_report_and_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = run(
        dir.path(),
        "geometry=spherical\nn=2\nR0=0.7853981634\ncommand=verify\nNs=64\nNtheta=128\n",
        &["--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(&out).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "label,hypothesis_class,lhs,rhs,abs_residual,rel_residual,verdict");
    assert_eq!(lines.count(), 10);
    assert!(dir.path().join("report.catalog.csv").exists());
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "command=radial\ngeometry=hyperbolic\nn=3\nR0=1\nseed=7\nsamples=20\n";
    let first = run(dir.path(), cfg, &["--format", "json"]);
    let second = run(dir.path(), cfg, &["--format", "json"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let rows: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 20);
}

#[test]
fn sweep_table_has_one_row_per_member() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        "command=sweep\ngeometry=euclidean\nR0=1\nfamily=offset\nvalues=0,0.05,0.1,0.2\nNs=32\nNtheta=64\n",
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("parameter,J,c_mean,c_std,error"));
}

#[test]
fn config_errors_exit_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "geometry=spherical\nR0=2.0\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("R0"), "{err}");

    let o = run(dir.path(), "Ntheta=15\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("Ntheta"));
}

#[test]
fn solver_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "command=solve\nNs=16\nNtheta=32\n", &["--max_iter", "1", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(3));
}
