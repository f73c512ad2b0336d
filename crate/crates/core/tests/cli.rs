use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-pon"))
}

fn scenario(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn analyze_reference_point() {
    let out = cli().arg("analyze").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() == 2, "{text}");
}

#[test]
fn parse_errors_exit_with_one() {
    let f = scenario("C = 10 Gb/s\nJ = many\n");
    let out = cli().args(["analyze", "--scenario"]).arg(f.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(cli().arg("frobnicate").output().unwrap().status.code(), Some(1));
}

#[test]
fn infeasible_exits_with_two() {
    let f = scenario("t_g = 100 us\n");
    let out = cli().args(["analyze", "--scenario"]).arg(f.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_reports() {
    let f = scenario("replications = 2\nduration = 0.2 s\nwarmup = 0.02 s\nsweep chi = 0.1, 0.3\n");
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["sweep", "--low-traffic-polling", "on", "--scenario"])
        .arg(f.path())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["blocking-table", "delay-curve", "jitter-report", "stability-report"] {
        let body = std::fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        assert!(body.lines().count() > 2, "{name}");
    }
    let delay = std::fs::read_to_string(dir.path().join("delay-curve.csv")).unwrap();
    assert!(delay.lines().nth(1).unwrap().contains(",on,"));
}
