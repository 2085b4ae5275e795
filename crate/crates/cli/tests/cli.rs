use std::path::Path;
use std::process::{Command, Output};

fn henonlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henonlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {out:?}"))
        .parse()
        .unwrap()
}

#[test]
fn lyapunov_formula_at_two_is_log_two() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(
        d.path(),
        &[
            "lyapunov-1d",
            "--a",
            "2",
            "--method",
            "critical-formula",
            "--tol",
            "1e-9",
        ],
    );
    assert!(o.status.success());
    let v = field(&stdout(&o), "value");
    assert!((v - std::f64::consts::LN_2).abs() <= 1e-9, "{v}");
}

#[test]
fn manifest_records_resolved_config() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(
        d.path(),
        &["census", "--a", "10", "--b", "0.3", "--n", "3", "--out", "c.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("c.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 0);
    assert_eq!(m["config"]["command"]["census"]["n"], 3);
    assert_eq!(m["exit_status"], 0);
    assert!(m["versions"]["henonlab"].is_string());
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
    let census: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(census["verdict"], "consistent");
}

#[test]
fn zero_jacobian_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(d.path(), &["render-slice", "--a", "6", "--b", "0", "--res", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b"));
    assert!(std::fs::read_dir(d.path()).unwrap().next().is_none());
}

#[test]
fn unknown_flag_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        henonlab(d.path(), &["census", "--a", "1", "--b", "0.3", "--bogus"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn cost_cap_is_budget_exhaustion() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(
        d.path(),
        &[
            "render-param",
            "--probe",
            "connectivity",
            "--ab",
            "0",
            "1",
            "0.1",
            "0.2",
            "--cost-cap",
            "10",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn expired_wall_clock_gives_partial_result() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(
        d.path(),
        &["connectivity-1d", "--a", "0.1", "--budget-secs", "0", "--out", "c.json"],
    );
    assert_eq!(o.status.code(), Some(3));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(r["partial"], true);
    assert_eq!(r["result"]["verdict"], "undecided");
}

#[test]
fn bad_thread_cap_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_henonlab"))
        .args(["green", "--a", "2"])
        .current_dir(d.path())
        .env("HENONLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn png_and_hslc_describe_the_same_image() {
    let d = tempfile::tempdir().unwrap();
    for out in ["s.hslc", "s.png"] {
        let o = henonlab(
            d.path(),
            &["render-slice", "--a", "6", "--b", "0.3", "--res", "32", "--out", out],
        );
        assert!(o.status.success());
    }
    let img = henonlab::slices::read_hslc(&std::fs::read(d.path().join("s.hslc")).unwrap()).unwrap();
    let png = std::fs::read(d.path().join("s.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");
    assert_eq!(png, henonlab_cli::tiles::write_png(&img));
}

#[test]
fn horseshoe_certificate_reads_back() {
    let d = tempfile::tempdir().unwrap();
    let o = henonlab(
        d.path(),
        &["horseshoe-certify", "--a", "10", "--b", "0.3", "--out", "c.txt"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("verified = true"));
    let text = std::fs::read_to_string(d.path().join("c.txt")).unwrap();
    let c = henonlab::horseshoe::certificate_from_text(&text).unwrap();
    assert!(c.verified);
    assert_eq!(c.a, 10.0);
}
