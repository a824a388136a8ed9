use std::path::Path;
use std::process::{Command, Output};

fn otfs_mbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otfs-mbm"))
        .args(args)
        .env_remove("OTFS_MBM_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const NOISELESS: &str = r#"
[system]
N = 2
M = 2
N_R = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[channel]
paths = 1

[sweep]
snr_db = [10]
max_trials = 200
noise = false
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_large_frame_preset() {
    let o = otfs_mbm(&["analyze", "--preset", "fig4b"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("84.2"), "{text}");
    assert!(text.contains("63.2"), "{text}");
    // Closed form only: identical on every run.
    assert_eq!(stdout(&otfs_mbm(&["analyze", "--preset", "fig4b"])), text);
}

#[test]
fn noiseless_simulation_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "clean.toml", NOISELESS);
    let o = otfs_mbm(&["simulate", "--config", &cfg, "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("# otfs-mbm results; config-sha256="));
    assert!(lines[0].ends_with("master-seed=9"));
    assert_eq!(
        lines[1],
        "scheme,snr_db,trials,bits_sent,bit_errors,ber,eta_bits_per_frame,throughput,seed"
    );
    // The quoted scheme label contains a comma; read the numeric tail.
    assert!(lines[2].starts_with("\"otfs-mbm(M_q=4,n_RF=2)\",10.0,"));
    let fields: Vec<&str> = lines[2].rsplit(',').collect();
    let [seed, _throughput, eta, ber, errors, bits, trials] = fields[..7] else { unreachable!() };
    assert_eq!((trials, bits, errors, eta, seed), ("200", "3200", "0", "16", "9"));
    assert_eq!(ber.parse::<f64>().unwrap(), 0.0);
}

#[test]
fn out_directory_and_worker_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", &NOISELESS.replace("noise = false", "noise = true"));
    let out = dir.path().join("results");
    let csv = |workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_otfs-mbm"))
            .args(["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
            .env("OTFS_MBM_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("run.csv")).unwrap()
    };
    assert_eq!(csv("1"), csv("4"));
}

#[test]
fn selftest_passes() {
    let o = otfs_mbm(&["selftest"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("PASS oracle-equivalence"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn presets_listing() {
    let o = otfs_mbm(&["presets", "--list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(names, ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6", "fig7", "fig8"]);

    let shown = stdout(&otfs_mbm(&["presets", "--show", "fig5"]));
    assert!(shown.contains("n_RF = 3"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [&["simulate", "--bogus"][..], &["analyze"], &["frobnicate"], &[]] {
        let o = otfs_mbm(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &NOISELESS.replace("M_q = 4", "M_q = 3"));
    let o = otfs_mbm(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("M_q") && err.contains("line 9"), "{err}");

    let o = otfs_mbm(&["analyze", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let o = otfs_mbm(&["analyze", "--preset", "fig99"]);
    assert_eq!(o.status.code(), Some(1));
}
