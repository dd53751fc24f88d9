//! End-to-end runs of the `acmor` binary over a small configuration.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_acmor")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("acmor_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_demo_config(dir: &Path) -> PathBuf {
    let path = dir.join("demo.cfg");
    std::fs::write(
        &path,
        format!(
            r#"
[problem]
domain = 0 1 0 1
bc = neumann
potential = quartic

[mesh]
h = 0.125

[time]
t_end = 0.3
dt = 0.03

[parameter]
kind = inverse_diffusivity
train = 10 40
test = 25

[initial]
kind = tanh_circle
center = 0.5 0.5
radius = 0.25

[rom]
n_max = 5
tol_greedy = 1e-8
m_deim = 15

[output]
dir = {}
"#,
            dir.join("out").display()
        ),
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(binary()).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn full_pipeline_produces_artifacts() {
    let dir = workdir("pipeline");
    let cfg = write_demo_config(&dir);
    let cfg_s = cfg.to_str().unwrap();
    let out = dir.join("out");

    let (code, stdout, stderr) = run(&["greedy", "--config", cfg_s]);
    assert_eq!(code, 0, "greedy failed: {stderr}");
    assert!(stdout.contains("greedy:"));
    for artifact in [
        "basis.bin",
        "basis_singular_values.csv",
        "deim_modes.bin",
        "deim_indices.csv",
        "selected.csv",
        "indicator_history.csv",
        "greedy_summary.txt",
    ] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }

    let (code, _, stderr) = run(&["fom", "--config", cfg_s, "--export-mesh", "--export-operators"]);
    assert_eq!(code, 0, "fom failed: {stderr}");
    assert!(out.join("fom_mu25.bin").exists());
    assert!(out.join("fom_mu25_energies.csv").exists());
    assert!(out.join("vertices.csv").exists());
    assert!(out.join("triangles.csv").exists());
    assert!(out.join("stiffness_unit.coo").exists());
    assert!(out.join("mass.coo").exists());

    // energies decrease monotonically in the written trace
    let energies = acmor::io::read_csv(&out.join("fom_mu25_energies.csv")).unwrap();
    for w in energies.windows(2) {
        assert!(w[1][1] <= w[0][1] + 1e-10, "energy trace must not increase");
    }

    for mode in ["exact", "deim"] {
        let (code, _, stderr) = run(&["rom", "--config", cfg_s, "--mode", mode]);
        assert_eq!(code, 0, "rom {mode} failed: {stderr}");
        assert!(out.join(format!("rom_mu25_{mode}.bin")).exists());
        assert!(out.join(format!("rom_mu25_{mode}_energies.csv")).exists());
    }

    let (code, stdout, stderr) = run(&["compare", "--config", cfg_s]);
    assert_eq!(code, 0, "compare failed: {stderr}");
    assert!(stdout.contains("comparison at mu = 25"));
    assert!(out.join("compare_report.csv").exists());

    let (code, stdout, stderr) = run(&["stability", "--config", cfg_s]);
    assert_eq!(code, 0, "stability failed: {stderr}");
    assert!(stdout.contains("satisfied"));
    assert!(out.join("stability_mu25.txt").exists());
    assert!(out.join("stability_mu25_bounds.csv").exists());

    // bench appends its own CSV
    let (code, stdout, stderr) = run(&["bench", "--config", cfg_s]);
    assert_eq!(code, 0, "bench failed: {stderr}");
    assert!(stdout.contains("best of 3"));
    assert!(out.join("bench_report.csv").exists());
}

#[test]
fn compare_reruns_reproduce_error_columns() {
    let dir = workdir("determinism");
    let cfg = write_demo_config(&dir);
    let cfg_s = cfg.to_str().unwrap();
    let out = dir.join("out");

    let (code, _, stderr) = run(&["greedy", "--config", cfg_s]);
    assert_eq!(code, 0, "{stderr}");
    for _ in 0..2 {
        let (code, _, stderr) = run(&["compare", "--config", cfg_s]);
        assert_eq!(code, 0, "{stderr}");
    }
    let rows = acmor::io::read_csv(&out.join("compare_report.csv")).unwrap();
    assert_eq!(rows.len(), 2, "append-only report keeps both runs");
    // error columns (1..=4) are bitwise reproducible; timings may differ
    for c in 1..=4 {
        let a = rows[0][c];
        let b = rows[1][c];
        assert!(
            (a - b).abs() <= 1e-12 * a.abs().max(1e-300),
            "column {c} differs between reruns: {a} vs {b}"
        );
    }
}

#[test]
fn error_paths_use_documented_exit_codes() {
    let dir = workdir("exitcodes");

    // unreadable config
    let (code, _, stderr) = run(&["fom", "--config", dir.join("nope.cfg").to_str().unwrap()]);
    assert_eq!(code, 2, "missing config must exit 2: {stderr}");

    // syntactically broken config
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "[problem]\nbc = neumann\n").unwrap();
    let (code, _, _) = run(&["fom", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);

    // rom before greedy: missing artifacts
    let cfg = write_demo_config(&dir);
    let (code, _, stderr) = run(&["rom", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2, "missing basis must exit 2: {stderr}");

    // --seed on a non-random initial condition
    let (code, _, _) = run(&["fom", "--config", cfg.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code, 2);
}
