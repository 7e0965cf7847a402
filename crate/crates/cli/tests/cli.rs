//! Black-box tests of the command-line driver and its exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frsolver"))
}

#[test]
fn list_presets_names_the_shipped_cases() {
    let out = bin().arg("list-presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for preset in ["sod-p3-n50", "burgers-p4-n15", "orszag-tang-p3-n32"] {
        assert!(text.contains(preset), "missing {preset}");
    }
}

#[test]
fn config_errors_exit_with_code_2_and_write_nothing() {
    let dir = std::env::temp_dir().join("fr_cli_badcfg");
    let _ = std::fs::remove_dir_all(&dir);

    let out = bin().args(["run", "no-such-preset"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args([
            "run",
            "sod-p3-n20",
            "discretization.p=-1",
            &format!("output.dir={}", dir.display()),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists(), "files written despite config error");

    let out = bin().args(["convergence", "sod-p3-n20"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "convergence without --meshes");
}

#[test]
fn run_writes_solution_viscosity_and_manifest() {
    let dir = std::env::temp_dir().join("fr_cli_run");
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "run",
            "sod-p3-n20",
            "problem.t_end=0.002",
            &format!("output.dir={}", dir.display()),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["solution.txt", "viscosity.txt", "manifest.txt"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
}

#[test]
fn oracle_writes_profiles() {
    let dir = std::env::temp_dir().join("fr_cli_oracle");
    let _ = std::fs::remove_dir_all(&dir);
    let path = dir.join("sod.txt");
    let out = bin()
        .args(["oracle", "sod", "--at", "0.2", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# columns: x rho v P"));
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() > 1000);

    let out = bin().args(["oracle", "sod", "--at", "0.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing --out must be a config error");
}
