//! End-to-end solver behavior: shipped presets, output determinism, and
//! manifest completeness.

use fr_core::config::RunConfig;
use fr_core::runner;

#[test]
fn burgers_preset_stays_bounded_with_mid_domain_shock() {
    let mut cfg = RunConfig::<f64>::default();
    cfg.problem = "burgers".into();
    cfg.p = 4;
    cfg.counts = [15, 1];
    let summary = runner::run_in_memory(&cfg).unwrap();
    let (lo, hi) = summary.state.min_max_var(0);
    assert!(lo > 1.0 - 5e-2 && hi < 3.0 + 5e-2, "range [{lo}, {hi}]");

    // Steepest drop sits in the middle elements at t = 0.5.
    let (setup, _) = runner::resolve(&cfg).unwrap();
    let mut worst = (0.0, 0.0);
    let mut prev: Option<(f64, f64)> = None;
    for e in 0..setup.mesh.n_elems() {
        for i in 0..setup.ops.n {
            let x = setup.mesh.point_in_elem(e, setup.ops.points[i], 0.0)[0];
            let u = summary.state.at(e, 0, i);
            if let Some((_, pu)) = prev {
                if pu - u > worst.0 {
                    worst = (pu - u, x);
                }
            }
            prev = Some((x, u));
        }
    }
    assert!(worst.1 > 0.35 && worst.1 < 0.65, "shock at x = {}", worst.1);
}

#[test]
fn identical_configs_write_identical_files() {
    let base = std::env::temp_dir().join("fr_determinism");
    let _ = std::fs::remove_dir_all(&base);
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let mut cfg = RunConfig::<f64>::default();
        cfg.problem = "sod".into();
        cfg.p = 3;
        cfg.counts = [20, 1];
        cfg.t_end = Some(0.05);
        cfg.out_dir = base.join(run);
        let summary = runner::run(&cfg).unwrap();
        assert!(summary.steps > 0);
        files.push((
            std::fs::read(cfg.out_dir.join("solution.txt")).unwrap(),
            std::fs::read(cfg.out_dir.join("viscosity.txt")).unwrap(),
        ));
    }
    assert_eq!(files[0].0, files[1].0, "solution files differ");
    assert_eq!(files[0].1, files[1].1, "viscosity files differ");
}

#[test]
fn manifest_lists_every_result_affecting_tunable() {
    let out = std::env::temp_dir().join("fr_manifest");
    let _ = std::fs::remove_dir_all(&out);
    let mut cfg = RunConfig::<f64>::default();
    cfg.problem = "burgers".into();
    cfg.p = 2;
    cfg.counts = [8, 1];
    cfg.t_end = Some(0.01);
    cfg.out_dir = out.clone();
    runner::run(&cfg).unwrap();
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    for key in [
        "problem",
        "p",
        "nx",
        "c_mu",
        "c_max",
        "cfl",
        "cfl_visc",
        "t_end",
        "lambda_hat",
        "mu_max",
        "solution_points",
        "correction",
        "steps",
        "wall_seconds",
    ] {
        assert!(
            manifest.lines().any(|l| l.starts_with(&format!("{key} "))),
            "manifest missing {key}:\n{manifest}"
        );
    }
}

#[test]
fn smooth_vortex_run_exports_tiny_viscosity() {
    // At spectral resolution the defect at the smooth vortex sits many
    // orders below shock levels; every exported viscosity column stays
    // under 1e-6.
    let mut cfg = RunConfig::<f64>::default();
    cfg.problem = "vortex".into();
    cfg.p = 7;
    cfg.counts = [24, 24];
    cfg.t_end = Some(0.2);
    let summary = runner::run_in_memory(&cfg).unwrap();
    for k in 0..4 {
        let mu = summary.mu.max_var(k);
        assert!(mu < 1e-6, "component {k} viscosity {mu:.3e}");
    }
}

#[test]
fn crash_leaves_a_snapshot_and_numerical_error() {
    // An inadmissible initial condition is a config error; an admissible one
    // that collapses mid-run must abort with a crash snapshot. A huge CFL
    // forces the collapse.
    let out = std::env::temp_dir().join("fr_crash");
    let _ = std::fs::remove_dir_all(&out);
    let mut cfg = RunConfig::<f64>::default();
    cfg.problem = "sod".into();
    cfg.p = 4;
    cfg.counts = [20, 1];
    cfg.cfl = 40.0;
    cfg.cfl_visc = 40.0;
    cfg.out_dir = out.clone();
    match runner::run(&cfg) {
        Err(fr_core::SolverError::Inadmissible { .. })
        | Err(fr_core::SolverError::Numerical(_)) => {
            assert!(out.join("crash.txt").exists(), "crash snapshot missing");
        }
        Err(other) => panic!("expected numerical abort, got {other}"),
        Ok(_) => panic!("expected numerical abort, run succeeded"),
    }
}
