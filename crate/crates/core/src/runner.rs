//! Run orchestration: initial condition, time loop, snapshot output, and the
//! convergence-study harness.

use std::path::PathBuf;
use std::time::Instant;

use crate::basis::OperatorSet;
use crate::config::{RunConfig, SnapshotFormat};
use crate::error::{Result, SolverError};
use crate::field::{NodalField, ViscosityField};
use crate::mesh::MeshTopology;
use crate::oracles::{self, RiemannExact, VortexParams};
use crate::output;
use crate::problems::{self, Problem, ProblemKind};
use crate::real::Real;
use crate::spatial;
use crate::timeint::{self, RkWorkspace, StepController};
use crate::trvisc::{self, TrViscosity};

/// Everything a run needs, resolved from a configuration.
pub struct Setup<R> {
    pub problem: Problem<R>,
    pub mesh: MeshTopology<R>,
    pub ops: OperatorSet<R>,
    pub c_mu: R,
    pub t_end: R,
    pub lambda_hat: R,
    pub mu_max: R,
    pub controller: StepController<R>,
    pub format: SnapshotFormat,
}

/// Resolve the configuration against the problem registry and the initial
/// data (for the wavespeed estimate feeding the viscosity cap).
pub fn resolve<R: Real>(cfg: &RunConfig<R>) -> Result<(Setup<R>, NodalField<R>)> {
    cfg.validate()?;
    let problem = problems::by_id::<R>(&cfg.problem, cfg.gamma)?;
    let mesh = problem.build_mesh(cfg.counts)?;
    let ops = OperatorSet::new(cfg.p);
    let state = problem.initial_state(&mesh, &ops);
    spatial::check_admissible(&state, &problem.system)
        .map_err(|e| SolverError::Config(format!("initial condition: {e}")))?;
    let c_mu = cfg.c_mu.unwrap_or(problem.c_mu_default);
    let t_end = cfg.t_end.unwrap_or(problem.t_end_default);
    let lambda_hat = match cfg.lambda_hat {
        Some(l) => l,
        None => trvisc::wavespeed_estimate(&state, &problem.system),
    };
    if !(lambda_hat > R::zero()) {
        return Err(SolverError::Config(
            "wavespeed estimate is zero; supply lambda_hat".into(),
        ));
    }
    let mu_max = trvisc::viscosity_cap(&mesh, cfg.c_max, lambda_hat);
    let controller = StepController { cfl: cfg.cfl, cfl_visc: cfg.cfl_visc, t_end };
    let format = cfg.format.unwrap_or(if mesh.dim == 1 {
        SnapshotFormat::Text
    } else {
        SnapshotFormat::Vtk
    });
    Ok((
        Setup { problem, mesh, ops, c_mu, t_end, lambda_hat, mu_max, controller, format },
        state,
    ))
}

/// Outcome of a completed run.
pub struct RunSummary<R> {
    pub state: NodalField<R>,
    pub mu: ViscosityField<R>,
    pub steps: usize,
    pub t: R,
    pub wall_seconds: f64,
    pub files: Vec<PathBuf>,
}

/// Advance the state to the end time without touching the filesystem.
pub fn run_in_memory<R: Real>(cfg: &RunConfig<R>) -> Result<RunSummary<R>> {
    let (setup, state) = resolve(cfg)?;
    advance(&setup, state, None).map_err(|(err, _)| err)
}

/// Execute a configured run and write the final state, the viscosity field,
/// and the manifest. A numerical abort leaves a crash snapshot behind.
pub fn run<R: Real>(cfg: &RunConfig<R>) -> Result<RunSummary<R>> {
    let (setup, state) = resolve(cfg)?;
    let sink = OutputSink {
        dir: cfg.out_dir.clone(),
        every: cfg.every,
        format: setup.format,
    };
    let started = Instant::now();
    let result = advance(&setup, state, Some(&sink));
    let mut summary = match result {
        Ok(summary) => summary,
        Err((err, crash)) => {
            if let Some((state, mu, t)) = crash {
                let _ = sink.write_named("crash", &state, &mu, &setup);
                eprintln!("numerical abort at t = {t}: {err}");
            }
            return Err(err);
        }
    };
    let ext = match setup.format {
        SnapshotFormat::Text => "txt",
        SnapshotFormat::Vtk => "vtk",
    };
    let sol_path = sink.dir.join(format!("solution.{ext}"));
    sink.write_to(&sol_path, &summary.state, &summary.mu, &setup)?;
    let mu_path = sink.dir.join("viscosity.txt");
    output::write_mu_field(&mu_path, &summary.mu, &setup.mesh, &setup.problem.system)?;
    let manifest_path = sink.dir.join("manifest.txt");
    output::write_manifest(&manifest_path, &manifest_entries(cfg, &setup, &summary))?;
    summary.files = vec![sol_path, mu_path, manifest_path];
    summary.wall_seconds = started.elapsed().as_secs_f64();
    Ok(summary)
}

struct OutputSink {
    dir: PathBuf,
    every: usize,
    format: SnapshotFormat,
}

impl OutputSink {
    fn write_named<R: Real>(
        &self,
        stem: &str,
        state: &NodalField<R>,
        mu: &ViscosityField<R>,
        setup: &Setup<R>,
    ) -> Result<PathBuf> {
        let ext = match self.format {
            SnapshotFormat::Text => "txt",
            SnapshotFormat::Vtk => "vtk",
        };
        let path = self.dir.join(format!("{stem}.{ext}"));
        self.write_to(&path, state, mu, setup)?;
        Ok(path)
    }

    fn write_to<R: Real>(
        &self,
        path: &PathBuf,
        state: &NodalField<R>,
        mu: &ViscosityField<R>,
        setup: &Setup<R>,
    ) -> Result<()> {
        match self.format {
            SnapshotFormat::Text => output::write_snapshot_1d(
                path,
                state,
                mu,
                &setup.mesh,
                &setup.ops,
                &setup.problem.system,
            ),
            SnapshotFormat::Vtk => output::write_snapshot_vtk(
                path,
                state,
                mu,
                &setup.mesh,
                &setup.ops,
                &setup.problem.system,
                setup.problem.id,
            ),
        }
    }
}

type CrashInfo<R> = Option<(NodalField<R>, ViscosityField<R>, R)>;

/// Time loop. On a numerical failure returns the error together with the
/// last healthy state for the crash snapshot.
#[allow(clippy::type_complexity)]
fn advance<R: Real>(
    setup: &Setup<R>,
    mut state: NodalField<R>,
    sink: Option<&OutputSink>,
) -> std::result::Result<RunSummary<R>, (SolverError, CrashInfo<R>)> {
    let started = Instant::now();
    let sys = &setup.problem.system;
    let cfg = TrViscosity::new(setup.c_mu, setup.mu_max, setup.lambda_hat, setup.mesh.max_mesh_scale());
    let mut ws = RkWorkspace::like(&state);
    let mut mu_prev: Option<ViscosityField<R>> = None;
    let mut t = R::zero();
    let mut steps = 0usize;
    let report_every = 500;
    while t < setup.t_end {
        let mut dt = timeint::compute_dt(&state, &setup.mesh, &setup.ops, sys, mu_prev.as_ref(), &setup.controller)
            .map_err(|e| (e, None))?;
        // Size the step against the viscosity of the *current* state, not
        // just the previous step's: a transient (a forced-to-cap element in
        // particular) must shrink dt before the stage updates see it.
        let mu0 = initial_viscosity(&state, dt, setup, &cfg, &mut ws).map_err(|e| (e, None))?;
        dt = dt.min(
            timeint::compute_dt(&state, &setup.mesh, &setup.ops, sys, Some(&mu0), &setup.controller)
                .map_err(|e| (e, None))?,
        );
        mu_prev = Some(mu0);
        dt = timeint::clip_dt(dt, t, setup.t_end);
        let before = state.clone();
        // An inadmissible stage state is retried with the offending elements
        // forced to the viscosity cap and the step reduced to the cap's
        // stable size; only a repeat failure aborts the run.
        let mut forced: Vec<usize> = Vec::new();
        let mut attempt = 0usize;
        loop {
            match timeint::rk4_step_controlled(
                &mut state,
                dt,
                &setup.mesh,
                &setup.ops,
                sys,
                &cfg,
                Some(&setup.controller),
                &forced,
                &mut ws,
            ) {
                Ok(mu) => {
                    mu_prev = Some(mu);
                    break;
                }
                Err(SolverError::Inadmissible { element, detail }) if attempt < 4 => {
                    attempt += 1;
                    if !forced.contains(&element) {
                        forced.push(element);
                    }
                    let fac = R::from_usize_exact(2 * setup.ops.p + 1);
                    let h = setup.mesh.h[element];
                    let grind = setup.controller.cfl_visc * h * h / (fac * fac * setup.mu_max);
                    dt = timeint::clip_dt(dt.min(grind), t, setup.t_end);
                    state.data.copy_from_slice(&before.data);
                    eprintln!(
                        "step {steps}: inadmissible stage state in element {element} ({detail}); retrying with dt {:.3e}",
                        dt.to_f64_lossy()
                    );
                }
                Err(err) => {
                    let mu = mu_prev.unwrap_or_else(|| {
                        ViscosityField::zeros(state.n_elems, state.n_vars)
                    });
                    return Err((err, Some((before, mu, t))));
                }
            }
        }
        t += dt;
        steps += 1;
        if steps % report_every == 0 {
            let mu = mu_prev.as_ref().unwrap();
            let max_mu: Vec<String> = (0..state.n_vars)
                .map(|k| format!("{:.3e}", mu.max_var(k).to_f64_lossy()))
                .collect();
            eprintln!(
                "step {steps} t {:.6e} dt {:.3e} max_mu [{}]",
                t.to_f64_lossy(),
                dt.to_f64_lossy(),
                max_mu.join(" ")
            );
        }
        if let Some(sink) = sink {
            if sink.every > 0 && steps % sink.every == 0 {
                let mu = mu_prev.as_ref().unwrap();
                sink.write_named(&format!("snap_{steps:06}"), &state, mu, setup)
                    .map_err(|e| (e, None))?;
            }
        }
    }
    let mu = match mu_prev {
        Some(mu) => mu,
        None => ViscosityField::zeros(state.n_elems, state.n_vars),
    };
    Ok(RunSummary {
        state,
        mu,
        steps,
        t,
        wall_seconds: started.elapsed().as_secs_f64(),
        files: Vec::new(),
    })
}

fn initial_viscosity<R: Real>(
    state: &NodalField<R>,
    dt: R,
    setup: &Setup<R>,
    cfg: &TrViscosity<R>,
    ws: &mut RkWorkspace<R>,
) -> Result<ViscosityField<R>> {
    timeint::stage_viscosity(state, dt, &setup.mesh, &setup.ops, &setup.problem.system, cfg, ws)
}

fn manifest_entries<R: Real>(
    cfg: &RunConfig<R>,
    setup: &Setup<R>,
    summary: &RunSummary<R>,
) -> Vec<(String, String)> {
    let mut out = vec![
        ("problem".to_string(), setup.problem.id.to_string()),
        ("p".to_string(), cfg.p.to_string()),
        ("nx".to_string(), cfg.counts[0].to_string()),
        (
            "ny".to_string(),
            if setup.mesh.dim == 2 { cfg.counts[1].to_string() } else { "1".to_string() },
        ),
        ("solution_points".to_string(), "gauss-legendre".to_string()),
        ("correction".to_string(), "dg".to_string()),
        ("c_mu".to_string(), format!("{:.17e}", setup.c_mu.to_f64_lossy())),
        ("c_max".to_string(), format!("{:.17e}", cfg.c_max.to_f64_lossy())),
        ("cfl".to_string(), format!("{:.17e}", cfg.cfl.to_f64_lossy())),
        ("cfl_visc".to_string(), format!("{:.17e}", cfg.cfl_visc.to_f64_lossy())),
        ("t_end".to_string(), format!("{:.17e}", setup.t_end.to_f64_lossy())),
        ("lambda_hat".to_string(), format!("{:.17e}", setup.lambda_hat.to_f64_lossy())),
        ("mu_max".to_string(), format!("{:.17e}", setup.mu_max.to_f64_lossy())),
        ("steps".to_string(), summary.steps.to_string()),
        ("wall_seconds".to_string(), format!("{:.3}", summary.wall_seconds)),
    ];
    if let Some(g) = setup.problem.system.gamma() {
        out.push(("gamma".to_string(), format!("{:.17e}", g.to_f64_lossy())));
    }
    out
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow<R> {
    pub n: usize,
    pub error: R,
}

/// Errors over a mesh sequence plus the fitted convergence rate.
#[derive(Debug, Clone)]
pub struct ConvergenceTable<R> {
    pub rows: Vec<ConvergenceRow<R>>,
    pub rate: R,
}

/// Density error of a finished run against the problem's exact solution.
pub fn density_error<R: Real>(
    setup: &Setup<R>,
    state: &NodalField<R>,
    t: R,
) -> Result<R> {
    let sys = &setup.problem.system;
    match setup.problem.kind {
        ProblemKind::Sod => {
            let (l, r) = oracles::sod_states::<R>();
            let rp = RiemannExact::solve(l, r, sys.gamma().unwrap())?;
            let exact = move |x: [R; 2]| oracles::sod_exact(&rp, R::of(0.5), x[0], t)[0];
            Ok(oracles::l1_pointmean(state, 0, &setup.mesh, &setup.ops, &exact))
        }
        ProblemKind::Vortex => {
            let params = VortexParams::<R>::default();
            let exact = move |x: [R; 2]| oracles::vortex_primitive(&params, x, t)[0];
            Ok(oracles::l2_error(state, 0, &setup.mesh, &setup.ops, &exact))
        }
        _ => Err(SolverError::Config(format!(
            "problem '{}' has no exact-solution error metric",
            setup.problem.id
        ))),
    }
}

/// Run the configuration across a mesh sequence and fit the convergence
/// rate of the density error (L1 point-mean for the shock-tube, L2 for the
/// vortex).
pub fn convergence<R: Real>(
    cfg: &RunConfig<R>,
    meshes: &[usize],
) -> Result<ConvergenceTable<R>> {
    if meshes.len() < 3 {
        return Err(SolverError::Config("need at least 3 meshes".into()));
    }
    let mut rows = Vec::new();
    for &n in meshes {
        let mut member = cfg.clone();
        member.counts = [n, n];
        let (setup, _) = resolve(&member)?;
        let summary = run_in_memory(&member)?;
        let error = density_error(&setup, &summary.state, summary.t)?;
        rows.push(ConvergenceRow { n, error });
    }
    let ns: Vec<R> = rows.iter().map(|r| R::from_usize_exact(r.n)).collect();
    let errs: Vec<R> = rows.iter().map(|r| r.error).collect();
    let rate = fit_rate(&ns, &errs);
    Ok(ConvergenceTable { rows, rate })
}

/// Least-squares convergence rate: the negated slope of log(error) against
/// log(n). A flat error sequence fits rate zero.
pub fn fit_rate<R: Real>(ns: &[R], errors: &[R]) -> R {
    assert_eq!(ns.len(), errors.len());
    let n = R::from_usize_exact(ns.len());
    let xs: Vec<R> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<R> = errors.iter().map(|v| v.max(R::of(1e-300)).ln()).collect();
    let xbar = xs.iter().fold(R::zero(), |a, b| a + *b) / n;
    let ybar = ys.iter().fold(R::zero(), |a, b| a + *b) / n;
    let mut num = R::zero();
    let mut den = R::zero();
    for (x, y) in xs.iter().zip(&ys) {
        num += (*x - xbar) * (*y - ybar);
        den += (*x - xbar) * (*x - xbar);
    }
    -(num / den)
}
