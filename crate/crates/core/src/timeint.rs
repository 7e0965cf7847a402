//! Explicit RK4 time integration with CFL step control and a per-stage
//! refresh of the reversibility viscosity.

use crate::basis::OperatorSet;
use crate::error::{Result, SolverError};
use crate::field::{NodalField, ViscosityField};
use crate::mesh::MeshTopology;
use crate::real::Real;
use crate::riemann::FluxBias;
use crate::spatial::{self, Workspace};
use crate::system::SystemSpec;
use crate::trvisc::{self, TrScratch, TrViscosity};

/// CFL numbers and the time horizon of a run.
#[derive(Debug, Clone)]
pub struct StepController<R> {
    /// Advective CFL, scaled by 2p + 1.
    pub cfl: R,
    /// Viscous CFL, scaled by (2p + 1)^2.
    pub cfl_visc: R,
    pub t_end: R,
}

impl<R: Real> StepController<R> {
    pub fn new(t_end: R) -> Self {
        StepController { cfl: R::of(0.4), cfl_visc: R::of(0.2), t_end }
    }
}

/// Stable step from the advective and viscous CFL bounds,
/// `min_e [ cfl h / ((2p+1) lambda_e), cfl_v h^2 / ((2p+1)^2 mu_e) ]`.
pub fn compute_dt<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    mu: Option<&ViscosityField<R>>,
    ctrl: &StepController<R>,
) -> Result<R> {
    let fac = R::from_usize_exact(2 * ops.p + 1);
    let mut dt = R::infinity();
    let mut u = [R::zero(); 8];
    for e in 0..state.n_elems {
        let mut lambda = R::zero();
        for i in 0..state.nodes_per_elem {
            state.state_at(e, i, &mut u[..state.n_vars]);
            lambda = lambda.max(sys.point_speed(&u[..state.n_vars]));
        }
        let h = mesh.h[e];
        if lambda > R::zero() {
            dt = dt.min(ctrl.cfl * h / (fac * lambda));
        }
        if let Some(mu) = mu {
            let mu_e = mu.elem_max(e);
            if mu_e > R::zero() {
                dt = dt.min(ctrl.cfl_visc * h * h / (fac * fac * mu_e));
            }
        }
    }
    if !dt.is_finite() {
        return Err(SolverError::Numerical(
            "nothing evolves: zero wavespeed and zero viscosity everywhere".into(),
        ));
    }
    Ok(dt)
}

/// Clip a step so the run lands exactly on the end time.
pub fn clip_dt<R: Real>(dt: R, t: R, t_end: R) -> R {
    if t + dt > t_end {
        t_end - t
    } else {
        dt
    }
}

/// Buffers for one RK4 step.
#[derive(Debug)]
pub struct RkWorkspace<R> {
    pub spatial: Workspace<R>,
    pub tr: TrScratch<R>,
    pub stage: NodalField<R>,
    pub rhs: NodalField<R>,
    pub visc: NodalField<R>,
    pub acc: NodalField<R>,
}

impl<R: Real> RkWorkspace<R> {
    pub fn like(field: &NodalField<R>) -> Self {
        RkWorkspace {
            spatial: Workspace::new(),
            tr: TrScratch::like(field),
            stage: field.clone(),
            rhs: field.clone(),
            visc: field.clone(),
            acc: field.clone(),
        }
    }
}

/// Classical four-stage RK4 driven by an arbitrary derivative evaluation.
pub fn rk4_explicit<R, F>(
    state: &mut NodalField<R>,
    dt: R,
    mut deriv: F,
    stage: &mut NodalField<R>,
    rhs: &mut NodalField<R>,
    acc: &mut NodalField<R>,
) -> Result<()>
where
    R: Real,
    F: FnMut(&NodalField<R>, &mut NodalField<R>) -> Result<()>,
{
    let half = R::of(0.5);
    let sixth = dt / R::of(6.0);
    let third = dt / R::of(3.0);
    acc.data.copy_from_slice(&state.data);

    deriv(state, rhs)?;
    acc.axpy(sixth, rhs);
    stage.assign_axpy(state, half * dt, rhs);

    deriv(stage, rhs)?;
    acc.axpy(third, rhs);
    stage.assign_axpy(state, half * dt, rhs);

    deriv(stage, rhs)?;
    acc.axpy(third, rhs);
    stage.assign_axpy(state, dt, rhs);

    deriv(stage, rhs)?;
    acc.axpy(sixth, rhs);

    state.data.copy_from_slice(&acc.data);
    Ok(())
}

/// Total stage derivative: upwind hyperbolic residual plus the viscous
/// residual under the stage's freshly evaluated reversibility viscosity.
/// The viscosity uses the defect rate (small-sub-step limit); the full step
/// size only screens the forward sub-step state for admissibility.
///
/// The *applied* viscosity is clamped per element to the value the viscous
/// CFL bound associates with the current step, `cfl_v h^2 / ((2p+1)^2 dt)`:
/// a viscosity that appears mid-step (a variable born at a shear layer, or
/// an element forced to the cap) would otherwise drive the stage update
/// beyond the stability of the step size chosen before it existed. The
/// returned field is unclamped, so the next step's size accounts for it in
/// full.
#[allow(clippy::too_many_arguments)]
fn stage_derivative<R: Real>(
    w: &NodalField<R>,
    dt_full: R,
    stage_mu_limit: Option<(R, R)>,
    extra_forced: &[usize],
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    cfg: &TrViscosity<R>,
    ws: &mut Workspace<R>,
    tr: &mut TrScratch<R>,
    rhs: &mut NodalField<R>,
    visc: &mut NodalField<R>,
) -> Result<ViscosityField<R>> {
    spatial::check_admissible(w, sys)?;
    spatial::inviscid_rhs_unchecked(w, mesh, ops, sys, FluxBias::Upwind, rhs, ws)?;
    // Screen the forward sub-step at no less than the advective step scale:
    // a viscous-bound dt can be small enough that an impending transient
    // would slip past the screen unseen.
    let fac = R::from_usize_exact(2 * ops.p + 1);
    let screen_dt = dt_full.max(
        R::of(0.4) * mesh.max_mesh_scale() / (fac * cfg.lambda_hat.max(R::of(1e-300))),
    );
    let mut forced = trvisc::tr_defect_rate_from_rhs(w, rhs, screen_dt, mesh, ops, sys, ws, tr)?;
    forced.extend_from_slice(extra_forced);
    let delta_u = trvisc::normalization(w);
    let mu = trvisc::viscosity_from_defect_rate(&tr.defect, &delta_u, cfg, &forced, mesh, ops)?;
    match stage_mu_limit {
        Some((cfl_visc, fac2)) => {
            let mut applied = mu.clone();
            for e in 0..mesh.n_elems() {
                let h = mesh.h[e];
                let stable = cfl_visc * h * h / (fac2 * dt_full);
                for k in 0..applied.n_vars {
                    let idx = e * applied.n_vars + k;
                    applied.mu[idx] = applied.mu[idx].min(stable);
                }
            }
            spatial::viscous_rhs(w, &applied, mesh, ops, sys, visc, ws)?;
        }
        None => {
            spatial::viscous_rhs(w, &mu, mesh, ops, sys, visc, ws)?;
        }
    }
    rhs.axpy(R::one(), visc);
    Ok(mu)
}

/// Reversibility viscosity of a state, exactly as an RK stage would compute
/// it. `screen_dt` sizes the forward sub-step admissibility screen.
pub fn stage_viscosity<R: Real>(
    state: &NodalField<R>,
    screen_dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    cfg: &TrViscosity<R>,
    ws: &mut RkWorkspace<R>,
) -> Result<ViscosityField<R>> {
    spatial::check_admissible(state, sys)?;
    spatial::inviscid_rhs_unchecked(
        state,
        mesh,
        ops,
        sys,
        FluxBias::Upwind,
        &mut ws.rhs,
        &mut ws.spatial,
    )?;
    let forced = trvisc::tr_defect_rate_from_rhs(
        state,
        &ws.rhs,
        screen_dt,
        mesh,
        ops,
        sys,
        &mut ws.spatial,
        &mut ws.tr,
    )?;
    let delta_u = trvisc::normalization(state);
    trvisc::viscosity_from_defect_rate(&ws.tr.defect, &delta_u, cfg, &forced, mesh, ops)
}

/// One RK4 step with the viscosity refreshed from each stage state; the
/// defect sub-step size is the full step `dt`. Returns the last stage's
/// viscosity for diagnostics and the next step-size estimate.
pub fn rk4_step<R: Real>(
    state: &mut NodalField<R>,
    dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    cfg: &TrViscosity<R>,
    ws: &mut RkWorkspace<R>,
) -> Result<ViscosityField<R>> {
    rk4_step_controlled(state, dt, mesh, ops, sys, cfg, None, &[], ws)
}

/// [`rk4_step`] with the stage-level viscosity clamp tied to a controller's
/// viscous CFL, and an optional set of elements whose viscosity is forced
/// to the cap (a retry after an inadmissible stage state).
#[allow(clippy::too_many_arguments)]
pub fn rk4_step_controlled<R: Real>(
    state: &mut NodalField<R>,
    dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    cfg: &TrViscosity<R>,
    ctrl: Option<&StepController<R>>,
    extra_forced: &[usize],
    ws: &mut RkWorkspace<R>,
) -> Result<ViscosityField<R>> {
    let fac = R::from_usize_exact(2 * ops.p + 1);
    let limit = ctrl.map(|c| (c.cfl_visc, fac * fac));
    let RkWorkspace { spatial: sp, tr, stage, rhs, visc, acc } = ws;
    let mut last_mu = None;
    rk4_explicit(
        state,
        dt,
        |w, out| {
            let mu = stage_derivative(w, dt, limit, extra_forced, mesh, ops, sys, cfg, sp, tr, out, visc)?;
            last_mu = Some(mu);
            Ok(())
        },
        stage,
        rhs,
        acc,
    )?;
    Ok(last_mu.expect("four stages ran"))
}
