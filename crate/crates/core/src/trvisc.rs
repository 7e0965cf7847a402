//! Time-reversibility artificial viscosity.
//!
//! A state is advanced one forward Euler sub-step with the upwind-biased
//! residual, then pulled back one sub-step with the downwind-biased residual.
//! The component-wise mismatch between the original and recovered states (the
//! defect) vanishes where the solution is smooth and scales like the local
//! jump at a shock, and is turned into a per-variable, element-wise constant
//! viscosity
//!
//! `mu = c_mu (h^2 / dt) mean(defect) / delta_u`,
//!
//! where `delta_u` is the global range of each variable and the element mean
//! is quadrature weighted. A global cap `mu_max = c_max lambda_hat h_max`
//! computed once from the initial data keeps transients from collapsing the
//! explicit time step.

use crate::basis::OperatorSet;
use crate::error::{Result, SolverError};
use crate::field::{NodalField, ViscosityField};
use crate::mesh::MeshTopology;
use crate::real::Real;
use crate::riemann::FluxBias;
use crate::spatial::{self, Workspace};
use crate::system::SystemSpec;

/// Tunables of the viscosity construction.
#[derive(Debug, Clone)]
pub struct TrViscosity<R> {
    pub c_mu: R,
    pub mu_max: R,
    /// Noise cutoff: element viscosities below this snap to zero.
    ///
    /// Element-wise constant viscosity built from resolution-level defects
    /// is spatially incoherent; the viscous-flux mismatch it creates at
    /// faces re-excites the defect and the pair can self-amplify from
    /// arbitrarily small seeds. Defects at the resolution floor carry no
    /// shock information, so they produce exactly no viscosity. Scales with
    /// `c_mu`, which keeps `mu` exactly proportional to `c_mu` below the
    /// cap.
    pub mu_floor: R,
    /// A-priori wavespeed estimate; sizes the admissibility screen.
    pub lambda_hat: R,
}

impl<R: Real> TrViscosity<R> {
    /// Floor factor applied to `c_mu * lambda_hat * h_max`.
    pub const FLOOR_FACTOR: f64 = 1e-6;

    pub fn new(c_mu: R, mu_max: R, lambda_hat: R, h_max: R) -> Self {
        TrViscosity {
            c_mu,
            mu_max,
            mu_floor: R::of(Self::FLOOR_FACTOR) * c_mu * lambda_hat * h_max,
            lambda_hat,
        }
    }
}

/// Scratch fields for the defect evaluation.
#[derive(Debug)]
pub struct TrScratch<R> {
    pub ubar: NodalField<R>,
    pub rhs_down: NodalField<R>,
    pub defect: NodalField<R>,
}

impl<R: Real> TrScratch<R> {
    pub fn like(field: &NodalField<R>) -> Self {
        TrScratch {
            ubar: field.clone(),
            rhs_down: field.clone(),
            defect: field.clone(),
        }
    }
}

/// Defect of `state` under a forward-then-backward Euler pair of sub-steps
/// of size `dt`, using the hyperbolic-only residual. `rhs_up` must hold the
/// upwind-biased residual of `state`.
///
/// On return `scratch.defect` holds the nodal defect; the returned list names
/// the elements whose forward sub-step left the admissible set (their
/// viscosity is forced to the cap and the sub-step data is discarded).
pub fn tr_defect_from_rhs<R: Real>(
    state: &NodalField<R>,
    rhs_up: &NodalField<R>,
    dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    ws: &mut Workspace<R>,
    scratch: &mut TrScratch<R>,
) -> Result<Vec<usize>> {
    if !(dt > R::zero()) {
        return Err(SolverError::InvalidInput("defect sub-step needs dt > 0".into()));
    }
    // Forward sub-step.
    scratch.ubar.assign_axpy(state, dt, rhs_up);

    // Elements that left the admissible set do not contribute defect data;
    // their pre-step values keep the downwind evaluation finite.
    let mask = spatial::admissible_mask(&scratch.ubar, sys);
    let forced_max: Vec<usize> =
        (0..mask.len()).filter(|&e| !mask[e]).collect();
    if !forced_max.is_empty() {
        let m = state.n_vars;
        for &e in &forced_max {
            for k in 0..m {
                let src = state.elem_var(e, k).to_vec();
                scratch.ubar.elem_var_mut(e, k).copy_from_slice(&src);
            }
        }
    }

    // Backward sub-step with the dissipation sign negated.
    spatial::inviscid_rhs_unchecked(
        &scratch.ubar,
        mesh,
        ops,
        sys,
        FluxBias::Downwind,
        &mut scratch.rhs_down,
        ws,
    )?;

    // defect = |ubar - dt rhs_down - state|
    for i in 0..state.data.len() {
        let reversed = scratch.ubar.data[i] - dt * scratch.rhs_down.data[i];
        scratch.defect.data[i] = (reversed - state.data[i]).abs();
    }
    if scratch.defect.has_nan() {
        return Err(SolverError::Numerical(
            "NaN produced during the reversibility defect evaluation".into(),
        ));
    }
    Ok(forced_max)
}

/// Convenience wrapper that evaluates the upwind residual itself.
pub fn tr_defect<R: Real>(
    state: &NodalField<R>,
    dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
) -> Result<(NodalField<R>, Vec<usize>)> {
    let mut ws = Workspace::new();
    let mut rhs_up = state.clone();
    spatial::inviscid_rhs(state, mesh, ops, sys, FluxBias::Upwind, &mut rhs_up, &mut ws)?;
    let mut scratch = TrScratch::like(state);
    let forced = tr_defect_from_rhs(state, &rhs_up, dt, mesh, ops, sys, &mut ws, &mut scratch)?;
    Ok((scratch.defect, forced))
}

/// Defect rate: the small-sub-step limit of the two-sub-step defect,
/// `lim_{dt -> 0} D / dt = |R_up(u) - R_down(u)|` pointwise. The production
/// viscosity uses this limit so the indicator measures spatial
/// irreversibility alone, free of the O(dt^2) Euler truncation of the
/// sub-step pair (which would otherwise act as an O(h^3) background
/// diffusion under CFL step sizes).
///
/// `screen_dt` is the step used only to screen the forward sub-step state
/// for admissibility; offending elements are returned for forcing to the
/// cap. On return `scratch.defect` holds the rate.
#[allow(clippy::too_many_arguments)]
pub fn tr_defect_rate_from_rhs<R: Real>(
    state: &NodalField<R>,
    rhs_up: &NodalField<R>,
    screen_dt: R,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    ws: &mut Workspace<R>,
    scratch: &mut TrScratch<R>,
) -> Result<Vec<usize>> {
    // Admissibility screen of the forward sub-step state.
    scratch.ubar.assign_axpy(state, screen_dt, rhs_up);
    let mask = spatial::admissible_mask(&scratch.ubar, sys);
    let forced_max: Vec<usize> = (0..mask.len()).filter(|&e| !mask[e]).collect();

    spatial::inviscid_rhs_unchecked(
        state,
        mesh,
        ops,
        sys,
        FluxBias::Downwind,
        &mut scratch.rhs_down,
        ws,
    )?;
    // Signed rate; the element reduction takes the magnitude of the mean,
    // which telescopes to the net interface dissipation and recovers the
    // first-order analysis scaling at every order.
    for i in 0..state.data.len() {
        scratch.defect.data[i] = rhs_up.data[i] - scratch.rhs_down.data[i];
    }
    if scratch.defect.has_nan() {
        return Err(SolverError::Numerical(
            "NaN produced during the reversibility defect evaluation".into(),
        ));
    }
    Ok(forced_max)
}

/// Per-variable normalization: global solution range, floored away from zero.
pub fn normalization<R: Real>(state: &NodalField<R>) -> Vec<R> {
    let eps = R::of(1e-12);
    (0..state.n_vars)
        .map(|k| {
            let (lo, hi) = state.min_max_var(k);
            let range = hi - lo;
            let floor = eps + eps * lo.abs().max(hi.abs());
            range.max(floor)
        })
        .collect()
}

/// Scale the element-mean defect into the capped viscosity field,
/// `mu = c_mu (h^2 / dt) mean(D) / delta_u`.
pub fn viscosity_from_defect<R: Real>(
    defect: &NodalField<R>,
    delta_u: &[R],
    cfg: &TrViscosity<R>,
    forced_max: &[usize],
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    dt: R,
) -> Result<ViscosityField<R>> {
    if !(dt > R::zero()) {
        return Err(SolverError::InvalidInput("viscosity scaling needs dt > 0".into()));
    }
    let mut out = scale_defect(defect, delta_u, cfg, forced_max, mesh, ops, R::one() / dt)?;
    out.dt = dt;
    Ok(out)
}

/// Scale an element-mean defect *rate* (defect per unit sub-step) into the
/// capped viscosity field, `mu = c_mu h^2 mean(rate) / delta_u`. This is
/// [`viscosity_from_defect`] in the small-sub-step limit.
pub fn viscosity_from_defect_rate<R: Real>(
    rate: &NodalField<R>,
    delta_u: &[R],
    cfg: &TrViscosity<R>,
    forced_max: &[usize],
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
) -> Result<ViscosityField<R>> {
    scale_defect(rate, delta_u, cfg, forced_max, mesh, ops, R::one())
}

fn scale_defect<R: Real>(
    defect: &NodalField<R>,
    delta_u: &[R],
    cfg: &TrViscosity<R>,
    forced_max: &[usize],
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    inv_dt: R,
) -> Result<ViscosityField<R>> {
    let m = defect.n_vars;
    let w2 = spatial::tensor_weights(ops, mesh.dim);
    let mut out = ViscosityField::zeros(defect.n_elems, m);
    out.c_mu = cfg.c_mu;
    out.dt = R::zero();
    out.mu_max = cfg.mu_max;
    out.delta_u = delta_u.to_vec();
    for e in 0..defect.n_elems {
        let h2 = mesh.h[e] * mesh.h[e];
        let scale = cfg.c_mu * h2 * inv_dt;
        for k in 0..m {
            let mu = (scale * spatial::weighted_mean(defect.elem_var(e, k), &w2).abs()
                / delta_u[k])
                .min(cfg.mu_max);
            out.mu[e * m + k] = if mu < cfg.mu_floor { R::zero() } else { mu };
        }
    }
    for &e in forced_max {
        for k in 0..m {
            out.mu[e * m + k] = cfg.mu_max;
        }
    }
    Ok(out)
}

/// Global viscosity cap `c_max lambda_hat h_max`, computed once before time
/// stepping.
pub fn viscosity_cap<R: Real>(mesh: &MeshTopology<R>, c_max: R, lambda_hat: R) -> R {
    c_max * lambda_hat * mesh.max_mesh_scale()
}

/// A-priori wavespeed estimate: the fastest pointwise signal speed of a
/// state, typically the initial condition.
pub fn wavespeed_estimate<R: Real>(state: &NodalField<R>, sys: &SystemSpec<R>) -> R {
    let mut u = [R::zero(); 8];
    let mut best = R::zero();
    for e in 0..state.n_elems {
        for i in 0..state.nodes_per_elem {
            state.state_at(e, i, &mut u[..state.n_vars]);
            best = best.max(sys.point_speed(&u[..state.n_vars]));
        }
    }
    best
}
