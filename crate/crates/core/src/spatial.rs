//! Flux-reconstruction semidiscretizations on structured meshes.
//!
//! The inviscid residual is the corrected divergence of the collocation flux:
//! element-local fluxes at the solution points, common interface fluxes from
//! the Riemann solver, and the interface mismatch distributed into the
//! element through the DG correction-function derivatives, dimension by
//! dimension. The viscous residual uses the BR1 construction: corrected
//! gradients with centered interface solution values, then a corrected
//! divergence of the viscous flux with centered interface flux values.
//!
//! All loops run in a fixed element/face order, so results are bit
//! reproducible.

use crate::basis::OperatorSet;
use crate::error::{Result, SolverError};
use crate::field::{NodalField, ViscosityField};
use crate::mesh::{BoundaryTag, FaceSide, MeshTopology};
use crate::real::Real;
use crate::riemann::{rusanov_into, FluxBias};
use crate::system::SystemSpec;

const MAX_VARS: usize = 8;

/// Scratch buffers reused across residual evaluations.
#[derive(Debug, Default)]
pub struct Workspace<R> {
    /// Solution (or viscous-flux) traces, `[elem][side][var][q]`.
    traces: Vec<R>,
    /// Common interface values, `[face][var][q]`.
    face_common: Vec<R>,
    /// Corrected gradients, `[elem][var][axis][node]`.
    grads: Vec<R>,
    /// Centered magnetic-field interface values, `[face][q]`.
    face_b: Vec<R>,
    /// Corrected div B, `[elem][node]`.
    divb: Vec<R>,
    /// Per-element collocation flux, `[var][axis][node]`.
    flux: Vec<R>,
    /// Per-element flux traces, `[side][var][q]`.
    ftrace: Vec<R>,
    shape: (usize, usize, usize, usize),
}

impl<R: Real> Workspace<R> {
    pub fn new() -> Self {
        Workspace::default()
    }

    fn ensure(&mut self, mesh: &MeshTopology<R>, ops: &OperatorSet<R>, m: usize) {
        let n_elems = mesh.n_elems();
        let n1 = ops.n;
        let dim = mesh.dim;
        let shape = (n_elems, m, n1, dim);
        if self.shape == shape {
            return;
        }
        let nodes = n1.pow(dim as u32);
        let sides = 2 * dim;
        self.traces = vec![R::zero(); n_elems * sides * m * n1];
        self.face_common = vec![R::zero(); mesh.faces.len() * m * n1];
        self.grads = vec![R::zero(); n_elems * m * dim * nodes];
        self.face_b = vec![R::zero(); mesh.faces.len() * n1];
        self.divb = vec![R::zero(); n_elems * nodes];
        self.flux = vec![R::zero(); m * dim * nodes];
        self.ftrace = vec![R::zero(); sides * m * n1];
        self.shape = shape;
    }
}

#[inline]
fn tr_idx(m: usize, n1: usize, sides: usize, e: usize, side: usize, k: usize) -> usize {
    ((e * sides + side) * m + k) * n1
}

/// Fail with the offending element if any node is inadmissible.
pub fn check_admissible<R: Real>(state: &NodalField<R>, sys: &SystemSpec<R>) -> Result<()> {
    let mut u = [R::zero(); MAX_VARS];
    for e in 0..state.n_elems {
        for i in 0..state.nodes_per_elem {
            state.state_at(e, i, &mut u[..state.n_vars]);
            if !sys.admissible(&u[..state.n_vars]) {
                return Err(SolverError::Inadmissible {
                    element: e,
                    detail: format!("state {:?}", &u[..state.n_vars]),
                });
            }
        }
    }
    Ok(())
}

/// Per-element admissibility mask, true where every node is admissible.
pub fn admissible_mask<R: Real>(state: &NodalField<R>, sys: &SystemSpec<R>) -> Vec<bool> {
    let mut mask = vec![true; state.n_elems];
    let mut u = [R::zero(); MAX_VARS];
    for e in 0..state.n_elems {
        for i in 0..state.nodes_per_elem {
            state.state_at(e, i, &mut u[..state.n_vars]);
            if !sys.admissible(&u[..state.n_vars]) {
                mask[e] = false;
                break;
            }
        }
    }
    mask
}

/// Interpolate one nodal block to the low/high faces of `axis`.
#[inline]
fn gather_axis_traces<R: Real>(
    ops: &OperatorSet<R>,
    dim: usize,
    axis: usize,
    vals: &[R],
    lo: &mut [R],
    hi: &mut [R],
) {
    let n1 = ops.n;
    if dim == 1 {
        let mut l = R::zero();
        let mut h = R::zero();
        for i in 0..n1 {
            l += ops.interp_left[i] * vals[i];
            h += ops.interp_right[i] * vals[i];
        }
        lo[0] = l;
        hi[0] = h;
    } else if axis == 0 {
        for j in 0..n1 {
            let row = &vals[j * n1..(j + 1) * n1];
            let mut l = R::zero();
            let mut h = R::zero();
            for i in 0..n1 {
                l += ops.interp_left[i] * row[i];
                h += ops.interp_right[i] * row[i];
            }
            lo[j] = l;
            hi[j] = h;
        }
    } else {
        lo.fill(R::zero());
        hi.fill(R::zero());
        for j in 0..n1 {
            let cl = ops.interp_left[j];
            let ch = ops.interp_right[j];
            let row = &vals[j * n1..(j + 1) * n1];
            for i in 0..n1 {
                lo[i] += cl * row[i];
                hi[i] += ch * row[i];
            }
        }
    }
}

/// Interpolate every element's nodal values to its face points.
fn compute_traces<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    traces: &mut [R],
) {
    let n1 = ops.n;
    let m = state.n_vars;
    let sides = mesh.sides_per_elem();
    for e in 0..state.n_elems {
        for k in 0..m {
            let vals = state.elem_var(e, k);
            for axis in 0..mesh.dim {
                let lo = tr_idx(m, n1, sides, e, 2 * axis, k);
                let hi = tr_idx(m, n1, sides, e, 2 * axis + 1, k);
                let (head, tail) = traces.split_at_mut(hi);
                gather_axis_traces(
                    ops,
                    mesh.dim,
                    axis,
                    vals,
                    &mut head[lo..lo + n1],
                    &mut tail[..n1],
                );
            }
        }
    }
}

fn ghost_state<R: Real>(tag: &BoundaryTag<R>, interior: &[R], out: &mut [R]) -> Result<()> {
    match tag {
        BoundaryTag::Transmissive => {
            out.copy_from_slice(interior);
            Ok(())
        }
        BoundaryTag::Dirichlet(state) => {
            out.copy_from_slice(state);
            Ok(())
        }
        BoundaryTag::SlipWall => Err(SolverError::InvalidInput(
            "slip-wall boundaries are not implemented".into(),
        )),
        BoundaryTag::Periodic => unreachable!("periodic boundaries close during meshing"),
    }
}

/// Common interface inviscid fluxes on every face, one Riemann solve per
/// face point shared by both adjacent elements.
fn compute_face_fluxes<R: Real>(
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    bias: FluxBias,
    traces: &[R],
    face_common: &mut [R],
) -> Result<()> {
    let n1 = ops.n;
    let m = sys.n_vars();
    let sides = mesh.sides_per_elem();
    let mut u_l = [R::zero(); MAX_VARS];
    let mut u_r = [R::zero(); MAX_VARS];
    let mut f = [R::zero(); MAX_VARS];
    for (fid, face) in mesh.faces.iter().enumerate() {
        let axis = face.axis;
        let normal = face.normal();
        for q in 0..n1 {
            match (&face.minus, &face.plus) {
                (FaceSide::Interior(em), FaceSide::Interior(ep)) => {
                    for k in 0..m {
                        u_l[k] = traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q];
                        u_r[k] = traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q];
                    }
                }
                (FaceSide::Interior(em), FaceSide::Boundary(tag)) => {
                    for k in 0..m {
                        u_l[k] = traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q];
                    }
                    ghost_state(tag, &u_l[..m], &mut u_r[..m])?;
                }
                (FaceSide::Boundary(tag), FaceSide::Interior(ep)) => {
                    for k in 0..m {
                        u_r[k] = traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q];
                    }
                    ghost_state(tag, &u_r[..m], &mut u_l[..m])?;
                }
                (FaceSide::Boundary(_), FaceSide::Boundary(_)) => {
                    unreachable!("face without elements")
                }
            }
            rusanov_into(sys, &u_l[..m], &u_r[..m], &normal, bias, &mut f[..m]);
            for k in 0..m {
                face_common[(fid * m + k) * n1 + q] = f[k];
            }
        }
    }
    Ok(())
}

/// Centered common interface solution values (BR1 gradient pass).
fn compute_face_means<R: Real>(
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    m: usize,
    traces: &[R],
    face_common: &mut [R],
) -> Result<()> {
    let n1 = ops.n;
    let sides = mesh.sides_per_elem();
    let half = R::of(0.5);
    let mut ghost = [R::zero(); MAX_VARS];
    for (fid, face) in mesh.faces.iter().enumerate() {
        let axis = face.axis;
        for q in 0..n1 {
            for k in 0..m {
                let v = match (&face.minus, &face.plus) {
                    (FaceSide::Interior(em), FaceSide::Interior(ep)) => {
                        half * (traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q]
                            + traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q])
                    }
                    (FaceSide::Interior(em), FaceSide::Boundary(tag)) => {
                        let int = traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q];
                        ghost[k] = int;
                        ghost_one(tag, k, int, &mut ghost)?;
                        half * (int + ghost[k])
                    }
                    (FaceSide::Boundary(tag), FaceSide::Interior(ep)) => {
                        let int = traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q];
                        ghost[k] = int;
                        ghost_one(tag, k, int, &mut ghost)?;
                        half * (int + ghost[k])
                    }
                    _ => unreachable!(),
                };
                face_common[(fid * m + k) * n1 + q] = v;
            }
        }
    }
    Ok(())
}

fn ghost_one<R: Real>(tag: &BoundaryTag<R>, k: usize, interior: R, out: &mut [R]) -> Result<()> {
    match tag {
        BoundaryTag::Transmissive => {
            out[k] = interior;
            Ok(())
        }
        BoundaryTag::Dirichlet(state) => {
            out[k] = state[k];
            Ok(())
        }
        BoundaryTag::SlipWall => Err(SolverError::InvalidInput(
            "slip-wall boundaries are not implemented".into(),
        )),
        BoundaryTag::Periodic => unreachable!(),
    }
}

/// Corrected derivative along one axis, accumulated as
/// `out += scale * (D_axis vals + (common - own) g')`.
///
/// `common`/`own` hold the interface values at the axis's low/high faces.
#[allow(clippy::too_many_arguments)]
#[inline]
fn add_corrected_deriv_axis<R: Real>(
    ops: &OperatorSet<R>,
    dim: usize,
    axis: usize,
    scale: R,
    vals: &[R],
    common_lo: &[R],
    common_hi: &[R],
    own_lo: &[R],
    own_hi: &[R],
    out: &mut [R],
) {
    let n1 = ops.n;
    if dim == 1 {
        for i in 0..n1 {
            let mut d = R::zero();
            for l in 0..n1 {
                d += ops.diff[i * n1 + l] * vals[l];
            }
            d += (common_lo[0] - own_lo[0]) * ops.dg_left[i];
            d += (common_hi[0] - own_hi[0]) * ops.dg_right[i];
            out[i] += scale * d;
        }
    } else if axis == 0 {
        for j in 0..n1 {
            let base = j * n1;
            let row = &vals[base..base + n1];
            let c_lo = (common_lo[j] - own_lo[j]) * scale;
            let c_hi = (common_hi[j] - own_hi[j]) * scale;
            for i in 0..n1 {
                let mut d = R::zero();
                for l in 0..n1 {
                    d += ops.diff[i * n1 + l] * row[l];
                }
                out[base + i] += scale * d + c_lo * ops.dg_left[i] + c_hi * ops.dg_right[i];
            }
        }
    } else {
        for j in 0..n1 {
            let base = j * n1;
            for l in 0..n1 {
                let c = ops.diff[j * n1 + l] * scale;
                let src = &vals[l * n1..(l + 1) * n1];
                for i in 0..n1 {
                    out[base + i] += c * src[i];
                }
            }
            let cl = ops.dg_left[j] * scale;
            let ch = ops.dg_right[j] * scale;
            for i in 0..n1 {
                out[base + i] += cl * (common_lo[i] - own_lo[i]) + ch * (common_hi[i] - own_hi[i]);
            }
        }
    }
}

/// Hyperbolic-only residual `-div f` (plus the Powell source for MHD), with
/// the interface dissipation biased by `bias`.
pub fn inviscid_rhs<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    bias: FluxBias,
    out: &mut NodalField<R>,
    ws: &mut Workspace<R>,
) -> Result<()> {
    check_admissible(state, sys)?;
    inviscid_rhs_unchecked(state, mesh, ops, sys, bias, out, ws)
}

/// As [`inviscid_rhs`] but trusting the caller to have screened the state.
pub fn inviscid_rhs_unchecked<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    bias: FluxBias,
    out: &mut NodalField<R>,
    ws: &mut Workspace<R>,
) -> Result<()> {
    let m = sys.n_vars();
    let dim = mesh.dim;
    let n1 = ops.n;
    let nodes = n1.pow(dim as u32);
    let sides = mesh.sides_per_elem();
    ws.ensure(mesh, ops, m);

    compute_traces(state, mesh, ops, &mut ws.traces);
    compute_face_fluxes(mesh, ops, sys, bias, &ws.traces, &mut ws.face_common)?;

    let with_source = sys.has_powell_source();
    if with_source {
        divergence_b_from_traces(state, mesh, ops, sys, &ws.traces, &mut ws.face_b, &mut ws.divb);
    }

    let mut u = [R::zero(); MAX_VARS];
    let mut fbuf = [R::zero(); MAX_VARS];
    out.data.fill(R::zero());
    for e in 0..state.n_elems {
        for i in 0..nodes {
            state.state_at(e, i, &mut u[..m]);
            for axis in 0..dim {
                sys.flux_dir(&u[..m], axis, &mut fbuf[..m]);
                for k in 0..m {
                    ws.flux[(k * dim + axis) * nodes + i] = fbuf[k];
                }
            }
        }
        // Interface traces of the collocation flux, per axis.
        for k in 0..m {
            for axis in 0..dim {
                let fx = &ws.flux[(k * dim + axis) * nodes..(k * dim + axis + 1) * nodes];
                let lo = (2 * axis * m + k) * n1;
                let hi = ((2 * axis + 1) * m + k) * n1;
                let (head, tail) = ws.ftrace.split_at_mut(hi);
                gather_axis_traces(ops, dim, axis, fx, &mut head[lo..lo + n1], &mut tail[..n1]);
            }
        }
        for k in 0..m {
            let res = out.elem_var_mut(e, k);
            for axis in 0..dim {
                let fid_lo = mesh.elem_faces[e][2 * axis];
                let fid_hi = mesh.elem_faces[e][2 * axis + 1];
                let scale = -R::of(2.0) / mesh.widths[e][axis];
                add_corrected_deriv_axis(
                    ops,
                    dim,
                    axis,
                    scale,
                    &ws.flux[(k * dim + axis) * nodes..(k * dim + axis + 1) * nodes],
                    &ws.face_common[(fid_lo * m + k) * n1..(fid_lo * m + k) * n1 + n1],
                    &ws.face_common[(fid_hi * m + k) * n1..(fid_hi * m + k) * n1 + n1],
                    &ws.ftrace[(2 * axis * m + k) * n1..(2 * axis * m + k) * n1 + n1],
                    &ws.ftrace[((2 * axis + 1) * m + k) * n1..((2 * axis + 1) * m + k) * n1 + n1],
                    res,
                );
            }
        }
        if with_source {
            for i in 0..nodes {
                state.state_at(e, i, &mut u[..m]);
                sys.powell_source(&u[..m], ws.divb[e * nodes + i], &mut fbuf[..m]);
                for k in 0..m {
                    let idx = out.idx(e, k, i);
                    out.data[idx] += fbuf[k];
                }
            }
        }
        let _ = sides;
    }
    Ok(())
}

/// Corrected viscous residual `+div (mu grad u)` with BR1 interface values.
/// Variable `k` sees only its own viscosity component.
pub fn viscous_rhs<R: Real>(
    state: &NodalField<R>,
    mu: &ViscosityField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    out: &mut NodalField<R>,
    ws: &mut Workspace<R>,
) -> Result<()> {
    let m = sys.n_vars();
    let dim = mesh.dim;
    let n1 = ops.n;
    let nodes = n1.pow(dim as u32);
    let sides = mesh.sides_per_elem();
    ws.ensure(mesh, ops, m);
    out.data.fill(R::zero());

    if mu.mu.iter().any(|&v| v < R::zero()) {
        return Err(SolverError::InvalidInput("negative viscosity".into()));
    }
    if mu.is_zero() {
        return Ok(());
    }

    // Pass 1: corrected gradients from centered interface solution values.
    compute_traces(state, mesh, ops, &mut ws.traces);
    compute_face_means(mesh, ops, m, &ws.traces, &mut ws.face_common)?;
    ws.grads.fill(R::zero());
    for e in 0..state.n_elems {
        for k in 0..m {
            let vals = state.elem_var(e, k);
            for axis in 0..dim {
                let fid_lo = mesh.elem_faces[e][2 * axis];
                let fid_hi = mesh.elem_faces[e][2 * axis + 1];
                let scale = R::of(2.0) / mesh.widths[e][axis];
                let gbase = ((e * m + k) * dim + axis) * nodes;
                add_corrected_deriv_axis(
                    ops,
                    dim,
                    axis,
                    scale,
                    vals,
                    &ws.face_common[(fid_lo * m + k) * n1..(fid_lo * m + k) * n1 + n1],
                    &ws.face_common[(fid_hi * m + k) * n1..(fid_hi * m + k) * n1 + n1],
                    &ws.traces[tr_idx(m, n1, sides, e, 2 * axis, k)
                        ..tr_idx(m, n1, sides, e, 2 * axis, k) + n1],
                    &ws.traces[tr_idx(m, n1, sides, e, 2 * axis + 1, k)
                        ..tr_idx(m, n1, sides, e, 2 * axis + 1, k) + n1],
                    &mut ws.grads[gbase..gbase + nodes],
                );
            }
        }
    }

    // Scale gradients by the element viscosity: grads now hold G = mu grad u.
    for e in 0..state.n_elems {
        for k in 0..m {
            let muk = mu.at(e, k);
            let gbase = (e * m + k) * dim * nodes;
            for g in &mut ws.grads[gbase..gbase + dim * nodes] {
                *g *= muk;
            }
        }
    }

    // Pass 2: viscous-flux traces (reusing the trace buffer), centered common
    // interface viscous flux, corrected divergence. The trace of the axis
    // component lives in the side slots of that axis.
    for e in 0..state.n_elems {
        for k in 0..m {
            for axis in 0..dim {
                let gbase = ((e * m + k) * dim + axis) * nodes;
                let g = &ws.grads[gbase..gbase + nodes];
                let lo = tr_idx(m, n1, sides, e, 2 * axis, k);
                let hi = tr_idx(m, n1, sides, e, 2 * axis + 1, k);
                let (head, tail) = ws.traces.split_at_mut(hi);
                gather_axis_traces(ops, dim, axis, g, &mut head[lo..lo + n1], &mut tail[..n1]);
            }
        }
    }
    let half = R::of(0.5);
    for (fid, face) in mesh.faces.iter().enumerate() {
        let axis = face.axis;
        for k in 0..m {
            for q in 0..n1 {
                let v = match (&face.minus, &face.plus) {
                    (FaceSide::Interior(em), FaceSide::Interior(ep)) => {
                        half * (ws.traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q]
                            + ws.traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q])
                    }
                    // Interior-only viscous flux at physical boundaries.
                    (FaceSide::Interior(em), FaceSide::Boundary(_)) => {
                        ws.traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q]
                    }
                    (FaceSide::Boundary(_), FaceSide::Interior(ep)) => {
                        ws.traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q]
                    }
                    _ => unreachable!(),
                };
                ws.face_common[(fid * m + k) * n1 + q] = v;
            }
        }
    }
    for e in 0..state.n_elems {
        for k in 0..m {
            let res = out.elem_var_mut(e, k);
            for axis in 0..dim {
                let fid_lo = mesh.elem_faces[e][2 * axis];
                let fid_hi = mesh.elem_faces[e][2 * axis + 1];
                let scale = R::of(2.0) / mesh.widths[e][axis];
                let gbase = ((e * m + k) * dim + axis) * nodes;
                add_corrected_deriv_axis(
                    ops,
                    dim,
                    axis,
                    scale,
                    &ws.grads[gbase..gbase + nodes],
                    &ws.face_common[(fid_lo * m + k) * n1..(fid_lo * m + k) * n1 + n1],
                    &ws.face_common[(fid_hi * m + k) * n1..(fid_hi * m + k) * n1 + n1],
                    &ws.traces[tr_idx(m, n1, sides, e, 2 * axis, k)
                        ..tr_idx(m, n1, sides, e, 2 * axis, k) + n1],
                    &ws.traces[tr_idx(m, n1, sides, e, 2 * axis + 1, k)
                        ..tr_idx(m, n1, sides, e, 2 * axis + 1, k) + n1],
                    res,
                );
            }
        }
    }
    Ok(())
}

/// Corrected divergence of the in-plane magnetic field with centered common
/// interface values, written per solution point into `out`.
pub fn corrected_divergence_b<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    out: &mut [R],
    ws: &mut Workspace<R>,
) {
    ws.ensure(mesh, ops, sys.n_vars());
    compute_traces(state, mesh, ops, &mut ws.traces);
    divergence_b_from_traces(state, mesh, ops, sys, &ws.traces, &mut ws.face_b, &mut ws.divb);
    out.copy_from_slice(&ws.divb);
}

fn divergence_b_from_traces<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    traces: &[R],
    face_b: &mut [R],
    divb: &mut [R],
) {
    let m = state.n_vars;
    let n1 = ops.n;
    let dim = mesh.dim;
    let nodes = n1.pow(dim as u32);
    let sides = mesh.sides_per_elem();
    let bvars = sys.mag_field_vars().expect("system carries a magnetic field");
    let half = R::of(0.5);
    for (fid, face) in mesh.faces.iter().enumerate() {
        let k = bvars[face.axis];
        let axis = face.axis;
        for q in 0..n1 {
            let v = match (&face.minus, &face.plus) {
                (FaceSide::Interior(em), FaceSide::Interior(ep)) => {
                    half * (traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q]
                        + traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q])
                }
                (FaceSide::Interior(em), FaceSide::Boundary(tag)) => {
                    let int = traces[tr_idx(m, n1, sides, *em, 2 * axis + 1, k) + q];
                    match tag {
                        BoundaryTag::Dirichlet(s) => half * (int + s[k]),
                        _ => int,
                    }
                }
                (FaceSide::Boundary(tag), FaceSide::Interior(ep)) => {
                    let int = traces[tr_idx(m, n1, sides, *ep, 2 * axis, k) + q];
                    match tag {
                        BoundaryTag::Dirichlet(s) => half * (int + s[k]),
                        _ => int,
                    }
                }
                _ => unreachable!(),
            };
            face_b[fid * n1 + q] = v;
        }
    }
    divb.fill(R::zero());
    for e in 0..state.n_elems {
        for axis in 0..dim {
            let k = bvars[axis];
            let fid_lo = mesh.elem_faces[e][2 * axis];
            let fid_hi = mesh.elem_faces[e][2 * axis + 1];
            let scale = R::of(2.0) / mesh.widths[e][axis];
            add_corrected_deriv_axis(
                ops,
                dim,
                axis,
                scale,
                state.elem_var(e, k),
                &face_b[fid_lo * n1..fid_lo * n1 + n1],
                &face_b[fid_hi * n1..fid_hi * n1 + n1],
                &traces[tr_idx(m, n1, sides, e, 2 * axis, k)
                    ..tr_idx(m, n1, sides, e, 2 * axis, k) + n1],
                &traces[tr_idx(m, n1, sides, e, 2 * axis + 1, k)
                    ..tr_idx(m, n1, sides, e, 2 * axis + 1, k) + n1],
                &mut divb[e * nodes..(e + 1) * nodes],
            );
        }
    }
}

/// Quadrature-weighted integral of one variable over the mesh.
pub fn quadrature_integral<R: Real>(
    field: &NodalField<R>,
    k: usize,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
) -> R {
    let w2 = tensor_weights(ops, mesh.dim);
    let quarter = R::of(0.25);
    let half = R::of(0.5);
    let mut total = R::zero();
    for e in 0..field.n_elems {
        let jac = if mesh.dim == 1 {
            mesh.widths[e][0] * half
        } else {
            mesh.widths[e][0] * mesh.widths[e][1] * quarter
        };
        let vals = field.elem_var(e, k);
        let mut s = R::zero();
        for (v, w) in vals.iter().zip(&w2) {
            s += *v * *w;
        }
        total += jac * s;
    }
    total
}

/// Tensor-product quadrature weights over the element nodes.
pub fn tensor_weights<R: Real>(ops: &OperatorSet<R>, dim: usize) -> Vec<R> {
    if dim == 1 {
        ops.weights.clone()
    } else {
        let n1 = ops.n;
        let mut w = vec![R::zero(); n1 * n1];
        for j in 0..n1 {
            for i in 0..n1 {
                w[j * n1 + i] = ops.weights[j] * ops.weights[i];
            }
        }
        w
    }
}

/// Quadrature-weighted mean of nodal values with tensor weights `w2`.
pub fn weighted_mean<R: Real>(vals: &[R], w2: &[R]) -> R {
    let mut num = R::zero();
    let mut den = R::zero();
    for (v, w) in vals.iter().zip(w2) {
        num += *v * *w;
        den += *w;
    }
    num / den
}

/// Evaluate the piecewise-polynomial solution at an arbitrary point of a
/// uniform mesh (clamped into the domain).
pub fn sample_at<R: Real>(
    state: &NodalField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    point: [R; 2],
    out: &mut [R],
) {
    let [nx, ny] = mesh.counts;
    let find = |axis: usize, n: usize, x: R| -> usize {
        let lo = mesh.centers[0][axis] - mesh.widths[0][axis] * R::of(0.5);
        let w = mesh.widths[0][axis];
        let idx = ((x - lo) / w).floor().to_f64_lossy() as isize;
        idx.clamp(0, n as isize - 1) as usize
    };
    let ei = find(0, nx, point[0]);
    let e = if mesh.dim == 1 { ei } else { find(1, ny, point[1]) * nx + ei };
    let xi = (point[0] - mesh.centers[e][0]) / (mesh.widths[e][0] * R::of(0.5));
    let n1 = ops.n;
    if mesh.dim == 1 {
        for k in 0..state.n_vars {
            out[k] = ops.eval_at(state.elem_var(e, k), xi);
        }
    } else {
        let eta = (point[1] - mesh.centers[e][1]) / (mesh.widths[e][1] * R::of(0.5));
        let mut line = vec![R::zero(); n1];
        for k in 0..state.n_vars {
            let vals = state.elem_var(e, k);
            for (j, l) in line.iter_mut().enumerate() {
                *l = ops.eval_at(&vals[j * n1..(j + 1) * n1], xi);
            }
            out[k] = ops.eval_at(&line, eta);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryTag as Tag;

    fn periodic_interval(n: usize) -> MeshTopology<f64> {
        MeshTopology::uniform_interval(0.0, 1.0, n, Tag::Periodic, Tag::Periodic).unwrap()
    }

    fn advection1() -> SystemSpec<f64> {
        SystemSpec::Advection { velocity: [1.0, 0.0], dim: 1 }
    }

    fn project_ic<F: Fn([f64; 2], &mut [f64])>(
        mesh: &MeshTopology<f64>,
        ops: &OperatorSet<f64>,
        m: usize,
        f: F,
    ) -> NodalField<f64> {
        let n1 = ops.n;
        let nodes = n1.pow(mesh.dim as u32);
        let mut field = NodalField::zeros(mesh.n_elems(), m, nodes);
        let mut u = vec![0.0; m];
        for e in 0..mesh.n_elems() {
            for i in 0..nodes {
                let (xi, eta) = if mesh.dim == 1 {
                    (ops.points[i], 0.0)
                } else {
                    (ops.points[i % n1], ops.points[i / n1])
                };
                let x = mesh.point_in_elem(e, xi, eta);
                f(x, &mut u);
                for k in 0..m {
                    field.set(e, k, i, u[k]);
                }
            }
        }
        field
    }

    #[test]
    fn free_stream_preserved_2d() {
        let p = Tag::Periodic;
        let mesh = MeshTopology::uniform_quad(
            [[0.0, 1.0], [0.0, 1.0]],
            [4, 4],
            [p.clone(), p.clone(), p.clone(), p],
        )
        .unwrap();
        let ops = OperatorSet::new(3);
        let sys = SystemSpec::Euler { gamma: 1.4, dim: 2 };
        let mut u0 = [0.0; 4];
        sys.prim_to_cons(&[1.1, 0.3, -0.4, 0.9], &mut u0);
        let state = project_ic(&mesh, &ops, 4, |_, u| u.copy_from_slice(&u0));
        let mut out = state.clone();
        let mut ws = Workspace::new();
        inviscid_rhs(&state, &mesh, &ops, &sys, FluxBias::Upwind, &mut out, &mut ws).unwrap();
        for &r in &out.data {
            assert!(r.abs() < 1e-13, "free-stream residual {r}");
        }
    }

    #[test]
    fn order_zero_reduces_to_first_order_scheme() {
        // At p = 0 the corrected divergence must be exactly
        // (f_{i+1/2} - f_{i-1/2}) / dx with upwind interface fluxes.
        let n = 8;
        let mesh = periodic_interval(n);
        let ops = OperatorSet::new(0);
        let sys = advection1();
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let mut state = NodalField::zeros(n, 1, 1);
        state.data.copy_from_slice(&vals);
        let mut out = state.clone();
        let mut ws = Workspace::new();
        inviscid_rhs(&state, &mesh, &ops, &sys, FluxBias::Upwind, &mut out, &mut ws).unwrap();
        let h = 1.0 / n as f64;
        for i in 0..n {
            // Upwind flux for positive velocity is the left state.
            let f_lo = vals[(i + n - 1) % n];
            let f_hi = vals[i];
            let expect = -(f_hi - f_lo) / h;
            assert!(
                (out.at(i, 0, 0) - expect).abs() < 1e-15,
                "cell {i}: {} vs {expect}",
                out.at(i, 0, 0)
            );
        }
    }

    #[test]
    fn advection_residual_converges_at_order_p() {
        let sys = advection1();
        let p = 4;
        let ops = OperatorSet::new(p);
        let mut errs = Vec::new();
        for n in [4usize, 8, 16] {
            let mesh = periodic_interval(n);
            let state = project_ic(&mesh, &ops, 1, |x, u| {
                u[0] = (2.0 * std::f64::consts::PI * x[0]).sin()
            });
            let mut out = state.clone();
            let mut ws = Workspace::new();
            inviscid_rhs(&state, &mesh, &ops, &sys, FluxBias::Upwind, &mut out, &mut ws).unwrap();
            // Exact residual of the PDE: -2 pi cos(2 pi x).
            let exact = project_ic(&mesh, &ops, 1, |x, u| {
                u[0] = -2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x[0]).cos()
            });
            let mut err2 = 0.0;
            let w2 = tensor_weights(&ops, 1);
            for e in 0..mesh.n_elems() {
                let jac = mesh.widths[e][0] * 0.5;
                for i in 0..ops.n {
                    let d = out.at(e, 0, i) - exact.at(e, 0, i);
                    err2 += jac * w2[i] * d * d;
                }
            }
            errs.push(err2.sqrt());
        }
        let rate = (errs[1] / errs[2]).ln() / 2.0f64.ln();
        assert!(rate >= p as f64 - 0.3, "observed rate {rate}, errors {errs:?}");
    }

    #[test]
    fn upwind_downwind_duality_for_advection() {
        let mesh = periodic_interval(9);
        let ops = OperatorSet::new(3);
        let fwd = advection1();
        let rev = SystemSpec::Advection { velocity: [-1.0, 0.0], dim: 1 };
        let state = project_ic(&mesh, &ops, 1, |x, u| {
            u[0] = (2.0 * std::f64::consts::PI * x[0]).sin() + 0.3 * (x[0] * 9.0).cos()
        });
        let mut down = state.clone();
        let mut up_rev = state.clone();
        let mut ws = Workspace::new();
        inviscid_rhs(&state, &mesh, &ops, &fwd, FluxBias::Downwind, &mut down, &mut ws).unwrap();
        inviscid_rhs(&state, &mesh, &ops, &rev, FluxBias::Upwind, &mut up_rev, &mut ws).unwrap();
        for (a, b) in down.data.iter().zip(&up_rev.data) {
            assert!((a + b).abs() < 1e-13, "{a} vs {}", -b);
        }
    }

    #[test]
    fn zero_viscosity_zero_residual() {
        let mesh = periodic_interval(6);
        let ops = OperatorSet::new(2);
        let sys = advection1();
        let state = project_ic(&mesh, &ops, 1, |x, u| u[0] = x[0] * x[0]);
        let mu = ViscosityField::zeros(6, 1);
        let mut out = state.clone();
        let mut ws = Workspace::new();
        viscous_rhs(&state, &mu, &mesh, &ops, &sys, &mut out, &mut ws).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_viscosity_rejected() {
        let mesh = periodic_interval(4);
        let ops = OperatorSet::new(1);
        let sys = advection1();
        let state = project_ic(&mesh, &ops, 1, |_, u| u[0] = 1.0);
        let mut mu = ViscosityField::zeros(4, 1);
        mu.mu[2] = -1.0;
        let mut out = state.clone();
        let mut ws = Workspace::new();
        assert!(viscous_rhs(&state, &mu, &mesh, &ops, &sys, &mut out, &mut ws).is_err());
    }

    #[test]
    fn viscous_residual_approximates_laplacian() {
        let sys = advection1();
        let p = 3;
        let ops = OperatorSet::new(p);
        let mu0 = 0.7;
        let mut errs = Vec::new();
        for n in [8usize, 16, 32] {
            let mesh = periodic_interval(n);
            let state = project_ic(&mesh, &ops, 1, |x, u| {
                u[0] = (2.0 * std::f64::consts::PI * x[0]).sin()
            });
            let mut mu = ViscosityField::zeros(n, 1);
            mu.mu.fill(mu0);
            let mut out = state.clone();
            let mut ws = Workspace::new();
            viscous_rhs(&state, &mu, &mesh, &ops, &sys, &mut out, &mut ws).unwrap();
            let tp = 2.0 * std::f64::consts::PI;
            let mut err = 0.0f64;
            for e in 0..mesh.n_elems() {
                for i in 0..ops.n {
                    let x = mesh.point_in_elem(e, ops.points[i], 0.0)[0];
                    let exact = -mu0 * tp * tp * (tp * x).sin();
                    err = err.max((out.at(e, 0, i) - exact).abs());
                }
            }
            errs.push(err);
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "not converging: {errs:?}");
        let rate = (errs[1] / errs[2]).ln() / 2.0f64.ln();
        assert!(rate > 2.0, "viscous rate {rate}, errors {errs:?}");
    }

    #[test]
    fn viscous_components_decouple() {
        let mesh = periodic_interval(8);
        let ops = OperatorSet::new(3);
        let sys = SystemSpec::AdvectionPair { velocity: [1.0, 0.0], dim: 1 };
        let state = project_ic(&mesh, &ops, 2, |x, u| {
            u[0] = (2.0 * std::f64::consts::PI * x[0]).sin();
            u[1] = (2.0 * std::f64::consts::PI * x[0]).cos();
        });
        let mut mu = ViscosityField::zeros(8, 2);
        for e in 0..8 {
            mu.mu[e * 2] = 0.5;
        }
        let mut out = state.clone();
        let mut ws = Workspace::new();
        viscous_rhs(&state, &mu, &mesh, &ops, &sys, &mut out, &mut ws).unwrap();
        for e in 0..8 {
            for i in 0..ops.n {
                assert_eq!(out.at(e, 1, i), 0.0);
                assert!(out.at(e, 0, i).abs() > 0.0);
            }
        }
    }

    fn mhd_state_with_b<F: Fn([f64; 2]) -> [f64; 2]>(
        mesh: &MeshTopology<f64>,
        ops: &OperatorSet<f64>,
        bfun: F,
    ) -> (SystemSpec<f64>, NodalField<f64>) {
        let sys = SystemSpec::Mhd { gamma: 1.4 };
        let state = project_ic(mesh, ops, 8, |x, u| {
            let b = bfun(x);
            let q = [1.0, 0.0, 0.0, 0.0, b[0], b[1], 0.0, 1.0];
            let sys = SystemSpec::Mhd { gamma: 1.4f64 };
            sys.prim_to_cons(&q, u);
        });
        (sys, state)
    }

    #[test]
    fn div_b_of_linear_fields() {
        let mesh = MeshTopology::<f64>::uniform_quad(
            [[0.0, 1.0], [0.0, 1.0]],
            [4, 4],
            [
                Tag::Transmissive,
                Tag::Transmissive,
                Tag::Transmissive,
                Tag::Transmissive,
            ],
        )
        .unwrap();
        let ops = OperatorSet::new(2);
        let mut ws = Workspace::new();
        let mut out = vec![0.0; mesh.n_elems() * ops.n * ops.n];

        // Uniform field: zero divergence.
        let (sys, state) = mhd_state_with_b(&mesh, &ops, |_| [0.7, -0.3]);
        corrected_divergence_b(&state, &mesh, &ops, &sys, &mut out, &mut ws);
        assert!(out.iter().all(|v| v.abs() < 1e-13));

        // B = (y, x): divergence-free linear field.
        let (sys, state) = mhd_state_with_b(&mesh, &ops, |x| [x[1], x[0]]);
        corrected_divergence_b(&state, &mesh, &ops, &sys, &mut out, &mut ws);
        assert!(out.iter().all(|v| v.abs() < 1e-12), "max {:?}",
            out.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs())));

        // B = (x, 0): unit divergence.
        let (sys, state) = mhd_state_with_b(&mesh, &ops, |x| [x[0], 0.0]);
        corrected_divergence_b(&state, &mesh, &ops, &sys, &mut out, &mut ws);
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn periodic_residual_integrates_to_zero() {
        // Discrete conservation: the quadrature integral of the residual
        // telescopes over interface fluxes.
        let mesh = periodic_interval(10);
        let ops = OperatorSet::new(4);
        let sys = SystemSpec::<f64>::Burgers;
        let state = project_ic(&mesh, &ops, 1, |x, u| {
            u[0] = (2.0 * std::f64::consts::PI * x[0]).sin() + 2.0
        });
        let mut out = state.clone();
        let mut ws = Workspace::new();
        inviscid_rhs(&state, &mesh, &ops, &sys, FluxBias::Upwind, &mut out, &mut ws).unwrap();
        let total = quadrature_integral(&out, 0, &mesh, &ops);
        assert!(total.abs() < 1e-12, "inviscid drift {total}");

        let mut mu = ViscosityField::zeros(10, 1);
        mu.mu.fill(0.3);
        let mut vout = state.clone();
        viscous_rhs(&state, &mu, &mesh, &ops, &sys, &mut vout, &mut ws).unwrap();
        let vtotal = quadrature_integral(&vout, 0, &mesh, &ops);
        assert!(vtotal.abs() < 1e-12, "viscous drift {vtotal}");
    }

    #[test]
    fn mhd_without_field_matches_euler_residual() {
        let p = Tag::Periodic;
        let mesh = MeshTopology::<f64>::uniform_quad(
            [[0.0, 1.0], [0.0, 1.0]],
            [5, 4],
            [p.clone(), p.clone(), p.clone(), p],
        )
        .unwrap();
        let ops = OperatorSet::new(2);
        let euler = SystemSpec::Euler { gamma: 1.4, dim: 2 };
        let mhd = SystemSpec::Mhd { gamma: 1.4 };
        let tp = 2.0 * std::f64::consts::PI;
        let prim = |x: [f64; 2]| {
            [
                1.0 + 0.3 * (tp * x[0]).sin() * (tp * x[1]).cos(),
                0.4 * (tp * x[1]).sin(),
                -0.2 * (tp * x[0]).cos(),
                1.0 + 0.1 * (tp * (x[0] + x[1])).sin(),
            ]
        };
        let se = project_ic(&mesh, &ops, 4, |x, u| {
            let q = prim(x);
            let sys = SystemSpec::Euler { gamma: 1.4f64, dim: 2 };
            sys.prim_to_cons(&q, u);
        });
        let sm = project_ic(&mesh, &ops, 8, |x, u| {
            let q = prim(x);
            let qm = [q[0], q[1], q[2], 0.0, 0.0, 0.0, 0.0, q[3]];
            let sys = SystemSpec::Mhd { gamma: 1.4f64 };
            sys.prim_to_cons(&qm, u);
        });
        let mut re = se.clone();
        let mut rm = sm.clone();
        let mut ws = Workspace::new();
        inviscid_rhs(&se, &mesh, &ops, &euler, FluxBias::Upwind, &mut re, &mut ws).unwrap();
        inviscid_rhs(&sm, &mesh, &ops, &mhd, FluxBias::Upwind, &mut rm, &mut ws).unwrap();
        let shared = [(0usize, 0usize), (1, 1), (2, 2), (3, 7)];
        for e in 0..mesh.n_elems() {
            for i in 0..ops.n * ops.n {
                for (ke, km) in shared {
                    let a = re.at(e, ke, i);
                    let b = rm.at(e, km, i);
                    assert!(
                        (a - b).abs() <= 1e-14 * a.abs().max(1.0),
                        "var {ke}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn inadmissible_state_reports_element() {
        let mesh = periodic_interval(5);
        let ops = OperatorSet::new(1);
        let sys = SystemSpec::Euler { gamma: 1.4, dim: 1 };
        let mut u0 = [0.0; 3];
        sys.prim_to_cons(&[1.0, 0.0, 1.0], &mut u0);
        let mut state = project_ic(&mesh, &ops, 3, |_, u| u.copy_from_slice(&u0));
        state.set(3, 0, 0, -1.0);
        let mut out = state.clone();
        let mut ws = Workspace::new();
        match inviscid_rhs(&state, &mesh, &ops, &sys, FluxBias::Upwind, &mut out, &mut ws) {
            Err(SolverError::Inadmissible { element, .. }) => assert_eq!(element, 3),
            other => panic!("expected inadmissible error, got {other:?}"),
        }
    }
}
