//! Conservation-law definitions: fluxes, wavespeed estimates, sources, and
//! admissibility predicates.
//!
//! Conserved-variable layouts:
//! - advection / Burgers / KPP: `[u]` (the stacked advection pair carries two
//!   independent copies),
//! - Euler 1D: `[rho, rho u, E]`, 2D: `[rho, rho vx, rho vy, E]`,
//! - ideal MHD (2D, full three-component vectors):
//!   `[rho, rho vx, rho vy, rho vz, Bx, By, Bz, E]`.

use crate::real::Real;

/// A hyperbolic system the solver can advance.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec<R> {
    /// Linear advection of a scalar with constant velocity.
    Advection { velocity: [R; 2], dim: usize },
    /// Two independent copies of linear advection, for testing the
    /// component-wise decoupling of the viscosity.
    AdvectionPair { velocity: [R; 2], dim: usize },
    /// 1D Burgers equation, flux u^2 / 2.
    Burgers,
    /// 2D Kurganov-Petrova-Popov rotating wave, flux (sin u, cos u).
    Kpp,
    /// Compressible Euler equations.
    Euler { gamma: R, dim: usize },
    /// 2D ideal magnetohydrodynamics with the Powell source term.
    Mhd { gamma: R },
}

impl<R: Real> SystemSpec<R> {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Advection { .. } => "advection",
            SystemSpec::AdvectionPair { .. } => "advection-pair",
            SystemSpec::Burgers => "burgers",
            SystemSpec::Kpp => "kpp",
            SystemSpec::Euler { .. } => "euler",
            SystemSpec::Mhd { .. } => "mhd",
        }
    }

    /// Conserved-variable column names, in storage order.
    pub fn var_names(&self) -> Vec<&'static str> {
        match self {
            SystemSpec::Advection { .. } | SystemSpec::Burgers | SystemSpec::Kpp => vec!["u"],
            SystemSpec::AdvectionPair { .. } => vec!["u0", "u1"],
            SystemSpec::Euler { dim: 1, .. } => vec!["rho", "mom_x", "energy"],
            SystemSpec::Euler { .. } => vec!["rho", "mom_x", "mom_y", "energy"],
            SystemSpec::Mhd { .. } => {
                vec!["rho", "mom_x", "mom_y", "mom_z", "b_x", "b_y", "b_z", "energy"]
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        match self {
            SystemSpec::Advection { .. } | SystemSpec::Burgers | SystemSpec::Kpp => 1,
            SystemSpec::AdvectionPair { .. } => 2,
            SystemSpec::Euler { dim, .. } => 2 + dim,
            SystemSpec::Mhd { .. } => 8,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Advection { dim, .. } | SystemSpec::AdvectionPair { dim, .. } => *dim,
            SystemSpec::Burgers => 1,
            SystemSpec::Kpp => 2,
            SystemSpec::Euler { dim, .. } => *dim,
            SystemSpec::Mhd { .. } => 2,
        }
    }

    pub fn gamma(&self) -> Option<R> {
        match self {
            SystemSpec::Euler { gamma, .. } | SystemSpec::Mhd { gamma } => Some(*gamma),
            _ => None,
        }
    }

    /// Thermodynamic pressure of a conserved state.
    pub fn pressure(&self, u: &[R]) -> Option<R> {
        let half = R::of(0.5);
        match self {
            SystemSpec::Euler { gamma, dim } => {
                let rho = u[0];
                let mut ke = R::zero();
                for a in 0..*dim {
                    ke += u[1 + a] * u[1 + a];
                }
                ke = half * ke / rho;
                Some((*gamma - R::one()) * (u[1 + dim] - ke))
            }
            SystemSpec::Mhd { gamma } => {
                let rho = u[0];
                let ke = half * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / rho;
                let me = half * (u[4] * u[4] + u[5] * u[5] + u[6] * u[6]);
                Some((*gamma - R::one()) * (u[7] - ke - me))
            }
            _ => None,
        }
    }

    /// Magnetic pressure P_b = (gamma - 1) B.B / 2 of an MHD state.
    pub fn magnetic_pressure(&self, u: &[R]) -> Option<R> {
        match self {
            SystemSpec::Mhd { gamma } => {
                let bb = u[4] * u[4] + u[5] * u[5] + u[6] * u[6];
                Some(R::of(0.5) * (*gamma - R::one()) * bb)
            }
            _ => None,
        }
    }

    /// All entries finite, and positive density/pressure where applicable.
    pub fn admissible(&self, u: &[R]) -> bool {
        if u.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            SystemSpec::Euler { .. } | SystemSpec::Mhd { .. } => {
                u[0] > R::zero() && self.pressure(u).unwrap() > R::zero()
            }
            _ => true,
        }
    }

    /// Flux component along `axis`, written into `out` (length `n_vars`).
    pub fn flux_dir(&self, u: &[R], axis: usize, out: &mut [R]) {
        let half = R::of(0.5);
        match self {
            SystemSpec::Advection { velocity, .. } => {
                out[0] = velocity[axis] * u[0];
            }
            SystemSpec::AdvectionPair { velocity, .. } => {
                out[0] = velocity[axis] * u[0];
                out[1] = velocity[axis] * u[1];
            }
            SystemSpec::Burgers => {
                out[0] = half * u[0] * u[0];
            }
            SystemSpec::Kpp => {
                out[0] = if axis == 0 { u[0].sin() } else { u[0].cos() };
            }
            SystemSpec::Euler { gamma, dim } => {
                let rho = u[0];
                let vn = u[1 + axis] / rho;
                let p = euler_pressure(*gamma, *dim, u);
                out[0] = u[1 + axis];
                for a in 0..*dim {
                    out[1 + a] = u[1 + a] * vn;
                }
                out[1 + axis] += p;
                out[1 + dim] = (u[1 + dim] + p) * vn;
            }
            SystemSpec::Mhd { gamma } => {
                let rho = u[0];
                let v = [u[1] / rho, u[2] / rho, u[3] / rho];
                let b = [u[4], u[5], u[6]];
                let bb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
                let ke = half * rho * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
                let p = (*gamma - R::one()) * (u[7] - ke - half * bb);
                let pt = p + half * bb;
                let vn = v[axis];
                let bn = b[axis];
                let vdotb = v[0] * b[0] + v[1] * b[1] + v[2] * b[2];
                out[0] = rho * vn;
                for j in 0..3 {
                    out[1 + j] = rho * v[j] * vn - bn * b[j];
                    out[4 + j] = vn * b[j] - bn * v[j];
                }
                out[1 + axis] += pt;
                out[7] = (u[7] + pt) * vn - bn * vdotb;
            }
        }
    }

    /// Flux contracted with an arbitrary unit normal.
    pub fn flux_normal(&self, u: &[R], normal: &[R; 2], out: &mut [R]) {
        let m = self.n_vars();
        let mut tmp = [R::zero(); 8];
        self.flux_dir(u, 0, &mut tmp[..m]);
        for k in 0..m {
            out[k] = normal[0] * tmp[k];
        }
        if self.dim() == 2 {
            self.flux_dir(u, 1, &mut tmp[..m]);
            for k in 0..m {
                out[k] += normal[1] * tmp[k];
            }
        }
    }

    /// Davis estimate of the fastest signal speed across an interface.
    pub fn max_wavespeed(&self, u_l: &[R], u_r: &[R], normal: &[R; 2]) -> R {
        match self {
            SystemSpec::Advection { velocity, .. } | SystemSpec::AdvectionPair { velocity, .. } => {
                (velocity[0] * normal[0] + velocity[1] * normal[1]).abs()
            }
            SystemSpec::Burgers => u_l[0].abs().max(u_r[0].abs()),
            // |f'(u)| = |(cos u, -sin u)| = 1 for every state.
            SystemSpec::Kpp => R::one(),
            SystemSpec::Euler { gamma, dim } => {
                let s = |u: &[R]| {
                    let rho = u[0];
                    let mut vn = R::zero();
                    for a in 0..*dim {
                        vn += u[1 + a] / rho * normal[a];
                    }
                    let p = euler_pressure(*gamma, *dim, u);
                    vn.abs() + (*gamma * p / rho).sqrt()
                };
                s(u_l).max(s(u_r))
            }
            SystemSpec::Mhd { gamma } => {
                let s = |u: &[R]| {
                    let rho = u[0];
                    let vn = (u[1] * normal[0] + u[2] * normal[1]) / rho;
                    vn.abs() + fast_magnetosonic(*gamma, u, normal)
                };
                s(u_l).max(s(u_r))
            }
        }
    }

    /// Pointwise signal-speed bound over every direction, for time-step
    /// control and the a-priori wavespeed estimate.
    pub fn point_speed(&self, u: &[R]) -> R {
        match self {
            SystemSpec::Advection { velocity, .. } | SystemSpec::AdvectionPair { velocity, .. } => {
                (velocity[0] * velocity[0] + velocity[1] * velocity[1]).sqrt()
            }
            SystemSpec::Burgers => u[0].abs(),
            SystemSpec::Kpp => R::one(),
            SystemSpec::Euler { gamma, dim } => {
                let rho = u[0];
                let mut v2 = R::zero();
                for a in 0..*dim {
                    v2 += (u[1 + a] / rho) * (u[1 + a] / rho);
                }
                let p = euler_pressure(*gamma, *dim, u);
                v2.sqrt() + (*gamma * p / rho).sqrt()
            }
            SystemSpec::Mhd { gamma } => {
                let rho = u[0];
                let v2 = (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / (rho * rho);
                let p = self.pressure(u).unwrap();
                let a2 = *gamma * p / rho;
                let b2 = (u[4] * u[4] + u[5] * u[5] + u[6] * u[6]) / rho;
                v2.sqrt() + (a2 + b2).sqrt()
            }
        }
    }

    pub fn has_powell_source(&self) -> bool {
        matches!(self, SystemSpec::Mhd { .. })
    }

    /// Powell source -(0, B, v, v.B) div B for one state.
    pub fn powell_source(&self, u: &[R], div_b: R, out: &mut [R]) {
        debug_assert!(self.has_powell_source());
        let rho = u[0];
        let v = [u[1] / rho, u[2] / rho, u[3] / rho];
        let b = [u[4], u[5], u[6]];
        let vdotb = v[0] * b[0] + v[1] * b[1] + v[2] * b[2];
        out[0] = R::zero();
        for j in 0..3 {
            out[1 + j] = -b[j] * div_b;
            out[4 + j] = -v[j] * div_b;
        }
        out[7] = -vdotb * div_b;
    }

    /// Indices of the in-plane magnetic-field components, ordered by axis.
    pub fn mag_field_vars(&self) -> Option<[usize; 2]> {
        match self {
            SystemSpec::Mhd { .. } => Some([4, 5]),
            _ => None,
        }
    }

    /// Conserved state from primitive variables.
    ///
    /// Euler: `[rho, v.., P]`; MHD: `[rho, vx, vy, vz, Bx, By, Bz, P]`.
    pub fn prim_to_cons(&self, q: &[R], out: &mut [R]) {
        let half = R::of(0.5);
        match self {
            SystemSpec::Euler { gamma, dim } => {
                let rho = q[0];
                out[0] = rho;
                let mut v2 = R::zero();
                for a in 0..*dim {
                    out[1 + a] = rho * q[1 + a];
                    v2 += q[1 + a] * q[1 + a];
                }
                let p = q[1 + dim];
                out[1 + dim] = p / (*gamma - R::one()) + half * rho * v2;
            }
            SystemSpec::Mhd { gamma } => {
                let rho = q[0];
                out[0] = rho;
                let v2 = q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
                let bb = q[4] * q[4] + q[5] * q[5] + q[6] * q[6];
                for j in 0..3 {
                    out[1 + j] = rho * q[1 + j];
                    out[4 + j] = q[4 + j];
                }
                out[7] = q[7] / (*gamma - R::one()) + half * rho * v2 + half * bb;
            }
            _ => out.copy_from_slice(q),
        }
    }

    /// Primitive state from conserved variables (inverse of `prim_to_cons`).
    pub fn cons_to_prim(&self, u: &[R], out: &mut [R]) {
        match self {
            SystemSpec::Euler { dim, .. } => {
                out[0] = u[0];
                for a in 0..*dim {
                    out[1 + a] = u[1 + a] / u[0];
                }
                out[1 + dim] = self.pressure(u).unwrap();
            }
            SystemSpec::Mhd { .. } => {
                out[0] = u[0];
                for j in 0..3 {
                    out[1 + j] = u[1 + j] / u[0];
                    out[4 + j] = u[4 + j];
                }
                out[7] = self.pressure(u).unwrap();
            }
            _ => out.copy_from_slice(u),
        }
    }
}

#[inline]
fn euler_pressure<R: Real>(gamma: R, dim: usize, u: &[R]) -> R {
    let rho = u[0];
    let mut ke = R::zero();
    for a in 0..dim {
        ke += u[1 + a] * u[1 + a];
    }
    (gamma - R::one()) * (u[1 + dim] - R::of(0.5) * ke / rho)
}

/// Fast magnetosonic speed along `normal`.
fn fast_magnetosonic<R: Real>(gamma: R, u: &[R], normal: &[R; 2]) -> R {
    let half = R::of(0.5);
    let rho = u[0];
    let ke = half * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / rho;
    let bb = u[4] * u[4] + u[5] * u[5] + u[6] * u[6];
    let p = (gamma - R::one()) * (u[7] - ke - half * bb);
    let a2 = gamma * p / rho;
    let b2 = bb / rho;
    let bn = u[4] * normal[0] + u[5] * normal[1];
    let bn2 = bn * bn / rho;
    let s = a2 + b2;
    let disc = (s * s - R::of(4.0) * a2 * bn2).max(R::zero());
    (half * (s + disc.sqrt())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler1() -> SystemSpec<f64> {
        SystemSpec::Euler { gamma: 1.4, dim: 1 }
    }

    fn mhd() -> SystemSpec<f64> {
        SystemSpec::Mhd { gamma: 1.4 }
    }

    #[test]
    fn euler_flux_stationary_state() {
        let sys = euler1();
        let mut u = [0.0; 3];
        sys.prim_to_cons(&[1.0, 0.0, 1.0], &mut u);
        let mut f = [0.0; 3];
        sys.flux_dir(&u, 0, &mut f);
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 1.0).abs() < 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn sod_state_energies() {
        let sys = euler1();
        let mut ul = [0.0; 3];
        let mut ur = [0.0; 3];
        sys.prim_to_cons(&[1.0, 0.0, 1.0], &mut ul);
        sys.prim_to_cons(&[0.125, 0.0, 0.1], &mut ur);
        assert!((ul[2] - 2.5).abs() < 1e-14);
        assert!((ur[2] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn euler_flux_moving_state() {
        let sys = euler1();
        let mut u = [0.0; 3];
        sys.prim_to_cons(&[1.0, 1.0, 1.0], &mut u);
        assert!((u[2] - 3.0).abs() < 1e-14);
        let mut f = [0.0; 3];
        sys.flux_dir(&u, 0, &mut f);
        assert!((f[0] - 1.0).abs() < 1e-14);
        assert!((f[1] - 2.0).abs() < 1e-14);
        assert!((f[2] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn mhd_reduces_to_euler_without_field() {
        let sys = mhd();
        let euler = SystemSpec::Euler { gamma: 1.4, dim: 2 };
        let q = [1.3, 0.4, -0.2, 0.0, 0.0, 0.0, 0.0, 0.9];
        let mut u = [0.0; 8];
        sys.prim_to_cons(&q, &mut u);
        let mut ue = [0.0; 4];
        euler.prim_to_cons(&[1.3, 0.4, -0.2, 0.9], &mut ue);
        for axis in 0..2 {
            let mut fm = [0.0f64; 8];
            let mut fe = [0.0f64; 4];
            sys.flux_dir(&u, axis, &mut fm);
            euler.flux_dir(&ue, axis, &mut fe);
            let shared = [0usize, 1, 2, 7];
            for (fi, &mi) in fe.iter().zip(shared.iter()) {
                let denom = fi.abs().max(1.0);
                assert!(
                    (fm[mi] - fi).abs() / denom < 1e-14,
                    "axis {axis}: {} vs {}",
                    fm[mi],
                    fi
                );
            }
        }
    }

    #[test]
    fn powell_source_vanishes_without_divergence() {
        let sys = mhd();
        let mut u = [0.0; 8];
        sys.prim_to_cons(&[1.0, 0.3, 0.2, 0.1, 0.4, 0.5, 0.6, 1.0], &mut u);
        let mut s = [1.0; 8];
        sys.powell_source(&u, 0.0, &mut s);
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn induction_flux_vanishes_at_rest() {
        let sys = mhd();
        let mut u = [0.0; 8];
        sys.prim_to_cons(&[1.0, 0.0, 0.0, 0.0, 0.7, 0.0, 0.0, 1.0], &mut u);
        let mut f = [0.0; 8];
        for axis in 0..2 {
            sys.flux_dir(&u, axis, &mut f);
            assert_eq!(f[4], 0.0);
            assert_eq!(f[5], 0.0);
            assert_eq!(f[6], 0.0);
        }
    }

    #[test]
    fn scalar_fluxes() {
        let burgers = SystemSpec::<f64>::Burgers;
        let mut f = [0.0];
        burgers.flux_dir(&[2.0], 0, &mut f);
        assert_eq!(f[0], 2.0);

        let kpp = SystemSpec::<f64>::Kpp;
        kpp.flux_dir(&[std::f64::consts::PI], 0, &mut f);
        assert!(f[0].abs() < 1e-15);
        kpp.flux_dir(&[std::f64::consts::PI], 1, &mut f);
        assert!((f[0] + 1.0).abs() < 1e-15);

        let adv = SystemSpec::Advection { velocity: [1.0, 0.0], dim: 1 };
        adv.flux_dir(&[3.0], 0, &mut f);
        assert_eq!(f[0], 3.0);
    }

    #[test]
    fn davis_wavespeeds() {
        let sys = euler1();
        let mut u = [0.0; 3];
        sys.prim_to_cons(&[1.0, 0.0, 1.0], &mut u);
        let s = sys.max_wavespeed(&u, &u, &[1.0, 0.0]);
        assert!((s - 1.4f64.sqrt()).abs() < 1e-12);
        assert!((s - 1.18322).abs() < 1e-5);

        let kpp = SystemSpec::<f64>::Kpp;
        assert_eq!(kpp.max_wavespeed(&[0.3], &[9.1], &[0.6, 0.8]), 1.0);

        let burgers = SystemSpec::<f64>::Burgers;
        assert_eq!(burgers.max_wavespeed(&[3.0], &[1.0], &[1.0, 0.0]), 3.0);
    }

    #[test]
    fn primitive_round_trip() {
        let sys = SystemSpec::Euler { gamma: 1.4, dim: 2 };
        let q = [0.7f64, 0.3, -1.2, 2.5];
        let mut u = [0.0; 4];
        let mut back = [0.0; 4];
        sys.prim_to_cons(&q, &mut u);
        sys.cons_to_prim(&u, &mut back);
        for (a, b) in q.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(sys.admissible(&u));
    }

    #[test]
    fn inadmissible_states_detected() {
        let sys = euler1();
        assert!(!sys.admissible(&[1.0, 0.0, f64::NAN]));
        assert!(!sys.admissible(&[-1.0, 0.0, 1.0]));
        // Kinetic energy exceeds total energy: negative pressure.
        assert!(!sys.admissible(&[1.0, 10.0, 1.0]));
    }

    // Rotation consistency: rotating the state and the normal rotates the
    // normal flux, for Euler and MHD in 2D.
    fn rotate_state(sys: &SystemSpec<f64>, u: &[f64], c: f64, s: f64, out: &mut [f64]) {
        out.copy_from_slice(u);
        match sys {
            SystemSpec::Euler { .. } => {
                out[1] = c * u[1] - s * u[2];
                out[2] = s * u[1] + c * u[2];
            }
            SystemSpec::Mhd { .. } => {
                out[1] = c * u[1] - s * u[2];
                out[2] = s * u[1] + c * u[2];
                out[4] = c * u[4] - s * u[5];
                out[5] = s * u[4] + c * u[5];
            }
            _ => unreachable!(),
        }
    }

    fn rotate_vec(sys: &SystemSpec<f64>, f: &[f64], c: f64, s: f64, out: &mut [f64]) {
        rotate_state(sys, f, c, s, out);
    }

    #[test]
    fn rotation_consistency() {
        let systems = [SystemSpec::Euler { gamma: 1.4, dim: 2 }, mhd()];
        // Small deterministic LCG over admissible primitive states.
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for sys in &systems {
            let m = sys.n_vars();
            for _ in 0..50 {
                let mut q = vec![0.0; m];
                q[0] = 0.1 + rnd();
                q[m - 1] = 0.1 + rnd();
                for v in q.iter_mut().take(m - 1).skip(1) {
                    *v = 2.0 * rnd() - 1.0;
                }
                let mut u = vec![0.0; m];
                sys.prim_to_cons(&q, &mut u);
                let theta = 2.0 * std::f64::consts::PI * rnd();
                let (s, c) = theta.sin_cos();
                let n = [0.6, 0.8];
                let nr = [c * n[0] - s * n[1], s * n[0] + c * n[1]];

                let mut ur = vec![0.0; m];
                rotate_state(sys, &u, c, s, &mut ur);
                let mut f_rot_state = vec![0.0; m];
                sys.flux_normal(&ur, &nr, &mut f_rot_state);

                let mut f = vec![0.0; m];
                sys.flux_normal(&u, &n, &mut f);
                let mut f_rot = vec![0.0; m];
                rotate_vec(sys, &f, c, s, &mut f_rot);

                for k in 0..m {
                    let denom = f_rot[k].abs().max(1.0);
                    assert!(
                        (f_rot_state[k] - f_rot[k]).abs() / denom < 1e-12,
                        "{} var {k}",
                        sys.name()
                    );
                }
            }
        }
    }
}
