//! Interface fluxes: the Rusanov solver with Davis wavespeeds, its downwind
//! variant (dissipation negated), and centered means for the viscous system.

use crate::error::{Result, SolverError};
use crate::real::Real;
use crate::system::SystemSpec;

/// Bias of the interface dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxBias {
    /// Standard Rusanov dissipation.
    Upwind,
    /// Dissipation negated: upwind with respect to reversed time.
    Downwind,
    /// No dissipation, plain flux average.
    Centered,
}

/// Rusanov interface flux along `normal`, single evaluation shared by both
/// adjacent elements. `u_l` is the state on the side the normal points away
/// from.
#[inline]
pub fn rusanov_into<R: Real>(
    sys: &SystemSpec<R>,
    u_l: &[R],
    u_r: &[R],
    normal: &[R; 2],
    bias: FluxBias,
    out: &mut [R],
) {
    debug_assert!(
        ((normal[0] * normal[0] + normal[1] * normal[1]).sqrt() - R::one()).abs() < R::of(1e-12)
    );
    let m = sys.n_vars();
    let mut f_r = [R::zero(); 8];
    sys.flux_normal(u_l, normal, out);
    sys.flux_normal(u_r, normal, &mut f_r[..m]);
    let half = R::of(0.5);
    match bias {
        FluxBias::Centered => {
            for k in 0..m {
                out[k] = half * (out[k] + f_r[k]);
            }
        }
        FluxBias::Upwind | FluxBias::Downwind => {
            let lambda = sys.max_wavespeed(u_l, u_r, normal);
            let sign = if bias == FluxBias::Upwind { -R::one() } else { R::one() };
            for k in 0..m {
                out[k] = half * (out[k] + f_r[k]) + sign * half * lambda * (u_r[k] - u_l[k]);
            }
        }
    }
}

/// Checked wrapper around [`rusanov_into`].
pub fn rusanov<R: Real>(
    sys: &SystemSpec<R>,
    u_l: &[R],
    u_r: &[R],
    normal: &[R; 2],
    bias: FluxBias,
) -> Result<Vec<R>> {
    let norm = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
    if (norm - R::one()).abs() > R::of(1e-12) {
        return Err(SolverError::InvalidInput("normal must be unit length".into()));
    }
    for (side, u) in [("left", u_l), ("right", u_r)] {
        if !sys.admissible(u) {
            return Err(SolverError::InvalidInput(format!(
                "inadmissible {side} state at interface"
            )));
        }
    }
    let mut out = vec![R::zero(); sys.n_vars()];
    rusanov_into(sys, u_l, u_r, normal, bias, &mut out);
    Ok(out)
}

/// Component-wise arithmetic mean, the common interface value of the BR1
/// viscous discretization.
#[inline]
pub fn centered_mean<R: Real>(a: &[R], b: &[R], out: &mut [R]) {
    let half = R::of(0.5);
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = half * (x + y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn advection() -> SystemSpec<f64> {
        SystemSpec::Advection { velocity: [1.0, 0.0], dim: 1 }
    }

    #[test]
    fn linear_advection_reduces_to_upwinding() {
        let sys = advection();
        let n = [1.0, 0.0];
        let up = rusanov(&sys, &[2.0], &[0.0], &n, FluxBias::Upwind).unwrap();
        assert_eq!(up[0], 2.0);
        let down = rusanov(&sys, &[2.0], &[0.0], &n, FluxBias::Downwind).unwrap();
        assert_eq!(down[0], 0.0);
    }

    #[test]
    fn consistency_for_equal_states() {
        let sys = SystemSpec::Euler { gamma: 1.4, dim: 1 };
        let mut u = [0.0; 3];
        sys.prim_to_cons(&[0.9, 0.4, 1.3], &mut u);
        let mut f = [0.0f64; 3];
        sys.flux_dir(&u, 0, &mut f);
        for bias in [FluxBias::Upwind, FluxBias::Downwind, FluxBias::Centered] {
            let got = rusanov(&sys, &u, &u, &[1.0, 0.0], bias).unwrap();
            for k in 0..3 {
                assert!((got[k] - f[k]).abs() <= 1e-14 * f[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn centered_mean_basics() {
        let mut out = [0.0; 2];
        centered_mean(&[0.0, 4.0], &[2.0, -4.0], &mut out);
        assert_eq!(out, [1.0, 0.0]);
        centered_mean(&[3.0, 3.0], &[3.0, 3.0], &mut out);
        assert_eq!(out, [3.0, 3.0]);
    }

    #[test]
    fn rejects_non_unit_normal() {
        let sys = advection();
        assert!(rusanov(&sys, &[1.0], &[1.0], &[2.0, 0.0], FluxBias::Upwind).is_err());
    }

    proptest! {
        // Dissipation antisymmetry: upwind + downwind equals the sum of the
        // two one-sided normal fluxes, exactly.
        #[test]
        fn upwind_downwind_antisymmetry(
            rho_l in 0.1f64..5.0, v_l in -3.0f64..3.0, p_l in 0.1f64..5.0,
            rho_r in 0.1f64..5.0, v_r in -3.0f64..3.0, p_r in 0.1f64..5.0,
        ) {
            let sys = SystemSpec::Euler { gamma: 1.4, dim: 1 };
            let mut ul = [0.0; 3];
            let mut ur = [0.0; 3];
            sys.prim_to_cons(&[rho_l, v_l, p_l], &mut ul);
            sys.prim_to_cons(&[rho_r, v_r, p_r], &mut ur);
            let n = [1.0, 0.0];
            let up = rusanov(&sys, &ul, &ur, &n, FluxBias::Upwind).unwrap();
            let down = rusanov(&sys, &ul, &ur, &n, FluxBias::Downwind).unwrap();
            let mut fl = [0.0; 3];
            let mut fr = [0.0; 3];
            sys.flux_normal(&ul, &n, &mut fl);
            sys.flux_normal(&ur, &n, &mut fr);
            for k in 0..3 {
                let sum = fl[k] + fr[k];
                prop_assert!((up[k] + down[k] - sum).abs() <= 1e-13 * sum.abs().max(1.0));
            }
        }
    }
}
