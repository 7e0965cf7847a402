//! Independent reference solutions and closed forms used by tests and the
//! driver: the first-order two-step defect simulator and its closed forms,
//! an exact gamma-law Riemann solver, the analytic isentropic vortex, a
//! fine-grid first-order Godunov reference for the Shu-Osher problem, and
//! error norms.
//!
//! Everything here is deliberately independent of the flux-reconstruction
//! path it is used to check.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::basis::OperatorSet;
use crate::error::{Result, SolverError};
use crate::field::NodalField;
use crate::mesh::MeshTopology;
use crate::real::Real;

/// Scalar flux of the one-dimensional analysis schemes.
#[derive(Debug, Clone, Copy)]
pub enum AnalysisFlux<R> {
    /// f(u) = lambda u with lambda > 0.
    Linear(R),
    /// f(u) = u^2 / 2 on positive data.
    Burgers,
}

impl<R: Real> AnalysisFlux<R> {
    fn eval(&self, u: R) -> R {
        match self {
            AnalysisFlux::Linear(lambda) => *lambda * u,
            AnalysisFlux::Burgers => R::of(0.5) * u * u,
        }
    }
}

/// Two-step defect of the first-order scheme: one forward Euler step with
/// pure upwind interface fluxes (`f_{i+1/2} = f_i`), one backward step with
/// pure downwind fluxes (`f_{i+1/2} = f_{i+1}`), then `|u* - u|`. Data is
/// extended constantly at the ends.
pub fn simulate_two_step_defect<R: Real>(
    values: &[R],
    flux: AnalysisFlux<R>,
    dt_over_dx: R,
) -> Vec<R> {
    let n = values.len();
    let s = dt_over_dx;
    let at = |v: &[R], i: isize| -> R {
        if i < 0 {
            v[0]
        } else if i as usize >= n {
            v[n - 1]
        } else {
            v[i as usize]
        }
    };
    let mut forward = vec![R::zero(); n];
    for i in 0..n {
        let fm = flux.eval(at(values, i as isize - 1));
        let fp = flux.eval(values[i]);
        forward[i] = values[i] - s * (fp - fm);
    }
    let mut defect = vec![R::zero(); n];
    for i in 0..n {
        let fp = flux.eval(at(&forward, i as isize + 1));
        let fm = flux.eval(forward[i]);
        let reversed = forward[i] + s * (fp - fm);
        defect[i] = (reversed - values[i]).abs();
    }
    defect
}

/// Closed-form defect of the linear scheme at the cells adjacent to a step
/// of height `du`, for `nu = lambda dt / dx`.
pub fn closed_form_defect_linear<R: Real>(nu: R, du: R) -> Result<R> {
    if !(nu > R::zero() && nu < R::one()) {
        return Err(SolverError::InvalidInput("need 0 < nu < 1".into()));
    }
    Ok((R::one() - nu) * nu * du.abs())
}

/// Closed-form defect of the Burgers scheme at the cells adjacent to a step
/// from `u_l` to `u_r` (both positive, `u_l > u_r`), for `r = dt / dx`.
///
/// With `s = r / 2` and `zeta = u_l^2 - u_r^2` the defect is
/// `|s (zeta - 2 s u_r zeta - s^2 zeta^2)|`, the expansion of the two-step
/// scheme.
pub fn closed_form_defect_burgers<R: Real>(u_l: R, u_r: R, dt_over_dx: R) -> Result<R> {
    if !(u_l > u_r && u_r > R::zero()) {
        return Err(SolverError::InvalidInput("need u_l > u_r > 0".into()));
    }
    if !(dt_over_dx > R::zero() && u_l * dt_over_dx < R::one()) {
        return Err(SolverError::InvalidInput("CFL violation".into()));
    }
    let s = R::of(0.5) * dt_over_dx;
    let zeta = u_l * u_l - u_r * u_r;
    Ok((s * (zeta - R::of(2.0) * s * u_r * zeta - s * s * zeta * zeta)).abs())
}

/// Exact solution of the gamma-law Riemann problem (two-shock /
/// two-rarefaction pressure iteration with a bisection safeguard).
#[derive(Debug, Clone)]
pub struct RiemannExact<R> {
    pub gamma: R,
    /// Primitive left state (rho, v, P).
    pub left: [R; 3],
    pub right: [R; 3],
    pub p_star: R,
    pub v_star: R,
}

fn sound_speed<R: Real>(gamma: R, q: &[R; 3]) -> R {
    (gamma * q[2] / q[0]).sqrt()
}

/// Pressure function of one side and its derivative.
fn pressure_fn<R: Real>(gamma: R, q: &[R; 3], p: R) -> (R, R) {
    let (rho, _, pk) = (q[0], q[1], q[2]);
    let a = sound_speed(gamma, q);
    if p > pk {
        // Shock branch.
        let ak = R::of(2.0) / ((gamma + R::one()) * rho);
        let bk = (gamma - R::one()) / (gamma + R::one()) * pk;
        let root = (ak / (p + bk)).sqrt();
        let f = (p - pk) * root;
        let df = root * (R::one() - (p - pk) / (R::of(2.0) * (p + bk)));
        (f, df)
    } else {
        // Rarefaction branch.
        let ex = (gamma - R::one()) / (R::of(2.0) * gamma);
        let pr = (p / pk).powf(ex);
        let f = R::of(2.0) * a / (gamma - R::one()) * (pr - R::one());
        let df = R::one() / (rho * a) * (p / pk).powf(-(gamma + R::one()) / (R::of(2.0) * gamma));
        (f, df)
    }
}

impl<R: Real> RiemannExact<R> {
    /// Solve the star state with Newton iteration (two-rarefaction initial
    /// guess), falling back to bisection when a step leaves the bracket.
    pub fn solve(left: [R; 3], right: [R; 3], gamma: R) -> Result<Self> {
        let a_l = sound_speed(gamma, &left);
        let a_r = sound_speed(gamma, &right);
        let dv = right[1] - left[1];
        if R::of(2.0) * (a_l + a_r) / (gamma - R::one()) <= dv {
            return Err(SolverError::Numerical("vacuum state in Riemann problem".into()));
        }
        // Two-rarefaction guess.
        let z = (gamma - R::one()) / (R::of(2.0) * gamma);
        let guess = ((a_l + a_r - R::of(0.5) * (gamma - R::one()) * dv)
            / (a_l / left[2].powf(z) + a_r / right[2].powf(z)))
        .powf(R::one() / z);
        let mut p = guess.max(R::of(1e-14));

        let f = |p: R| {
            let (fl, dfl) = pressure_fn(gamma, &left, p);
            let (fr, dfr) = pressure_fn(gamma, &right, p);
            (fl + fr + dv, dfl + dfr)
        };
        let mut lo = R::of(1e-14);
        let mut hi = (left[2].max(right[2])).max(p) * R::of(1e4);
        for _ in 0..200 {
            let (val, slope) = f(p);
            if val > R::zero() {
                hi = hi.min(p);
            } else {
                lo = lo.max(p);
            }
            let step = val / slope;
            let next = p - step;
            let inside = next > lo && next < hi;
            let p_new = if inside { next } else { R::of(0.5) * (lo + hi) };
            let done = (p_new - p).abs() <= R::of(1e-12) * p.max(R::of(1e-12));
            p = p_new;
            if done {
                break;
            }
        }
        let (fl, _) = pressure_fn(gamma, &left, p);
        let (fr, _) = pressure_fn(gamma, &right, p);
        let v_star = R::of(0.5) * (left[1] + right[1]) + R::of(0.5) * (fr - fl);
        Ok(RiemannExact { gamma, left, right, p_star: p, v_star })
    }

    /// Star pressure by plain bisection, for cross-checking the iteration.
    pub fn solve_bisection(left: [R; 3], right: [R; 3], gamma: R) -> Result<R> {
        let a_l = sound_speed(gamma, &left);
        let a_r = sound_speed(gamma, &right);
        let dv = right[1] - left[1];
        if R::of(2.0) * (a_l + a_r) / (gamma - R::one()) <= dv {
            return Err(SolverError::Numerical("vacuum state in Riemann problem".into()));
        }
        let f = |p: R| {
            let (fl, _) = pressure_fn(gamma, &left, p);
            let (fr, _) = pressure_fn(gamma, &right, p);
            fl + fr + dv
        };
        let mut lo = R::of(1e-14);
        let mut hi = left[2].max(right[2]) * R::of(1e4);
        for _ in 0..200 {
            let mid = R::of(0.5) * (lo + hi);
            if f(mid) > R::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(R::of(0.5) * (lo + hi))
    }

    /// Self-similar sample at `xi = x / t`, returning (rho, v, P).
    pub fn sample(&self, xi: R) -> [R; 3] {
        let g = self.gamma;
        let gm1 = g - R::one();
        let gp1 = g + R::one();
        let (p_star, v_star) = (self.p_star, self.v_star);
        if xi <= v_star {
            let q = &self.left;
            let a = sound_speed(g, q);
            if p_star > q[2] {
                // Left shock.
                let ratio = p_star / q[2];
                let s = q[1] - a * (gp1 / (R::of(2.0) * g) * ratio + gm1 / (R::of(2.0) * g)).sqrt();
                if xi <= s {
                    *q
                } else {
                    let rho = q[0] * ((ratio + gm1 / gp1) / (gm1 / gp1 * ratio + R::one()));
                    [rho, v_star, p_star]
                }
            } else {
                // Left rarefaction.
                let head = q[1] - a;
                let a_star = a * (p_star / q[2]).powf(gm1 / (R::of(2.0) * g));
                let tail = v_star - a_star;
                if xi <= head {
                    *q
                } else if xi >= tail {
                    [q[0] * (p_star / q[2]).powf(R::one() / g), v_star, p_star]
                } else {
                    let fac = R::of(2.0) / gp1 + gm1 / (gp1 * a) * (q[1] - xi);
                    [
                        q[0] * fac.powf(R::of(2.0) / gm1),
                        R::of(2.0) / gp1 * (a + gm1 * R::of(0.5) * q[1] + xi),
                        q[2] * fac.powf(R::of(2.0) * g / gm1),
                    ]
                }
            }
        } else {
            let q = &self.right;
            let a = sound_speed(g, q);
            if p_star > q[2] {
                // Right shock.
                let ratio = p_star / q[2];
                let s = q[1] + a * (gp1 / (R::of(2.0) * g) * ratio + gm1 / (R::of(2.0) * g)).sqrt();
                if xi >= s {
                    *q
                } else {
                    let rho = q[0] * ((ratio + gm1 / gp1) / (gm1 / gp1 * ratio + R::one()));
                    [rho, v_star, p_star]
                }
            } else {
                // Right rarefaction.
                let head = q[1] + a;
                let a_star = a * (p_star / q[2]).powf(gm1 / (R::of(2.0) * g));
                let tail = v_star + a_star;
                if xi >= head {
                    *q
                } else if xi <= tail {
                    [q[0] * (p_star / q[2]).powf(R::one() / g), v_star, p_star]
                } else {
                    let fac = R::of(2.0) / gp1 - gm1 / (gp1 * a) * (q[1] - xi);
                    [
                        q[0] * fac.powf(R::of(2.0) / gm1),
                        R::of(2.0) / gp1 * (-a + gm1 * R::of(0.5) * q[1] + xi),
                        q[2] * fac.powf(R::of(2.0) * g / gm1),
                    ]
                }
            }
        }
    }

    /// Wave-fan coordinates xi where the solution changes character, sorted.
    pub fn wave_speeds(&self) -> Vec<R> {
        let g = self.gamma;
        let gm1 = g - R::one();
        let gp1 = g + R::one();
        let mut out = Vec::new();
        let a_l = sound_speed(g, &self.left);
        if self.p_star > self.left[2] {
            let ratio = self.p_star / self.left[2];
            out.push(
                self.left[1]
                    - a_l * (gp1 / (R::of(2.0) * g) * ratio + gm1 / (R::of(2.0) * g)).sqrt(),
            );
        } else {
            out.push(self.left[1] - a_l);
            let a_star = a_l * (self.p_star / self.left[2]).powf(gm1 / (R::of(2.0) * g));
            out.push(self.v_star - a_star);
        }
        out.push(self.v_star);
        let a_r = sound_speed(g, &self.right);
        if self.p_star > self.right[2] {
            let ratio = self.p_star / self.right[2];
            out.push(
                self.right[1]
                    + a_r * (gp1 / (R::of(2.0) * g) * ratio + gm1 / (R::of(2.0) * g)).sqrt(),
            );
        } else {
            let a_star = a_r * (self.p_star / self.right[2]).powf(gm1 / (R::of(2.0) * g));
            out.push(self.v_star + a_star);
            out.push(self.right[1] + a_r);
        }
        out
    }

    /// Conserved Godunov flux: the Euler flux of the state sampled on the
    /// interface ray xi = 0.
    pub fn interface_flux(&self) -> [R; 3] {
        let q = self.sample(R::zero());
        euler_flux_prim(self.gamma, &q)
    }
}

fn euler_flux_prim<R: Real>(gamma: R, q: &[R; 3]) -> [R; 3] {
    let e = q[2] / (gamma - R::one()) + R::of(0.5) * q[0] * q[1] * q[1];
    [q[0] * q[1], q[0] * q[1] * q[1] + q[2], (e + q[2]) * q[1]]
}

/// Standard Sod states.
pub fn sod_states<R: Real>() -> ([R; 3], [R; 3]) {
    ([R::one(), R::zero(), R::one()], [R::of(0.125), R::zero(), R::of(0.1)])
}

/// Exact Sod solution sampled at (x, t) for a diaphragm at x0.
pub fn sod_exact<R: Real>(solution: &RiemannExact<R>, x0: R, x: R, t: R) -> [R; 3] {
    if t <= R::zero() {
        let (l, r) = (solution.left, solution.right);
        return if x <= x0 { l } else { r };
    }
    solution.sample((x - x0) / t)
}

/// Isentropic vortex parameters.
#[derive(Debug, Clone)]
pub struct VortexParams<R> {
    pub strength: R,
    pub radius: R,
    pub mach: R,
    pub velocity: [R; 2],
    pub gamma: R,
    pub center: [R; 2],
    pub domain: [[R; 2]; 2],
}

impl<R: Real> Default for VortexParams<R> {
    fn default() -> Self {
        VortexParams {
            strength: R::of(13.5),
            radius: R::of(1.5),
            mach: R::of(0.4),
            velocity: [R::zero(), R::one()],
            gamma: R::of(1.4),
            center: [R::zero(), R::zero()],
            domain: [[R::of(-10.0), R::of(10.0)], [R::of(-10.0), R::of(10.0)]],
        }
    }
}

/// Primitive vortex state (rho, vx, vy, P) at position `x` and time `t`,
/// with the advected center wrapped periodically into the domain.
pub fn vortex_primitive<R: Real>(p: &VortexParams<R>, x: [R; 2], t: R) -> [R; 4] {
    let mut d = [R::zero(); 2];
    for a in 0..2 {
        let len = p.domain[a][1] - p.domain[a][0];
        let mut rel = x[a] - (p.center[a] + p.velocity[a] * t);
        rel = rel - (rel / len).round() * len;
        d[a] = rel;
    }
    let r2 = d[0] * d[0] + d[1] * d[1];
    let phi = ((R::one() - r2) / (R::of(2.0) * p.radius * p.radius)).exp();
    let two_pi = R::of(2.0) * R::PI();
    let coeff = p.strength / (two_pi * p.radius) * phi;
    let vx = p.velocity[0] + coeff * d[1];
    let vy = p.velocity[1] - coeff * d[0];
    let gm1 = p.gamma - R::one();
    let inner = R::one()
        - p.strength * p.strength * p.mach * p.mach * gm1 / (R::of(8.0) * R::PI() * R::PI())
            * phi
            * phi;
    let pressure = R::one() / (p.gamma * p.mach * p.mach) * inner.powf(p.gamma / gm1);
    // Density on the isentrope p = rho^gamma / (gamma M^2), which is the
    // radial-equilibrium (steady) vortex with unit far-field density.
    let rho = inner.powf(R::one() / gm1);
    [rho, vx, vy, pressure]
}

/// A dense 1D primitive profile (columns x, rho, v, P).
#[derive(Debug, Clone)]
pub struct Profile1D<R> {
    pub x: Vec<R>,
    pub rho: Vec<R>,
    pub v: Vec<R>,
    pub p: Vec<R>,
}

impl<R: Real> Profile1D<R> {
    /// Piecewise-linear sample of the density column.
    pub fn sample_rho(&self, x: R) -> R {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.rho[0];
        }
        if x >= self.x[n - 1] {
            return self.rho[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (x - self.x[lo]) / (self.x[hi] - self.x[lo]);
        self.rho[lo] + w * (self.rho[hi] - self.rho[lo])
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "# shu-osher reference v1")?;
        writeln!(f, "# columns: x rho v P")?;
        for i in 0..self.x.len() {
            writeln!(
                f,
                "{:.17e} {:.17e} {:.17e} {:.17e}",
                self.x[i].to_f64_lossy(),
                self.rho[i].to_f64_lossy(),
                self.v[i].to_f64_lossy(),
                self.p[i].to_f64_lossy()
            )?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let f = BufReader::new(std::fs::File::open(path)?);
        let mut out = Profile1D { x: Vec::new(), rho: Vec::new(), v: Vec::new(), p: Vec::new() };
        for line in f.lines() {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .filter_map(|t| t.parse::<f64>().ok())
                .collect();
            if cols.len() == 4 {
                out.x.push(R::of(cols[0]));
                out.rho.push(R::of(cols[1]));
                out.v.push(R::of(cols[2]));
                out.p.push(R::of(cols[3]));
            }
        }
        Ok(out)
    }
}

/// Result of the first-order Godunov reference run, with the mass
/// bookkeeping needed to verify conservation through the open boundaries.
#[derive(Debug)]
pub struct GodunovRun<R> {
    pub profile: Profile1D<R>,
    pub mass_initial: R,
    pub mass_final: R,
    /// Time-integrated mass flux in through the left minus out through the
    /// right boundary.
    pub boundary_mass_influx: R,
}

/// Shu-Osher initial condition in primitives.
pub fn shu_osher_ic<R: Real>(x: R) -> [R; 3] {
    if x <= R::of(-4.0) {
        [R::of(3.857143), R::of(2.629369), R::of(10.333333)]
    } else {
        [R::one() + R::of(0.2) * (R::of(5.0) * x).sin(), R::zero(), R::one()]
    }
}

/// First-order Godunov reference for the Shu-Osher problem at t = 1.8 on
/// `n_cells` cells, exact interface solutions, Dirichlet inflow on the left
/// and transmissive outflow on the right.
pub fn shu_osher_reference<R: Real>(n_cells: usize, t_end: R) -> Result<GodunovRun<R>> {
    let gamma = R::of(1.4);
    let (x_lo, x_hi) = (R::of(-5.0), R::of(5.0));
    let dx = (x_hi - x_lo) / R::from_usize_exact(n_cells);
    let mut q: Vec<[R; 3]> = (0..n_cells)
        .map(|i| {
            let x = x_lo + dx * (R::from_usize_exact(i) + R::of(0.5));
            shu_osher_ic(x)
        })
        .collect();
    let left_bc = shu_osher_ic(R::of(-5.0));

    let cons = |q: &[R; 3]| -> [R; 3] {
        [
            q[0],
            q[0] * q[1],
            q[2] / (gamma - R::one()) + R::of(0.5) * q[0] * q[1] * q[1],
        ]
    };
    let prim = |u: &[R; 3]| -> [R; 3] {
        let v = u[1] / u[0];
        [u[0], v, (gamma - R::one()) * (u[2] - R::of(0.5) * u[1] * v)]
    };

    let mut u: Vec<[R; 3]> = q.iter().map(cons).collect();
    let mass_initial = u.iter().fold(R::zero(), |acc, c| acc + c[0]) * dx;
    let mut influx = R::zero();
    let mut t = R::zero();
    let cfl = R::of(0.9);
    let mut fluxes: Vec<[R; 3]> = vec![[R::zero(); 3]; n_cells + 1];
    while t < t_end {
        let mut smax = R::zero();
        for qi in &q {
            smax = smax.max(qi[1].abs() + sound_speed(gamma, qi));
        }
        let mut dt = cfl * dx / smax;
        if t + dt > t_end {
            dt = t_end - t;
        }
        for i in 0..=n_cells {
            let ql = if i == 0 { left_bc } else { q[i - 1] };
            let qr = if i == n_cells { q[n_cells - 1] } else { q[i] };
            if ql == qr {
                fluxes[i] = euler_flux_prim(gamma, &ql);
            } else {
                let rp = RiemannExact::solve(ql, qr, gamma)?;
                fluxes[i] = rp.interface_flux();
            }
        }
        let s = dt / dx;
        for i in 0..n_cells {
            for k in 0..3 {
                u[i][k] = u[i][k] - s * (fluxes[i + 1][k] - fluxes[i][k]);
            }
        }
        influx += dt * (fluxes[0][0] - fluxes[n_cells][0]);
        for i in 0..n_cells {
            q[i] = prim(&u[i]);
        }
        t += dt;
    }
    let mass_final = u.iter().fold(R::zero(), |acc, c| acc + c[0]) * dx;
    let profile = Profile1D {
        x: (0..n_cells)
            .map(|i| x_lo + dx * (R::from_usize_exact(i) + R::of(0.5)))
            .collect(),
        rho: q.iter().map(|c| c[0]).collect(),
        v: q.iter().map(|c| c[1]).collect(),
        p: q.iter().map(|c| c[2]).collect(),
    };
    Ok(GodunovRun { profile, mass_initial, mass_final, boundary_mass_influx: influx })
}

/// Load the cached reference profile, generating and caching it on a miss.
pub fn shu_osher_reference_cached<R: Real>(
    cache_dir: &Path,
    n_cells: usize,
    t_end: R,
) -> Result<Profile1D<R>> {
    let name = format!("shu_osher_ref_v1_n{}_t{:.3}.txt", n_cells, t_end.to_f64_lossy());
    let path = cache_dir.join(name);
    if path.exists() {
        return Ok(Profile1D::read(&path)?);
    }
    let run = shu_osher_reference::<R>(n_cells, t_end)?;
    run.profile.write(&path)?;
    Ok(run.profile)
}

/// Position of the strongest density drop of a profile within [lo, hi].
pub fn steepest_drop_position<R: Real>(profile: &Profile1D<R>, lo: R, hi: R) -> R {
    let mut best = lo;
    let mut best_drop = R::zero();
    for i in 0..profile.x.len() - 1 {
        let x = profile.x[i];
        if x < lo || x > hi {
            continue;
        }
        let drop = profile.rho[i] - profile.rho[i + 1];
        if drop > best_drop {
            best_drop = drop;
            best = R::of(0.5) * (profile.x[i] + profile.x[i + 1]);
        }
    }
    best
}

/// Point-mean L1 norm of the error of variable `k` against a pointwise
/// exact function: the plain average of nodal errors over all solution
/// points.
pub fn l1_pointmean<R: Real>(
    field: &NodalField<R>,
    k: usize,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    exact: &dyn Fn([R; 2]) -> R,
) -> R {
    let n1 = ops.n;
    let mut total = R::zero();
    let mut count = 0usize;
    for e in 0..field.n_elems {
        for i in 0..field.nodes_per_elem {
            let (xi, eta) = if mesh.dim == 1 {
                (ops.points[i], R::zero())
            } else {
                (ops.points[i % n1], ops.points[i / n1])
            };
            let x = mesh.point_in_elem(e, xi, eta);
            total += (field.at(e, k, i) - exact(x)).abs();
            count += 1;
        }
    }
    total / R::from_usize_exact(count)
}

/// L2 norm of the error of variable `k`, quadrature-integrated and
/// normalized by the domain measure.
pub fn l2_error<R: Real>(
    field: &NodalField<R>,
    k: usize,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    exact: &dyn Fn([R; 2]) -> R,
) -> R {
    let n1 = ops.n;
    let w2 = crate::spatial::tensor_weights(ops, mesh.dim);
    let quarter = R::of(0.25);
    let half = R::of(0.5);
    let mut total = R::zero();
    for e in 0..field.n_elems {
        let jac = if mesh.dim == 1 {
            mesh.widths[e][0] * half
        } else {
            mesh.widths[e][0] * mesh.widths[e][1] * quarter
        };
        for i in 0..field.nodes_per_elem {
            let (xi, eta) = if mesh.dim == 1 {
                (ops.points[i], R::zero())
            } else {
                (ops.points[i % n1], ops.points[i / n1])
            };
            let x = mesh.point_in_elem(e, xi, eta);
            let d = field.at(e, k, i) - exact(x);
            total += jac * w2[i] * d * d;
        }
    }
    (total / mesh.domain_measure()).sqrt()
}
