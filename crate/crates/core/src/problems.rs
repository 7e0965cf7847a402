//! Shipped problem definitions: system, domain, boundaries, initial
//! condition, and per-case defaults (end time, c_mu), keyed by string id.

use crate::error::{Result, SolverError};
use crate::field::NodalField;
use crate::mesh::{BoundaryTag, MeshTopology};
use crate::basis::OperatorSet;
use crate::real::Real;
use crate::system::SystemSpec;
use crate::oracles::{sod_states, shu_osher_ic, vortex_primitive, VortexParams};

/// A runnable case: everything except the discretization choices.
#[derive(Debug, Clone)]
pub struct Problem<R> {
    pub id: &'static str,
    pub kind: ProblemKind,
    pub system: SystemSpec<R>,
    pub domain: [[R; 2]; 2],
    /// Boundary tags `[xmin, xmax, ymin, ymax]`.
    pub boundary: [BoundaryTag<R>; 4],
    pub t_end_default: R,
    pub c_mu_default: R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    BurgersSine,
    Kpp,
    Sod,
    ShuOsher,
    Vortex,
    Rotor,
    OrszagTang,
    AdvectionSine,
    AdvectionStepPair,
}

/// Ids of every registered problem.
pub fn problem_ids() -> &'static [&'static str] {
    &[
        "burgers",
        "kpp",
        "sod",
        "shu-osher",
        "vortex",
        "rotor",
        "orszag-tang",
        "advection",
        "advection-step-pair",
    ]
}

/// Look up a problem, optionally overriding the heat-capacity ratio.
pub fn by_id<R: Real>(id: &str, gamma: Option<R>) -> Result<Problem<R>> {
    let t = BoundaryTag::Transmissive;
    let p = BoundaryTag::Periodic;
    let problem = match id {
        "burgers" => Problem {
            id: "burgers",
            kind: ProblemKind::BurgersSine,
            system: SystemSpec::Burgers,
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [p.clone(), p.clone(), p.clone(), p],
            t_end_default: R::of(0.5),
            c_mu_default: R::one(),
        },
        "kpp" => Problem {
            id: "kpp",
            kind: ProblemKind::Kpp,
            system: SystemSpec::Kpp,
            domain: [[R::of(-2.0), R::of(2.0)], [R::of(-2.0), R::of(2.0)]],
            boundary: [p.clone(), p.clone(), p.clone(), p],
            t_end_default: R::one(),
            c_mu_default: R::of(6.0),
        },
        "sod" => Problem {
            id: "sod",
            kind: ProblemKind::Sod,
            system: SystemSpec::Euler { gamma: gamma.unwrap_or(R::of(1.4)), dim: 1 },
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [t.clone(), t.clone(), t.clone(), t],
            t_end_default: R::of(0.2),
            c_mu_default: R::of(5.0),
        },
        "shu-osher" => {
            let g = gamma.unwrap_or(R::of(1.4));
            let sys = SystemSpec::Euler { gamma: g, dim: 1 };
            let q_left = shu_osher_ic(R::of(-5.0));
            let mut u_left = vec![R::zero(); 3];
            sys.prim_to_cons(&q_left, &mut u_left);
            Problem {
                id: "shu-osher",
                kind: ProblemKind::ShuOsher,
                system: sys,
                domain: [[R::of(-5.0), R::of(5.0)], [R::zero(), R::one()]],
                boundary: [BoundaryTag::Dirichlet(u_left), t.clone(), t.clone(), t],
                t_end_default: R::of(1.8),
                c_mu_default: R::of(5.0),
            }
        }
        "vortex" => Problem {
            id: "vortex",
            kind: ProblemKind::Vortex,
            system: SystemSpec::Euler { gamma: gamma.unwrap_or(R::of(1.4)), dim: 2 },
            domain: [[R::of(-10.0), R::of(10.0)], [R::of(-10.0), R::of(10.0)]],
            boundary: [p.clone(), p.clone(), p.clone(), p],
            t_end_default: R::of(20.0),
            c_mu_default: R::of(6.0),
        },
        "rotor" => Problem {
            id: "rotor",
            kind: ProblemKind::Rotor,
            system: SystemSpec::Mhd { gamma: gamma.unwrap_or(R::of(1.4)) },
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [t.clone(), t.clone(), t.clone(), t],
            t_end_default: R::of(0.15),
            c_mu_default: R::of(2.0),
        },
        "orszag-tang" => Problem {
            id: "orszag-tang",
            kind: ProblemKind::OrszagTang,
            system: SystemSpec::Mhd { gamma: gamma.unwrap_or(R::of(5.0) / R::of(3.0)) },
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [p.clone(), p.clone(), p.clone(), p],
            t_end_default: R::of(0.48),
            c_mu_default: R::of(3.0),
        },
        "advection" => Problem {
            id: "advection",
            kind: ProblemKind::AdvectionSine,
            system: SystemSpec::Advection { velocity: [R::one(), R::zero()], dim: 1 },
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [p.clone(), p.clone(), p.clone(), p],
            t_end_default: R::one(),
            c_mu_default: R::one(),
        },
        "advection-step-pair" => Problem {
            id: "advection-step-pair",
            kind: ProblemKind::AdvectionStepPair,
            system: SystemSpec::AdvectionPair { velocity: [R::one(), R::zero()], dim: 1 },
            domain: [[R::zero(), R::one()], [R::zero(), R::one()]],
            boundary: [t.clone(), t.clone(), t.clone(), t],
            t_end_default: R::of(0.05),
            c_mu_default: R::of(0.5),
        },
        other => {
            return Err(SolverError::Config(format!("unknown problem id '{other}'")));
        }
    };
    Ok(problem)
}

impl<R: Real> Problem<R> {
    /// Pointwise initial condition in conserved variables.
    pub fn initial_conserved(&self, x: [R; 2], out: &mut [R]) {
        let sys = &self.system;
        match self.kind {
            ProblemKind::BurgersSine => {
                out[0] = (R::of(2.0) * R::PI() * x[0]).sin() + R::of(2.0);
            }
            ProblemKind::Kpp => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                out[0] = if r2 <= R::one() {
                    R::of(3.5) * R::PI()
                } else {
                    R::of(0.25) * R::PI()
                };
            }
            ProblemKind::Sod => {
                let (l, r) = sod_states::<R>();
                let q = if x[0] <= R::of(0.5) { l } else { r };
                sys.prim_to_cons(&q, out);
            }
            ProblemKind::ShuOsher => {
                let q = shu_osher_ic(x[0]);
                sys.prim_to_cons(&q, out);
            }
            ProblemKind::Vortex => {
                let params = VortexParams::default();
                let q = vortex_primitive(&params, x, R::zero());
                sys.prim_to_cons(&q, out);
            }
            ProblemKind::Rotor => {
                let dx = x[0] - R::of(0.5);
                let dy = x[1] - R::of(0.5);
                let r = (dx * dx + dy * dy).sqrt();
                let r0 = R::of(0.1);
                let r1 = R::of(0.115);
                let taper = if r <= r0 {
                    R::one()
                } else if r <= r1 {
                    R::one() - (r - r0) / (r1 - r0)
                } else {
                    R::zero()
                };
                let rho = R::of(9.0) * taper + R::one();
                let two_over_r0 = R::of(2.0) / r0;
                let vx = -two_over_r0 * dy * taper;
                let vy = two_over_r0 * dx * taper;
                let bx = R::of(5.0) / (R::of(4.0) * R::PI()).sqrt();
                let q = [rho, vx, vy, R::zero(), bx, R::zero(), R::zero(), R::one()];
                sys.prim_to_cons(&q, out);
            }
            ProblemKind::OrszagTang => {
                let two_pi = R::of(2.0) * R::PI();
                let rho = R::of(25.0) / (R::of(36.0) * R::PI());
                let pressure = R::of(5.0) / (R::of(12.0) * R::PI());
                let b0 = R::one() / (R::of(4.0) * R::PI()).sqrt();
                let vx = -(two_pi * x[1]).sin();
                let vy = (two_pi * x[0]).sin();
                let bx = -b0 * (two_pi * x[1]).sin();
                let by = b0 * (two_pi * x[0]).sin();
                let q = [rho, vx, vy, R::zero(), bx, by, R::zero(), pressure];
                sys.prim_to_cons(&q, out);
            }
            ProblemKind::AdvectionSine => {
                out[0] = (R::of(2.0) * R::PI() * x[0]).sin();
            }
            ProblemKind::AdvectionStepPair => {
                out[0] = if x[0] <= R::of(0.5) { R::of(3.0) } else { R::one() };
                out[1] = (R::of(2.0) * R::PI() * x[0]).sin() + R::of(2.0);
            }
        }
    }

    /// Build the mesh for this problem from per-axis element counts.
    pub fn build_mesh(&self, counts: [usize; 2]) -> Result<MeshTopology<R>> {
        if self.system.dim() == 1 {
            Ok(MeshTopology::uniform_interval(
                self.domain[0][0],
                self.domain[0][1],
                counts[0],
                self.boundary[0].clone(),
                self.boundary[1].clone(),
            )?)
        } else {
            MeshTopology::uniform_quad(self.domain, counts, self.boundary.clone())
        }
    }

    /// Project the initial condition onto the solution points.
    pub fn initial_state(
        &self,
        mesh: &MeshTopology<R>,
        ops: &OperatorSet<R>,
    ) -> NodalField<R> {
        let m = self.system.n_vars();
        let n1 = ops.n;
        let nodes = n1.pow(mesh.dim as u32);
        let mut state = NodalField::zeros(mesh.n_elems(), m, nodes);
        let mut u = vec![R::zero(); m];
        for e in 0..mesh.n_elems() {
            for i in 0..nodes {
                let (xi, eta) = if mesh.dim == 1 {
                    (ops.points[i], R::zero())
                } else {
                    (ops.points[i % n1], ops.points[i / n1])
                };
                let x = mesh.point_in_elem(e, xi, eta);
                self.initial_conserved(x, &mut u);
                for k in 0..m {
                    state.set(e, k, i, u[k]);
                }
            }
        }
        state
    }
}

/// Named presets with the per-case tunables used in the shipped experiments.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "burgers-p4-n15",
        "burgers-p14-n5",
        "kpp-p3-n32",
        "kpp-p9-n32",
        "sod-p3-n50",
        "sod-p9-n20",
        "shu-osher-p4-n100",
        "vortex-p2-n40",
        "vortex-p3-n40",
        "rotor-p3-n64",
        "rotor-p4-n128",
        "orszag-tang-p3-n32",
        "orszag-tang-p7-n64",
    ]
}

/// Split a `<problem>-p<P>-n<N>` preset name into its parts.
pub fn parse_preset(name: &str) -> Option<(String, usize, usize)> {
    let (rest, n) = name.rsplit_once("-n")?;
    let (problem, p) = rest.rsplit_once("-p")?;
    let p = p.parse().ok()?;
    let n = n.parse().ok()?;
    if problem.is_empty() {
        return None;
    }
    Some((problem.to_string(), p, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial;

    #[test]
    fn ic_point_values() {
        let burgers = by_id::<f64>("burgers", None).unwrap();
        let mut u = [0.0];
        burgers.initial_conserved([0.25, 0.0], &mut u);
        assert!((u[0] - 3.0).abs() < 1e-15);

        let kpp = by_id::<f64>("kpp", None).unwrap();
        kpp.initial_conserved([0.0, 0.0], &mut u);
        assert!((u[0] - 3.5 * std::f64::consts::PI).abs() < 1e-15);
        kpp.initial_conserved([2.0, 2.0], &mut u);
        assert!((u[0] - 0.25 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn every_shipped_ic_is_admissible() {
        for id in problem_ids() {
            let problem = by_id::<f64>(id, None).unwrap();
            let counts = if problem.system.dim() == 1 { [24, 1] } else { [12, 12] };
            let mesh = problem.build_mesh(counts).unwrap();
            let ops = OperatorSet::new(3);
            let state = problem.initial_state(&mesh, &ops);
            assert!(
                spatial::check_admissible(&state, &problem.system).is_ok(),
                "{id}"
            );
        }
    }

    #[test]
    fn orszag_tang_constants() {
        let ot = by_id::<f64>("orszag-tang", None).unwrap();
        assert_eq!(ot.system.gamma().unwrap(), 5.0 / 3.0);
        let mut u = [0.0; 8];
        ot.initial_conserved([0.0, 0.0], &mut u);
        assert!((u[0] - 25.0 / (36.0 * std::f64::consts::PI)).abs() < 1e-15);
        // At the origin every sine vanishes.
        for &k in &[1usize, 2, 3, 4, 5, 6] {
            assert_eq!(u[k], 0.0);
        }
        let p = ot.system.pressure(&u).unwrap();
        assert!((p - 5.0 / (12.0 * std::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn rotor_field_is_uniform_outside_taper() {
        let rotor = by_id::<f64>("rotor", None).unwrap();
        let mut u = [0.0; 8];
        rotor.initial_conserved([0.9, 0.9], &mut u);
        assert_eq!(u[0], 1.0);
        assert_eq!(u[1], 0.0);
        assert!((u[4] - 5.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        rotor.initial_conserved([0.5, 0.55], &mut u);
        assert_eq!(u[0], 10.0);
    }

    #[test]
    fn preset_names_parse() {
        for name in preset_names() {
            let (problem, p, n) = parse_preset(name).unwrap();
            assert!(by_id::<f64>(&problem, None).is_ok(), "{name}");
            assert!(p <= 14 && n >= 5, "{name}");
        }
        assert_eq!(parse_preset("sod-p3-n50"), Some(("sod".into(), 3, 50)));
        assert!(parse_preset("nonsense").is_none());
    }
}
