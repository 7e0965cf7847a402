use fr_core::config::RunConfig;
use fr_core::riemann::FluxBias;
use fr_core::runner;
use fr_core::spatial::{self, Workspace};
use fr_core::timeint;
use fr_core::trvisc::{self, TrViscosity};

fn main() {
    let mut cfg = RunConfig::<f64>::default();
    cfg.problem = "rotor".into();
    cfg.p = 3;
    cfg.counts = [64, 64];
    let (setup, state) = runner::resolve(&cfg).unwrap();
    let sys = &setup.problem.system;
    let tr = TrViscosity::new(setup.c_mu, setup.mu_max, setup.lambda_hat, setup.mesh.max_mesh_scale());
    let e_watch = 2007usize;
    let mut ws = Workspace::new();
    let mut scr = trvisc::TrScratch::like(&state);
    let mut rhs = state.clone();
    let mut visc = state.clone();
    let dt = 2.62e-4;

    let mut w = state.clone();
    let names = ["rho", "mx", "my", "mz", "Bx", "By", "Bz", "E"];
    for stage in 0..4 {
        spatial::check_admissible(&w, sys).unwrap_or_else(|e| panic!("stage {stage}: {e}"));
        spatial::inviscid_rhs(&w, &setup.mesh, &setup.ops, sys, FluxBias::Upwind, &mut rhs, &mut ws).unwrap();
        let forced = trvisc::tr_defect_rate_from_rhs(&w, &rhs, dt, &setup.mesh, &setup.ops, sys, &mut ws, &mut scr).unwrap();
        let delta = trvisc::normalization(&w);
        let mu = trvisc::viscosity_from_defect_rate(&scr.defect, &delta, &tr, &forced, &setup.mesh, &setup.ops).unwrap();
        spatial::viscous_rhs(&w, &mu, &setup.mesh, &setup.ops, sys, &mut visc, &mut ws).unwrap();
        print!("stage {stage}: forced {} |", forced.len());
        for k in 0..8 {
            let ri = rhs.elem_var(e_watch, k).iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
            let vi = visc.elem_var(e_watch, k).iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
            if ri > 100.0 || vi > 100.0 {
                print!(" {}: inv {ri:.0} visc {vi:.0} mu {:.1e} du {:.1e} |", names[k], mu.at(e_watch, k), delta[k]);
            }
        }
        println!();
        // advance to next stage state
        rhs.axpy(1.0, &visc);
        let coeff = if stage < 2 { 0.5 } else { 1.0 };
        let mut next = state.clone();
        next.axpy(coeff * dt, &rhs);
        w = next;
    }
}
