//! Command-line driver: run configurations or presets, convergence sweeps,
//! and oracle profile export.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use fr_core::config::RunConfig;
use fr_core::oracles::{self, RiemannExact, VortexParams};
use fr_core::problems;
use fr_core::runner;
use fr_core::SolverError;

const USAGE: &str = "\
usage:
  frsolver run <config-or-preset> [key=value ...]
  frsolver convergence <config-or-preset> --meshes N1,N2,... [key=value ...]
  frsolver oracle <sod|vortex> --at <t> --out <file>
  frsolver list-presets

A config is a sectioned key = value file; a preset is a name like
sod-p3-n50. Overrides take section.key=value (or key=value when unique).";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                SolverError::Config(_) | SolverError::InvalidInput(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), SolverError> {
    let Some(verb) = args.first() else {
        eprintln!("{USAGE}");
        return Err(SolverError::Config("missing subcommand".into()));
    };
    match verb.as_str() {
        "run" => cmd_run(&args[1..]),
        "convergence" => cmd_convergence(&args[1..]),
        "oracle" => cmd_oracle(&args[1..]),
        "list-presets" => {
            for name in problems::preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(SolverError::Config(format!("unknown subcommand '{other}'"))),
    }
}

fn cmd_run(args: &[String]) -> Result<(), SolverError> {
    let Some(source) = args.first() else {
        return Err(SolverError::Config("run needs a config file or preset".into()));
    };
    let cfg = RunConfig::<f64>::load(source, &args[1..])?;
    let summary = runner::run(&cfg)?;
    println!(
        "completed {} steps to t = {:.6} in {:.2} s",
        summary.steps, summary.t, summary.wall_seconds
    );
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_convergence(args: &[String]) -> Result<(), SolverError> {
    let Some(source) = args.first() else {
        return Err(SolverError::Config("convergence needs a config or preset".into()));
    };
    let mut meshes: Vec<usize> = Vec::new();
    let mut overrides: Vec<String> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--meshes" {
            let list = args
                .get(i + 1)
                .ok_or_else(|| SolverError::Config("--meshes needs a list".into()))?;
            meshes = list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| SolverError::Config(format!("bad mesh count '{t}'")))
                })
                .collect::<Result<_, _>>()?;
            i += 2;
        } else {
            overrides.push(args[i].clone());
            i += 1;
        }
    }
    if meshes.is_empty() {
        return Err(SolverError::Config("convergence needs --meshes N1,N2,...".into()));
    }
    let cfg = RunConfig::<f64>::load(source, &overrides)?;
    let table = runner::convergence(&cfg, &meshes)?;
    println!("n,error");
    for row in &table.rows {
        println!("{},{:.6e}", row.n, row.error);
    }
    println!("rate,{:.4}", table.rate);
    Ok(())
}

fn cmd_oracle(args: &[String]) -> Result<(), SolverError> {
    let Some(which) = args.first() else {
        return Err(SolverError::Config("oracle needs sod|vortex".into()));
    };
    let mut t: Option<f64> = None;
    let mut out: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--at" => {
                let v = args
                    .get(i + 1)
                    .ok_or_else(|| SolverError::Config("--at needs a time".into()))?;
                t = Some(
                    v.parse()
                        .map_err(|_| SolverError::Config(format!("bad time '{v}'")))?,
                );
                i += 2;
            }
            "--out" => {
                out = Some(
                    args.get(i + 1)
                        .ok_or_else(|| SolverError::Config("--out needs a path".into()))?
                        .clone(),
                );
                i += 2;
            }
            other => {
                return Err(SolverError::Config(format!("unknown oracle flag '{other}'")));
            }
        }
    }
    let t = t.ok_or_else(|| SolverError::Config("oracle needs --at <t>".into()))?;
    let out = out.ok_or_else(|| SolverError::Config("oracle needs --out <file>".into()))?;
    let path = Path::new(&out);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    match which.as_str() {
        "sod" => {
            if !(t > 0.0) {
                return Err(SolverError::Config("sod oracle needs t > 0".into()));
            }
            let (l, r) = oracles::sod_states::<f64>();
            let rp = RiemannExact::solve(l, r, 1.4)?;
            writeln!(f, "# sod exact at t = {t}")?;
            writeln!(f, "# columns: x rho v P")?;
            let n = 2000;
            for i in 0..=n {
                let x = i as f64 / n as f64;
                let q = oracles::sod_exact(&rp, 0.5, x, t);
                writeln!(f, "{:.17e} {:.17e} {:.17e} {:.17e}", x, q[0], q[1], q[2])?;
            }
        }
        "vortex" => {
            let params = VortexParams::<f64>::default();
            writeln!(f, "# isentropic vortex exact at t = {t}")?;
            writeln!(f, "# columns: x y rho vx vy P")?;
            let n = 200;
            for j in 0..=n {
                for i in 0..=n {
                    let x = -10.0 + 20.0 * i as f64 / n as f64;
                    let y = -10.0 + 20.0 * j as f64 / n as f64;
                    let q = oracles::vortex_primitive(&params, [x, y], t);
                    writeln!(
                        f,
                        "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                        x, y, q[0], q[1], q[2], q[3]
                    )?;
                }
            }
        }
        other => {
            return Err(SolverError::Config(format!(
                "oracle supports sod|vortex, got '{other}'"
            )));
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}
