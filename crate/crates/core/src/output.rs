//! Snapshot, viscosity-field, and manifest writers.
//!
//! 1D snapshots are columnar text with 17 significant digits, so a read-back
//! reproduces the nodal values bit-exactly. 2D snapshots use the legacy
//! structured-grid visualization text format on the solution-point lattice,
//! with element ids attached as point data.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::basis::OperatorSet;
use crate::error::Result;
use crate::field::{NodalField, ViscosityField};
use crate::mesh::MeshTopology;
use crate::real::Real;
use crate::system::SystemSpec;

/// Write a 1D solution + viscosity snapshot, one row per solution point,
/// sorted by x.
pub fn write_snapshot_1d<R: Real>(
    path: &Path,
    state: &NodalField<R>,
    mu: &ViscosityField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    let names = sys.var_names();
    write!(f, "# columns: x")?;
    for n in &names {
        write!(f, " {n}")?;
    }
    for n in &names {
        write!(f, " mu_{n}")?;
    }
    writeln!(f)?;
    for e in 0..state.n_elems {
        for i in 0..state.nodes_per_elem {
            let x = mesh.point_in_elem(e, ops.points[i], R::zero())[0];
            write!(f, "{:.17e}", x.to_f64_lossy())?;
            for k in 0..state.n_vars {
                write!(f, " {:.17e}", state.at(e, k, i).to_f64_lossy())?;
            }
            for k in 0..state.n_vars {
                write!(f, " {:.17e}", mu.at(e, k).to_f64_lossy())?;
            }
            writeln!(f)?;
        }
    }
    Ok(())
}

/// Read back a 1D snapshot: x column plus all data columns.
pub fn read_snapshot_1d(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let f = BufReader::new(File::open(path)?);
    let mut xs = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().expect("snapshot is machine written"))
            .collect();
        if cols.is_empty() {
            cols = vec![Vec::new(); vals.len() - 1];
        }
        xs.push(vals[0]);
        for (c, v) in cols.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
    }
    Ok((xs, cols))
}

/// Write a 2D snapshot in legacy structured-grid visualization text format.
pub fn write_snapshot_vtk<R: Real>(
    path: &Path,
    state: &NodalField<R>,
    mu: &ViscosityField<R>,
    mesh: &MeshTopology<R>,
    ops: &OperatorSet<R>,
    sys: &SystemSpec<R>,
    title: &str,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    let n1 = ops.n;
    let [nx, ny] = mesh.counts;
    let (gx, gy) = (nx * n1, ny * n1);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "{title}")?;
    writeln!(f, "ASCII")?;
    writeln!(f, "DATASET STRUCTURED_GRID")?;
    writeln!(f, "DIMENSIONS {gx} {gy} 1")?;
    writeln!(f, "POINTS {} double", gx * gy)?;
    // Global lattice, x fastest; element e = ej * nx + ei, node = j * n1 + i.
    let point_of = |gi: usize, gj: usize| -> (usize, usize) {
        let (ei, i) = (gi / n1, gi % n1);
        let (ej, j) = (gj / n1, gj % n1);
        (ej * nx + ei, j * n1 + i)
    };
    for gj in 0..gy {
        for gi in 0..gx {
            let (e, node) = point_of(gi, gj);
            let (xi, eta) = (ops.points[node % n1], ops.points[node / n1]);
            let x = mesh.point_in_elem(e, xi, eta);
            writeln!(f, "{:.17e} {:.17e} 0.0", x[0].to_f64_lossy(), x[1].to_f64_lossy())?;
        }
    }
    writeln!(f, "POINT_DATA {}", gx * gy)?;
    let names = sys.var_names();
    for (k, name) in names.iter().enumerate() {
        writeln!(f, "SCALARS {name} double")?;
        writeln!(f, "LOOKUP_TABLE default")?;
        for gj in 0..gy {
            for gi in 0..gx {
                let (e, node) = point_of(gi, gj);
                writeln!(f, "{:.17e}", state.at(e, k, node).to_f64_lossy())?;
            }
        }
    }
    for (k, name) in names.iter().enumerate() {
        writeln!(f, "SCALARS mu_{name} double")?;
        writeln!(f, "LOOKUP_TABLE default")?;
        for gj in 0..gy {
            for gi in 0..gx {
                let (e, _) = point_of(gi, gj);
                writeln!(f, "{:.17e}", mu.at(e, k).to_f64_lossy())?;
            }
        }
    }
    writeln!(f, "SCALARS element_id int")?;
    writeln!(f, "LOOKUP_TABLE default")?;
    for gj in 0..gy {
        for gi in 0..gx {
            let (e, _) = point_of(gi, gj);
            writeln!(f, "{e}")?;
        }
    }
    Ok(())
}

/// Write the element-wise viscosity as text columns (centers + components).
pub fn write_mu_field<R: Real>(
    path: &Path,
    mu: &ViscosityField<R>,
    mesh: &MeshTopology<R>,
    sys: &SystemSpec<R>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    let names = sys.var_names();
    write!(f, "# columns: x")?;
    if mesh.dim == 2 {
        write!(f, " y")?;
    }
    for n in &names {
        write!(f, " mu_{n}")?;
    }
    writeln!(f)?;
    for e in 0..mu.n_elems {
        write!(f, "{:.17e}", mesh.centers[e][0].to_f64_lossy())?;
        if mesh.dim == 2 {
            write!(f, " {:.17e}", mesh.centers[e][1].to_f64_lossy())?;
        }
        for k in 0..mu.n_vars {
            write!(f, " {:.17e}", mu.at(e, k).to_f64_lossy())?;
        }
        writeln!(f)?;
    }
    Ok(())
}

/// Write the run manifest as key = value lines.
pub fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryTag as Tag;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let mesh =
            MeshTopology::uniform_interval(0.0, 1.0, 7, Tag::Periodic, Tag::Periodic).unwrap();
        let ops = OperatorSet::new(3);
        let sys = SystemSpec::Euler { gamma: 1.4, dim: 1 };
        let mut state = NodalField::zeros(7, 3, 4);
        let mut seed = 12345u64;
        for v in state.data.iter_mut() {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = 0.1 + (seed >> 11) as f64 / (1u64 << 53) as f64;
        }
        let mut mu = ViscosityField::zeros(7, 3);
        for (i, v) in mu.mu.iter_mut().enumerate() {
            *v = 1e-7 * (i as f64 + 1.0) / 3.0;
        }
        let dir = std::env::temp_dir().join("fr_snapshot_test");
        let path = dir.join("snap.txt");
        write_snapshot_1d(&path, &state, &mu, &mesh, &ops, &sys).unwrap();
        let (_, cols) = read_snapshot_1d(&path).unwrap();
        let mut idx = 0;
        for e in 0..7 {
            for i in 0..4 {
                for k in 0..3 {
                    assert_eq!(cols[k][idx], state.at(e, k, i), "bit-exact round trip");
                    assert_eq!(cols[3 + k][idx], mu.at(e, k));
                }
                idx += 1;
            }
        }
    }

    #[test]
    fn constant_state_writes_constant_columns() {
        let mesh =
            MeshTopology::uniform_interval(0.0, 1.0, 3, Tag::Periodic, Tag::Periodic).unwrap();
        let ops = OperatorSet::new(1);
        let sys = SystemSpec::<f64>::Burgers;
        let mut state = NodalField::zeros(3, 1, 2);
        state.data.fill(2.75);
        let mu = ViscosityField::zeros(3, 1);
        let path = std::env::temp_dir().join("fr_snapshot_test/const.txt");
        write_snapshot_1d(&path, &state, &mu, &mesh, &ops, &sys).unwrap();
        let (_, cols) = read_snapshot_1d(&path).unwrap();
        assert!(cols[0].iter().all(|&v| v == 2.75));
    }

    #[test]
    fn vtk_header_is_wellformed() {
        let p = Tag::Periodic;
        let mesh = MeshTopology::<f64>::uniform_quad(
            [[0.0, 1.0], [0.0, 1.0]],
            [2, 3],
            [p.clone(), p.clone(), p.clone(), p],
        )
        .unwrap();
        let ops = OperatorSet::new(1);
        let sys = SystemSpec::Kpp;
        let state = NodalField::zeros(6, 1, 4);
        let mu = ViscosityField::zeros(6, 1);
        let path = std::env::temp_dir().join("fr_snapshot_test/field.vtk");
        write_snapshot_vtk(&path, &state, &mu, &mesh, &ops, &sys, "kpp").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("DATASET STRUCTURED_GRID"));
        assert!(text.contains("DIMENSIONS 4 6 1"));
        assert!(text.contains("POINTS 24 double"));
        assert!(text.contains("SCALARS u double"));
        assert!(text.contains("SCALARS element_id int"));
    }
}
