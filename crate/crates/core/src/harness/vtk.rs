//! Legacy ASCII VTK output for triangle meshes.
//!
//! Writes an unstructured grid with the continuous velocity part as point
//! vectors, the full velocity evaluated at cell centroids as cell vectors,
//! and the pressure as cell scalars. Values are printed with 17 significant
//! digits, so a read-back reproduces them bitwise.

use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::mesh::Mesh;
use crate::space::{eval_velocity, DiscretePressure, DiscreteVelocity, DofMap};

pub fn write_vtk(
    mesh: &Mesh,
    dofmap: &DofMap,
    u: &DiscreteVelocity,
    p: &DiscretePressure,
    path: &Path,
) -> Result<(), Error> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "eg-stokes solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e} 0.0", v[0], v[1])?;
    }

    writeln!(w, "CELLS {} {}", mesh.n_cells(), 4 * mesh.n_cells())?;
    for cell in &mesh.cells {
        writeln!(w, "3 {} {} {}", cell[0], cell[1], cell[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(w, "5")?;
    }

    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(w, "VECTORS velocity double")?;
    for v in 0..mesh.n_vertices() {
        writeln!(
            w,
            "{:.16e} {:.16e} 0.0",
            u.0[dofmap.dof_x(v)],
            u.0[dofmap.dof_y(v)]
        )?;
    }

    writeln!(w, "CELL_DATA {}", mesh.n_cells())?;
    writeln!(w, "VECTORS velocity_centroid double")?;
    for t in 0..mesh.n_cells() {
        let c = mesh.cell_centroids[t];
        let v = eval_velocity(u, mesh, dofmap, t, c[0], c[1])?;
        writeln!(w, "{:.16e} {:.16e} 0.0", v[0], v[1])?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for t in 0..mesh.n_cells() {
        writeln!(w, "{:.16e}", p.0[t])?;
    }
    w.flush()?;
    Ok(())
}
