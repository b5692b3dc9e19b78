//! Legacy ASCII VTK output (`DATASET UNSTRUCTURED_GRID`).

use std::io::Write;

use super::Mesh;

const VTK_TRIANGLE: u8 = 5;
const VTK_TETRA: u8 = 10;

/// Writes the mesh with one optional cell scalar (the element index).
pub fn write_mesh<W: Write>(out: &mut W, mesh: &Mesh, title: &str) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 2.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
    }
    write_cells(out, mesh.dim(), (0..mesh.num_elements()).map(|e| mesh.element(e).to_vec()))?;
    writeln!(out, "CELL_DATA {}", mesh.num_elements())?;
    writeln!(out, "SCALARS element int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for e in 0..mesh.num_elements() {
        writeln!(out, "{e}")?;
    }
    Ok(())
}

/// Discontinuous point data: every element gets its own copy of its
/// vertices, `fields` holds `(name, per element per local vertex vector)`.
pub fn write_discontinuous_fields<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    title: &str,
    fields: &[(&str, Vec<[f64; 3]>)],
) -> std::io::Result<()> {
    let nv = mesh.dim() + 1;
    let npts = mesh.num_elements() * nv;
    writeln!(out, "# vtk DataFile Version 2.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {npts} double")?;
    for e in 0..mesh.num_elements() {
        for v in mesh.element_vertices(e) {
            writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
        }
    }
    write_cells(
        out,
        mesh.dim(),
        (0..mesh.num_elements()).map(|e| (e * nv..(e + 1) * nv).collect()),
    )?;
    writeln!(out, "POINT_DATA {npts}")?;
    for (name, values) in fields {
        assert_eq!(values.len(), npts, "field {name} has wrong length");
        writeln!(out, "VECTORS {name} double")?;
        for v in values {
            writeln!(out, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
        }
    }
    Ok(())
}

fn write_cells<W: Write, I: Iterator<Item = Vec<usize>>>(out: &mut W, dim: usize, cells: I) -> std::io::Result<()> {
    let cells: Vec<Vec<usize>> = cells.collect();
    let nv = dim + 1;
    writeln!(out, "CELLS {} {}", cells.len(), cells.len() * (nv + 1))?;
    for c in &cells {
        write!(out, "{nv}")?;
        for v in c {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {}", cells.len())?;
    let t = if dim == 2 { VTK_TRIANGLE } else { VTK_TETRA };
    for _ in &cells {
        writeln!(out, "{t}")?;
    }
    Ok(())
}
