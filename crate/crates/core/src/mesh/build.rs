use super::Mesh;
use crate::error::{HdgError, Result};
use crate::vecops::Vec3;

/// How each square cell of the 2D grid is split into two triangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPattern {
    /// diagonal from the lower-left to the upper-right corner
    #[default]
    LowerLeftUpperRight,
    /// diagonal from the upper-left to the lower-right corner
    UpperLeftLowerRight,
}

/// Uniform triangulation of `(0,1)^2` with `n` cells per side, `2 n^2`
/// triangles.
pub fn build_unit_square_mesh(n: usize, pattern: DiagonalPattern) -> Result<Mesh> {
    if n == 0 {
        return Err(HdgError::InvalidArgument("mesh needs at least one subdivision".into()));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices: Vec<Vec3> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(i, n, h), coord(j, n, h), 0.0]);
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match pattern {
                DiagonalPattern::LowerLeftUpperRight => {
                    elements.push([a, b, c, 0]);
                    elements.push([a, c, d, 0]);
                }
                DiagonalPattern::UpperLeftLowerRight => {
                    elements.push([a, b, d, 0]);
                    elements.push([b, c, d, 0]);
                }
            }
        }
    }
    Mesh::from_elements(2, vertices, elements)
}

/// Uniform Kuhn (Freudenthal) subdivision of `(0,1)^3` with `n` cells per
/// side: each cube is split into 6 tetrahedra around its main diagonal, which
/// gives a conforming mesh of `6 n^3` elements.
pub fn build_unit_cube_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(HdgError::InvalidArgument("mesh needs at least one subdivision".into()));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut vertices: Vec<Vec3> = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([coord(i, n, h), coord(j, n, h), coord(k, n, h)]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut elements = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut p = [i, j, k];
                    let mut tet = [id(i, j, k), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        p[axis] += 1;
                        tet[step + 1] = id(p[0], p[1], p[2]);
                    }
                    elements.push(tet);
                }
            }
        }
    }
    Mesh::from_elements(3, vertices, elements)
}

// exact 0 and 1 at the ends of the grid
fn coord(i: usize, n: usize, h: f64) -> f64 {
    if i == n {
        1.0
    } else {
        i as f64 * h
    }
}
