use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use rayon::prelude::*;

use super::{solve_level, LevelSolution, RunConfig};
use crate::error::{HdgError, Result};
use crate::mesh::vtk::write_discontinuous_fields;
use crate::postprocess::PostField;
use crate::vecops::{self, Vec3};

pub struct DumpOutput {
    pub epsilon: f64,
    pub n: usize,
    pub csv: PathBuf,
    pub vtk: PathBuf,
    /// largest component magnitude of `u_h` over the lattice
    pub max_abs_u: f64,
    pub finite: bool,
}

fn lattice(dim: usize, m: usize) -> Vec<Vec3> {
    let t = |i: usize| i as f64 / (m - 1) as f64;
    let mut pts = Vec::new();
    let mz = if dim == 3 { m } else { 1 };
    for k in 0..mz {
        for j in 0..m {
            for i in 0..m {
                pts.push([t(i), t(j), if dim == 3 { t(k) } else { 0.0 }]);
            }
        }
    }
    pts
}

fn fields(ls: &LevelSolution) -> Vec<(&'static str, Option<&PostField>)> {
    let mut v = vec![("u", None)];
    if let Some(p) = &ls.star {
        v.push(("ustar", Some(p)));
    }
    if let Some(p) = &ls.curlfit {
        v.push(("ucurlfit", Some(p)));
    }
    v
}

/// Solves the finest configured level for every epsilon and samples the
/// fields on a uniform lattice (CSV) and at the element vertices (VTK).
pub fn run_field_dump(cfg: &RunConfig) -> Result<Vec<DumpOutput>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let dim = cfg.dim()?;
    let m = cfg.lattice.unwrap_or(if dim == 2 { 129 } else { 33 });
    let n = *cfg.levels.last().expect("validated levels");
    let mut outputs = Vec::new();
    for eps in cfg.epsilons() {
        let ls = solve_level(cfg, eps, n)?;
        let mesh = &ls.solution.disc.mesh;
        let flds = fields(&ls);
        let pts = lattice(dim, m);
        let samples: Vec<Vec<Vec3>> = pts
            .par_iter()
            .map(|x| {
                let e = mesh
                    .locate(x)
                    .ok_or_else(|| HdgError::InvalidArgument(format!("lattice point {x:?} outside the mesh")))?;
                Ok(flds
                    .iter()
                    .map(|(_, p)| match p {
                        None => ls.solution.eval_u(e, x),
                        Some(p) => p.eval(e, x),
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;

        let stem = cfg.stem(eps);
        let csv = cfg.output_dir.join(format!("{stem}.field.csv"));
        let mut w = csv::Writer::from_path(&csv).map_err(|e| HdgError::Io(e.into()))?;
        let axes = ["x", "y", "z"];
        let mut header: Vec<String> = axes[..dim].iter().map(|s| s.to_string()).collect();
        for (name, _) in &flds {
            header.extend(axes[..dim].iter().map(|a| format!("{name}_{a}")));
        }
        w.write_record(&header).map_err(|e| HdgError::Io(e.into()))?;
        let mut max_abs_u: f64 = 0.0;
        let mut finite = true;
        for (x, vals) in pts.iter().zip(&samples) {
            let mut rec: Vec<String> = x[..dim].iter().map(|v| format!("{v:e}")).collect();
            for v in vals {
                rec.extend(v[..dim].iter().map(|c| format!("{c:e}")));
            }
            finite &= vals.iter().flatten().all(|v| v.is_finite());
            max_abs_u = max_abs_u.max(vecops::max_abs(&vals[0]));
            w.write_record(&rec).map_err(|e| HdgError::Io(e.into()))?;
        }
        w.flush()?;

        let vtk = cfg.output_dir.join(format!("{stem}.vtk"));
        let vertex_fields: Vec<(&str, Vec<Vec3>)> = flds
            .iter()
            .map(|(name, p)| {
                let sol = &ls.solution;
                let vals = (0..mesh.num_elements())
                    .flat_map(|e| {
                        mesh.element_vertices(e).into_iter().map(move |x| match p {
                            None => sol.eval_u(e, &x),
                            Some(p) => p.eval(e, &x),
                        })
                    })
                    .collect();
                (*name, vals)
            })
            .collect();
        let mut out = BufWriter::new(File::create(&vtk)?);
        write_discontinuous_fields(&mut out, mesh, &format!("{stem} n={n}"), &vertex_fields)?;
        outputs.push(DumpOutput {
            epsilon: eps,
            n,
            csv,
            vtk,
            max_abs_u,
            finite,
        });
    }
    Ok(outputs)
}
