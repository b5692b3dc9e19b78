use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{solve_level, RunConfig};
use crate::error::{HdgError, Result};
use crate::norms::{energy_error, hcurl_error, hcurl_error_post, l2_error_u, w_scaled_error, ErrorColumn, ErrorReport, ErrorRow};

pub struct ConvergenceOutput {
    pub report: ErrorReport,
    pub csv: PathBuf,
    pub full_csv: PathBuf,
}

/// Solves every level for every epsilon and writes one table pair per epsilon.
pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceOutput>> {
    cfg.validate()?;
    if !cfg.has_exact()? {
        return Err(HdgError::Unsupported(format!(
            "experiment {} has no exact solution; use dump instead",
            cfg.experiment
        )));
    }
    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Vec::new();
    for eps in cfg.epsilons() {
        let stem = cfg.stem(eps);
        let report = match convergence_report(cfg, eps) {
            Ok(r) => r,
            Err(e) => {
                let path = cfg.output_dir.join(format!("{stem}.error.txt"));
                fs::write(&path, format!("{e}\n\nconfig: {}\n", serde_json::to_string_pretty(cfg)?))?;
                return Err(HdgError::Solver {
                    reason: format!("{e} (report written to {})", path.display()),
                    report: None,
                });
            }
        };
        let csv = cfg.output_dir.join(format!("{stem}.csv"));
        let full_csv = cfg.output_dir.join(format!("{stem}.full.csv"));
        write_report_csv(&report, &csv, false)?;
        write_report_csv(&report, &full_csv, true)?;
        out.push(ConvergenceOutput { report, csv, full_csv });
    }
    Ok(out)
}

/// The error table for one epsilon, without writing files.
pub fn convergence_report(cfg: &RunConfig, epsilon: f64) -> Result<ErrorReport> {
    let mut rows = Vec::new();
    for (level, &n) in cfg.levels.iter().enumerate() {
        let ls = solve_level(cfg, epsilon, n)?;
        let sol = &ls.solution;
        rows.push(ErrorRow {
            level,
            n,
            h: ls.h,
            dofs: ls.dofs,
            err_energy: energy_error(sol)?,
            err_l2_u: l2_error_u(sol)?,
            err_w_scaled: w_scaled_error(sol)?,
            err_hc_u: hcurl_error(sol)?,
            err_hc_star: ls.star.as_ref().map(hcurl_error_post).transpose()?,
            err_hc_curlfit: ls.curlfit.as_ref().map(hcurl_error_post).transpose()?,
        });
    }
    Ok(ErrorReport {
        experiment: cfg.experiment as usize,
        k: cfg.k,
        epsilon,
        rows,
    })
}

fn columns(report: &ErrorReport) -> Vec<ErrorColumn> {
    ErrorColumn::ALL.into_iter().filter(|c| report.has(*c)).collect()
}

fn fmt_value(v: f64, full: bool) -> String {
    if full {
        format!("{v:e}")
    } else {
        format!("{v:.5e}")
    }
}

fn fmt_order(o: Option<f64>, full: bool) -> String {
    o.map(|v| if full { format!("{v}") } else { format!("{v:.5e}") })
        .unwrap_or_default()
}

/// Writes the table; orders of the first level and undefined orders are
/// left empty.
pub fn write_report_csv(report: &ErrorReport, path: &Path, full: bool) -> Result<()> {
    let cols = columns(report);
    let mut w = csv::Writer::from_path(path).map_err(|e| HdgError::Io(e.into()))?;
    let mut header = vec!["level".to_string(), "n".into(), "h".into(), "dofs".into()];
    for c in &cols {
        header.push(format!("err_{}", c.name()));
        header.push(format!("ord_{}", c.name()));
    }
    w.write_record(&header).map_err(|e| HdgError::Io(e.into()))?;
    let orders: Vec<Vec<Option<f64>>> = cols.iter().map(|c| report.orders(*c)).collect();
    for (i, row) in report.rows.iter().enumerate() {
        let mut rec = vec![
            row.level.to_string(),
            row.n.to_string(),
            fmt_value(row.h, full),
            row.dofs.to_string(),
        ];
        for (c, ords) in cols.iter().zip(&orders) {
            rec.push(fmt_value(c.get(row).unwrap_or(f64::NAN), full));
            rec.push(if i == 0 { String::new() } else { fmt_order(ords[i - 1], full) });
        }
        w.write_record(&rec).map_err(|e| HdgError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// Console rendering with three significant digits and two-decimal orders.
pub fn format_table(report: &ErrorReport) -> String {
    let cols = columns(report);
    let orders: Vec<Vec<Option<f64>>> = cols.iter().map(|c| report.orders(*c)).collect();
    let mut s = Vec::new();
    let _ = writeln!(s, "experiment {}  k={}  eps={:e}", report.experiment, report.k, report.epsilon);
    let _ = write!(s, "{:>4} {:>8}", "n", "dofs");
    for c in &cols {
        let _ = write!(s, " {:>12} {:>5}", c.name(), "ord");
    }
    let _ = writeln!(s);
    for (i, row) in report.rows.iter().enumerate() {
        let _ = write!(s, "{:>4} {:>8}", row.n, row.dofs);
        for (c, ords) in cols.iter().zip(&orders) {
            let o = if i == 0 { None } else { ords[i - 1] };
            let o = o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            let _ = write!(s, " {:>12.3e} {:>5}", c.get(row).unwrap_or(f64::NAN), o);
        }
        let _ = writeln!(s);
    }
    String::from_utf8(s).expect("ascii table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::PostprocessToggles;

    fn small(dir: &Path) -> RunConfig {
        RunConfig {
            levels: vec![2, 4],
            epsilon: crate::driver::OneOrMany::Many(vec![1.0, 1e-3]),
            output_dir: dir.to_path_buf(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn writes_tables_and_orders_match_eoc() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_convergence(&small(dir.path())).unwrap();
        assert_eq!(out.len(), 2);
        let text = fs::read_to_string(&out[0].full_csv).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(
            header,
            [
                "level", "n", "h", "dofs", "err_energy", "ord_energy", "err_l2_u", "ord_l2_u", "err_w_scaled",
                "ord_w_scaled", "err_hc_u", "ord_hc_u", "err_hc_star", "ord_hc_star", "err_hc_curlfit",
                "ord_hc_curlfit"
            ]
        );
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
            .collect();
        for c in (4..16).step_by(2) {
            let o = crate::norms::eoc(&[rows[0][c], rows[1][c]], &[rows[0][2], rows[1][2]])[0].unwrap();
            assert_eq!(o, rows[1][c + 1]);
        }
        assert!(out[0].csv.file_name().unwrap().to_str().unwrap() == "exp2_k1_eps1e0.csv");
        let short = fs::read_to_string(&out[0].csv).unwrap();
        assert!(short.lines().nth(1).unwrap().contains("e-"));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let a = run_convergence(&small(d1.path())).unwrap();
        let b = run_convergence(&small(d2.path())).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(&x.full_csv).unwrap(), fs::read(&y.full_csv).unwrap());
            assert_eq!(fs::read(&x.csv).unwrap(), fs::read(&y.csv).unwrap());
        }
    }

    #[test]
    fn disabled_postprocessing_omits_columns() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            postprocess: PostprocessToggles {
                star2d: false,
                curlfit: false,
            },
            ..small(dir.path())
        };
        let out = run_convergence(&cfg).unwrap();
        let text = fs::read_to_string(&out[0].csv).unwrap();
        assert!(!text.contains("hc_star") && !text.contains("hc_curlfit"));
        assert!(format_table(&out[0].report).contains("energy"));
    }

    #[test]
    fn experiments_without_exact_solution_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            experiment: 5,
            ..small(dir.path())
        };
        assert!(matches!(run_convergence(&cfg), Err(HdgError::Unsupported(_))));
    }
}
