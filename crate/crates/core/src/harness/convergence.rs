//! Manufactured-solution convergence studies.

use std::path::PathBuf;

use crate::assembly::{BlockSystem, DiscretizationParams};
use crate::error::Error;
use crate::linsolve::KrylovConfig;
use crate::mesh::{generate_unit_square, BoundarySpec};
use crate::precond::{solve_stokes, PrecondKind};
use crate::space::{errors_vs_exact, DofMap, ProblemSpec};

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub h: f64,
    pub velocity_dofs: usize,
    pub energy_error: f64,
    /// log2(e_{L-1} / e_L); 0 on the first row.
    pub velocity_rate: f64,
    pub pressure_dofs: usize,
    pub pressure_error: f64,
    pub pressure_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    /// Inclusive refinement-level range.
    pub levels: (u32, u32),
    pub params: DiscretizationParams,
    pub precond: PrecondKind,
    pub krylov: KrylovConfig,
    pub out_csv: Option<PathBuf>,
}

impl ConvergenceConfig {
    /// Default study setup: levels 2..=6, the lower-triangular exact
    /// preconditioner, and a tolerance tight enough that algebraic error
    /// never pollutes the discretization-error table.
    pub fn new(levels: (u32, u32), params: DiscretizationParams) -> Self {
        Self {
            levels,
            params,
            precond: PrecondKind::Bl,
            krylov: KrylovConfig {
                rel_tol: 1e-10,
                max_iters: 500,
                ..KrylovConfig::default()
            },
            out_csv: None,
        }
    }
}

/// Runs the study on the structured unit square: one solve and error
/// evaluation per level. On solver failure the completed rows are still
/// written to the CSV before the error is returned.
pub fn run_convergence(
    problem: &ProblemSpec,
    bc: &BoundarySpec,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergenceRow>, Error> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let (lo, hi) = config.levels;
    if lo < 1 || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "invalid level range {lo}..{hi}"
        )));
    }
    for level in lo..=hi {
        let mesh = generate_unit_square(level, bc)?;
        let dofmap = DofMap::new(&mesh);
        let blocks = BlockSystem::assemble(&mesh, &dofmap, config.params, problem)?;
        let result = solve_stokes(&blocks, &mesh, &dofmap, config.precond, &config.krylov);
        let (u, p, report) = match result {
            Ok(triple) => triple,
            Err(err) => {
                write_rows(config, &rows)?;
                return Err(err);
            }
        };
        if !report.converged() {
            write_rows(config, &rows)?;
            return Err(Error::SolverFailure(format!(
                "level {level}: {:?} after {} iterations (residual {:.3e})",
                report.status, report.iterations, report.final_residual
            )));
        }
        let (energy_error, pressure_error) =
            errors_vs_exact(&u, &p, problem, &mesh, &dofmap, config.params.alpha)?;
        let (velocity_rate, pressure_rate) = match rows.last() {
            Some(prev) => (
                (prev.energy_error / energy_error).log2(),
                (prev.pressure_error / pressure_error).log2(),
            ),
            None => (0.0, 0.0),
        };
        rows.push(ConvergenceRow {
            h: 0.5f64.powi(level as i32),
            velocity_dofs: dofmap.n_velocity(),
            energy_error,
            velocity_rate,
            pressure_dofs: dofmap.n_pressure(),
            pressure_error,
            pressure_rate,
        });
    }
    write_rows(config, &rows)?;
    Ok(rows)
}

fn write_rows(config: &ConvergenceConfig, rows: &[ConvergenceRow]) -> Result<(), Error> {
    if let Some(path) = &config.out_csv {
        super::write_csv(path, CSV_HEADER, rows.iter().map(csv_row))?;
    }
    Ok(())
}

pub const CSV_HEADER: &str =
    "h,velocity_dofs,energy_error,velocity_rate,pressure_dofs,pressure_error,pressure_rate";

fn csv_row(row: &ConvergenceRow) -> String {
    format!(
        "{},{},{:.5e},{:.4},{},{:.5e},{:.4}",
        row.h,
        row.velocity_dofs,
        row.energy_error,
        row.velocity_rate,
        row.pressure_dofs,
        row.pressure_error,
        row.pressure_rate
    )
}

/// Formats the table for terminal output.
pub fn format_table(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(
        "       h   vel DoFs   energy error    rate   prs DoFs   pressure error    rate\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:>8.5} {:>10} {:>14.6e} {:>7.3} {:>10} {:>16.6e} {:>7.3}\n",
            r.h, r.velocity_dofs, r.energy_error, r.velocity_rate, r.pressure_dofs,
            r.pressure_error, r.pressure_rate
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Theta;
    use crate::harness::problems::{patch_problem, patch_problem_dirichlet};

    #[test]
    fn patch_test_mixed_boundary() {
        let (problem, bc) = patch_problem();
        let params = DiscretizationParams::new(Theta::Iipg, 1.0).unwrap();
        let mut config = ConvergenceConfig::new((2, 4), params);
        config.krylov.rel_tol = 1e-12;
        let rows = run_convergence(&problem, &bc, &config).unwrap();
        for row in &rows {
            assert!(row.energy_error < 1e-10, "energy error {}", row.energy_error);
            assert!(row.pressure_error < 1e-10, "pressure error {}", row.pressure_error);
        }
    }

    #[test]
    fn patch_test_pure_dirichlet() {
        let (problem, bc) = patch_problem_dirichlet();
        let params = DiscretizationParams::new(Theta::Iipg, 1.0).unwrap();
        let mut config = ConvergenceConfig::new((2, 3), params);
        config.krylov.rel_tol = 1e-12;
        let rows = run_convergence(&problem, &bc, &config).unwrap();
        for row in &rows {
            assert!(row.energy_error < 1e-10);
            assert!(row.pressure_error < 1e-10);
        }
    }

    #[test]
    fn csv_written_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let (problem, bc) = patch_problem();
        let params = DiscretizationParams::new(Theta::Iipg, 1.0).unwrap();
        let mut config = ConvergenceConfig::new((2, 3), params);
        config.out_csv = Some(path.clone());
        run_convergence(&problem, &bc, &config).unwrap();
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with(CSV_HEADER));
        run_convergence(&problem, &bc, &config).unwrap();
        let second = std::fs::read_to_string(&path).unwrap();
        assert_eq!(first, second);
    }
}
