//! Preconditioner iteration-count studies.

use std::path::Path;

use crate::assembly::{BlockSystem, DiscretizationParams};
use crate::error::Error;
use crate::linsolve::KrylovConfig;
use crate::mesh::{generate_unit_square, BoundarySpec, Mesh};
use crate::precond::{solve_stokes, PrecondKind};
use crate::space::{DofMap, ProblemSpec};

/// Result of one (system, preconditioner) solve; `iterations` is `None`
/// when the solve failed.
#[derive(Debug, Clone)]
pub struct PrecondResult {
    pub kind: PrecondKind,
    pub iterations: Option<usize>,
    pub inner_iterations: usize,
    pub wall_seconds: f64,
    pub note: String,
}

/// One study row: a mesh size or viscosity label with per-preconditioner
/// results.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub label: String,
    pub results: Vec<PrecondResult>,
}

/// Solves one assembled system with each preconditioner in turn. Failures
/// are recorded in the row and the run continues.
pub fn study_row(
    label: &str,
    blocks: &BlockSystem,
    mesh: &Mesh,
    dofmap: &DofMap,
    preconds: &[PrecondKind],
    krylov: &KrylovConfig,
) -> StudyRow {
    let mut results = Vec::with_capacity(preconds.len());
    for &kind in preconds {
        let start = std::time::Instant::now();
        let outcome = solve_stokes(blocks, mesh, dofmap, kind, krylov);
        let wall_seconds = start.elapsed().as_secs_f64();
        let result = match outcome {
            Ok((_, _, report)) if report.converged() => PrecondResult {
                kind,
                iterations: Some(report.iterations),
                inner_iterations: report.inner_iterations,
                wall_seconds,
                note: String::new(),
            },
            Ok((_, _, report)) => PrecondResult {
                kind,
                iterations: None,
                inner_iterations: report.inner_iterations,
                wall_seconds,
                note: format!("{:?}", report.status),
            },
            Err(err) => PrecondResult {
                kind,
                iterations: None,
                inner_iterations: 0,
                wall_seconds,
                note: err.to_string(),
            },
        };
        results.push(result);
    }
    StudyRow {
        label: label.to_string(),
        results,
    }
}

/// Iteration counts over structured mesh levels for a fixed problem.
pub fn study_over_levels(
    problem: &ProblemSpec,
    bc: &BoundarySpec,
    levels: (u32, u32),
    params: DiscretizationParams,
    preconds: &[PrecondKind],
    krylov: &KrylovConfig,
) -> Result<Vec<StudyRow>, Error> {
    let mut rows = Vec::new();
    for level in levels.0..=levels.1 {
        let mesh = generate_unit_square(level, bc)?;
        let dofmap = DofMap::new(&mesh);
        let blocks = BlockSystem::assemble(&mesh, &dofmap, params, problem)?;
        let label = format!("1/{}", 1u64 << level);
        rows.push(study_row(&label, &blocks, &mesh, &dofmap, preconds, krylov));
    }
    Ok(rows)
}

/// Iteration counts over a list of viscosities on a fixed (imported) mesh.
/// `make_problem` builds the problem for each viscosity.
pub fn study_over_viscosities(
    mesh: &Mesh,
    viscosities: &[f64],
    make_problem: impl Fn(f64) -> ProblemSpec,
    params: DiscretizationParams,
    preconds: &[PrecondKind],
    krylov: &KrylovConfig,
) -> Result<Vec<StudyRow>, Error> {
    let dofmap = DofMap::new(mesh);
    let mut rows = Vec::new();
    for &mu in viscosities {
        let problem = make_problem(mu);
        let blocks = BlockSystem::assemble(mesh, &dofmap, params, &problem)?;
        rows.push(study_row(
            &format!("{mu}"),
            &blocks,
            mesh,
            &dofmap,
            preconds,
            krylov,
        ));
    }
    Ok(rows)
}

pub fn write_study_csv(path: &Path, rows: &[StudyRow]) -> Result<(), Error> {
    let lines = rows.iter().flat_map(|row| {
        row.results.iter().map(move |r| {
            format!(
                "{},{},{},{},{:.3},{}",
                row.label,
                r.kind.label(),
                r.iterations.map_or_else(|| "-".to_string(), |i| i.to_string()),
                r.inner_iterations,
                r.wall_seconds,
                if r.note.is_empty() { "ok" } else { &r.note }
            )
        })
    });
    super::write_csv(
        path,
        "param,precond,iterations,inner_iterations,wall_seconds,status",
        lines,
    )
}

/// Formats study rows as a table with one column per preconditioner.
pub fn format_table(rows: &[StudyRow]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        out.push_str(&format!("{:>10}", "param"));
        for r in &first.results {
            out.push_str(&format!("{:>8}", r.kind.label()));
        }
        out.push('\n');
    }
    for row in rows {
        out.push_str(&format!("{:>10}", row.label));
        for r in &row.results {
            match r.iterations {
                Some(i) => out.push_str(&format!("{i:>8}")),
                None => out.push_str(&format!("{:>8}", "fail")),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Theta;
    use crate::harness::problems::{builtin_problem, ExampleId};

    #[test]
    fn level_study_produces_counts() {
        let (problem, bc) = builtin_problem(ExampleId::Ex1);
        let params = DiscretizationParams::new(Theta::Iipg, 1.0).unwrap();
        let rows = study_over_levels(
            &problem,
            &bc,
            (2, 3),
            params,
            &[PrecondKind::Bd, PrecondKind::Bl],
            &KrylovConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, "1/4");
        for row in &rows {
            for r in &row.results {
                assert!(r.iterations.is_some(), "{:?} failed: {}", r.kind, r.note);
            }
        }
        let table = format_table(&rows);
        assert!(table.contains("bd"));
    }

    #[test]
    fn study_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.csv");
        let rows = vec![StudyRow {
            label: "1/8".into(),
            results: vec![PrecondResult {
                kind: PrecondKind::Bd,
                iterations: Some(22),
                inner_iterations: 410,
                wall_seconds: 0.5,
                note: String::new(),
            }],
        }];
        write_study_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("1/8,bd,22,410,0.500,ok"));
    }
}
