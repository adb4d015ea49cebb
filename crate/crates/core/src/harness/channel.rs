//! Channel-flow driver: solve, boundary-flux accounting and VTK output.

use std::path::Path;

use crate::assembly::{BlockSystem, DiscretizationParams};
use crate::error::Error;
use crate::linsolve::KrylovConfig;
use crate::mesh::{BoundarySpec, Mesh, BOUNDARY_TOL};
use crate::precond::{solve_stokes, PrecondKind};
use crate::quadrature::edge_points_gauss3;
use crate::space::{DiscretePressure, DiscreteVelocity, DofMap};

use super::problems::{channel_problem, MuSpec};
use super::vtk::write_vtk;

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub params: DiscretizationParams,
    pub precond: PrecondKind,
    pub krylov: KrylovConfig,
}

/// Outcome of a channel run.
pub struct ChannelReport {
    pub velocity: DiscreteVelocity,
    pub pressure: DiscretePressure,
    pub solver: crate::linsolve::SolverReport,
    /// Trace flux of the discrete velocity through x = 0 / x = 1.
    pub inflow_flux: f64,
    pub outflow_flux: f64,
    /// |sum of the assembled Dirichlet flux data| -- the discrete
    /// compatibility defect of the boundary data.
    pub data_flux_imbalance: f64,
    /// ||B u - g_p|| / ||g_p||: the residual of the per-cell divergence
    /// identity at the returned solution.
    pub constraint_residual: f64,
}

/// Boundary spec of the channel domain: every boundary piece is Dirichlet
/// (the obstacle mesh has the parabolic profile on the vertical sides and
/// no-slip elsewhere).
pub fn channel_boundary() -> BoundarySpec {
    BoundarySpec::all_dirichlet()
}

/// Solves the channel problem on an imported obstacle mesh and, if `out`
/// is given, writes `channel.vtk` there.
pub fn run_channel(
    mesh: &Mesh,
    mu: MuSpec,
    config: &ChannelConfig,
    out: Option<&Path>,
) -> Result<ChannelReport, Error> {
    let dofmap = DofMap::new(mesh);
    let problem = channel_problem(mu);
    let blocks = BlockSystem::assemble(mesh, &dofmap, config.params, &problem)?;
    let (velocity, pressure, solver) =
        solve_stokes(&blocks, mesh, &dofmap, config.precond, &config.krylov)?;

    let inflow_flux = side_flux(mesh, &dofmap, &velocity, 0.0);
    let outflow_flux = side_flux(mesh, &dofmap, &velocity, 1.0);
    let data_flux_imbalance = blocks.rhs_p.iter().sum::<f64>().abs();
    let bu = blocks.b.apply(&velocity.0);
    let num: f64 = bu
        .iter()
        .zip(&blocks.rhs_p)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = blocks.rhs_p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let constraint_residual = num / den;

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_vtk(mesh, &dofmap, &velocity, &pressure, &dir.join("channel.vtk"))?;
    }

    Ok(ChannelReport {
        velocity,
        pressure,
        solver,
        inflow_flux,
        outflow_flux,
        data_flux_imbalance,
        constraint_residual,
    })
}

/// Flux of the discrete velocity trace through the boundary facets lying on
/// the vertical line x = `x_side`.
pub fn side_flux(mesh: &Mesh, dofmap: &DofMap, u: &DiscreteVelocity, x_side: f64) -> f64 {
    let mut flux = 0.0;
    for facet in mesh.facets.iter().filter(|f| !f.is_interior()) {
        let mid = mesh.facet_midpoint(facet);
        if (mid[0] - x_side).abs() > BOUNDARY_TOL {
            continue;
        }
        let a = mesh.vertices[facet.vertices[0]];
        let b = mesh.vertices[facet.vertices[1]];
        for ([x, y], w) in edge_points_gauss3(a, b, facet.length) {
            let v = crate::space::velocity_jump(u, mesh, dofmap, facet, x, y);
            flux += w * (v[0] * facet.normal[0] + v[1] * facet.normal[1]);
        }
    }
    flux
}

/// Speed |u_h| at a probe point; fails if the point lies outside the mesh.
pub fn probe_speed(
    mesh: &Mesh,
    dofmap: &DofMap,
    u: &DiscreteVelocity,
    x: f64,
    y: f64,
) -> Result<f64, Error> {
    let cell = mesh
        .locate_cell(x, y)
        .ok_or(Error::PointOutsideCell { cell: usize::MAX, x, y })?;
    let v = crate::space::eval_velocity(u, mesh, dofmap, cell, x, y)?;
    Ok(v[0].hypot(v[1]))
}
