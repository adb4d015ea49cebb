//! Block preconditioners for the saddle-point system.
//!
//! Six kinds are provided: block diagonal, lower and upper triangular, each
//! in an "exact" variant (Bd/Bl/Bu) and an inexact variant (Md/Ml/Mu). The
//! velocity block is solved by an inner flexible GMRES using the actual
//! velocity matrix `A`, preconditioned by a multiplicative scheme: a damped
//! Jacobi sweep on all velocity DOFs, one smoothed-aggregation AMG V-cycle
//! on the continuous sub-block, and a final Jacobi sweep. The exact variants
//! run the inner solve to a relative residual of 1e-12 (standing in for a
//! direct factorization); the inexact variants stop at 1e-3. The pressure
//! block is the exactly inverted diagonal `(1/(2 mu_T)) M_p`, generalized
//! cellwise for variable viscosity.

use std::str::FromStr;

use crate::assembly::BlockSystem;
use crate::error::Error;
use crate::linsolve::{
    amg_setup_near_null, amg_vcycle, fgmres, AmgConfig, AmgHierarchy, CsrMatrix, KrylovConfig,
    LinearOperator, MeanZeroProjection, Preconditioner, SolverReport,
};
use crate::mesh::Mesh;
use crate::space::{DiscretePressure, DiscreteVelocity, DofMap};

/// The six block preconditioners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    Bd,
    Bl,
    Bu,
    Md,
    Ml,
    Mu,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 6] = [
        PrecondKind::Bd,
        PrecondKind::Bl,
        PrecondKind::Bu,
        PrecondKind::Md,
        PrecondKind::Ml,
        PrecondKind::Mu,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PrecondKind::Bd => "bd",
            PrecondKind::Bl => "bl",
            PrecondKind::Bu => "bu",
            PrecondKind::Md => "md",
            PrecondKind::Ml => "ml",
            PrecondKind::Mu => "mu",
        }
    }

    /// Exact variants solve the velocity block to 1e-12, inexact to 1e-3.
    pub fn velocity_mode(self) -> VelocityMode {
        match self {
            PrecondKind::Bd | PrecondKind::Bl | PrecondKind::Bu => VelocityMode::Exact,
            PrecondKind::Md | PrecondKind::Ml | PrecondKind::Mu => VelocityMode::Inexact,
        }
    }

    fn shape(self) -> BlockShape {
        match self {
            PrecondKind::Bd | PrecondKind::Md => BlockShape::Diagonal,
            PrecondKind::Bl | PrecondKind::Ml => BlockShape::LowerTriangular,
            PrecondKind::Bu | PrecondKind::Mu => BlockShape::UpperTriangular,
        }
    }
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "bd" => Ok(PrecondKind::Bd),
            "bl" => Ok(PrecondKind::Bl),
            "bu" => Ok(PrecondKind::Bu),
            "md" => Ok(PrecondKind::Md),
            "ml" => Ok(PrecondKind::Ml),
            "mu" => Ok(PrecondKind::Mu),
            other => Err(Error::InvalidConfig(format!(
                "unknown preconditioner `{other}` (expected bd, bl, bu, md, ml or mu)"
            ))),
        }
    }
}

enum BlockShape {
    Diagonal,
    LowerTriangular,
    UpperTriangular,
}

/// Inner velocity-solve accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityMode {
    /// Relative residual 1e-12; behaves like a direct solve.
    Exact,
    /// Relative residual 1e-3.
    Inexact,
}

impl VelocityMode {
    pub fn rel_tol(self) -> f64 {
        match self {
            VelocityMode::Exact => 1e-12,
            VelocityMode::Inexact => 1e-3,
        }
    }
}

/// Multiplicative velocity-block preconditioner: global damped Jacobi, AMG
/// V-cycle correction on the continuous sub-block (a natural inclusion,
/// since continuous DOFs are a prefix of the velocity layout), then another
/// global Jacobi sweep. The AMG hierarchy is built on the symmetric part of
/// `A` restricted to the continuous block, aggregating the two components
/// of each vertex together with the rigid-body modes as near-null space.
pub struct EgVelocityPrecond<'a> {
    a: &'a CsrMatrix,
    inv_diag: Vec<f64>,
    amg: AmgHierarchy,
    n_cg: usize,
    damping: f64,
}

impl<'a> EgVelocityPrecond<'a> {
    pub fn new(a: &'a CsrMatrix, mesh: &Mesh, dofmap: &DofMap) -> Result<Self, Error> {
        let n_cg = dofmap.enrichment_offset();
        let cg_block = a.symmetrized().principal_submatrix(n_cg);
        let nv = dofmap.n_vertices;
        let node_of_dof: Vec<usize> = (0..n_cg).map(|d| if d < nv { d } else { d - nv }).collect();
        let mut translate_x = vec![0.0; n_cg];
        let mut translate_y = vec![0.0; n_cg];
        let mut rotate = vec![0.0; n_cg];
        for (v, p) in mesh.vertices.iter().enumerate() {
            translate_x[dofmap.dof_x(v)] = 1.0;
            translate_y[dofmap.dof_y(v)] = 1.0;
            rotate[dofmap.dof_x(v)] = -p[1];
            rotate[dofmap.dof_y(v)] = p[0];
        }
        let amg = amg_setup_near_null(
            &cg_block,
            &AmgConfig::default(),
            &node_of_dof,
            &[translate_x, translate_y, rotate],
        )?;
        let diag = a.diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self {
            a,
            inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
            amg,
            n_cg,
            damping: 2.0 / 3.0,
        })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut z = vec![0.0; n];
        let mut work = vec![0.0; n];

        for i in 0..n {
            z[i] = self.damping * self.inv_diag[i] * r[i];
        }

        self.a.matvec(&z, &mut work);
        let cg_residual: Vec<f64> = (0..self.n_cg).map(|i| r[i] - work[i]).collect();
        let correction = amg_vcycle(&self.amg, &cg_residual);
        for (zi, ci) in z.iter_mut().zip(&correction) {
            *zi += ci;
        }

        self.a.matvec(&z, &mut work);
        for i in 0..n {
            z[i] += self.damping * self.inv_diag[i] * (r[i] - work[i]);
        }
        z
    }
}

struct EgApply<'a, 'b>(&'b EgVelocityPrecond<'a>);

impl Preconditioner for EgApply<'_, '_> {
    fn apply(&mut self, r: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(self.0.apply(r))
    }
}

/// Inner solver for the velocity block.
pub struct VelocityBlockSolver<'a> {
    a: &'a CsrMatrix,
    eg: EgVelocityPrecond<'a>,
    pub mode: VelocityMode,
    max_iters: usize,
}

impl<'a> VelocityBlockSolver<'a> {
    pub fn new(
        blocks: &'a BlockSystem,
        mesh: &Mesh,
        dofmap: &DofMap,
        mode: VelocityMode,
    ) -> Result<Self, Error> {
        let eg = EgVelocityPrecond::new(&blocks.a, mesh, dofmap)?;
        Ok(Self {
            a: &blocks.a,
            eg,
            mode,
            max_iters: 2000,
        })
    }

    /// Solves `A z = rhs` to the mode's tolerance, returning the solution
    /// and the iteration count. Non-convergence is an error.
    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, usize), Error> {
        let config = KrylovConfig {
            rel_tol: self.mode.rel_tol(),
            max_iters: self.max_iters,
            restart: None,
            record_history: false,
        };
        let (z, report) = fgmres(self.a, &mut EgApply(&self.eg), rhs, &config, None)?;
        if !report.converged() {
            return Err(Error::InnerSolve {
                iterations: report.iterations,
                residual: report.final_residual,
            });
        }
        Ok((z, report.iterations))
    }
}

/// Applies one of the six block preconditioners to a stacked residual
/// `r = [r_u; r_p]`, returning `z = [z_u; z_p]` and the inner iteration
/// count spent in the velocity solve.
pub fn apply_block_preconditioner(
    kind: PrecondKind,
    blocks: &BlockSystem,
    vsolver: &VelocityBlockSolver,
    r: &[f64],
) -> Result<(Vec<f64>, usize), Error> {
    let n_u = blocks.n_velocity();
    let n_p = blocks.n_pressure();
    debug_assert_eq!(r.len(), n_u + n_p);
    let (r_u, r_p) = r.split_at(n_u);
    // pressure block: z_p = 2 mu_T / |T| * r_p
    let scale =
        |rp: &[f64]| -> Vec<f64> {
            rp.iter()
                .enumerate()
                .map(|(t, v)| 2.0 * blocks.mu_cells[t] / blocks.mp[t] * v)
                .collect()
        };

    let (z_u, z_p, inner) = match kind.shape() {
        BlockShape::Diagonal => {
            let (z_u, inner) = vsolver.solve(r_u)?;
            (z_u, scale(r_p), inner)
        }
        BlockShape::LowerTriangular => {
            let (z_u, inner) = vsolver.solve(r_u)?;
            let bz = blocks.b.apply(&z_u);
            let corrected: Vec<f64> = r_p.iter().zip(&bz).map(|(r, b)| r - b).collect();
            (z_u, scale(&corrected), inner)
        }
        BlockShape::UpperTriangular => {
            let z_p = scale(r_p);
            let btz = blocks.bt.apply(&z_p);
            let corrected: Vec<f64> = r_u.iter().zip(&btz).map(|(r, b)| r - b).collect();
            let (z_u, inner) = vsolver.solve(&corrected)?;
            (z_u, z_p, inner)
        }
    };

    let mut z = Vec::with_capacity(n_u + n_p);
    z.extend_from_slice(&z_u);
    z.extend_from_slice(&z_p);
    Ok((z, inner))
}

/// [`Preconditioner`] adapter over [`apply_block_preconditioner`],
/// accumulating inner iteration counts across outer iterations.
pub struct BlockPreconditioner<'a> {
    pub kind: PrecondKind,
    blocks: &'a BlockSystem,
    vsolver: VelocityBlockSolver<'a>,
    pub inner_iterations: usize,
}

impl<'a> BlockPreconditioner<'a> {
    pub fn new(
        blocks: &'a BlockSystem,
        mesh: &Mesh,
        dofmap: &DofMap,
        kind: PrecondKind,
    ) -> Result<Self, Error> {
        let vsolver = VelocityBlockSolver::new(blocks, mesh, dofmap, kind.velocity_mode())?;
        Ok(Self {
            kind,
            blocks,
            vsolver,
            inner_iterations: 0,
        })
    }
}

impl Preconditioner for BlockPreconditioner<'_> {
    fn apply(&mut self, r: &[f64]) -> Result<Vec<f64>, Error> {
        let (z, inner) = apply_block_preconditioner(self.kind, self.blocks, &self.vsolver, r)?;
        self.inner_iterations += inner;
        Ok(z)
    }
}

/// The assembled saddle operator [[A, B^T], [B, 0]].
pub struct SaddleOperator<'a> {
    blocks: &'a BlockSystem,
}

impl<'a> SaddleOperator<'a> {
    pub fn new(blocks: &'a BlockSystem) -> Self {
        Self { blocks }
    }
}

impl LinearOperator for SaddleOperator<'_> {
    fn dim(&self) -> usize {
        self.blocks.n_total()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        let n_u = self.blocks.n_velocity();
        let (x_u, x_p) = x.split_at(n_u);
        let (y_u, y_p) = y.split_at_mut(n_u);
        self.blocks.a.matvec(x_u, y_u);
        self.blocks.bt.matvec_add(x_p, y_u);
        self.blocks.b.matvec(x_u, y_p);
    }
}

/// Solves the assembled Stokes system with flexible GMRES and the chosen
/// block preconditioner. For pure-Dirichlet problems the constant-pressure
/// direction is projected out of the residual, the preconditioned vectors
/// and the returned pressure.
pub fn solve_stokes(
    blocks: &BlockSystem,
    mesh: &Mesh,
    dofmap: &DofMap,
    kind: PrecondKind,
    config: &KrylovConfig,
) -> Result<(DiscreteVelocity, DiscretePressure, SolverReport), Error> {
    let op = SaddleOperator::new(blocks);
    let projection = dofmap
        .mean_zero_pressure
        .then(|| MeanZeroProjection::new(&blocks.mp, blocks.n_velocity()));
    let mut pc = BlockPreconditioner::new(blocks, mesh, dofmap, kind)?;
    let rhs = blocks.stacked_rhs();
    let (x, mut report) = fgmres(&op, &mut pc, &rhs, config, projection.as_ref())?;
    report.label = kind.label().to_string();
    report.inner_iterations = pc.inner_iterations;
    let (u, p) = x.split_at(blocks.n_velocity());
    Ok((
        DiscreteVelocity(u.to_vec()),
        DiscretePressure(p.to_vec()),
        report,
    ))
}
