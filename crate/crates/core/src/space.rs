//! DOF management and basis evaluation for the EG velocity space and the
//! piecewise-constant pressure space, plus discrete norms and error
//! functionals.
//!
//! Velocity DOFs are blocked as `[x-components of vertex DOFs | y-components
//! | one enrichment coefficient per cell]`, so the continuous sub-block is a
//! contiguous index range. The enrichment basis on cell `T` is the vector
//! function `x - x_T` (zero mean over `T`), scaled by a single coefficient.

use crate::error::Error;
use crate::mesh::{Facet, Mesh};
use crate::quadrature::{edge_points_gauss3, triangle_points_deg4};

/// Velocity/pressure DOF layout over a mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_vertices: usize,
    pub n_cells: usize,
    /// True iff the boundary is entirely Dirichlet, in which case the
    /// pressure is determined only up to a constant and solutions are
    /// normalized to zero weighted mean.
    pub mean_zero_pressure: bool,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            n_vertices: mesh.n_vertices(),
            n_cells: mesh.n_cells(),
            mean_zero_pressure: mesh.neumann_facet_count() == 0,
        }
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_vertices + self.n_cells
    }

    pub fn n_pressure(&self) -> usize {
        self.n_cells
    }

    pub fn dof_x(&self, vertex: usize) -> usize {
        vertex
    }

    pub fn dof_y(&self, vertex: usize) -> usize {
        self.n_vertices + vertex
    }

    pub fn dof_enrichment(&self, cell: usize) -> usize {
        2 * self.n_vertices + cell
    }

    /// First index of the enrichment block (= size of the continuous block).
    pub fn enrichment_offset(&self) -> usize {
        2 * self.n_vertices
    }

    /// Global velocity DOF indices of the 7 local basis functions of a cell:
    /// 3 x-hats, 3 y-hats, 1 enrichment.
    pub fn cell_velocity_dofs(&self, mesh: &Mesh, cell: usize) -> [usize; 7] {
        let [a, b, c] = mesh.cells[cell];
        [
            self.dof_x(a),
            self.dof_x(b),
            self.dof_x(c),
            self.dof_y(a),
            self.dof_y(b),
            self.dof_y(c),
            self.dof_enrichment(cell),
        ]
    }
}

/// Coefficient vector of a discrete velocity over a [`DofMap`].
#[derive(Debug, Clone)]
pub struct DiscreteVelocity(pub Vec<f64>);

/// Coefficient vector of a discrete pressure (one value per cell).
#[derive(Debug, Clone)]
pub struct DiscretePressure(pub Vec<f64>);

type VectorField = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;
type ScalarField = dyn Fn(f64, f64) -> f64 + Send + Sync;
type MatrixField = dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync;
type TractionField = dyn Fn(f64, f64, [f64; 2]) -> [f64; 2] + Send + Sync;

/// Data of one Stokes problem: viscosity, body force, boundary data and
/// optionally the exact solution fields used for error computation. The
/// Neumann traction is a function of position and outward normal.
pub struct ProblemSpec {
    pub viscosity: Box<ScalarField>,
    pub body_force: Box<VectorField>,
    pub dirichlet_data: Option<Box<VectorField>>,
    pub neumann_data: Option<Box<TractionField>>,
    pub exact_velocity: Option<Box<VectorField>>,
    pub exact_velocity_gradient: Option<Box<MatrixField>>,
    pub exact_pressure: Option<Box<ScalarField>>,
}

impl ProblemSpec {
    /// Samples the viscosity at every cell centroid, rejecting nonpositive
    /// values.
    pub fn viscosity_at_centroids(&self, mesh: &Mesh) -> Result<Vec<f64>, Error> {
        let mut mu = Vec::with_capacity(mesh.n_cells());
        for (t, c) in mesh.cell_centroids.iter().enumerate() {
            let v = (self.viscosity)(c[0], c[1]);
            if !(v > 0.0) {
                return Err(Error::NonpositiveViscosity { cell: t, mu: v });
            }
            mu.push(v);
        }
        Ok(mu)
    }
}

/// Per-cell geometry and local basis data shared by evaluation and assembly.
/// Local velocity basis ordering: 0..3 x-component hats, 3..6 y-component
/// hats, 6 enrichment.
pub struct CellBasis {
    pub area: f64,
    pub centroid: [f64; 2],
    pub points: [[f64; 2]; 3],
    /// Gradients of the three scalar hat functions (constant per cell).
    pub hat_grads: [[f64; 2]; 3],
}

pub const LOCAL_DOFS: usize = 7;

impl CellBasis {
    pub fn new(mesh: &Mesh, cell: usize) -> Self {
        let [a, b, c] = mesh.cells[cell];
        let points = [mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]];
        let area = mesh.cell_areas[cell];
        let inv2a = 1.0 / (2.0 * area);
        let hat_grads = [
            [
                (points[1][1] - points[2][1]) * inv2a,
                (points[2][0] - points[1][0]) * inv2a,
            ],
            [
                (points[2][1] - points[0][1]) * inv2a,
                (points[0][0] - points[2][0]) * inv2a,
            ],
            [
                (points[0][1] - points[1][1]) * inv2a,
                (points[1][0] - points[0][0]) * inv2a,
            ],
        ];
        Self {
            area,
            centroid: mesh.cell_centroids[cell],
            points,
            hat_grads,
        }
    }

    /// Barycentric coordinates of a point.
    pub fn barycentric(&self, x: f64, y: f64) -> [f64; 3] {
        let mut l = [0.0; 3];
        for k in 0..3 {
            // lambda_k is affine with gradient hat_grads[k] and value 1 at vertex k
            let g = self.hat_grads[k];
            l[k] = 1.0 + g[0] * (x - self.points[k][0]) + g[1] * (y - self.points[k][1]);
        }
        l
    }

    /// Value of local velocity basis function `k` at a point.
    pub fn value(&self, k: usize, x: f64, y: f64) -> [f64; 2] {
        let l = self.barycentric(x, y);
        match k {
            0..=2 => [l[k], 0.0],
            3..=5 => [0.0, l[k - 3]],
            6 => [x - self.centroid[0], y - self.centroid[1]],
            _ => unreachable!("local velocity dof index out of range"),
        }
    }

    /// Symmetric gradient of local basis function `k` (constant per cell).
    pub fn strain(&self, k: usize) -> [[f64; 2]; 2] {
        match k {
            0..=2 => {
                let g = self.hat_grads[k];
                [[g[0], 0.5 * g[1]], [0.5 * g[1], 0.0]]
            }
            3..=5 => {
                let g = self.hat_grads[k - 3];
                [[0.0, 0.5 * g[0]], [0.5 * g[0], g[1]]]
            }
            6 => [[1.0, 0.0], [0.0, 1.0]],
            _ => unreachable!("local velocity dof index out of range"),
        }
    }

    /// Divergence of local basis function `k` (constant per cell).
    pub fn div(&self, k: usize) -> f64 {
        match k {
            0..=2 => self.hat_grads[k][0],
            3..=5 => self.hat_grads[k - 3][1],
            6 => 2.0,
            _ => unreachable!("local velocity dof index out of range"),
        }
    }
}

/// Frobenius inner product of two 2x2 matrices.
pub fn frob(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Facet viscosity: harmonic mean of the incident cells' values on interior
/// facets, single incident value on the boundary.
pub fn facet_viscosity(facet: &Facet, mu_cells: &[f64]) -> f64 {
    match facet.minus_cell {
        Some(minus) => {
            let a = mu_cells[facet.plus_cell];
            let b = mu_cells[minus];
            2.0 * a * b / (a + b)
        }
        None => mu_cells[facet.plus_cell],
    }
}

/// Evaluates a discrete velocity at a point of a cell. The point must lie in
/// the cell up to a barycentric tolerance of 1e-12.
pub fn eval_velocity(
    u: &DiscreteVelocity,
    mesh: &Mesh,
    dofmap: &DofMap,
    cell: usize,
    x: f64,
    y: f64,
) -> Result<[f64; 2], Error> {
    let basis = CellBasis::new(mesh, cell);
    let l = basis.barycentric(x, y);
    if l.iter().any(|&li| li < -1e-12) {
        return Err(Error::PointOutsideCell { cell, x, y });
    }
    Ok(eval_velocity_unchecked(u, mesh, dofmap, &basis, cell, x, y))
}

pub(crate) fn eval_velocity_unchecked(
    u: &DiscreteVelocity,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &CellBasis,
    cell: usize,
    x: f64,
    y: f64,
) -> [f64; 2] {
    let dofs = dofmap.cell_velocity_dofs(mesh, cell);
    let mut v = [0.0; 2];
    for (k, &dof) in dofs.iter().enumerate() {
        let phi = basis.value(k, x, y);
        v[0] += u.0[dof] * phi[0];
        v[1] += u.0[dof] * phi[1];
    }
    v
}

/// Per-cell strain tensor and divergence of a discrete velocity (both are
/// constant on each cell).
pub fn eval_strain_and_div(
    u: &DiscreteVelocity,
    mesh: &Mesh,
    dofmap: &DofMap,
    cell: usize,
) -> ([[f64; 2]; 2], f64) {
    let basis = CellBasis::new(mesh, cell);
    let dofs = dofmap.cell_velocity_dofs(mesh, cell);
    let mut eps = [[0.0; 2]; 2];
    let mut div = 0.0;
    for (k, &dof) in dofs.iter().enumerate() {
        let c = u.0[dof];
        let e = basis.strain(k);
        for i in 0..2 {
            for j in 0..2 {
                eps[i][j] += c * e[i][j];
            }
        }
        div += c * basis.div(k);
    }
    (eps, div)
}

/// Jump of a discrete velocity across a facet at a point on the facet:
/// trace from `T+` minus trace from `T-` on interior facets (only the
/// enrichment contributes there), single trace on boundary facets.
pub fn velocity_jump(
    u: &DiscreteVelocity,
    mesh: &Mesh,
    dofmap: &DofMap,
    facet: &Facet,
    x: f64,
    y: f64,
) -> [f64; 2] {
    match facet.minus_cell {
        Some(minus) => {
            let cp = u.0[dofmap.dof_enrichment(facet.plus_cell)];
            let cm = u.0[dofmap.dof_enrichment(minus)];
            let xp = mesh.cell_centroids[facet.plus_cell];
            let xm = mesh.cell_centroids[minus];
            [
                cp * (x - xp[0]) - cm * (x - xm[0]),
                cp * (y - xp[1]) - cm * (y - xm[1]),
            ]
        }
        None => {
            let basis = CellBasis::new(mesh, facet.plus_cell);
            eval_velocity_unchecked(u, mesh, dofmap, &basis, facet.plus_cell, x, y)
        }
    }
}

/// Energy norm of a discrete velocity: 2 mu-weighted broken strain seminorm
/// plus alpha/h_e-weighted facet jump penalties over interior and Dirichlet
/// facets.
pub fn energy_norm(
    u: &DiscreteVelocity,
    mesh: &Mesh,
    dofmap: &DofMap,
    alpha: f64,
    mu_cells: &[f64],
) -> f64 {
    let mut sq = 0.0;
    for t in 0..mesh.n_cells() {
        let (eps, _) = eval_strain_and_div(u, mesh, dofmap, t);
        sq += 2.0 * mu_cells[t] * frob(eps, eps) * mesh.cell_areas[t];
    }
    for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
        let mu_e = facet_viscosity(facet, mu_cells);
        let a = mesh.vertices[facet.vertices[0]];
        let b = mesh.vertices[facet.vertices[1]];
        for ([x, y], w) in edge_points_gauss3(a, b, facet.length) {
            let j = velocity_jump(u, mesh, dofmap, facet, x, y);
            sq += 2.0 * mu_e * alpha / facet.h_e * w * (j[0] * j[0] + j[1] * j[1]);
        }
    }
    sq.sqrt()
}

/// Velocity energy error and pressure L2 error against the exact fields of
/// a [`ProblemSpec`]. Requires `exact_velocity`, `exact_velocity_gradient`
/// and `exact_pressure`.
pub fn errors_vs_exact(
    u_h: &DiscreteVelocity,
    p_h: &DiscretePressure,
    problem: &ProblemSpec,
    mesh: &Mesh,
    dofmap: &DofMap,
    alpha: f64,
) -> Result<(f64, f64), Error> {
    let exact_u = problem.exact_velocity.as_ref().ok_or(Error::MissingExactFields)?;
    let exact_grad = problem
        .exact_velocity_gradient
        .as_ref()
        .ok_or(Error::MissingExactFields)?;
    let exact_p = problem.exact_pressure.as_ref().ok_or(Error::MissingExactFields)?;
    let mu_cells = problem.viscosity_at_centroids(mesh)?;

    let mut energy_sq = 0.0;
    let mut pressure_sq = 0.0;
    for t in 0..mesh.n_cells() {
        let basis = CellBasis::new(mesh, t);
        let (eps_h, _) = eval_strain_and_div(u_h, mesh, dofmap, t);
        for ([x, y], w) in
            triangle_points_deg4(basis.points[0], basis.points[1], basis.points[2], basis.area)
        {
            let g = exact_grad(x, y);
            let diff = [
                [g[0][0] - eps_h[0][0], 0.5 * (g[0][1] + g[1][0]) - eps_h[0][1]],
                [0.5 * (g[0][1] + g[1][0]) - eps_h[1][0], g[1][1] - eps_h[1][1]],
            ];
            energy_sq += 2.0 * mu_cells[t] * w * frob(diff, diff);
            let dp = exact_p(x, y) - p_h.0[t];
            pressure_sq += w * dp * dp;
        }
    }
    for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
        let mu_e = facet_viscosity(facet, &mu_cells);
        let a = mesh.vertices[facet.vertices[0]];
        let b = mesh.vertices[facet.vertices[1]];
        for ([x, y], w) in edge_points_gauss3(a, b, facet.length) {
            // [u - u_h]: the exact velocity is continuous, so on interior
            // facets only -[u_h] remains; on Dirichlet facets it is the
            // boundary trace of the error.
            let jh = velocity_jump(u_h, mesh, dofmap, facet, x, y);
            let j = if facet.is_interior() {
                [-jh[0], -jh[1]]
            } else {
                let ue = exact_u(x, y);
                [ue[0] - jh[0], ue[1] - jh[1]]
            };
            energy_sq += 2.0 * mu_e * alpha / facet.h_e * w * (j[0] * j[0] + j[1] * j[1]);
        }
    }
    Ok((energy_sq.sqrt(), pressure_sq.sqrt()))
}

/// Interpolates a vector field into the continuous part of the velocity
/// space (vertex values; enrichment coefficients zero).
pub fn interpolate_cg(field: impl Fn(f64, f64) -> [f64; 2], mesh: &Mesh, dofmap: &DofMap) -> DiscreteVelocity {
    let mut coeffs = vec![0.0; dofmap.n_velocity()];
    for (v, p) in mesh.vertices.iter().enumerate() {
        let val = field(p[0], p[1]);
        coeffs[dofmap.dof_x(v)] = val[0];
        coeffs[dofmap.dof_y(v)] = val[1];
    }
    DiscreteVelocity(coeffs)
}
