//! Assembly of the saddle-point blocks.
//!
//! The velocity block `A` encodes the interior-penalty form: the cellwise
//! strain product, the consistency term `-2mu ({eps(u)} n, [v])`, its
//! `theta`-weighted transpose, and the `alpha/h_e` jump penalty, with facet
//! sums over interior and Dirichlet facets. Continuous basis functions have
//! zero jump across interior facets, so interior-facet jump terms involve
//! only enrichment DOFs; jumps are assembled analytically so that this
//! sparsity is exact. The divergence block `B`, the diagonal pressure mass
//! `M_p`, the symmetric energy Gram `A_E` and the right-hand sides complete
//! the system
//!
//! ```text
//!   [ A  B^T ] [u]   [f]
//!   [ B   0  ] [p] = [g]
//! ```
//!
//! All volume stiffness/divergence integrands are cellwise constant and are
//! integrated exactly; load and boundary-data terms use the degree-4 rules
//! from [`crate::quadrature`]. Variable viscosity enters cellwise, with the
//! harmonic mean on facets between cells of different viscosity.

use crate::error::Error;
use crate::linsolve::CsrMatrix;
use crate::mesh::{Facet, Mesh};
use crate::quadrature::{edge_points_gauss3, triangle_points_deg4};
use crate::space::{facet_viscosity, frob, CellBasis, DofMap, ProblemSpec, LOCAL_DOFS};

/// Symmetrization parameter of the interior-penalty form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theta {
    /// theta = -1 (symmetric interior penalty)
    Sipg,
    /// theta = 0 (incomplete interior penalty)
    Iipg,
    /// theta = 1 (nonsymmetric interior penalty)
    Nipg,
}

impl Theta {
    pub fn from_int(value: i32) -> Result<Self, Error> {
        match value {
            -1 => Ok(Theta::Sipg),
            0 => Ok(Theta::Iipg),
            1 => Ok(Theta::Nipg),
            other => Err(Error::InvalidTheta(other)),
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Theta::Sipg => -1.0,
            Theta::Iipg => 0.0,
            Theta::Nipg => 1.0,
        }
    }
}

/// Symmetrization and penalty parameters of the discretization.
#[derive(Debug, Clone, Copy)]
pub struct DiscretizationParams {
    pub theta: Theta,
    pub alpha: f64,
}

impl DiscretizationParams {
    pub fn new(theta: Theta, alpha: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { theta, alpha })
    }
}

/// Assembled blocks and right-hand sides of one discretized Stokes problem.
pub struct BlockSystem {
    /// Velocity block (n_u x n_u); symmetric only for theta = -1.
    pub a: CsrMatrix,
    /// Divergence block (n_p x n_u).
    pub b: CsrMatrix,
    /// Transpose of `b`, cached for the saddle operator.
    pub bt: CsrMatrix,
    /// Diagonal pressure mass entries |T|.
    pub mp: Vec<f64>,
    /// Symmetric energy Gram matrix (n_u x n_u).
    pub ae: CsrMatrix,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
    pub params: DiscretizationParams,
    pub mu_cells: Vec<f64>,
}

impl BlockSystem {
    /// Assembles all blocks and right-hand sides for a problem.
    pub fn assemble(
        mesh: &Mesh,
        dofmap: &DofMap,
        params: DiscretizationParams,
        problem: &ProblemSpec,
    ) -> Result<Self, Error> {
        let mu_cells = problem.viscosity_at_centroids(mesh)?;
        let a = assemble_a(mesh, dofmap, params, &mu_cells);
        let b = assemble_b(mesh, dofmap);
        let bt = b.transpose();
        let ae = assemble_energy_gram(mesh, dofmap, params.alpha, &mu_cells);
        let mp = assemble_pressure_mass(mesh);
        let (rhs_u, rhs_p) = assemble_rhs(mesh, dofmap, params, problem, &mu_cells)?;
        Ok(Self {
            a,
            b,
            bt,
            mp,
            ae,
            rhs_u,
            rhs_p,
            params,
            mu_cells,
        })
    }

    pub fn n_velocity(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    /// Total number of unknowns of the saddle system.
    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure()
    }

    /// Stacked right-hand side [rhs_u; rhs_p].
    pub fn stacked_rhs(&self) -> Vec<f64> {
        let mut rhs = Vec::with_capacity(self.n_total());
        rhs.extend_from_slice(&self.rhs_u);
        rhs.extend_from_slice(&self.rhs_p);
        rhs
    }
}

/// Trace data of the local velocity basis on one facet: the participating
/// cells' local DOFs with their global indices, average-strain normal flux
/// (constant per facet) and jump values at the quadrature points.
struct FacetBasis {
    dofs: Vec<usize>,
    /// {eps(phi_k)} n_e for every local DOF.
    strain_n: Vec<[f64; 2]>,
    /// [phi_k] at each of the 3 facet quadrature points; zero for continuous
    /// functions on interior facets.
    jumps: Vec<[[f64; 2]; 3]>,
    /// Indices into `dofs` with a nonzero jump.
    jump_dofs: Vec<usize>,
    points: [[f64; 2]; 3],
    weights: [f64; 3],
}

fn facet_basis(mesh: &Mesh, dofmap: &DofMap, facet: &Facet) -> FacetBasis {
    let a = mesh.vertices[facet.vertices[0]];
    let b = mesh.vertices[facet.vertices[1]];
    let qp = edge_points_gauss3(a, b, facet.length);
    let points = [qp[0].0, qp[1].0, qp[2].0];
    let weights = [qp[0].1, qp[1].1, qp[2].1];
    let n = facet.normal;

    let mut dofs = Vec::new();
    let mut strain_n = Vec::new();
    let mut jumps = Vec::new();
    let mut jump_dofs = Vec::new();

    match facet.minus_cell {
        Some(minus) => {
            for (cell, sign) in [(facet.plus_cell, 1.0), (minus, -1.0)] {
                let basis = CellBasis::new(mesh, cell);
                let cell_dofs = dofmap.cell_velocity_dofs(mesh, cell);
                for k in 0..LOCAL_DOFS {
                    dofs.push(cell_dofs[k]);
                    let e = basis.strain(k);
                    strain_n.push([
                        0.5 * (e[0][0] * n[0] + e[0][1] * n[1]),
                        0.5 * (e[1][0] * n[0] + e[1][1] * n[1]),
                    ]);
                    let mut j = [[0.0; 2]; 3];
                    if k == 6 {
                        // only the enrichment jumps across interior facets
                        for (q, p) in points.iter().enumerate() {
                            let v = basis.value(k, p[0], p[1]);
                            j[q] = [sign * v[0], sign * v[1]];
                        }
                        jump_dofs.push(dofs.len() - 1);
                    }
                    jumps.push(j);
                }
            }
        }
        None => {
            let basis = CellBasis::new(mesh, facet.plus_cell);
            let cell_dofs = dofmap.cell_velocity_dofs(mesh, facet.plus_cell);
            for k in 0..LOCAL_DOFS {
                dofs.push(cell_dofs[k]);
                let e = basis.strain(k);
                strain_n.push([
                    e[0][0] * n[0] + e[0][1] * n[1],
                    e[1][0] * n[0] + e[1][1] * n[1],
                ]);
                let mut j = [[0.0; 2]; 3];
                for (q, p) in points.iter().enumerate() {
                    j[q] = basis.value(k, p[0], p[1]);
                }
                jumps.push(j);
                jump_dofs.push(k);
            }
        }
    }

    FacetBasis {
        dofs,
        strain_n,
        jumps,
        jump_dofs,
        points,
        weights,
    }
}

/// Assembles the velocity block of the interior-penalty form.
pub fn assemble_a(
    mesh: &Mesh,
    dofmap: &DofMap,
    params: DiscretizationParams,
    mu_cells: &[f64],
) -> CsrMatrix {
    let n_u = dofmap.n_velocity();
    let theta = params.theta.factor();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for t in 0..mesh.n_cells() {
        let basis = CellBasis::new(mesh, t);
        let dofs = dofmap.cell_velocity_dofs(mesh, t);
        let w = 2.0 * mu_cells[t] * basis.area;
        for i in 0..LOCAL_DOFS {
            let ei = basis.strain(i);
            for j in 0..LOCAL_DOFS {
                let v = w * frob(ei, basis.strain(j));
                if v != 0.0 {
                    triplets.push((dofs[i], dofs[j], v));
                }
            }
        }
    }

    for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
        let fb = facet_basis(mesh, dofmap, facet);
        let mu_e = facet_viscosity(facet, mu_cells);
        let pen = 2.0 * mu_e * params.alpha / facet.h_e;

        // consistency and penalty: rows with nonzero test jump
        for &i in &fb.jump_dofs {
            for j in 0..fb.dofs.len() {
                let mut consistency = 0.0;
                for q in 0..3 {
                    consistency += fb.weights[q]
                        * (fb.strain_n[j][0] * fb.jumps[i][q][0]
                            + fb.strain_n[j][1] * fb.jumps[i][q][1]);
                }
                let mut v = -2.0 * mu_e * consistency;
                if fb.jumps[j] != [[0.0; 2]; 3] {
                    let mut penalty = 0.0;
                    for q in 0..3 {
                        penalty += fb.weights[q]
                            * (fb.jumps[j][q][0] * fb.jumps[i][q][0]
                                + fb.jumps[j][q][1] * fb.jumps[i][q][1]);
                    }
                    v += pen * penalty;
                }
                if v != 0.0 {
                    triplets.push((fb.dofs[i], fb.dofs[j], v));
                }
            }
        }
        // theta term: columns with nonzero trial jump
        if theta != 0.0 {
            for &j in &fb.jump_dofs {
                for i in 0..fb.dofs.len() {
                    let mut sym = 0.0;
                    for q in 0..3 {
                        sym += fb.weights[q]
                            * (fb.jumps[j][q][0] * fb.strain_n[i][0]
                                + fb.jumps[j][q][1] * fb.strain_n[i][1]);
                    }
                    let v = 2.0 * mu_e * theta * sym;
                    if v != 0.0 {
                        triplets.push((fb.dofs[i], fb.dofs[j], v));
                    }
                }
            }
        }
    }

    CsrMatrix::from_triplets(n_u, n_u, &triplets)
}

/// Assembles the symmetric energy Gram matrix (strain product plus jump
/// penalty; no consistency terms).
pub fn assemble_energy_gram(
    mesh: &Mesh,
    dofmap: &DofMap,
    alpha: f64,
    mu_cells: &[f64],
) -> CsrMatrix {
    let n_u = dofmap.n_velocity();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for t in 0..mesh.n_cells() {
        let basis = CellBasis::new(mesh, t);
        let dofs = dofmap.cell_velocity_dofs(mesh, t);
        let w = 2.0 * mu_cells[t] * basis.area;
        for i in 0..LOCAL_DOFS {
            let ei = basis.strain(i);
            for j in 0..LOCAL_DOFS {
                let v = w * frob(ei, basis.strain(j));
                if v != 0.0 {
                    triplets.push((dofs[i], dofs[j], v));
                }
            }
        }
    }

    for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
        let fb = facet_basis(mesh, dofmap, facet);
        let mu_e = facet_viscosity(facet, mu_cells);
        let pen = 2.0 * mu_e * alpha / facet.h_e;
        for &i in &fb.jump_dofs {
            for &j in &fb.jump_dofs {
                let mut penalty = 0.0;
                for q in 0..3 {
                    penalty += fb.weights[q]
                        * (fb.jumps[j][q][0] * fb.jumps[i][q][0]
                            + fb.jumps[j][q][1] * fb.jumps[i][q][1]);
                }
                let v = pen * penalty;
                if v != 0.0 {
                    triplets.push((fb.dofs[i], fb.dofs[j], v));
                }
            }
        }
    }

    CsrMatrix::from_triplets(n_u, n_u, &triplets)
}

/// Assembles the divergence block: `b(v, w) = -sum_T (w, div v)_T +
/// sum_e ({w}, [v] . n_e)_e` over interior and Dirichlet facets.
pub fn assemble_b(mesh: &Mesh, dofmap: &DofMap) -> CsrMatrix {
    let n_p = dofmap.n_pressure();
    let n_u = dofmap.n_velocity();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for t in 0..mesh.n_cells() {
        let basis = CellBasis::new(mesh, t);
        let dofs = dofmap.cell_velocity_dofs(mesh, t);
        for k in 0..LOCAL_DOFS {
            let v = -basis.div(k) * basis.area;
            if v != 0.0 {
                triplets.push((t, dofs[k], v));
            }
        }
    }

    for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
        let fb = facet_basis(mesh, dofmap, facet);
        let n = facet.normal;
        // pressure rows incident to the facet with the weight of {w}
        let rows: &[(usize, f64)] = &match facet.minus_cell {
            Some(minus) => vec![(facet.plus_cell, 0.5), (minus, 0.5)],
            None => vec![(facet.plus_cell, 1.0)],
        };
        for &j in &fb.jump_dofs {
            let mut flux = 0.0;
            for q in 0..3 {
                flux += fb.weights[q] * (fb.jumps[j][q][0] * n[0] + fb.jumps[j][q][1] * n[1]);
            }
            if flux != 0.0 {
                for &(row, w) in rows {
                    triplets.push((row, fb.dofs[j], w * flux));
                }
            }
        }
    }

    CsrMatrix::from_triplets(n_p, n_u, &triplets)
}

/// Diagonal pressure mass matrix entries |T|.
pub fn assemble_pressure_mass(mesh: &Mesh) -> Vec<f64> {
    mesh.cell_areas.clone()
}

/// Assembles the load vector (body force, Neumann traction, Dirichlet
/// consistency and penalty data terms) and the pressure right-hand side
/// (Dirichlet flux per cell).
pub fn assemble_rhs(
    mesh: &Mesh,
    dofmap: &DofMap,
    params: DiscretizationParams,
    problem: &ProblemSpec,
    mu_cells: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let theta = params.theta.factor();
    let mut rhs_u = vec![0.0; dofmap.n_velocity()];
    let mut rhs_p = vec![0.0; dofmap.n_pressure()];

    let f = &problem.body_force;
    for t in 0..mesh.n_cells() {
        let basis = CellBasis::new(mesh, t);
        let dofs = dofmap.cell_velocity_dofs(mesh, t);
        for ([x, y], w) in
            triangle_points_deg4(basis.points[0], basis.points[1], basis.points[2], basis.area)
        {
            let fv = f(x, y);
            for (k, &dof) in dofs.iter().enumerate() {
                let phi = basis.value(k, x, y);
                rhs_u[dof] += w * (fv[0] * phi[0] + fv[1] * phi[1]);
            }
        }
    }

    if mesh.neumann_facet_count() > 0 && problem.neumann_data.is_none() {
        return Err(Error::MissingNeumannData);
    }
    if mesh.dirichlet_facet_count() > 0 && problem.dirichlet_data.is_none() {
        return Err(Error::MissingDirichletData);
    }

    for facet in mesh.facets.iter() {
        match facet.marker {
            crate::mesh::FacetMarker::Interior => {}
            crate::mesh::FacetMarker::NeumannBoundary => {
                let s = problem.neumann_data.as_ref().unwrap();
                let basis = CellBasis::new(mesh, facet.plus_cell);
                let dofs = dofmap.cell_velocity_dofs(mesh, facet.plus_cell);
                let a = mesh.vertices[facet.vertices[0]];
                let b = mesh.vertices[facet.vertices[1]];
                for ([x, y], w) in edge_points_gauss3(a, b, facet.length) {
                    let sv = s(x, y, facet.normal);
                    for (k, &dof) in dofs.iter().enumerate() {
                        let phi = basis.value(k, x, y);
                        rhs_u[dof] += w * (sv[0] * phi[0] + sv[1] * phi[1]);
                    }
                }
            }
            crate::mesh::FacetMarker::DirichletBoundary => {
                let g = problem.dirichlet_data.as_ref().unwrap();
                let fb = facet_basis(mesh, dofmap, facet);
                let mu_e = facet_viscosity(facet, mu_cells);
                let pen = 2.0 * mu_e * params.alpha / facet.h_e;
                let n = facet.normal;
                for q in 0..3 {
                    let [x, y] = fb.points[q];
                    let w = fb.weights[q];
                    let gv = g(x, y);
                    for (k, &dof) in fb.dofs.iter().enumerate() {
                        // theta-weighted consistency data term
                        rhs_u[dof] += 2.0
                            * mu_e
                            * theta
                            * w
                            * (gv[0] * fb.strain_n[k][0] + gv[1] * fb.strain_n[k][1]);
                        // penalty data term
                        rhs_u[dof] +=
                            pen * w * (gv[0] * fb.jumps[k][q][0] + gv[1] * fb.jumps[k][q][1]);
                    }
                    rhs_p[facet.plus_cell] += w * (gv[0] * n[0] + gv[1] * n[1]);
                }
            }
        }
    }

    Ok((rhs_u, rhs_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::quadratic_form;
    use crate::mesh::{generate_unit_square, parse_mesh, BoundarySpec, Mesh};
    use crate::space::{energy_norm, DiscreteVelocity, DofMap};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(theta: i32, alpha: f64) -> DiscretizationParams {
        DiscretizationParams::new(Theta::from_int(theta).unwrap(), alpha).unwrap()
    }

    fn reference_triangle_neumann() -> Mesh {
        parse_mesh(
            "vertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\n",
            &BoundarySpec::all_neumann(),
        )
        .unwrap()
    }

    fn random_velocity(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
    }

    fn constant_problem(mu: f64) -> ProblemSpec {
        ProblemSpec {
            viscosity: Box::new(move |_, _| mu),
            body_force: Box::new(|_, _| [0.0, 0.0]),
            dirichlet_data: Some(Box::new(|_, _| [0.0, 0.0])),
            neumann_data: Some(Box::new(|_, _, _| [0.0, 0.0])),
            exact_velocity: None,
            exact_velocity_gradient: None,
            exact_pressure: None,
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Theta::from_int(2).is_err());
        assert!(DiscretizationParams::new(Theta::Iipg, 0.0).is_err());
        assert!(DiscretizationParams::new(Theta::Iipg, -1.0).is_err());
    }

    #[test]
    fn nipg_quadratic_form_equals_energy_norm() {
        let mesh = generate_unit_square(3, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let a = assemble_a(&mesh, &dm, params(1, 1.0), &mu);
        let ae = assemble_energy_gram(&mesh, &dm, 1.0, &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = random_velocity(dm.n_velocity(), &mut rng);
            let quad = quadratic_form(&a, &v, &v);
            let quad_e = quadratic_form(&ae, &v, &v);
            let norm = energy_norm(&DiscreteVelocity(v.clone()), &mesh, &dm, 1.0, &mu);
            assert!((quad - norm * norm).abs() <= 1e-12 * norm * norm);
            assert!((quad - quad_e).abs() <= 1e-12 * quad_e.abs());
        }
    }

    #[test]
    fn sipg_matrix_is_symmetric() {
        let mesh = generate_unit_square(3, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let a = assemble_a(&mesh, &dm, params(-1, 1.0), &mu);
        assert!(a.asymmetry() / a.max_abs() < 1e-12);
        // IIPG is nonsymmetric
        let a0 = assemble_a(&mesh, &dm, params(0, 1.0), &mu);
        assert!(a0.asymmetry() / a0.max_abs() > 1e-6);
    }

    #[test]
    fn single_cell_enrichment_diagonal() {
        let mesh = reference_triangle_neumann();
        let dm = DofMap::new(&mesh);
        let a = assemble_a(&mesh, &dm, params(0, 1.0), &[1.0]);
        let enr = dm.dof_enrichment(0);
        // 2 mu (eps(psi), eps(psi))_T = 2 * 2 * |T| = 2 on the reference triangle
        assert!((a.get(enr, enr) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_block_on_constant_field() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let b = assemble_b(&mesh, &dm);
        let mut v = vec![0.0; dm.n_velocity()];
        for vert in 0..dm.n_vertices {
            v[dm.dof_x(vert)] = 1.0;
        }
        let bv = b.apply(&v);
        // rows of cells without Dirichlet facets vanish; the total sum
        // vanishes by the divergence theorem over the closed boundary
        let mut has_boundary = vec![false; mesh.n_cells()];
        for f in mesh.facets.iter().filter(|f| f.is_dirichlet()) {
            has_boundary[f.plus_cell] = true;
        }
        for (t, &val) in bv.iter().enumerate() {
            if !has_boundary[t] {
                assert!(val.abs() < 1e-14, "interior cell row {t} = {val}");
            }
        }
        assert!(bv.iter().sum::<f64>().abs() < 1e-13);

        // with an all-Neumann boundary there are no facet terms at all
        let mesh_n = generate_unit_square(2, &BoundarySpec::all_neumann()).unwrap();
        let b_n = assemble_b(&mesh_n, &dm);
        let bv_n = b_n.apply(&v);
        assert!(bv_n.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn divergence_block_single_cell_enrichment() {
        let mesh = reference_triangle_neumann();
        let dm = DofMap::new(&mesh);
        let b = assemble_b(&mesh, &dm);
        // volume part: -(1, div psi)_T = -2 |T| = -1
        assert!((b.get(0, dm.dof_enrichment(0)) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_block_sparsity_census() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let b = assemble_b(&mesh, &dm);
        assert_eq!(b.nrows(), dm.n_pressure());
        for t in 0..b.nrows() {
            let (cols, _) = b.row(t);
            // 6 continuous DOFs + own enrichment + at most 3 neighbors
            assert!(cols.len() <= 10, "row {t} has {} nonzeros", cols.len());
        }
    }

    #[test]
    fn divergence_block_matches_brute_force_quadrature() {
        // independent oracle: b(v, w) evaluated per cell by quadrature of
        // div v (finite differences of point evaluations) and facet jumps
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let b = assemble_b(&mesh, &dm);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = DiscreteVelocity(random_velocity(dm.n_velocity(), &mut rng));
        let q: Vec<f64> = (0..dm.n_pressure()).map(|_| rng.gen::<f64>() - 0.5).collect();

        let eps_fd = 1e-6;
        let mut oracle = 0.0;
        for t in 0..mesh.n_cells() {
            let c = mesh.cell_centroids[t];
            let ev = |x: f64, y: f64| {
                crate::space::eval_velocity(&v, &mesh, &dm, t, x, y).unwrap()
            };
            let div = (ev(c[0] + eps_fd, c[1])[0] - ev(c[0] - eps_fd, c[1])[0]) / (2.0 * eps_fd)
                + (ev(c[0], c[1] + eps_fd)[1] - ev(c[0], c[1] - eps_fd)[1]) / (2.0 * eps_fd);
            oracle -= q[t] * div * mesh.cell_areas[t];
        }
        for facet in mesh.facets.iter().filter(|f| !f.is_neumann()) {
            let pa = mesh.vertices[facet.vertices[0]];
            let pb = mesh.vertices[facet.vertices[1]];
            let w_avg = match facet.minus_cell {
                Some(minus) => 0.5 * (q[facet.plus_cell] + q[minus]),
                None => q[facet.plus_cell],
            };
            for ([x, y], w) in crate::quadrature::edge_points_gauss3(pa, pb, facet.length) {
                let j = crate::space::velocity_jump(&v, &mesh, &dm, facet, x, y);
                oracle += w * w_avg * (j[0] * facet.normal[0] + j[1] * facet.normal[1]);
            }
        }
        let bv = b.apply(&v.0);
        let assembled: f64 = q.iter().zip(&bv).map(|(qi, bi)| qi * bi).sum();
        assert!(
            (assembled - oracle).abs() < 1e-5,
            "assembled {assembled}, oracle {oracle}"
        );
    }

    #[test]
    fn rhs_zero_data_is_zero() {
        let mesh = generate_unit_square(2, &BoundarySpec::dirichlet_vertical_sides()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let (rhs_u, rhs_p) =
            assemble_rhs(&mesh, &dm, params(0, 1.0), &constant_problem(1.0), &mu).unwrap();
        assert!(rhs_u.iter().all(|x| *x == 0.0));
        assert!(rhs_p.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn rhs_constant_body_force_single_cell() {
        let mesh = reference_triangle_neumann();
        let dm = DofMap::new(&mesh);
        let mut problem = constant_problem(1.0);
        problem.body_force = Box::new(|_, _| [1.0, 0.0]);
        let (rhs_u, _) = assemble_rhs(&mesh, &dm, params(0, 1.0), &problem, &[1.0]).unwrap();
        for v in 0..3 {
            assert!((rhs_u[dm.dof_x(v)] - 1.0 / 6.0).abs() < 1e-14);
            assert!(rhs_u[dm.dof_y(v)].abs() < 1e-15);
        }
        // zero-mean enrichment never sees a constant force
        assert!(rhs_u[dm.dof_enrichment(0)].abs() < 1e-15);
    }

    #[test]
    fn rhs_missing_data_errors() {
        let mesh = generate_unit_square(2, &BoundarySpec::dirichlet_vertical_sides()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let mut no_neumann = constant_problem(1.0);
        no_neumann.neumann_data = None;
        assert!(matches!(
            assemble_rhs(&mesh, &dm, params(0, 1.0), &no_neumann, &mu),
            Err(Error::MissingNeumannData)
        ));
        let mut no_dirichlet = constant_problem(1.0);
        no_dirichlet.dirichlet_data = None;
        assert!(matches!(
            assemble_rhs(&mesh, &dm, params(0, 1.0), &no_dirichlet, &mu),
            Err(Error::MissingDirichletData)
        ));
    }

    #[test]
    fn pressure_rhs_localized_to_dirichlet_cells() {
        let mesh = generate_unit_square(3, &BoundarySpec::dirichlet_vertical_sides()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let mut problem = constant_problem(1.0);
        problem.dirichlet_data = Some(Box::new(|_, y| [4.0 * y * (1.0 - y), 0.0]));
        let (_, rhs_p) = assemble_rhs(&mesh, &dm, params(0, 1.0), &problem, &mu).unwrap();
        let mut touches_vertical = vec![false; mesh.n_cells()];
        for f in mesh.facets.iter().filter(|f| f.is_dirichlet()) {
            touches_vertical[f.plus_cell] = true;
        }
        for t in 0..mesh.n_cells() {
            if touches_vertical[t] {
                assert!(rhs_p[t].abs() > 1e-6, "cell {t} should carry boundary flux");
            } else {
                assert_eq!(rhs_p[t], 0.0);
            }
        }
    }

    #[test]
    fn pressure_mass_is_cell_areas() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let mp = assemble_pressure_mass(&mesh);
        assert!(mp.iter().all(|&m| (m - 1.0 / 32.0).abs() < 1e-15));
        assert!((mp.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        // q^T Mp q equals the L2 norm of the piecewise constant function,
        // checked by volume quadrature
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen::<f64>()).collect();
        let quad: f64 = (0..mesh.n_cells())
            .map(|t| {
                let b = CellBasis::new(&mesh, t);
                triangle_points_deg4(b.points[0], b.points[1], b.points[2], b.area)
                    .iter()
                    .map(|&(_, w)| w * q[t] * q[t])
                    .sum::<f64>()
            })
            .sum();
        let form: f64 = q.iter().zip(&mp).map(|(qi, mi)| qi * qi * mi).sum();
        assert!((quad - form).abs() < 1e-13);
    }

    #[test]
    fn energy_gram_properties() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let ae = assemble_energy_gram(&mesh, &dm, 1.0, &mu);
        assert_eq!(ae.asymmetry(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let v = random_velocity(dm.n_velocity(), &mut rng);
            let quad = quadratic_form(&ae, &v, &v);
            let norm = energy_norm(&DiscreteVelocity(v.clone()), &mesh, &dm, 1.0, &mu);
            assert!((quad - norm * norm).abs() < 1e-10 * norm * norm);
        }

        // linear in mu
        let mu10: Vec<f64> = mu.iter().map(|m| 10.0 * m).collect();
        let ae10 = assemble_energy_gram(&mesh, &dm, 1.0, &mu10);
        for r in 0..ae.nrows() {
            let (cols, vals) = ae.row(r);
            for (k, &c) in cols.iter().enumerate() {
                assert!((ae10.get(r, c) - 10.0 * vals[k]).abs() <= 1e-13 * vals[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn energy_gram_positive_definite() {
        // smallest eigenvalue of AE via inverse power iteration (solves by
        // unpreconditioned GMRES at this small size)
        use crate::linsolve::{fgmres, IdentityPrecond, KrylovConfig};
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let ae = assemble_energy_gram(&mesh, &dm, 1.0, &mu);
        let n = dm.n_velocity();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut q = random_velocity(n, &mut rng);
        let cfg = KrylovConfig {
            rel_tol: 1e-12,
            max_iters: 2000,
            ..KrylovConfig::default()
        };
        let mut lambda = 0.0;
        for _ in 0..40 {
            let (z, _) = fgmres(&ae, &mut IdentityPrecond, &q, &cfg, None).unwrap();
            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            q = z.iter().map(|x| x / norm).collect();
            let aq = ae.apply(&q);
            lambda = q.iter().zip(&aq).map(|(a, b)| a * b).sum::<f64>();
        }
        assert!(lambda > 1e-6, "smallest AE eigenvalue {lambda} should be positive");
    }

    #[test]
    fn coercivity_and_continuity_sampling() {
        // alpha = 10 property samples for the nonsymmetric variants
        let mesh = generate_unit_square(3, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let ae = assemble_energy_gram(&mesh, &dm, 10.0, &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for theta in [-1, 0] {
            let a = assemble_a(&mesh, &dm, params(theta, 10.0), &mu);
            let mut min_ratio = f64::INFINITY;
            let mut max_cont: f64 = 0.0;
            for _ in 0..200 {
                let u = random_velocity(dm.n_velocity(), &mut rng);
                let v = random_velocity(dm.n_velocity(), &mut rng);
                let uu = quadratic_form(&ae, &u, &u);
                let vv = quadratic_form(&ae, &v, &v);
                min_ratio = min_ratio.min(quadratic_form(&a, &u, &u) / uu);
                max_cont = max_cont.max(quadratic_form(&a, &u, &v).abs() / (uu.sqrt() * vv.sqrt()));
            }
            assert!(min_ratio >= 0.5, "theta={theta}: coercivity ratio {min_ratio}");
            assert!(max_cont <= 2.0, "theta={theta}: continuity ratio {max_cont}");
        }
    }

    #[test]
    fn b_continuity_sampling() {
        // |b(v, q)| <= sqrt(2) / sqrt(2 mu) * ||q|| * |||v||| at alpha = 10, mu = 1
        let mesh = generate_unit_square(3, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu = vec![1.0; mesh.n_cells()];
        let ae = assemble_energy_gram(&mesh, &dm, 10.0, &mu);
        let b = assemble_b(&mesh, &dm);
        let mp = assemble_pressure_mass(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bound = (2.0f64).sqrt() / (2.0f64).sqrt();
        for _ in 0..200 {
            let v = random_velocity(dm.n_velocity(), &mut rng);
            let q: Vec<f64> = (0..dm.n_pressure()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let bv = b.apply(&v);
            let bvq: f64 = q.iter().zip(&bv).map(|(a, c)| a * c).sum();
            let qnorm = q.iter().zip(&mp).map(|(qi, mi)| qi * qi * mi).sum::<f64>().sqrt();
            let vnorm = quadratic_form(&ae, &v, &v).sqrt();
            assert!(bvq.abs() <= bound * qnorm * vnorm * (1.0 + 1e-12));
        }
    }

    #[test]
    fn variable_viscosity_scaling() {
        // with mu scaled by a constant, A scales linearly
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let dm = DofMap::new(&mesh);
        let mu: Vec<f64> = (0..mesh.n_cells()).map(|t| 1.0 + 0.1 * t as f64).collect();
        let mu_scaled: Vec<f64> = mu.iter().map(|m| 3.0 * m).collect();
        let a1 = assemble_a(&mesh, &dm, params(0, 1.0), &mu);
        let a3 = assemble_a(&mesh, &dm, params(0, 1.0), &mu_scaled);
        let scale = a1.max_abs();
        for r in 0..a1.nrows() {
            let (cols, vals) = a1.row(r);
            for (k, &c) in cols.iter().enumerate() {
                assert!((a3.get(r, c) - 3.0 * vals[k]).abs() <= 1e-12 * scale);
            }
        }
    }
}
