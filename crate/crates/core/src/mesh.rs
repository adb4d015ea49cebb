//! Triangular meshes with facet topology.
//!
//! A [`Mesh`] stores counter-clockwise oriented triangles together with a
//! facet (edge) list carrying the orientation data needed by jump/average
//! facet terms: each interior facet has a plus cell `T+` and a minus cell
//! `T-`, and its unit normal points from `T+` into `T-`. Boundary facets
//! store the outward normal of their single incident cell.
//!
//! Structured meshes of the unit square are generated by
//! [`generate_unit_square`]; unstructured meshes (for the obstacle domain)
//! are read by [`import_mesh`] from a small line-oriented ASCII format, see
//! `docs/mesh-format.md`.

use std::collections::HashMap;
use std::path::Path;

use crate::error::Error;

/// Boundary condition kind assigned to a boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Marker distinguishing interior facets from the two boundary kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetMarker {
    Interior,
    DirichletBoundary,
    NeumannBoundary,
}

/// One edge of the triangulation.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Endpoint vertex indices, stored as (min, max).
    pub vertices: [usize; 2],
    pub marker: FacetMarker,
    /// Incident cell `T+` (the lower-indexed incident cell).
    pub plus_cell: usize,
    /// Incident cell `T-`; `None` on the boundary.
    pub minus_cell: Option<usize>,
    /// Unit normal; points from `T+` into `T-` on interior facets and
    /// outward on boundary facets.
    pub normal: [f64; 2],
    pub length: f64,
    /// Penalty length scale; equals `length` in 2D.
    pub h_e: f64,
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        matches!(self.marker, FacetMarker::Interior)
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.marker, FacetMarker::DirichletBoundary)
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self.marker, FacetMarker::NeumannBoundary)
    }
}

/// Classifier assigning a boundary kind to each boundary facet by its
/// midpoint. Coordinate comparisons inside rules should use a 1e-12
/// tolerance; the axis-aligned helpers below do.
pub struct BoundarySpec {
    rule: Box<dyn Fn(f64, f64) -> BoundaryKind + Send + Sync>,
}

/// Tolerance for midpoint coordinate comparisons in boundary rules.
pub const BOUNDARY_TOL: f64 = 1e-12;

impl BoundarySpec {
    pub fn new(rule: impl Fn(f64, f64) -> BoundaryKind + Send + Sync + 'static) -> Self {
        Self { rule: Box::new(rule) }
    }

    pub fn all_dirichlet() -> Self {
        Self::new(|_, _| BoundaryKind::Dirichlet)
    }

    pub fn all_neumann() -> Self {
        Self::new(|_, _| BoundaryKind::Neumann)
    }

    /// Dirichlet on the vertical sides x = 0 and x = 1 of the unit square,
    /// Neumann on the horizontal sides.
    pub fn dirichlet_vertical_sides() -> Self {
        Self::new(|x, _| {
            if x.abs() < BOUNDARY_TOL || (x - 1.0).abs() < BOUNDARY_TOL {
                BoundaryKind::Dirichlet
            } else {
                BoundaryKind::Neumann
            }
        })
    }

    pub fn classify(&self, x: f64, y: f64) -> BoundaryKind {
        (self.rule)(x, y)
    }
}

/// Immutable triangulation with facet topology. Construction validates the
/// orientation and manifoldness invariants; afterwards the mesh is safe to
/// share across threads.
#[derive(Debug)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub facets: Vec<Facet>,
    pub cell_areas: Vec<f64>,
    pub cell_centroids: Vec<[f64; 2]>,
}

impl Mesh {
    /// Builds a mesh from vertices and CCW cells, constructing the facet
    /// topology. Cells with nonpositive signed area are rejected.
    pub fn from_cells(
        vertices: Vec<[f64; 2]>,
        cells: Vec<[usize; 3]>,
        bc: &BoundarySpec,
    ) -> Result<Self, Error> {
        for (t, cell) in cells.iter().enumerate() {
            if signed_area(&vertices, cell) <= 0.0 {
                return Err(Error::DegenerateCell { cell: t });
            }
        }
        let cell_areas: Vec<f64> = cells.iter().map(|c| signed_area(&vertices, c)).collect();
        let cell_centroids: Vec<[f64; 2]> = cells.iter().map(|c| centroid(&vertices, c)).collect();
        let facets = build_facets(&vertices, &cells, bc)?;
        Ok(Self {
            dim: 2,
            vertices,
            cells,
            facets,
            cell_areas,
            cell_centroids,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cell_areas.iter().sum()
    }

    /// V - E + C; 1 for a simply connected planar mesh, 0 with one hole.
    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices() as isize - self.facets.len() as isize + self.n_cells() as isize
    }

    pub fn dirichlet_facet_count(&self) -> usize {
        self.facets.iter().filter(|f| f.is_dirichlet()).count()
    }

    pub fn neumann_facet_count(&self) -> usize {
        self.facets.iter().filter(|f| f.is_neumann()).count()
    }

    pub fn interior_facet_count(&self) -> usize {
        self.facets.iter().filter(|f| f.is_interior()).count()
    }

    pub fn facet_midpoint(&self, facet: &Facet) -> [f64; 2] {
        let a = self.vertices[facet.vertices[0]];
        let b = self.vertices[facet.vertices[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Locates the cell containing the point, if any (barycentric test with
    /// a small tolerance; linear scan).
    pub fn locate_cell(&self, x: f64, y: f64) -> Option<usize> {
        for t in 0..self.n_cells() {
            let l = self.barycentric(t, x, y);
            if l.iter().all(|&li| li >= -1e-12) {
                return Some(t);
            }
        }
        None
    }

    /// Barycentric coordinates of (x, y) with respect to cell `t`.
    pub fn barycentric(&self, t: usize, x: f64, y: f64) -> [f64; 3] {
        let [a, b, c] = self.cells[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        let area2 = 2.0 * self.cell_areas[t];
        let l0 = cross_from(pb, pc, [x, y]) / area2;
        let l1 = cross_from(pc, pa, [x, y]) / area2;
        let l2 = cross_from(pa, pb, [x, y]) / area2;
        [l0, l1, l2]
    }
}

fn cross_from(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

fn signed_area(vertices: &[[f64; 2]], cell: &[usize; 3]) -> f64 {
    let p0 = vertices[cell[0]];
    let p1 = vertices[cell[1]];
    let p2 = vertices[cell[2]];
    0.5 * cross_from(p0, p1, p2)
}

fn centroid(vertices: &[[f64; 2]], cell: &[usize; 3]) -> [f64; 2] {
    let p0 = vertices[cell[0]];
    let p1 = vertices[cell[1]];
    let p2 = vertices[cell[2]];
    [
        (p0[0] + p1[0] + p2[0]) / 3.0,
        (p0[1] + p1[1] + p2[1]) / 3.0,
    ]
}

/// Generates the structured triangulation of the unit square at refinement
/// level `level`: a 2^L x 2^L grid of squares, each split along the diagonal
/// of positive slope. Mesh size is h = 2^-L.
pub fn generate_unit_square(level: u32, bc: &BoundarySpec) -> Result<Mesh, Error> {
    assert!(level >= 1, "refinement level must be at least 1");
    let n = 1usize << level;
    let np = n + 1;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let vid = |i: usize, j: usize| j * np + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let ll = vid(i, j);
            let lr = vid(i + 1, j);
            let ur = vid(i + 1, j + 1);
            let ul = vid(i, j + 1);
            // diagonal from lower-left to upper-right
            cells.push([ll, lr, ur]);
            cells.push([ll, ur, ul]);
        }
    }
    Mesh::from_cells(vertices, cells, bc)
}

/// Builds the facet list from CCW cells. `T+` is the lower-indexed incident
/// cell; the stored normal points from `T+` to `T-` (outward on the
/// boundary). Edges shared by more than two cells are rejected.
pub fn build_facets(
    vertices: &[[f64; 2]],
    cells: &[[usize; 3]],
    bc: &BoundarySpec,
) -> Result<Vec<Facet>, Error> {
    struct Incidence {
        vertices: [usize; 2],
        cells: Vec<usize>,
    }

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut incidences: Vec<Incidence> = Vec::new();
    for (t, cell) in cells.iter().enumerate() {
        for k in 0..3 {
            let a = cell[k];
            let b = cell[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                Some(&f) => {
                    incidences[f].cells.push(t);
                    if incidences[f].cells.len() > 2 {
                        return Err(Error::NonManifoldEdge { v0: key.0, v1: key.1 });
                    }
                }
                None => {
                    index.insert(key, incidences.len());
                    incidences.push(Incidence {
                        vertices: [key.0, key.1],
                        cells: vec![t],
                    });
                }
            }
        }
    }

    let mut facets = Vec::with_capacity(incidences.len());
    for inc in &incidences {
        let pa = vertices[inc.vertices[0]];
        let pb = vertices[inc.vertices[1]];
        let tang = [pb[0] - pa[0], pb[1] - pa[1]];
        let length = (tang[0] * tang[0] + tang[1] * tang[1]).sqrt();
        let mut normal = [tang[1] / length, -tang[0] / length];
        let plus_cell = inc.cells[0];
        let plus_centroid = centroid(vertices, &cells[plus_cell]);
        let (marker, minus_cell) = if inc.cells.len() == 2 {
            let minus = inc.cells[1];
            let minus_centroid = centroid(vertices, &cells[minus]);
            let d = [
                minus_centroid[0] - plus_centroid[0],
                minus_centroid[1] - plus_centroid[1],
            ];
            if normal[0] * d[0] + normal[1] * d[1] < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            (FacetMarker::Interior, Some(minus))
        } else {
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let d = [mid[0] - plus_centroid[0], mid[1] - plus_centroid[1]];
            if normal[0] * d[0] + normal[1] * d[1] < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            let kind = match bc.classify(mid[0], mid[1]) {
                BoundaryKind::Dirichlet => FacetMarker::DirichletBoundary,
                BoundaryKind::Neumann => FacetMarker::NeumannBoundary,
            };
            (kind, None)
        };
        facets.push(Facet {
            vertices: inc.vertices,
            marker,
            plus_cell,
            minus_cell,
            normal,
            length,
            h_e: length,
        });
    }
    Ok(facets)
}

/// Reads a mesh from the line-oriented ASCII format described in
/// `docs/mesh-format.md`. Clockwise cells are flipped; an optional
/// `area` line is checked against the summed cell areas; optional
/// `boundary_markers` lines override the classifier per boundary edge.
pub fn import_mesh(path: impl AsRef<Path>, bc: &BoundarySpec) -> Result<Mesh, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, bc)
}

/// Parses mesh file contents; see [`import_mesh`].
pub fn parse_mesh(text: &str, bc: &BoundarySpec) -> Result<Mesh, Error> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut cursor = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str), Error> {
        let item = lines.get(cursor).copied().ok_or_else(|| Error::MeshParse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        });
        cursor += 1;
        item
    };

    let mut declared_area: Option<f64> = None;
    let mut header = next("vertices header")?;
    if let Some(rest) = header.1.strip_prefix("area") {
        declared_area = Some(parse_f64(rest.trim(), header.0)?);
        header = next("vertices header")?;
    }

    let n_vertices = parse_count(header.1, "vertices", header.0)?;
    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (ln, l) = next("vertex coordinates")?;
        let mut it = l.split_whitespace();
        let x = parse_f64(it.next().unwrap_or(""), ln)?;
        let y = parse_f64(it.next().unwrap_or(""), ln)?;
        vertices.push([x, y]);
    }

    let (ln, l) = next("cells header")?;
    let n_cells = parse_count(l, "cells", ln)?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (ln, l) = next("cell indices")?;
        let mut it = l.split_whitespace();
        let mut idx = [0usize; 3];
        for v in idx.iter_mut() {
            *v = parse_index(it.next().unwrap_or(""), ln)?;
            if *v >= n_vertices {
                return Err(Error::MeshParse {
                    line: ln,
                    msg: format!("vertex index {v} out of range (mesh has {n_vertices} vertices)"),
                });
            }
        }
        cells.push(idx);
    }

    let mut overrides: HashMap<(usize, usize), BoundaryKind> = HashMap::new();
    if let Ok((ln, l)) = next("end of file") {
        let n_markers = parse_count(l, "boundary_markers", ln)?;
        for _ in 0..n_markers {
            let (ln, l) = next("boundary marker")?;
            let mut it = l.split_whitespace();
            let i = parse_index(it.next().unwrap_or(""), ln)?;
            let j = parse_index(it.next().unwrap_or(""), ln)?;
            let kind = match it.next() {
                Some("D") => BoundaryKind::Dirichlet,
                Some("N") => BoundaryKind::Neumann,
                other => {
                    return Err(Error::MeshParse {
                        line: ln,
                        msg: format!("expected marker D or N, found {other:?}"),
                    })
                }
            };
            overrides.insert((i.min(j), i.max(j)), kind);
        }
    }

    // flip clockwise cells; reject cells that stay degenerate
    for (t, cell) in cells.iter_mut().enumerate() {
        if signed_area(&vertices, cell) < 0.0 {
            cell.swap(1, 2);
        }
        if signed_area(&vertices, cell) <= 0.0 {
            return Err(Error::DegenerateCell { cell: t });
        }
    }

    let mut mesh = Mesh::from_cells(vertices, cells, bc)?;

    for facet in mesh.facets.iter_mut() {
        if let Some(kind) = overrides.remove(&(facet.vertices[0], facet.vertices[1])) {
            if facet.is_interior() {
                return Err(Error::MarkerNotBoundary {
                    v0: facet.vertices[0],
                    v1: facet.vertices[1],
                });
            }
            facet.marker = match kind {
                BoundaryKind::Dirichlet => FacetMarker::DirichletBoundary,
                BoundaryKind::Neumann => FacetMarker::NeumannBoundary,
            };
        }
    }
    if let Some((&(v0, v1), _)) = overrides.iter().next() {
        return Err(Error::MarkerNotBoundary { v0, v1 });
    }

    if let Some(declared) = declared_area {
        let computed = mesh.total_area();
        if (computed - declared).abs() > 1e-9 * declared.abs().max(1.0) {
            return Err(Error::AreaMismatch { computed, declared });
        }
    }
    Ok(mesh)
}

fn parse_count(line: &str, keyword: &str, line_no: usize) -> Result<usize, Error> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next()) {
        (Some(k), Some(n)) if k == keyword => parse_index(n, line_no),
        _ => Err(Error::MeshParse {
            line: line_no,
            msg: format!("expected `{keyword} N`, found `{line}`"),
        }),
    }
}

fn parse_index(tok: &str, line_no: usize) -> Result<usize, Error> {
    tok.parse().map_err(|_| Error::MeshParse {
        line: line_no,
        msg: format!("expected nonnegative integer, found `{tok}`"),
    })
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64, Error> {
    tok.parse().map_err(|_| Error::MeshParse {
        line: line_no,
        msg: format!("expected number, found `{tok}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_two_cells() -> &'static str {
        "# unit square, two triangles\n\
         vertices 4\n\
         0 0\n\
         1 0\n\
         1 1\n\
         0 1\n\
         cells 2\n\
         0 1 2\n\
         0 2 3\n"
    }

    #[test]
    fn structured_counts_level_2() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        assert_eq!(mesh.n_vertices(), 25);
        assert_eq!(mesh.n_cells(), 32);
        assert_eq!(mesh.facets.len(), 56);
        assert_eq!(mesh.euler_characteristic(), 1);
        // facet census: 16 boundary, 40 interior
        assert_eq!(mesh.facets.len() - mesh.interior_facet_count(), 16);
        assert_eq!(mesh.interior_facet_count(), 40);
    }

    #[test]
    fn structured_counts_level_3_brute_force() {
        // independent census: enumerate the edges of the structured grid
        let n = 8usize;
        let mut edges = std::collections::HashSet::new();
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        for j in 0..n {
            for i in 0..n {
                let (ll, lr, ur, ul) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                for (a, b) in [(ll, lr), (lr, ur), (ll, ur), (ur, ul), (ul, ll)] {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        assert_eq!(edges.len(), 208);

        let mesh = generate_unit_square(3, &BoundarySpec::all_dirichlet()).unwrap();
        assert_eq!(mesh.n_vertices(), 81);
        assert_eq!(mesh.n_cells(), 128);
        assert_eq!(mesh.facets.len(), 208);
        assert_eq!(mesh.facets.len() - mesh.interior_facet_count(), 32);
        assert_eq!(mesh.interior_facet_count(), 176);
    }

    #[test]
    fn structured_geometry_invariants() {
        for level in [1u32, 2, 3, 4] {
            let mesh = generate_unit_square(level, &BoundarySpec::all_dirichlet()).unwrap();
            assert!((mesh.total_area() - 1.0).abs() < 1e-12);
            // uniformity: min/max cell area ratio exactly 1
            let min = mesh.cell_areas.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = mesh.cell_areas.iter().cloned().fold(0.0, f64::max);
            assert_eq!(min, max);
            for f in &mesh.facets {
                let n = f.normal;
                assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-14);
                assert_eq!(f.h_e, f.length);
                assert_eq!(f.is_interior(), f.minus_cell.is_some());
                if let Some(minus) = f.minus_cell {
                    let cp = mesh.cell_centroids[f.plus_cell];
                    let cm = mesh.cell_centroids[minus];
                    let dot = n[0] * (cm[0] - cp[0]) + n[1] * (cm[1] - cp[1]);
                    assert!(dot > 0.0, "interior normal must point from T+ to T-");
                    assert!(f.plus_cell < minus, "T+ is the lower-indexed cell");
                }
            }
            // closed boundary: sum of length-weighted outward normals vanishes
            let mut sum = [0.0f64; 2];
            for f in mesh.facets.iter().filter(|f| !f.is_interior()) {
                sum[0] += f.length * f.normal[0];
                sum[1] += f.length * f.normal[1];
            }
            assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_facet_on_bottom_has_downward_normal() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let f = mesh
            .facets
            .iter()
            .find(|f| !f.is_interior() && mesh.facet_midpoint(f)[1].abs() < 1e-14)
            .unwrap();
        assert!((f.normal[0]).abs() < 1e-14);
        assert!((f.normal[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_boundary_markers() {
        let mesh = generate_unit_square(2, &BoundarySpec::dirichlet_vertical_sides()).unwrap();
        assert_eq!(mesh.dirichlet_facet_count(), 8);
        assert_eq!(mesh.neumann_facet_count(), 8);
        for f in mesh.facets.iter().filter(|f| f.is_dirichlet()) {
            let m = mesh.facet_midpoint(f);
            assert!(m[0].abs() < 1e-12 || (m[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn import_two_triangle_square() {
        let mesh = parse_mesh(unit_square_two_cells(), &BoundarySpec::all_dirichlet()).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_cells(), 2);
        assert_eq!(mesh.facets.len(), 5);
        assert_eq!(mesh.interior_facet_count(), 1);
        assert!((mesh.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn import_flips_clockwise_cells() {
        let text = "vertices 3\n0 0\n1 0\n0 1\ncells 1\n0 2 1\n";
        let mesh = parse_mesh(text, &BoundarySpec::all_dirichlet()).unwrap();
        assert!(mesh.cell_areas[0] > 0.0);
    }

    #[test]
    fn import_rejects_nonmanifold_edge() {
        // three cells sharing the edge (0, 1)
        let nm = "vertices 5\n0 0\n1 0\n0 1\n0 -1\n0.5 0.5\ncells 3\n0 1 2\n0 3 1\n0 1 4\n";
        match parse_mesh(nm, &BoundarySpec::all_dirichlet()) {
            Err(Error::NonManifoldEdge { v0: 0, v1: 1 }) => {}
            other => panic!("expected non-manifold error, got {other:?}"),
        }
    }

    #[test]
    fn import_rejects_degenerate_cell() {
        let text = "vertices 3\n0 0\n1 0\n2 0\ncells 1\n0 1 2\n";
        match parse_mesh(text, &BoundarySpec::all_dirichlet()) {
            Err(Error::DegenerateCell { cell: 0 }) => {}
            other => panic!("expected degenerate-cell error, got {other:?}"),
        }
    }

    #[test]
    fn import_checks_declared_area() {
        let good = format!("area 1.0\n{}", unit_square_two_cells());
        assert!(parse_mesh(&good, &BoundarySpec::all_dirichlet()).is_ok());
        let bad = format!("area 0.5\n{}", unit_square_two_cells());
        match parse_mesh(&bad, &BoundarySpec::all_dirichlet()) {
            Err(Error::AreaMismatch { .. }) => {}
            other => panic!("expected area mismatch, got {other:?}"),
        }
    }

    #[test]
    fn boundary_marker_overrides() {
        let text = format!("{}boundary_markers 1\n0 1 N\n", unit_square_two_cells());
        let mesh = parse_mesh(&text, &BoundarySpec::all_dirichlet()).unwrap();
        assert_eq!(mesh.neumann_facet_count(), 1);
        assert_eq!(mesh.dirichlet_facet_count(), 3);
        let interior = format!("{}boundary_markers 1\n0 2 N\n", unit_square_two_cells());
        match parse_mesh(&interior, &BoundarySpec::all_dirichlet()) {
            Err(Error::MarkerNotBoundary { v0: 0, v1: 2 }) => {}
            other => panic!("expected marker-not-boundary, got {other:?}"),
        }
    }

    #[test]
    fn interior_normal_convention_two_triangles() {
        // two triangles sharing the diagonal (0,0)-(1,1): normal points from
        // cell 0 toward cell 1
        let mesh = parse_mesh(
            "vertices 4\n0 0\n1 0\n1 1\n0 1\ncells 2\n0 1 2\n0 2 3\n",
            &BoundarySpec::all_dirichlet(),
        )
        .unwrap();
        let f = mesh.facets.iter().find(|f| f.is_interior()).unwrap();
        assert_eq!(f.vertices, [0, 2]);
        assert_eq!(f.plus_cell, 0);
        assert_eq!(f.minus_cell, Some(1));
        let cp = mesh.cell_centroids[0];
        let cm = mesh.cell_centroids[1];
        let dot = f.normal[0] * (cm[0] - cp[0]) + f.normal[1] * (cm[1] - cp[1]);
        assert!(dot > 0.0);
    }

    #[test]
    fn locate_cell_finds_containing_cell() {
        let mesh = generate_unit_square(2, &BoundarySpec::all_dirichlet()).unwrap();
        let t = mesh.locate_cell(0.3, 0.7).unwrap();
        let l = mesh.barycentric(t, 0.3, 0.7);
        assert!(l.iter().all(|&li| li >= -1e-12));
        assert!(mesh.locate_cell(1.5, 0.5).is_none());
    }
}
