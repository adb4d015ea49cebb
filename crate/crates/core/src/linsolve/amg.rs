//! Smoothed-aggregation algebraic multigrid.
//!
//! Setup builds a hierarchy by greedy aggregation on the strength graph,
//! a tentative prolongation spanning the given near-null-space modes
//! (locally orthonormalized per aggregate), one damped-Jacobi prolongation
//! smoothing step, and Galerkin coarse operators, down to a dense direct
//! solve. For scalar problems the near-null space is the constant vector;
//! vector problems (the continuous elasticity-like velocity block) supply
//! their rigid-body modes and a DOF-to-node map so that aggregation acts on
//! nodes rather than on individual components. One V-cycle with symmetric
//! damped-Jacobi smoothing is a fixed linear SPD operation, so it can serve
//! as a preconditioner block.

use nalgebra::DVector;

use crate::error::Error;
use crate::linsolve::CsrMatrix;

#[derive(Debug, Clone)]
pub struct AmgConfig {
    /// Strength-of-connection threshold.
    pub strength_threshold: f64,
    /// Damping of the prolongation-smoothing Jacobi step.
    pub prolongation_damping: f64,
    /// Damping of the pre/post smoothing sweeps.
    pub smoother_damping: f64,
    /// Pre- and post-smoothing sweeps per level.
    pub smoother_sweeps: usize,
    /// Coarsest-level size threshold for the dense direct solve.
    pub coarse_size: usize,
    pub max_levels: usize,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self {
            strength_threshold: 0.08,
            prolongation_damping: 2.0 / 3.0,
            smoother_damping: 2.0 / 3.0,
            smoother_sweeps: 1,
            coarse_size: 200,
            max_levels: 25,
        }
    }
}

struct AmgLevel {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    prolongation: CsrMatrix,
    restriction: CsrMatrix,
    n_aggregates: usize,
}

/// Multigrid hierarchy produced by [`amg_setup`] /
/// [`amg_setup_near_null`].
pub struct AmgHierarchy {
    levels: Vec<AmgLevel>,
    coarse_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    coarse_dim: usize,
    config: AmgConfig,
}

impl AmgHierarchy {
    /// Unknown counts per level, finest first (including the coarsest).
    pub fn level_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.levels.iter().map(|l| l.a.nrows()).collect();
        dims.push(self.coarse_dim);
        dims
    }

    /// Aggregate counts produced on each coarsening step.
    pub fn aggregate_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.n_aggregates).collect()
    }
}

/// Builds the SA-AMG hierarchy for a symmetric positive definite matrix
/// with the constant vector as near-null space (scalar problems).
pub fn amg_setup(a: &CsrMatrix, config: &AmgConfig) -> Result<AmgHierarchy, Error> {
    let node_of_dof: Vec<usize> = (0..a.nrows()).collect();
    amg_setup_near_null(a, config, &node_of_dof, &[vec![1.0; a.nrows()]])
}

/// Builds the hierarchy with explicit near-null-space modes. `node_of_dof`
/// groups DOFs into nodes for aggregation (e.g. the two velocity components
/// of one mesh vertex); `modes` are the near-null vectors on the fine level.
pub fn amg_setup_near_null(
    a: &CsrMatrix,
    config: &AmgConfig,
    node_of_dof: &[usize],
    modes: &[Vec<f64>],
) -> Result<AmgHierarchy, Error> {
    assert_eq!(a.nrows(), a.ncols());
    assert!(!modes.is_empty());
    let mut levels = Vec::new();
    let mut current = a.clone();
    let mut node_map: Vec<usize> = node_of_dof.to_vec();
    let mut null_space: Vec<Vec<f64>> = modes.to_vec();

    loop {
        let n = current.nrows();
        if n <= config.coarse_size || levels.len() + 1 >= config.max_levels {
            break;
        }
        if let Some(&row) = current.empty_rows().first() {
            return Err(Error::AmgSetup(format!("row {row} has no entries")));
        }
        let diag = current.diagonal();
        if let Some(row) = diag.iter().position(|&d| d <= 0.0) {
            return Err(Error::AmgSetup(format!(
                "nonpositive diagonal {} in row {row}",
                diag[row]
            )));
        }

        let n_nodes = node_map.iter().max().map_or(0, |m| m + 1);
        let agg_of_node = aggregate_nodes(&current, &node_map, n_nodes, config.strength_threshold);
        let n_agg = agg_of_node.iter().max().map_or(0, |m| m + 1);
        if n_agg >= n_nodes {
            if n <= 2000 {
                break;
            }
            return Err(Error::AmgSetup(format!(
                "aggregation stagnated at {n} unknowns"
            )));
        }

        let (p_hat, coarse_node_map, coarse_null) =
            tentative_prolongation(n, &node_map, &agg_of_node, n_agg, &null_space);

        // one damped-Jacobi smoothing step: P = (I - omega D^-1 A) P_hat
        let ap = current.matmul(&p_hat);
        let mut smoothed: Vec<(usize, usize, f64)> = Vec::with_capacity(p_hat.nnz() + ap.nnz());
        for i in 0..n {
            let (cols, vals) = p_hat.row(i);
            for (k, &c) in cols.iter().enumerate() {
                smoothed.push((i, c, vals[k]));
            }
            let scale = config.prolongation_damping / diag[i];
            let (cols, vals) = ap.row(i);
            for (k, &c) in cols.iter().enumerate() {
                smoothed.push((i, c, -scale * vals[k]));
            }
        }
        let prolongation = CsrMatrix::from_triplets(n, p_hat.ncols(), &smoothed);
        let restriction = prolongation.transpose();
        let coarse = restriction.matmul(&current.matmul(&prolongation));

        levels.push(AmgLevel {
            inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
            a: current,
            prolongation,
            restriction,
            n_aggregates: n_agg,
        });
        current = coarse;
        node_map = coarse_node_map;
        null_space = coarse_null;
    }

    let coarse_dim = current.nrows();
    let dense = current.to_dense();
    let coarse_lu = dense.lu();
    Ok(AmgHierarchy {
        levels,
        coarse_lu,
        coarse_dim,
        config: config.clone(),
    })
}

/// Builds the tentative prolongation whose columns span the near-null-space
/// modes restricted to each aggregate, orthonormalized per aggregate
/// (modified Gram-Schmidt; modes that become linearly dependent on an
/// aggregate are dropped there). Returns the prolongation, the coarse
/// DOF-to-node map and the coarse near-null-space modes.
#[allow(clippy::type_complexity)]
fn tentative_prolongation(
    n: usize,
    node_map: &[usize],
    agg_of_node: &[usize],
    n_agg: usize,
    null_space: &[Vec<f64>],
) -> (CsrMatrix, Vec<usize>, Vec<Vec<f64>>) {
    let k = null_space.len();
    let mut agg_dofs: Vec<Vec<usize>> = vec![Vec::new(); n_agg];
    for dof in 0..n {
        agg_dofs[agg_of_node[node_map[dof]]].push(dof);
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut coarse_node_map: Vec<usize> = Vec::new();
    // coarse modes column-major; filled per aggregate at its offset
    let mut coarse_cols: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut offset = 0usize;

    for (agg, dofs) in agg_dofs.iter().enumerate() {
        let rows = dofs.len();
        // local mode block, column-major
        let mut local: Vec<Vec<f64>> = (0..k)
            .map(|m| dofs.iter().map(|&d| null_space[m][d]).collect())
            .collect();
        // modified Gram-Schmidt with column pivots into the R factor
        let mut r = vec![vec![0.0; k]; k]; // r[q][m]: coefficient of kept column q in mode m
        let mut kept: Vec<Vec<f64>> = Vec::new();
        let mut kept_of: Vec<usize> = Vec::new();
        for m in 0..k {
            let mut col = local[m].clone();
            for (q, basis) in kept.iter().enumerate() {
                let proj: f64 = col.iter().zip(basis).map(|(a, b)| a * b).sum();
                r[q][m] = proj;
                for (c, b) in col.iter_mut().zip(basis) {
                    *c -= proj * b;
                }
            }
            let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale: f64 = local[m].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-10 * scale.max(1e-300) && rows > kept.len() {
                for c in col.iter_mut() {
                    *c /= norm;
                }
                r[kept.len()][m] = norm;
                kept.push(col);
                kept_of.push(m);
            }
        }
        let _ = &mut local;
        let width = kept.len().max(1);
        if kept.is_empty() {
            // degenerate aggregate (all modes vanish); inject the first dof
            triplets.push((dofs[0], offset, 1.0));
            for col in coarse_cols.iter_mut() {
                col.push(0.0);
            }
            coarse_node_map.push(agg);
            offset += 1;
            continue;
        }
        for (q, basis) in kept.iter().enumerate() {
            for (row_local, &dof) in dofs.iter().enumerate() {
                if basis[row_local] != 0.0 {
                    triplets.push((dof, offset + q, basis[row_local]));
                }
            }
        }
        for m in 0..k {
            for q in 0..width {
                coarse_cols[m].push(r[q][m]);
            }
        }
        for _ in 0..width {
            coarse_node_map.push(agg);
        }
        offset += width;
    }

    let p_hat = CsrMatrix::from_triplets(n, offset, &triplets);
    (p_hat, coarse_node_map, coarse_cols)
}

/// Greedy aggregation on the nodal strength graph. Node strength is the
/// Frobenius norm of the coupling block between two nodes, thresholded
/// against the geometric mean of the nodal diagonal blocks.
fn aggregate_nodes(
    a: &CsrMatrix,
    node_map: &[usize],
    n_nodes: usize,
    threshold: f64,
) -> Vec<usize> {
    use std::collections::HashMap;
    let mut weights: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n_nodes];
    let mut diag = vec![0.0f64; n_nodes];
    for i in 0..a.nrows() {
        let ni = node_map[i];
        let (cols, vals) = a.row(i);
        for (k, &j) in cols.iter().enumerate() {
            let nj = node_map[j];
            let w = vals[k] * vals[k];
            if ni == nj {
                diag[ni] += w;
            } else {
                *weights[ni].entry(nj).or_insert(0.0) += w;
            }
        }
    }

    // strong coupling: ||A_ij||_F >= threshold * sqrt(||A_ii||_F ||A_jj||_F)
    let strong: Vec<Vec<usize>> = (0..n_nodes)
        .map(|i| {
            let mut s: Vec<usize> = weights[i]
                .iter()
                .filter(|&(&j, &w)| w.sqrt() >= threshold * (diag[i] * diag[j]).powf(0.25))
                .map(|(&j, _)| j)
                .collect();
            s.sort_unstable();
            s
        })
        .collect();

    const UNASSIGNED: usize = usize::MAX;
    let mut agg = vec![UNASSIGNED; n_nodes];
    let mut n_agg = 0;

    // pass 1: seed aggregates from nodes whose strong neighborhood is free
    for i in 0..n_nodes {
        if agg[i] != UNASSIGNED {
            continue;
        }
        if strong[i].iter().all(|&j| agg[j] == UNASSIGNED) {
            agg[i] = n_agg;
            for &j in &strong[i] {
                agg[j] = n_agg;
            }
            n_agg += 1;
        }
    }

    // pass 2: attach leftovers to the most strongly coupled aggregate
    let snapshot = agg.clone();
    for i in 0..n_nodes {
        if agg[i] != UNASSIGNED {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &strong[i] {
            if snapshot[j] != UNASSIGNED {
                let w = weights[i][&j];
                if best.map_or(true, |(bw, _)| w > bw) {
                    best = Some((w, snapshot[j]));
                }
            }
        }
        if let Some((_, g)) = best {
            agg[i] = g;
        }
    }

    // pass 3: remaining nodes seed new aggregates with their free neighbors
    for i in 0..n_nodes {
        if agg[i] != UNASSIGNED {
            continue;
        }
        agg[i] = n_agg;
        for &j in &strong[i] {
            if agg[j] == UNASSIGNED {
                agg[j] = n_agg;
            }
        }
        n_agg += 1;
    }

    agg
}

/// One V-cycle applied to a residual (zero initial guess); linear and
/// symmetric in `r`.
pub fn amg_vcycle(hierarchy: &AmgHierarchy, r: &[f64]) -> Vec<f64> {
    cycle(hierarchy, 0, r)
}

fn cycle(h: &AmgHierarchy, level: usize, r: &[f64]) -> Vec<f64> {
    if level == h.levels.len() {
        let sol = h
            .coarse_lu
            .solve(&DVector::from_column_slice(r))
            .unwrap_or_else(|| DVector::zeros(r.len()));
        return sol.data.into();
    }
    let lvl = &h.levels[level];
    let n = lvl.a.nrows();
    let omega = h.config.smoother_damping;
    let mut x = vec![0.0; n];
    let mut work = vec![0.0; n];

    for sweep in 0..h.config.smoother_sweeps {
        if sweep == 0 {
            for i in 0..n {
                x[i] = omega * lvl.inv_diag[i] * r[i];
            }
        } else {
            lvl.a.matvec(&x, &mut work);
            for i in 0..n {
                x[i] += omega * lvl.inv_diag[i] * (r[i] - work[i]);
            }
        }
    }

    lvl.a.matvec(&x, &mut work);
    let residual: Vec<f64> = r.iter().zip(&work).map(|(ri, ai)| ri - ai).collect();
    let coarse_r = lvl.restriction.apply(&residual);
    let coarse_x = cycle(h, level + 1, &coarse_r);
    lvl.prolongation.matvec_add(&coarse_x, &mut x);

    for _ in 0..h.config.smoother_sweeps {
        lvl.a.matvec(&x, &mut work);
        for i in 0..n {
            x[i] += omega * lvl.inv_diag[i] * (r[i] - work[i]);
        }
    }
    x
}
