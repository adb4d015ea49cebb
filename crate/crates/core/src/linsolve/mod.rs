//! Sparse linear algebra kernels: CSR storage, flexible GMRES, damped
//! Jacobi smoothing, smoothed-aggregation AMG and the pressure mean-zero
//! projection.
//!
//! The Krylov driver is the right-preconditioned *flexible* GMRES variant:
//! the preconditioner may change between iterations, which is required here
//! because block preconditioners contain inner iterative solves. For
//! pure-Dirichlet problems the saddle matrix has the constant-pressure null
//! space; it is removed by projecting the pressure component of the initial
//! residual and of every preconditioned vector, which keeps the matrix
//! itself unmodified.

mod amg;
mod csr;

pub use amg::{amg_setup, amg_setup_near_null, amg_vcycle, AmgConfig, AmgHierarchy};
pub use csr::{quadratic_form, CsrMatrix};

use std::time::{Duration, Instant};

use crate::error::Error;

/// Something that can be applied as a square linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_to(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// Right preconditioner for [`fgmres`]. Takes `&mut self` so implementations
/// can accumulate inner-solve statistics; application may fail when an inner
/// solve does not converge.
pub trait Preconditioner {
    fn apply(&mut self, r: &[f64]) -> Result<Vec<f64>, Error>;
}

/// No-op preconditioner.
pub struct IdentityPrecond;

impl Preconditioner for IdentityPrecond {
    fn apply(&mut self, r: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(r.to_vec())
    }
}

/// Stopping parameters for Krylov solves.
#[derive(Debug, Clone)]
pub struct KrylovConfig {
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Restart length; `None` runs the full (non-restarted) method.
    pub restart: Option<usize>,
    pub record_history: bool,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iters: 1000,
            restart: None,
            record_history: true,
        }
    }
}

impl KrylovConfig {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The Arnoldi least-squares problem became degenerate.
    Breakdown,
    NanResidual,
}

/// Outcome of one Krylov solve.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub iterations: usize,
    pub status: SolveStatus,
    /// Relative-residual estimates per iteration, starting at 1.
    pub history: Vec<f64>,
    /// True relative residual of the returned iterate.
    pub final_residual: f64,
    pub wall_time: Duration,
    /// Preconditioner label (filled by callers).
    pub label: String,
    /// Cumulative inner iterations spent inside the preconditioner.
    pub inner_iterations: usize,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Removes the weighted mean of a contiguous sub-vector in place; used to
/// project the constant-pressure null space out of residuals and
/// preconditioned vectors.
pub struct MeanZeroProjection {
    weights: Vec<f64>,
    offset: usize,
    total_weight: f64,
}

impl MeanZeroProjection {
    /// `weights` are the diagonal pressure mass entries; `offset` is where
    /// the pressure block starts within the projected vectors.
    pub fn new(weights: &[f64], offset: usize) -> Self {
        Self {
            weights: weights.to_vec(),
            offset,
            total_weight: weights.iter().sum(),
        }
    }

    pub fn project(&self, v: &mut [f64]) {
        let mut mean = 0.0;
        for (w, x) in self.weights.iter().zip(&v[self.offset..]) {
            mean += w * x;
        }
        mean /= self.total_weight;
        for x in v[self.offset..].iter_mut() {
            *x -= mean;
        }
    }
}

/// Subtracts the weighted mean from a pressure vector: afterwards
/// `sum_T p_T |T| = 0`. Idempotent.
pub fn project_mean_zero(p: &mut [f64], mp: &[f64]) {
    MeanZeroProjection::new(mp, 0).project(p);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned flexible GMRES. Returns the first iterate whose
/// relative residual estimate reaches `config.rel_tol`, or the best iterate
/// found together with a non-converged status. Breakdowns and NaN residuals
/// are reported in the status rather than panicking; preconditioner
/// failures propagate as errors.
pub fn fgmres(
    op: &dyn LinearOperator,
    precond: &mut dyn Preconditioner,
    rhs: &[f64],
    config: &KrylovConfig,
    projection: Option<&MeanZeroProjection>,
) -> Result<(Vec<f64>, SolverReport), Error> {
    let start = Instant::now();
    let n = op.dim();
    assert_eq!(rhs.len(), n);

    let mut report = SolverReport {
        iterations: 0,
        status: SolveStatus::MaxIterations,
        history: Vec::new(),
        final_residual: 0.0,
        wall_time: Duration::ZERO,
        label: String::new(),
        inner_iterations: 0,
    };

    let norm_b = norm(rhs);
    if norm_b == 0.0 {
        report.status = SolveStatus::Converged;
        report.wall_time = start.elapsed();
        return Ok((vec![0.0; n], report));
    }

    let mut x = vec![0.0; n];
    let mut work = vec![0.0; n];

    'outer: loop {
        // (re)start from the current iterate
        op.apply_to(&x, &mut work);
        let mut r: Vec<f64> = rhs.iter().zip(&work).map(|(b, ax)| b - ax).collect();
        if let Some(proj) = projection {
            proj.project(&mut r);
        }
        let beta = norm(&r);
        let rel0 = beta / norm_b;
        if report.history.is_empty() && config.record_history {
            report.history.push(rel0);
        }
        if !rel0.is_finite() {
            report.status = SolveStatus::NanResidual;
            break;
        }
        if rel0 <= config.rel_tol {
            report.status = SolveStatus::Converged;
            break;
        }

        let m = config
            .restart
            .unwrap_or(config.max_iters)
            .min(config.max_iters - report.iterations);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zdirs: Vec<Vec<f64>> = Vec::new();
        let mut r_cols: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut cycle_status: Option<SolveStatus> = None;

        for j in 0..m {
            let mut z = precond.apply(&basis[j])?;
            if let Some(proj) = projection {
                proj.project(&mut z);
            }
            op.apply_to(&z, &mut work);
            zdirs.push(z);

            // modified Gram-Schmidt
            let pre_norm = norm(&work);
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&work, v);
                h[i] = hij;
                for (wk, vk) in work.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let h_next = norm(&work);
            h[j + 1] = h_next;

            // apply accumulated Givens rotations, then the new one
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = h[j].hypot(h[j + 1]);
            if denom == 0.0 || !denom.is_finite() {
                cycle_status = Some(if denom.is_finite() {
                    SolveStatus::Breakdown
                } else {
                    SolveStatus::NanResidual
                });
                report.iterations += 1;
                break;
            }
            let c = h[j] / denom;
            let s = h[j + 1] / denom;
            cs.push(c);
            sn.push(s);
            h[j] = denom;
            g.push(-s * g[j]);
            g[j] *= c;

            r_cols.push(h[..=j].to_vec());
            report.iterations += 1;
            let rel = g[j + 1].abs() / norm_b;
            if config.record_history {
                report.history.push(rel);
            }
            if !rel.is_finite() {
                cycle_status = Some(SolveStatus::NanResidual);
                break;
            }
            if rel <= config.rel_tol {
                cycle_status = Some(SolveStatus::Converged);
                break;
            }
            if h_next <= 1e-14 * pre_norm.max(1e-300) {
                // happy breakdown: the Krylov space is invariant but the
                // residual has not met the tolerance
                cycle_status = Some(SolveStatus::Breakdown);
                break;
            }
            basis.push(work.iter().map(|v| v / h_next).collect());
        }

        // back substitution on the triangular factor
        let k = r_cols.len();
        if k > 0 {
            let mut y = vec![0.0; k];
            let mut degenerate = false;
            for i in (0..k).rev() {
                let mut acc = g[i];
                for col in (i + 1)..k {
                    acc -= r_cols[col][i] * y[col];
                }
                let rii = r_cols[i][i];
                if rii.abs() < 1e-300 {
                    degenerate = true;
                    y[i] = 0.0;
                } else {
                    y[i] = acc / rii;
                }
            }
            if degenerate && cycle_status.is_none() {
                cycle_status = Some(SolveStatus::Breakdown);
            }
            for (yj, z) in y.iter().zip(&zdirs) {
                for (xi, zi) in x.iter_mut().zip(z) {
                    *xi += yj * zi;
                }
            }
        }

        match cycle_status {
            Some(status) => {
                report.status = status;
                break 'outer;
            }
            None => {
                if report.iterations >= config.max_iters {
                    report.status = SolveStatus::MaxIterations;
                    break 'outer;
                }
                // otherwise restart
            }
        }
    }

    if let Some(proj) = projection {
        proj.project(&mut x);
    }
    op.apply_to(&x, &mut work);
    let mut resid: Vec<f64> = rhs.iter().zip(&work).map(|(b, ax)| b - ax).collect();
    if let Some(proj) = projection {
        proj.project(&mut resid);
    }
    report.final_residual = norm(&resid) / norm_b;
    report.wall_time = start.elapsed();
    Ok((x, report))
}

/// Damped Jacobi sweeps `x += damping * D^{-1} (rhs - A x)`. Fails on a zero
/// diagonal entry.
pub fn jacobi_smooth(
    a: &CsrMatrix,
    rhs: &[f64],
    x: &mut [f64],
    sweeps: usize,
    damping: f64,
) -> Result<(), Error> {
    let diag = a.diagonal();
    for (row, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::ZeroDiagonal { row });
        }
    }
    let mut work = vec![0.0; x.len()];
    for _ in 0..sweeps {
        a.matvec(x, &mut work);
        for i in 0..x.len() {
            x[i] += damping * (rhs[i] - work[i]) / diag[i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Identity(usize);

    impl LinearOperator for Identity {
        fn dim(&self) -> usize {
            self.0
        }
        fn apply_to(&self, x: &[f64], y: &mut [f64]) {
            y.copy_from_slice(x);
        }
    }

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn fgmres_identity_converges_in_one_iteration() {
        let rhs = vec![3.0, -1.0, 2.0];
        let (x, report) = fgmres(
            &Identity(3),
            &mut IdentityPrecond,
            &rhs,
            &KrylovConfig::with_tol(1e-12),
            None,
        )
        .unwrap();
        assert!(report.converged());
        assert_eq!(report.iterations, 1);
        for (a, b) in x.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fgmres_small_spd_system() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let (x, report) = fgmres(
            &a,
            &mut IdentityPrecond,
            &[1.0, 2.0],
            &KrylovConfig::with_tol(1e-13),
            None,
        )
        .unwrap();
        assert!(report.converged());
        assert!(report.iterations <= 2);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn fgmres_zero_rhs() {
        let a = tridiag(5);
        let (x, report) = fgmres(&a, &mut IdentityPrecond, &[0.0; 5], &KrylovConfig::default(), None).unwrap();
        assert!(report.converged());
        assert_eq!(report.iterations, 0);
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fgmres_history_non_increasing() {
        let a = tridiag(40);
        let rhs: Vec<f64> = (0..40).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let (_, report) = fgmres(&a, &mut IdentityPrecond, &rhs, &KrylovConfig::with_tol(1e-10), None).unwrap();
        assert!(report.converged());
        for w in report.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
        assert!(report.final_residual <= 1e-10 * 1.01);
    }

    #[test]
    fn fgmres_iterations_invariant_under_uniform_scaling() {
        let a = tridiag(40);
        let rhs: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let scaled_entries: Vec<(usize, usize, f64)> = (0..40)
            .flat_map(|i| {
                let (cols, vals) = a.row(i);
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| (i, c, 1e6 * v))
                    .collect::<Vec<_>>()
            })
            .collect();
        let a_scaled = CsrMatrix::from_triplets(40, 40, &scaled_entries);
        let rhs_scaled: Vec<f64> = rhs.iter().map(|v| 1e6 * v).collect();
        let cfg = KrylovConfig::with_tol(1e-9);
        let (_, r1) = fgmres(&a, &mut IdentityPrecond, &rhs, &cfg, None).unwrap();
        let (_, r2) = fgmres(&a_scaled, &mut IdentityPrecond, &rhs_scaled, &cfg, None).unwrap();
        assert!((r1.iterations as i64 - r2.iterations as i64).abs() <= 1);
    }

    #[test]
    fn fgmres_max_iterations_reported() {
        let a = tridiag(50);
        let rhs = vec![1.0; 50];
        let cfg = KrylovConfig {
            rel_tol: 1e-14,
            max_iters: 3,
            ..KrylovConfig::default()
        };
        let (_, report) = fgmres(&a, &mut IdentityPrecond, &rhs, &cfg, None).unwrap();
        assert_eq!(report.status, SolveStatus::MaxIterations);
        assert_eq!(report.iterations, 3);
    }

    #[test]
    fn fgmres_restarted_still_converges() {
        // diagonally dominant tridiagonal, well conditioned enough for a
        // short restart length
        let mut entries = Vec::new();
        for i in 0..30usize {
            entries.push((i, i, 4.0));
            if i > 0 {
                entries.push((i, i - 1, -1.0));
            }
            if i + 1 < 30 {
                entries.push((i, i + 1, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(30, 30, &entries);
        let rhs = vec![1.0; 30];
        let cfg = KrylovConfig {
            rel_tol: 1e-10,
            max_iters: 500,
            restart: Some(5),
            record_history: true,
        };
        let (x, report) = fgmres(&a, &mut IdentityPrecond, &rhs, &cfg, None).unwrap();
        assert!(report.converged());
        let mut res = vec![0.0; 30];
        a.matvec(&x, &mut res);
        let err: f64 = res.iter().zip(&rhs).map(|(r, b)| (r - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8);
    }

    #[test]
    fn jacobi_exact_on_diagonal_matrix() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (1, 1, 4.0), (2, 2, 8.0)]);
        let mut x = vec![0.0; 3];
        jacobi_smooth(&a, &[2.0, 4.0, 16.0], &mut x, 1, 1.0).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn jacobi_reduces_error_on_m_matrix() {
        let a = tridiag(10);
        let x_exact: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos()).collect();
        let rhs = a.apply(&x_exact);
        let mut x = vec![0.0; 10];
        let err0: f64 = x_exact.iter().map(|v| v * v).sum::<f64>().sqrt();
        jacobi_smooth(&a, &rhs, &mut x, 50, 2.0 / 3.0).unwrap();
        let err: f64 = x
            .iter()
            .zip(&x_exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err * 10.0 <= err0, "error {err} not reduced 10x from {err0}");
    }

    #[test]
    fn jacobi_zero_diagonal_errors() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let mut x = vec![0.0; 2];
        assert!(matches!(
            jacobi_smooth(&a, &[1.0, 1.0], &mut x, 1, 1.0),
            Err(Error::ZeroDiagonal { row: 1 })
        ));
    }

    #[test]
    fn projection_removes_weighted_mean() {
        let mp = vec![0.25, 0.25, 0.5];
        let mut p = vec![1.0, 1.0, 1.0];
        project_mean_zero(&mut p, &mp);
        assert!(p.iter().all(|v| v.abs() < 1e-15));

        let mut p = vec![0.5, -0.3, 0.4];
        let before: Vec<f64> = p.clone();
        project_mean_zero(&mut p, &mp);
        let weighted: f64 = p.iter().zip(&mp).map(|(a, b)| a * b).sum();
        assert!(weighted.abs() < 1e-15);
        // idempotent
        let once = p.clone();
        project_mean_zero(&mut p, &mp);
        for (a, b) in p.iter().zip(&once) {
            assert!((a - b).abs() < 1e-15);
        }
        // shift is uniform
        let shift = before[0] - p[0];
        for (a, b) in before.iter().zip(&p) {
            assert!((a - b - shift).abs() < 1e-15);
        }
    }
}
