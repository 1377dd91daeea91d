//! Row-compressed sparse matrices and a preconditioned BiCGSTAB solver.

use crate::error::{Error, Result};

/// Square matrix in compressed sparse row form with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from per-row `(column, value)` lists. Duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == col {
                    v += row[k].1;
                    k += 1;
                }
                assert!(col < n, "column {col} out of bounds for dimension {n}");
                if v != 0.0 {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    /// `(D⁻¹A, D⁻¹b)` with `D` the absolute diagonal; rows with a zero diagonal are kept.
    pub fn row_equilibrated(&self, b: &[f64]) -> (CsrMatrix, Vec<f64>) {
        let mut out = self.clone();
        let mut rhs = b.to_vec();
        for i in 0..self.dim() {
            let d = self.get(i, i).abs();
            if d > 0.0 {
                for v in &mut out.vals[out.row_ptr[i]..out.row_ptr[i + 1]] {
                    *v /= d;
                }
                rhs[i] /= d;
            }
        }
        (out, rhs)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }
}

/// Incomplete LU factorization with zero fill-in, stored on the sparsity pattern of
/// the source matrix (unit lower factor implicit).
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::Precondition(format!("row {i} has no diagonal entry")));
            }
        }
        // Scatter map from column to position within the current row.
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.cols[k]] = k;
            }
            for k in start..end {
                let col = lu.cols[k];
                if col >= i {
                    break;
                }
                let pivot = lu.vals[diag[col]];
                let factor = lu.vals[k] / pivot;
                lu.vals[k] = factor;
                for m in diag[col] + 1..lu.row_ptr[col + 1] {
                    let target = pos[lu.cols[m]];
                    if target != usize::MAX {
                        lu.vals[target] -= factor * lu.vals[m];
                    }
                }
            }
            for k in start..end {
                pos[lu.cols[k]] = usize::MAX;
            }
            let d = lu.vals[diag[i]];
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Precondition(format!("zero pivot in row {i} of ILU(0)")));
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// Solves `LU z = r` in place.
    pub fn apply(&self, z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut acc = z[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                acc -= lu.vals[k] * z[lu.cols[k]];
            }
            z[i] = acc;
        }
        for i in (0..lu.n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                acc -= lu.vals[k] * z[lu.cols[k]];
            }
            z[i] = acc / lu.vals[self.diag[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of a converged Krylov solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖` recomputed from the returned iterate.
    pub relative_residual: f64,
}

/// Restarts without a halving of the true residual before the solve is abandoned.
const MAX_STALLED_RESTARTS: usize = 8;

/// Iterations over which the residual must at least halve.
const STALL_WINDOW: usize = 1000;

/// Right-preconditioned BiCGSTAB with ILU(0), started from zero. Restarts from the
/// current iterate on breakdown. Returns an error if `‖b − Ax‖/‖b‖ ≤ tol` is not
/// reached within `max_iter` iterations.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "solver tolerance must be positive"));
    }
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let pre = Ilu0::new(a)?;

    let mut r = b.to_vec();
    let mut iterations = 0;
    let mut rel = 1.0;
    let (mut p, mut v, mut s, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut phat, mut shat) = (vec![0.0; n], vec![0.0; n]);

    let mut best_true = f64::INFINITY;
    let mut stalled_restarts = 0;
    let mut window_start = 1.0;
    'restart: while iterations < max_iter {
        let r_hat = r.clone();
        let (mut rho_prev, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        while iterations < max_iter {
            iterations += 1;
            let rho = dot(&r_hat, &r);
            if rho.abs() < 1e-300 || omega == 0.0 {
                continue 'restart;
            }
            let beta = (rho / rho_prev) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            phat.copy_from_slice(&p);
            pre.apply(&mut phat);
            a.mul_vec_into(&phat, &mut v);
            let denom = dot(&r_hat, &v);
            if denom.abs() < 1e-300 {
                continue 'restart;
            }
            alpha = rho / denom;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) / b_norm <= tol {
                for k in 0..n {
                    x[k] += alpha * phat[k];
                }
                r.copy_from_slice(&s);
                rel = true_residual(a, b, &x, b_norm);
                if rel <= tol {
                    break 'restart;
                }
                continue 'restart;
            }
            shat.copy_from_slice(&s);
            pre.apply(&mut shat);
            a.mul_vec_into(&shat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for k in 0..n {
                x[k] += alpha * phat[k] + omega * shat[k];
                r[k] = s[k] - omega * t[k];
            }
            rho_prev = rho;
            rel = norm(&r) / b_norm;
            if iterations % STALL_WINDOW == 0 {
                if rel > 0.5 * window_start {
                    break 'restart;
                }
                window_start = rel;
            }
            if !rel.is_finite() {
                return Err(Error::NotConverged {
                    iterations,
                    residual: rel,
                });
            }
            if rel <= tol {
                rel = true_residual(a, b, &x, b_norm);
                if rel <= tol {
                    break 'restart;
                }
                // Recursive residual drifted: restart from the true one, and give up
                // once restarts stop improving it.
                if rel < 0.5 * best_true {
                    best_true = rel;
                    stalled_restarts = 0;
                } else {
                    stalled_restarts += 1;
                    if stalled_restarts >= MAX_STALLED_RESTARTS {
                        break 'restart;
                    }
                }
                r = residual(a, b, &x);
                continue 'restart;
            }
        }
    }
    if rel <= tol {
        Ok((
            x,
            SolveStats {
                iterations,
                relative_residual: rel,
            },
        ))
    } else {
        Err(Error::NotConverged {
            iterations,
            residual: true_residual(a, b, &x, b_norm),
        })
    }
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], b_norm: f64) -> f64 {
    norm(&residual(a, b, x)) / b_norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convection_diffusion(m: usize, wind: f64) -> CsrMatrix {
        // 2-D upwind-free convection–diffusion on an m×m grid: nonsymmetric.
        let idx = |i: usize, j: usize| i * m + j;
        let mut rows = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let mut row = vec![(idx(i, j), 4.0)];
                if i > 0 {
                    row.push((idx(i - 1, j), -1.0 - wind));
                }
                if i + 1 < m {
                    row.push((idx(i + 1, j), -1.0 + wind));
                }
                if j > 0 {
                    row.push((idx(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    row.push((idx(i, j + 1), -1.0));
                }
                rows.push(row);
            }
        }
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn csr_assembly_merges_and_sorts() {
        let a = CsrMatrix::from_rows(vec![vec![(1, 2.0), (0, 1.0), (1, 3.0)], vec![(0, 0.0), (1, 4.0)]]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.row_nnz(1), 1);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![6.0, 4.0]);
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let n = 20;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 3.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.5));
                }
                r
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let x: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let mut z = a.mul_vec(&x);
        Ilu0::new(&a).unwrap().apply(&mut z);
        for (zi, xi) in z.iter().zip(&x) {
            assert!((zi - xi).abs() < 1e-12);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let a = convection_diffusion(30, 0.4);
        let x_true: Vec<f64> = (0..a.dim()).map(|k| ((k * 7) % 13) as f64 - 6.0).collect();
        let b = a.mul_vec(&x_true);
        let (x, stats) = bicgstab(&a, &b, 1e-12, 1000).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "error {err}");
    }

    #[test]
    fn bicgstab_reports_non_convergence() {
        let a = convection_diffusion(30, 0.4);
        let b = vec![1.0; a.dim()];
        match bicgstab(&a, &b, 1e-14, 1) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = convection_diffusion(5, 0.1);
        let (x, stats) = bicgstab(&a, &[0.0; 25], 1e-10, 10).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(stats.iterations, 0);
    }
}
