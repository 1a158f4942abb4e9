//! Compressed sparse row matrices and preconditioned conjugate gradients.

use crate::quadrature::neumaier_sum;

/// Symmetric pattern stored in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Pattern containing every `(i, j)` pair of each element, values zeroed.
    pub fn from_elements(n: usize, elements: &[[usize; 3]]) -> Self {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for e in elements {
            for &i in e {
                rows[i].extend_from_slice(e);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Self {
            n,
            row_ptr,
            cols,
            values: vec![0.0; nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Storage position of entry `(i, j)`, if present in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            y[i] = (a..b).map(|k| self.values[k] * x[self.cols[k]]).sum();
        }
    }
}

/// Outcome of a CG solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    /// Set when a search direction had non-positive curvature.
    pub indefinite: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    neumaier_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Jacobi-preconditioned CG on the rows and columns where `free` is set;
/// other components of `x` stay zero.
pub fn pcg(a: &CsrMatrix, b: &[f64], free: &[bool], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgReport {
    let n = a.dim();
    let diag = a.diagonal();
    let inv: Vec<f64> = (0..n)
        .map(|i| if free[i] && diag[i] > 0.0 { 1.0 / diag[i] } else if free[i] { 1.0 } else { 0.0 })
        .collect();
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut r: Vec<f64> = (0..n).map(|i| if free[i] { b[i] } else { 0.0 }).collect();
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            indefinite: false,
        };
    }
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut report = CgReport {
        iterations: 0,
        relative_residual: 1.0,
        converged: false,
        indefinite: false,
    };
    for it in 1..=max_iter {
        a.matvec(&d, &mut q);
        for i in 0..n {
            if !free[i] {
                q[i] = 0.0;
            }
        }
        let curv = dot(&d, &q);
        if !(curv > 0.0) {
            report.indefinite = true;
            report.iterations = it;
            if it == 1 {
                // Fall back to the preconditioned residual direction.
                x.copy_from_slice(&z);
            }
            return report;
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        let res = dot(&r, &r).sqrt() / b_norm;
        report.iterations = it;
        report.relative_residual = res;
        if res <= rel_tol {
            report.converged = true;
            return report;
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
    }
    report
}
