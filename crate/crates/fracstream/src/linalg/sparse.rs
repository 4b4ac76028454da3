//! Sparse symmetric positive definite matrices (CSR) and solvers.
//!
//! The finite-element mass and stiffness matrices assembled in this crate
//! are banded SPD matrices; each time step solves one system with the same
//! matrix. A skyline (envelope) Cholesky factorization is computed once and
//! reused for every step. Conjugate gradients is kept as a fallback for
//! matrices the direct factorization rejects near the definiteness edge.

use std::collections::BTreeMap;

use super::dense::{axpy, dot, norm2};
use super::LinalgError;

/// Accumulating builder for [`SparseSpdMatrix`].
///
/// Entries may be added in any order and duplicate coordinates accumulate.
/// Symmetry is the caller's job (assembly loops add both `(i, j)` and
/// `(j, i)` from symmetric element matrices); [`SpdBuilder::build`] verifies
/// it rather than trusting it.
pub struct SpdBuilder {
    n: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SpdBuilder {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "empty sparse matrix");
        Self {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    /// Accumulate `v` onto entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "index out of range");
        *self.rows[i].entry(j).or_insert(0.0) += v;
    }

    /// Finish the matrix, checking exact symmetry and strictly positive
    /// diagonal entries.
    pub fn build(self) -> Result<SparseSpdMatrix, LinalgError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite("sparse matrix entry"));
                }
                let mirror = self.rows[j].get(&i).copied();
                if mirror != Some(v) {
                    return Err(LinalgError::NotSymmetric(format!(
                        "entry ({i}, {j}) = {v} vs ({j}, {i}) = {mirror:?}"
                    )));
                }
            }
            match row.get(&i) {
                Some(&d) if d > 0.0 => {}
                other => {
                    return Err(LinalgError::NotPositiveDefinite(format!(
                        "diagonal entry {i} is {other:?}"
                    )))
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &self.rows {
            for (&j, &v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSpdMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }
}

/// Symmetric positive definite matrix in CSR layout with sorted column
/// indices per row.
#[derive(Debug, Clone)]
pub struct SparseSpdMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSpdMatrix {
    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// `self + scale * other`, merged entrywise.
    pub fn add_scaled(
        &self,
        other: &SparseSpdMatrix,
        scale: f64,
    ) -> Result<SparseSpdMatrix, LinalgError> {
        if other.n != self.n {
            return Err(LinalgError::DimensionMismatch {
                context: "add_scaled",
                got: other.n,
                expected: self.n,
            });
        }
        let mut b = SpdBuilder::new(self.n);
        for i in 0..self.n {
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                b.add(i, self.col_idx[t], self.values[t]);
            }
            for t in other.row_ptr[i]..other.row_ptr[i + 1] {
                b.add(i, other.col_idx[t], scale * other.values[t]);
            }
        }
        b.build()
    }

    /// Quadratic form `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "quadratic_form shape mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[t] * x[self.col_idx[t]];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Skyline Cholesky factorization `A = L L^T`.
    ///
    /// # Errors
    ///
    /// [`LinalgError::NotPositiveDefinite`] when a pivot fails to stay
    /// strictly positive.
    pub fn cholesky(&self) -> Result<SkylineCholesky, LinalgError> {
        SkylineCholesky::factor(self)
    }
}

/// Sparse matrix-vector product `A x`.
pub fn spmv(a: &SparseSpdMatrix, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if x.len() != a.n {
        return Err(LinalgError::DimensionMismatch {
            context: "spmv",
            got: x.len(),
            expected: a.n,
        });
    }
    let mut y = vec![0.0; a.n];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in a.row_ptr[i]..a.row_ptr[i + 1] {
            acc += a.values[t] * x[a.col_idx[t]];
        }
        *yi = acc;
    }
    Ok(y)
}

/// Cholesky factor stored by row envelope: row `i` holds columns
/// `first[i]..=i`. Fill during factorization stays inside the envelope, so
/// the storage pattern is fixed up front.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    first: Vec<usize>,
    offset: Vec<usize>,
    vals: Vec<f64>,
}

impl SkylineCholesky {
    fn factor(a: &SparseSpdMatrix) -> Result<Self, LinalgError> {
        let n = a.n;
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            // Leftmost stored column of row i; the diagonal is guaranteed
            // present, so the envelope never extends past the diagonal.
            let f = a.col_idx[a.row_ptr[i]].min(i);
            first.push(f);
            offset.push(offset[i] + (i - f + 1));
        }
        let mut vals = vec![0.0; offset[n]];
        for i in 0..n {
            for t in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[t];
                if j <= i {
                    vals[offset[i] + (j - first[i])] = a.values[t];
                }
            }
        }
        let mut l = Self {
            n,
            first,
            offset,
            vals,
        };
        for i in 0..n {
            for j in l.first[i]..i {
                let lo = l.first[i].max(l.first[j]);
                let mut sum = l.at(i, j);
                for k in lo..j {
                    sum -= l.at(i, k) * l.at(j, k);
                }
                let v = sum / l.at(j, j);
                l.set(i, j, v);
            }
            let mut d = l.at(i, i);
            for k in l.first[i]..i {
                d -= l.at(i, k) * l.at(i, k);
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite(format!(
                    "pivot {i} came out as {d:e}"
                )));
            }
            l.set(i, i, d.sqrt());
        }
        Ok(l)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j >= self.first[i] && j <= i);
        self.vals[self.offset[i] + (j - self.first[i])]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.vals[self.offset[i] + (j - self.first[i])] = v;
    }

    /// Solve `A x = b` via forward and back substitution.
    // The loop index feeds both the envelope lookup and the solution
    // vector, so a plain range reads better than a zip here.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve shape mismatch");
        // Forward: L y = b.
        let mut x = b.to_vec();
        for i in 0..self.n {
            let mut acc = x[i];
            for k in self.first[i]..i {
                acc -= self.at(i, k) * x[k];
            }
            x[i] = acc / self.at(i, i);
        }
        // Backward: L^T x = y, as a reverse saxpy sweep over rows.
        for i in (0..self.n).rev() {
            x[i] /= self.at(i, i);
            let xi = x[i];
            for k in self.first[i]..i {
                x[k] -= self.at(i, k) * xi;
            }
        }
        x
    }
}

/// Conjugate gradients from a zero start vector.
///
/// Stops when the residual drops below `rel_tol * ||b||`.
pub fn conjugate_gradient(
    a: &SparseSpdMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.n {
        return Err(LinalgError::DimensionMismatch {
            context: "conjugate_gradient",
            got: b.len(),
            expected: a.n,
        });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; a.n]);
    }
    let mut x = vec![0.0; a.n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        let ap = spmv(a, &p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite(format!(
                "conjugate gradients met curvature {pap:e}"
            )));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Err(LinalgError::NoConvergence {
        residual: rr.sqrt() / bnorm,
        iterations: max_iter,
    })
}

/// Solve `A x = b` for SPD `A`: skyline Cholesky first, conjugate gradients
/// (relative residual 1e-14) if the factorization rejects the matrix.
pub fn spd_solve(a: &SparseSpdMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.n {
        return Err(LinalgError::DimensionMismatch {
            context: "spd_solve",
            got: b.len(),
            expected: a.n,
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite("spd_solve right-hand side"));
    }
    match a.cholesky() {
        Ok(chol) => Ok(chol.solve(b)),
        Err(_) => conjugate_gradient(a, b, 1e-14, 10 * a.n + 100),
    }
}
