//! Column-major dense matrices.
//!
//! Columns are contiguous, so column views are plain slices; that is the
//! access pattern of every hot loop in this crate (orthonormal bases and
//! right factors are all tall-and-skinny and consumed column by column).

/// Dense column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Length `n_rows * n_cols`; entry `(i, j)` lives at `j * n_rows + i`.
    data: Vec<f64>,
}

impl DenseMatrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from an entry generator `f(row, col)`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n_rows: usize, n_cols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from equal-length column vectors. Panics if lengths are ragged.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        assert!(!cols.is_empty(), "from_columns needs at least one column");
        let n_rows = cols[0].len();
        let mut m = Self::zeros(n_rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n_rows, "ragged column {j}");
            m.col_mut(j).copy_from_slice(c);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.data[j * self.n_rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.data[j * self.n_rows + i] = v;
    }

    /// Column `j` as a contiguous slice.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        debug_assert!(j < self.n_cols);
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Mutable view of column `j`.
    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        debug_assert!(j < self.n_cols);
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Matrix product `self * rhs`. Panics on a shape mismatch (programmer
    /// error, not data error).
    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, rhs.n_rows, "matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.n_rows, rhs.n_cols);
        for j in 0..rhs.n_cols {
            let rj = rhs.col(j);
            let oj = out.col_mut(j);
            for (k, &r) in rj.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let ak = self.col(k);
                for i in 0..self.n_rows {
                    oj[i] += ak[i] * r;
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "mul_vec shape mismatch");
        let mut out = vec![0.0; self.n_rows];
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(k)) {
                *o += a * xk;
            }
        }
        out
    }

    /// Transposed matrix-vector product `self^T * x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows, "tr_mul_vec shape mismatch");
        (0..self.n_cols).map(|j| dot(self.col(j), x)).collect()
    }

    /// Explicit transpose.
    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    /// Copy of the rows `0..n` (all columns).
    pub fn top_rows(&self, n: usize) -> DenseMatrix {
        assert!(n <= self.n_rows);
        DenseMatrix::from_fn(n, self.n_cols, |i, j| self.get(i, j))
    }

    /// Copy of the columns `0..n` (all rows).
    pub fn left_cols(&self, n: usize) -> DenseMatrix {
        assert!(n <= self.n_cols);
        let mut m = DenseMatrix::zeros(self.n_rows, n);
        for j in 0..n {
            m.col_mut(j).copy_from_slice(self.col(j));
        }
        m
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Orthonormal-factor triple `Q * diag(sigma) * R^T` of a matrix.
///
/// `q_factor` holds left singular vectors in its columns, `r_factor` right
/// singular vectors; `sigma` is sorted in nonincreasing order. The sign of
/// each left singular vector is normalized so that its largest-magnitude
/// entry is positive.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub q_factor: DenseMatrix,
    pub sigma: Vec<f64>,
    pub r_factor: DenseMatrix,
}

impl SvdTriple {
    /// Reconstruct the original matrix `Q * diag(sigma) * R^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.q_factor.n_rows(), self.r_factor.n_rows());
        for j in 0..out.n_cols() {
            for (c, &s) in self.sigma.iter().enumerate() {
                let w = s * self.r_factor.get(j, c);
                if w == 0.0 {
                    continue;
                }
                let qc = self.q_factor.col(c);
                let oj = out.col_mut(j);
                for i in 0..qc.len() {
                    oj[i] += qc[i] * w;
                }
            }
        }
        out
    }
}

/// Euclidean inner product.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_major_layout_and_views() {
        let mut m = DenseMatrix::zeros(3, 2);
        m.set(0, 0, 1.0);
        m.set(1, 0, 2.0);
        m.set(2, 0, 3.0);
        m.set(0, 1, 4.0);
        m.set(2, 1, 6.0);
        assert_eq!(m.col(0), &[1.0, 2.0, 3.0]);
        assert_eq!(m.col(1), &[4.0, 0.0, 6.0]);
        assert_eq!(m.get(2, 1), 6.0);
    }

    #[test]
    fn matmul_against_hand_product() {
        // [[1,2],[3,4]] * [[5,6],[7,8]] = [[19,22],[43,50]]
        let a = DenseMatrix::from_columns(&[vec![1.0, 3.0], vec![2.0, 4.0]]);
        let b = DenseMatrix::from_columns(&[vec![5.0, 7.0], vec![6.0, 8.0]]);
        let c = a.mul(&b);
        assert_eq!(c.col(0), &[19.0, 43.0]);
        assert_eq!(c.col(1), &[22.0, 50.0]);
    }

    #[test]
    fn mul_vec_and_transpose_agree() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 5.0);
        let x = vec![0.5, -1.0, 2.0];
        let y = a.mul_vec(&x);
        let at = a.transpose();
        // (A^T)^T x must equal A x entry by entry.
        let y2 = at.tr_mul_vec(&x);
        assert_eq!(y, y2);
    }

    #[test]
    fn reconstruct_identity_triple() {
        let t = SvdTriple {
            q_factor: DenseMatrix::identity(3),
            sigma: vec![2.0, 1.0, 0.5],
            r_factor: DenseMatrix::identity(3),
        };
        let m = t.reconstruct();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(2, 2), 0.5);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn frobenius_norm_pythagorean() {
        let m = DenseMatrix::from_columns(&[vec![3.0, 0.0], vec![0.0, 4.0]]);
        assert!((m.frobenius_norm() - 5.0).abs() < 1e-15);
    }
}
