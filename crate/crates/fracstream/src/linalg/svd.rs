//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! The incremental compressor repeatedly factors small dense matrices whose
//! singular values span many orders of magnitude (down to the truncation
//! tolerance times the leading value). One-sided Jacobi computes every
//! singular value with high *relative* accuracy, which keeps the tail of the
//! spectrum trustworthy — exactly what tolerance-based truncation needs.
//! Matrices here are at most a few hundred on a side, so the O(n^2 m) sweep
//! cost is irrelevant.

use super::dense::{axpy, dot, norm2, DenseMatrix, SvdTriple};
use super::LinalgError;

/// Two columns count as orthogonal when their normalized inner product drops
/// below this. One-sided Jacobi leaves `|u_i . u_j|` of the final factor at
/// about this level, comfortably inside the 1e-10 orthonormality contract.
const PAIR_TOL: f64 = 1e-15;

/// Upper bound on Jacobi sweeps; convergence is normally reached in < 10.
const MAX_SWEEPS: usize = 64;

/// Economy SVD: `y = Q * diag(sigma) * R^T` with `min(m, n)` singular values
/// and `min(m, n)` columns in each factor.
///
/// `sigma` is nonincreasing, both factors have orthonormal columns, and each
/// left singular vector is oriented so its largest-magnitude entry is
/// positive. Zero singular values get deterministically completed
/// orthonormal columns.
///
/// # Errors
///
/// Rejects empty matrices and non-finite input.
pub fn dense_svd_econ(y: &DenseMatrix) -> Result<SvdTriple, LinalgError> {
    svd_impl(y, false)
}

/// Full SVD: like [`dense_svd_econ`] but `q_factor` is square `m x m` and
/// `r_factor` square `n x n`; `sigma` still has `min(m, n)` entries.
pub fn dense_svd_full(y: &DenseMatrix) -> Result<SvdTriple, LinalgError> {
    svd_impl(y, true)
}

fn svd_impl(y: &DenseMatrix, full: bool) -> Result<SvdTriple, LinalgError> {
    if y.n_rows() == 0 || y.n_cols() == 0 {
        return Err(LinalgError::EmptyMatrix("dense_svd"));
    }
    if !y.is_finite() {
        return Err(LinalgError::NonFinite("dense_svd input"));
    }
    let mut triple = if y.n_rows() >= y.n_cols() {
        svd_tall(y.clone(), full)
    } else {
        // Factor the transpose and swap the roles of the factors:
        // Y^T = U S V^T  =>  Y = V S U^T.
        let t = svd_tall(y.transpose(), full);
        SvdTriple {
            q_factor: t.r_factor,
            sigma: t.sigma,
            r_factor: t.q_factor,
        }
    };
    fix_signs(&mut triple);
    Ok(triple)
}

/// Jacobi SVD of a tall (or square) matrix, `m >= n`.
fn svd_tall(mut w: DenseMatrix, full: bool) -> SvdTriple {
    let (m, n) = (w.n_rows(), w.n_cols());
    let mut v = DenseMatrix::identity(n);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let app = dot(w.col(p), w.col(p));
                let aqq = dot(w.col(q), w.col(q));
                let apq = dot(w.col(p), w.col(q));
                if app == 0.0 || aqq == 0.0 {
                    continue; // an exactly zero column is orthogonal to everything
                }
                if apq.abs() <= PAIR_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotation angle that zeroes the (p, q) inner product.
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_cols(&mut w, p, q, cs, sn);
                rotate_cols(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    // Singular values are the column norms of the rotated matrix.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let q_cols = if full { m } else { n };
    let mut q = DenseMatrix::zeros(m, q_cols);
    let mut r = DenseMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            let wc = w.col(src);
            let qc = q.col_mut(dst);
            for i in 0..m {
                qc[i] = wc[i] / s;
            }
        } else {
            missing.push(dst);
        }
        r.col_mut(dst).copy_from_slice(v.col(src));
    }
    // Columns for zero singular values, plus the square completion in full
    // mode, are filled against everything placed so far.
    missing.extend(n..q_cols);
    complete_orthonormal(&mut q, &missing);

    SvdTriple {
        q_factor: q,
        sigma,
        r_factor: r,
    }
}

/// Plane rotation of columns `p` and `q`.
fn rotate_cols(m: &mut DenseMatrix, p: usize, q: usize, cs: f64, sn: f64) {
    let rows = m.n_rows();
    for i in 0..rows {
        let a = m.get(i, p);
        let b = m.get(i, q);
        m.set(i, p, cs * a - sn * b);
        m.set(i, q, sn * a + cs * b);
    }
}

/// Fill the listed columns of `q` with unit vectors orthogonal to every
/// other (already valid) column. Deterministic: each fill picks the
/// coordinate axis with the largest residual after projection (first index
/// wins ties), then re-orthogonalizes twice.
fn complete_orthonormal(q: &mut DenseMatrix, fill: &[usize]) {
    let m = q.n_rows();
    let mut valid: Vec<usize> = (0..q.n_cols()).filter(|j| !fill.contains(j)).collect();
    for &j in fill {
        let mut best_axis = 0;
        let mut best_res = -1.0;
        for axis in 0..m {
            let mut v = vec![0.0; m];
            v[axis] = 1.0;
            project_out(q, &valid, &mut v);
            let r = norm2(&v);
            if r > best_res {
                best_res = r;
                best_axis = axis;
            }
        }
        let mut v = vec![0.0; m];
        v[best_axis] = 1.0;
        project_out(q, &valid, &mut v);
        project_out(q, &valid, &mut v); // second pass scrubs rounding leakage
        let r = norm2(&v);
        debug_assert!(r > 0.0, "orthonormal completion found no free direction");
        for x in v.iter_mut() {
            *x /= r;
        }
        q.col_mut(j).copy_from_slice(&v);
        valid.push(j);
    }
}

fn project_out(q: &DenseMatrix, cols: &[usize], v: &mut [f64]) {
    for &c in cols {
        let coeff = -dot(q.col(c), v);
        axpy(coeff, q.col(c), v);
    }
}

/// Orient each left singular vector so its largest-magnitude entry is
/// positive (ties broken by lowest row index); the paired right vector flips
/// with it so the product is unchanged.
fn fix_signs(t: &mut SvdTriple) {
    let k = t.sigma.len();
    for j in 0..t.q_factor.n_cols() {
        let col = t.q_factor.col(j);
        let mut arg = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[arg].abs() {
                arg = i;
            }
        }
        if col[arg] < 0.0 {
            for x in t.q_factor.col_mut(j) {
                *x = -*x;
            }
            if j < k && j < t.r_factor.n_cols() {
                for x in t.r_factor.col_mut(j) {
                    *x = -*x;
                }
            }
        }
    }
}
