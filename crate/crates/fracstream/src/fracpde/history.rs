//! Trajectory storage behind the time-stepping loops.
//!
//! Every step of either scheme needs one linear combination of all previous
//! mass-weighted iterates, `sum_c coeffs[c] * M u_c`. The steppers only talk
//! to [`HistoryStore::combine`], so swapping verbatim storage for the
//! incremental SVD is a one-line change at the call site:
//!
//! * [`FullHistory`] keeps every `M u_c` column (8 m bytes per step).
//! * [`CompressedHistory`] streams raw iterates into an [`SvdState`] and
//!   evaluates the combination in coefficient space: with the factorization
//!   `U ~= Q diag(sigma) R^T`, the sum becomes `(M Q) * (sum_c coeffs[c] *
//!   d_c)` where `d_c` is the k-vector coefficient column of `u_c`. The
//!   `M Q` product and the absorbed coefficient columns are cached and only
//!   refreshed when an update actually rotates the basis, which for smooth
//!   trajectories happens a handful of times across thousands of steps.

use crate::isvd::{SvdState, Tolerance};
use crate::linalg::{spmv, DenseMatrix, SparseSpdMatrix};

use super::SolveError;

/// Storage for the mass-weighted solution history.
pub trait HistoryStore {
    /// Append the next solution column `u` (raw, not mass-weighted).
    fn push(&mut self, u: &[f64]) -> Result<(), SolveError>;

    /// `sum_c coeffs[c] * M u_c` over all stored columns; `coeffs` must have
    /// exactly one weight per stored column.
    fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>, SolveError>;

    /// Stored column count.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Peak bytes this store has held.
    fn peak_bytes(&self) -> u64;

    /// Discovered rank, if this store compresses.
    fn rank(&self) -> Option<usize>;
}

/// Verbatim history: every mass-weighted column kept as is.
pub struct FullHistory {
    mass: SparseSpdMatrix,
    cols: Vec<Vec<f64>>,
}

impl FullHistory {
    pub fn new(mass: SparseSpdMatrix) -> Self {
        Self {
            mass,
            cols: Vec::new(),
        }
    }
}

impl HistoryStore for FullHistory {
    fn push(&mut self, u: &[f64]) -> Result<(), SolveError> {
        self.cols.push(spmv(&self.mass, u)?);
        Ok(())
    }

    fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>, SolveError> {
        check_len(coeffs.len(), self.cols.len())?;
        let mut out = vec![0.0; self.mass.n_rows()];
        for (col, &w) in self.cols.iter().zip(coeffs) {
            if w == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(col) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    fn len(&self) -> usize {
        self.cols.len()
    }

    fn peak_bytes(&self) -> u64 {
        8 * self.mass.n_rows() as u64 * self.cols.len() as u64
    }

    fn rank(&self) -> Option<usize> {
        None
    }
}

/// History compressed on the fly by the incremental SVD.
pub struct CompressedHistory {
    mass: SparseSpdMatrix,
    tol: Tolerance,
    svd: Option<SvdState>,
    /// All-zero columns arriving before the first nonzero one; they carry no
    /// information and are skipped rather than fed to the compressor, which
    /// needs a nonzero seed.
    zeros_prefix: usize,
    /// Cache of `M * Q`, refreshed on basis changes.
    mq: DenseMatrix,
    /// Coefficient columns `diag(sigma) * R^T` of the absorbed columns as of
    /// the last basis change. Buffered columns since then live in the
    /// compressor's queue and are read from there.
    absorbed_coeffs: DenseMatrix,
    n_pushed: usize,
    peak: u64,
}

impl CompressedHistory {
    pub fn new(mass: SparseSpdMatrix, tol: f64) -> Result<Self, SolveError> {
        Ok(Self {
            mass,
            tol: Tolerance::new(tol)?,
            svd: None,
            zeros_prefix: 0,
            mq: DenseMatrix::zeros(1, 1),
            absorbed_coeffs: DenseMatrix::zeros(1, 1),
            n_pushed: 0,
            peak: 0,
        })
    }

    /// Recompute the caches from the current factors. Called exactly when a
    /// push rotated/extended the basis; at that moment the queue is empty,
    /// so the absorbed columns are all columns.
    fn refresh_caches(&mut self) -> Result<(), SolveError> {
        let svd = self.svd.as_ref().expect("refresh without state");
        let m = self.mass.n_rows();
        let k = svd.rank();
        let mut mq = DenseMatrix::zeros(m, k);
        for c in 0..k {
            let col = spmv(&self.mass, svd.basis().col(c))?;
            mq.col_mut(c).copy_from_slice(&col);
        }
        let r = svd.right_factor();
        let absorbed = r.n_rows();
        let coeffs = DenseMatrix::from_fn(k, absorbed, |i, j| svd.sigma()[i] * r.get(j, i));
        self.mq = mq;
        self.absorbed_coeffs = coeffs;
        Ok(())
    }
}

impl HistoryStore for CompressedHistory {
    fn push(&mut self, u: &[f64]) -> Result<(), SolveError> {
        self.n_pushed += 1;
        match self.svd.as_mut() {
            None => {
                if u.iter().all(|&v| v == 0.0) {
                    self.zeros_prefix += 1;
                    return Ok(());
                }
                self.svd = Some(SvdState::initialize(u, self.tol)?);
                self.refresh_caches()?;
            }
            Some(svd) => {
                let outcome = svd.update(u)?;
                if outcome.basis_changed() {
                    self.refresh_caches()?;
                }
            }
        }
        let bytes = self.svd.as_ref().map_or(0, |s| s.memory_bytes());
        self.peak = self.peak.max(bytes);
        Ok(())
    }

    fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>, SolveError> {
        check_len(coeffs.len(), self.n_pushed)?;
        let Some(svd) = self.svd.as_ref() else {
            // Nothing but zero columns so far: the sum is zero.
            return Ok(vec![0.0; self.mass.n_rows()]);
        };
        let queued = svd.buffered_coefficients();
        let cached = self.absorbed_coeffs.n_cols();
        debug_assert_eq!(
            cached + queued.len(),
            self.n_pushed - self.zeros_prefix,
            "cache must cover exactly the non-queued columns"
        );
        let mut w = vec![0.0; svd.rank()];
        for (c, &coef) in coeffs.iter().enumerate().skip(self.zeros_prefix) {
            if coef == 0.0 {
                continue;
            }
            let idx = c - self.zeros_prefix;
            let col = if idx < cached {
                self.absorbed_coeffs.col(idx)
            } else {
                queued[idx - cached].as_slice()
            };
            for (wi, &ci) in w.iter_mut().zip(col) {
                *wi += coef * ci;
            }
        }
        Ok(self.mq.mul_vec(&w))
    }

    fn len(&self) -> usize {
        self.n_pushed
    }

    fn peak_bytes(&self) -> u64 {
        self.peak
    }

    fn rank(&self) -> Option<usize> {
        Some(self.svd.as_ref().map_or(0, |s| s.rank()))
    }
}

fn check_len(got: usize, expected: usize) -> Result<(), SolveError> {
    if got != expected {
        return Err(SolveError::InvalidConfig(format!(
            "combine got {got} weights for {expected} stored columns"
        )));
    }
    Ok(())
}
