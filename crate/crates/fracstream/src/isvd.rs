//! Incremental truncated SVD over a stream of columns.
//!
//! The state maintains a rank-`k` factorization `Q * diag(sigma) * R^T` of
//! all columns seen so far, where `Q` (`m x k`) and `R` (`l x k`) have
//! orthonormal columns and `sigma` is positive and nonincreasing. Each new
//! column `u` is split into its component `d = Q^T u` inside the current
//! basis and a residual `e = u - Q d` of norm `p`:
//!
//! * **Buffered update** (`p < tol`): the column is numerically inside the
//!   span, so only its coefficient vector `d` is queued. No factor changes,
//!   no dense work. Long runs of in-span columns — the common case for
//!   smooth trajectories — cost one projection each.
//! * **Basis-growing update** (`p >= tol`): the queued coefficients are
//!   first folded in by one small economy SVD (the *flush*), then the
//!   `(k+1) x (k+1)` bordered matrix `[[diag(sigma), d], [0, p]]` is
//!   factored and its smallest singular value is either kept (rank grows)
//!   or dropped (tolerance truncation). All small rotations from the flush
//!   and the bordered step are accumulated and applied to the tall factor
//!   `Q` in a single pass, so `Q` is touched once per basis change rather
//!   than once per column.
//!
//! A safety valve flushes the queue whenever it reaches `max(2k, 64)`
//! pending columns, bounding memory without changing results beyond the
//! truncation tolerance. Singular values of the bordered matrix interlace
//! the previous ones (`mu_1 >= sigma_1 >= mu_2 >= ... >= sigma_k >=
//! mu_{k+1}` and `mu_{k+1} <= p`), which tests assert via the optional
//! per-update trace.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::linalg::{dense_svd_econ, DenseMatrix, LinalgError, SvdTriple};

/// Errors from the incremental SVD.
#[derive(Debug, Error)]
pub enum IsvdError {
    /// The first column of a stream must be nonzero to seed the basis.
    #[error("cannot initialize from an all-zero first column")]
    ZeroFirstColumn,
    /// A column's length disagrees with the state's row count.
    #[error("column length {got} does not match state rows {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    /// A column contained NaN or infinity.
    #[error("non-finite value in column")]
    NonFinite,
    /// `reconstruct_column` index outside `1..=n_seen`.
    #[error("column index {j} out of range (1..={n_seen})")]
    ColumnOutOfRange { j: usize, n_seen: usize },
    /// `build_full` needs at least one column.
    #[error("empty column stream")]
    EmptyStream,
    /// Truncation tolerance outside (0, 1).
    #[error("tolerance must lie strictly between 0 and 1, got {0}")]
    InvalidTolerance(f64),
    /// Malformed text in a column-stream or factor file.
    #[error("stream format error: {0}")]
    Stream(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Validated truncation tolerance, strictly inside (0, 1).
#[derive(Debug, Clone, Copy)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(tol: f64) -> Result<Self, IsvdError> {
        if tol > 0.0 && tol < 1.0 && tol.is_finite() {
            Ok(Self(tol))
        } else {
            Err(IsvdError::InvalidTolerance(tol))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// What a single [`SvdState::update`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    /// Residual below tolerance: coefficients queued, factors untouched.
    Buffered,
    /// Residual below tolerance, but the queue hit its cap and was folded
    /// into the factors (basis rotated, rank unchanged).
    BufferedFlushed,
    /// Bordered update ran; rank grew by one unless `truncated`.
    Absorbed { truncated: bool },
}

impl UpdateOutcome {
    /// True when the update changed `Q` (callers caching products against
    /// the basis must refresh).
    pub fn basis_changed(self) -> bool {
        !matches!(self, UpdateOutcome::Buffered)
    }
}

/// Record of one bordered (basis-growing) update, for verification.
#[derive(Debug, Clone)]
pub struct BorderedStep {
    /// Singular values before the update (`k` of them).
    pub sigma_before: Vec<f64>,
    /// Singular values of the bordered matrix (`k + 1` of them).
    pub mu: Vec<f64>,
    /// Residual norm `p` of the incoming column.
    pub residual_norm: f64,
    /// Whether `mu[k]` was dropped by the tolerance rule.
    pub truncated: bool,
}

/// Streaming truncated SVD state. See the module docs for the algorithm.
#[derive(Debug, Clone)]
pub struct SvdState {
    /// Orthonormal basis of the column space, `m x k`.
    q: DenseMatrix,
    /// Singular values, positive, nonincreasing.
    sigma: Vec<f64>,
    /// Right factor rows for every *absorbed* column, `l0 x k`.
    r: DenseMatrix,
    /// Queued coefficient vectors (length `k` each) of buffered columns.
    buffer: Vec<Vec<f64>>,
    /// Small rotation accumulated inside an update; identity whenever
    /// control is outside [`SvdState::update`]. Kept in the state so the
    /// footprint formula (which charges one k x k block) stays honest.
    q0: DenseMatrix,
    tol: f64,
    /// Total columns presented, absorbed + buffered.
    n_seen: usize,
    /// Queue cap, `max(2k, 64)`, refreshed whenever the rank changes.
    buffer_cap: usize,
    trace: Option<Vec<BorderedStep>>,
}

impl SvdState {
    /// Seed the factorization from the first column: `sigma = ||u1||`,
    /// `Q = u1 / ||u1||`, `R = [1]`.
    ///
    /// # Errors
    ///
    /// [`IsvdError::ZeroFirstColumn`] when `||u1|| = 0`, plus the usual
    /// finiteness check.
    pub fn initialize(u1: &[f64], tol: Tolerance) -> Result<Self, IsvdError> {
        if u1.iter().any(|v| !v.is_finite()) {
            return Err(IsvdError::NonFinite);
        }
        let norm = u1.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(IsvdError::ZeroFirstColumn);
        }
        let mut q = DenseMatrix::zeros(u1.len(), 1);
        for (dst, &v) in q.col_mut(0).iter_mut().zip(u1) {
            *dst = v / norm;
        }
        let mut r = DenseMatrix::zeros(1, 1);
        r.set(0, 0, 1.0);
        Ok(Self {
            q,
            sigma: vec![norm],
            r,
            buffer: Vec::new(),
            q0: DenseMatrix::identity(1),
            tol: tol.get(),
            n_seen: 1,
            buffer_cap: 64,
            trace: None,
        })
    }

    /// Rows of the streamed columns.
    pub fn n_rows(&self) -> usize {
        self.q.n_rows()
    }

    /// Current rank `k`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Columns presented so far (absorbed + buffered).
    pub fn n_seen(&self) -> usize {
        self.n_seen
    }

    /// Columns currently queued.
    pub fn n_buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Orthonormal basis `Q` (`m x k`).
    pub fn basis(&self) -> &DenseMatrix {
        &self.q
    }

    /// Singular values, nonincreasing.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Right factor `R` (`l x k`, orthonormal columns) whose row `j` holds
    /// the mixing weights of absorbed column `j`; queued columns are not in
    /// `R` until a flush.
    pub fn right_factor(&self) -> &DenseMatrix {
        &self.r
    }

    /// Queued coefficient vectors of buffered columns, oldest first; all are
    /// coordinates in the current basis.
    pub fn buffered_coefficients(&self) -> &[Vec<f64>] {
        &self.buffer
    }

    /// Coefficient matrix `k x n_seen` whose column `j` reproduces streamed
    /// column `j` as `Q * col`: `diag(sigma) * R^T` for absorbed columns,
    /// the queued `d` for buffered ones.
    pub fn coeff_matrix(&self) -> DenseMatrix {
        let k = self.rank();
        let absorbed = self.r.n_rows();
        let mut c = DenseMatrix::zeros(k, self.n_seen);
        for j in 0..absorbed {
            let cj = c.col_mut(j);
            for (i, s) in self.sigma.iter().enumerate() {
                cj[i] = s * self.r.get(j, i);
            }
        }
        for (b, d) in self.buffer.iter().enumerate() {
            c.col_mut(absorbed + b).copy_from_slice(d);
        }
        c
    }

    /// Start recording a [`BorderedStep`] for every basis-growing update.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[BorderedStep]> {
        self.trace.as_deref()
    }

    /// Bytes held by the factorization: `8 * (m k + k l + k^2 + k q)` for
    /// `Q`, the right-factor rows of all `l = n_seen` columns, the small
    /// rotation block, and `q` queued coefficient vectors.
    pub fn memory_bytes(&self) -> u64 {
        let m = self.n_rows() as u64;
        let k = self.rank() as u64;
        let l = self.n_seen as u64;
        let qn = self.buffer.len() as u64;
        8 * (m * k + k * l + k * k + k * qn)
    }

    /// Present the next column.
    pub fn update(&mut self, u: &[f64]) -> Result<UpdateOutcome, IsvdError> {
        if u.len() != self.n_rows() {
            return Err(IsvdError::DimensionMismatch {
                got: u.len(),
                expected: self.n_rows(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(IsvdError::NonFinite);
        }
        self.n_seen += 1;
        let k = self.rank();
        let d = self.q.tr_mul_vec(u);
        let mut e = u.to_vec();
        for (c, &dc) in d.iter().enumerate() {
            let qc = self.q.col(c);
            for (ei, &qi) in e.iter_mut().zip(qc) {
                *ei -= qi * dc;
            }
        }
        let p = e.iter().map(|v| v * v).sum::<f64>().sqrt();

        // At full rank the basis spans every column; whatever survives the
        // projection is round-off, never a new direction.
        if p < self.tol || k == self.n_rows() {
            self.buffer.push(d);
            return if self.buffer.len() >= self.buffer_cap {
                self.flush_applying()?;
                Ok(UpdateOutcome::BufferedFlushed)
            } else {
                Ok(UpdateOutcome::Buffered)
            };
        }

        // Fold any queued columns into sigma/R first. The resulting basis
        // rotation is *not* applied to Q yet; it rides along in q0 so Q is
        // rewritten only once below.
        let flush_rot = self.flush_factors()?;
        let d = match &flush_rot {
            Some(rot) => rot.tr_mul_vec(&d),
            None => d,
        };

        for v in e.iter_mut() {
            *v /= p;
        }
        // Second orthogonalization pass. Forming e = u - Q d cancels
        // heavily when p << ||u||, so after dividing by p the quotient can
        // carry a component along the basis far above round-off; left in,
        // it would become a permanent orthonormality defect of Q and put a
        // floor under every future residual. One more projection scrubs it.
        for c in 0..k {
            let coeff = dot(self.q.col(c), &e);
            let qc = self.q.col(c);
            for (ei, &qi) in e.iter_mut().zip(qc) {
                *ei -= qi * coeff;
            }
        }
        let en = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if en < 0.5 {
            // The pass removed most of e: the residual was rounding noise
            // pointing back into the span, not a new direction. Treat the
            // column as in-span.
            if let Some(rot) = flush_rot {
                self.q = self.q.mul(&rot);
                self.q0 = DenseMatrix::identity(self.rank());
            }
            self.buffer.push(d);
            return Ok(UpdateOutcome::BufferedFlushed);
        }
        for v in e.iter_mut() {
            *v /= en;
        }

        // Bordered matrix [[diag(sigma), d], [0, p]], upper triangular with
        // positive diagonal, hence nonsingular.
        let mut border = DenseMatrix::zeros(k + 1, k + 1);
        for (i, &s) in self.sigma.iter().enumerate() {
            border.set(i, i, s);
        }
        for (i, &di) in d.iter().enumerate() {
            border.set(i, k, di);
        }
        border.set(k, k, p);
        let small = dense_svd_econ(&border)?;
        let mu = small.sigma;

        // Keep the trailing singular value only if it carries at least a
        // tol-fraction of the total spectrum mass.
        let total: f64 = mu.iter().sum();
        let keep = if mu[k] >= self.tol * total { k + 1 } else { k };
        let truncated = keep == k;
        if let Some(tr) = self.trace.as_mut() {
            tr.push(BorderedStep {
                sigma_before: self.sigma.clone(),
                mu: mu.clone(),
                residual_norm: p,
                truncated,
            });
        }

        // q0 <- [[flush_rot, 0], [0, 1]] * Q_border, then Q <- [Q | e] * q0,
        // keeping only the leading `keep` columns.
        let q0 = match &flush_rot {
            Some(rot) => embed_mul(rot, &small.q_factor),
            None => small.q_factor,
        };
        let mut q_new = DenseMatrix::zeros(self.n_rows(), keep);
        for j in 0..keep {
            let out = q_new.col_mut(j);
            for c in 0..k {
                let w = q0.get(c, j);
                if w == 0.0 {
                    continue;
                }
                let qc = self.q.col(c);
                for (oi, &qi) in out.iter_mut().zip(qc) {
                    *oi += qi * w;
                }
            }
            let w = q0.get(k, j);
            for (oi, &ei) in out.iter_mut().zip(&e) {
                *oi += ei * w;
            }
        }
        // R <- [[R, 0], [0, 1]] * R_border, same column cut.
        let absorbed = self.r.n_rows();
        let mut r_new = DenseMatrix::zeros(absorbed + 1, keep);
        for j in 0..keep {
            let out = r_new.col_mut(j);
            for c in 0..k {
                let w = small.r_factor.get(c, j);
                if w == 0.0 {
                    continue;
                }
                let rc = self.r.col(c);
                for (oi, &ri) in out.iter_mut().zip(rc).take(absorbed) {
                    *oi += ri * w;
                }
            }
            out[absorbed] = small.r_factor.get(k, j);
        }

        self.q = q_new;
        self.sigma = mu[..keep].to_vec();
        self.r = r_new;
        self.q0 = DenseMatrix::identity(keep);
        self.buffer_cap = (2 * keep).max(64);
        Ok(UpdateOutcome::Absorbed { truncated })
    }

    /// Fold queued columns into the factors and return the final triple.
    /// Idempotent: calling again without further updates returns the same
    /// factors.
    pub fn finalize(&mut self) -> Result<SvdTriple, IsvdError> {
        self.flush_applying()?;
        Ok(SvdTriple {
            q_factor: self.q.clone(),
            sigma: self.sigma.clone(),
            r_factor: self.r.clone(),
        })
    }

    /// Reconstruct streamed column `j` (1-based) from the factors:
    /// `Q * diag(sigma) * R(j, :)^T` for absorbed columns, `Q * d_j` for
    /// ones still queued.
    pub fn reconstruct_column(&self, j: usize) -> Result<Vec<f64>, IsvdError> {
        if j == 0 || j > self.n_seen {
            return Err(IsvdError::ColumnOutOfRange {
                j,
                n_seen: self.n_seen,
            });
        }
        let absorbed = self.r.n_rows();
        let w: Vec<f64> = if j <= absorbed {
            self.sigma
                .iter()
                .enumerate()
                .map(|(c, s)| s * self.r.get(j - 1, c))
                .collect()
        } else {
            self.buffer[j - 1 - absorbed].clone()
        };
        Ok(self.q.mul_vec(&w))
    }

    /// Economy SVD of `[diag(sigma) | queued d's]`; updates `sigma` and `R`
    /// and hands back the basis rotation for the caller to apply (either
    /// directly to Q or merged into a bordered-step rotation). Rank is
    /// preserved: the diagonal block keeps the rows independent.
    fn flush_factors(&mut self) -> Result<Option<DenseMatrix>, IsvdError> {
        if self.buffer.is_empty() {
            return Ok(None);
        }
        let k = self.rank();
        let qn = self.buffer.len();
        let mut y = DenseMatrix::zeros(k, k + qn);
        for (i, &s) in self.sigma.iter().enumerate() {
            y.set(i, i, s);
        }
        for (b, dv) in self.buffer.iter().enumerate() {
            y.col_mut(k + b).copy_from_slice(dv);
        }
        let t = dense_svd_econ(&y)?;
        let absorbed = self.r.n_rows();
        // R <- [R * R_y[0..k, :] ; R_y[k.., :]]
        let mut r_new = DenseMatrix::zeros(absorbed + qn, k);
        for j in 0..k {
            let out = r_new.col_mut(j);
            for c in 0..k {
                let w = t.r_factor.get(c, j);
                if w == 0.0 {
                    continue;
                }
                let rc = self.r.col(c);
                for (oi, &ri) in out.iter_mut().zip(rc).take(absorbed) {
                    *oi += ri * w;
                }
            }
            for b in 0..qn {
                out[absorbed + b] = t.r_factor.get(k + b, j);
            }
        }
        self.sigma = t.sigma;
        self.r = r_new;
        self.buffer.clear();
        Ok(Some(t.q_factor))
    }

    /// Flush and apply the rotation to Q immediately (queue-cap spills and
    /// finalization).
    fn flush_applying(&mut self) -> Result<(), IsvdError> {
        if let Some(rot) = self.flush_factors()? {
            self.q = self.q.mul(&rot);
            self.q0 = DenseMatrix::identity(self.rank());
        }
        Ok(())
    }
}

/// `[[a, 0], [0, 1]] * b` where `a` is `k x k` and `b` is `(k+1) x (k+1)`.
fn embed_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let k = a.n_rows();
    debug_assert_eq!(b.n_rows(), k + 1);
    let mut out = DenseMatrix::zeros(k + 1, b.n_cols());
    for j in 0..b.n_cols() {
        let oj = out.col_mut(j);
        for c in 0..k {
            let w = b.get(c, j);
            if w == 0.0 {
                continue;
            }
            let ac = a.col(c);
            for (oi, &ai) in oj.iter_mut().zip(ac).take(k) {
                *oi += ai * w;
            }
        }
        oj[k] = b.get(k, j);
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Run the full pipeline over an in-memory stream of columns.
///
/// # Errors
///
/// [`IsvdError::EmptyStream`] for zero columns, [`IsvdError::ZeroFirstColumn`]
/// if the stream opens with an all-zero column, plus per-column validation.
pub fn build_full(columns: &[Vec<f64>], tol: Tolerance) -> Result<SvdTriple, IsvdError> {
    let (first, rest) = columns.split_first().ok_or(IsvdError::EmptyStream)?;
    let mut state = SvdState::initialize(first, tol)?;
    for col in rest {
        state.update(col)?;
    }
    state.finalize()
}

/// Parse a plain-text column stream: a header line `m n`, then `n` lines of
/// `m` whitespace-separated numbers, one streamed column per line.
pub fn read_column_stream<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>, IsvdError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| IsvdError::Stream("missing header line".into()))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| IsvdError::Stream(format!("bad header token {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let [m, n] = dims[..] else {
        return Err(IsvdError::Stream(format!(
            "header must be `m n`, got {} tokens",
            dims.len()
        )));
    };
    let mut cols = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let col: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| {
                    IsvdError::Stream(format!("bad number {t:?} in column {}", idx + 1))
                })
            })
            .collect::<Result<_, _>>()?;
        if col.len() != m {
            return Err(IsvdError::Stream(format!(
                "column {} has {} entries, expected {m}",
                idx + 1,
                col.len()
            )));
        }
        cols.push(col);
    }
    if cols.len() != n {
        return Err(IsvdError::Stream(format!(
            "stream declared {n} columns but contained {}",
            cols.len()
        )));
    }
    Ok(cols)
}

/// Emit factors as three labeled plain-text arrays (`Q`, `sigma`, `R`), one
/// matrix row per line. Numbers use the shortest round-trippable form.
pub fn write_factors<W: Write>(mut w: W, t: &SvdTriple) -> std::io::Result<()> {
    let write_matrix = |w: &mut W, name: &str, m: &DenseMatrix| -> std::io::Result<()> {
        writeln!(w, "{name} {} {}", m.n_rows(), m.n_cols())?;
        for i in 0..m.n_rows() {
            let row: Vec<String> = (0..m.n_cols()).map(|j| m.get(i, j).to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    };
    write_matrix(&mut w, "Q", &t.q_factor)?;
    writeln!(w, "sigma 1 {}", t.sigma.len())?;
    let row: Vec<String> = t.sigma.iter().map(|s| s.to_string()).collect();
    writeln!(w, "{}", row.join(" "))?;
    write_matrix(&mut w, "R", &t.r_factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(t: f64) -> Tolerance {
        Tolerance::new(t).unwrap()
    }

    fn orthonormality_defect(m: &DenseMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.n_cols() {
            for j in 0..m.n_cols() {
                let g = dot(m.col(i), m.col(j)) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(g.abs());
            }
        }
        worst
    }

    #[test]
    fn initialize_frozen() {
        let s = SvdState::initialize(&[3.0, 4.0], tol(1e-12)).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(s.n_seen(), 1);
        assert!((s.sigma()[0] - 5.0).abs() < 1e-15);
        assert!((s.basis().get(0, 0) - 0.6).abs() < 1e-15);
        assert!((s.basis().get(1, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn initialize_rejects_zero_and_nan() {
        assert!(matches!(
            SvdState::initialize(&[0.0, 0.0], tol(1e-12)),
            Err(IsvdError::ZeroFirstColumn)
        ));
        assert!(matches!(
            SvdState::initialize(&[1.0, f64::NAN], tol(1e-12)),
            Err(IsvdError::NonFinite)
        ));
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1.0).is_err());
        assert!(Tolerance::new(-0.5).is_err());
    }

    #[test]
    fn three_column_stream_frozen_sigma() {
        // Columns (1,0), (0,1), (1,1): the assembled matrix has singular
        // values sqrt(3) and 1.
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let t = build_full(&cols, tol(1e-12)).unwrap();
        assert_eq!(t.sigma.len(), 2);
        assert!((t.sigma[0] - 3.0_f64.sqrt()).abs() < 1e-12);
        assert!((t.sigma[1] - 1.0).abs() < 1e-12);
        let rec = t.reconstruct();
        let y = DenseMatrix::from_columns(&cols);
        for j in 0..3 {
            for i in 0..2 {
                assert!((rec.get(i, j) - y.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn repeated_column_stays_rank_one() {
        let u = vec![1.0, 2.0, -2.0]; // norm 3
        let mut s = SvdState::initialize(&u, tol(1e-12)).unwrap();
        for _ in 1..50 {
            let out = s.update(&u).unwrap();
            assert_eq!(out, UpdateOutcome::Buffered);
        }
        assert_eq!(s.n_buffered(), 49);
        let t = s.finalize().unwrap();
        assert_eq!(t.sigma.len(), 1);
        assert!((t.sigma[0] - 3.0 * 50.0_f64.sqrt()).abs() < 1e-10);
        assert_eq!(t.r_factor.n_rows(), 50);
        // Column 17 reconstructs to u.
        let rec = s.reconstruct_column(17).unwrap();
        for (a, b) in rec.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_rank_one_stream_frozen() {
        // u, 2u, 3u: one singular value ||u|| * sqrt(14).
        let u = [0.5, -1.0, 0.25];
        let nu = (u.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let cols: Vec<Vec<f64>> = (1..=3)
            .map(|s| u.iter().map(|v| v * s as f64).collect())
            .collect();
        let mut st = SvdState::initialize(&cols[0], tol(1e-12)).unwrap();
        st.update(&cols[1]).unwrap();
        st.update(&cols[2]).unwrap();
        let t = st.finalize().unwrap();
        assert_eq!(t.sigma.len(), 1);
        assert!((t.sigma[0] - nu * 14.0_f64.sqrt()).abs() < 1e-12);
        let rec = st.reconstruct_column(2).unwrap();
        for (a, b) in rec.iter().zip(&cols[1]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn queue_cap_forces_flush() {
        let u = vec![2.0, 0.0];
        let mut s = SvdState::initialize(&u, tol(1e-12)).unwrap();
        let mut flushed = 0;
        for _ in 0..70 {
            match s.update(&u).unwrap() {
                UpdateOutcome::Buffered => {}
                UpdateOutcome::BufferedFlushed => flushed += 1,
                other => panic!("unexpected outcome {other:?}"),
            }
            assert!(s.n_buffered() < 64, "queue must stay under its cap");
        }
        assert_eq!(flushed, 1);
        assert_eq!(s.rank(), 1);
        // The flush at queue length 64 absorbs the seed plus 64 copies.
        assert!((s.sigma()[0] - 2.0 * 65.0_f64.sqrt()).abs() < 1e-12);
        let t = s.finalize().unwrap();
        assert_eq!(t.r_factor.n_rows(), 71);
        assert!(orthonormality_defect(&t.r_factor) < 1e-13);
    }

    #[test]
    fn truncation_drops_trailing_value() {
        // After seeding with e1 (sigma = 1), the column e1 + 0.4 e2 under
        // tol = 0.3 produces bordered singular values (1.4433, 0.2771);
        // 0.2771 < 0.3 * 1.7205, so the rank stays 1.
        let mut s = SvdState::initialize(&[1.0, 0.0], tol(0.3)).unwrap();
        s.enable_trace();
        let out = s.update(&[1.0, 0.4]).unwrap();
        assert_eq!(out, UpdateOutcome::Absorbed { truncated: true });
        assert_eq!(s.rank(), 1);
        assert!((s.sigma()[0] - 1.4433279).abs() < 1e-6);
        let steps = s.trace().unwrap();
        assert_eq!(steps.len(), 1);
        assert!(steps[0].truncated);
        assert!((steps[0].residual_norm - 0.4).abs() < 1e-14);
        assert!((steps[0].mu[1] - 0.2771368).abs() < 1e-6);
        // Lossy by design: the dropped mass is exactly mu[1].
        let t = s.finalize().unwrap();
        let rec = t.reconstruct();
        let y = DenseMatrix::from_columns(&[vec![1.0, 0.0], vec![1.0, 0.4]]);
        let mut err = 0.0f64;
        for j in 0..2 {
            for i in 0..2 {
                err += (rec.get(i, j) - y.get(i, j)).powi(2);
            }
        }
        assert!(err.sqrt() <= 0.2771368 + 1e-6);
    }

    #[test]
    fn growth_outcome_reports_rank_change() {
        let mut s = SvdState::initialize(&[1.0, 0.0, 0.0], tol(1e-10)).unwrap();
        let out = s.update(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(out, UpdateOutcome::Absorbed { truncated: false });
        assert!(out.basis_changed());
        assert_eq!(s.rank(), 2);
        assert!(!UpdateOutcome::Buffered.basis_changed());
    }

    #[test]
    fn interlacing_holds_on_dense_stream() {
        let m = 8;
        let cols: Vec<Vec<f64>> = (0..20)
            .map(|j| {
                (0..m)
                    .map(|i| ((i * j + 3) as f64).sin() + 0.1 * (i as f64))
                    .collect()
            })
            .collect();
        let mut s = SvdState::initialize(&cols[0], tol(1e-12)).unwrap();
        s.enable_trace();
        for c in &cols[1..] {
            s.update(c).unwrap();
        }
        for step in s.trace().unwrap() {
            let k = step.sigma_before.len();
            assert_eq!(step.mu.len(), k + 1);
            assert!(step.mu[k] <= step.residual_norm + 1e-10);
            for i in 0..k {
                assert!(step.sigma_before[i] <= step.mu[i] + 1e-10);
                assert!(step.mu[i + 1] <= step.sigma_before[i] + 1e-10);
            }
        }
    }

    #[test]
    fn low_rank_noisy_stream_compresses_and_reconstructs() {
        // Deterministic rank-4 stream of 200 columns in 12 rows with noise
        // below the tolerance.
        let m = 12;
        let rank = 4;
        let basis: Vec<Vec<f64>> = (0..rank)
            .map(|r| (0..m).map(|i| ((i * (r + 2)) as f64 + 0.3).cos()).collect())
            .collect();
        let cols: Vec<Vec<f64>> = (0..200)
            .map(|j| {
                let mut col = vec![0.0; m];
                for (r, b) in basis.iter().enumerate() {
                    let w = ((j * (r + 1)) as f64 * 0.1).sin() + 0.2;
                    for (ci, bi) in col.iter_mut().zip(b) {
                        *ci += w * bi;
                    }
                }
                for (i, ci) in col.iter_mut().enumerate() {
                    *ci += 1e-13 * (((i + 7 * j) % 11) as f64 - 5.0);
                }
                col
            })
            .collect();
        let mut s = SvdState::initialize(&cols[0], tol(1e-12)).unwrap();
        for c in &cols[1..] {
            s.update(c).unwrap();
        }
        let t = s.finalize().unwrap();
        assert!(t.sigma.len() <= rank + 2, "rank {} too high", t.sigma.len());
        assert!(orthonormality_defect(&t.q_factor) < 1e-12);
        assert!(orthonormality_defect(&t.r_factor) < 1e-11);
        for s2 in t.sigma.windows(2) {
            assert!(s2[0] >= s2[1]);
        }
        let y = DenseMatrix::from_columns(&cols);
        let rec = t.reconstruct();
        let mut err = 0.0f64;
        for j in 0..y.n_cols() {
            for i in 0..m {
                err += (rec.get(i, j) - y.get(i, j)).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-9 * y.frobenius_norm());
    }

    #[test]
    fn finalize_is_idempotent() {
        let cols = [vec![1.0, 2.0], vec![2.0, 1.0], vec![1.0, 1.0]];
        let mut s = SvdState::initialize(&cols[0], tol(1e-12)).unwrap();
        s.update(&cols[1]).unwrap();
        s.update(&cols[2]).unwrap();
        let a = s.finalize().unwrap();
        let b = s.finalize().unwrap();
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.q_factor, b.q_factor);
        assert_eq!(a.r_factor, b.r_factor);
    }

    #[test]
    fn update_validates_input() {
        let mut s = SvdState::initialize(&[1.0, 0.0], tol(1e-12)).unwrap();
        assert!(matches!(
            s.update(&[1.0]),
            Err(IsvdError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.update(&[f64::INFINITY, 0.0]),
            Err(IsvdError::NonFinite)
        ));
        assert!(matches!(
            s.reconstruct_column(0),
            Err(IsvdError::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            s.reconstruct_column(2),
            Err(IsvdError::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            build_full(&[], tol(1e-12)),
            Err(IsvdError::EmptyStream)
        ));
    }

    #[test]
    fn memory_formula_frozen() {
        // m = 5, two absorbed directions, one buffered column:
        // 8 * (5*2 + 2*3 + 2*2 + 2*1) = 176 bytes.
        let mut s = SvdState::initialize(&[1.0, 0.0, 0.0, 0.0, 0.0], tol(1e-12)).unwrap();
        s.update(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        s.update(&[1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.n_buffered(), 1);
        assert_eq!(s.memory_bytes(), 176);
    }

    #[test]
    fn coeff_matrix_reproduces_columns() {
        let cols = [
            vec![1.0, 0.5, 0.0],
            vec![0.0, 1.0, -0.5],
            vec![1.0, 1.5, -0.5],
            vec![2.0, 1.0, 0.0],
        ];
        let mut s = SvdState::initialize(&cols[0], tol(1e-12)).unwrap();
        for c in &cols[1..] {
            s.update(c).unwrap();
        }
        let cm = s.coeff_matrix();
        assert_eq!(cm.n_cols(), 4);
        for (j, col) in cols.iter().enumerate() {
            let rec = s.basis().mul_vec(cm.col(j));
            for (a, b) in rec.iter().zip(col) {
                assert!((a - b).abs() < 1e-12);
            }
            let direct = s.reconstruct_column(j + 1).unwrap();
            for (a, b) in rec.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn column_stream_text_roundtrip() {
        let text = "3 2\n1 2 3\n4 5 6.5\n";
        let cols = read_column_stream(text.as_bytes()).unwrap();
        assert_eq!(cols, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.5]]);

        let t = build_full(&cols, tol(1e-12)).unwrap();
        let mut out = Vec::new();
        write_factors(&mut out, &t).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut numbers = Vec::new();
        for line in text.lines() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "Q" || toks[0] == "sigma" || toks[0] == "R" {
                continue;
            }
            for t in toks {
                numbers.push(t.parse::<f64>().unwrap());
            }
        }
        // Q (3x2) + sigma (2) + R (2x2) = 12 numbers, all round-tripped.
        assert_eq!(numbers.len(), 12);
        assert_eq!(numbers[0], t.q_factor.get(0, 0));
        assert_eq!(numbers[6], t.sigma[0]);
    }

    #[test]
    fn column_stream_rejects_malformed_input() {
        assert!(read_column_stream("".as_bytes()).is_err());
        assert!(read_column_stream("2\n1 2\n".as_bytes()).is_err());
        assert!(read_column_stream("2 2\n1 2\n3\n".as_bytes()).is_err());
        assert!(read_column_stream("2 2\n1 2\n".as_bytes()).is_err());
        assert!(read_column_stream("2 1\n1 x\n".as_bytes()).is_err());
    }
}
