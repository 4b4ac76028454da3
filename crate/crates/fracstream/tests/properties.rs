//! Randomized property tests for the numerical kernels: factor
//! orthonormality, reconstruction bounds, solver residual post-conditions,
//! and weight identities.

use fracstream::fracpde::{l1_weights, wave_weights};
use fracstream::isvd::{build_full, SvdState, Tolerance};
use fracstream::linalg::{dense_svd_econ, spd_solve, spmv, DenseMatrix, SpdBuilder};
use proptest::prelude::*;

fn frobenius(y: &DenseMatrix) -> f64 {
    let mut s = 0.0;
    for j in 0..y.n_cols() {
        for &v in y.col(j) {
            s += v * v;
        }
    }
    s.sqrt()
}

/// Largest entry of |F^T F - I|.
fn orthonormal_defect(f: &DenseMatrix) -> f64 {
    let k = f.n_cols();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let dot: f64 = f.col(i).iter().zip(f.col(j)).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn matrix_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1.0f64..1.0, m * n).prop_map(move |v| (m, n, v))
    })
}

proptest! {
    #[test]
    fn dense_svd_econ_invariants((m, n, data) in matrix_strategy(8, 8)) {
        let y = DenseMatrix::from_fn(m, n, |i, j| data[j * m + i]);
        let t = dense_svd_econ(&y).unwrap();
        for w in t.sigma.windows(2) {
            prop_assert!(w[0] >= w[1], "sigma not sorted: {:?}", t.sigma);
        }
        if let Some(&last) = t.sigma.last() {
            prop_assert!(last >= 0.0);
        }
        prop_assert!(orthonormal_defect(&t.q_factor) < 1e-12);
        prop_assert!(orthonormal_defect(&t.r_factor) < 1e-12);

        let recon = t.reconstruct();
        let mut err = 0.0f64;
        for j in 0..n {
            for (a, b) in recon.col(j).iter().zip(y.col(j)) {
                err += (a - b) * (a - b);
            }
        }
        let bound = 1e-12 * (1.0 + frobenius(&y));
        prop_assert!(err.sqrt() <= bound, "recon err {} > {bound}", err.sqrt());
    }

    #[test]
    fn spd_solve_residual_postcondition(
        n in 1usize..=15,
        seedv in prop::collection::vec(-1.0f64..1.0, 15 * 4),
        b in prop::collection::vec(-10.0f64..10.0, 15),
    ) {
        // Diagonally dominant band matrix: always SPD.
        let mut builder = SpdBuilder::new(n);
        let mut dominance = vec![1.0f64; n];
        for i in 0..n {
            for w in 1..=3usize {
                if i + w >= n {
                    continue;
                }
                let v = seedv[(i * 4 + w) % seedv.len()];
                builder.add(i, i + w, v);
                builder.add(i + w, i, v);
                dominance[i] += v.abs();
                dominance[i + w] += v.abs();
            }
        }
        for (i, d) in dominance.iter().enumerate() {
            builder.add(i, i, *d);
        }
        let a = builder.build().unwrap();
        let rhs = &b[..n];
        let x = spd_solve(&a, rhs).unwrap();
        let ax = spmv(&a, &x).unwrap();
        let res: f64 = ax
            .iter()
            .zip(rhs)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-12 * bn.max(1.0), "residual {res}");
    }

    #[test]
    fn streaming_svd_tracks_low_rank_streams(
        m in 2usize..=10,
        r in 1usize..=3,
        n in 1usize..=25,
        bdata in prop::collection::vec(-1.0f64..1.0, 10 * 3),
        cdata in prop::collection::vec(-1.0f64..1.0, 3 * 25),
    ) {
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                (0..m)
                    .map(|i| {
                        (0..r)
                            .map(|t| bdata[t * m + i] * cdata[j * r + t])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let first_norm: f64 = cols[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(first_norm > 1e-6);

        let t = build_full(&cols, Tolerance::new(1e-12).unwrap()).unwrap();
        let k = t.sigma.len();
        prop_assert!(k <= m.min(n));
        for w in t.sigma.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        prop_assert!(t.sigma.iter().all(|&s| s > 0.0));
        prop_assert!(orthonormal_defect(&t.q_factor) < 1e-10);
        prop_assert!(orthonormal_defect(&t.r_factor) < 1e-10);

        let recon = t.reconstruct();
        let total: f64 = cols
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let mut err = 0.0f64;
        for (j, col) in cols.iter().enumerate() {
            for (a, b) in recon.col(j).iter().zip(col) {
                err += (a - b) * (a - b);
            }
        }
        prop_assert!(err.sqrt() <= 1e-10 * (1.0 + total), "recon err {}", err.sqrt());
    }

    #[test]
    fn streaming_svd_bookkeeping(
        m in 1usize..=6,
        cols in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 1..=20),
    ) {
        let cols: Vec<Vec<f64>> = cols.into_iter().map(|c| c[..m].to_vec()).collect();
        let first_norm: f64 = cols[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(first_norm > 1e-6);

        let mut state = SvdState::initialize(&cols[0], Tolerance::new(1e-10).unwrap()).unwrap();
        for c in &cols[1..] {
            state.update(c).unwrap();
        }
        prop_assert_eq!(state.n_seen(), cols.len());
        prop_assert!(state.rank() <= m.min(cols.len()));
        prop_assert!(state.rank() >= 1);
        let expected = 8 * (m * state.rank()
            + state.rank() * state.n_seen()
            + state.rank() * state.rank()
            + state.rank() * state.n_buffered()) as u64;
        prop_assert_eq!(state.memory_bytes(), expected);
        prop_assert!(state.reconstruct_column(0).is_err());
        prop_assert!(state.reconstruct_column(cols.len() + 1).is_err());
        prop_assert!(state.reconstruct_column(cols.len()).is_ok());
    }

    #[test]
    fn heat_weights_identities(alpha in 0.01f64..0.99, n in 1usize..=300) {
        let w = l1_weights(alpha, n).unwrap();
        prop_assert_eq!(w[0], 1.0);
        for pair in w.windows(2) {
            prop_assert!(pair[1] > 0.0 && pair[1] < pair[0]);
        }
        let sum: f64 = w.iter().sum();
        let exact = (n as f64).powf(1.0 - alpha);
        prop_assert!((sum - exact).abs() <= 1e-12 * exact, "{sum} vs {exact}");
    }

    #[test]
    fn wave_weights_identities(alpha in 1.01f64..1.99, n in 1usize..=300) {
        let w = wave_weights(alpha, n).unwrap();
        prop_assert_eq!(w[0], 1.0);
        for pair in w.windows(2) {
            prop_assert!(pair[1] > 0.0 && pair[1] < pair[0]);
        }
        let sum: f64 = w.iter().sum();
        let exact = (n as f64).powf(2.0 - alpha);
        prop_assert!((sum - exact).abs() <= 1e-12 * exact, "{sum} vs {exact}");
    }
}
