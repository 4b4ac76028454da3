//! L1 quadrature weights for the Caputo derivative.
//!
//! Both weight families are differences of consecutive powers, so they are
//! positive, strictly decreasing, start at exactly 1, and their partial
//! sums telescope: `sum_{j<n} beta_j = n^(1-alpha)` (heat) respectively
//! `n^(2-alpha)` (wave). The telescoping identity is what makes the history
//! sum of the fully discrete scheme a convex-like combination of past
//! steps, and the tests pin it to near machine precision.

use super::SolveError;

/// Heat-equation weights `beta_j = (j+1)^(1-alpha) - j^(1-alpha)` for
/// `j = 0..n`.
///
/// # Errors
///
/// `alpha` must lie strictly inside (0, 1).
pub fn l1_weights(alpha: f64, n: usize) -> Result<Vec<f64>, SolveError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SolveError::InvalidConfig(format!(
            "l1_weights needs 0 < alpha < 1, got {alpha}"
        )));
    }
    Ok(power_differences(1.0 - alpha, n))
}

/// Diffusion-wave weights `beta_k = (k+1)^(2-alpha) - k^(2-alpha)` for
/// `k = 0..n`.
///
/// # Errors
///
/// `alpha` must lie strictly inside (1, 2).
pub fn wave_weights(alpha: f64, n: usize) -> Result<Vec<f64>, SolveError> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(SolveError::InvalidConfig(format!(
            "wave_weights needs 1 < alpha < 2, got {alpha}"
        )));
    }
    Ok(power_differences(2.0 - alpha, n))
}

fn power_differences(expo: f64, n: usize) -> Vec<f64> {
    let mut prev = 0.0;
    (0..n)
        .map(|j| {
            let next = ((j + 1) as f64).powf(expo);
            let b = next - prev;
            prev = next;
            b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_weight_is_one_and_sequence_decreases() {
        for alpha in [0.1, 0.5, 0.9] {
            let w = l1_weights(alpha, 50).unwrap();
            assert_eq!(w[0], 1.0);
            for pair in w.windows(2) {
                assert!(pair[1] > 0.0 && pair[1] < pair[0], "alpha = {alpha}");
            }
        }
        for alpha in [1.2, 1.5, 1.8] {
            let w = wave_weights(alpha, 50).unwrap();
            assert_eq!(w[0], 1.0);
            for pair in w.windows(2) {
                assert!(pair[1] > 0.0 && pair[1] < pair[0], "alpha = {alpha}");
            }
        }
    }

    #[test]
    fn frozen_second_weights() {
        let w = l1_weights(0.5, 3).unwrap();
        assert!((w[1] - (2.0_f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((w[2] - (3.0_f64.sqrt() - 2.0_f64.sqrt())).abs() < 1e-15);
        let v = wave_weights(1.5, 2).unwrap();
        assert!((v[1] - (2.0_f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_telescope() {
        for alpha in [0.1, 0.5, 0.9] {
            let n = 10_000;
            let w = l1_weights(alpha, n).unwrap();
            let sum: f64 = w.iter().sum();
            let exact = (n as f64).powf(1.0 - alpha);
            assert!(
                ((sum - exact) / exact).abs() < 1e-12,
                "alpha = {alpha}: {sum} vs {exact}"
            );
        }
        for alpha in [1.2, 1.5, 1.8] {
            let n = 10_000;
            let w = wave_weights(alpha, n).unwrap();
            let sum: f64 = w.iter().sum();
            let exact = (n as f64).powf(2.0 - alpha);
            assert!(
                ((sum - exact) / exact).abs() < 1e-12,
                "alpha = {alpha}: {sum} vs {exact}"
            );
        }
    }

    #[test]
    fn wave_weights_flatten_as_alpha_approaches_one() {
        // At alpha -> 1+ the wave weights approach the classical (all-ones)
        // second-difference stencil.
        let w = wave_weights(1.001, 11).unwrap();
        for (k, b) in w.iter().enumerate().take(11) {
            assert!((b - 1.0).abs() < 1e-2, "k = {k}: {b}");
        }
    }

    #[test]
    fn rejects_out_of_range_alpha() {
        assert!(l1_weights(0.0, 5).is_err());
        assert!(l1_weights(1.0, 5).is_err());
        assert!(l1_weights(1.5, 5).is_err());
        assert!(wave_weights(1.0, 5).is_err());
        assert!(wave_weights(2.0, 5).is_err());
        assert!(wave_weights(0.5, 5).is_err());
    }
}
