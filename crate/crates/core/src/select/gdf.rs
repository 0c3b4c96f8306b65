use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{GreedyError, Result};

/// Generalized degrees of freedom of `fitter` at response `y`.
///
/// Each replication perturbs `y` with i.i.d. `N(0, tau²)` noise and refits.
/// For every observation the fitted value is regressed on its own
/// perturbation across replications; the estimate is the sum of the slopes.
pub fn estimate_gdf<F>(mut fitter: F, y: &Array1<f64>, tau: f64, reps: usize, seed: u64) -> Result<f64>
where
    F: FnMut(&Array1<f64>) -> Result<Array1<f64>>,
{
    let out = estimate_gdf_steps(|y| Ok(vec![fitter(y)?]), y, 1, tau, reps, seed)?;
    Ok(out[0])
}

/// Same as [`estimate_gdf`] for a fitter that returns one fitted vector per
/// path step. Shorter outputs are extended with their last entry.
pub fn estimate_gdf_steps<F>(
    mut fitter: F,
    y: &Array1<f64>,
    steps: usize,
    tau: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>>
where
    F: FnMut(&Array1<f64>) -> Result<Vec<Array1<f64>>>,
{
    if reps < 2 {
        return Err(GreedyError::InvalidConfig("gdf needs at least 2 replications".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(GreedyError::InvalidConfig(format!(
            "perturbation sd must be positive, got {tau}"
        )));
    }
    let n = y.len();
    let normal = Normal::new(0.0, tau).expect("positive sd");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deltas = Array2::<f64>::zeros((reps, n));
    // fitted[step] is reps × n
    let mut fitted = vec![Array2::<f64>::zeros((reps, n)); steps];
    for t in 0..reps {
        let delta = Array1::from_iter((0..n).map(|_| normal.sample(&mut rng)));
        let out = fitter(&(y + &delta))?;
        if out.is_empty() && steps > 0 {
            return Err(GreedyError::EmptyPath);
        }
        for (j, f) in fitted.iter_mut().enumerate() {
            let mu = &out[j.min(out.len() - 1)];
            if mu.len() != n {
                return Err(GreedyError::DimensionMismatch {
                    what: "fitted values",
                    expected: n,
                    found: mu.len(),
                });
            }
            f.row_mut(t).assign(mu);
        }
        deltas.row_mut(t).assign(&delta);
    }
    let centered = |a: ndarray::ArrayView1<f64>| {
        let m = a.sum() / a.len() as f64;
        a.mapv(|v| v - m)
    };
    let dc: Vec<Array1<f64>> = (0..n).map(|i| centered(deltas.column(i))).collect();
    let dss: Vec<f64> = dc.iter().map(|d| d.dot(d)).collect();
    Ok(fitted
        .iter()
        .map(|f| {
            (0..n)
                .map(|i| centered(f.column(i)).dot(&dc[i]) / dss[i])
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_fitter_has_n_df() {
        let y = Array1::from_iter((0..15).map(|i| i as f64));
        let g = estimate_gdf(|y| Ok(y.clone()), &y, 0.5, 10, 3).unwrap();
        assert_abs_diff_eq!(g, 15.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_fitter_has_zero_df() {
        let y = Array1::from_iter((0..15).map(|i| i as f64));
        let g = estimate_gdf(|y| Ok(Array1::zeros(y.len())), &y, 0.5, 10, 3).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let y = Array1::from_iter((0..20).map(|i| (i as f64).sin()));
        let fit = |y: &Array1<f64>| Ok(y.mapv(|v| v.tanh()));
        let a = estimate_gdf(fit, &y, 0.3, 8, 11).unwrap();
        let b = estimate_gdf(fit, &y, 0.3, 8, 11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_bad_config() {
        let y = Array1::zeros(3);
        assert!(estimate_gdf(|y| Ok(y.clone()), &y, 0.5, 1, 0).is_err());
        assert!(estimate_gdf(|y| Ok(y.clone()), &y, 0.0, 5, 0).is_err());
    }
}
