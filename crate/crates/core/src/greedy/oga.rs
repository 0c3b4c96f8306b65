use ndarray::Array1;

use super::{select_regressor, AlgoConfig, Algorithm, GreedyPath, IncrementalCholesky, PathBuilder};
use crate::design::SuffStats;
use crate::error::{GreedyError, Result};

/// Orthogonal greedy algorithm (orthogonal matching pursuit). Selection as in
/// PGA; after each selection the coefficients on the selected set solve
/// `D[S,S]·b_S = c_S` through an incrementally extended Cholesky factor.
///
/// Every candidate carries `L⁻¹·D[S,k]` and its pivot
/// `D[k,k] − |L⁻¹·D[S,k]|²`, one entry appended per step. A candidate whose
/// pivot drops below `proj_tol` lies in the selected span up to rounding and
/// is excluded for the rest of the fit.
pub fn fit_oga(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    cfg.expect(Algorithm::Oga)?;
    let k = stats.k();
    let (c, d) = (stats.c(), stats.d());
    let mut b = Array1::zeros(k);
    let mut g: Array1<f64> = Array1::zeros(k);
    let mut blocked = vec![false; k];
    let mut selected: Vec<usize> = Vec::new();
    let mut chol = IncrementalCholesky::new();
    let mut proj: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut pivot: Vec<f64> = d.diag().to_vec();
    let mut path = PathBuilder::new(stats, cfg);

    for (j, p) in pivot.iter().enumerate() {
        if *p < cfg.proj_tol {
            blocked[j] = true;
            path.exclude(j, *p);
        }
    }

    'steps: for _ in 0..cfg.m_max {
        let a = c - &g;
        let a = a.as_slice().expect("contiguous");
        let s = loop {
            let s = match select_regressor(a, &blocked, false) {
                Ok(s) => s,
                Err(GreedyError::AllExcluded) => {
                    path.converged();
                    break 'steps;
                }
                Err(e) => return Err(e),
            };
            if a[s].abs() < cfg.corr_tol {
                path.converged();
                break 'steps;
            }
            let cross: Vec<f64> = selected.iter().map(|&t| d[[t, s]]).collect();
            match chol.try_push(&cross, d[[s, s]], cfg.proj_tol) {
                Ok(()) => break s,
                Err(p) => {
                    blocked[s] = true;
                    path.exclude(s, p);
                }
            }
        };
        selected.push(s);
        blocked[s] = true;

        let (w_s, l_ss) = (proj[s].clone(), pivot[s].sqrt());
        for j in 0..k {
            if blocked[j] {
                continue;
            }
            let dot: f64 = w_s.iter().zip(&proj[j]).map(|(x, y)| x * y).sum();
            let e = (d[[s, j]] - dot) / l_ss;
            proj[j].push(e);
            pivot[j] -= e * e;
            if pivot[j] < cfg.proj_tol {
                blocked[j] = true;
                path.exclude(j, pivot[j]);
            }
        }

        let rhs: Vec<f64> = selected.iter().map(|&t| c[t]).collect();
        let b_sel = chol.solve(&rhs);
        b.fill(0.0);
        g.fill(0.0);
        for (&t, &v) in selected.iter().zip(&b_sel) {
            b[t] = v;
            g.scaled_add(v, &d.column(t));
        }
        path.push(s, &b, &g, 1.0);
    }
    Ok(path.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::test_support::orthonormal;
    use ndarray::array;

    #[test]
    fn one_step_is_exact_ols() {
        let stats = orthonormal(3);
        let path = fit_oga(&stats, &AlgoConfig::new(Algorithm::Oga, 1)).unwrap();
        let b = path.final_coeffs();
        assert_eq!(b.to_vec(), vec![2.0, 0.0, 0.0]);
        let resid = stats.c() - &stats.d().dot(&b);
        assert!(resid.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn duplicate_column_is_excluded() {
        // Columns 0 and 2 are identical; y loads on columns 0 and 1.
        let d = array![[1.0, 0.2, 1.0], [0.2, 1.0, 0.2], [1.0, 0.2, 1.0]];
        let c = array![1.0, 0.8, 1.0];
        let stats = SuffStats::from_moments(c, d, 50, 2.0).unwrap();
        let path = fit_oga(&stats, &AlgoConfig::new(Algorithm::Oga, 3)).unwrap();
        assert_eq!(path.selections(), vec![0, 1]);
        assert_eq!(path.exclusions().len(), 1);
        assert_eq!(path.exclusions()[0].index, 2);
        assert_eq!(path.exclusions()[0].step, 1);
        assert_eq!(path.converged_at(), Some(2));
    }

    #[test]
    fn zero_column_is_excluded_up_front() {
        let d = array![[1.0, 0.0], [0.0, 0.0]];
        let stats = SuffStats::from_moments(array![0.5, 0.0], d, 10, 1.0).unwrap();
        let path = fit_oga(&stats, &AlgoConfig::new(Algorithm::Oga, 2)).unwrap();
        assert_eq!(path.selections(), vec![0]);
        assert_eq!(path.exclusions()[0].index, 1);
    }
}
