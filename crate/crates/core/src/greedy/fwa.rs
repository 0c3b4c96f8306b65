use ndarray::Array1;

use super::{
    select_regressor, shrink_and_add, sign, AlgoConfig, Algorithm, GreedyPath, PathBuilder,
    WeightRule,
};
use crate::design::SuffStats;
use crate::error::Result;

/// Frank-Wolfe on the ℓ1 ball of radius `B̄` (or the simplex).
///
/// `A = c − D·b` is the negative half-gradient of `|Y − Xb|_n²`. The vertex
/// `B̄·sign(A_s)·e_s` with `s = argmax |A_k|` is moved towards with weight
/// `w_j = 2/(1 + j)`, or the exact line-search weight in `[0, 1]`. The simplex
/// variant picks `s = argmax A_k` and uses the vertex `e_s`.
pub fn fit_fwa(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    cfg.expect(Algorithm::Fwa)?;
    let k = stats.k();
    let b_bar = cfg.effective_b_bar();
    let c = stats.c();
    let mut b = Array1::zeros(k);
    let mut g: Array1<f64> = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    for j in 1..=cfg.m_max {
        let a = c - &g;
        let a_sl = a.as_slice().expect("contiguous");
        let s = select_regressor(a_sl, &[], cfg.simplex)?;
        let vertex = if cfg.simplex {
            b_bar * sign(a_sl[s]).max(0.0)
        } else {
            b_bar * sign(a_sl[s])
        };
        let stop = if cfg.simplex {
            // Frank-Wolfe gap: ⟨vertex − b, A⟩.
            vertex * a_sl[s] - b.dot(&a) < cfg.corr_tol
        } else {
            a_sl[s].abs() < cfg.corr_tol
        };
        if stop {
            path.converged();
            break;
        }
        let w = match cfg.weights {
            WeightRule::Fixed => 2.0 / (1.0 + j as f64),
            WeightRule::LineSearch => {
                let bc = b.dot(c);
                let ff = b.dot(&g);
                let num = vertex * a_sl[s] - bc + ff;
                let den = vertex * vertex * stats.d()[[s, s]] - 2.0 * vertex * g[s] + ff;
                if den > 0.0 {
                    (num / den).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
        };
        shrink_and_add(stats, &mut b, &mut g, 1.0 - w, s, w * vertex);
        path.push(s, &b, &g, w);
    }
    Ok(path.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::test_support::orthonormal;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_hits_the_vertex() {
        let stats = orthonormal(3);
        let path = fit_fwa(&stats, &AlgoConfig::new(Algorithm::Fwa, 1).with_b_bar(1.0)).unwrap();
        assert_eq!(path.final_coeffs().to_vec(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn fixed_weights_approach_the_constrained_optimum() {
        let stats = orthonormal(3);
        let path = fit_fwa(&stats, &AlgoConfig::new(Algorithm::Fwa, 200).with_b_bar(3.0)).unwrap();
        assert_abs_diff_eq!(path.final_coeffs()[0], 2.0, epsilon = 0.05);
    }

    #[test]
    fn line_search_is_exact_in_one_direction() {
        let stats = orthonormal(3);
        let cfg = AlgoConfig::new(Algorithm::Fwa, 10)
            .with_b_bar(3.0)
            .with_weights(WeightRule::LineSearch);
        let path = fit_fwa(&stats, &cfg).unwrap();
        assert_abs_diff_eq!(path.final_coeffs()[0], 2.0, epsilon = 1e-12);
        assert_eq!(path.converged_at(), Some(1));
    }

    #[test]
    fn simplex_ignores_negative_correlations() {
        let mut c = Array1::zeros(2);
        c[0] = -3.0;
        c[1] = 0.5;
        let stats =
            SuffStats::from_moments(c, ndarray::Array2::eye(2), 50, 10.0).unwrap();
        let cfg = AlgoConfig::new(Algorithm::Fwa, 1).with_simplex(true);
        let path = fit_fwa(&stats, &cfg).unwrap();
        assert_eq!(path.selections(), vec![1]);
    }
}
