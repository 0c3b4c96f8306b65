use ndarray::Array1;

use super::{
    select_regressor, shrink_and_add, AlgoConfig, Algorithm, GreedyPath, PathBuilder, WeightRule,
};
use crate::design::SuffStats;
use crate::error::Result;

/// Relaxed greedy algorithm.
///
/// Fixed weights: `w_j = 1/j`, `A = c − (1 − w_j)·D·b`, pick the largest
/// `|A_k|`, then `b ← (1 − w_j)·b + A_s·e_s` (or `+ w_j·A_s·e_s` with
/// `rga_weighted_step`).
///
/// Line search: each step solves `min |Y − α·F − γ·X^{(k)}|_n²` over
/// `k`, `α = 1 − w ∈ [0, 1]` and free `γ`, in closed form per candidate.
pub fn fit_rga(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    cfg.expect(Algorithm::Rga)?;
    match cfg.weights {
        WeightRule::Fixed => fixed(stats, cfg),
        WeightRule::LineSearch => line_search(stats, cfg),
    }
}

fn fixed(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    let k = stats.k();
    let mut b = Array1::zeros(k);
    let mut g = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    for j in 1..=cfg.m_max {
        let w = 1.0 / j as f64;
        let a = stats.c() - &(&g * (1.0 - w));
        let a = a.as_slice().expect("contiguous");
        let s = select_regressor(a, &[], false)?;
        if a[s].abs() < cfg.corr_tol {
            path.converged();
            break;
        }
        let coef = if cfg.rga_weighted_step { w * a[s] } else { a[s] };
        shrink_and_add(stats, &mut b, &mut g, 1.0 - w, s, coef);
        path.push(s, &b, &g, w);
    }
    Ok(path.finish())
}

fn line_search(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    let k = stats.k();
    let (c, d, sy2) = (stats.c(), stats.d(), stats.sy2());
    let mut b = Array1::zeros(k);
    let mut g: Array1<f64> = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    for _ in 0..cfg.m_max {
        let corr = c - &g;
        let max_corr = corr.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max_corr < cfg.corr_tol {
            path.converged();
            break;
        }
        // ⟨Y, F⟩ and |F|².
        let yf = b.dot(c);
        let ff = b.dot(&g);
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for j in 0..k {
            let djj = d[[j, j]];
            if djj <= 0.0 {
                continue;
            }
            let (alpha, gamma) = best_alpha_gamma(yf, ff, c[j], g[j], djj);
            let value = sy2 - 2.0 * alpha * yf - 2.0 * gamma * c[j]
                + alpha * alpha * ff
                + 2.0 * alpha * gamma * g[j]
                + gamma * gamma * djj;
            if best.is_none_or(|(_, v, _, _)| value < v) {
                best = Some((j, value, alpha, gamma));
            }
        }
        let Some((s, _, alpha, gamma)) = best else {
            path.converged();
            break;
        };
        shrink_and_add(stats, &mut b, &mut g, alpha, s, gamma);
        path.push(s, &b, &g, 1.0 - alpha);
    }
    Ok(path.finish())
}

/// Minimizer of `|Y − α·F − γ·X|²` over `α ∈ [0, 1]`, `γ ∈ ℝ`, given
/// `⟨Y,F⟩`, `|F|²`, `⟨Y,X⟩`, `⟨F,X⟩`, `|X|²`. Eliminating `γ` leaves the
/// convex profile `q·α² − 2p·α + const`.
fn best_alpha_gamma(yf: f64, ff: f64, yx: f64, fx: f64, xx: f64) -> (f64, f64) {
    let q = ff - fx * fx / xx;
    let p = yf - fx * yx / xx;
    let alpha = if q > 1e-14 * ff.max(f64::MIN_POSITIVE) {
        (p / q).clamp(0.0, 1.0)
    } else {
        // F is (numerically) parallel to X or zero: α does not matter.
        0.0
    };
    (alpha, (yx - alpha * fx) / xx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::test_support::orthonormal;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_is_projection() {
        let stats = orthonormal(3);
        let path = fit_rga(&stats, &AlgoConfig::new(Algorithm::Rga, 1)).unwrap();
        assert_eq!(path.steps()[0].weight, 1.0);
        assert_eq!(path.final_coeffs().to_vec(), vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn second_step_hand_rollout() {
        // A = 2 − ½·2 = 1, b = ½·2 + 1 = 2.
        let stats = orthonormal(3);
        let path = fit_rga(&stats, &AlgoConfig::new(Algorithm::Rga, 2)).unwrap();
        assert_eq!(path.selections(), vec![0, 0]);
        assert_abs_diff_eq!(path.final_coeffs()[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn weighted_step_variant_hand_rollout() {
        // Step 1: b = 1·2 = 2. Step 2: A = 2 − ½·2 = 1, b = ½·2 + ½·1 = 1.5.
        let stats = orthonormal(3);
        let mut cfg = AlgoConfig::new(Algorithm::Rga, 2);
        cfg.rga_weighted_step = true;
        let path = fit_rga(&stats, &cfg).unwrap();
        assert_abs_diff_eq!(path.final_coeffs()[0], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn line_search_first_step_is_projection() {
        let stats = orthonormal(3);
        let cfg = AlgoConfig::new(Algorithm::Rga, 3).with_weights(WeightRule::LineSearch);
        let path = fit_rga(&stats, &cfg).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.steps()[0].weight, 1.0);
        assert_abs_diff_eq!(path.final_coeffs()[0], 2.0, epsilon = 1e-15);
        assert_eq!(path.converged_at(), Some(1));
    }

    #[test]
    fn alpha_gamma_closed_form() {
        // F ⟂ X: keep F entirely when it is the OLS direction for Y.
        let (alpha, gamma) = best_alpha_gamma(1.0, 1.0, 0.5, 0.0, 1.0);
        assert_abs_diff_eq!(alpha, 1.0);
        assert_abs_diff_eq!(gamma, 0.5);
        // Overshooting F gets shrunk.
        let (alpha, _) = best_alpha_gamma(1.0, 4.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(alpha, 0.25);
    }
}
