use ndarray::Array1;

use super::{select_regressor, shrink_and_add, AlgoConfig, Algorithm, GreedyPath, PathBuilder};
use crate::design::SuffStats;
use crate::error::Result;

/// Pure greedy algorithm (L2-Boosting): `A = c − D·b`, pick the largest
/// `|A_k|`, move that coefficient by `ν·A_s`.
pub fn fit_pga(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    cfg.expect(Algorithm::Pga)?;
    let k = stats.k();
    let mut b = Array1::zeros(k);
    let mut g = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    for _ in 0..cfg.m_max {
        let a = stats.c() - &g;
        let a = a.as_slice().expect("contiguous");
        let s = select_regressor(a, &[], false)?;
        if a[s].abs() < cfg.corr_tol {
            path.converged();
            break;
        }
        shrink_and_add(stats, &mut b, &mut g, 1.0, s, cfg.nu * a[s]);
        path.push(s, &b, &g, cfg.nu);
    }
    Ok(path.finish())
}
