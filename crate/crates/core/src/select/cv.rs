use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{standardize, RawDesign, SuffStats};
use crate::error::{GreedyError, Result};
use crate::greedy::{fit, predict, AlgoConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldScheme {
    /// Consecutive row blocks, which keeps serially dependent rows together.
    #[default]
    ContiguousBlocks,
    Random,
}

impl fmt::Display for FoldScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FoldScheme::ContiguousBlocks => "contiguous_blocks",
            FoldScheme::Random => "random",
        })
    }
}

impl FromStr for FoldScheme {
    type Err = GreedyError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "contiguous_blocks" | "blocks" | "contiguous" => Ok(FoldScheme::ContiguousBlocks),
            "random" => Ok(FoldScheme::Random),
            other => Err(GreedyError::InvalidConfig(format!("unknown fold scheme `{other}`"))),
        }
    }
}

/// Candidate values for the tuning parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum CvGrid {
    /// Number of steps; one fit per fold covers the whole grid.
    Steps(Vec<usize>),
    /// ℓ1 budgets for CGA/FWA, each fitted with the configured `m_max`.
    Budgets(Vec<f64>),
}

impl CvGrid {
    pub fn len(&self) -> usize {
        match self {
            CvGrid::Steps(v) => v.len(),
            CvGrid::Budgets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            CvGrid::Steps(v) => v[i] as f64,
            CvGrid::Budgets(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub folds: usize,
    pub scheme: FoldScheme,
    pub grid: CvGrid,
    pub seed: u64,
    pub center: bool,
}

impl CvPlan {
    pub fn new(grid: CvGrid) -> Self {
        Self {
            folds: 5,
            scheme: FoldScheme::default(),
            grid,
            seed: 0,
            center: false,
        }
    }

    pub fn with_folds(mut self, folds: usize) -> Self {
        self.folds = folds;
        self
    }

    pub fn with_scheme(mut self, scheme: FoldScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub chosen: f64,
    /// `(candidate, mean validation MSE)` in grid order.
    pub scores: Vec<(f64, f64)>,
}

impl CvResult {
    /// The chosen value as a step count.
    pub fn chosen_steps(&self) -> usize {
        self.chosen as usize
    }
}

/// K-fold cross-validation of `cfg` over `plan.grid`. Standardization is
/// recomputed on each training part and applied to its validation part.
/// Ties go to the smaller candidate.
pub fn cross_validate(raw: &RawDesign, cfg: &AlgoConfig, plan: &CvPlan) -> Result<CvResult> {
    if plan.folds < 2 {
        return Err(GreedyError::InvalidConfig("cross-validation needs at least 2 folds".into()));
    }
    if plan.grid.is_empty() {
        return Err(GreedyError::InvalidConfig("empty cross-validation grid".into()));
    }
    match &plan.grid {
        CvGrid::Steps(v) if v.contains(&0) => {
            return Err(GreedyError::InvalidConfig("step candidates must be positive".into()))
        }
        CvGrid::Budgets(v) => {
            if !cfg.algorithm.is_constrained() {
                return Err(GreedyError::InvalidConfig(format!(
                    "budget grid needs CGA or FWA, got {}",
                    cfg.algorithm
                )));
            }
            if v.iter().any(|b| !(*b > 0.0)) {
                return Err(GreedyError::InvalidConfig("budgets must be positive".into()));
            }
        }
        _ => {}
    }
    cfg.validate()?;

    let folds = fold_assignment(raw.n(), plan)?;
    let mut sums = vec![0.0; plan.grid.len()];
    for holdout in &folds {
        let mut is_val = vec![false; raw.n()];
        for &i in holdout {
            is_val[i] = true;
        }
        let train_rows: Vec<usize> = (0..raw.n()).filter(|&i| !is_val[i]).collect();
        let train = raw.select_rows(&train_rows)?;
        let val = raw.select_rows(holdout)?;
        let design = standardize(&train, plan.center)?;
        let stats = SuffStats::from_design(&design);
        let mse = |path: &crate::greedy::GreedyPath, m: usize| -> Result<f64> {
            let pred = predict(path, m.min(path.len()), val.x().view())?;
            Ok(mean_sq(&(val.y() - &pred)))
        };
        match &plan.grid {
            CvGrid::Steps(grid) => {
                let m_max = *grid.iter().max().expect("nonempty");
                let path = fit(&stats, &cfg.clone().with_m_max(m_max))?;
                for (slot, &m) in sums.iter_mut().zip(grid) {
                    *slot += mse(&path, m)?;
                }
            }
            CvGrid::Budgets(grid) => {
                for (slot, &b_bar) in sums.iter_mut().zip(grid) {
                    let path = fit(&stats, &cfg.clone().with_b_bar(b_bar))?;
                    *slot += mse(&path, path.len())?;
                }
            }
        }
    }
    let n_folds = folds.len() as f64;
    let scores: Vec<(f64, f64)> = sums
        .iter()
        .enumerate()
        .map(|(i, s)| (plan.grid.value(i), s / n_folds))
        .collect();
    let mut best = 0;
    for i in 1..scores.len() {
        let (v, s) = scores[i];
        let (bv, bs) = scores[best];
        if s < bs || (s == bs && v < bv) {
            best = i;
        }
    }
    Ok(CvResult {
        chosen: scores[best].0,
        scores,
    })
}

/// Row indices of each validation fold.
fn fold_assignment(n: usize, plan: &CvPlan) -> Result<Vec<Vec<usize>>> {
    let mut order: Vec<usize> = (0..n).collect();
    if plan.scheme == FoldScheme::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(plan.seed));
    }
    let mut out = Vec::with_capacity(plan.folds);
    for f in 0..plan.folds {
        let (lo, hi) = (f * n / plan.folds, (f + 1) * n / plan.folds);
        if lo == hi {
            return Err(GreedyError::EmptyFold(f));
        }
        let mut rows = order[lo..hi].to_vec();
        rows.sort_unstable();
        out.push(rows);
    }
    Ok(out)
}

fn mean_sq(r: &Array1<f64>) -> f64 {
    r.dot(r) / r.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::Algorithm;
    use ndarray::Array2;
    use rand_distr::{Distribution, StandardNormal};

    fn noiseless(n: usize, k: usize, seed: u64) -> RawDesign {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, k), |_| StandardNormal.sample(&mut rng));
        let y = &x.column(0) * 3.0 + &x.column(1) * 2.0 + &x.column(2) * 1.5;
        RawDesign::new(x, y).unwrap()
    }

    #[test]
    fn single_candidate_is_returned() {
        let raw = noiseless(40, 5, 1);
        let plan = CvPlan::new(CvGrid::Steps(vec![4]));
        let res = cross_validate(&raw, &AlgoConfig::new(Algorithm::Oga, 10), &plan).unwrap();
        assert_eq!(res.chosen_steps(), 4);
    }

    #[test]
    fn noiseless_oga_picks_true_size() {
        let raw = noiseless(60, 10, 7);
        let plan = CvPlan::new(CvGrid::Steps((1..=10).collect()));
        let res = cross_validate(&raw, &AlgoConfig::new(Algorithm::Oga, 10), &plan).unwrap();
        assert_eq!(res.chosen_steps(), 3);
    }

    #[test]
    fn budget_grid_on_single_signal() {
        // y = 2·X₀ with orthogonal ±1 columns.
        let n = 40;
        let x = Array2::from_shape_fn((n, 2), |(i, j)| {
            if j == 0 {
                if i % 2 == 0 { 1.0 } else { -1.0 }
            } else if (i / 2) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        let y = &x.column(0) * 2.0;
        let raw = RawDesign::new(x, y).unwrap();
        let plan = CvPlan::new(CvGrid::Budgets(vec![0.1, 1.0, 10.0]));
        let cfg = AlgoConfig::new(Algorithm::Cga, 200);
        let res = cross_validate(&raw, &cfg, &plan).unwrap();
        assert_eq!(res.chosen, 10.0);
    }

    #[test]
    fn too_few_rows_gives_empty_fold() {
        let raw = noiseless(4, 3, 1);
        let plan = CvPlan::new(CvGrid::Steps(vec![1]));
        assert_eq!(
            cross_validate(&raw, &AlgoConfig::new(Algorithm::Oga, 1), &plan),
            Err(GreedyError::EmptyFold(0))
        );
    }

    #[test]
    fn random_folds_are_seeded() {
        let raw = noiseless(30, 6, 2);
        let plan = CvPlan::new(CvGrid::Steps((1..=6).collect()))
            .with_scheme(FoldScheme::Random)
            .with_seed(9);
        let cfg = AlgoConfig::new(Algorithm::Pga, 6);
        assert_eq!(
            cross_validate(&raw, &cfg, &plan).unwrap(),
            cross_validate(&raw, &cfg, &plan).unwrap()
        );
    }
}
