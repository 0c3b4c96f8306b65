//! The five greedy algorithms, run on sufficient statistics.
//!
//! Every fit keeps the coefficient vector `b` and the product `g = D·b`, so a
//! step costs `O(K)` for the single-coordinate updates (PGA, RGA, CGA, FWA)
//! and `O(K·|S|)` for OGA, which refits on the selected set `S`.

mod cga;
mod cholesky;
mod fwa;
mod oga;
mod pga;
mod rga;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView2};

use crate::design::{Standardization, SuffStats};
use crate::error::{GreedyError, Result};

pub use cga::fit_cga;
pub use cholesky::IncrementalCholesky;
pub use fwa::fit_fwa;
pub use oga::fit_oga;
pub use pga::fit_pga;
pub use rga::fit_rga;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Pga,
    Oga,
    Rga,
    Cga,
    Fwa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pga,
        Algorithm::Oga,
        Algorithm::Rga,
        Algorithm::Cga,
        Algorithm::Fwa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pga => "PGA",
            Algorithm::Oga => "OGA",
            Algorithm::Rga => "RGA",
            Algorithm::Cga => "CGA",
            Algorithm::Fwa => "FWA",
        }
    }

    /// CGA and FWA are tuned through the ℓ1 budget, the others through `m`.
    pub fn is_constrained(self) -> bool {
        matches!(self, Algorithm::Cga | Algorithm::Fwa)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = GreedyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pga" => Ok(Algorithm::Pga),
            "oga" => Ok(Algorithm::Oga),
            "rga" => Ok(Algorithm::Rga),
            "cga" => Ok(Algorithm::Cga),
            "fwa" => Ok(Algorithm::Fwa),
            other => Err(GreedyError::InvalidConfig(format!(
                "unknown algorithm `{other}`"
            ))),
        }
    }
}

/// Weight rule for the convex-combination algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightRule {
    /// `w_j = 1/j` for RGA and CGA, `w_j = 2/(1+j)` for FWA.
    #[default]
    Fixed,
    /// Weight chosen per step by exact minimization of the residual norm.
    LineSearch,
}

impl FromStr for WeightRule {
    type Err = GreedyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(WeightRule::Fixed),
            "line_search" | "linesearch" => Ok(WeightRule::LineSearch),
            other => Err(GreedyError::InvalidConfig(format!(
                "unknown weight rule `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    /// Iteration budget `m`.
    pub m_max: usize,
    /// PGA shrinkage `ν ∈ (0, 1]`.
    pub nu: f64,
    /// ℓ1 budget `B̄` for CGA and FWA.
    pub b_bar: f64,
    pub weights: WeightRule,
    /// Restrict CGA/FWA coefficients to the simplex (forecast combination).
    pub simplex: bool,
    /// Stop once the largest residual correlation drops below this.
    pub corr_tol: f64,
    /// OGA collinearity guard on the Cholesky pivot.
    pub proj_tol: f64,
    /// RGA only: also multiply the new coefficient by `w_j`, i.e.
    /// `b ← (1 − 1/j)·b + (1/j)·A_s·e_s`, as in the one-line vectorized
    /// listing. The default adds the full `A_s`.
    pub rga_weighted_step: bool,
}

impl AlgoConfig {
    pub fn new(algorithm: Algorithm, m_max: usize) -> Self {
        Self {
            algorithm,
            m_max,
            nu: 0.1,
            b_bar: 1.0,
            weights: WeightRule::Fixed,
            simplex: false,
            corr_tol: 1e-12,
            proj_tol: 1e-10,
            rga_weighted_step: false,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_b_bar(mut self, b_bar: f64) -> Self {
        self.b_bar = b_bar;
        self
    }

    pub fn with_weights(mut self, weights: WeightRule) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_simplex(mut self, simplex: bool) -> Self {
        self.simplex = simplex;
        self
    }

    pub fn with_m_max(mut self, m_max: usize) -> Self {
        self.m_max = m_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GreedyError::InvalidConfig(msg));
        if self.m_max == 0 {
            return bad("m_max must be positive".into());
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return bad(format!("nu must lie in (0, 1], got {}", self.nu));
        }
        if self.algorithm.is_constrained() && !(self.b_bar > 0.0 && self.b_bar.is_finite()) {
            return bad(format!("b_bar must be positive and finite, got {}", self.b_bar));
        }
        if !(self.corr_tol >= 0.0 && self.proj_tol >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        if self.weights == WeightRule::LineSearch
            && matches!(self.algorithm, Algorithm::Pga | Algorithm::Oga)
        {
            return bad(format!("{} has no weight rule", self.algorithm));
        }
        if self.simplex && !self.algorithm.is_constrained() {
            return bad(format!("simplex variant only exists for CGA and FWA, not {}", self.algorithm));
        }
        if self.rga_weighted_step
            && (self.algorithm != Algorithm::Rga || self.weights != WeightRule::Fixed)
        {
            return bad("rga_weighted_step applies to RGA with fixed weights only".into());
        }
        Ok(())
    }

    /// The ℓ1 budget actually enforced: the simplex CGA always uses 1.
    pub fn effective_b_bar(&self) -> f64 {
        if self.algorithm == Algorithm::Cga && self.simplex {
            1.0
        } else {
            self.b_bar
        }
    }

    fn expect(&self, algorithm: Algorithm) -> Result<()> {
        if self.algorithm != algorithm {
            return Err(GreedyError::InvalidConfig(format!(
                "config is for {}, expected {algorithm}",
                self.algorithm
            )));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub selected: usize,
    /// Coefficients after the step, on the standardized scale.
    pub coeffs: Array1<f64>,
    /// In-sample `|Y − F_j|_n²`.
    pub rss_n: f64,
    /// `ν` for PGA, 1 for OGA, `w_j` otherwise.
    pub weight: f64,
}

/// OGA candidate dropped by the collinearity guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exclusion {
    pub step: usize,
    pub index: usize,
    pub pivot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPath {
    steps: Vec<Step>,
    converged_at: Option<usize>,
    exclusions: Vec<Exclusion>,
    config: AlgoConfig,
    standardization: Standardization,
    sy2: f64,
}

impl GreedyPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of completed steps when the correlation test stopped the fit.
    pub fn converged_at(&self) -> Option<usize> {
        self.converged_at
    }

    pub fn exclusions(&self) -> &[Exclusion] {
        &self.exclusions
    }

    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn k(&self) -> usize {
        self.standardization.k()
    }

    pub fn selections(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.selected).collect()
    }

    fn check_step(&self, at_step: usize) -> Result<()> {
        if at_step > self.len() {
            return Err(GreedyError::StepOutOfRange {
                step: at_step,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Coefficients after `at_step` steps; step 0 is the zero fit.
    pub fn coeffs_at(&self, at_step: usize) -> Result<Array1<f64>> {
        self.check_step(at_step)?;
        Ok(match at_step {
            0 => Array1::zeros(self.k()),
            m => self.steps[m - 1].coeffs.clone(),
        })
    }

    pub fn rss_at(&self, at_step: usize) -> Result<f64> {
        self.check_step(at_step)?;
        Ok(match at_step {
            0 => self.sy2,
            m => self.steps[m - 1].rss_n,
        })
    }

    pub fn final_coeffs(&self) -> Array1<f64> {
        self.steps
            .last()
            .map_or_else(|| Array1::zeros(self.k()), |s| s.coeffs.clone())
    }

    /// Coefficients mapped back to the raw regressor scale, plus the
    /// intercept implied by centering (zero when uncentered).
    pub fn raw_coeffs_at(&self, at_step: usize) -> Result<(Array1<f64>, f64)> {
        let raw = self.coeffs_at(at_step)? / self.standardization.scale();
        let intercept = self
            .standardization
            .mean()
            .map_or(0.0, |mean| -mean.dot(&raw));
        Ok((raw, intercept))
    }

    /// Keeps the first `m` steps.
    pub fn truncated(&self, m: usize) -> Result<GreedyPath> {
        self.check_step(m)?;
        let mut out = self.clone();
        out.steps.truncate(m);
        out.exclusions.retain(|e| e.step <= m);
        if out.converged_at.is_some_and(|c| c > m) {
            out.converged_at = None;
        }
        Ok(out)
    }
}

/// Index of the largest `|a_k|` (or `a_k` when `signed`) over indices not
/// flagged in `excluded`; ties go to the smaller index. An empty mask
/// excludes nothing.
pub fn select_regressor(a: &[f64], excluded: &[bool], signed: bool) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in a.iter().enumerate() {
        if excluded.get(k).copied().unwrap_or(false) {
            continue;
        }
        let score = if signed { v } else { v.abs() };
        match best {
            Some((_, s)) if score <= s => {}
            _ if score.is_nan() => {}
            _ => best = Some((k, score)),
        }
    }
    best.map(|(k, _)| k).ok_or(GreedyError::AllExcluded)
}

/// Runs the algorithm named in the config.
pub fn fit(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    match cfg.algorithm {
        Algorithm::Pga => fit_pga(stats, cfg),
        Algorithm::Oga => fit_oga(stats, cfg),
        Algorithm::Rga => fit_rga(stats, cfg),
        Algorithm::Cga => fit_cga(stats, cfg),
        Algorithm::Fwa => fit_fwa(stats, cfg),
    }
}

/// Standardizes `x_new` with the path's stored scales and applies the
/// coefficients after `at_step` steps.
pub fn predict(path: &GreedyPath, at_step: usize, x_new: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let coeffs = path.coeffs_at(at_step)?;
    let xs = path.standardization.apply(x_new)?;
    Ok(xs.dot(&coeffs))
}

/// Collects steps while a fit runs.
pub(crate) struct PathBuilder<'a> {
    stats: &'a SuffStats,
    config: AlgoConfig,
    steps: Vec<Step>,
    exclusions: Vec<Exclusion>,
    converged_at: Option<usize>,
}

impl<'a> PathBuilder<'a> {
    pub(crate) fn new(stats: &'a SuffStats, config: &AlgoConfig) -> Self {
        Self {
            stats,
            config: config.clone(),
            steps: Vec::with_capacity(config.m_max.min(1 << 16)),
            exclusions: Vec::new(),
            converged_at: None,
        }
    }

    /// Records a step; `g` must equal `D·b`.
    pub(crate) fn push(&mut self, selected: usize, b: &Array1<f64>, g: &Array1<f64>, weight: f64) {
        let s = self.stats;
        let rss_n = s.sy2() - 2.0 * b.dot(s.c()) + b.dot(g);
        self.steps.push(Step {
            selected,
            coeffs: b.clone(),
            rss_n,
            weight,
        });
    }

    pub(crate) fn exclude(&mut self, index: usize, pivot: f64) {
        self.exclusions.push(Exclusion {
            step: self.steps.len() + 1,
            index,
            pivot,
        });
    }

    pub(crate) fn converged(&mut self) {
        self.converged_at = Some(self.steps.len());
    }

    pub(crate) fn finish(self) -> GreedyPath {
        let standardization = self
            .stats
            .standardization()
            .cloned()
            .unwrap_or_else(|| Standardization::identity(self.stats.k()));
        GreedyPath {
            steps: self.steps,
            converged_at: self.converged_at,
            exclusions: self.exclusions,
            config: self.config,
            standardization,
            sy2: self.stats.sy2(),
        }
    }
}

/// `sign(x)` with `sign(0) = 0`.
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `b ← scale·b + coef·e_s` together with `g ← scale·g + coef·D[:, s]`.
pub(crate) fn shrink_and_add(
    stats: &SuffStats,
    b: &mut Array1<f64>,
    g: &mut Array1<f64>,
    scale: f64,
    s: usize,
    coef: f64,
) {
    if scale != 1.0 {
        *b *= scale;
        *g *= scale;
    }
    b[s] += coef;
    g.scaled_add(coef, &stats.d().column(s));
}


#[cfg(test)]
mod tests {
    use super::*;
    use test_support::orthonormal;

    #[test]
    fn select_ties_go_to_smaller_index() {
        assert_eq!(select_regressor(&[0.5, -0.9, 0.9], &[], false).unwrap(), 1);
    }

    #[test]
    fn select_signed_uses_raw_values() {
        assert_eq!(select_regressor(&[0.5, -0.9, 0.9], &[], true).unwrap(), 2);
    }

    #[test]
    fn select_zero_vector_returns_first() {
        assert_eq!(select_regressor(&[0.0, 0.0, 0.0], &[], false).unwrap(), 0);
    }

    #[test]
    fn select_respects_mask() {
        assert_eq!(
            select_regressor(&[0.5, -0.9, 0.9], &[false, true, false], false).unwrap(),
            2
        );
        assert_eq!(
            select_regressor(&[0.5, 0.1], &[true, true], false).unwrap_err(),
            GreedyError::AllExcluded
        );
    }

    #[test]
    fn zero_correlations_stop_immediately() {
        let stats =
            SuffStats::from_moments(Array1::zeros(3), ndarray::Array2::eye(3), 10, 1.0).unwrap();
        for alg in Algorithm::ALL {
            let path = fit(&stats, &AlgoConfig::new(alg, 5)).unwrap();
            assert!(path.is_empty(), "{alg}");
            assert_eq!(path.converged_at(), Some(0));
        }
    }

    #[test]
    fn config_validation() {
        assert!(AlgoConfig::new(Algorithm::Pga, 0).validate().is_err());
        assert!(AlgoConfig::new(Algorithm::Pga, 1).with_nu(0.0).validate().is_err());
        assert!(AlgoConfig::new(Algorithm::Pga, 1).with_nu(1.5).validate().is_err());
        assert!(AlgoConfig::new(Algorithm::Cga, 1).with_b_bar(0.0).validate().is_err());
        assert!(AlgoConfig::new(Algorithm::Oga, 1)
            .with_weights(WeightRule::LineSearch)
            .validate()
            .is_err());
        assert!(AlgoConfig::new(Algorithm::Rga, 1).with_simplex(true).validate().is_err());
        assert!(AlgoConfig::new(Algorithm::Fwa, 1).with_simplex(true).validate().is_ok());
        assert!(fit_pga(&orthonormal(2), &AlgoConfig::new(Algorithm::Oga, 1)).is_err());
    }

    #[test]
    fn predict_zero_and_identity_scale() {
        let stats = orthonormal(3);
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 1)).unwrap();
        let x_new = ndarray::array![[1.0, 5.0, -3.0]];
        assert_eq!(predict(&path, 0, x_new.view()).unwrap()[0], 0.0);
        assert!((predict(&path, 1, x_new.view()).unwrap()[0] - 2.0).abs() < 1e-15);
        assert!(matches!(
            predict(&path, 2, x_new.view()),
            Err(GreedyError::StepOutOfRange { .. })
        ));
        assert!(matches!(
            predict(&path, 1, ndarray::array![[1.0, 2.0]].view()),
            Err(GreedyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("lars".parse::<Algorithm>().is_err());
    }
}
