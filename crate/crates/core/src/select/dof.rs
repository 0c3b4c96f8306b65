use ndarray::{Array1, Array2};

use super::gdf::estimate_gdf_steps;
use crate::design::{StandardizedDesign, SuffStats};
use crate::error::{GreedyError, Result};
use crate::greedy::{fit, Algorithm, GreedyPath};

/// Coefficients below this magnitude do not count as active.
pub const NONZERO_TOL: f64 = 1e-12;

/// Settings for the Monte Carlo df estimate used by RGA.
#[derive(Debug, Clone, PartialEq)]
pub struct DofOptions {
    pub gdf_reps: usize,
    /// Perturbation sd; `None` means half the sample sd of `y`.
    pub gdf_tau: Option<f64>,
    pub seed: u64,
}

impl Default for DofOptions {
    fn default() -> Self {
        Self {
            gdf_reps: 20,
            gdf_tau: None,
            seed: 0,
        }
    }
}

impl DofOptions {
    pub(crate) fn tau_for(&self, y: &Array1<f64>) -> f64 {
        self.gdf_tau.unwrap_or_else(|| 0.5 * sample_sd(y))
    }
}

/// Degrees of freedom of the fit after `at_step` steps.
pub fn dof(
    path: &GreedyPath,
    design: Option<&StandardizedDesign>,
    at_step: usize,
    opts: &DofOptions,
) -> Result<f64> {
    if at_step > path.len() {
        return Err(GreedyError::StepOutOfRange {
            step: at_step,
            len: path.len(),
        });
    }
    if at_step == 0 {
        return Ok(0.0);
    }
    match path.config().algorithm {
        Algorithm::Pga | Algorithm::Rga => {
            let truncated = path.truncated(at_step)?;
            Ok(*dof_path(&truncated, design, opts)?.last().expect("nonempty"))
        }
        _ => Ok(dof_path(path, design, opts)?[at_step - 1]),
    }
}

/// Degrees of freedom at every step `1..=path.len()`.
///
/// PGA: trace of `I − Π_j (I − ν·x_s xᵀ_s / xᵀ_s x_s)`, accumulated by applying
/// each factor to the running n×n product. OGA: number of distinct selected
/// regressors. CGA/FWA: number of nonzero coefficients. RGA: generalized
/// degrees of freedom by perturbation.
pub fn dof_path(
    path: &GreedyPath,
    design: Option<&StandardizedDesign>,
    opts: &DofOptions,
) -> Result<Vec<f64>> {
    let alg = path.config().algorithm;
    match alg {
        Algorithm::Pga => {
            let design = design.ok_or(GreedyError::NeedsRawDesign("PGA"))?;
            check_width(path, design)?;
            Ok(pga_traces(path, design))
        }
        Algorithm::Rga => {
            let design = design.ok_or(GreedyError::NeedsRawDesign("RGA"))?;
            check_width(path, design)?;
            rga_gdf(path, design, opts)
        }
        Algorithm::Oga => {
            let mut seen = vec![false; path.k()];
            let mut count = 0usize;
            Ok(path
                .steps()
                .iter()
                .map(|s| {
                    if !seen[s.selected] {
                        seen[s.selected] = true;
                        count += 1;
                    }
                    count as f64
                })
                .collect())
        }
        Algorithm::Cga | Algorithm::Fwa => Ok(path
            .steps()
            .iter()
            .map(|s| s.coeffs.iter().filter(|b| b.abs() > NONZERO_TOL).count() as f64)
            .collect()),
    }
}

fn check_width(path: &GreedyPath, design: &StandardizedDesign) -> Result<()> {
    if design.k() != path.k() {
        return Err(GreedyError::DimensionMismatch {
            what: "design columns",
            expected: path.k(),
            found: design.k(),
        });
    }
    Ok(())
}

fn pga_traces(path: &GreedyPath, design: &StandardizedDesign) -> Vec<f64> {
    let n = design.n();
    let nu = path.config().nu;
    let x = design.x();
    // Running product of the (I − ν·P_j) factors.
    let mut prod = Array2::<f64>::eye(n);
    let mut out = Vec::with_capacity(path.len());
    for step in path.steps() {
        let col = x.column(step.selected);
        let norm2 = col.dot(&col);
        let proj = col.dot(&prod) * (nu / norm2);
        for (i, ci) in col.iter().enumerate() {
            let mut row = prod.row_mut(i);
            row.scaled_add(-ci, &proj);
        }
        let tr: f64 = prod.diag().sum();
        out.push(n as f64 - tr);
    }
    out
}

fn rga_gdf(path: &GreedyPath, design: &StandardizedDesign, opts: &DofOptions) -> Result<Vec<f64>> {
    if path.is_empty() {
        return Ok(Vec::new());
    }
    let cfg = path.config().clone().with_m_max(path.len());
    let x = design.x();
    let fitter = |y: &Array1<f64>| -> Result<Vec<Array1<f64>>> {
        let stats = SuffStats::from_design(&design.with_response(y.clone())?);
        let p = fit(&stats, &cfg)?;
        Ok(p.steps().iter().map(|s| x.dot(&s.coeffs)).collect())
    };
    let tau = opts.tau_for(design.y());
    estimate_gdf_steps(fitter, design.y(), path.len(), tau, opts.gdf_reps, opts.seed)
}

pub fn sample_sd(y: &Array1<f64>) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let mean = y.sum() / n as f64;
    let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{standardize, RawDesign};
    use crate::greedy::AlgoConfig;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn two_col() -> StandardizedDesign {
        let x = array![[1.0, 0.5], [2.0, -1.0], [-1.0, 0.3], [0.5, 2.0]];
        let y = array![1.0, 2.0, -1.0, 0.4];
        standardize(&RawDesign::new(x, y).unwrap(), false).unwrap()
    }

    #[test]
    fn pga_single_full_step_is_rank_one_projection() {
        let design = two_col();
        let stats = SuffStats::from_design(&design);
        let cfg = AlgoConfig::new(Algorithm::Pga, 1).with_nu(1.0);
        let path = fit(&stats, &cfg).unwrap();
        let df = dof(&path, Some(&design), 1, &DofOptions::default()).unwrap();
        assert_abs_diff_eq!(df, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pga_repeated_column_compounds() {
        // y proportional to the first column: PGA keeps picking it.
        let x = array![[1.0, 0.5], [2.0, -1.0], [-1.0, 0.3], [0.5, 2.0]];
        let y = x.column(0).to_owned();
        let design = standardize(&RawDesign::new(x, y).unwrap(), false).unwrap();
        let stats = SuffStats::from_design(&design);
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Pga, 2)).unwrap();
        assert_eq!(path.selections(), vec![0, 0]);
        let df = dof(&path, Some(&design), 2, &DofOptions::default()).unwrap();
        assert_abs_diff_eq!(df, 0.19, epsilon = 1e-12);
    }

    #[test]
    fn pga_needs_design() {
        let design = two_col();
        let stats = SuffStats::from_design(&design);
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Pga, 1)).unwrap();
        assert_eq!(
            dof(&path, None, 1, &DofOptions::default()),
            Err(GreedyError::NeedsRawDesign("PGA"))
        );
    }

    #[test]
    fn oga_df_counts_steps() {
        let k = 6;
        let d = Array2::eye(k);
        let c = Array1::from_iter((0..k).map(|i| 1.0 + i as f64));
        let stats = SuffStats::from_moments(c, d, 50, 100.0).unwrap();
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 5)).unwrap();
        assert_eq!(dof(&path, None, 5, &DofOptions::default()).unwrap(), 5.0);
    }

    #[test]
    fn constrained_df_counts_nonzeros() {
        let stats = crate::greedy::test_support::orthonormal(3);
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Fwa, 3)).unwrap();
        assert_eq!(dof(&path, None, 3, &DofOptions::default()).unwrap(), 1.0);
    }
}
