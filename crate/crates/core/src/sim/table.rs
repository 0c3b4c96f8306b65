use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::dgp::{gen_sample_rows, CoeffScheme, DgpSpec, Sample, ThetaCase};
use crate::design::{standardize, SuffStats};
use crate::error::{GreedyError, Result};
use crate::greedy::{fit, predict, AlgoConfig, Algorithm, GreedyPath};
use crate::select::{cross_validate, select_m_by_ic, Criterion, CvGrid, CvPlan, DofOptions, FoldScheme};

/// Environment variable capping worker threads; `0` runs sequentially.
pub const THREADS_ENV: &str = "GREEDY_PREDICT_THREADS";

/// How the tuning parameter of an algorithm is picked in each replication.
#[derive(Debug, Clone, PartialEq)]
pub enum Tuning {
    /// Use the configuration as given and evaluate at the last step.
    Fixed,
    /// Cross-validate `m` over `1..=m_max` (PGA/OGA/RGA) or the budget over
    /// `budget_multipliers × sd(y)` (CGA/FWA).
    Cv { folds: usize, scheme: FoldScheme },
    /// Pick `m` by an information criterion.
    Ic(Criterion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoSpec {
    pub label: String,
    pub config: AlgoConfig,
}

impl AlgoSpec {
    pub fn new(config: AlgoConfig) -> Self {
        Self {
            label: config.algorithm.name().to_string(),
            config,
        }
    }
}

/// Default line-up: PGA (ν = 0.1) and RGA up to 500 steps, OGA up to 100,
/// CGA and FWA with 1000 steps.
pub fn default_algorithms() -> Vec<AlgoSpec> {
    vec![
        AlgoSpec::new(AlgoConfig::new(Algorithm::Pga, 500)),
        AlgoSpec::new(AlgoConfig::new(Algorithm::Oga, 100)),
        AlgoSpec::new(AlgoConfig::new(Algorithm::Rga, 500)),
        AlgoSpec::new(AlgoConfig::new(Algorithm::Cga, 1000)),
        AlgoSpec::new(AlgoConfig::new(Algorithm::Fwa, 1000)),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablePlan {
    /// One entry per cell; the `seed` field is ignored.
    pub cells: Vec<DgpSpec>,
    pub algorithms: Vec<AlgoSpec>,
    pub reps: usize,
    pub tuning: Tuning,
    pub budget_multipliers: Vec<f64>,
    pub n_eval: usize,
    pub master_seed: u64,
}

impl TablePlan {
    pub fn new(cells: Vec<DgpSpec>) -> Self {
        Self {
            cells,
            algorithms: default_algorithms(),
            reps: 100,
            tuning: Tuning::Cv {
                folds: 5,
                scheme: FoldScheme::ContiguousBlocks,
            },
            budget_multipliers: log_grid(0.05, 20.0, 16),
            n_eval: 2000,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(GreedyError::InvalidConfig("reps must be at least 1".into()));
        }
        if self.n_eval == 0 {
            return Err(GreedyError::InvalidConfig("n_eval must be at least 1".into()));
        }
        if self.cells.is_empty() || self.algorithms.is_empty() {
            return Err(GreedyError::InvalidConfig("table needs at least one cell and one algorithm".into()));
        }
        if self.budget_multipliers.is_empty() || self.budget_multipliers.iter().any(|m| !(*m > 0.0)) {
            return Err(GreedyError::InvalidConfig("budget multipliers must be positive".into()));
        }
        for c in &self.cells {
            c.validate()?;
        }
        for a in &self.algorithms {
            a.config.validate()?;
        }
        Ok(())
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Aggregate for one cell and one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: usize,
    pub theta_case: ThetaCase,
    pub omega: f64,
    pub sigma2: f64,
    pub n: usize,
    pub scheme: CoeffScheme,
    pub algorithm: String,
    pub mise_mean: f64,
    pub mise_sd: f64,
    /// Successful replications.
    pub reps: usize,
    pub failures: usize,
    /// Mean of the tuned value (`m` or budget) over successful replications.
    pub mean_tuned: f64,
    pub mean_runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub results: Vec<CellResult>,
    pub requested_reps: usize,
}

impl MonteCarloReport {
    pub fn get(&self, cell: usize, algorithm: &str) -> Option<&CellResult> {
        self.results
            .iter()
            .find(|r| r.cell == cell && r.algorithm == algorithm)
    }

    /// Results whose failure count exceeds `fraction` of the requested reps.
    pub fn failing(&self, fraction: f64) -> Vec<&CellResult> {
        self.results
            .iter()
            .filter(|r| r.failures as f64 > fraction * self.requested_reps as f64)
            .collect()
    }

    /// One row per cell and algorithm. Timings are left out so the file is
    /// reproducible.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "case,omega,sigma2,n,scheme,algorithm,mise_mean,mise_sd,reps,failures,mean_tuned\n",
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6},{},{},{:.6}",
                r.theta_case, r.omega, r.sigma2, r.n, r.scheme, r.algorithm, r.mise_mean,
                r.mise_sd, r.reps, r.failures, r.mean_tuned
            );
        }
        out
    }

    /// Rows are `(ω, σ²)` pairs grouped by case; columns are algorithms
    /// within each sample size.
    pub fn to_table(&self) -> String {
        let mut algs: Vec<&str> = Vec::new();
        let mut ns: Vec<usize> = Vec::new();
        let mut rows: Vec<(String, f64, f64, String)> = Vec::new();
        for r in &self.results {
            if !algs.contains(&r.algorithm.as_str()) {
                algs.push(&r.algorithm);
            }
            if !ns.contains(&r.n) {
                ns.push(r.n);
            }
            let key = (r.theta_case.to_string(), r.omega, r.sigma2, r.scheme.to_string());
            if !rows.contains(&key) {
                rows.push(key);
            }
        }
        let mut out = String::new();
        let _ = write!(out, "{:<16} {:>6} {:>7}", "case", "omega", "sigma2");
        for n in &ns {
            for a in &algs {
                let _ = write!(out, " {:>9}", format!("{a}/{n}"));
            }
        }
        out.push('\n');
        let mut last_case = String::new();
        for (case, omega, sigma2, scheme) in &rows {
            let label = if *case == last_case { String::new() } else { case.clone() };
            last_case = case.clone();
            let _ = write!(out, "{label:<16} {omega:>6} {sigma2:>7}");
            for n in &ns {
                for a in &algs {
                    let cell = self.results.iter().find(|r| {
                        r.theta_case.to_string() == *case
                            && r.omega == *omega
                            && r.sigma2 == *sigma2
                            && r.scheme.to_string() == *scheme
                            && r.n == *n
                            && r.algorithm == *a
                    });
                    match cell {
                        Some(c) if c.reps > 0 => {
                            let _ = write!(out, " {:>9.2}", c.mise_mean);
                        }
                        _ => {
                            let _ = write!(out, " {:>9}", "-");
                        }
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Mean squared distance between the true regression function and the fit on
/// a fresh sample of `n_eval` rows.
pub fn mise(path: &GreedyPath, at_step: usize, spec: &DgpSpec, n_eval: usize, eval_seed: u64) -> Result<f64> {
    let sample = gen_sample_rows(spec, n_eval, eval_seed)?;
    mise_on(path, at_step, &sample)
}

/// [`mise`] on an existing evaluation sample.
pub fn mise_on(path: &GreedyPath, at_step: usize, sample: &Sample) -> Result<f64> {
    let pred = predict(path, at_step, sample.design.x().view())?;
    let diff = &sample.mu0 - &pred;
    Ok(diff.dot(&diff) / diff.len() as f64)
}

/// splitmix64 finalizer over `(master, cell, rep, stream)`.
pub fn derive_seed(master: u64, cell: u64, rep: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut h = mix(master);
    for v in [cell, rep, stream] {
        h = mix(h ^ v);
    }
    h
}

/// Worker threads from [`THREADS_ENV`]: `Some(0)` for sequential, `None` when
/// unset or unparsable.
pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}

struct RepOutcome {
    mise: f64,
    tuned: f64,
    secs: f64,
}

/// Runs every replication of every cell. Replications are independent given
/// their derived seeds and are reduced in `(cell, rep)` order, so results do
/// not depend on the thread count.
pub fn run_table(plan: &TablePlan) -> Result<MonteCarloReport> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = (0..plan.cells.len())
        .flat_map(|c| (0..plan.reps).map(move |r| (c, r)))
        .collect();
    let work = |&(c, r): &(usize, usize)| run_rep(plan, c, r);
    let outcomes: Vec<Vec<Result<RepOutcome>>> = match thread_count() {
        Some(0) => jobs.iter().map(work).collect(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| GreedyError::InvalidConfig(e.to_string()))?
            .install(|| jobs.par_iter().map(work).collect()),
        None => jobs.par_iter().map(work).collect(),
    };

    let mut results = Vec::new();
    for (c, spec) in plan.cells.iter().enumerate() {
        for (a, algo) in plan.algorithms.iter().enumerate() {
            let mut ok = Vec::new();
            let mut failures = 0;
            for r in 0..plan.reps {
                match &outcomes[c * plan.reps + r][a] {
                    Ok(o) => ok.push(o),
                    Err(_) => failures += 1,
                }
            }
            let k = ok.len() as f64;
            let mean = ok.iter().map(|o| o.mise).sum::<f64>() / k;
            let sd = if ok.len() > 1 {
                (ok.iter().map(|o| (o.mise - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            results.push(CellResult {
                cell: c,
                theta_case: spec.theta_case,
                omega: spec.omega,
                sigma2: spec.sigma2,
                n: spec.n,
                scheme: spec.coeff_scheme.clone(),
                algorithm: algo.label.clone(),
                mise_mean: if ok.is_empty() { f64::NAN } else { mean },
                mise_sd: sd,
                reps: ok.len(),
                failures,
                mean_tuned: ok.iter().map(|o| o.tuned).sum::<f64>() / k,
                mean_runtime_secs: ok.iter().map(|o| o.secs).sum::<f64>() / k,
            });
        }
    }
    Ok(MonteCarloReport {
        results,
        requested_reps: plan.reps,
    })
}

fn run_rep(plan: &TablePlan, cell: usize, rep: usize) -> Vec<Result<RepOutcome>> {
    let spec = &plan.cells[cell];
    let (c, r) = (cell as u64, rep as u64);
    let train = gen_sample_rows(spec, spec.n, derive_seed(plan.master_seed, c, r, 0));
    let eval = gen_sample_rows(spec, plan.n_eval, derive_seed(plan.master_seed, c, r, 1));
    let (train, eval) = match (train, eval) {
        (Ok(t), Ok(e)) => (t, e),
        (Err(e), _) | (_, Err(e)) => return plan.algorithms.iter().map(|_| Err(e.clone())).collect(),
    };
    let cv_seed = derive_seed(plan.master_seed, c, r, 2);
    plan.algorithms
        .iter()
        .map(|algo| {
            let start = Instant::now();
            let (path, step, tuned) = tune_and_fit(plan, &algo.config, &train, cv_seed)?;
            let mise = mise_on(&path, step, &eval)?;
            Ok(RepOutcome {
                mise,
                tuned,
                secs: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Returns the final path, the step to evaluate and the tuned value.
fn tune_and_fit(
    plan: &TablePlan,
    cfg: &AlgoConfig,
    train: &Sample,
    cv_seed: u64,
) -> Result<(GreedyPath, usize, f64)> {
    let raw = &train.design;
    let design = standardize(raw, false)?;
    let stats = SuffStats::from_design(&design);
    match &plan.tuning {
        Tuning::Fixed => {
            let path = fit(&stats, cfg)?;
            let m = path.len();
            Ok((path, m, m as f64))
        }
        Tuning::Ic(criterion) => {
            let path = fit(&stats, cfg)?;
            if path.is_empty() {
                return Ok((path, 0, 0.0));
            }
            let opts = DofOptions {
                seed: cv_seed,
                ..DofOptions::default()
            };
            let trace = select_m_by_ic(&path, Some(&design), raw.n(), &opts)?;
            let m = trace.chosen(*criterion)?;
            Ok((path, m, m as f64))
        }
        Tuning::Cv { folds, scheme } => {
            let grid = if cfg.algorithm.is_constrained() {
                let sd = y_sd(raw.y());
                CvGrid::Budgets(plan.budget_multipliers.iter().map(|m| m * sd).collect())
            } else {
                CvGrid::Steps((1..=cfg.m_max).collect())
            };
            let cv_plan = CvPlan::new(grid)
                .with_folds(*folds)
                .with_scheme(*scheme)
                .with_seed(cv_seed);
            let res = cross_validate(raw, cfg, &cv_plan)?;
            if cfg.algorithm.is_constrained() {
                let path = fit(&stats, &cfg.clone().with_b_bar(res.chosen))?;
                let m = path.len();
                Ok((path, m, res.chosen))
            } else {
                let m = res.chosen_steps();
                let path = fit(&stats, &cfg.clone().with_m_max(m))?;
                let m = path.len();
                Ok((path, m, res.chosen))
            }
        }
    }
}

fn y_sd(y: &ndarray::Array1<f64>) -> f64 {
    let sd = crate::select::sample_sd(y);
    if sd > 0.0 { sd } else { 1.0 }
}

/// Cells of the simulation tables: cases ID, WD and SD, `(ω, σ²)` in
/// `{(0, 8), (0, 0.20), (0.75, 8), (0.75, 0.25)}` and `n ∈ {20, 100}`.
/// `table2` to `table5` use the low-dimensional, equal small, decaying and
/// slowly decaying coefficients.
pub fn preset(name: &str) -> Result<Vec<DgpSpec>> {
    let scheme = match name.to_ascii_lowercase().as_str() {
        "table2" => CoeffScheme::LowDim,
        "table3" => CoeffScheme::EqualSmall,
        "table4" => CoeffScheme::Decay,
        "table5" => CoeffScheme::SlowDecay,
        other => return Err(GreedyError::InvalidConfig(format!("unknown preset `{other}`"))),
    };
    let mut cells = Vec::new();
    for case in [ThetaCase::Id, ThetaCase::Wd, ThetaCase::Sd] {
        for (omega, sigma2) in [(0.0, 8.0), (0.0, 0.20), (0.75, 8.0), (0.75, 0.25)] {
            for n in [20, 100] {
                cells.push(DgpSpec::new(case, omega, sigma2, n).with_scheme(scheme.clone()));
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_every_component() {
        let base = derive_seed(1, 2, 3, 0);
        assert_ne!(base, derive_seed(2, 2, 3, 0));
        assert_ne!(base, derive_seed(1, 3, 3, 0));
        assert_ne!(base, derive_seed(1, 2, 4, 0));
        assert_ne!(base, derive_seed(1, 2, 3, 1));
        assert_eq!(base, derive_seed(1, 2, 3, 0));
    }

    #[test]
    fn presets_have_24_cells() {
        for p in ["table2", "table3", "table4", "table5"] {
            assert_eq!(preset(p).unwrap().len(), 24);
        }
        assert!(preset("table9").is_err());
    }

    #[test]
    fn single_fixed_rep_matches_direct_mise() {
        let spec = DgpSpec::new(ThetaCase::Id, 0.0, 8.0, 30).with_k(10);
        let mut plan = TablePlan::new(vec![spec.clone()]);
        plan.reps = 1;
        plan.tuning = Tuning::Fixed;
        plan.n_eval = 200;
        plan.algorithms = vec![AlgoSpec::new(AlgoConfig::new(Algorithm::Oga, 3))];
        let report = run_table(&plan).unwrap();

        let train = gen_sample_rows(&spec, 30, derive_seed(0, 0, 0, 0)).unwrap();
        let stats = SuffStats::from_design(&standardize(&train.design, false).unwrap());
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 3)).unwrap();
        let direct = mise(&path, 3, &spec, 200, derive_seed(0, 0, 0, 1)).unwrap();
        assert_eq!(report.results[0].mise_mean, direct);
    }

    #[test]
    fn exact_coefficients_have_zero_mise() {
        let spec = DgpSpec::new(ThetaCase::Id, 0.0, 8.0, 50).with_k(4);
        let sample = gen_sample_rows(&spec, 50, 1).unwrap();
        let eval = gen_sample_rows(&spec, 100, 2).unwrap();
        // Regress the noiseless signal on the design with OGA to recover b.
        let design = crate::design::RawDesign::new(sample.design.x().clone(), sample.mu0.clone()).unwrap();
        let stats = SuffStats::from_design(&standardize(&design, false).unwrap());
        let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 4)).unwrap();
        assert!(mise_on(&path, path.len(), &eval).unwrap() < 1e-20);
    }
}
