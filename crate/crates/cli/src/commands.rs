use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use greedy_predict::greedy::{fit, AlgoConfig, Algorithm, GreedyPath, WeightRule};
use greedy_predict::io::read_csv_path;
use greedy_predict::select::{
    cross_validate, sample_sd, select_m_by_ic, Criterion, CvGrid, CvPlan, DofOptions, FoldScheme,
};
use greedy_predict::sim::{default_algorithms, preset, run_table, DgpSpec, TablePlan, ThetaCase, Tuning};
use greedy_predict::{standardize, SuffStats};

use crate::config::RunConfig;
use crate::{CliError, EXIT_TABLE_FAILURES};

fn algo_config(cfg: &RunConfig) -> Result<AlgoConfig, CliError> {
    let algorithm: Algorithm = cfg.str("algorithm").parse()?;
    let weights: WeightRule = cfg.str("weights").parse()?;
    let mut out = AlgoConfig::new(algorithm, cfg.parse("m_max")?)
        .with_nu(cfg.parse("nu")?)
        .with_b_bar(cfg.parse("b_bar")?)
        .with_weights(weights)
        .with_simplex(cfg.bool("simplex")?);
    out.rga_weighted_step = cfg.bool("rga_weighted_step")?;
    out.corr_tol = cfg.parse("corr_tol")?;
    out.proj_tol = cfg.parse("proj_tol")?;
    out.validate()?;
    Ok(out)
}

fn dof_options(cfg: &RunConfig) -> Result<DofOptions, CliError> {
    Ok(DofOptions {
        gdf_reps: cfg.parse("gdf_reps")?,
        gdf_tau: cfg.optional("gdf_tau").map(|v| v.parse()).transpose().map_err(|_| {
            CliError::input(format!("invalid value `{}` for `gdf_tau`", cfg.str("gdf_tau")))
        })?,
        seed: cfg.parse("seed")?,
    })
}

fn out_path(cfg: &RunConfig, file: &str) -> Result<PathBuf, CliError> {
    let dir = Path::new(cfg.str("out_dir"));
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(file))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

pub fn cmd_fit(data: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let algo = algo_config(cfg)?;
    let criterion: Criterion = cfg.str("criterion").parse()?;
    let ds = read_csv_path(data, cfg.str("target"))?;
    let features = ds.features.clone();
    let lib = |e| CliError::from_lib(e, Some(&features));
    let design = standardize(&ds.design, cfg.bool("center")?).map_err(lib)?;
    let stats = SuffStats::from_design(&design);
    let path = fit(&stats, &algo).map_err(lib)?;

    let trace = if path.is_empty() {
        None
    } else {
        Some(select_m_by_ic(&path, Some(&design), design.n(), &dof_options(cfg)?).map_err(lib)?)
    };
    let at_step = match (&trace, cfg.bool("truncate_at_ic")?) {
        (Some(t), true) => t.chosen(criterion).map_err(lib)?,
        _ => path.len(),
    };

    write(&out_path(cfg, "coefficients.csv")?, &coefficients_csv(&path, at_step, &features)?)?;
    let mut csv = String::from("m,selected_feature,rss_n\n");
    for (j, step) in path.steps().iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", j + 1, features[step.selected], step.rss_n);
    }
    write(&out_path(cfg, "path.csv")?, &csv)?;

    let mut csv = String::from("m,rss_n,df,aic,aicc,chosen\n");
    if let Some(t) = &trace {
        for r in &t.records {
            let mut chosen = Vec::new();
            if r.m == t.chosen_m_aic {
                chosen.push("aic");
            }
            if Some(r.m) == t.chosen_m_aicc {
                chosen.push("aicc");
            }
            let aicc = r.aicc.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{},{},{},{},{}", r.m, r.rss_n, r.df, r.aic, aicc, chosen.join(";"));
        }
    }
    write(&out_path(cfg, "ic.csv")?, &csv)?;

    println!(
        "{}: {} steps{}, coefficients at step {}",
        algo.algorithm,
        path.len(),
        match path.converged_at() {
            Some(_) => " (converged)",
            None => "",
        },
        at_step
    );
    if let Some(t) = &trace {
        let aicc = t.chosen_m_aicc.map_or("undefined".to_string(), |m| m.to_string());
        println!("chosen m: aic {}, aicc {aicc}", t.chosen_m_aic);
    }
    Ok(())
}

fn coefficients_csv(path: &GreedyPath, at_step: usize, features: &[String]) -> Result<String, CliError> {
    let std_coeffs = path.coeffs_at(at_step)?;
    let (raw, intercept) = path.raw_coeffs_at(at_step)?;
    let mut csv = String::from("feature,coefficient_standardized,coefficient_raw\n");
    if path.standardization().is_centered() {
        let _ = writeln!(csv, "(intercept),0,{intercept}");
    }
    for (i, name) in features.iter().enumerate() {
        let _ = writeln!(csv, "{name},{},{}", std_coeffs[i], raw[i]);
    }
    Ok(csv)
}

pub fn cmd_cv(data: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let algo = algo_config(cfg)?;
    let ds = read_csv_path(data, cfg.str("target"))?;
    let features = ds.features.clone();
    let grid = match cfg.optional("grid") {
        Some(spec) => parse_grid(spec, algo.algorithm.is_constrained())?,
        None if algo.algorithm.is_constrained() => {
            let sd = sample_sd(ds.design.y());
            let sd = if sd > 0.0 { sd } else { 1.0 };
            let base = TablePlan::new(Vec::new()).budget_multipliers;
            CvGrid::Budgets(base.iter().map(|m| m * sd).collect())
        }
        None => CvGrid::Steps((1..=algo.m_max).collect()),
    };
    let scheme: FoldScheme = cfg.str("fold_scheme").parse()?;
    let plan = CvPlan {
        folds: cfg.parse("folds")?,
        scheme,
        grid,
        seed: cfg.parse("seed")?,
        center: cfg.bool("center")?,
    };
    let res = cross_validate(&ds.design, &algo, &plan).map_err(|e| CliError::from_lib(e, Some(&features)))?;
    let mut csv = String::from("candidate,mean_validation_mse\n");
    for (c, mse) in &res.scores {
        let _ = writeln!(csv, "{c},{mse}");
    }
    write(&out_path(cfg, "cv.csv")?, &csv)?;
    println!("{}", res.chosen);
    Ok(())
}

/// `a,b,c` or `lo:hi` (integer steps only).
fn parse_grid(spec: &str, budgets: bool) -> Result<CvGrid, CliError> {
    let bad = || CliError::input(format!("invalid grid `{spec}`"));
    if let Some((lo, hi)) = spec.split_once(':') {
        if budgets {
            return Err(CliError::input("budget grids must be comma lists"));
        }
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        return Ok(CvGrid::Steps((lo..=hi).collect()));
    }
    let items: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if budgets {
        items
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()
            .map(CvGrid::Budgets)
    } else {
        items
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()
            .map(CvGrid::Steps)
    }
}

pub fn cmd_table(cfg: &RunConfig) -> Result<(), CliError> {
    let cells = match cfg.optional("preset") {
        Some(name) => preset(name)?,
        None => {
            let case = ThetaCase::parse(cfg.str("case"), cfg.parse("epsilon")?)?;
            let spec = DgpSpec::new(case, cfg.parse("omega")?, cfg.parse("sigma2")?, cfg.parse("n")?)
                .with_k(cfg.parse("k")?)
                .with_scheme(cfg.str("scheme").parse()?);
            vec![spec]
        }
    };
    let mut plan = TablePlan::new(cells);
    plan.reps = cfg.parse("reps")?;
    plan.n_eval = cfg.parse("n_eval")?;
    plan.master_seed = cfg.parse("seed")?;
    let folds: usize = cfg.parse("folds")?;
    let scheme: FoldScheme = cfg.str("fold_scheme").parse()?;
    plan.tuning = match cfg.str("tuning").to_ascii_lowercase().as_str() {
        "cv" => Tuning::Cv { folds, scheme },
        "fixed" => Tuning::Fixed,
        other => Tuning::Ic(other.parse()?),
    };
    let nu: f64 = cfg.parse("nu")?;
    let mut algorithms = Vec::new();
    for name in cfg.str("algorithms").split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let alg: Algorithm = name.parse()?;
        let mut spec = default_algorithms()
            .into_iter()
            .find(|a| a.config.algorithm == alg)
            .expect("every algorithm has a default");
        if alg == Algorithm::Pga {
            spec.config = spec.config.with_nu(nu);
        }
        algorithms.push(spec);
    }
    plan.algorithms = algorithms;

    let report = run_table(&plan)?;
    write(&out_path(cfg, "report.csv")?, &report.to_csv())?;
    let table = report.to_table();
    write(&out_path(cfg, "table.txt")?, &table)?;
    print!("{table}");
    let failing = report.failing(0.1);
    if !failing.is_empty() {
        let cells: Vec<String> = failing
            .iter()
            .map(|r| format!("{} {} omega={} sigma2={} n={} ({} of {} failed)", r.algorithm, r.theta_case, r.omega, r.sigma2, r.n, r.failures, report.requested_reps))
            .collect();
        return Err(CliError {
            code: EXIT_TABLE_FAILURES,
            message: format!("replications failed: {}", cells.join("; ")),
        });
    }
    Ok(())
}
