//! Flat `key=value` run configuration. Every key can come from a file passed
//! with `--config` or from a flag of the same name; flags win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Arg, ArgMatches, Command};

use crate::CliError;

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

pub const KEYS: &[Key] = &[
    key("target", "y", "response column of the input CSV"),
    key("out_dir", ".", "directory for output files"),
    key("algorithm", "pga", "pga, oga, rga, cga or fwa"),
    key("m_max", "100", "maximum number of greedy steps"),
    key("nu", "0.1", "PGA shrinkage in (0, 1]"),
    key("b_bar", "1", "l1 budget for CGA and FWA"),
    key("weights", "fixed", "step weights for RGA/CGA/FWA: fixed or line_search"),
    key("simplex", "false", "restrict CGA/FWA coefficients to be nonnegative"),
    key("rga_weighted_step", "false", "RGA variant that scales the new coefficient by the step weight"),
    key("corr_tol", "1e-12", "stop when the largest residual correlation falls below this"),
    key("proj_tol", "1e-10", "OGA pivot below which a candidate is treated as collinear"),
    key("center", "false", "center regressors before scaling"),
    key("criterion", "aicc", "information criterion for fit: aic or aicc"),
    key("truncate_at_ic", "false", "report coefficients at the step chosen by the criterion"),
    key("gdf_reps", "20", "perturbation replications for the RGA degrees of freedom"),
    key("gdf_tau", "auto", "perturbation sd for the RGA degrees of freedom (auto = half the sd of y)"),
    key("folds", "5", "cross-validation folds"),
    key("fold_scheme", "contiguous_blocks", "contiguous_blocks or random"),
    key("grid", "auto", "cv candidates: comma list or lo:hi range (auto = 1:m_max, or budgets scaled by sd(y) for CGA/FWA)"),
    key("seed", "0", "random seed"),
    key("preset", "none", "table preset: table2, table3, table4 or table5"),
    key("case", "ID", "filter case: ID, WD, SD or LongMemory"),
    key("epsilon", "0.5", "LongMemory decay parameter"),
    key("omega", "0", "cross-sectional correlation base in [0, 1)"),
    key("sigma2", "8", "signal-to-noise ratio"),
    key("n", "100", "training sample size"),
    key("k", "100", "number of regressors"),
    key("scheme", "low_dim", "coefficients: low_dim, equal_small, decay, slow_decay or a ;-separated list"),
    key("reps", "100", "Monte Carlo replications per cell"),
    key("n_eval", "2000", "evaluation sample size for MISE"),
    key("tuning", "cv", "table tuning: cv, aic, aicc or fixed"),
    key("algorithms", "pga,oga,rga,cga,fwa", "algorithms run by table (PGA/RGA 500 steps, OGA 100, CGA/FWA 1000)"),
];

pub fn command() -> Command {
    let with_keys = |mut cmd: Command| {
        cmd = cmd.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value file; flags override its entries"),
        );
        for k in KEYS {
            cmd = cmd.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name("VALUE")
                    .help(format!("{} [default: {}]", k.help, k.default)),
            );
        }
        cmd
    };
    let data = || Arg::new("data").required(true).value_name("DATA_CSV").help("input CSV with header row");
    Command::new("greedy-predict")
        .about("Greedy algorithms for high-dimensional linear prediction")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(with_keys(
            Command::new("fit")
                .about("fit a path, write coefficients.csv, path.csv and ic.csv")
                .arg(data()),
        ))
        .subcommand(with_keys(
            Command::new("cv")
                .about("cross-validate m or the budget, write cv.csv")
                .arg(data()),
        ))
        .subcommand(with_keys(
            Command::new("table").about("run the Monte Carlo study, write report.csv and table.txt"),
        ))
}

/// Resolved configuration values by key.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl RunConfig {
    pub fn defaults() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
        }
    }

    pub fn from_matches(m: &ArgMatches) -> Result<Self, CliError> {
        let mut cfg = Self::defaults();
        if let Some(path) = m.get_one::<String>("config") {
            cfg.apply_file(Path::new(path))?;
        }
        for k in KEYS {
            if let Some(v) = m.get_one::<String>(k.name) {
                cfg.values.insert(k.name, v.clone());
            }
        }
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("config line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            let slot = KEYS
                .iter()
                .find(|key| key.name == k)
                .ok_or_else(|| CliError::input(format!("config line {}: unknown key `{k}`", i + 1)))?;
            self.values.insert(slot.name, v.trim().to_string());
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.str(key);
        raw.parse()
            .map_err(|_| CliError::input(format!("invalid value `{raw}` for `{key}`")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.str(key).to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::input(format!("invalid boolean `{other}` for `{key}`"))),
        }
    }

    /// `None` for the literal `auto` or `none`.
    pub fn optional(&self, key: &str) -> Option<&str> {
        match self.str(key) {
            "auto" | "none" | "" => None,
            v => Some(v),
        }
    }
}
