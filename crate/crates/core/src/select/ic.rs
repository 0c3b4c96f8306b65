use std::fmt;
use std::str::FromStr;

use super::dof::{dof_path, DofOptions};
use crate::design::StandardizedDesign;
use crate::error::{GreedyError, Result};
use crate::greedy::GreedyPath;

/// Relative floor applied to `rss_n` before taking logs, so exact fits do not
/// produce `ln 0`.
pub const RSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    Aic,
    #[default]
    Aicc,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Aic => "aic",
            Criterion::Aicc => "aicc",
        })
    }
}

impl FromStr for Criterion {
    type Err = GreedyError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "aicc" => Ok(Criterion::Aicc),
            other => Err(GreedyError::InvalidConfig(format!("unknown criterion `{other}`"))),
        }
    }
}

/// `ln(rss_n) + 2·df/n`.
pub fn aic(rss_n: f64, df: f64, n: usize) -> Result<f64> {
    if !(rss_n > 0.0) {
        return Err(GreedyError::NonPositiveRss(rss_n));
    }
    Ok(rss_n.ln() + 2.0 * df / n as f64)
}

/// `ln(rss_n) + (1 + df/n) / (1 − (df + 2)/n)`.
pub fn aicc(rss_n: f64, df: f64, n: usize) -> Result<f64> {
    if !(rss_n > 0.0) {
        return Err(GreedyError::NonPositiveRss(rss_n));
    }
    let n_f = n as f64;
    let denom = 1.0 - (df + 2.0) / n_f;
    if denom <= 0.0 {
        return Err(GreedyError::AiccUndefined { df, n });
    }
    Ok(rss_n.ln() + (1.0 + df / n_f) / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcRecord {
    pub m: usize,
    pub rss_n: f64,
    pub df: f64,
    pub aic: f64,
    /// `None` where the correction is undefined.
    pub aicc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcTrace {
    pub records: Vec<IcRecord>,
    pub n: usize,
    pub chosen_m_aic: usize,
    /// Chosen over the leading run of steps where AICc is defined; `None`
    /// when it is undefined from the first step.
    pub chosen_m_aicc: Option<usize>,
}

impl IcTrace {
    pub fn chosen(&self, criterion: Criterion) -> Result<usize> {
        match criterion {
            Criterion::Aic => Ok(self.chosen_m_aic),
            Criterion::Aicc => self.chosen_m_aicc.ok_or(GreedyError::AiccUndefined {
                df: self.records[0].df,
                n: self.n,
            }),
        }
    }
}

/// Evaluates both criteria at every step of `path`; each chosen `m` is the
/// smallest step attaining the minimum.
pub fn select_m_by_ic(
    path: &GreedyPath,
    design: Option<&StandardizedDesign>,
    n: usize,
    opts: &DofOptions,
) -> Result<IcTrace> {
    if path.is_empty() {
        return Err(GreedyError::EmptyPath);
    }
    let dfs = dof_path(path, design, opts)?;
    let floor = (RSS_FLOOR * path.rss_at(0)?).max(f64::MIN_POSITIVE);
    let mut records = Vec::with_capacity(path.len());
    for (j, (step, &df)) in path.steps().iter().zip(&dfs).enumerate() {
        let rss = step.rss_n.max(floor);
        records.push(IcRecord {
            m: j + 1,
            rss_n: step.rss_n,
            df,
            aic: aic(rss, df, n)?,
            aicc: aicc(rss, df, n).ok(),
        });
    }
    let chosen_m_aic = argmin(records.iter().map(|r| Some(r.aic))).unwrap_or(1);
    let chosen_m_aicc = argmin(records.iter().map(|r| r.aicc).take_while(Option::is_some));
    Ok(IcTrace {
        records,
        n,
        chosen_m_aic,
        chosen_m_aicc,
    })
}

/// 1-based index of the first minimum.
fn argmin(values: impl Iterator<Item = Option<f64>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        let Some(v) = v else { break };
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i + 1, v));
        }
    }
    best.map(|(i, _)| i)
}
