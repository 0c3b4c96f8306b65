//! Data model: raw and standardized designs, sufficient statistics and the
//! restricted eigenvalue of the empirical Gram matrix.
//!
//! All greedy fits run on [`SuffStats`], i.e. on `C = XᵀY/n` and `D = XᵀX/n`
//! computed from a design whose columns have unit empirical norm
//! `(1/n)·Σᵢ x[i,k]² = 1`.

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{GreedyError, Result};

/// Columns whose empirical norm falls below this are rejected.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Default cap on the number of subsets enumerated by [`restricted_eigenvalue`].
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

/// Unstandardized regressors (`n × K`) and response (`n`).
#[derive(Debug, Clone, PartialEq)]
pub struct RawDesign {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl RawDesign {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, k) = x.dim();
        if n == 0 || k == 0 {
            return Err(GreedyError::EmptyDesign);
        }
        if y.len() != n {
            return Err(GreedyError::DimensionMismatch {
                what: "response length",
                expected: n,
                found: y.len(),
            });
        }
        for ((row, col), v) in x.indexed_iter() {
            if !v.is_finite() {
                return Err(GreedyError::NonFinite { row, col });
            }
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(GreedyError::NonFinite { row, col: k });
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    /// Rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<RawDesign> {
        RawDesign::new(self.x.select(Axis(0), rows), self.y.select(Axis(0), rows))
    }
}

/// Per-column affine map `x ↦ (x − mean) / scale` fixed on a training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    scale: Array1<f64>,
    mean: Option<Array1<f64>>,
}

impl Standardization {
    pub fn new(scale: Array1<f64>, mean: Option<Array1<f64>>) -> Result<Self> {
        if let Some(k) = scale.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(GreedyError::DegenerateColumn(k));
        }
        if let Some(m) = &mean {
            if m.len() != scale.len() {
                return Err(GreedyError::DimensionMismatch {
                    what: "standardization mean",
                    expected: scale.len(),
                    found: m.len(),
                });
            }
        }
        Ok(Self { scale, mean })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            scale: Array1::ones(k),
            mean: None,
        }
    }

    pub fn k(&self) -> usize {
        self.scale.len()
    }

    pub fn scale(&self) -> &Array1<f64> {
        &self.scale
    }

    pub fn mean(&self) -> Option<&Array1<f64>> {
        self.mean.as_ref()
    }

    pub fn is_centered(&self) -> bool {
        self.mean.is_some()
    }

    /// Applies the stored means and scales to a raw regressor matrix.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.k() {
            return Err(GreedyError::DimensionMismatch {
                what: "regressor columns",
                expected: self.k(),
                found: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        if let Some(mean) = &self.mean {
            out -= mean;
        }
        out /= &self.scale;
        Ok(out)
    }
}

/// Design with every column at unit empirical norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedDesign {
    x: Array2<f64>,
    y: Array1<f64>,
    standardization: Standardization,
}

impl StandardizedDesign {
    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn scale(&self) -> &Array1<f64> {
        self.standardization.scale()
    }

    pub fn centered(&self) -> bool {
        self.standardization.is_centered()
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Same regressors with a different response.
    pub fn with_response(&self, y: Array1<f64>) -> Result<StandardizedDesign> {
        if y.len() != self.n() {
            return Err(GreedyError::DimensionMismatch {
                what: "response length",
                expected: self.n(),
                found: y.len(),
            });
        }
        Ok(Self {
            x: self.x.clone(),
            y,
            standardization: self.standardization.clone(),
        })
    }
}

/// Divides each column by its empirical norm `|X^{(k)}|_n`, optionally after
/// removing the column mean. The response is passed through unchanged.
pub fn standardize(raw: &RawDesign, center: bool) -> Result<StandardizedDesign> {
    let n = raw.n() as f64;
    let mean = if center {
        Some(raw.x.mean_axis(Axis(0)).ok_or(GreedyError::EmptyDesign)?)
    } else {
        None
    };
    let mut scale = Array1::zeros(raw.k());
    for (k, col) in raw.x.axis_iter(Axis(1)).enumerate() {
        let mu = mean.as_ref().map_or(0.0, |m| m[k]);
        let norm = (col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
        if norm < DEGENERATE_NORM {
            return Err(GreedyError::DegenerateColumn(k));
        }
        scale[k] = norm;
    }
    standardize_with(raw, &Standardization { scale, mean })
}

/// Applies externally fixed scales (e.g. from a training fold or a
/// calibration pass). Columns need not come out at exactly unit norm.
pub fn standardize_with(raw: &RawDesign, st: &Standardization) -> Result<StandardizedDesign> {
    Ok(StandardizedDesign {
        x: st.apply(raw.x.view())?,
        y: raw.y.clone(),
        standardization: st.clone(),
    })
}

/// `c = XᵀY/n`, `d = XᵀX/n`, `sy2 = |Y|_n²` over `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    c: Array1<f64>,
    d: Array2<f64>,
    n: usize,
    sy2: f64,
    standardization: Option<Standardization>,
}

impl SuffStats {
    /// Builds statistics from given moments, e.g. for synthetic instances.
    pub fn from_moments(c: Array1<f64>, d: Array2<f64>, n: usize, sy2: f64) -> Result<Self> {
        let k = c.len();
        if k == 0 {
            return Err(GreedyError::EmptyDesign);
        }
        if d.dim() != (k, k) {
            return Err(GreedyError::DimensionMismatch {
                what: "Gram matrix",
                expected: k,
                found: d.nrows().max(d.ncols()),
            });
        }
        Ok(Self {
            c,
            d,
            n,
            sy2,
            standardization: None,
        })
    }

    pub fn from_design(design: &StandardizedDesign) -> Self {
        let n = design.n() as f64;
        let x = design.x();
        let y = design.y();
        Self {
            c: x.t().dot(y) / n,
            d: x.t().dot(x) / n,
            n: design.n(),
            sy2: y.dot(y) / n,
            standardization: Some(design.standardization().clone()),
        }
    }

    /// Streaming entry point: one raw batch under a scale vector fixed in
    /// advance.
    pub fn from_batch(raw: &RawDesign, st: &Standardization) -> Result<Self> {
        Ok(Self::from_design(&standardize_with(raw, st)?))
    }

    /// Zero-sample statistics; the identity element of [`SuffStats::merge`].
    pub fn empty(st: &Standardization) -> Self {
        let k = st.k();
        Self {
            c: Array1::zeros(k),
            d: Array2::zeros((k, k)),
            n: 0,
            sy2: 0.0,
            standardization: Some(st.clone()),
        }
    }

    pub fn c(&self) -> &Array1<f64> {
        &self.c
    }

    pub fn d(&self) -> &Array2<f64> {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sy2(&self) -> f64 {
        self.sy2
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Largest `|d[k,k] − 1|`. Zero up to rounding for a full-sample
    /// standardization; nonzero for batches streamed under fixed scales.
    pub fn diag_deviation(&self) -> f64 {
        self.d
            .diag()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sample-weighted average of two sets of statistics. Both must carry the
    /// same standardization.
    pub fn merge(&self, other: &SuffStats) -> Result<SuffStats> {
        if self.k() != other.k() {
            return Err(GreedyError::DimensionMismatch {
                what: "regressor count",
                expected: self.k(),
                found: other.k(),
            });
        }
        if self.standardization != other.standardization {
            return Err(GreedyError::ScaleMismatch);
        }
        let n = self.n + other.n;
        if n == 0 {
            return Ok(self.clone());
        }
        let (wa, wb) = (self.n as f64 / n as f64, other.n as f64 / n as f64);
        Ok(SuffStats {
            c: &self.c * wa + &other.c * wb,
            d: &self.d * wa + &other.d * wb,
            n,
            sy2: self.sy2 * wa + other.sy2 * wb,
            standardization: self.standardization.clone(),
        })
    }

    /// `|Y − Σ b_k X^{(k)}|_n²` evaluated from the moments.
    pub fn objective(&self, b: &Array1<f64>) -> f64 {
        self.sy2 - 2.0 * b.dot(&self.c) + b.dot(&self.d.dot(b))
    }
}

/// Convenience alias for [`SuffStats::from_design`].
pub fn suffstats_from(design: &StandardizedDesign) -> SuffStats {
    SuffStats::from_design(design)
}

/// Number of `m`-subsets of `k` items, saturating at `u128::MAX`.
pub fn binomial(k: usize, m: usize) -> u128 {
    if m > k {
        return 0;
    }
    let m = m.min(k - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        acc = match acc.checked_mul((k - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `ρ_{m,n}`: the smallest eigenvalue over every `m × m` principal submatrix
/// of `d`, by exhaustive lexicographic enumeration.
pub fn restricted_eigenvalue(stats: &SuffStats, m: usize) -> Result<f64> {
    restricted_eigenvalue_capped(stats, m, DEFAULT_SUBSET_CAP)
}

pub fn restricted_eigenvalue_capped(stats: &SuffStats, m: usize, cap: u128) -> Result<f64> {
    let k = stats.k();
    if m == 0 || m > k {
        return Err(GreedyError::InvalidConfig(format!(
            "subset size m={m} must lie in 1..={k}"
        )));
    }
    let subsets = binomial(k, m);
    if subsets > cap {
        return Err(GreedyError::CombinatorialBlowup { subsets, cap });
    }
    let d = stats.d();
    let mut min_eig = f64::INFINITY;
    for subset in (0..k).combinations(m) {
        let sub = DMatrix::from_fn(m, m, |i, j| d[[subset[i], subset[j]]]);
        let eig = SymmetricEigen::new(sub).eigenvalues.min();
        min_eig = min_eig.min(eig);
    }
    Ok(min_eig.max(0.0))
}
