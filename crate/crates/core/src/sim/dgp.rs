use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::design::RawDesign;
use crate::error::{GreedyError, Result};

/// Moving-average filter of the innovations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaCase {
    /// No filtering.
    Id,
    /// `θ_s = 0.95^s`, `s ≤ 100 + n`.
    Wd,
    /// `θ_s = (s + 1)^{−1/2}`, `s ≤ 1000 + n`.
    Sd,
    /// `θ_0 = 1`, `θ_l = l^{−(1+ε)/2}`, `l ≤ 1000 + n`.
    LongMemory(f64),
}

impl fmt::Display for ThetaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaCase::Id => f.write_str("ID"),
            ThetaCase::Wd => f.write_str("WD"),
            ThetaCase::Sd => f.write_str("SD"),
            ThetaCase::LongMemory(e) => write!(f, "LongMemory({e})"),
        }
    }
}

impl ThetaCase {
    /// Parses `ID`, `WD`, `SD` or `LongMemory`; the latter takes `epsilon`.
    pub fn parse(s: &str, epsilon: f64) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "id" => Ok(ThetaCase::Id),
            "wd" => Ok(ThetaCase::Wd),
            "sd" => Ok(ThetaCase::Sd),
            "longmemory" | "long_memory" | "lm" => Ok(ThetaCase::LongMemory(epsilon)),
            other => Err(GreedyError::InvalidConfig(format!("unknown case `{other}`"))),
        }
    }

    /// Filter weights `θ_0, …, θ_S` for training sample size `n`.
    pub fn theta(&self, n: usize) -> Vec<f64> {
        match *self {
            ThetaCase::Id => vec![1.0],
            ThetaCase::Wd => (0..=100 + n).map(|s| 0.95f64.powi(s as i32)).collect(),
            ThetaCase::Sd => (0..=1000 + n).map(|s| ((s + 1) as f64).powf(-0.5)).collect(),
            ThetaCase::LongMemory(eps) => (0..=1000 + n)
                .map(|l| {
                    if l == 0 {
                        1.0
                    } else {
                        (l as f64).powf(-(1.0 + eps) / 2.0)
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoeffScheme {
    /// `b_k = 1/3` for the first three regressors.
    LowDim,
    /// `b_k = 1/K`.
    EqualSmall,
    /// `b_k = 1/k`.
    Decay,
    /// `b_k = k^{−1/2}`.
    SlowDecay,
    Custom(Vec<f64>),
}

impl CoeffScheme {
    pub fn coeffs(&self, k: usize) -> Result<Array1<f64>> {
        Ok(match self {
            CoeffScheme::LowDim => Array1::from_iter((0..k).map(|i| if i < 3 { 1.0 / 3.0 } else { 0.0 })),
            CoeffScheme::EqualSmall => Array1::from_elem(k, 1.0 / k as f64),
            CoeffScheme::Decay => Array1::from_iter((1..=k).map(|i| 1.0 / i as f64)),
            CoeffScheme::SlowDecay => Array1::from_iter((1..=k).map(|i| (i as f64).powf(-0.5))),
            CoeffScheme::Custom(v) => {
                if v.len() != k {
                    return Err(GreedyError::DimensionMismatch {
                        what: "custom coefficients",
                        expected: k,
                        found: v.len(),
                    });
                }
                Array1::from(v.clone())
            }
        })
    }
}

impl fmt::Display for CoeffScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffScheme::LowDim => "low_dim",
            CoeffScheme::EqualSmall => "equal_small",
            CoeffScheme::Decay => "decay",
            CoeffScheme::SlowDecay => "slow_decay",
            CoeffScheme::Custom(_) => "custom",
        })
    }
}

impl FromStr for CoeffScheme {
    type Err = GreedyError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low_dim" | "lowdim" => Ok(CoeffScheme::LowDim),
            "equal_small" | "equalsmall" => Ok(CoeffScheme::EqualSmall),
            "decay" => Ok(CoeffScheme::Decay),
            "slow_decay" | "slowdecay" => Ok(CoeffScheme::SlowDecay),
            other => {
                let v: std::result::Result<Vec<f64>, _> =
                    other.split(';').map(|t| t.trim().parse::<f64>()).collect();
                v.map(CoeffScheme::Custom).map_err(|_| {
                    GreedyError::InvalidConfig(format!("unknown coefficient scheme `{other}`"))
                })
            }
        }
    }
}

/// Data-generating process: `Y = X·b + (κ/σ)·Z` where every regressor and the
/// noise driver are the same moving average of Gaussian innovations, and the
/// regressor innovations have correlation `ω^{|k−l|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub n: usize,
    pub k: usize,
    pub theta_case: ThetaCase,
    pub omega: f64,
    pub sigma2: f64,
    pub coeff_scheme: CoeffScheme,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(theta_case: ThetaCase, omega: f64, sigma2: f64, n: usize) -> Self {
        Self {
            n,
            k: 100,
            theta_case,
            omega,
            sigma2,
            coeff_scheme: CoeffScheme::LowDim,
            seed: 0,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_scheme(mut self, scheme: CoeffScheme) -> Self {
        self.coeff_scheme = scheme;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(GreedyError::InvalidConfig("n and K must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.omega) {
            return Err(GreedyError::InvalidConfig(format!("omega must lie in [0, 1), got {}", self.omega)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(GreedyError::InvalidConfig(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if let ThetaCase::LongMemory(e) = self.theta_case {
            if !(e > 0.0 && e.is_finite()) {
                return Err(GreedyError::InvalidConfig(format!("epsilon must be positive, got {e}")));
            }
        }
        self.coeff_scheme.coeffs(self.k).map(|_| ())
    }
}

/// `κ = sqrt(bᵀTb)` with `T[k,l] = ω^{|k−l|}`.
pub fn kappa(spec: &DgpSpec) -> Result<f64> {
    let b = spec.coeff_scheme.coeffs(spec.k)?;
    let k = spec.k;
    let mut q = 0.0;
    for i in 0..k {
        if b[i] == 0.0 {
            continue;
        }
        for j in 0..k {
            let t = if i == j { 1.0 } else { spec.omega.powi(i.abs_diff(j) as i32) };
            q += b[i] * t * b[j];
        }
    }
    Ok(q.sqrt())
}

/// A generated sample together with the true regression function values.
#[derive(Debug, Clone)]
pub struct Sample {
    pub design: RawDesign,
    pub coeffs: Array1<f64>,
    pub mu0: Array1<f64>,
}

/// Draws `spec.n` rows with seed `spec.seed`.
pub fn gen_sample(spec: &DgpSpec) -> Result<Sample> {
    gen_sample_rows(spec, spec.n, spec.seed)
}

/// Draws `rows` rows from the process of `spec`. The filter length is set by
/// the training size `spec.n`, so evaluation samples share the training
/// dependence structure.
pub fn gen_sample_rows(spec: &DgpSpec, rows: usize, seed: u64) -> Result<Sample> {
    spec.validate()?;
    if rows == 0 {
        return Err(GreedyError::InvalidConfig("sample needs at least one row".into()));
    }
    let theta = spec.theta_case.theta(spec.n);
    let len = rows + theta.len() - 1;
    let coeffs = spec.coeff_scheme.coeffs(spec.k)?;
    let scale = kappa(spec)? / spec.sigma2.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let noise = ma_filter(&draw(), &theta);
    let mut x = Array2::<f64>::zeros((rows, spec.k));
    for col in 0..spec.k {
        let filtered = ma_filter(&draw(), &theta);
        x.column_mut(col).assign(&Array1::from(filtered));
    }
    if spec.omega > 0.0 {
        // Filtering and cross-sectional mixing commute, so mixing the filtered
        // rows gives innovations with correlation ω^{|k−l|}.
        let chol = toeplitz_factor(spec.omega, spec.k)?;
        mix_rows(&mut x, &chol);
    }
    let mu0 = x.dot(&coeffs);
    let y = &mu0 + &(Array1::from(noise) * scale);
    Ok(Sample {
        design: RawDesign::new(x, y)?,
        coeffs,
        mu0,
    })
}

/// Lower Cholesky factor of `T[k,l] = ω^{|k−l|}`, row-major.
pub fn toeplitz_factor(omega: f64, k: usize) -> Result<Array2<f64>> {
    let t = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { omega.powi(i.abs_diff(j) as i32) });
    let l = t
        .cholesky()
        .ok_or_else(|| GreedyError::InvalidConfig(format!("Toeplitz matrix with omega {omega} is not positive definite")))?
        .l();
    Ok(Array2::from_shape_fn((k, k), |(i, j)| l[(i, j)]))
}

fn mix_rows(x: &mut Array2<f64>, chol: &Array2<f64>) {
    let mixed = x.dot(&chol.t());
    x.assign(&mixed);
}

/// `out[i] = Σ_s θ_s·e[i + S − s]` for `i < e.len() − S`.
pub fn ma_filter(e: &[f64], theta: &[f64]) -> Vec<f64> {
    let s = theta.len() - 1;
    let rows = e.len() - s;
    if theta.len() == 1 {
        return e.iter().map(|v| v * theta[0]).collect();
    }
    if (rows as u64) * (theta.len() as u64) <= 1 << 20 {
        (0..rows)
            .map(|i| theta.iter().enumerate().map(|(j, t)| t * e[i + s - j]).sum())
            .collect()
    } else {
        let full = fft_convolve(e, theta);
        full[s..s + rows].to_vec()
    }
}

fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for (slot, x) in buf.iter_mut().zip(v) {
            slot.re = *x;
        }
        buf
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let norm = 1.0 / size as f64;
    fa[..out_len].iter().map(|c| c.re * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kappa_examples() {
        let s = DgpSpec::new(ThetaCase::Id, 0.0, 8.0, 20);
        assert_abs_diff_eq!(kappa(&s).unwrap().powi(2), 1.0 / 3.0, epsilon = 1e-14);
        let s = DgpSpec::new(ThetaCase::Id, 0.75, 8.0, 20);
        assert_abs_diff_eq!(kappa(&s).unwrap().powi(2), 7.125 / 9.0, epsilon = 1e-14);
        let mut b = vec![0.0; 100];
        b[40] = 1.0;
        let s = DgpSpec::new(ThetaCase::Id, 0.6, 8.0, 20).with_scheme(CoeffScheme::Custom(b));
        assert_abs_diff_eq!(kappa(&s).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn theta_lengths() {
        assert_eq!(ThetaCase::Id.theta(100), vec![1.0]);
        assert_eq!(ThetaCase::Wd.theta(100).len(), 201);
        assert_eq!(ThetaCase::Sd.theta(20).len(), 1021);
        let lm = ThetaCase::LongMemory(0.5).theta(20);
        assert_eq!(lm[0], 1.0);
        assert_abs_diff_eq!(lm[4], 4f64.powf(-0.75), epsilon = 1e-15);
    }

    #[test]
    fn fft_filter_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e: Vec<f64> = (0..3000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let theta = ThetaCase::Sd.theta(100);
        let direct: Vec<f64> = {
            let s = theta.len() - 1;
            (0..e.len() - s)
                .map(|i| theta.iter().enumerate().map(|(j, t)| t * e[i + s - j]).sum())
                .collect()
        };
        let fast = {
            let full = fft_convolve(&e, &theta);
            full[theta.len() - 1..e.len()].to_vec()
        };
        for (a, b) in direct.iter().zip(&fast) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let s = DgpSpec::new(ThetaCase::Wd, 0.75, 0.25, 20).with_seed(42);
        let a = gen_sample(&s).unwrap();
        let b = gen_sample(&s).unwrap();
        assert_eq!(a.design.x(), b.design.x());
        assert_eq!(a.design.y(), b.design.y());
    }

    #[test]
    fn id_columns_are_standard_normal() {
        let s = DgpSpec::new(ThetaCase::Id, 0.0, 8.0, 4000).with_k(5).with_seed(3);
        let sample = gen_sample(&s).unwrap();
        for v in sample.design.x().var_axis(ndarray::Axis(0), 1.0).iter() {
            assert!((v - 1.0).abs() < 5.0 / (4000f64).sqrt(), "{v}");
        }
    }

    #[test]
    fn toeplitz_factor_reproduces_matrix() {
        let l = toeplitz_factor(0.75, 4).unwrap();
        let t = l.dot(&l.t());
        assert_abs_diff_eq!(t[[0, 2]], 0.5625, epsilon = 1e-14);
        assert_abs_diff_eq!(t[[3, 3]], 1.0, epsilon = 1e-14);
    }
}
