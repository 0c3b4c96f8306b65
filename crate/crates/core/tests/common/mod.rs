//! Shared fixtures: random instances and a direct n-space implementation of
//! the greedy algorithms that works on residual vectors instead of moments.
#![allow(dead_code)]

use greedy_predict::design::{standardize, RawDesign, StandardizedDesign, SuffStats};
use greedy_predict::greedy::{AlgoConfig, Algorithm};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct Instance {
    pub raw: RawDesign,
    pub design: StandardizedDesign,
    pub stats: SuffStats,
}

/// Gaussian design with `y = X·b + noise`, `b` having `active` nonzero
/// entries of size about one.
pub fn random_instance(n: usize, k: usize, active: usize, noise_sd: f64, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let x = Array2::from_shape_fn((n, k), |_| normal());
    let b = Array1::from_iter((0..k).map(|i| if i < active { 1.0 + 0.5 * normal() } else { 0.0 }));
    let noise = Array1::from_iter((0..n).map(|_| noise_sd * normal()));
    let y = x.dot(&b) + noise;
    let raw = RawDesign::new(x, y).unwrap();
    let design = standardize(&raw, false).unwrap();
    let stats = SuffStats::from_design(&design);
    Instance { raw, design, stats }
}

pub struct RefPath {
    pub selected: Vec<usize>,
    pub coeffs: Vec<Array1<f64>>,
    pub rss: Vec<f64>,
}

fn ip(a: &Array1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

fn argmax_abs(v: &[f64], skip: &[bool]) -> usize {
    let mut best = None;
    for (i, a) in v.iter().enumerate() {
        if skip.get(i).copied().unwrap_or(false) {
            continue;
        }
        if best.is_none_or(|(_, b): (usize, f64)| a.abs() > b) {
            best = Some((i, a.abs()));
        }
    }
    best.unwrap().0
}

fn argmax_signed(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Fixed-weight greedy fit computed on n-vectors. `weighted_step` selects the
/// RGA variant whose new coefficient is multiplied by the step weight.
pub fn reference_fit(design: &StandardizedDesign, cfg: &AlgoConfig, steps: usize) -> RefPath {
    let x = design.x();
    let y = design.y();
    let (n, k) = (design.n(), design.k());
    let mut f = Array1::<f64>::zeros(n);
    let mut b = Array1::<f64>::zeros(k);
    let mut out = RefPath {
        selected: vec![],
        coeffs: vec![],
        rss: vec![],
    };
    let mut chosen = vec![false; k];
    let b_bar = cfg.effective_b_bar();
    for j in 1..=steps {
        let jf = j as f64;
        let s = match cfg.algorithm {
            Algorithm::Pga => {
                let r = y - &f;
                let a: Vec<f64> = (0..k).map(|i| ip(&r, x.column(i))).collect();
                let s = argmax_abs(&a, &[]);
                f.scaled_add(cfg.nu * a[s], &x.column(s));
                b[s] += cfg.nu * a[s];
                s
            }
            Algorithm::Oga => {
                let r = y - &f;
                let a: Vec<f64> = (0..k).map(|i| ip(&r, x.column(i))).collect();
                let s = argmax_abs(&a, &chosen);
                chosen[s] = true;
                let cols: Vec<usize> = (0..k).filter(|&i| chosen[i]).collect();
                let xs = DMatrix::from_fn(n, cols.len(), |r, c| x[[r, cols[c]]]);
                let yv = DVector::from_iterator(n, y.iter().cloned());
                // least squares through Householder QR; nalgebra's SVD solve
                // occasionally lands ~1e-9 off on well-conditioned inputs
                let qr = xs.qr();
                let sol = qr.r().solve_upper_triangular(&(qr.q().transpose() * &yv)).unwrap();
                b.fill(0.0);
                for (c, &i) in cols.iter().enumerate() {
                    b[i] = sol[c];
                }
                f = x.dot(&b);
                s
            }
            Algorithm::Rga => {
                let w = 1.0 / jf;
                let r = y - &(&f * (1.0 - w));
                let a: Vec<f64> = (0..k).map(|i| ip(&r, x.column(i))).collect();
                let s = argmax_abs(&a, &[]);
                let coef = if cfg.rga_weighted_step { w * a[s] } else { a[s] };
                f = &f * (1.0 - w) + &(&x.column(s) * coef);
                b *= 1.0 - w;
                b[s] += coef;
                s
            }
            Algorithm::Cga => {
                let w = 1.0 / jf;
                let r = y - &(&f * (1.0 - w));
                let a: Vec<f64> = (0..k).map(|i| ip(&r, x.column(i))).collect();
                let s = argmax_abs(&a, &[]);
                let beta = jf * a[s];
                let clipped = if cfg.simplex {
                    beta.clamp(0.0, 1.0)
                } else {
                    beta.signum() * beta.abs().min(b_bar)
                };
                f = &f * (1.0 - w) + &(&x.column(s) * (w * clipped));
                b *= 1.0 - w;
                b[s] += w * clipped;
                s
            }
            Algorithm::Fwa => {
                let w = 2.0 / (1.0 + jf);
                let r = y - &f;
                let a: Vec<f64> = (0..k).map(|i| ip(&r, x.column(i))).collect();
                let s = if cfg.simplex { argmax_signed(&a) } else { argmax_abs(&a, &[]) };
                let vertex = if cfg.simplex {
                    b_bar * a[s].signum().max(0.0)
                } else {
                    b_bar * a[s].signum()
                };
                f = &f * (1.0 - w) + &(&x.column(s) * (w * vertex));
                b *= 1.0 - w;
                b[s] += w * vertex;
                s
            }
        };
        let r = y - &f;
        out.selected.push(s);
        out.coeffs.push(b.clone());
        out.rss.push(r.dot(&r) / n as f64);
    }
    out
}

/// `tr(I − Π_j (I − ν·P_j))` from explicitly multiplied n×n matrices.
pub fn brute_force_pga_df(design: &StandardizedDesign, selected: &[usize], nu: f64) -> f64 {
    let n = design.n();
    let mut prod = DMatrix::<f64>::identity(n, n);
    for &s in selected {
        let col = DVector::from_iterator(n, design.x().column(s).iter().cloned());
        let p = &col * col.transpose() / col.dot(&col);
        let factor = DMatrix::<f64>::identity(n, n) - p * nu;
        prod = factor * prod;
    }
    (DMatrix::<f64>::identity(n, n) - prod).trace()
}
