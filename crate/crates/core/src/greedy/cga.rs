use ndarray::Array1;

use super::{
    select_regressor, shrink_and_add, sign, AlgoConfig, Algorithm, GreedyPath, PathBuilder,
    WeightRule,
};
use crate::design::SuffStats;
use crate::error::Result;

/// Constrained greedy algorithm.
///
/// Fixed weights: `w_j = 1/j`, `A = c − (1 − w_j)·D·b`, pick the largest
/// `|A_k|`, take the step coefficient `j·A_s` clipped to `[−B̄, B̄]` (to
/// `[0, 1]` for the simplex variant) and set `b ← (1 − w_j)·b + w_j·clip·e_s`.
/// The ℓ1 norm of `b` never exceeds `B̄`.
///
/// Line search: each step minimizes `|Y − α·F − γ·X^{(k)}|_n²` over `k` and
/// the triangle `α ∈ [0, 1]`, `|γ| ≤ (1 − α)·B̄` (`0 ≤ γ ≤ 1 − α` for the
/// simplex), which keeps the same ℓ1 invariant.
pub fn fit_cga(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    cfg.expect(Algorithm::Cga)?;
    match cfg.weights {
        WeightRule::Fixed => fixed(stats, cfg),
        WeightRule::LineSearch => line_search(stats, cfg),
    }
}

fn fixed(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    let k = stats.k();
    let b_bar = cfg.effective_b_bar();
    let mut b = Array1::zeros(k);
    let mut g = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    for j in 1..=cfg.m_max {
        let w = 1.0 / j as f64;
        let a = stats.c() - &(&g * (1.0 - w));
        let a = a.as_slice().expect("contiguous");
        let s = select_regressor(a, &[], false)?;
        if a[s].abs() < cfg.corr_tol {
            path.converged();
            break;
        }
        let raw = j as f64 * a[s];
        let clipped = if cfg.simplex {
            raw.clamp(0.0, 1.0)
        } else {
            sign(raw) * raw.abs().min(b_bar)
        };
        shrink_and_add(stats, &mut b, &mut g, 1.0 - w, s, w * clipped);
        path.push(s, &b, &g, w);
    }
    Ok(path.finish())
}

fn line_search(stats: &SuffStats, cfg: &AlgoConfig) -> Result<GreedyPath> {
    let k = stats.k();
    let b_bar = cfg.effective_b_bar();
    let (c, d, sy2) = (stats.c(), stats.d(), stats.sy2());
    let mut b = Array1::zeros(k);
    let mut g: Array1<f64> = Array1::zeros(k);
    let mut path = PathBuilder::new(stats, cfg);
    let triangle = if cfg.simplex {
        [(1.0, 0.0), (0.0, 0.0), (0.0, b_bar)]
    } else {
        [(1.0, 0.0), (0.0, b_bar), (0.0, -b_bar)]
    };
    for _ in 0..cfg.m_max {
        let corr = c - &g;
        let max_corr = corr.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max_corr < cfg.corr_tol {
            path.converged();
            break;
        }
        let yf = b.dot(c);
        let ff = b.dot(&g);
        let mut best: Option<(usize, Candidate)> = None;
        for j in 0..k {
            let q = Quadratic {
                h11: ff,
                h12: g[j],
                h22: d[[j, j]],
                l1: yf,
                l2: c[j],
                constant: sy2,
            };
            let cand = q.minimize_on_triangle(&triangle);
            if best.as_ref().is_none_or(|(_, bc)| cand.value < bc.value) {
                best = Some((j, cand));
            }
        }
        let Some((s, cand)) = best else {
            path.converged();
            break;
        };
        shrink_and_add(stats, &mut b, &mut g, cand.alpha, s, cand.gamma);
        path.push(s, &b, &g, 1.0 - cand.alpha);
    }
    Ok(path.finish())
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    alpha: f64,
    gamma: f64,
    value: f64,
}

/// `Q(α, γ) = h11·α² + 2·h12·αγ + h22·γ² − 2·l1·α − 2·l2·γ + constant`,
/// i.e. `|Y − α·F − γ·X|²` with `h = Gram(F, X)`, `l = (⟨Y,F⟩, ⟨Y,X⟩)`.
#[derive(Debug, Clone, Copy)]
struct Quadratic {
    h11: f64,
    h12: f64,
    h22: f64,
    l1: f64,
    l2: f64,
    constant: f64,
}

impl Quadratic {
    fn eval(&self, alpha: f64, gamma: f64) -> f64 {
        self.h11 * alpha * alpha + 2.0 * self.h12 * alpha * gamma + self.h22 * gamma * gamma
            - 2.0 * self.l1 * alpha
            - 2.0 * self.l2 * gamma
            + self.constant
    }

    fn minimize_on_triangle(&self, v: &[(f64, f64); 3]) -> Candidate {
        let det = self.h11 * self.h22 - self.h12 * self.h12;
        let scale = (self.h11 * self.h22).max(f64::MIN_POSITIVE);
        if det > 1e-12 * scale {
            let alpha = (self.h22 * self.l1 - self.h12 * self.l2) / det;
            let gamma = (self.h11 * self.l2 - self.h12 * self.l1) / det;
            if inside(v, alpha, gamma) {
                return Candidate {
                    alpha,
                    gamma,
                    value: self.eval(alpha, gamma),
                };
            }
        }
        // The constrained minimum of a convex quadratic without an interior
        // critical point lies on an edge.
        let mut best: Option<Candidate> = None;
        for (p, q) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
            let cand = self.minimize_on_segment(p, q);
            if best.is_none_or(|b| cand.value < b.value) {
                best = Some(cand);
            }
        }
        best.expect("three edges")
    }

    fn minimize_on_segment(&self, p: (f64, f64), q: (f64, f64)) -> Candidate {
        let (da, dg) = (q.0 - p.0, q.1 - p.1);
        // Q(p + t·d) = curv·t² + 2·slope·t + Q(p).
        let curv = self.h11 * da * da + 2.0 * self.h12 * da * dg + self.h22 * dg * dg;
        let slope = self.h11 * p.0 * da + self.h12 * (p.0 * dg + p.1 * da) + self.h22 * p.1 * dg
            - self.l1 * da
            - self.l2 * dg;
        let t = if curv > 0.0 {
            (-slope / curv).clamp(0.0, 1.0)
        } else if slope < 0.0 {
            1.0
        } else {
            0.0
        };
        let (alpha, gamma) = (p.0 + t * da, p.1 + t * dg);
        Candidate {
            alpha,
            gamma,
            value: self.eval(alpha, gamma),
        }
    }
}

fn inside(v: &[(f64, f64); 3], x: f64, y: f64) -> bool {
    let cross = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
    let s = [cross(v[0], v[1]), cross(v[1], v[2]), cross(v[2], v[0])];
    s.iter().all(|&c| c >= 0.0) || s.iter().all(|&c| c <= 0.0)
}
