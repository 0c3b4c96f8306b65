use greedy_predict::design::{standardize, SuffStats};
use greedy_predict::greedy::{fit, AlgoConfig, Algorithm};
use greedy_predict::sim::{gen_sample_rows, mise, mise_on, run_table, DgpSpec, TablePlan, ThetaCase, Tuning};
use ndarray::{Array1, ArrayView1};

fn corr(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn cross_sectional_correlation_follows_toeplitz() {
    let spec = DgpSpec::new(ThetaCase::Id, 0.75, 8.0, 100_000).with_k(6);
    let s = gen_sample_rows(&spec, 100_000, 11).unwrap();
    let x = s.design.x();
    for lag in 1..=3 {
        let r = corr(x.column(1), x.column(1 + lag));
        assert!((r - 0.75f64.powi(lag as i32)).abs() < 0.01, "lag {lag}: {r}");
    }
}

#[test]
fn noise_is_independent_of_regressors() {
    let n = 100_000;
    let spec = DgpSpec::new(ThetaCase::Id, 0.75, 0.25, n).with_k(8);
    let s = gen_sample_rows(&spec, n, 12).unwrap();
    let noise = s.design.y() - &s.mu0;
    for k in 0..8 {
        let r = corr(noise.view(), s.design.x().column(k));
        assert!(r.abs() < 3.0 / (n as f64).sqrt(), "column {k}: {r}");
    }
}

#[test]
fn wd_lag_one_autocorrelation_matches_filter() {
    let n = 100_000;
    let spec = DgpSpec::new(ThetaCase::Wd, 0.0, 8.0, n).with_k(2);
    let s = gen_sample_rows(&spec, n, 13).unwrap();
    let col = s.design.x().column(0);
    let r = corr(col.slice(ndarray::s![..n - 1]), col.slice(ndarray::s![1..]));
    let theta: Vec<f64> = ThetaCase::Wd.theta(n);
    let num: f64 = theta.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = theta.iter().map(|t| t * t).sum();
    assert!((r - num / den).abs() < 0.01, "{r} vs {}", num / den);
}

#[test]
fn zero_fit_mise_is_signal_variance() {
    let spec = DgpSpec::new(ThetaCase::Id, 0.0, 8.0, 50).with_k(10);
    let train = gen_sample_rows(&spec, 50, 1).unwrap();
    let stats = SuffStats::from_design(&standardize(&train.design, false).unwrap());
    let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 1)).unwrap();
    let eval = gen_sample_rows(&spec, 5000, 2).unwrap();
    let m0 = mise_on(&path, 0, &eval).unwrap();
    let plug_in = eval.mu0.dot(&eval.mu0) / eval.mu0.len() as f64;
    assert!((m0 - plug_in).abs() < 1e-12);
    assert!((m0 - 1.0 / 3.0).abs() < 0.05, "{m0}");
}

#[test]
fn mise_is_stable_across_eval_seeds() {
    let spec = DgpSpec::new(ThetaCase::Id, 0.0, 0.25, 100).with_k(20);
    let train = gen_sample_rows(&spec, 100, 3).unwrap();
    let stats = SuffStats::from_design(&standardize(&train.design, false).unwrap());
    let path = fit(&stats, &AlgoConfig::new(Algorithm::Oga, 5)).unwrap();
    let mut means = Vec::new();
    let mut ses = Vec::new();
    for seed in [100, 200] {
        let eval = gen_sample_rows(&spec, 4000, seed).unwrap();
        let pred = greedy_predict::greedy::predict(&path, 5, eval.design.x().view()).unwrap();
        let sq: Array1<f64> = (&eval.mu0 - &pred).mapv(|v| v * v);
        let m = sq.mean().unwrap();
        let sd = sq.std(1.0);
        means.push(m);
        ses.push(sd / (sq.len() as f64).sqrt());
        assert_eq!(m.to_bits(), mise(&path, 5, &spec, 4000, seed).unwrap().to_bits());
    }
    let se = (ses[0].powi(2) + ses[1].powi(2)).sqrt();
    assert!((means[0] - means[1]).abs() < 5.0 * se);
}

#[test]
fn table_runs_are_reproducible() {
    let mut plan = TablePlan::new(vec![DgpSpec::new(ThetaCase::Sd, 0.75, 8.0, 20).with_k(15)]);
    plan.reps = 3;
    plan.n_eval = 100;
    plan.master_seed = 5;
    plan.tuning = Tuning::Cv {
        folds: 4,
        scheme: Default::default(),
    };
    let a = run_table(&plan).unwrap();
    let b = run_table(&plan).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.results.iter().all(|r| r.reps == 3 && r.mise_mean >= 0.0));
}
