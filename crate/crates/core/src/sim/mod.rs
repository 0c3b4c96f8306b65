//! Monte Carlo benchmark: data generation, out-of-sample error and table runs.

mod dgp;
mod table;

pub use dgp::{
    gen_sample, gen_sample_rows, kappa, ma_filter, toeplitz_factor, CoeffScheme, DgpSpec, Sample,
    ThetaCase,
};
pub use table::{
    default_algorithms, derive_seed, mise, mise_on, preset, run_table, thread_count, AlgoSpec,
    CellResult, MonteCarloReport, TablePlan, Tuning, THREADS_ENV,
};
