//! Greedy algorithms for high-dimensional linear prediction: pure, orthogonal,
//! relaxed and constrained greedy fits plus Frank-Wolfe, with model selection
//! and a Monte Carlo harness.

pub mod design;
pub mod error;
pub mod greedy;
pub mod io;
pub mod oracles;
pub mod select;
pub mod sim;

pub use design::{
    restricted_eigenvalue, standardize, standardize_with, RawDesign, StandardizedDesign,
    Standardization, SuffStats,
};
pub use error::{GreedyError, Result};
pub use greedy::{fit, predict, AlgoConfig, Algorithm, GreedyPath, WeightRule};
