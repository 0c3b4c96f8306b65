//! Stopping rules: degrees of freedom, information criteria, generalized
//! degrees of freedom and cross-validation.

mod cv;
mod dof;
mod gdf;
mod ic;

pub use cv::{cross_validate, CvGrid, CvPlan, CvResult, FoldScheme};
pub use dof::{dof, dof_path, sample_sd, DofOptions, NONZERO_TOL};
pub use gdf::{estimate_gdf, estimate_gdf_steps};
pub use ic::{aic, aicc, select_m_by_ic, Criterion, IcRecord, IcTrace};
