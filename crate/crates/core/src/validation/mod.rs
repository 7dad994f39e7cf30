//! Statistical and numerical checks of the samplers and kernels.

mod jacobian;
mod ks;
mod moments;
mod oracle;
mod special;
pub mod suite;

pub use jacobian::{fd_logdet_jacobian, tri_coordinates, FD_STEP};
pub use ks::{
    kolmogorov_pvalue, kolmogorov_survival, ks_one_sample, ks_two_sample, KsResult, MIN_KS_SAMPLES,
};
pub use moments::{mc_mean_invwishart, mc_mean_wishart, MomentReport, MIN_CONFIDENT_SAMPLES};
pub use oracle::rwishart_outer_oracle;
pub use special::{chi_square_cdf, gamma_cdf, inverse_gamma_cdf};
pub use suite::{run_check, run_suite, CheckRecord};
