//! Downlink coverage probability of a single-tier cellular network whose
//! base stations form a Poisson-Poisson cluster process (Thomas or Matern),
//! computed both analytically and by Monte Carlo simulation.

pub mod contact;
pub mod coverage;
pub mod error;
pub mod kernels;
pub mod quad;
pub mod simulate;
pub mod specfun;

pub use contact::{conditional_cd_cdf, conditional_cd_pdf, unconditional_cd_cdf, ClusterModel};
pub use coverage::{
    c_factor, contact_density_normalization, coverage_probability, m_functional, ppp_baseline,
    t_functional, PathLoss, SirThreshold,
};
pub use error::{Error, Result};
pub use kernels::DaughterKernel;
pub use quad::QuadratureConfig;
pub use simulate::{
    ks_statistic, mc_contact_distance, mc_coverage, mc_coverage_ppp, sample_realization,
    sir_at_origin, ContactSample, CoverageEstimate, McCoverage, Realization, SimConfig,
};
