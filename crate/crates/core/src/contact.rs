//! Contact-distance distributions of the PPCP: conditional on a realized
//! parent set and unconditional.

use crate::error::{check_nonneg, Error, Result};
use crate::kernels::DaughterKernel;
use crate::quad::{self, QuadratureConfig};

const PI: f64 = std::f64::consts::PI;

/// Full description of a Poisson-Poisson cluster process: homogeneous
/// parents of intensity `lambda_p`, Poisson(`alpha`) daughters per parent
/// displaced by `kernel`. Total intensity is `lambda_p * alpha`.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub lambda_p: f64,
    pub alpha: f64,
    pub kernel: DaughterKernel,
}

impl ClusterModel {
    pub fn new(lambda_p: f64, alpha: f64, kernel: DaughterKernel) -> Result<Self> {
        if !(lambda_p.is_finite() && lambda_p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda_p must be > 0, got {lambda_p}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(Self { lambda_p, alpha, kernel })
    }

    pub fn total_intensity(&self) -> f64 {
        self.lambda_p * self.alpha
    }
}

/// P(contact distance <= r | parents at the given distances):
/// 1 - prod_i exp{-alpha G(r | s_i)}.
///
/// The parent list is a truncated realization; parents with
/// alpha * G(r|s) < 1e-14 contribute negligibly and may be dropped by the
/// caller.
pub fn conditional_cd_cdf(
    model: &ClusterModel,
    r: f64,
    parent_distances: &[f64],
) -> Result<f64> {
    check_nonneg("r", r)?;
    let mut exponent = 0.0;
    for &s in parent_distances {
        check_nonneg("parent distance", s)?;
        exponent += model.kernel.cdf(r, s)?;
    }
    Ok(1.0 - (-model.alpha * exponent).exp())
}

/// Density of the conditional contact distance:
/// alpha (sum_i g(r|s_i)) prod_i exp{-alpha G(r|s_i)}.
pub fn conditional_cd_pdf(
    model: &ClusterModel,
    r: f64,
    parent_distances: &[f64],
) -> Result<f64> {
    check_nonneg("r", r)?;
    let mut g_sum = 0.0;
    let mut exponent = 0.0;
    for &s in parent_distances {
        check_nonneg("parent distance", s)?;
        g_sum += model.kernel.pdf(r, s)?;
        exponent += model.kernel.cdf(r, s)?;
    }
    Ok(model.alpha * g_sum * (-model.alpha * exponent).exp())
}

/// Unconditional contact distance distribution
/// F_cd(r) = 1 - exp{-2 pi lambda_p int_0^inf [1 - e^{-alpha G(r|s)}] s ds}.
pub fn unconditional_cd_cdf(model: &ClusterModel, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_nonneg("r", r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - void_probability(model, r, cfg)?)
}

/// P(no point of the process within distance r) = exp{-2 pi lambda_p J(r)}.
/// This equals M(r, 0) of the coverage formula.
pub(crate) fn void_probability(
    model: &ClusterModel,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    // G(r|s) vanishes (Matern/numeric: exactly, Thomas: negligibly) once the
    // parent is farther than r plus the kernel radius, so the s-integral has
    // effective support [0, r + radius].
    let hi = r + model.kernel.effective_radius();
    let alpha = model.alpha;
    let f = |s: f64| {
        let g = model.kernel.cdf(r, s).unwrap_or(f64::NAN);
        (1.0 - (-alpha * g).exp()) * s
    };
    let points = if r < hi { vec![0.0, r, hi] } else { vec![0.0, hi] };
    let res = quad::adaptive(&f, &points, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        .map_err(|e| match e {
            quad::QuadError::ToleranceNotReached { value, abs_error } => Error::Quadrature {
                context: "unconditional contact distance s-integral",
                value,
                abs_error,
            },
            quad::QuadError::NonFinite => {
                Error::Domain("non-finite integrand in contact distance integral".into())
            }
        })?;
    Ok((-2.0 * PI * model.lambda_p * res.value).exp())
}
