//! Analytic coverage probability: the inner factor C(r,s,theta), the
//! functionals T and M, the outer integral, and a homogeneous-PPP baseline
//! used as a limiting-case oracle.

use std::cell::RefCell;

use crate::contact::{void_probability, unconditional_cd_cdf, ClusterModel};
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

const PI: f64 = std::f64::consts::PI;

/// Power-law path loss l(r) = r^(-beta). The coverage integrals are finite
/// iff beta > 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    beta: f64,
}

impl PathLoss {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 2.0) {
            return Err(Error::InvalidParameter(format!("beta must be > 2, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ell(&self, r: f64) -> f64 {
        r.powf(-self.beta)
    }
}

/// Linear SIR threshold. User interfaces speak dB; everything internal is
/// linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirThreshold {
    linear: f64,
}

impl SirThreshold {
    pub fn from_linear(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "SIR threshold must be finite and >= 0, got {theta}"
            )));
        }
        Ok(Self { linear: theta })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::InvalidParameter(format!("dB threshold must be finite, got {db}")));
        }
        Ok(Self { linear: 10f64.powf(db / 10.0) })
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn db(&self) -> f64 {
        10.0 * self.linear.log10()
    }
}

// Captures the first error raised inside a quadrature closure; the closure
// reports NaN to the integrator, which aborts, and the stored error wins.
struct ErrorCapture(RefCell<Option<Error>>);

impl ErrorCapture {
    fn new() -> Self {
        Self(RefCell::new(None))
    }

    fn eval(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn resolve(&self, context: &'static str, e: quad::QuadError) -> Error {
        if let Some(inner) = self.0.borrow_mut().take() {
            return inner;
        }
        match e {
            quad::QuadError::ToleranceNotReached { value, abs_error } => Error::Quadrature {
                context,
                value,
                abs_error,
            },
            quad::QuadError::NonFinite => {
                Error::Domain(format!("non-finite integrand in {context}"))
            }
        }
    }
}

/// C(r,s,theta) = exp{-alpha [1 - int_r^inf (1 + theta (r/u)^beta)^(-1) g(u|s) du]}.
///
/// The bracket is computed as the positive deficit
/// D = int_r^inf g(u|s) q(u) du + G(r|s), with q = theta (r/u)^beta / (1 + ...),
/// never as 1 minus a quantity close to 1: for distant parents 1 - C is
/// tiny and the downstream M integral needs it to full relative precision.
pub fn c_factor(
    model: &ClusterModel,
    pl: &PathLoss,
    r: f64,
    s: f64,
    theta: &SirThreshold,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok((-model.alpha * c_deficit(model, pl, r, s, theta, cfg)?).exp())
}

/// The bracket [1 - int w g du] of C(r,s,theta), to full relative precision.
fn c_deficit(
    model: &ClusterModel,
    pl: &PathLoss,
    r: f64,
    s: f64,
    theta: &SirThreshold,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("r must be > 0, got {r}")));
    }
    let th = theta.linear();
    let below = model.kernel.cdf(r, s)?;
    if th == 0.0 {
        return Ok(below);
    }

    let (lo, hi) = model.kernel.pdf_support(s);
    let lo = lo.max(r);
    let interference = if hi <= lo {
        0.0
    } else {
        let mut points = vec![lo];
        for k in model.kernel.pdf_kinks(s) {
            if k > lo && k < hi {
                points.push(k);
            }
        }
        points.push(hi);
        points.sort_by(f64::total_cmp);
        let beta = pl.beta();
        let cap = ErrorCapture::new();
        let f = |u: f64| {
            let q = th * (r / u).powf(beta);
            cap.eval(model.kernel.pdf(u, s)) * (q / (1.0 + q))
        };
        let res = quad::adaptive(&f, &points, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
            .map_err(|e| cap.resolve("C(r,s,theta) u-integral", e))?;
        res.value.max(0.0)
    };
    Ok(below + interference)
}

/// T(r,theta) = 2 pi lambda_p int_0^inf g(r|s) C(r,s,theta) s ds.
pub fn t_functional(
    model: &ClusterModel,
    pl: &PathLoss,
    r: f64,
    theta: &SirThreshold,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("r must be > 0, got {r}")));
    }
    // By the symmetry s g(r|s) = r g(s|r), the s-support and kinks of
    // g(r|.) coincide with those of g(.|r).
    let (lo, hi) = model.kernel.pdf_support(r);
    let mut points = vec![lo];
    for k in model.kernel.pdf_kinks(r) {
        if k > lo && k < hi {
            points.push(k);
        }
    }
    points.push(hi);
    points.sort_by(f64::total_cmp);

    let inner_cfg = cfg.tightened(0.1);
    let cap = ErrorCapture::new();
    let f = |s: f64| {
        let g = cap.eval(model.kernel.pdf(r, s));
        if g == 0.0 {
            return 0.0;
        }
        g * cap.eval(c_factor(model, pl, r, s, theta, &inner_cfg)) * s
    };
    let res = quad::adaptive(&f, &points, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        .map_err(|e| cap.resolve("T(r,theta) s-integral", e))?;
    Ok((2.0 * PI * model.lambda_p * res.value).max(0.0))
}

/// M(r,theta) = exp{-2 pi lambda_p int_0^inf [1 - C(r,s,theta)] s ds}.
///
/// The s-integrand decays only polynomially (like s^(2-beta) after the s
/// weight); the semi-infinite range is mapped through s = c t/(1-t), and a
/// the range is truncated at the point beyond which the analytic envelope
/// 1 - C <= alpha theta (r/s)^beta certifies tail mass below the cutoff.
pub fn m_functional(
    model: &ClusterModel,
    pl: &PathLoss,
    r: f64,
    theta: &SirThreshold,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("r must be > 0, got {r}")));
    }
    let th = theta.linear();
    if th == 0.0 {
        return void_probability(model, r, cfg);
    }

    let beta = pl.beta();
    let scale = r + 3.0 * model.kernel.spread();

    // Envelope tail: 2 pi lambda_p int_S^inf alpha theta r^beta s^(1-beta) ds
    // = 2 pi lambda_p alpha theta r^beta S^(2-beta)/(beta-2). Solve for the S
    // where this equals the tail-mass cutoff.
    let s_cert = (2.0 * PI * model.lambda_p * model.alpha * th * r.powf(beta)
        / ((beta - 2.0) * cfg.tail_mass_cutoff))
        .powf(1.0 / (beta - 2.0))
        .max(r + model.kernel.effective_radius());
    let t_cert = s_cert / (s_cert + scale);
    if 1.0 - t_cert < 1e-13 {
        return Err(Error::TailBound {
            context: "M(r,theta) s-integral",
            envelope: cfg.tail_mass_cutoff * (1.0 / (1.0 - t_cert)),
            cutoff: cfg.tail_mass_cutoff,
        });
    }

    let inner_cfg = cfg.tightened(0.1);
    let cap = ErrorCapture::new();
    let f = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = scale * t / (1.0 - t);
        let jac = scale / ((1.0 - t) * (1.0 - t));
        let deficit = cap.eval(c_deficit(model, pl, r, s, theta, &inner_cfg));
        // 1 - C = -expm1(-alpha D), exact even when C is within an ulp of 1.
        -(-model.alpha * deficit).exp_m1() * s * jac
    };
    let t_peak = r / (r + scale);
    let mut points = vec![0.0, t_peak, t_cert];
    points.sort_by(f64::total_cmp);
    points.dedup();
    let res = quad::adaptive(&f, &points, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        .map_err(|e| cap.resolve("M(r,theta) s-integral", e))?;
    Ok((-2.0 * PI * model.lambda_p * res.value).exp().clamp(0.0, 1.0))
}

/// Smallest radius whose contact-distance tail mass is below the cutoff,
/// found by doubling.
fn outer_radius(model: &ClusterModel, cfg: &QuadratureConfig) -> Result<f64> {
    let mut r = model
        .kernel
        .spread()
        .max(0.5 / model.total_intensity().sqrt());
    for _ in 0..60 {
        if 1.0 - unconditional_cd_cdf(model, r, cfg)? < cfg.tail_mass_cutoff {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(Error::Quadrature {
        context: "outer radius search",
        value: r,
        abs_error: f64::INFINITY,
    })
}

/// P(SIR > theta) = alpha int_0^inf T(r,theta) M(r,theta) dr (Rayleigh
/// fading, nearest-BS association, interference-limited).
pub fn coverage_probability(
    model: &ClusterModel,
    pl: &PathLoss,
    theta: &SirThreshold,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if theta.linear() == 0.0 {
        // alpha int T(r,0) M(r,0) dr is the contact-distance density, which
        // integrates to one.
        return Ok(1.0);
    }
    let r_max = outer_radius(model, cfg)?;
    let level_cfg = cfg.tightened(0.1);
    let cap = ErrorCapture::new();
    let f = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let t = cap.eval(t_functional(model, pl, r, theta, &level_cfg));
        let m = cap.eval(m_functional(model, pl, r, theta, &level_cfg));
        model.alpha * t * m
    };
    // Seed the subdivision around the bulk of the contact-distance mass.
    let mut r_med = r_max;
    while r_med > 1e-6 && unconditional_cd_cdf(model, r_med * 0.5, cfg)? > 0.5 {
        r_med *= 0.5;
    }
    let mut points = vec![0.0, r_med * 0.5, r_med, r_max];
    points.sort_by(f64::total_cmp);
    points.dedup();
    let res = quad::adaptive(&f, &points, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        .map_err(|e| cap.resolve("coverage outer r-integral", e))?;
    Ok(res.value.clamp(0.0, 1.0))
}

/// alpha int_0^Rmax T(r,0) M(r,0) dr: the total mass of the contact-distance
/// density implied by the coverage formula. Equals 1 up to quadrature and
/// truncation error.
pub fn contact_density_normalization(model: &ClusterModel, cfg: &QuadratureConfig) -> Result<f64> {
    let pl = PathLoss::new(4.0)?; // unused at theta = 0
    let zero = SirThreshold::from_linear(0.0)?;
    let r_max = outer_radius(model, cfg)?;
    let level_cfg = cfg.tightened(0.1);
    let cap = ErrorCapture::new();
    let f = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let t = cap.eval(t_functional(model, &pl, r, &zero, &level_cfg));
        let m = cap.eval(m_functional(model, &pl, r, &zero, &level_cfg));
        model.alpha * t * m
    };
    let res = quad::adaptive(&f, &[0.0, r_max * 0.25, r_max], cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
        .map_err(|e| cap.resolve("contact normalization r-integral", e))?;
    Ok(res.value)
}

/// Coverage of a homogeneous-PPP network with nearest-BS association,
/// Rayleigh fading and interference-limited operation:
/// 1/(1 + rho) with rho = theta^(2/beta) int_{theta^(-2/beta)}^inf du/(1+u^(beta/2)).
/// Density-independent; used as the large-spread limit oracle.
pub fn ppp_baseline(theta: &SirThreshold, beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if beta <= 2.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be > 2, got {beta}")));
    }
    let th = theta.linear();
    if th == 0.0 {
        return Ok(1.0);
    }
    let lower = th.powf(-2.0 / beta);
    // u = lower / t maps the semi-infinite range to t in (0, 1].
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let u = lower / t;
        (lower / (t * t)) / (1.0 + u.powf(beta / 2.0))
    };
    let res = quad::adaptive_ab(&f, 0.0, 1.0, cfg.rel_tol * 0.01, cfg.abs_tol * 0.01, cfg.max_subdivisions)
        .map_err(|e| match e {
            quad::QuadError::ToleranceNotReached { value, abs_error } => Error::Quadrature {
                context: "ppp baseline integral",
                value,
                abs_error,
            },
            quad::QuadError::NonFinite => {
                Error::Domain("non-finite integrand in ppp baseline".into())
            }
        })?;
    let rho = th.powf(2.0 / beta) * res.value;
    Ok(1.0 / (1.0 + rho))
}
