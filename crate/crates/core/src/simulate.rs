//! Monte Carlo ground truth: PPCP realizations on a disk window, Rayleigh
//! fading, nearest-BS association, coverage and contact-distance estimation.
//!
//! Every replication draws from its own counter-based substream (ChaCha with
//! the replication index as the stream id), so results are bit-identical
//! regardless of worker count or evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::contact::ClusterModel;
use crate::coverage::{PathLoss, SirThreshold};
use crate::error::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Simulation window and replication parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub window_radius: f64,
    /// Extra radius for parent sampling so daughters of off-window parents
    /// spill into the window correctly. `None` picks 5 sigma (Thomas) or the
    /// kernel radius.
    pub parent_buffer: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub thresholds: Vec<SirThreshold>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            window_radius: 100.0,
            parent_buffer: None,
            replications: 20_000,
            seed: 0,
            thresholds: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_radius.is_finite() && self.window_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window_radius must be > 0, got {}",
                self.window_radius
            )));
        }
        if let Some(b) = self.parent_buffer {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "parent_buffer must be >= 0, got {b}"
                )));
            }
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        Ok(())
    }

    pub fn buffer_for(&self, model: &ClusterModel) -> f64 {
        self.parent_buffer.unwrap_or_else(|| match &model.kernel {
            crate::kernels::DaughterKernel::Thomas { sigma } => 5.0 * sigma,
            _ => model.kernel.effective_radius(),
        })
    }
}

/// One sampled PPCP: parent points and the daughter points that form the BS
/// set, with the parent index of each daughter.
#[derive(Debug, Clone, Default)]
pub struct Realization {
    pub parents: Vec<[f64; 2]>,
    pub daughters: Vec<[f64; 2]>,
    pub parent_of: Vec<u32>,
}

/// Coverage estimate at one threshold.
#[derive(Debug, Clone, Copy)]
pub struct CoverageEstimate {
    pub theta: SirThreshold,
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// Coverage estimates plus run diagnostics.
#[derive(Debug, Clone)]
pub struct McCoverage {
    pub estimates: Vec<CoverageEstimate>,
    /// Replications with no BS at all (counted as not covered).
    pub empty_windows: usize,
}

/// Empirical contact-distance sample.
#[derive(Debug, Clone)]
pub struct ContactSample {
    /// Nearest-BS distance per non-empty replication, ascending.
    pub distances: Vec<f64>,
    pub empty_windows: usize,
}

fn substream(seed: u64, replication: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication << 1 | lane);
    rng
}

fn sample_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = 2.0 * PI * rng.gen::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

/// Sample one PPCP realization: parents as a homogeneous PPP on the disk of
/// radius `window_radius + buffer`, Poisson(alpha) daughters per parent,
/// kept wherever they land. Deterministic given (seed, replication_index).
pub fn sample_realization(model: &ClusterModel, cfg: &SimConfig, replication_index: u64) -> Realization {
    let mut rng = substream(cfg.seed, replication_index, 0);
    let radius = cfg.window_radius + cfg.buffer_for(model);
    let mean_parents = model.lambda_p * PI * radius * radius;
    let n_parents = Poisson::new(mean_parents).expect("positive mean").sample(&mut rng) as usize;
    let daughter_count = Poisson::new(model.alpha).expect("positive alpha");

    let mut real = Realization::default();
    real.parents.reserve(n_parents);
    for i in 0..n_parents {
        let parent = sample_disk(radius, &mut rng);
        real.parents.push(parent);
        let n_d = daughter_count.sample(&mut rng) as usize;
        for _ in 0..n_d {
            let off = model.kernel.sample_offset(&mut rng);
            real.daughters.push([parent[0] + off[0], parent[1] + off[1]]);
            real.parent_of.push(i as u32);
        }
    }
    real
}

/// SIR of the nearest BS against all others, with fixed fading marks.
/// `None` for an empty BS set; +inf when the nearest BS is alone.
pub fn sir_from_marks(distances: &[f64], fading: &[f64], pl: &PathLoss) -> Option<f64> {
    assert_eq!(distances.len(), fading.len());
    if distances.is_empty() {
        return None;
    }
    let mut nearest = 0usize;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[nearest] {
            nearest = i;
        }
    }
    let mut interference = 0.0;
    for (i, (&d, &h)) in distances.iter().zip(fading).enumerate() {
        if i != nearest {
            interference += h * pl.ell(d);
        }
    }
    let signal = fading[nearest] * pl.ell(distances[nearest]);
    if interference == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(signal / interference)
    }
}

/// Draw i.i.d. unit-mean exponential fading per BS and return the SIR at the
/// origin.
pub fn sir_at_origin<R: Rng + ?Sized>(real: &Realization, pl: &PathLoss, rng: &mut R) -> Option<f64> {
    if real.daughters.is_empty() {
        return None;
    }
    let distances: Vec<f64> = real
        .daughters
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    let fading: Vec<f64> = (0..distances.len()).map(|_| rng.sample(Exp1)).collect();
    sir_from_marks(&distances, &fading, pl)
}

/// Estimate coverage over an arbitrary realization sampler. All thresholds
/// are evaluated on the same SIR draw per replication (common random
/// numbers), so estimates at sorted thresholds are nonincreasing by
/// construction.
pub fn mc_coverage_with<S>(cfg: &SimConfig, pl: &PathLoss, sampler: S) -> Result<McCoverage>
where
    S: Fn(u64) -> Realization + Sync,
{
    cfg.validate()?;
    if cfg.thresholds.is_empty() {
        return Err(Error::InvalidParameter("no SIR thresholds supplied".into()));
    }
    let n_thr = cfg.thresholds.len();
    let n = cfg.replications;

    let (counts, empty) = (0..n as u64)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_thr], 0u64),
            |(mut counts, mut empty), rep| {
                let real = sampler(rep);
                let mut rng = substream(cfg.seed, rep, 1);
                match sir_at_origin(&real, pl, &mut rng) {
                    Some(sir) => {
                        for (k, theta) in cfg.thresholds.iter().enumerate() {
                            if sir > theta.linear() {
                                counts[k] += 1;
                            }
                        }
                    }
                    None => empty += 1,
                }
                (counts, empty)
            },
        )
        .reduce(
            || (vec![0u64; n_thr], 0u64),
            |(mut a, ea), (b, eb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, ea + eb)
            },
        );

    let estimates = cfg
        .thresholds
        .iter()
        .zip(&counts)
        .map(|(&theta, &c)| {
            let mean = c as f64 / n as f64;
            CoverageEstimate {
                theta,
                mean,
                std_error: (mean * (1.0 - mean) / n as f64).sqrt(),
                replications: n,
            }
        })
        .collect();

    Ok(McCoverage { estimates, empty_windows: empty as usize })
}

/// Monte Carlo coverage of the PPCP model.
pub fn mc_coverage(model: &ClusterModel, pl: &PathLoss, cfg: &SimConfig) -> Result<McCoverage> {
    mc_coverage_with(cfg, pl, |rep| sample_realization(model, cfg, rep))
}

/// Monte Carlo coverage of a homogeneous PPP of the given intensity on the
/// window disk. Validation harness for the PPP closed form.
pub fn mc_coverage_ppp(lambda: f64, pl: &PathLoss, cfg: &SimConfig) -> Result<McCoverage> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let radius = cfg.window_radius;
    let seed = cfg.seed;
    mc_coverage_with(cfg, pl, move |rep| {
        let mut rng = substream(seed, rep, 0);
        let mean = lambda * PI * radius * radius;
        let n = Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize;
        let mut real = Realization::default();
        for i in 0..n {
            real.daughters.push(sample_disk(radius, &mut rng));
            real.parent_of.push(i as u32);
        }
        real
    })
}

/// Distance from the origin to the nearest BS, per replication.
pub fn mc_contact_distance(model: &ClusterModel, cfg: &SimConfig) -> Result<ContactSample> {
    cfg.validate()?;
    let per_rep: Vec<Option<f64>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let real = sample_realization(model, cfg, rep);
            real.daughters
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
                .min_by(f64::total_cmp)
        })
        .collect();

    let empty_windows = per_rep.iter().filter(|d| d.is_none()).count();
    let mut distances: Vec<f64> = per_rep.into_iter().flatten().collect();
    distances.sort_by(f64::total_cmp);
    Ok(ContactSample { distances, empty_windows })
}

/// Kolmogorov-Smirnov distance between an ascending sample and a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}
