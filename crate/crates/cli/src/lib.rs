//! Library side of the `ppcpcov` CLI: experiment configuration, presets and
//! CSV rendering for the analytic/simulation coverage sweeps.

pub mod config;

use ppcpcov_core as core;
use ppcpcov_core::{
    coverage_probability, mc_contact_distance, mc_coverage, unconditional_cd_cdf, ClusterModel,
    DaughterKernel, PathLoss, SimConfig, SirThreshold,
};
use rayon::prelude::*;

pub use config::{builtin_presets, preset, ConfigError, ExperimentConfig, KernelSpec, Mode};

/// Environment variable limiting simulation worker threads. Absent: all
/// available parallelism.
pub const WORKERS_ENV: &str = "PPCPCOV_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<core::Error> for CliError {
    fn from(e: core::Error) -> Self {
        match e {
            core::Error::Domain(_) | core::Error::InvalidParameter(_) => {
                Self::Config(ConfigError(e.to_string()))
            }
            other => Self::Compute(other),
        }
    }
}

impl CliError {
    /// Distinct exit codes: 2 config, 3 quadrature/tail, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Compute(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

/// Configure the global worker pool from `PPCPCOV_THREADS`. Call once at
/// startup; estimates do not depend on the worker count.
pub fn init_workers() {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Decimal with 10 significant digits; the fixed CSV number format.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    let prec = (9 - exp).max(0) as usize;
    format!("{x:.prec$}")
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<(ClusterModel, PathLoss), CliError> {
    let kernel = match cfg.kernel {
        KernelSpec::Thomas { sigma2 } => DaughterKernel::thomas(sigma2.sqrt())?,
        KernelSpec::Matern { rd2 } => DaughterKernel::matern(rd2.sqrt())?,
    };
    let model = ClusterModel::new(cfg.lambda_p, cfg.alpha, kernel)?;
    let pl = PathLoss::new(cfg.beta)?;
    Ok((model, pl))
}

fn sim_config(cfg: &ExperimentConfig, thresholds: Vec<SirThreshold>) -> SimConfig {
    SimConfig {
        window_radius: cfg.window_radius,
        parent_buffer: cfg.parent_buffer,
        replications: cfg.replications,
        seed: cfg.seed,
        thresholds,
    }
}

fn thresholds(cfg: &ExperimentConfig) -> Result<Vec<SirThreshold>, CliError> {
    cfg.theta_grid_db()
        .iter()
        .map(|&db| SirThreshold::from_db(db).map_err(CliError::from))
        .collect()
}

fn analytic_sweep(
    cfg: &ExperimentConfig,
    model: &ClusterModel,
    pl: &PathLoss,
) -> Result<Vec<f64>, CliError> {
    let ths = thresholds(cfg)?;
    let results: Vec<core::Result<f64>> = ths
        .par_iter()
        .map(|theta| coverage_probability(model, pl, theta, &cfg.quad))
        .collect();
    results
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

/// Render the CSV for the configured mode. Columns and formatting are fixed;
/// lines end with LF and a header row is always present.
pub fn render_csv(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let (model, pl) = build_model(cfg)?;
    let grid_db = cfg.theta_grid_db();
    let mut out = String::new();

    match cfg.mode {
        Mode::Analytic => {
            out.push_str("theta_db,coverage\n");
            let cov = analytic_sweep(cfg, &model, &pl)?;
            for (db, c) in grid_db.iter().zip(cov) {
                out.push_str(&format!("{},{}\n", fmt_sig(*db), fmt_sig(c)));
            }
        }
        Mode::Simulate => {
            out.push_str("theta_db,coverage,std_error\n");
            let mc = mc_coverage(&model, &pl, &sim_config(cfg, thresholds(cfg)?))?;
            for (db, est) in grid_db.iter().zip(&mc.estimates) {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig(*db),
                    fmt_sig(est.mean),
                    fmt_sig(est.std_error)
                ));
            }
        }
        Mode::Compare => {
            out.push_str("theta_db,analytic,mc_mean,mc_stderr,abs_diff,sigma_diff\n");
            let cov = analytic_sweep(cfg, &model, &pl)?;
            let mc = mc_coverage(&model, &pl, &sim_config(cfg, thresholds(cfg)?))?;
            for ((db, a), est) in grid_db.iter().zip(cov).zip(&mc.estimates) {
                let diff = (a - est.mean).abs();
                let sigma = if est.std_error > 0.0 {
                    diff / est.std_error
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_sig(*db),
                    fmt_sig(a),
                    fmt_sig(est.mean),
                    fmt_sig(est.std_error),
                    fmt_sig(diff),
                    fmt_sig(sigma)
                ));
            }
        }
        Mode::Contact => {
            out.push_str("r,analytic_cdf,empirical_cdf\n");
            let sample = mc_contact_distance(&model, &sim_config(cfg, Vec::new()))?;
            let r_max = match cfg.contact_r_max {
                Some(r) => r,
                None => {
                    let mut r = model.kernel.spread();
                    while unconditional_cd_cdf(&model, r, &cfg.quad)? < 0.999 {
                        r *= 2.0;
                        if r > 1e9 {
                            break;
                        }
                    }
                    r
                }
            };
            let n = sample.distances.len();
            for i in 0..=cfg.contact_points {
                let r = r_max * i as f64 / cfg.contact_points as f64;
                let analytic = unconditional_cd_cdf(&model, r, &cfg.quad)?;
                let count = sample.distances.partition_point(|&d| d <= r);
                let empirical = if n > 0 { count as f64 / n as f64 } else { 0.0 };
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig(r),
                    fmt_sig(analytic),
                    fmt_sig(empirical)
                ));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_formats() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1.000000000");
        assert_eq!(fmt_sig(0.5602), "0.5602000000");
        assert_eq!(fmt_sig(-10.0), "-10.00000000");
        assert_eq!(fmt_sig(123456.789), "123456.7890");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(0.00012345), "0.0001234500000");
    }

    #[test]
    fn analytic_csv_shape() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("theta.start_db = 0\ntheta.stop_db = 2\ntheta.step_db = 1\n")
            .unwrap();
        cfg.quad.rel_tol = 1e-4;
        let csv = render_csv(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta_db,coverage");
        assert_eq!(lines.len(), 4);
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 2);
            let c: f64 = cols[1].parse().unwrap();
            assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn simulate_csv_deterministic() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "mode = simulate\ntheta.start_db = 0\ntheta.stop_db = 10\ntheta.step_db = 5\n\
             sim.window_radius = 25\nsim.replications = 300\nsim.seed = 5\n",
        )
        .unwrap();
        let a = render_csv(&cfg).unwrap();
        let b = render_csv(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("theta_db,coverage,std_error\n"));
    }

    #[test]
    fn contact_csv_shape() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "mode = contact\nsim.window_radius = 20\nsim.replications = 200\ncontact.points = 10\n",
        )
        .unwrap();
        let csv = render_csv(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,analytic_cdf,empirical_cdf");
        assert_eq!(lines.len(), 12);
        let last: Vec<&str> = lines[11].split(',').collect();
        let analytic: f64 = last[1].parse().unwrap();
        assert!(analytic > 0.99);
    }

    #[test]
    fn invalid_config_surfaces_as_config_error() {
        let mut cfg = ExperimentConfig::default();
        cfg.theta_step_db = -1.0;
        match render_csv(&cfg) {
            Err(e @ CliError::Config(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
