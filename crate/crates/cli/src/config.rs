//! Flat key-value experiment configuration with dotted sections, e.g.
//!
//! ```text
//! mode = compare
//! model.kernel = thomas
//! model.sigma2 = 0.7
//! ```
//!
//! Unknown keys are rejected; `--set key=value` overrides reuse the same
//! parser.

use ppcpcov_core::QuadratureConfig;

#[derive(Debug, Clone, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Simulate,
    Compare,
    Contact,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "simulate" => Ok(Self::Simulate),
            "compare" => Ok(Self::Compare),
            "contact" => Ok(Self::Contact),
            other => Err(ConfigError(format!(
                "unknown mode '{other}' (expected analytic|simulate|compare|contact)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Simulate => "simulate",
            Self::Compare => "compare",
            Self::Contact => "contact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Thomas { sigma2: f64 },
    Matern { rd2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub kernel: KernelSpec,
    pub lambda_p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta_start_db: f64,
    pub theta_stop_db: f64,
    pub theta_step_db: f64,
    pub quad: QuadratureConfig,
    pub window_radius: f64,
    pub parent_buffer: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub contact_r_max: Option<f64>,
    pub contact_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Analytic,
            kernel: KernelSpec::Thomas { sigma2: 0.7 },
            lambda_p: 0.1 / std::f64::consts::PI,
            alpha: 10.0,
            beta: 4.0,
            theta_start_db: -10.0,
            theta_stop_db: 20.0,
            theta_step_db: 1.0,
            quad: QuadratureConfig::default(),
            window_radius: 100.0,
            parent_buffer: None,
            replications: 20_000,
            seed: 0,
            contact_r_max: None,
            contact_points: 200,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key}: expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got '{v}'")))
}

fn parse_auto_f64(key: &str, v: &str) -> Result<Option<f64>, ConfigError> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_f64(key, v).map(Some)
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "mode" => self.mode = Mode::parse(v)?,
            "model.kernel" => match v {
                "thomas" => {
                    if !matches!(self.kernel, KernelSpec::Thomas { .. }) {
                        self.kernel = KernelSpec::Thomas { sigma2: 0.7 };
                    }
                }
                "matern" => {
                    if !matches!(self.kernel, KernelSpec::Matern { .. }) {
                        self.kernel = KernelSpec::Matern { rd2: 2.8 };
                    }
                }
                other => {
                    return Err(ConfigError(format!(
                        "model.kernel: expected thomas|matern, got '{other}'"
                    )))
                }
            },
            "model.sigma2" => {
                let sigma2 = parse_f64(key, v)?;
                match &mut self.kernel {
                    KernelSpec::Thomas { sigma2: s } => *s = sigma2,
                    _ => {
                        return Err(ConfigError(
                            "model.sigma2 requires model.kernel = thomas (set the kernel first)"
                                .into(),
                        ))
                    }
                }
            }
            "model.rd2" => {
                let rd2 = parse_f64(key, v)?;
                match &mut self.kernel {
                    KernelSpec::Matern { rd2: r } => *r = rd2,
                    _ => {
                        return Err(ConfigError(
                            "model.rd2 requires model.kernel = matern (set the kernel first)"
                                .into(),
                        ))
                    }
                }
            }
            "model.lambda_p" => self.lambda_p = parse_f64(key, v)?,
            "model.alpha" => self.alpha = parse_f64(key, v)?,
            "pathloss.beta" => self.beta = parse_f64(key, v)?,
            "theta.start_db" => self.theta_start_db = parse_f64(key, v)?,
            "theta.stop_db" => self.theta_stop_db = parse_f64(key, v)?,
            "theta.step_db" => self.theta_step_db = parse_f64(key, v)?,
            "quad.rel_tol" => self.quad.rel_tol = parse_f64(key, v)?,
            "quad.abs_tol" => self.quad.abs_tol = parse_f64(key, v)?,
            "quad.tail_mass_cutoff" => self.quad.tail_mass_cutoff = parse_f64(key, v)?,
            "quad.max_subdivisions" => self.quad.max_subdivisions = parse_usize(key, v)?,
            "sim.window_radius" => self.window_radius = parse_f64(key, v)?,
            "sim.parent_buffer" => self.parent_buffer = parse_auto_f64(key, v)?,
            "sim.replications" => self.replications = parse_usize(key, v)?,
            "sim.seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| ConfigError(format!("sim.seed: expected a u64, got '{v}'")))?
            }
            "contact.r_max" => self.contact_r_max = parse_auto_f64(key, v)?,
            "contact.points" => self.contact_points = parse_usize(key, v)?,
            other => return Err(ConfigError(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a whole config file body.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(())
    }

    /// Apply a `--set key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError(format!(
                "--set expects key=value, got '{assignment}'"
            )));
        };
        self.set(key.trim(), value.trim())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(ConfigError(format!("{name} must be > 0, got {x}")))
            }
        };
        match self.kernel {
            KernelSpec::Thomas { sigma2 } => positive("model.sigma2", sigma2)?,
            KernelSpec::Matern { rd2 } => positive("model.rd2", rd2)?,
        }
        positive("model.lambda_p", self.lambda_p)?;
        positive("model.alpha", self.alpha)?;
        if !(self.beta.is_finite() && self.beta > 2.0) {
            return Err(ConfigError(format!(
                "pathloss.beta must be > 2, got {}",
                self.beta
            )));
        }
        positive("theta.step_db", self.theta_step_db)?;
        if self.theta_grid_db().is_empty() {
            return Err(ConfigError(format!(
                "empty theta grid: start {} dB > stop {} dB",
                self.theta_start_db, self.theta_stop_db
            )));
        }
        positive("sim.window_radius", self.window_radius)?;
        if self.replications == 0 {
            return Err(ConfigError("sim.replications must be >= 1".into()));
        }
        if self.contact_points == 0 {
            return Err(ConfigError("contact.points must be >= 1".into()));
        }
        Ok(())
    }

    /// Inclusive dB grid from start to stop.
    pub fn theta_grid_db(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        if self.theta_step_db <= 0.0 {
            return grid;
        }
        let n = ((self.theta_stop_db - self.theta_start_db) / self.theta_step_db + 1e-9).floor();
        if n < 0.0 {
            return grid;
        }
        for i in 0..=(n as usize) {
            grid.push(self.theta_start_db + i as f64 * self.theta_step_db);
        }
        grid
    }

    /// Canonical text form; re-parsing reproduces the same effective config.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let auto = |v: Option<f64>| v.map_or("auto".to_string(), |x| format!("{x}"));
        out.push_str(&format!("mode = {}\n", self.mode.as_str()));
        match self.kernel {
            KernelSpec::Thomas { sigma2 } => {
                out.push_str("model.kernel = thomas\n");
                out.push_str(&format!("model.sigma2 = {sigma2}\n"));
            }
            KernelSpec::Matern { rd2 } => {
                out.push_str("model.kernel = matern\n");
                out.push_str(&format!("model.rd2 = {rd2}\n"));
            }
        }
        out.push_str(&format!("model.lambda_p = {}\n", self.lambda_p));
        out.push_str(&format!("model.alpha = {}\n", self.alpha));
        out.push_str(&format!("pathloss.beta = {}\n", self.beta));
        out.push_str(&format!("theta.start_db = {}\n", self.theta_start_db));
        out.push_str(&format!("theta.stop_db = {}\n", self.theta_stop_db));
        out.push_str(&format!("theta.step_db = {}\n", self.theta_step_db));
        out.push_str(&format!("quad.rel_tol = {}\n", self.quad.rel_tol));
        out.push_str(&format!("quad.abs_tol = {}\n", self.quad.abs_tol));
        out.push_str(&format!("quad.tail_mass_cutoff = {}\n", self.quad.tail_mass_cutoff));
        out.push_str(&format!("quad.max_subdivisions = {}\n", self.quad.max_subdivisions));
        out.push_str(&format!("sim.window_radius = {}\n", self.window_radius));
        out.push_str(&format!("sim.parent_buffer = {}\n", auto(self.parent_buffer)));
        out.push_str(&format!("sim.replications = {}\n", self.replications));
        out.push_str(&format!("sim.seed = {}\n", self.seed));
        out.push_str(&format!("contact.r_max = {}\n", auto(self.contact_r_max)));
        out.push_str(&format!("contact.points = {}\n", self.contact_points));
        out
    }
}

/// The six experiment presets: three Thomas cluster spreads and three Matern
/// disk radii with matching second moments, all at lambda_p = 0.1/pi,
/// alpha = 10, beta = 4, window radius 100 and 20,000 replications.
pub fn builtin_presets() -> Vec<(&'static str, ExperimentConfig)> {
    let base = ExperimentConfig {
        mode: Mode::Compare,
        ..ExperimentConfig::default()
    };
    let mut presets = Vec::new();
    for sigma2 in [0.3, 0.7, 1.5] {
        let name: &'static str = match sigma2 {
            0.3 => "tpp-0.3",
            0.7 => "tpp-0.7",
            _ => "tpp-1.5",
        };
        presets.push((
            name,
            ExperimentConfig {
                kernel: KernelSpec::Thomas { sigma2 },
                ..base.clone()
            },
        ));
    }
    for rd2 in [1.2, 2.8, 6.0] {
        let name: &'static str = match rd2 {
            1.2 => "mcp-1.2",
            2.8 => "mcp-2.8",
            _ => "mcp-6.0",
        };
        presets.push((
            name,
            ExperimentConfig {
                kernel: KernelSpec::Matern { rd2 },
                ..base.clone()
            },
        ));
    }
    presets
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    builtin_presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
}
