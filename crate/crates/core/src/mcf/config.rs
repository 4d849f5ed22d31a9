use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gamma distribution in shape–rate form (mean = shape / rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub const fn new(shape: f64, rate: f64) -> Self {
        Self { shape, rate }
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub(crate) fn validate(&self, name: &str) -> Result<()> {
        if !(self.shape > 0.0 && self.rate > 0.0 && self.shape.is_finite() && self.rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "{name} prior needs positive finite shape and rate, got ({}, {})",
                self.shape, self.rate
            )));
        }
        Ok(())
    }

    pub(crate) fn distribution(&self) -> rand_distr::Gamma<f64> {
        rand_distr::Gamma::new(self.shape, 1.0 / self.rate).expect("validated gamma prior")
    }
}

impl Default for GammaPrior {
    fn default() -> Self {
        Self::new(1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    #[default]
    GammaPrior,
    Uniform,
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMode::GammaPrior => "gamma_prior",
            InitMode::Uniform => "uniform",
        })
    }
}

impl FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gamma_prior" | "gamma-prior" => Ok(InitMode::GammaPrior),
            "uniform" => Ok(InitMode::Uniform),
            other => Err(format!("unknown init mode {other:?}")),
        }
    }
}

/// Solver settings for the weighted co-factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McfConfig {
    /// Number of latent skills `T`.
    pub latent_skills: usize,
    /// Weight of the Q reconstruction term.
    pub beta: f64,
    pub lambda_e: f64,
    pub lambda_u: f64,
    pub lambda_v: f64,
    pub max_iters: usize,
    /// Stop once the relative objective decrease drops below this.
    pub tol: f64,
    /// Added to every multiplicative-update denominator.
    pub epsilon: f64,
    pub seed: u64,
    pub init: InitMode,
    pub prior_e: GammaPrior,
    pub prior_u: GammaPrior,
    pub prior_v: GammaPrior,
}

impl Default for McfConfig {
    fn default() -> Self {
        Self {
            latent_skills: 16,
            beta: 1.0,
            lambda_e: 0.01,
            lambda_u: 0.01,
            lambda_v: 0.01,
            max_iters: 2000,
            tol: 1e-6,
            epsilon: 1e-12,
            seed: 0,
            init: InitMode::GammaPrior,
            prior_e: GammaPrior::default(),
            prior_u: GammaPrior::default(),
            prior_v: GammaPrior::default(),
        }
    }
}

impl McfConfig {
    pub fn with_skills(latent_skills: usize) -> Self {
        Self {
            latent_skills,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_skills == 0 {
            return Err(Error::InvalidConfig("latent_skills must be at least 1".into()));
        }
        for (name, v) in [
            ("beta", self.beta),
            ("lambda_e", self.lambda_e),
            ("lambda_u", self.lambda_u),
            ("lambda_v", self.lambda_v),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        self.prior_e.validate("E")?;
        self.prior_u.validate("U")?;
        self.prior_v.validate("V")
    }
}
