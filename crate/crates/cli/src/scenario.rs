//! Scenario documents: the JSON configuration a stability sweep consumes.
//! Command-line flags override file values; unknown keys are rejected.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spectral_lab::potentials::{Perturbation, PotentialSpec, SignPattern};
use std::path::{Path, PathBuf};

pub const SITE_BUDGET_ENV: &str = "SPECTRAL_LAB_SITE_BUDGET";

/// Checkpoint schedule description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "default_l_min")]
    pub l_min: f64,
    pub l_max: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_l_min() -> f64 {
    100.0
}

fn default_count() -> usize {
    64
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        if !(self.l_min > 0.0 && self.l_max > self.l_min) {
            bail!(
                "invalid checkpoint schedule: need 0 < l_min < l_max, got {} and {}",
                self.l_min,
                self.l_max
            );
        }
        if self.count < 2 {
            bail!("invalid checkpoint schedule: count must be at least 2");
        }
        Ok(spectral_lab::log_checkpoints(self.l_min, self.l_max, self.count))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    #[serde(default = "default_pattern")]
    pub sign_pattern: SignPattern,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_pattern() -> SignPattern {
    SignPattern::Plus
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_ratio_tol")]
    pub ratio: f64,
    #[serde(default = "default_reconstruction_tol")]
    pub reconstruction: f64,
    #[serde(default = "default_doubling_tol")]
    pub doubling: f64,
    #[serde(default = "default_summability_tol")]
    pub summability: f64,
}

fn default_ratio_tol() -> f64 {
    spectral_lab::stability::RATIO_TOLERANCE
}
fn default_reconstruction_tol() -> f64 {
    spectral_lab::stability::RECONSTRUCTION_TOLERANCE
}
fn default_doubling_tol() -> f64 {
    spectral_lab::stability::DOUBLING_TOLERANCE
}
fn default_summability_tol() -> f64 {
    spectral_lab::stability::SUMMABILITY_TOLERANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio: default_ratio_tol(),
            reconstruction: default_reconstruction_tol(),
            doubling: default_doubling_tol(),
            summability: default_summability_tol(),
        }
    }
}

/// A full stability scenario: potential, perturbation, grids, schedule,
/// budget, tolerances, outputs, seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub potential: PotentialSpec,
    pub perturbation: PerturbationSpec,
    pub energies: Vec<f64>,
    #[serde(default = "default_phases")]
    pub phases: Vec<f64>,
    pub checkpoints: ScheduleSpec,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_budget")]
    pub site_budget: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub curves_out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_phases() -> Vec<f64> {
    vec![0.0]
}

fn default_budget() -> f64 {
    spectral_lab::DEFAULT_SITE_BUDGET
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.energies.is_empty() {
            bail!("scenario invariant violated: energies grid is empty");
        }
        if self.phases.is_empty() {
            bail!("scenario invariant violated: phases grid is empty");
        }
        self.potential
            .validate()
            .map_err(|e| anyhow::anyhow!("invalid potential: {e}"))?;
        // C = 0 is admitted as the unperturbed sanity case
        if !self.perturbation.c.is_finite() || self.perturbation.c < 0.0 {
            bail!("scenario invariant violated: perturbation C must be nonnegative");
        }
        if !self.perturbation.p.is_finite() || self.perturbation.p <= 0.0 {
            bail!("scenario invariant violated: perturbation p must be positive");
        }
        let budget = effective_site_budget(self.site_budget)?;
        if self.checkpoints.l_max > budget {
            bail!(
                "scenario invariant violated: site budget {} is below the max checkpoint {}",
                budget,
                self.checkpoints.l_max
            );
        }
        Ok(())
    }

    pub fn perturbation(&self, fallback_seed: u64) -> Perturbation {
        Perturbation::new(
            self.perturbation.c,
            self.perturbation.p,
            self.perturbation.sign_pattern,
            self.perturbation.seed.unwrap_or(fallback_seed),
        )
    }

    pub fn cutoff_or_default(&self) -> usize {
        self.cutoff.unwrap_or(self.checkpoints.l_max.floor() as usize + 2)
    }
}

/// The configured budget capped by the SPECTRAL_LAB_SITE_BUDGET variable.
pub fn effective_site_budget(requested: f64) -> Result<f64> {
    match std::env::var(SITE_BUDGET_ENV) {
        Ok(v) => {
            let cap: f64 = v
                .trim()
                .parse()
                .with_context(|| format!("parsing {SITE_BUDGET_ENV}={v}"))?;
            Ok(requested.min(cap))
        }
        Err(_) => Ok(requested),
    }
}
