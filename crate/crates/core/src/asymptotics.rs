//! Power-law envelope fitting and subordinacy ratio diagnostics.
//!
//! Growth exponents γ₁ ≤ γ₂ are the min/max log-log slopes of ‖u‖_L over a
//! grid of normalized initial conditions, fitted on the tail half of the
//! checkpoint schedule; the induced continuity exponent is
//! α = 2γ₁/(γ₁+γ₂). The liminf in the subordinacy definitions is not
//! finitely computable, so the classifier reports tail evidence and admits
//! an inconclusive verdict.

use crate::propagator::SolutionTrace;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("profile needs at least {need} checkpoints, has {got}")]
    InsufficientCheckpoints { need: usize, got: usize },
    #[error("checkpoints span {0:.3} decades; at least 2 are required for fitting")]
    InsufficientSpan(f64),
    #[error("all fitted slopes are nonpositive; no growth exponent to report")]
    NonPositiveSlope,
    #[error("profiles use different checkpoint schedules")]
    ScheduleMismatch,
    #[error("alpha = {0} outside (0,1]")]
    AlphaOutOfRange(f64),
    #[error("no profiles supplied")]
    Empty,
}

/// Log-spaced (L, ‖u‖_L) data for one solution, stored in log₂ form so
/// arbitrarily fast growth stays finite.
#[derive(Debug, Clone)]
pub struct NormProfile {
    pub checkpoints: Vec<f64>,
    pub log2_norms: Vec<f64>,
    pub provenance: String,
}

impl NormProfile {
    pub fn from_trace(trace: &SolutionTrace) -> Self {
        NormProfile {
            checkpoints: trace.checkpoints.clone(),
            log2_norms: trace.log2_norms.clone(),
            provenance: format!(
                "{} E={} init=({},{})",
                trace.spec.family_name(),
                trace.energy,
                trace.init.0,
                trace.init.1
            ),
        }
    }

    pub fn from_norms(
        checkpoints: Vec<f64>,
        norms: &[f64],
        provenance: impl Into<String>,
    ) -> Self {
        NormProfile {
            checkpoints,
            log2_norms: norms.iter().map(|n| n.log2()).collect(),
            provenance: provenance.into(),
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.log2_norms.iter().map(|x| f64::exp2(*x)).collect()
    }

    fn validate_for_fit(&self) -> Result<(), FitError> {
        if self.checkpoints.len() < 8 {
            return Err(FitError::InsufficientCheckpoints {
                need: 8,
                got: self.checkpoints.len(),
            });
        }
        let decades =
            (self.checkpoints.last().unwrap() / self.checkpoints[0]).log10();
        if decades < 2.0 {
            return Err(FitError::InsufficientSpan(decades));
        }
        Ok(())
    }

    /// Indices of the tail window: checkpoints past the geometric midpoint,
    /// i.e. the top half in log L.
    fn tail_indices(&self) -> Vec<usize> {
        let mid = (self.checkpoints[0] * self.checkpoints.last().unwrap()).sqrt();
        (0..self.checkpoints.len())
            .filter(|&i| self.checkpoints[i] >= mid)
            .collect()
    }
}

/// Least-squares slope and max residual of y against x.
fn lsq_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - xm) * (xi - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - xm) * (yi - ym)).sum();
    let slope = sxy / sxx;
    let max_res = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - (ym + slope * (xi - xm))).abs())
        .fold(0.0, f64::max);
    (slope, max_res)
}

/// Fitted growth envelope over a family of profiles.
#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha: f64,
    /// Fitted slope per profile, in input order.
    pub slopes: Vec<f64>,
    /// Largest log-log residual across the fitted tails.
    pub max_residual: f64,
    /// L range the regression used.
    pub tail_window: (f64, f64),
    /// Profiles whose slope came out ≤ 0 (decaying solution present);
    /// reported, not folded into γ₁.
    pub nonpositive: Vec<usize>,
}

/// Fit log‖u‖_L against log L per profile over the tail window;
/// γ₁ = min positive slope, γ₂ = max slope, α = 2γ₁/(γ₁+γ₂).
pub fn fit_growth_exponents(profiles: &[NormProfile]) -> Result<ExponentFit, FitError> {
    if profiles.is_empty() {
        return Err(FitError::Empty);
    }
    for p in profiles {
        p.validate_for_fit()?;
    }
    let schedule = &profiles[0].checkpoints;
    if profiles.iter().any(|p| p.checkpoints != *schedule) {
        return Err(FitError::ScheduleMismatch);
    }

    let tail = profiles[0].tail_indices();
    if tail.len() < 2 {
        return Err(FitError::InsufficientCheckpoints { need: 2, got: tail.len() });
    }
    let x: Vec<f64> = tail.iter().map(|&i| schedule[i].ln()).collect();
    let tail_window = (schedule[tail[0]], schedule[*tail.last().unwrap()]);

    let mut slopes = Vec::with_capacity(profiles.len());
    let mut nonpositive = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (idx, p) in profiles.iter().enumerate() {
        let y: Vec<f64> = tail.iter().map(|&i| p.log2_norms[i] * LN_2).collect();
        let (slope, res) = lsq_slope(&x, &y);
        if slope <= 0.0 {
            nonpositive.push(idx);
        }
        max_residual = max_residual.max(res);
        slopes.push(slope);
    }

    let gamma2 = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gamma1 = slopes
        .iter()
        .cloned()
        .filter(|s| *s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !gamma1.is_finite() || gamma2 <= 0.0 {
        return Err(FitError::NonPositiveSlope);
    }
    Ok(ExponentFit {
        gamma1,
        gamma2,
        alpha: 2.0 * gamma1 / (gamma1 + gamma2),
        slopes,
        max_residual,
        tail_window,
        nonpositive,
    })
}

/// The power α/(2−α) appearing in the α-subordinacy denominator.
pub fn alpha_exponent(alpha: f64) -> Result<f64, FitError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(alpha / (2.0 - alpha))
    } else {
        Err(FitError::AlphaOutOfRange(alpha))
    }
}

/// The sequence ‖u₁‖_L / ‖u₂‖_L^κ along the shared checkpoint schedule.
pub fn subordinacy_ratio(
    numerator: &NormProfile,
    denominator: &NormProfile,
    kappa: f64,
) -> Result<Vec<(f64, f64)>, FitError> {
    if numerator.checkpoints != denominator.checkpoints {
        return Err(FitError::ScheduleMismatch);
    }
    Ok(numerator
        .checkpoints
        .iter()
        .zip(numerator.log2_norms.iter().zip(&denominator.log2_norms))
        .map(|(&l, (&ln_num, &ln_den))| (l, f64::exp2(ln_num - kappa * ln_den)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SubordinateLike,
    NonSubordinateLike,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::SubordinateLike => write!(f, "subordinate-like"),
            Verdict::NonSubordinateLike => write!(f, "non-subordinate-like"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Finite-L proxy for the liminf test: look at the tail window's minimum and
/// the sign of its fitted trend. Defaults elsewhere: tail_fraction = 0.5,
/// drop_threshold = 0.1.
pub fn classify_subordinate(
    ratios: &[(f64, f64)],
    tail_fraction: f64,
    drop_threshold: f64,
) -> Result<Verdict, FitError> {
    if ratios.len() < 8 {
        return Err(FitError::InsufficientCheckpoints { need: 8, got: ratios.len() });
    }
    let take = ((ratios.len() as f64 * tail_fraction).ceil() as usize)
        .clamp(2, ratios.len());
    let tail = &ratios[ratios.len() - take..];
    let min = tail.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let x: Vec<f64> = tail.iter().map(|(l, _)| l.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|(_, r)| r.ln()).collect();
    let (trend, _) = lsq_slope(&x, &y);
    if min < drop_threshold && trend < 0.0 {
        Ok(Verdict::SubordinateLike)
    } else if min > 1.0 / drop_threshold && trend >= 0.0 {
        Ok(Verdict::NonSubordinateLike)
    } else {
        Ok(Verdict::Inconclusive)
    }
}

/// `count` phases uniformly placed in (−π/2, π/2], right endpoint included.
pub fn phase_grid(count: usize) -> Vec<f64> {
    assert!(count >= 1);
    (0..count)
        .map(|j| -FRAC_PI_2 + PI * (j + 1) as f64 / count as f64)
        .collect()
}
