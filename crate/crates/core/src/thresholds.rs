//! Closed-form decay thresholds and exponent bounds: the Sturmian
//! 3γ₂ − γ₁ rule, the golden-mean coupling bounds with the cubic root c_λ,
//! and the sparse-model thresholds.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("need 0 < gamma1 <= gamma2, got gamma1 = {gamma1}, gamma2 = {gamma2}")]
    OrderViolation { gamma1: f64, gamma2: f64 },
    #[error("alpha = {0} outside (0,1)")]
    AlphaOutOfRange(f64),
    #[error("lambda = {0} outside the supported range")]
    LambdaOutOfRange(f64),
}

/// Decay threshold for Sturmian stability: p must exceed 3γ₂ − γ₁.
pub fn sturmian_threshold(gamma1: f64, gamma2: f64) -> Result<f64, ThresholdError> {
    if !(gamma1 > 0.0 && gamma1 <= gamma2) {
        return Err(ThresholdError::OrderViolation { gamma1, gamma2 });
    }
    Ok(3.0 * gamma2 - gamma1)
}

/// Largest real root of x³ − (2+λ)x − 1, by safeguarded Newton on the
/// bracket [√(2+λ), √(2+λ)+1].
pub fn cubic_largest_root(lambda: f64) -> f64 {
    let s = 2.0 + lambda;
    let f = |x: f64| x * x * x - s * x - 1.0;
    let df = |x: f64| 3.0 * x * x - s;
    let mut lo = s.sqrt();
    let mut hi = s.sqrt() + 1.0;
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    let mut x = hi;
    for _ in 0..200 {
        let fx = f(x);
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / df(x);
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// Golden-mean coupling bounds: a sup-bound on γ₁ and an inf-bound on γ₂,
/// the latter through c_λ.
pub fn fibonacci_gamma_bounds(lambda: f64) -> Result<(f64, f64), ThresholdError> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(ThresholdError::LambdaOutOfRange(lambda));
    }
    let ln_phi = ((5.0f64.sqrt() + 1.0) / 2.0).ln();
    let gamma1_sup = (1.0 + 1.0 / ((2.0 + 2.0 * lambda) * (2.0 + 2.0 * lambda))).ln()
        / (16.0 * ln_phi);
    let c = cubic_largest_root(lambda);
    let gamma2_inf =
        1.0 + ((5.0 + 2.0 * lambda).sqrt() * (3.0 + lambda) * c).ln() / ln_phi;
    Ok((gamma1_sup, gamma2_inf))
}

/// Sparse-model decay threshold: (1+2α)/α for α ≤ 1/2, (3+2α)/(2α) for
/// α ≥ 1/2; both branches agree (= 4) at α = 1/2.
pub fn sparse_threshold(alpha: f64) -> Result<f64, ThresholdError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ThresholdError::AlphaOutOfRange(alpha));
    }
    Ok(if alpha <= 0.5 {
        (1.0 + 2.0 * alpha) / alpha
    } else {
        (3.0 + 2.0 * alpha) / (2.0 * alpha)
    })
}

/// Sparse-model exponent bounds: γ₁ < (1−α)/α for α ≤ 1/2 (1/2 otherwise),
/// γ₂ > (1+α)/(2α).
pub fn sparse_gamma_bounds(alpha: f64) -> Result<(f64, f64), ThresholdError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ThresholdError::AlphaOutOfRange(alpha));
    }
    let gamma1_sup = if alpha <= 0.5 { (1.0 - alpha) / alpha } else { 0.5 };
    let gamma2_inf = (1.0 + alpha) / (2.0 * alpha);
    Ok((gamma1_sup, gamma2_inf))
}

/// α = 2γ₁/(γ₁+γ₂) ∈ (0,1].
pub fn alpha_from_exponents(gamma1: f64, gamma2: f64) -> Result<f64, ThresholdError> {
    if !(gamma1 > 0.0 && gamma1 <= gamma2) {
        return Err(ThresholdError::OrderViolation { gamma1, gamma2 });
    }
    Ok(2.0 * gamma1 / (gamma1 + gamma2))
}

/// Calculator output; gamma bounds are one-sided (sup for γ₁, inf for γ₂),
/// never measured exponents.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub gamma1_sup_bound: f64,
    pub gamma2_inf_bound: f64,
    pub threshold_p: f64,
    pub notes: String,
}

pub fn fibonacci_report(lambda: f64) -> Result<ThresholdReport, ThresholdError> {
    let (g1, g2) = fibonacci_gamma_bounds(lambda)?;
    let c = cubic_largest_root(lambda);
    Ok(ThresholdReport {
        model: "sturmian-fibonacci".into(),
        lambda: Some(lambda),
        alpha: Some(alpha_from_exponents(g1, g2)?),
        gamma1_sup_bound: g1,
        gamma2_inf_bound: g2,
        threshold_p: 3.0 * g2 - g1,
        notes: format!(
            "one-sided bounds from the golden-mean coupling formulas; \
             c_lambda = {c:.12}; threshold_p = 3*gamma2 - gamma1"
        ),
    })
}

pub fn sparse_report(alpha: f64) -> Result<ThresholdReport, ThresholdError> {
    let (g1, g2) = sparse_gamma_bounds(alpha)?;
    Ok(ThresholdReport {
        model: "sparse".into(),
        lambda: None,
        alpha: Some(alpha),
        gamma1_sup_bound: g1,
        gamma2_inf_bound: g2,
        threshold_p: sparse_threshold(alpha)?,
        notes: "threshold from the sparse-model branch formulas, \
                not from 3*gamma2 - gamma1"
            .into(),
    })
}
