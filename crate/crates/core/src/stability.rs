//! Variation-of-parameters analysis of power-decaying perturbations.
//!
//! Writing a perturbed solution as v = w₁u₁ + w₂u₂ turns the eigenvalue
//! equation for V₀ + P into the first-order recursion w(n+1) = (I + A(n))w(n)
//! with the rank-one nilpotent coupling A(n). Because A² = 0, the backward
//! step (I + A)⁻¹ = I − A is exact, so the decaying/normalized branches w∓
//! can be built by imposing their limit values at a finite cutoff and
//! recursing down; a cutoff-doubling test certifies the truncation error.
//! Summability of the G-weight (with window f(n) = (1+n)^γ) is what licenses
//! the construction, and the end product is the pair of ratio curves
//! ‖v_i‖_L/‖u_i‖_L whose convergence to 1 is the stability statement.

use crate::asymptotics::{fit_growth_exponents, FitError, NormProfile};
use crate::oracle::{direct_perturbed_solve, OracleError};
use crate::potentials::{Perturbation, PotentialSpec};
use crate::propagator::{
    canonical_pair_with_budget, log_checkpoints, truncated_norms, PropagateError,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("empty gamma window: need p > 3γ₂ − γ₁, got p = {p}, γ₁ = {gamma1}, γ₂ = {gamma2}")]
    EmptyWindow { gamma1: f64, gamma2: f64, p: f64 },
    #[error("cutoff too small: doubling moved w(1) by {delta:.3e} > {tolerance:.3e}")]
    CutoffTooSmall { delta: f64, tolerance: f64 },
    #[error("checkpoint schedule does not fit the workspace range")]
    ScheduleMismatch,
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The site coupling A(n) = −P(n)·[[u₁u₂, u₂²], [−u₁², −u₁u₂]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    pub e: [[f64; 2]; 2],
}

impl CouplingMatrix {
    pub fn matmul(&self, o: &CouplingMatrix) -> CouplingMatrix {
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.e[i][0] * o.e[0][j] + self.e[i][1] * o.e[1][j];
            }
        }
        CouplingMatrix { e: r }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.e.iter().flatten().map(|x| x * x).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn det_i_plus(&self) -> f64 {
        (1.0 + self.e[0][0]) * (1.0 + self.e[1][1]) - self.e[0][1] * self.e[1][0]
    }
}

pub fn coupling_matrix(p_n: f64, u1_n: f64, u2_n: f64) -> CouplingMatrix {
    let cross = u1_n * u2_n;
    CouplingMatrix {
        e: [
            [-p_n * cross, -p_n * u2_n * u2_n],
            [p_n * u1_n * u1_n, p_n * cross],
        ],
    }
}

/// Midpoint of the admissible window (γ₂ − γ₁, p − 2γ₂); both endpoints are
/// strict, and the window is nonempty exactly when p > 3γ₂ − γ₁.
pub fn choose_gamma(gamma1: f64, gamma2: f64, p: f64) -> Result<f64, StabilityError> {
    if p <= 3.0 * gamma2 - gamma1 {
        return Err(StabilityError::EmptyWindow { gamma1, gamma2, p });
    }
    Ok(0.5 * ((gamma2 - gamma1) + (p - 2.0 * gamma2)))
}

/// G(n) = max{ |P|(|u₁u₂| + u₂²) ; |P|(f·u₁² + |u₁u₂|) } with f = (1+n)^γ.
pub fn g_value(p_n: f64, u1_n: f64, u2_n: f64, f_n: f64) -> f64 {
    let cross = (u1_n * u2_n).abs();
    let first = p_n.abs() * (cross + u2_n * u2_n);
    let second = p_n.abs() * (f_n * u1_n * u1_n + cross);
    first.max(second)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    fn terminal(&self) -> (f64, f64) {
        match self {
            Branch::Minus => (1.0, 0.0),
            Branch::Plus => (0.0, 1.0),
        }
    }
}

/// A w-branch built backward from its limit data at a finite cutoff.
#[derive(Debug, Clone)]
pub struct WSolution {
    pub branch: Branch,
    pub cutoff: usize,
    /// w(n) for n = 0..=cutoff.
    pub w: Vec<(f64, f64)>,
    /// Max-norm move of w(1) when the cutoff doubles; the truncation
    /// certificate.
    pub doubling_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub gamma: f64,
    /// Fitted envelope exponent entering the tail majorant (b = 2γ₂).
    pub gamma2_fit: f64,
    /// (site, Σ_{n≤site} G(n)) along a log-spaced site schedule.
    pub partial_sums: Vec<(usize, f64)>,
    pub total: f64,
    pub tail_majorant: f64,
    pub summable_like: bool,
}

/// One row of the ratio-convergence curves.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub l: f64,
    pub ratio_v1_u1: f64,
    pub ratio_v2_u2: f64,
    pub eqlimites_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub kappa: f64,
    pub rows: Vec<RatioRow>,
    pub tail_max_dev_v1: f64,
    pub tail_max_dev_v2: f64,
    pub eqlimites_tail_max: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ReconstructionCheck {
    /// max_n |v(n+1) − (E−V₀−P)v(n) + v(n−1)| / max|v|.
    pub scaled_residual: f64,
    /// max |v − direct| / max|direct| against an independent forward solve.
    pub direct_relative_error: f64,
}

/// Everything the variation-of-parameters pipeline needs for a fixed
/// (V₀, P, E, φ): the canonical pair and the perturbation, densely tabulated.
pub struct StabilityWorkspace {
    pub spec: PotentialSpec,
    pub perturbation: Perturbation,
    pub energy: f64,
    pub phi: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub pvals: Vec<f64>,
    n_max: usize,
}

impl StabilityWorkspace {
    pub fn new(
        spec: &PotentialSpec,
        perturbation: Perturbation,
        energy: f64,
        phi: f64,
        n_max: usize,
    ) -> Result<Self, StabilityError> {
        let pvals = (0..=n_max as i64).map(|n| perturbation.value(n)).collect();
        Self::with_perturbation_values(spec, perturbation, energy, phi, pvals)
    }

    /// Same, with explicitly supplied P(n) values (n = 0..=n_max); lets tests
    /// probe single-site and other non-envelope perturbations.
    pub fn with_perturbation_values(
        spec: &PotentialSpec,
        perturbation: Perturbation,
        energy: f64,
        phi: f64,
        pvals: Vec<f64>,
    ) -> Result<Self, StabilityError> {
        use std::f64::consts::FRAC_PI_2;
        if pvals.is_empty() {
            return Err(StabilityError::InvalidInput("empty perturbation table".into()));
        }
        if !(phi > -FRAC_PI_2 && phi <= FRAC_PI_2) {
            return Err(StabilityError::InvalidInput(format!(
                "phi = {phi} outside (−π/2, π/2]"
            )));
        }
        spec.validate().map_err(PropagateError::from)?;
        let n_max = pvals.len() - 1;
        let u1 = crate::propagator::solution_values(spec, energy, (-phi.sin(), phi.cos()), n_max)?;
        let u2 = crate::propagator::solution_values(spec, energy, (phi.cos(), phi.sin()), n_max)?;
        Ok(StabilityWorkspace {
            spec: spec.clone(),
            perturbation,
            energy,
            phi,
            u1,
            u2,
            pvals,
            n_max,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coupling(&self, n: usize) -> CouplingMatrix {
        coupling_matrix(self.pvals[n], self.u1[n], self.u2[n])
    }

    /// G(n) with f(n) = (1+n)^γ.
    pub fn g(&self, gamma: f64, n: usize) -> f64 {
        let f_n = (1.0 + n as f64).powf(gamma);
        g_value(self.pvals[n], self.u1[n], self.u2[n], f_n)
    }

    /// Growth exponents fitted from the canonical pair's own norm profiles.
    pub fn fit_pair_exponents(&self) -> Result<(f64, f64), StabilityError> {
        let l_max = (self.n_max - 1) as f64;
        let cps = log_checkpoints(100.0f64.min(l_max / 101.0).max(1.0), l_max, 48);
        let p1 = NormProfile::from_norms(
            cps.clone(),
            &truncated_norms(&self.u1, &cps)?,
            "u1",
        );
        let n2 = truncated_norms(&self.u2, &cps)?;
        let p2 = NormProfile::from_norms(cps, &n2, "u2");
        let fit = fit_growth_exponents(&[p1, p2])?;
        Ok((fit.gamma1, fit.gamma2))
    }

    /// Cumulative ΣG with an analytic tail majorant built from the fitted
    /// envelope: each of the three series under G obeys the Abel-summation
    /// bound with a ∈ {p, p − γ} and b = 2γ₂, so the tail beyond the cutoff
    /// is at most Σ C·K·a·(1+N)^{b−a}/(a−b); infinite when some a ≤ b.
    pub fn check_summability(&self, gamma: f64, tolerance: f64) -> Result<SummabilityReport, StabilityError> {
        let n_used = self.n_max;
        let (_, gamma2) = self.fit_pair_exponents()?;
        let b = 2.0 * gamma2;

        // partial sums of G plus fitted premise constants in one pass
        let record: Vec<usize> = log_checkpoints(10.0, n_used as f64, 32)
            .into_iter()
            .map(|l| l.floor() as usize)
            .collect();
        let mut partial_sums = Vec::with_capacity(record.len());
        let mut rec_idx = 0usize;
        let mut total = 0.0f64;
        let mut s1 = 0.0f64; // Σ u1²
        let mut s2 = 0.0f64; // Σ u2²
        let mut k_12: f64 = 0.0;
        let mut k_22: f64 = 0.0;
        let mut k_11: f64 = 0.0;
        for n in 1..=n_used {
            total += self.g(gamma, n);
            s1 += self.u1[n] * self.u1[n];
            s2 += self.u2[n] * self.u2[n];
            let denom = (1.0 + n as f64).powf(b);
            k_12 = k_12.max((s1 * s2).sqrt() / denom);
            k_22 = k_22.max(s2 / denom);
            k_11 = k_11.max(s1 / denom);
            while rec_idx < record.len() && record[rec_idx] == n {
                partial_sums.push((n, total));
                rec_idx += 1;
            }
        }

        let c = self.perturbation.c;
        let tail_term = |a: f64, k: f64| -> f64 {
            if a > b {
                c * k * a * (1.0 + n_used as f64).powf(b - a) / (a - b)
            } else {
                f64::INFINITY
            }
        };
        let p = self.perturbation.p;
        let tail_majorant = tail_term(p, k_12) + tail_term(p, k_22) + tail_term(p - gamma, k_11);
        Ok(SummabilityReport {
            gamma,
            gamma2_fit: gamma2,
            partial_sums,
            total,
            tail_majorant,
            summable_like: tail_majorant < tolerance,
        })
    }

    /// Build w∓ by exact backward recursion w(n) = (I − A(n))w(n+1) from the
    /// branch's limit data imposed at `cutoff`, certifying the truncation by
    /// re-running from 2·cutoff and comparing w(1).
    pub fn solve_w(
        &self,
        branch: Branch,
        cutoff: usize,
        doubling_tolerance: f64,
    ) -> Result<WSolution, StabilityError> {
        if cutoff < 2 || 2 * cutoff > self.n_max {
            return Err(StabilityError::InvalidInput(format!(
                "cutoff {cutoff} needs a workspace covering 2×cutoff = {} sites, have {}",
                2 * cutoff,
                self.n_max
            )));
        }
        let w = self.backward_pass(branch, cutoff, true);
        let w1_doubled = {
            let tail = self.backward_pass(branch, 2 * cutoff, false);
            tail[1]
        };
        let delta =
            (w[1].0 - w1_doubled.0).abs().max((w[1].1 - w1_doubled.1).abs());
        if delta > doubling_tolerance {
            return Err(StabilityError::CutoffTooSmall {
                delta,
                tolerance: doubling_tolerance,
            });
        }
        Ok(WSolution { branch, cutoff, w, doubling_delta: delta })
    }

    fn backward_pass(&self, branch: Branch, cutoff: usize, keep_all: bool) -> Vec<(f64, f64)> {
        let mut w = vec![(0.0, 0.0); if keep_all { cutoff + 1 } else { 2 }];
        let mut cur = branch.terminal();
        if keep_all {
            w[cutoff] = cur;
        }
        for n in (0..cutoff).rev() {
            let a = self.coupling(n);
            let next = (
                cur.0 - (a.e[0][0] * cur.0 + a.e[0][1] * cur.1),
                cur.1 - (a.e[1][0] * cur.0 + a.e[1][1] * cur.1),
            );
            cur = next;
            if keep_all || n <= 1 {
                w[n] = cur;
            }
        }
        w
    }

    /// v(n) = w₁(n)u₁(n) + w₂(n)u₂(n) on the shared range.
    pub fn reconstruct(&self, w: &WSolution) -> Vec<f64> {
        (0..=w.cutoff)
            .map(|n| w.w[n].0 * self.u1[n] + w.w[n].1 * self.u2[n])
            .collect()
    }

    /// Residual of the perturbed recurrence plus an independent cross-check
    /// against a direct forward solve from the same initial data.
    pub fn verify_reconstruction(&self, v: &[f64]) -> Result<ReconstructionCheck, StabilityError> {
        if v.len() < 3 {
            return Err(StabilityError::InvalidInput("need at least 3 values".into()));
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if vmax == 0.0 {
            return Err(StabilityError::InvalidInput("identically zero solution".into()));
        }
        let mut residual = 0.0f64;
        for n in 1..v.len() - 1 {
            let coeff = self.energy - (self.spec.value(n as i64).map_err(PropagateError::from)? + self.pvals[n]);
            let defect = v[n + 1] - coeff * v[n] + v[n - 1];
            residual = residual.max(defect.abs());
        }
        let direct = direct_perturbed_solve(
            &self.spec,
            &self.perturbation,
            self.energy,
            (v[0], v[1]),
            v.len() - 1,
        )?;
        let dmax = direct.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut dev = 0.0f64;
        for (a, b) in v.iter().zip(&direct) {
            dev = dev.max((a - b).abs());
        }
        Ok(ReconstructionCheck {
            scaled_residual: residual / vmax,
            direct_relative_error: dev / dmax.max(f64::MIN_POSITIVE),
        })
    }

    /// Ratio curves ‖v₁‖_L/‖u₁‖_L, ‖v₂‖_L/‖u₂‖_L and the κ-combined product
    /// deviation |(‖v₁‖/‖v₂‖^κ)·(‖u₁‖/‖u₂‖^κ)^{−1} − 1| on a shared schedule.
    /// Convergence verdict: both plain-ratio tails within `tolerance` of 1.
    pub fn ratio_convergence(
        &self,
        v1: &[f64],
        v2: &[f64],
        checkpoints: &[f64],
        kappa: f64,
        tolerance: f64,
    ) -> Result<RatioReport, StabilityError> {
        if checkpoints.is_empty() {
            return Err(StabilityError::InvalidInput("empty checkpoint schedule".into()));
        }
        let need = checkpoints.last().unwrap().floor() as usize + 1;
        if need >= v1.len() || need >= v2.len() || need >= self.u1.len() {
            return Err(StabilityError::ScheduleMismatch);
        }
        let nu1 = truncated_norms(&self.u1, checkpoints)?;
        let nu2 = truncated_norms(&self.u2, checkpoints)?;
        let nv1 = truncated_norms(v1, checkpoints)?;
        let nv2 = truncated_norms(v2, checkpoints)?;
        let rows: Vec<RatioRow> = (0..checkpoints.len())
            .map(|i| {
                let r1 = nv1[i] / nu1[i];
                let r2 = nv2[i] / nu2[i];
                let combined = (nv1[i] / nv2[i].powf(kappa)) / (nu1[i] / nu2[i].powf(kappa));
                RatioRow {
                    l: checkpoints[i],
                    ratio_v1_u1: r1,
                    ratio_v2_u2: r2,
                    eqlimites_dev: (combined - 1.0).abs(),
                }
            })
            .collect();
        let mid = (checkpoints[0] * checkpoints.last().unwrap()).sqrt();
        let tail: Vec<&RatioRow> = rows.iter().filter(|r| r.l >= mid).collect();
        let tail_max_dev_v1 =
            tail.iter().map(|r| (r.ratio_v1_u1 - 1.0).abs()).fold(0.0, f64::max);
        let tail_max_dev_v2 =
            tail.iter().map(|r| (r.ratio_v2_u2 - 1.0).abs()).fold(0.0, f64::max);
        let eqlimites_tail_max =
            tail.iter().map(|r| r.eqlimites_dev).fold(0.0, f64::max);
        Ok(RatioReport {
            kappa,
            rows,
            tail_max_dev_v1,
            tail_max_dev_v2,
            eqlimites_tail_max,
            converged: tail_max_dev_v1 < tolerance && tail_max_dev_v2 < tolerance,
        })
    }
}

/// Default tolerances for the pipeline.
pub const RATIO_TOLERANCE: f64 = 1e-2;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;
pub const DOUBLING_TOLERANCE: f64 = 1e-6;
/// The G tail majorant bounds the multiplicative distortion of w beyond the
/// cutoff; 1e−3 keeps that distortion at the 0.1% level.
pub const SUMMABILITY_TOLERANCE: f64 = 1e-3;

/// Tolerances the full pipeline runs at; all configurable per scenario.
#[derive(Debug, Clone, Copy)]
pub struct StabilityTolerances {
    pub ratio: f64,
    pub reconstruction: f64,
    pub doubling: f64,
    pub summability: f64,
}

impl Default for StabilityTolerances {
    fn default() -> Self {
        StabilityTolerances {
            ratio: RATIO_TOLERANCE,
            reconstruction: RECONSTRUCTION_TOLERANCE,
            doubling: DOUBLING_TOLERANCE,
            summability: SUMMABILITY_TOLERANCE,
        }
    }
}

/// Full pipeline output for one (V₀, P, E, φ) scenario.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub energy: f64,
    pub phi: f64,
    pub c: f64,
    pub p: f64,
    pub sign_pattern: String,
    pub cutoff: usize,
    pub gamma: f64,
    pub gamma1_fit: f64,
    pub gamma2_fit: f64,
    pub alpha_fit: f64,
    pub kappa: f64,
    pub g_total: f64,
    pub g_tail_majorant: f64,
    pub summable_like: bool,
    /// (site, w₁, w₂) along the checkpoint sites, minus branch.
    pub w_minus: Vec<(usize, f64, f64)>,
    pub w_plus: Vec<(usize, f64, f64)>,
    pub doubling_delta_minus: f64,
    pub doubling_delta_plus: f64,
    pub reconstruction_residual_v1: f64,
    pub reconstruction_residual_v2: f64,
    pub direct_match_v1: f64,
    pub direct_match_v2: f64,
    pub ratio: RatioReport,
    pub verdict: String,
}

/// Orchestrates fit → γ choice → summability → w∓ → reconstruction →
/// verification → ratio curves for one scenario. `gamma`/`kappa` default to
/// the window midpoint and α/(2−α) of the fitted exponents.
#[allow(clippy::too_many_arguments)]
pub fn run_stability(
    spec: &PotentialSpec,
    perturbation: Perturbation,
    energy: f64,
    phi: f64,
    cutoff: usize,
    checkpoints: &[f64],
    gamma: Option<f64>,
    kappa: Option<f64>,
) -> Result<StabilityReport, StabilityError> {
    run_stability_with_tolerances(
        spec,
        perturbation,
        energy,
        phi,
        cutoff,
        checkpoints,
        gamma,
        kappa,
        StabilityTolerances::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn run_stability_with_tolerances(
    spec: &PotentialSpec,
    perturbation: Perturbation,
    energy: f64,
    phi: f64,
    cutoff: usize,
    checkpoints: &[f64],
    gamma: Option<f64>,
    kappa: Option<f64>,
    tol: StabilityTolerances,
) -> Result<StabilityReport, StabilityError> {
    if checkpoints.is_empty() {
        return Err(StabilityError::InvalidInput("empty checkpoint schedule".into()));
    }
    if checkpoints.last().unwrap().floor() as usize + 2 > cutoff {
        return Err(StabilityError::InvalidInput(
            "checkpoints must stay below the cutoff".into(),
        ));
    }
    let ws = StabilityWorkspace::new(spec, perturbation, energy, phi, 2 * cutoff)?;
    let (g1, g2) = ws.fit_pair_exponents()?;
    let gamma = match gamma {
        Some(g) => g,
        None => choose_gamma(g1, g2, perturbation.p)?,
    };
    let alpha = 2.0 * g1 / (g1 + g2);
    let kappa = kappa.unwrap_or(alpha / (2.0 - alpha));
    let summability = ws.check_summability(gamma, tol.summability)?;
    let w_minus = ws.solve_w(Branch::Minus, cutoff, tol.doubling)?;
    let w_plus = ws.solve_w(Branch::Plus, cutoff, tol.doubling)?;
    let v1 = ws.reconstruct(&w_minus);
    let v2 = ws.reconstruct(&w_plus);
    let check1 = ws.verify_reconstruction(&v1)?;
    let check2 = ws.verify_reconstruction(&v2)?;
    let ratio = ws.ratio_convergence(&v1, &v2, checkpoints, kappa, tol.ratio)?;

    let sample_sites: Vec<usize> = checkpoints
        .iter()
        .map(|l| (l.floor() as usize).min(cutoff))
        .collect();
    let sample = |w: &WSolution| -> Vec<(usize, f64, f64)> {
        sample_sites.iter().map(|&s| (s, w.w[s].0, w.w[s].1)).collect()
    };

    let ok = summability.summable_like
        && ratio.converged
        && check1.scaled_residual < tol.reconstruction
        && check2.scaled_residual < tol.reconstruction;
    Ok(StabilityReport {
        energy,
        phi,
        c: perturbation.c,
        p: perturbation.p,
        sign_pattern: format!("{:?}", perturbation.pattern).to_lowercase(),
        cutoff,
        gamma,
        gamma1_fit: g1,
        gamma2_fit: g2,
        alpha_fit: alpha,
        kappa,
        g_total: summability.total,
        g_tail_majorant: summability.tail_majorant,
        summable_like: summability.summable_like,
        w_minus: sample(&w_minus),
        w_plus: sample(&w_plus),
        doubling_delta_minus: w_minus.doubling_delta,
        doubling_delta_plus: w_plus.doubling_delta,
        reconstruction_residual_v1: check1.scaled_residual,
        reconstruction_residual_v2: check2.scaled_residual,
        direct_match_v1: check1.direct_relative_error,
        direct_match_v2: check2.direct_relative_error,
        ratio,
        verdict: if ok { "stable-like".into() } else { "not-established".into() },
    })
}

/// Spectrum probe: scan an energy grid and return the E minimizing the worst
/// log-norm growth of the canonical pair at probe length `l_probe` — a cheap
/// approximation of the narrow bands where transfer-matrix growth stays
/// polynomial.
pub fn locate_low_growth_energy(
    spec: &PotentialSpec,
    e_lo: f64,
    e_hi: f64,
    grid: usize,
    l_probe: f64,
    phi: f64,
) -> Result<(f64, f64), StabilityError> {
    assert!(grid >= 2 && e_hi > e_lo);
    let cps = [l_probe];
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..=grid {
        let e = e_lo + (e_hi - e_lo) * i as f64 / grid as f64;
        let pair = canonical_pair_with_budget(spec, e, phi, &cps, l_probe + 2.0)?;
        let growth = pair.u1.log2_norms[0].max(pair.u2.log2_norms[0]);
        if growth < best.1 {
            best = (e, growth);
        }
    }
    Ok(best)
}
