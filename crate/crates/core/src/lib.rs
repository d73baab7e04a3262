//! Numerical laboratory for one-dimensional discrete Schrödinger operators
//! (Hψ)(n) = ψ(n+1) + ψ(n−1) + V(n)ψ(n).
//!
//! The crate builds quasiperiodic (Sturmian), sparse, and power-law
//! perturbed potentials, propagates generalized eigenfunctions with
//! truncated-norm checkpoints, fits the power-law growth envelope
//! C₁L^γ₁ ≤ ‖u‖_L ≤ C₂L^γ₂, evaluates subordinacy ratio diagnostics, and
//! verifies the constructive content of the perturbation-stability machinery
//! (variation of parameters, G-summability, ratio convergence) at desk
//! scale, together with the closed-form decay thresholds.
//!
//! Everything is pure and deterministic: a spec plus a site always yields a
//! bit-identical value, propagations over different energies or phases can
//! run concurrently without coordination, and results are reproducible from
//! their inputs.

pub mod asymptotics;
pub mod numbertheory;
pub mod oracle;
pub mod potentials;
pub mod propagator;
pub mod stability;
pub mod theta;
pub mod thresholds;

pub use asymptotics::{
    alpha_exponent, classify_subordinate, fit_growth_exponents, phase_grid,
    subordinacy_ratio, ExponentFit, FitError, NormProfile, Verdict,
};
pub use numbertheory::{
    bounded_density_statistic, continued_fraction, convergents, ContinuedFraction,
    NumberTheoryError,
};
pub use oracle::{
    abel_sum_bound, cumulative_g, direct_perturbed_solve, direct_perturbed_solve_dd,
    AbelBoundReport, OracleError,
};
pub use potentials::{
    perturbation_value, potential_value, sparse_sites, sparse_value, sturmian_value,
    Perturbation, PotentialError, PotentialSpec, SignPattern,
};
pub use propagator::{
    canonical_pair, default_checkpoints, log_checkpoints, propagate, solution_values,
    step, truncated_norms, wronskian, CanonicalPair, Direction, PropagateError,
    SolutionTrace, DEFAULT_SITE_BUDGET,
};
pub use stability::{
    choose_gamma, coupling_matrix, g_value, locate_low_growth_energy, run_stability,
    run_stability_with_tolerances, Branch, CouplingMatrix, RatioReport, StabilityError,
    StabilityReport, StabilityTolerances, StabilityWorkspace, SummabilityReport,
    WSolution,
};
pub use theta::{Theta, ThetaError};
pub use thresholds::{
    alpha_from_exponents, cubic_largest_root, fibonacci_gamma_bounds, fibonacci_report,
    sparse_gamma_bounds, sparse_report, sparse_threshold, sturmian_threshold,
    ThresholdError, ThresholdReport,
};
