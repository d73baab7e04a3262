//! Potential families: Sturmian, sparse, free, explicit, and polynomially
//! perturbed composites.
//!
//! Sturmian values are decided by exact integer arithmetic (see
//! [`crate::theta`]), so the indicator never misclassifies a site at any
//! reachable n.

use crate::theta::{rational_to_f64, Theta, ThetaError, MIN_DECIMAL_DIGITS};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("theta is rational; Sturmian potentials require an irrational rotation number")]
    RationalTheta,
    #[error("indicator undecidable at the descriptor's precision: {0}")]
    PrecisionUndecidable(String),
    #[error("alpha = {0} outside (0,1)")]
    AlphaOutOfRange(f64),
    #[error("site n = {n} outside the domain of a {family} potential")]
    DomainMismatch { n: i64, family: &'static str },
    #[error("perturbations of perturbed potentials are not supported")]
    NestedPerturbation,
    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),
}

impl From<ThetaError> for PotentialError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::RationalTheta => PotentialError::RationalTheta,
            ThetaError::PrecisionUndecidable(s) => PotentialError::PrecisionUndecidable(s),
            ThetaError::InvalidDescriptor(s) => PotentialError::InvalidSpec(s),
        }
    }
}

/// Sign pattern s(n) applied to the perturbation envelope C(1+|n|)^{-p}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    Plus,
    Alternating,
    #[serde(alias = "seeded-random")]
    Random,
}

impl SignPattern {
    pub fn sign(&self, seed: u64, n: i64) -> f64 {
        match self {
            SignPattern::Plus => 1.0,
            SignPattern::Alternating => {
                if n & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            SignPattern::Random => {
                if splitmix64(seed ^ splitmix64(n as u64)) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A power-decaying perturbation P(n) = s(n)·C·(1+|n|)^{-p}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub c: f64,
    pub p: f64,
    pub pattern: SignPattern,
    pub seed: u64,
}

impl Perturbation {
    pub fn new(c: f64, p: f64, pattern: SignPattern, seed: u64) -> Self {
        Perturbation { c, p, pattern, seed }
    }

    pub fn value(&self, n: i64) -> f64 {
        perturbation_value(self.c, self.p, self.pattern, self.seed, n)
    }
}

/// Description of a potential V(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PotentialSpec {
    Free,
    Sturmian {
        lambda: f64,
        #[serde(with = "theta_serde")]
        theta: Theta,
        #[serde(with = "rho_serde")]
        rho: BigRational,
    },
    Sparse {
        alpha: f64,
    },
    Explicit {
        values: Vec<f64>,
        #[serde(default)]
        offset: i64,
    },
    Perturbed {
        base: Box<PotentialSpec>,
        #[serde(rename = "C")]
        c: f64,
        p: f64,
        sign_pattern: SignPattern,
        #[serde(default)]
        seed: u64,
    },
}

impl PotentialSpec {
    pub fn sturmian(lambda: f64, theta: Theta, rho: BigRational) -> Self {
        PotentialSpec::Sturmian { lambda, theta, rho }
    }

    pub fn fibonacci(lambda: f64) -> Self {
        PotentialSpec::Sturmian {
            lambda,
            theta: Theta::golden(),
            rho: BigRational::zero(),
        }
    }

    pub fn perturbed(base: PotentialSpec, perturbation: Perturbation) -> Self {
        PotentialSpec::Perturbed {
            base: Box::new(base),
            c: perturbation.c,
            p: perturbation.p,
            sign_pattern: perturbation.pattern,
            seed: perturbation.seed,
        }
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        match self {
            PotentialSpec::Perturbed { c, p, sign_pattern, seed, .. } => {
                Some(Perturbation::new(*c, *p, *sign_pattern, *seed))
            }
            _ => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            PotentialSpec::Free => "free",
            PotentialSpec::Sturmian { .. } => "sturmian",
            PotentialSpec::Sparse { .. } => "sparse",
            PotentialSpec::Explicit { .. } => "explicit",
            PotentialSpec::Perturbed { .. } => "perturbed",
        }
    }

    /// Whether this potential supports negative sites. Sparse potentials live on
    /// the half-line; perturbed composites inherit from a Sturmian base only.
    pub fn whole_line(&self) -> bool {
        match self {
            PotentialSpec::Free | PotentialSpec::Sturmian { .. } => true,
            PotentialSpec::Sparse { .. } => false,
            PotentialSpec::Explicit { offset, .. } => *offset < 0,
            PotentialSpec::Perturbed { base, .. } => {
                matches!(base.as_ref(), PotentialSpec::Sturmian { .. })
            }
        }
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        match self {
            PotentialSpec::Free | PotentialSpec::Explicit { .. } => Ok(()),
            PotentialSpec::Sturmian { lambda, theta, rho } => {
                if *lambda == 0.0 || !lambda.is_finite() {
                    return Err(PotentialError::InvalidSpec(format!(
                        "Sturmian coupling must be nonzero and finite, got {lambda}"
                    )));
                }
                if theta.is_rational() {
                    return Err(PotentialError::RationalTheta);
                }
                if let Some(digits) = theta.decimal_digits() {
                    if digits < MIN_DECIMAL_DIGITS {
                        return Err(PotentialError::InvalidSpec(format!(
                            "decimal theta has {digits} fractional digits; \
                             at least {MIN_DECIMAL_DIGITS} are required"
                        )));
                    }
                }
                if !theta.in_unit_interval() {
                    return Err(PotentialError::InvalidSpec(
                        "theta must lie in (0,1)".into(),
                    ));
                }
                if rho.is_negative() || *rho >= BigRational::one() {
                    return Err(PotentialError::InvalidSpec(format!(
                        "rho = {rho} outside [0,1)"
                    )));
                }
                Ok(())
            }
            PotentialSpec::Sparse { alpha } => {
                if *alpha > 0.0 && *alpha < 1.0 {
                    Ok(())
                } else {
                    Err(PotentialError::AlphaOutOfRange(*alpha))
                }
            }
            PotentialSpec::Perturbed { base, c, p, .. } => {
                if matches!(base.as_ref(), PotentialSpec::Perturbed { .. }) {
                    return Err(PotentialError::NestedPerturbation);
                }
                if !c.is_finite() || *c <= 0.0 {
                    return Err(PotentialError::InvalidSpec(format!(
                        "perturbation amplitude C = {c} must be positive"
                    )));
                }
                if !p.is_finite() || *p <= 0.0 {
                    return Err(PotentialError::InvalidSpec(format!(
                        "decay exponent p = {p} must be positive"
                    )));
                }
                base.validate()
            }
        }
    }

    pub fn value(&self, n: i64) -> Result<f64, PotentialError> {
        potential_value(self, n)
    }
}

/// The indicator χ_[1−θ,1)(nθ+ρ mod 1), decided through the exact floor
/// identity χ = ⌊(n+1)θ+ρ⌋ − ⌊nθ+ρ⌋.
pub fn sturmian_indicator(
    theta: &Theta,
    rho: &BigRational,
    n: i64,
) -> Result<bool, PotentialError> {
    if theta.is_rational() {
        return Err(PotentialError::RationalTheta);
    }
    let hi = theta.floor_linear(n + 1, rho)?;
    let lo = theta.floor_linear(n, rho)?;
    let step = hi - lo;
    debug_assert!(step.is_zero() || step.is_one());
    Ok(step.is_one())
}

/// λ·χ_[1−θ,1)(nθ+ρ mod 1).
pub fn sturmian_value(
    lambda: f64,
    theta: &Theta,
    rho: &BigRational,
    n: i64,
) -> Result<f64, PotentialError> {
    Ok(if sturmian_indicator(theta, rho, n)? { lambda } else { 0.0 })
}

/// All sparse barrier sites x_j = 2^(j^j) with x_j ≤ n_max, as exact integers.
pub fn sparse_sites(n_max: u64) -> Vec<BigUint> {
    let mut out = Vec::new();
    for j in 1u32.. {
        let Some(exp) = j.checked_pow(j) else { break };
        if exp >= 64 {
            // 2^64 already exceeds any u64 bound
            break;
        }
        let site = 1u64 << exp;
        if site > n_max {
            break;
        }
        out.push(BigUint::from(site));
    }
    out
}

fn sparse_site_exponent(n: u64) -> Option<u32> {
    if n < 2 || !n.is_power_of_two() {
        return None;
    }
    let e = n.trailing_zeros();
    for j in 1u32.. {
        let jj = j.checked_pow(j)?;
        if jj == e {
            return Some(e);
        }
        if jj > e {
            return None;
        }
    }
    None
}

/// Sparse barrier height x_j^((1−α)/(2α)) at n = x_j, zero elsewhere.
/// Evaluated as 2^(j^j·(1−α)/(2α)) so no intermediate power overflows.
pub fn sparse_value(alpha: f64, n: u64) -> Result<f64, PotentialError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PotentialError::AlphaOutOfRange(alpha));
    }
    match sparse_site_exponent(n) {
        Some(e) => Ok(f64::exp2(e as f64 * (1.0 - alpha) / (2.0 * alpha))),
        None => Ok(0.0),
    }
}

/// s(n)·C·(1+|n|)^(−p). The magnitude always equals C(1+|n|)^(−p).
pub fn perturbation_value(c: f64, p: f64, pattern: SignPattern, seed: u64, n: i64) -> f64 {
    let base = 1.0 + n.unsigned_abs() as f64;
    let envelope = if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        base.powi(-(p as i32))
    } else {
        base.powf(-p)
    };
    pattern.sign(seed, n) * c * envelope
}

/// Dispatch V(n) over the potential families; Perturbed adds base and envelope.
pub fn potential_value(spec: &PotentialSpec, n: i64) -> Result<f64, PotentialError> {
    match spec {
        PotentialSpec::Free => Ok(0.0),
        PotentialSpec::Sturmian { lambda, theta, rho } => sturmian_value(*lambda, theta, rho, n),
        PotentialSpec::Sparse { alpha } => {
            if n < 0 {
                return Err(PotentialError::DomainMismatch { n, family: "sparse" });
            }
            sparse_value(*alpha, n as u64)
        }
        PotentialSpec::Explicit { values, offset } => {
            let idx = n - offset;
            if idx < 0 || idx as usize >= values.len() {
                return Err(PotentialError::DomainMismatch { n, family: "explicit" });
            }
            Ok(values[idx as usize])
        }
        PotentialSpec::Perturbed { base, c, p, sign_pattern, seed } => {
            if n < 0 && !spec.whole_line() {
                return Err(PotentialError::DomainMismatch { n, family: "perturbed" });
            }
            let v0 = potential_value(base, n)?;
            Ok(v0 + perturbation_value(*c, *p, *sign_pattern, *seed, n))
        }
    }
}

mod theta_serde {
    use super::*;

    pub fn serialize<S: Serializer>(theta: &Theta, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&theta.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Theta, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => Theta::from_str(&s).map_err(D::Error::custom),
            Raw::Number(x) => Theta::from_f64(x).map_err(D::Error::custom),
        }
    }
}

mod rho_serde {
    use super::*;
    use crate::theta::parse_rational;

    pub fn serialize<S: Serializer>(rho: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        if rho.denom().is_one() {
            s.serialize_str(&rho.numer().to_string())
        } else {
            s.serialize_str(&format!("{}/{}", rho.numer(), rho.denom()))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => parse_rational(&s).map_err(D::Error::custom),
            Raw::Number(x) => BigRational::from_float(x)
                .ok_or_else(|| D::Error::custom(format!("non-finite rho {x}"))),
        }
    }
}

/// Convenience f64 view of rho for reporting.
pub fn rho_to_f64(rho: &BigRational) -> f64 {
    rational_to_f64(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_spec(lambda: f64) -> PotentialSpec {
        PotentialSpec::fibonacci(lambda)
    }

    #[test]
    fn sturmian_examples() {
        let theta = Theta::golden();
        let rho = BigRational::zero();
        // frac(θ) = 0.6180… ≥ 1−θ = 0.3819…
        assert_eq!(sturmian_value(1.0, &theta, &rho, 1).unwrap(), 1.0);
        // frac(2θ) = 0.2360… < 0.3819…
        assert_eq!(sturmian_value(1.0, &theta, &rho, 2).unwrap(), 0.0);
        // frac(0) = 0 never lies in [1−θ,1)
        assert_eq!(sturmian_value(3.0, &theta, &rho, 0).unwrap(), 0.0);
        // frac(3θ) = 0.8541…
        assert_eq!(sturmian_value(1.0, &theta, &rho, 3).unwrap(), 1.0);
        // boundary site: frac(−θ) = 1−θ exactly, inside the half-open window
        assert_eq!(sturmian_value(1.0, &theta, &rho, -1).unwrap(), 1.0);
    }

    #[test]
    fn fibonacci_substitution_word_agrees() {
        // independent oracle: a→ab, b→a, starting from "a"; map a↦1, b↦0
        let mut word = vec![true];
        while word.len() < 10_000 {
            let mut next = Vec::with_capacity(word.len() * 2);
            for &ch in &word {
                if ch {
                    next.push(true);
                    next.push(false);
                } else {
                    next.push(true);
                }
            }
            word = next;
        }
        let spec = golden_spec(1.0);
        for (i, &letter) in word.iter().enumerate().take(10_000) {
            let n = i as i64 + 1;
            let v = spec.value(n).unwrap();
            assert_eq!(v == 1.0, letter, "mismatch at n={n}");
        }
    }

    #[test]
    fn sparse_sites_examples() {
        let as_u64 = |v: Vec<BigUint>| -> Vec<u64> {
            v.into_iter().map(|x| u64::try_from(x).unwrap()).collect()
        };
        assert_eq!(as_u64(sparse_sites(20)), vec![2, 16]);
        assert_eq!(as_u64(sparse_sites(200_000_000)), vec![2, 16, 134_217_728]);
        assert_eq!(sparse_sites(1), Vec::<BigUint>::new());
    }

    #[test]
    fn sparse_value_examples() {
        assert_eq!(sparse_value(0.5, 16).unwrap(), 4.0);
        // 2^13.5, oracle value from 50-digit evaluation
        let v = sparse_value(0.5, 134_217_728).unwrap();
        assert!((v - 11585.237502960395).abs() < 1e-9, "got {v}");
        assert_eq!(sparse_value(0.5, 3).unwrap(), 0.0);
        assert_eq!(sparse_value(0.5, 0).unwrap(), 0.0);
        assert!(matches!(sparse_value(1.0, 2), Err(PotentialError::AlphaOutOfRange(_))));
    }

    #[test]
    fn sparse_value_nonzero_exactly_on_sites() {
        let sites: Vec<u64> = sparse_sites(1 << 30)
            .into_iter()
            .map(|x| u64::try_from(x).unwrap())
            .collect();
        for n in 0..=70_000u64 {
            let v = sparse_value(0.3, n).unwrap();
            assert_eq!(v != 0.0, sites.contains(&n), "n={n}");
        }
    }

    #[test]
    fn perturbation_examples() {
        assert_eq!(perturbation_value(1.0, 2.0, SignPattern::Plus, 0, 0), 1.0);
        assert_eq!(perturbation_value(1.0, 2.0, SignPattern::Alternating, 0, 1), -0.25);
        assert_eq!(perturbation_value(2.0, 4.0, SignPattern::Plus, 0, 3), 0.0078125);
    }

    #[test]
    fn perturbation_magnitude_is_exact_envelope() {
        for pattern in [SignPattern::Plus, SignPattern::Alternating, SignPattern::Random] {
            for n in [0i64, 1, 2, 17, 1000, -5] {
                let v = perturbation_value(1.5, 2.5, pattern, 42, n);
                let envelope = 1.5 * (1.0 + n.unsigned_abs() as f64).powf(-2.5);
                assert!(
                    (v.abs() - envelope).abs() <= envelope * f64::EPSILON,
                    "pattern {pattern:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn random_pattern_is_deterministic_and_mixed() {
        let a: Vec<f64> = (0..64).map(|n| SignPattern::Random.sign(7, n)).collect();
        let b: Vec<f64> = (0..64).map(|n| SignPattern::Random.sign(7, n)).collect();
        assert_eq!(a, b);
        let c: Vec<f64> = (0..64).map(|n| SignPattern::Random.sign(8, n)).collect();
        assert_ne!(a, c);
        assert!(a.iter().any(|&s| s > 0.0) && a.iter().any(|&s| s < 0.0));
    }

    #[test]
    fn dispatcher_examples() {
        assert_eq!(potential_value(&PotentialSpec::Free, 7).unwrap(), 0.0);
        let perturbed_free = PotentialSpec::perturbed(
            PotentialSpec::Free,
            Perturbation::new(1.0, 1.0, SignPattern::Plus, 0),
        );
        assert_eq!(potential_value(&perturbed_free, 1).unwrap(), 0.5);
        assert_eq!(potential_value(&golden_spec(1.0), 3).unwrap(), 1.0);
    }

    #[test]
    fn explicit_values_and_range() {
        let spec = PotentialSpec::Explicit { values: vec![3.0, -1.0, 0.5], offset: -1 };
        assert_eq!(spec.value(-1).unwrap(), 3.0);
        assert_eq!(spec.value(0).unwrap(), -1.0);
        assert_eq!(spec.value(1).unwrap(), 0.5);
        assert!(matches!(spec.value(2), Err(PotentialError::DomainMismatch { .. })));
        assert!(matches!(spec.value(-2), Err(PotentialError::DomainMismatch { .. })));
        assert!(spec.whole_line());
    }

    #[test]
    fn domain_checks() {
        let sparse = PotentialSpec::Sparse { alpha: 0.5 };
        assert!(matches!(
            potential_value(&sparse, -1),
            Err(PotentialError::DomainMismatch { .. })
        ));
        // perturbed sparse is half-line; perturbed Sturmian is whole-line
        let ps = PotentialSpec::perturbed(sparse, Perturbation::new(1.0, 2.0, SignPattern::Plus, 0));
        assert!(potential_value(&ps, -3).is_err());
        let pf = PotentialSpec::perturbed(
            golden_spec(1.0),
            Perturbation::new(1.0, 2.0, SignPattern::Plus, 0),
        );
        assert!(potential_value(&pf, -3).is_ok());
    }

    #[test]
    fn validation_rules() {
        assert!(golden_spec(1.0).validate().is_ok());
        assert!(matches!(
            golden_spec(0.0).validate(),
            Err(PotentialError::InvalidSpec(_))
        ));
        let rational = PotentialSpec::Sturmian {
            lambda: 1.0,
            theta: Theta::from_str("0.5").unwrap(),
            rho: BigRational::zero(),
        };
        assert_eq!(rational.validate(), Err(PotentialError::RationalTheta));
        let shallow = PotentialSpec::Sturmian {
            lambda: 1.0,
            theta: Theta::decimal("0.618033988749").unwrap(),
            rho: BigRational::zero(),
        };
        assert!(matches!(shallow.validate(), Err(PotentialError::InvalidSpec(_))));
        let nested = PotentialSpec::perturbed(
            PotentialSpec::perturbed(
                PotentialSpec::Free,
                Perturbation::new(1.0, 2.0, SignPattern::Plus, 0),
            ),
            Perturbation::new(1.0, 2.0, SignPattern::Plus, 0),
        );
        assert_eq!(nested.validate(), Err(PotentialError::NestedPerturbation));
        assert!(matches!(
            (PotentialSpec::Sparse { alpha: 1.0 }).validate(),
            Err(PotentialError::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let spec = PotentialSpec::perturbed(
            golden_spec(1.0),
            Perturbation::new(1.0, 25.0, SignPattern::Alternating, 3),
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"perturbed\""));
        assert!(json.contains("\"C\":1.0"));
        assert!(json.contains("\"sign_pattern\":\"alternating\""));
        assert!(json.contains("\"theta\":\"golden\""));
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn json_accepts_decimal_theta_and_numeric_rho() {
        let json = r#"{
            "family": "sturmian",
            "lambda": 2.0,
            "theta": "0.4142135623730950488016887242096980785696",
            "rho": 0.0
        }"#;
        let spec: PotentialSpec = serde_json::from_str(json).unwrap();
        spec.validate().unwrap();
        let exact = PotentialSpec::sturmian(2.0, Theta::sqrt2_minus_one(), BigRational::zero());
        for n in 0..2000 {
            assert_eq!(spec.value(n).unwrap(), exact.value(n).unwrap(), "n={n}");
        }
    }
}
