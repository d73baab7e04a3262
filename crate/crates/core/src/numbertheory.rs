//! Continued-fraction machinery: certified partial quotients, convergents,
//! and the running-mean statistic behind the bounded-density hypothesis.

use crate::theta::{Surd, Theta};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumberTheoryError {
    #[error("theta is rational; its continued fraction terminates")]
    RationalTheta,
    #[error("precision exhausted after {certified} certified terms (requested {requested})")]
    PrecisionExhausted { certified: usize, requested: usize },
    #[error("theta must lie in (0,1), got {0}")]
    OutOfRange(String),
    #[error("partial quotient exceeds u64 at term {0}")]
    QuotientOverflow(usize),
}

/// Certified prefix of the continued fraction θ = 1/(a₁ + 1/(a₂ + …)).
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub coefficients: Vec<u64>,
    /// Human-readable descriptor of the source θ.
    pub source: String,
    /// True when the coefficients are a prefix of a longer (infinite) expansion.
    pub truncated: bool,
    /// True when θ is certified bounded-density from its descriptor
    /// (quadratic irrationals have eventually periodic quotients).
    pub bounded_density_certified: bool,
}

/// First k partial quotients of θ, each certified correct.
///
/// Quadratic irrationals run the Gauss map exactly in ℤ[√d]; decimal
/// descriptors run it on the uncertainty interval and stop with
/// `PrecisionExhausted` as soon as the floor is ambiguous.
pub fn continued_fraction(theta: &Theta, k: usize) -> Result<ContinuedFraction, NumberTheoryError> {
    assert!(k >= 1, "at least one term must be requested");
    if !theta.in_unit_interval() {
        return Err(NumberTheoryError::OutOfRange(theta.to_string()));
    }
    match theta {
        Theta::Quadratic { .. } => {
            let mut x = Surd::from_theta(theta).expect("quadratic descriptor");
            let mut coefficients = Vec::with_capacity(k);
            for i in 0..k {
                let inv = x.recip();
                let a = inv.floor();
                let a64 = a
                    .to_u64()
                    .filter(|v| *v >= 1)
                    .ok_or(NumberTheoryError::QuotientOverflow(i + 1))?;
                coefficients.push(a64);
                x = inv.sub_int(&a);
            }
            Ok(ContinuedFraction {
                coefficients,
                source: theta.to_string(),
                truncated: true,
                bounded_density_certified: true,
            })
        }
        Theta::Decimal { value, half_ulp, .. } => {
            let mut lo = value - half_ulp;
            let mut hi = value + half_ulp;
            let mut coefficients = Vec::with_capacity(k);
            for i in 0..k {
                if !lo.is_positive() {
                    // the interval reaches zero: cannot certify another term
                    return Err(NumberTheoryError::PrecisionExhausted {
                        certified: i,
                        requested: k,
                    });
                }
                // 1/x maps [lo, hi] to [1/hi, 1/lo]
                let inv_lo = hi.recip();
                let inv_hi = lo.recip();
                let a_lo = inv_lo.floor().to_integer();
                let a_hi = inv_hi.floor().to_integer();
                if a_lo != a_hi {
                    return Err(NumberTheoryError::PrecisionExhausted {
                        certified: i,
                        requested: k,
                    });
                }
                let a64 = a_lo
                    .to_u64()
                    .filter(|v| *v >= 1)
                    .ok_or(NumberTheoryError::QuotientOverflow(i + 1))?;
                coefficients.push(a64);
                let af = BigRational::from(a_lo);
                lo = inv_lo - &af;
                hi = inv_hi - af;
            }
            Ok(ContinuedFraction {
                coefficients,
                source: theta.to_string(),
                truncated: true,
                bounded_density_certified: false,
            })
        }
        Theta::Rational(_) => Err(NumberTheoryError::RationalTheta),
    }
}

/// Running means (1/n)Σ_{i≤n} a_i for n = 1..k; the empirical view of the
/// bounded-density quantity limsup (1/n)Σ a_i.
pub fn bounded_density_statistic(cf: &ContinuedFraction) -> Vec<f64> {
    let mut sum = 0.0;
    cf.coefficients
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            sum += a as f64;
            sum / (i + 1) as f64
        })
        .collect()
}

/// Convergents p_k/q_k from the standard recurrence
/// p_k = a_k p_{k−1} + p_{k−2}, q_k = a_k q_{k−1} + q_{k−2}.
pub fn convergents(cf: &ContinuedFraction) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(cf.coefficients.len());
    // θ = [0; a₁, a₂, …]: p_{−1} = 1, p₀ = 0, q_{−1} = 0, q₀ = 1
    let mut p_prev = BigInt::one();
    let mut p_cur = BigInt::zero();
    let mut q_prev = BigInt::zero();
    let mut q_cur = BigInt::one();
    for &a in &cf.coefficients {
        let a = BigInt::from(a);
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        out.push((p_next.clone(), q_next.clone()));
        p_prev = p_cur;
        p_cur = p_next;
        q_prev = q_cur;
        q_cur = q_next;
    }
    out
}
