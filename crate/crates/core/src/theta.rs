//! Rotation-number descriptors with certified arithmetic.
//!
//! The Sturmian indicator χ_[1−θ,1)(nθ+ρ mod 1) equals the floor difference
//! ⌊(n+1)θ+ρ⌋ − ⌊nθ+ρ⌋, so deciding it reduces to computing floors of
//! nθ+ρ. Quadratic irrationals (a + c√d)/b are evaluated in exact integer
//! arithmetic over ℤ[√d]; decimal descriptors carry a half-ulp uncertainty
//! interval and every floor is certified against it or refused.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Minimum fractional digits for a decimal descriptor to count as
/// high-precision (25 digits ≈ 83 bits > the required 80).
pub const MIN_DECIMAL_DIGITS: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("theta descriptor denotes a rational number")]
    RationalTheta,
    #[error("floor of {0} could not be certified at the descriptor's precision")]
    PrecisionUndecidable(String),
    #[error("invalid theta descriptor: {0}")]
    InvalidDescriptor(String),
}

/// A rotation number θ, tracked precisely enough to certify floor values.
#[derive(Debug, Clone, PartialEq)]
pub enum Theta {
    /// (a + c√d)/b with d not a perfect square and c ≠ 0; exactly irrational.
    Quadratic { a: i64, c: i64, d: u64, b: i64 },
    /// Correctly-rounded decimal: true value lies within half an ulp of the
    /// last printed digit.
    Decimal {
        repr: String,
        value: BigRational,
        half_ulp: BigRational,
        digits: usize,
    },
    /// An exact rational. Rejected wherever irrationality is required.
    Rational(BigRational),
}

impl Theta {
    /// The golden mean (√5 − 1)/2.
    pub fn golden() -> Self {
        Theta::Quadratic { a: -1, c: 1, d: 5, b: 2 }
    }

    /// √2 − 1.
    pub fn sqrt2_minus_one() -> Self {
        Theta::Quadratic { a: -1, c: 1, d: 2, b: 1 }
    }

    pub fn quadratic(a: i64, c: i64, d: u64, b: i64) -> Result<Self, ThetaError> {
        if b == 0 {
            return Err(ThetaError::InvalidDescriptor("zero denominator".into()));
        }
        if c == 0 || is_perfect_square(d) {
            return Err(ThetaError::RationalTheta);
        }
        // normalize so the denominator is positive
        let (a, c, b) = if b < 0 { (-a, -c, -b) } else { (a, c, b) };
        Ok(Theta::Quadratic { a, c, d, b })
    }

    pub fn decimal(s: &str) -> Result<Self, ThetaError> {
        let (value, digits) = parse_decimal(s)?;
        let half_ulp = BigRational::new(BigInt::one(), BigInt::from(2) * pow10(digits));
        Ok(Theta::Decimal { repr: s.trim().to_string(), value, half_ulp, digits })
    }

    pub fn rational(r: BigRational) -> Self {
        Theta::Rational(r)
    }

    pub fn from_f64(x: f64) -> Result<Self, ThetaError> {
        let r = BigRational::from_float(x)
            .ok_or_else(|| ThetaError::InvalidDescriptor(format!("non-finite value {x}")))?;
        Ok(Theta::Rational(r))
    }

    /// Whether irrationality is certain from the descriptor itself.
    pub fn is_certified_irrational(&self) -> bool {
        matches!(self, Theta::Quadratic { .. })
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Theta::Rational(_))
    }

    /// Fractional digits of a decimal descriptor.
    pub fn decimal_digits(&self) -> Option<usize> {
        match self {
            Theta::Decimal { digits, .. } => Some(*digits),
            _ => None,
        }
    }

    /// Rational bounds lo ≤ θ ≤ hi, with hi − lo ≤ 2^−bits for quadratics.
    pub fn rational_bounds(&self, bits: u32) -> (BigRational, BigRational) {
        match self {
            Theta::Quadratic { a, c, d, b } => {
                let scale: BigInt = BigInt::one() << bits;
                let s = (BigInt::from(*d) * (&scale * &scale)).sqrt();
                // √d ∈ [s, s+1]/2^bits
                let sqrt_lo = BigRational::new(s.clone(), scale.clone());
                let sqrt_hi = BigRational::new(s + 1, scale);
                let av = BigRational::from(BigInt::from(*a));
                let cv = BigRational::from(BigInt::from(*c));
                let bv = BigRational::from(BigInt::from(*b));
                let e1 = (&av + &cv * sqrt_lo) / &bv;
                let e2 = (av + cv * sqrt_hi) / bv;
                if e1 <= e2 { (e1, e2) } else { (e2, e1) }
            }
            Theta::Decimal { value, half_ulp, .. } => (value - half_ulp, value + half_ulp),
            Theta::Rational(r) => (r.clone(), r.clone()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.rational_bounds(80);
        let mid = (lo + hi) / BigRational::from(BigInt::from(2));
        rational_to_f64(&mid)
    }

    /// θ ∈ (0, 1), using certified bounds.
    pub fn in_unit_interval(&self) -> bool {
        let (lo, hi) = self.rational_bounds(80);
        lo > BigRational::zero() && hi < BigRational::one()
    }

    /// ⌊nθ + ρ⌋, exact for quadratics and certified for decimals.
    pub fn floor_linear(&self, n: i64, rho: &BigRational) -> Result<BigInt, ThetaError> {
        match self {
            Theta::Quadratic { a, c, d, b } => {
                // nθ + ρ = (n·a·rd + b·rn + n·c·rd·√d) / (b·rd)
                let rn = rho.numer();
                let rd = rho.denom(); // positive by BigRational normalization
                let nb = BigInt::from(n);
                let p = &nb * BigInt::from(*a) * rd + BigInt::from(*b) * rn;
                let q = nb * BigInt::from(*c) * rd;
                let r = BigInt::from(*b) * rd;
                Ok(floor_quadratic(&p, &q, &r, *d))
            }
            Theta::Decimal { value, half_ulp, .. } => {
                let nv = BigRational::from(BigInt::from(n));
                let spread = BigRational::from(BigInt::from(n.unsigned_abs())) * half_ulp;
                let mid = nv * value + rho;
                let lo = (&mid - &spread).floor().to_integer();
                let hi = (mid + spread).floor().to_integer();
                if lo == hi {
                    Ok(lo)
                } else {
                    Err(ThetaError::PrecisionUndecidable(format!("{n}·θ + ρ")))
                }
            }
            Theta::Rational(r) => {
                let x = BigRational::from(BigInt::from(n)) * r + rho;
                Ok(x.floor().to_integer())
            }
        }
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theta::Quadratic { a: -1, c: 1, d: 5, b: 2 } => write!(f, "golden"),
            Theta::Quadratic { a: -1, c: 1, d: 2, b: 1 } => write!(f, "sqrt2-1"),
            Theta::Quadratic { a, c, d, b } => write!(f, "({a}+{c}*sqrt({d}))/{b}"),
            Theta::Decimal { repr, .. } => write!(f, "{repr}"),
            Theta::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Theta {
    type Err = ThetaError;

    /// Accepted forms: `golden`, `sqrt2-1`, `p/q`, or a decimal string.
    /// Decimals with at least [`MIN_DECIMAL_DIGITS`] fractional digits are
    /// treated as rounded approximations of an irrational; shorter decimals
    /// denote the exact rational they spell.
    fn from_str(s: &str) -> Result<Self, ThetaError> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "golden" | "golden-mean" => return Ok(Theta::golden()),
            "sqrt2-1" | "sqrt2m1" => return Ok(Theta::sqrt2_minus_one()),
            _ => {}
        }
        if let Some((num, den)) = t.split_once('/') {
            let n = BigInt::from_str(num.trim())
                .map_err(|e| ThetaError::InvalidDescriptor(e.to_string()))?;
            let d = BigInt::from_str(den.trim())
                .map_err(|e| ThetaError::InvalidDescriptor(e.to_string()))?;
            if d.is_zero() {
                return Err(ThetaError::InvalidDescriptor("zero denominator".into()));
            }
            return Ok(Theta::Rational(BigRational::new(n, d)));
        }
        let (value, digits) = parse_decimal(t)?;
        if digits >= MIN_DECIMAL_DIGITS {
            let half_ulp = BigRational::new(BigInt::one(), BigInt::from(2) * pow10(digits));
            Ok(Theta::Decimal { repr: t.to_string(), value, half_ulp, digits })
        } else {
            Ok(Theta::Rational(value))
        }
    }
}

/// Parse an exact phase value: decimal string, `p/q`, or integer.
pub fn parse_rational(s: &str) -> Result<BigRational, ThetaError> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n =
            BigInt::from_str(num.trim()).map_err(|e| ThetaError::InvalidDescriptor(e.to_string()))?;
        let d =
            BigInt::from_str(den.trim()).map_err(|e| ThetaError::InvalidDescriptor(e.to_string()))?;
        if d.is_zero() {
            return Err(ThetaError::InvalidDescriptor("zero denominator".into()));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(t).map(|(v, _)| v)
}

fn parse_decimal(s: &str) -> Result<(BigRational, usize), ThetaError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ThetaError::InvalidDescriptor("empty string".into()));
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return Err(ThetaError::InvalidDescriptor(format!("not a decimal: {t:?}")));
    }
    let digits = frac_part.len();
    let joined = format!("{}{}", if int_part.is_empty() { "0" } else { int_part }, frac_part);
    let numer =
        BigInt::from_str(&joined).map_err(|e| ThetaError::InvalidDescriptor(e.to_string()))?;
    Ok((BigRational::new(numer * sign, pow10(digits)), digits))
}

fn pow10(digits: usize) -> BigInt {
    BigInt::from(10u32).pow(digits as u32)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // good to ~double precision for the magnitudes used here
    let scale: BigInt = BigInt::one() << 64;
    let scaled = (r.numer() * &scale).div_floor(r.denom());
    scaled.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64)
}

pub fn is_perfect_square(d: u64) -> bool {
    let r = (d as u128).sqrt() as u64;
    r * r == d
}

/// ⌊(p + q√d)/r⌋ for integers with r > 0 and d not a perfect square.
///
/// Since q√d is irrational whenever q ≠ 0, no integer lies strictly between
/// p + ⌊q√d⌋ and p + q√d, so the floor can be taken on integers throughout.
pub fn floor_quadratic(p: &BigInt, q: &BigInt, r: &BigInt, d: u64) -> BigInt {
    debug_assert!(r.is_positive());
    if let (Some(pi), Some(qi), Some(ri)) = (p.to_i128(), q.to_i128(), r.to_i128()) {
        let qa = qi.unsigned_abs();
        if let Some(q2d) = qa.checked_mul(qa).and_then(|v| v.checked_mul(d as u128)) {
            let s = q2d.sqrt() as i128;
            let t = if qi == 0 {
                0
            } else if qi > 0 {
                s
            } else {
                -s - 1
            };
            if let Some(num) = pi.checked_add(t) {
                return BigInt::from(num.div_euclid(ri));
            }
        }
    }
    let t: BigInt = if q.is_zero() {
        BigInt::zero()
    } else {
        let s = (q * q * BigInt::from(d)).sqrt();
        if q.is_positive() {
            s
        } else {
            -s - BigInt::one()
        }
    };
    (p + t).div_floor(r)
}

/// A quadratic surd (a + c√d)/b in exact integer form; drives the Gauss map.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd {
    pub a: BigInt,
    pub c: BigInt,
    pub b: BigInt,
    pub d: u64,
}

impl Surd {
    pub fn from_theta(t: &Theta) -> Option<Self> {
        match t {
            Theta::Quadratic { a, c, d, b } => Some(
                Surd {
                    a: BigInt::from(*a),
                    c: BigInt::from(*c),
                    b: BigInt::from(*b),
                    d: *d,
                }
                .reduced(),
            ),
            _ => None,
        }
    }

    fn reduced(mut self) -> Self {
        if self.b.is_negative() {
            self.a = -self.a;
            self.c = -self.c;
            self.b = -self.b.clone();
        }
        let g = self.a.gcd(&self.c).gcd(&self.b);
        if g > BigInt::one() {
            self.a /= &g;
            self.c /= &g;
            self.b /= g;
        }
        self
    }

    pub fn floor(&self) -> BigInt {
        floor_quadratic(&self.a, &self.c, &self.b, self.d)
    }

    /// 1/x = b(a − c√d)/(a² − c²d), normalized to a positive denominator.
    pub fn recip(&self) -> Surd {
        let e = &self.a * &self.a - &self.c * &self.c * BigInt::from(self.d);
        debug_assert!(!e.is_zero(), "surd must be irrational");
        let (a, c, b) = if e.is_negative() {
            (-(&self.b * &self.a), &self.b * &self.c, -e)
        } else {
            (&self.b * &self.a, -(&self.b * &self.c), e)
        };
        Surd { a, c, b, d: self.d }.reduced()
    }

    pub fn sub_int(&self, m: &BigInt) -> Surd {
        Surd {
            a: &self.a - m * &self.b,
            c: self.c.clone(),
            b: self.b.clone(),
            d: self.d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn golden_floor_values() {
        // frozen against a 50-digit evaluation of (√5−1)/2
        let theta = Theta::golden();
        let zero = BigRational::zero();
        for (n, expect) in [(1, 0), (2, 1), (3, 1), (4, 2), (5, 3), (8, 4), (13, 8)] {
            assert_eq!(theta.floor_linear(n, &zero).unwrap(), big(expect), "n={n}");
        }
        // negative sites: floor(−θ) = −1
        assert_eq!(theta.floor_linear(-1, &zero).unwrap(), big(-1));
        assert_eq!(theta.floor_linear(-2, &zero).unwrap(), big(-2));
    }

    #[test]
    fn decimal_floor_certified_matches_golden() {
        let dec =
            Theta::from_str("0.6180339887498948482045868343656381177203091798").unwrap();
        assert!(matches!(dec, Theta::Decimal { .. }));
        let golden = Theta::golden();
        let zero = BigRational::zero();
        for n in [-5i64, -1, 0, 1, 2, 3, 100, 12345, 100_000] {
            assert_eq!(
                dec.floor_linear(n, &zero).unwrap(),
                golden.floor_linear(n, &zero).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn decimal_precision_exhausts_for_huge_n() {
        // 25 digits certify floors up to roughly n·10^{-25} < gap size;
        // a site near a very close return time must eventually fail.
        let dec = Theta::from_str("0.6180339887498948482045868").unwrap();
        let zero = BigRational::zero();
        let mut failed = false;
        // denominators of golden-mean convergents make nθ exponentially close
        // to integers; scan Fibonacci numbers far beyond the certified range
        let mut a: i64 = 1;
        let mut b: i64 = 1;
        while b < 1_000_000_000_000_000 {
            let t = a + b;
            a = b;
            b = t;
        }
        for n in [b, a] {
            if dec.floor_linear(n, &zero).is_err() {
                failed = true;
            }
        }
        assert!(failed, "expected PrecisionUndecidable at Fibonacci index {b}");
    }

    #[test]
    fn short_decimal_parses_as_exact_rational() {
        let t = Theta::from_str("0.5").unwrap();
        assert_eq!(t, Theta::Rational(BigRational::new(big(1), big(2))));
        let t = Theta::from_str("3/7").unwrap();
        assert_eq!(t, Theta::Rational(BigRational::new(big(3), big(7))));
    }

    #[test]
    fn perfect_square_rejected() {
        assert_eq!(Theta::quadratic(0, 1, 9, 2), Err(ThetaError::RationalTheta));
        assert!(Theta::quadratic(-1, 1, 5, 2).is_ok());
    }

    #[test]
    fn floor_quadratic_against_isqrt() {
        // ⌊√2 · q⌋ for assorted q, checked against integer sqrt directly
        for q in [1i64, 2, 3, 10, 1000, 987654321] {
            let direct = ((2u128 * (q as u128) * (q as u128)).sqrt()) as i64;
            let got = floor_quadratic(&BigInt::zero(), &big(q), &BigInt::one(), 2);
            assert_eq!(got, big(direct), "q={q}");
        }
        // negative coefficient: ⌊−√2⌋ = −2
        assert_eq!(floor_quadratic(&BigInt::zero(), &big(-1), &BigInt::one(), 2), big(-2));
    }

    #[test]
    fn surd_gauss_step_golden_is_periodic() {
        let s = Surd::from_theta(&Theta::golden()).unwrap();
        let r = s.recip();
        assert_eq!(r.floor(), BigInt::one());
        let next = r.sub_int(&BigInt::one());
        assert_eq!(next, Surd::from_theta(&Theta::golden()).unwrap());
    }

    #[test]
    fn rational_bounds_bracket_value() {
        for t in [Theta::golden(), Theta::sqrt2_minus_one()] {
            let (lo, hi) = t.rational_bounds(128);
            assert!(lo < hi);
            let width = &hi - &lo;
            let cap = BigRational::new(BigInt::from(4), BigInt::one() << 128u32);
            assert!(width < cap);
            assert!(t.in_unit_interval());
        }
    }

    #[test]
    fn to_f64_accuracy() {
        assert!((Theta::golden().to_f64() - 0.618_033_988_749_894_9).abs() < 1e-15);
        assert!((Theta::sqrt2_minus_one().to_f64() - 0.414_213_562_373_095_05).abs() < 1e-15);
    }
}
