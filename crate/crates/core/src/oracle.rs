//! Independent brute-force verifiers the rest of the crate is checked
//! against: the Abel-summation bound for Σ|ξψ₁ψ₂|, cumulative products, and
//! direct solvers for the perturbed recurrence in plain double and in
//! double-double precision.

use crate::potentials::{
    sturmian_indicator, Perturbation, PotentialError, PotentialSpec,
};
use crate::propagator::PropagateError;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("premise violated: {which} fails first at index {index}")]
    PremiseViolation { which: &'static str, index: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
}

/// g(n) = Σ_{j=1}^{n} |ψ₁(j)ψ₂(j)| with g(0) = 0; slices hold sites 1..=len.
pub fn cumulative_g(psi1: &[f64], psi2: &[f64], n: usize) -> f64 {
    assert!(n <= psi1.len() && n <= psi2.len());
    psi1[..n].iter().zip(&psi2[..n]).map(|(a, b)| (a * b).abs()).sum()
}

/// Outcome of the Abel-summation bound check.
#[derive(Debug, Clone)]
pub struct AbelBoundReport {
    pub a: f64,
    pub b: f64,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Σ_{n=1}^{m}|ξψ₁ψ₂| for m = 1..=L.
    pub lhs_partials: Vec<f64>,
    /// The bound evaluated at each m = 1..=L.
    pub rhs_partials: Vec<f64>,
}

/// Checks Σ_{n=1}^{L}|ξ(n)ψ₁(n)ψ₂(n)| ≤ (2+L)^{−a}L^{b} + aΣ_{n=1}^{L}(1+n)^{b−a−1}
/// after verifying the premises |ξ(n)| ≤ (1+n)^{−a} for every n and
/// ‖ψ₁‖_M ‖ψ₂‖_M ≤ (1+M)^{b} for every integer M ≤ L (unit constants).
pub fn abel_sum_bound(
    xi: &[f64],
    psi1: &[f64],
    psi2: &[f64],
    a: f64,
    b: f64,
    l: usize,
) -> Result<AbelBoundReport, OracleError> {
    if !(a > b && b > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "need a > b > 0, got a = {a}, b = {b}"
        )));
    }
    if xi.len() < l || psi1.len() < l || psi2.len() < l {
        return Err(OracleError::InvalidInput(format!(
            "sequences must cover sites 1..={l}"
        )));
    }
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    for n in 1..=l {
        if xi[n - 1].abs() > (1.0 + n as f64).powf(-a) * (1.0 + 1e-12) {
            return Err(OracleError::PremiseViolation { which: "|xi(n)| <= (1+n)^-a", index: n });
        }
        s1 += psi1[n - 1] * psi1[n - 1];
        s2 += psi2[n - 1] * psi2[n - 1];
        if (s1 * s2).sqrt() > (1.0 + n as f64).powf(b) * (1.0 + 1e-12) {
            return Err(OracleError::PremiseViolation {
                which: "|psi1|_L |psi2|_L <= (1+L)^b",
                index: n,
            });
        }
    }

    let mut lhs_partials = Vec::with_capacity(l);
    let mut rhs_partials = Vec::with_capacity(l);
    let mut lhs = 0.0f64;
    let mut tail_sum = 0.0f64;
    for n in 1..=l {
        lhs += (xi[n - 1] * psi1[n - 1] * psi2[n - 1]).abs();
        tail_sum += (1.0 + n as f64).powf(b - a - 1.0);
        lhs_partials.push(lhs);
        rhs_partials.push((2.0 + n as f64).powf(-a) * (n as f64).powf(b) + a * tail_sum);
    }
    let rhs = *rhs_partials.last().unwrap();
    Ok(AbelBoundReport {
        a,
        b,
        l,
        lhs,
        rhs,
        satisfied: lhs <= rhs,
        lhs_partials,
        rhs_partials,
    })
}

/// Ground truth for the stability machinery: plain forward recursion of
/// v(n+1) = (E − V₀(n) − P(n))v(n) − v(n−1), values for n = 0..=n_max.
pub fn direct_perturbed_solve(
    spec: &PotentialSpec,
    perturbation: &Perturbation,
    energy: f64,
    init: (f64, f64),
    n_max: usize,
) -> Result<Vec<f64>, OracleError> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(init.0);
    if n_max >= 1 {
        out.push(init.1);
    }
    for n in 1..n_max as i64 {
        let v = spec.value(n)? + perturbation.value(n);
        let next = (energy - v) * out[n as usize] - out[(n - 1) as usize];
        if !next.is_finite() {
            return Err(OracleError::InvalidInput(format!("overflow at site {}", n + 1)));
        }
        out.push(next);
    }
    Ok(out)
}

/// Same recursion carried in double-double (~31 significant digits); the
/// high parts are returned. Supports the exactly-representable families
/// (free, explicit, Sturmian) plus integer decay exponents, which is what
/// the test corpus uses.
pub fn direct_perturbed_solve_dd(
    spec: &PotentialSpec,
    perturbation: &Perturbation,
    energy: f64,
    init: (f64, f64),
    n_max: usize,
) -> Result<Vec<f64>, OracleError> {
    if perturbation.p.fract() != 0.0 {
        return Err(OracleError::InvalidInput(
            "double-double oracle requires an integer decay exponent".into(),
        ));
    }
    let p_int = perturbation.p as i32;
    let e = Dd::from(energy);
    let c = Dd::from(perturbation.c);
    let mut prev = Dd::from(init.0);
    let mut cur = Dd::from(init.1);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(init.0);
    if n_max >= 1 {
        out.push(cur.hi);
    }
    for n in 1..n_max as i64 {
        let v0 = base_value_exact(spec, n)?;
        let base = Dd::from(1.0 + n as f64);
        let mut env = Dd::from(1.0);
        for _ in 0..p_int {
            env = env * base;
        }
        let p_n = (c / env).scale(perturbation.pattern.sign(perturbation.seed, n));
        let next = (e - v0 - p_n) * cur - prev;
        prev = cur;
        cur = next;
        out.push(cur.hi);
    }
    Ok(out)
}

/// V₀(n) for families whose values are exactly representable in a Dd.
fn base_value_exact(spec: &PotentialSpec, n: i64) -> Result<Dd, OracleError> {
    match spec {
        PotentialSpec::Free => Ok(Dd::from(0.0)),
        PotentialSpec::Explicit { .. } => Ok(Dd::from(spec.value(n)?)),
        PotentialSpec::Sturmian { lambda, theta, rho } => {
            Ok(if sturmian_indicator(theta, rho, n)? {
                Dd::from(*lambda)
            } else {
                Dd::from(0.0)
            })
        }
        other => Err(OracleError::InvalidInput(format!(
            "double-double oracle does not support {} potentials",
            other.family_name()
        ))),
    }
}

/// Exact partial sum Σ_{n=1}^{L} (1+n)^{−k} as a rational, for freezing
/// oracle values with no rounding at all.
pub fn exact_inverse_power_sum(k: u32, l: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for n in 1..=l {
        let d = num_bigint::BigInt::from(1 + n as u64).pow(k);
        acc += BigRational::new(1.into(), d);
    }
    acc
}

/// Minimal double-double arithmetic (Dekker/Knuth error-free transforms).
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + Dd { hi: -o.hi, lo: -o.lo }
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = (r.hi + r.lo) / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Dd {
    pub fn scale(self, s: f64) -> Dd {
        // exact for s = ±1, the only use here
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::SignPattern;
    use crate::propagator::solution_values;
    use crate::theta::rational_to_f64;

    #[test]
    fn cumulative_examples() {
        assert_eq!(cumulative_g(&[1.0; 5], &[1.0; 5], 5), 5.0);
        assert_eq!(cumulative_g(&[1.0; 5], &[1.0; 5], 0), 0.0);
        assert_eq!(cumulative_g(&[1.0, -2.0], &[3.0, 4.0], 2), 11.0);
    }

    #[test]
    fn abel_explicit_instance() {
        // ξ(n) = (1+n)^{−2}, ψ ≡ 1, a = 2, b = 1, L = 100
        let l = 100;
        let xi: Vec<f64> = (1..=l).map(|n| (1.0 + n as f64).powi(-2)).collect();
        let ones = vec![1.0; l];
        let rep = abel_sum_bound(&xi, &ones, &ones, 2.0, 1.0, l).unwrap();
        assert!(rep.satisfied);
        // the partial sum agrees with its exact rational value to 1e−12
        let exact = rational_to_f64(&exact_inverse_power_sum(2, l));
        assert!((rep.lhs - exact).abs() < 1e-12, "lhs={} exact={exact}", rep.lhs);
        assert!((exact - 0.6350819297898336).abs() < 1e-15);
        assert!((rep.rhs - 1.279_775_547_392_047).abs() < 1e-12);
    }

    #[test]
    fn abel_zero_xi_trivially_satisfied() {
        let l = 50;
        let xi = vec![0.0; l];
        let ones = vec![1.0; l];
        let rep = abel_sum_bound(&xi, &ones, &ones, 2.0, 1.0, l).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.satisfied);
    }

    #[test]
    fn abel_requires_a_greater_than_b() {
        let err = abel_sum_bound(&[0.0], &[1.0], &[1.0], 1.0, 2.0, 1).unwrap_err();
        assert!(matches!(err, OracleError::InvalidInput(_)));
    }

    #[test]
    fn abel_premise_violations_identified() {
        let l = 10;
        let mut xi: Vec<f64> = (1..=l).map(|n| (1.0 + n as f64).powi(-2)).collect();
        xi[2] = 0.5; // |ξ(3)| > 4^{−2}
        let ones = vec![1.0; l];
        match abel_sum_bound(&xi, &ones, &ones, 2.0, 1.0, l).unwrap_err() {
            OracleError::PremiseViolation { index, .. } => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
        let xi: Vec<f64> = (1..=l).map(|n| (1.0 + n as f64).powi(-2)).collect();
        let big = vec![3.0; l];
        match abel_sum_bound(&xi, &big, &big, 2.0, 1.0, l).unwrap_err() {
            OracleError::PremiseViolation { index, which } => {
                assert_eq!(index, 1);
                assert!(which.contains("psi"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn direct_solve_reduces_to_propagate_without_perturbation() {
        let spec = PotentialSpec::fibonacci(1.0);
        let zero_p = Perturbation::new(1.0, 2.0, SignPattern::Plus, 0);
        let mut zero_p = zero_p;
        zero_p.c = 0.0;
        let energy = 0.4;
        let init = (0.2, -1.0);
        let direct = direct_perturbed_solve(&spec, &zero_p, energy, init, 500).unwrap();
        let plain = solution_values(&spec, energy, init, 500).unwrap();
        assert_eq!(direct, plain);
    }

    #[test]
    fn double_double_agrees_with_f64_at_desk_scale() {
        let spec = PotentialSpec::Free;
        let pert = Perturbation::new(1.0, 4.0, SignPattern::Plus, 0);
        let energy = 0.0;
        let init = (0.0, 1.0);
        let n = 10_000;
        let f = direct_perturbed_solve(&spec, &pert, energy, init, n).unwrap();
        let dd = direct_perturbed_solve_dd(&spec, &pert, energy, init, n).unwrap();
        let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..=n {
            assert!(
                (f[i] - dd[i]).abs() <= 1e-8 * scale,
                "site {i}: {} vs {}",
                f[i],
                dd[i]
            );
        }
    }

    #[test]
    fn double_double_oracle_on_sturmian() {
        let spec = PotentialSpec::fibonacci(1.0);
        let pert = Perturbation::new(1.0, 3.0, SignPattern::Alternating, 0);
        let f = direct_perturbed_solve(&spec, &pert, 0.1, (0.0, 1.0), 2_000).unwrap();
        let dd = direct_perturbed_solve_dd(&spec, &pert, 0.1, (0.0, 1.0), 2_000).unwrap();
        let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..f.len() {
            assert!((f[i] - dd[i]).abs() <= 1e-9 * scale, "site {i}");
        }
    }

    #[test]
    fn dd_arithmetic_sanity() {
        // 1/3 in dd is accurate well past double precision
        let third = Dd::from(1.0) / Dd::from(3.0);
        let err = (third * Dd::from(3.0) - Dd::from(1.0)).value().abs();
        assert!(err < 1e-30, "err = {err}");
        let x = Dd::from(1e16) + Dd::from(1.0) - Dd::from(1e16);
        assert_eq!(x.value(), 1.0);
    }
}
