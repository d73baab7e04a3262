//! Property tests for the invariants that hold across the whole parameter
//! space rather than at hand-picked points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spectral_lab::potentials::{perturbation_value, PotentialSpec, SignPattern};
use spectral_lab::propagator::{canonical_pair, default_checkpoints, propagate, Direction};
use spectral_lab::{abel_sum_bound, cumulative_g, sturmian_value, ContinuedFraction, Theta};

fn sign_pattern() -> impl Strategy<Value = SignPattern> {
    prop_oneof![
        Just(SignPattern::Plus),
        Just(SignPattern::Alternating),
        Just(SignPattern::Random),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn abel_bound_holds_for_premise_satisfying_instances(
        b in 0.1f64..3.0,
        delta in 0.1f64..3.0,
        l in 16usize..10_000,
        seed in any::<u64>(),
    ) {
        let a = b + delta;
        let mut rng = StdRng::seed_from_u64(seed);
        let xi: Vec<f64> = (1..=l)
            .map(|n| rng.gen_range(-1.0..1.0) * (1.0 + n as f64).powf(-a))
            .collect();
        let raw1: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let raw2: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // rescale so the norm-product premise holds with equality somewhere
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut m: f64 = 0.0;
        for n in 1..=l {
            s1 += raw1[n - 1] * raw1[n - 1];
            s2 += raw2[n - 1] * raw2[n - 1];
            m = m.max((s1 * s2).sqrt() / (1.0 + n as f64).powf(b));
        }
        prop_assume!(m > 0.0);
        let scale = 1.0 / m.sqrt() * (1.0 - 1e-13);
        let psi1: Vec<f64> = raw1.iter().map(|x| x * scale).collect();
        let psi2: Vec<f64> = raw2.iter().map(|x| x * scale).collect();
        let report = abel_sum_bound(&xi, &psi1, &psi2, a, b, l).unwrap();
        prop_assert!(report.satisfied, "lhs {} > rhs {}", report.lhs, report.rhs);
    }
}

proptest! {
    #[test]
    fn perturbation_magnitude_matches_envelope(
        c in 1e-3f64..1e3,
        p in 0.05f64..30.0,
        n in 0i64..1_000_000,
        pattern in sign_pattern(),
        seed in any::<u64>(),
    ) {
        let v = perturbation_value(c, p, pattern, seed, n);
        let envelope = c * (1.0 + n as f64).powf(-p);
        prop_assert!((v.abs() - envelope).abs() <= 2.0 * f64::EPSILON * envelope);
    }

    #[test]
    fn potential_values_are_pure(
        n in -100_000i64..100_000,
        lambda in prop_oneof![Just(1.0f64), Just(-2.5), Just(0.3)],
    ) {
        let spec = PotentialSpec::fibonacci(lambda);
        let a = spec.value(n).unwrap();
        let b = spec.value(n).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sturmian_matches_floor_difference_oracle(n in -50_000i64..50_000) {
        // independent route: frac(nθ+ρ) ∈ [1−θ,1) decided through rational
        // bounds at high precision, must agree wherever it separates
        let theta = Theta::golden();
        let rho = BigRational::zero();
        let v = sturmian_value(1.0, &theta, &rho, n).unwrap();
        let (lo, hi) = theta.rational_bounds(160);
        let nb = BigRational::from(BigInt::from(n));
        let (x_lo, x_hi) = if n >= 0 {
            (&nb * &lo, &nb * &hi)
        } else {
            (&nb * &hi, &nb * &lo)
        };
        let frac_lo = &x_lo - BigRational::from(x_lo.floor().to_integer());
        let frac_hi = &x_hi - BigRational::from(x_hi.floor().to_integer());
        let break_lo = BigRational::one() - &hi;
        let break_hi = BigRational::one() - &lo;
        // same integer part on both ends ⇒ the interval separates cleanly
        if x_lo.floor() == x_hi.floor() {
            if frac_lo > break_hi {
                prop_assert_eq!(v, 1.0, "n={}", n);
            } else if frac_hi < break_lo {
                prop_assert_eq!(v, 0.0, "n={}", n);
            }
        }
    }

    #[test]
    fn norms_nondecreasing_and_wronskian_conserved(
        e in -3.0f64..3.5,
        phi in -1.5f64..1.5,
    ) {
        let spec = PotentialSpec::fibonacci(1.0);
        let pair = canonical_pair(&spec, e, phi, &default_checkpoints(2000.0)).unwrap();
        for tr in [&pair.u1, &pair.u2] {
            for w in tr.log2_norms.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
        prop_assert!(pair.max_wronskian_deviation() < 1e-10);
    }

    #[test]
    fn propagation_is_linear(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        e in -2.5f64..2.5,
    ) {
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let spec = PotentialSpec::fibonacci(1.0);
        let cps = [64.0, 256.0];
        let t1 = propagate(&spec, e, (1.0, 0.0), &cps, Direction::Right).unwrap();
        let t2 = propagate(&spec, e, (0.0, 1.0), &cps, Direction::Right).unwrap();
        let tc = propagate(&spec, e, (a, b), &cps, Direction::Right).unwrap();
        for i in 0..cps.len() {
            // windows are stored in each trace's own rescale frame; move all
            // three to the smallest scale before comparing
            let s_ref = t1.window_scales[i].min(t2.window_scales[i]).min(tc.window_scales[i]);
            let adj = |w: (f64, f64), s: i64| {
                let f = f64::exp2((s - s_ref) as f64);
                (w.0 * f, w.1 * f)
            };
            let w1 = adj(t1.windows[i], t1.window_scales[i]);
            let w2 = adj(t2.windows[i], t2.window_scales[i]);
            let wc = adj(tc.windows[i], tc.window_scales[i]);
            let want = (a * w1.0 + b * w2.0, a * w1.1 + b * w2.1);
            let scale = want.0.abs().max(want.1.abs()).max(1.0);
            prop_assert!((wc.0 - want.0).abs() <= 1e-11 * scale);
            prop_assert!((wc.1 - want.1).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn cumulative_g_monotone_with_cauchy_schwarz_tail(
        seed in any::<u64>(),
        n in 1usize..200,
        m in 1usize..200,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let len = n + m;
        let psi1: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let psi2: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g_n = cumulative_g(&psi1, &psi2, n);
        let g_nm = cumulative_g(&psi1, &psi2, len);
        prop_assert!(g_nm >= g_n);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cross = norm(&psi1[..len]) * norm(&psi2[..len]);
        prop_assert!(g_nm <= g_n + cross * (1.0 + 1e-12));
    }

    #[test]
    fn convergents_recurrence_invariants(
        coeffs in proptest::collection::vec(1u64..50, 1..40),
    ) {
        let cf = ContinuedFraction {
            coefficients: coeffs.clone(),
            source: "random".into(),
            truncated: true,
            bounded_density_certified: false,
        };
        let conv = spectral_lab::convergents(&cf);
        // exact value of the finite continued fraction by backward folding
        let mut value = BigRational::zero();
        for &a in coeffs.iter().rev() {
            value = (BigRational::from(BigInt::from(a)) + value).recip();
        }
        let mut prev_q = BigInt::zero();
        for (i, (p, q)) in conv.iter().enumerate() {
            prop_assert!(q > &prev_q, "q must increase");
            prop_assert!(p.gcd(q).is_one());
            let approx = BigRational::new(p.clone(), q.clone());
            let err = (&value - &approx).abs();
            let bound = BigRational::new(BigInt::one(), q * q);
            // final convergent reproduces the value exactly
            if i + 1 == conv.len() {
                prop_assert_eq!(err, BigRational::zero());
            } else {
                prop_assert!(err < bound);
            }
            prev_q = q.clone();
        }
    }

    #[test]
    fn spec_json_round_trips(
        lambda in prop_oneof![Just(1.0f64), Just(-0.7), Just(3.2)],
        c in 0.1f64..10.0,
        p in 0.5f64..30.0,
        seed in any::<u64>(),
        pattern in sign_pattern(),
    ) {
        let spec = PotentialSpec::perturbed(
            PotentialSpec::fibonacci(lambda),
            spectral_lab::Perturbation::new(c, p, pattern, seed),
        );
        let json = serde_json::to_string(&spec).unwrap();
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, spec);
    }
}
