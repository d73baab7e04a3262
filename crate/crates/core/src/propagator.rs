//! Site-by-site integration of the generalized eigenvalue equation
//! u(n+1) = (E − V(n))u(n) − u(n−1), with truncated norms
//! ‖u‖_L² = Σ_{n=1}^{⌊L⌋}|u(n)|² + (L−⌊L⌋)|u(⌊L⌋+1)|².
//!
//! Solutions outside the spectrum grow exponentially; the engine rescales
//! the running pair by an exact power of two whenever it exceeds 2^256 and
//! carries the accumulated log₂ scale, so norms are recoverable in log form
//! at any growth rate. Norm accumulation uses Neumaier compensated summation.

use crate::potentials::{PotentialError, PotentialSpec};
use thiserror::Error;

/// Default cap on the number of sites a single propagation may visit.
pub const DEFAULT_SITE_BUDGET: f64 = 1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("max checkpoint {requested} exceeds the site budget {budget}")]
    SiteBudgetExceeded { requested: f64, budget: f64 },
    #[error("numeric overflow at site {site}")]
    NumericOverflow { site: i64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

/// One advance of the three-term recurrence: (E − V_n)·u_cur − u_prev.
#[inline]
pub fn step(u_prev: f64, u_cur: f64, energy: f64, v_n: f64) -> f64 {
    (energy - v_n) * u_cur - u_prev
}

/// u₁(n+1)u₂(n) − u₁(n)u₂(n+1) for two pairs sampled at sites (n, n+1).
#[inline]
pub fn wronskian(u1_pair: (f64, f64), u2_pair: (f64, f64)) -> f64 {
    u1_pair.1 * u2_pair.0 - u1_pair.0 * u2_pair.1
}

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    fn sum(&self) -> f64 {
        self.s + self.c
    }

    /// Exact when `f` is a power of two.
    fn scale(&mut self, f: f64) {
        self.s *= f;
        self.c *= f;
    }
}

/// A propagated generalized eigenfunction with checkpointed truncated norms.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub spec: PotentialSpec,
    pub energy: f64,
    pub init: (f64, f64),
    pub direction: Direction,
    pub checkpoints: Vec<f64>,
    /// ‖u‖_L with the rescale factor folded back in (+∞ if unrepresentable).
    pub norms: Vec<f64>,
    /// log₂‖u‖_L, finite at any growth rate.
    pub log2_norms: Vec<f64>,
    /// Scaled (u(n), u(n+1)) in ascending site order at n = ±⌊L⌋.
    pub windows: Vec<(f64, f64)>,
    /// log₂ of the rescale factor in force at each checkpoint.
    pub window_scales: Vec<i64>,
    pub terminal_window: (f64, f64),
    pub terminal_scale: i64,
    /// Outermost site reached: rightward the window covers
    /// (terminal_site − 1, terminal_site), leftward (terminal_site, terminal_site + 1).
    pub terminal_site: i64,
}

impl SolutionTrace {
    /// Natural-log norms, convenient for fitting.
    pub fn ln_norms(&self) -> Vec<f64> {
        self.log2_norms.iter().map(|x| x * std::f64::consts::LN_2).collect()
    }
}

/// The canonical solution pair u₁, u₂ for a boundary phase φ, with the
/// per-checkpoint Wronskian conservation diagnostics.
#[derive(Debug, Clone)]
pub struct CanonicalPair {
    pub phi: f64,
    pub u1: SolutionTrace,
    pub u2: SolutionTrace,
    /// Wronskian of the scaled windows at each checkpoint.
    pub wronskian_scaled: Vec<f64>,
    /// Its exact target 2^−(s₁+s₂) in the same scaled units.
    pub wronskian_expected: Vec<f64>,
    /// Running max of the scaled cross products; the size of the numbers the
    /// Wronskian difference is formed from, hence the natural error scale.
    pub wronskian_ref: Vec<f64>,
    /// Rescale-adjusted Wronskian at the terminal site.
    pub wronskian_check: f64,
}

impl CanonicalPair {
    /// Rescale-adjusted deviation |w − 1| at each checkpoint: the scaled
    /// Wronskian is compared against its exact scaled target and normalized
    /// by the magnitude of the products it was computed from.
    pub fn wronskian_deviations(&self) -> Vec<f64> {
        self.wronskian_scaled
            .iter()
            .zip(&self.wronskian_expected)
            .zip(&self.wronskian_ref)
            .map(|((w, e), r)| (w - e).abs() / r.max(1.0))
            .collect()
    }

    pub fn max_wronskian_deviation(&self) -> f64 {
        self.wronskian_deviations().into_iter().fold(0.0, f64::max)
    }

    /// Rescale-adjusted Wronskian value at each checkpoint. The scaled
    /// Wronskian carries cancellation noise of order ε times the cross
    /// products it is formed from; once the exact scaled target sinks below
    /// that floor the value is not resolvable in double precision and NaN is
    /// reported instead of noise.
    pub fn adjusted_wronskians(&self) -> Vec<f64> {
        self.wronskian_scaled
            .iter()
            .zip(self.wronskian_expected.iter().zip(&self.wronskian_ref))
            .zip(self.u1.window_scales.iter().zip(&self.u2.window_scales))
            .map(|((&w, (&expected, &reference)), (&s1, &s2))| {
                if !wronskian_resolvable(expected, reference) {
                    return f64::NAN;
                }
                let total = s1 + s2;
                if total == 0 {
                    w
                } else if w == 0.0 {
                    0.0
                } else {
                    w.signum() * f64::exp2(w.abs().log2() + total as f64)
                }
            })
            .collect()
    }
}

/// The adjusted Wronskian is trustworthy only while its exact scaled target
/// stands clear of the cancellation floor of the products forming it.
pub fn wronskian_resolvable(expected_scaled: f64, product_magnitude: f64) -> bool {
    expected_scaled > 16.0 * f64::EPSILON * product_magnitude.max(1.0)
}

/// `count` log-spaced checkpoints from `l_min` to `l_max`.
pub fn log_checkpoints(l_min: f64, l_max: f64, count: usize) -> Vec<f64> {
    assert!(l_min > 0.0 && l_max > l_min && count >= 2);
    let (a, b) = (l_min.ln(), l_max.ln());
    let mut out: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    out[0] = l_min;
    *out.last_mut().unwrap() = l_max;
    out.dedup();
    out
}

/// Default schedule: 64 log-spaced values ending at `l_max`, starting at 100
/// when the range allows it.
pub fn default_checkpoints(l_max: f64) -> Vec<f64> {
    let l_min = 100.0_f64.min(l_max / 2.0).max(1.0);
    log_checkpoints(l_min, l_max, 64)
}

fn validate_inputs(
    spec: &PotentialSpec,
    init: (f64, f64),
    checkpoints: &[f64],
    direction: Direction,
    budget: f64,
) -> Result<(), PropagateError> {
    spec.validate()?;
    if init.0 == 0.0 && init.1 == 0.0 {
        return Err(PropagateError::InvalidInput("initial pair must be nonzero".into()));
    }
    if !init.0.is_finite() || !init.1.is_finite() {
        return Err(PropagateError::InvalidInput("initial pair must be finite".into()));
    }
    if checkpoints.is_empty() {
        return Err(PropagateError::InvalidInput("empty checkpoint schedule".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] <= 0.0 {
        return Err(PropagateError::InvalidInput(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    let l_max = *checkpoints.last().unwrap();
    if l_max > budget {
        return Err(PropagateError::SiteBudgetExceeded { requested: l_max, budget });
    }
    if direction == Direction::Left && !spec.whole_line() {
        return Err(PropagateError::InvalidInput(format!(
            "left propagation requires a whole-line potential, got {}",
            spec.family_name()
        )));
    }
    Ok(())
}

// 2^256: squares stay far from the representable limit even after a
// barrier-height step factor.
fn rescale_threshold() -> f64 {
    f64::exp2(256.0)
}

fn pow2_exponent(x: f64) -> i64 {
    ((x.abs().to_bits() >> 52) & 0x7FF) as i64 - 1023
}

/// Site of the j-th norm term (j ≥ 1): n = j rightward, n = 1 − j leftward.
#[inline]
fn norm_site(direction: Direction, j: i64) -> i64 {
    match direction {
        Direction::Right => j,
        Direction::Left => 1 - j,
    }
}

struct Lane {
    prev: f64,
    cur: f64,
    scale: i64,
    sum: Neumaier,
}

/// Per-lane checkpoint records accumulated during a joint propagation.
#[derive(Default)]
struct Recorded {
    norms: Vec<f64>,
    log2_norms: Vec<f64>,
    windows: Vec<(f64, f64)>,
    scales: Vec<i64>,
}

impl Lane {
    fn new(init: (f64, f64), direction: Direction) -> Self {
        let (prev, cur) = match direction {
            Direction::Right => (init.0, init.1),
            Direction::Left => (init.1, init.0),
        };
        Lane { prev, cur, scale: 0, sum: Neumaier::default() }
    }

    /// Rescale (prev, cur) by an exact power of two if cur grew past the
    /// guard; returns the applied exponent k ≥ 0.
    fn maybe_rescale(&mut self) -> i64 {
        if self.cur.abs() > rescale_threshold() {
            let k = pow2_exponent(self.cur);
            let f = f64::exp2(-(k as f64));
            self.prev *= f;
            self.cur *= f;
            self.sum.scale(f * f);
            self.scale += k;
            k
        } else {
            0
        }
    }

    fn norm_parts(&self, frac: f64, next: f64) -> (f64, f64, f64) {
        let n2 = self.sum.sum() + frac * next * next;
        let scaled_norm = n2.max(0.0).sqrt();
        let log2_norm = 0.5 * n2.max(0.0).log2() + self.scale as f64;
        let norm = scaled_norm * f64::exp2(self.scale as f64);
        (norm, log2_norm, scaled_norm)
    }
}

/// Integrate (H−E)u = 0 from `init` = (u(0), u(1)) and record the truncated
/// norm at every checkpoint. Leftward runs mirror the norm over sites
/// 0, −1, −2, …
pub fn propagate(
    spec: &PotentialSpec,
    energy: f64,
    init: (f64, f64),
    checkpoints: &[f64],
    direction: Direction,
) -> Result<SolutionTrace, PropagateError> {
    propagate_with_budget(spec, energy, init, checkpoints, direction, DEFAULT_SITE_BUDGET)
}

pub fn propagate_with_budget(
    spec: &PotentialSpec,
    energy: f64,
    init: (f64, f64),
    checkpoints: &[f64],
    direction: Direction,
    budget: f64,
) -> Result<SolutionTrace, PropagateError> {
    validate_inputs(spec, init, checkpoints, direction, budget)?;
    let n_steps = checkpoints.last().unwrap().floor() as i64;

    let mut lane = Lane::new(init, direction);
    let mut norms = Vec::with_capacity(checkpoints.len());
    let mut log2_norms = Vec::with_capacity(checkpoints.len());
    let mut windows = Vec::with_capacity(checkpoints.len());
    let mut window_scales = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;

    // checkpoints with ⌊L⌋ = 0 use only the fractional term at index 1
    while next_cp < checkpoints.len() && checkpoints[next_cp] < 1.0 {
        let l = checkpoints[next_cp];
        let (norm, log2_norm, _) = Lane {
            prev: 0.0,
            cur: 0.0,
            scale: 0,
            sum: Neumaier::default(),
        }
        .norm_parts(l, lane.cur);
        norms.push(norm);
        log2_norms.push(log2_norm);
        windows.push(match direction {
            Direction::Right => (lane.prev, lane.cur),
            Direction::Left => (lane.cur, lane.prev),
        });
        window_scales.push(0);
        next_cp += 1;
    }

    let mut terminal = match direction {
        Direction::Right => (lane.prev, lane.cur),
        Direction::Left => (lane.cur, lane.prev),
    };
    for j in 1..=n_steps {
        let site = norm_site(direction, j);
        lane.sum.add(lane.cur * lane.cur);
        let v = spec.value(site)?;
        let next = step(lane.prev, lane.cur, energy, v);
        if !next.is_finite() {
            return Err(PropagateError::NumericOverflow { site });
        }
        while next_cp < checkpoints.len() && (checkpoints[next_cp].floor() as i64) == j {
            let l = checkpoints[next_cp];
            let frac = l - l.floor();
            let (norm, log2_norm, _) = lane.norm_parts(frac, next);
            norms.push(norm);
            log2_norms.push(log2_norm);
            windows.push(match direction {
                Direction::Right => (lane.cur, next),
                Direction::Left => (next, lane.cur),
            });
            window_scales.push(lane.scale);
            next_cp += 1;
        }
        lane.prev = lane.cur;
        lane.cur = next;
        lane.maybe_rescale();
        terminal = match direction {
            Direction::Right => (lane.prev, lane.cur),
            Direction::Left => (lane.cur, lane.prev),
        };
    }

    Ok(SolutionTrace {
        spec: spec.clone(),
        energy,
        init,
        direction,
        checkpoints: checkpoints.to_vec(),
        norms,
        log2_norms,
        windows,
        window_scales,
        terminal_window: terminal,
        terminal_scale: lane.scale,
        terminal_site: norm_site(direction, n_steps + 1),
    })
}

/// Propagate the canonical pair with Eq.-(8)-style initial data
/// u₁ = (−sin φ, cos φ), u₂ = (cos φ, sin φ), jointly so the Wronskian can
/// be monitored in a common scale frame.
pub fn canonical_pair(
    spec: &PotentialSpec,
    energy: f64,
    phi: f64,
    checkpoints: &[f64],
) -> Result<CanonicalPair, PropagateError> {
    canonical_pair_with_budget(spec, energy, phi, checkpoints, DEFAULT_SITE_BUDGET)
}

pub fn canonical_pair_with_budget(
    spec: &PotentialSpec,
    energy: f64,
    phi: f64,
    checkpoints: &[f64],
    budget: f64,
) -> Result<CanonicalPair, PropagateError> {
    use std::f64::consts::FRAC_PI_2;
    if !(phi > -FRAC_PI_2 && phi <= FRAC_PI_2) {
        return Err(PropagateError::InvalidInput(format!(
            "phi = {phi} outside (−π/2, π/2]"
        )));
    }
    let init1 = (-phi.sin(), phi.cos());
    let init2 = (phi.cos(), phi.sin());
    validate_inputs(spec, init1, checkpoints, Direction::Right, budget)?;

    let n_steps = checkpoints.last().unwrap().floor() as i64;
    let mut lanes = [Lane::new(init1, Direction::Right), Lane::new(init2, Direction::Right)];
    let mut recorded = [Recorded::default(), Recorded::default()];
    let mut w_scaled = Vec::with_capacity(checkpoints.len());
    let mut w_expected = Vec::with_capacity(checkpoints.len());
    let mut w_ref = Vec::with_capacity(checkpoints.len());
    let mut prod_max: f64 = 1.0;
    let mut next_cp = 0usize;
    let mut terminals = [(init1, 0i64), (init2, 0i64)];

    for j in 1..=n_steps {
        let v = spec.value(j)?;
        let next = [
            step(lanes[0].prev, lanes[0].cur, energy, v),
            step(lanes[1].prev, lanes[1].cur, energy, v),
        ];
        if !next[0].is_finite() || !next[1].is_finite() {
            return Err(PropagateError::NumericOverflow { site: j });
        }
        for lane in &mut lanes {
            lane.sum.add(lane.cur * lane.cur);
        }
        let cross_a = next[0] * lanes[1].cur;
        let cross_b = lanes[0].cur * next[1];
        prod_max = prod_max.max(cross_a.abs()).max(cross_b.abs());
        while next_cp < checkpoints.len() && (checkpoints[next_cp].floor() as i64) == j {
            let l = checkpoints[next_cp];
            let frac = l - l.floor();
            for i in 0..2 {
                let (norm, log2_norm, _) = lanes[i].norm_parts(frac, next[i]);
                recorded[i].norms.push(norm);
                recorded[i].log2_norms.push(log2_norm);
                recorded[i].windows.push((lanes[i].cur, next[i]));
                recorded[i].scales.push(lanes[i].scale);
            }
            w_scaled.push(cross_a - cross_b);
            w_expected.push(f64::exp2(-((lanes[0].scale + lanes[1].scale) as f64)));
            w_ref.push(prod_max);
            next_cp += 1;
        }
        for i in 0..2 {
            lanes[i].prev = lanes[i].cur;
            lanes[i].cur = next[i];
            let k = lanes[i].maybe_rescale();
            if k != 0 {
                // keep the running product reference in the current frame
                prod_max *= f64::exp2(-(k as f64));
            }
            terminals[i] = ((lanes[i].prev, lanes[i].cur), lanes[i].scale);
        }
    }

    let total_scale = terminals[0].1 + terminals[1].1;
    let w_term = wronskian(terminals[0].0, terminals[1].0);
    let wronskian_check = if total_scale == 0 {
        w_term
    } else if w_term == 0.0 {
        0.0
    } else {
        w_term.signum() * f64::exp2(w_term.abs().log2() + total_scale as f64)
    };

    let mk_trace = |i: usize, init: (f64, f64), rec: Recorded| SolutionTrace {
        spec: spec.clone(),
        energy,
        init,
        direction: Direction::Right,
        checkpoints: checkpoints.to_vec(),
        norms: rec.norms,
        log2_norms: rec.log2_norms,
        windows: rec.windows,
        window_scales: rec.scales,
        terminal_window: terminals[i].0,
        terminal_scale: terminals[i].1,
        terminal_site: n_steps + 1,
    };
    let [rec1, rec2] = recorded;
    Ok(CanonicalPair {
        phi,
        u1: mk_trace(0, init1, rec1),
        u2: mk_trace(1, init2, rec2),
        wronskian_scaled: w_scaled,
        wronskian_expected: w_expected,
        wronskian_ref: w_ref,
        wronskian_check,
    })
}

/// Raw solution values u(0..=n_max) without rescaling; errors out once the
/// magnitude grows past 1e140, which keeps every downstream sum of squares
/// representable. Exponential-growth energies belong to [`propagate`], whose
/// rescaling handles them.
pub fn solution_values(
    spec: &PotentialSpec,
    energy: f64,
    init: (f64, f64),
    n_max: usize,
) -> Result<Vec<f64>, PropagateError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(init.0);
    if n_max >= 1 {
        out.push(init.1);
    }
    for n in 1..n_max as i64 {
        let v = spec.value(n)?;
        let next = step(out[(n - 1) as usize], out[n as usize], energy, v);
        if !next.is_finite() || next.abs() > 1e140 {
            return Err(PropagateError::NumericOverflow { site: n + 1 });
        }
        out.push(next);
    }
    Ok(out)
}

/// Truncated norms of a dense half-line solution (values[n] = u(n)) at each
/// checkpoint; requires values up to index ⌊L_max⌋ + 1.
pub fn truncated_norms(values: &[f64], checkpoints: &[f64]) -> Result<Vec<f64>, PropagateError> {
    if checkpoints.is_empty() {
        return Err(PropagateError::InvalidInput("empty checkpoint schedule".into()));
    }
    let need = checkpoints.last().unwrap().floor() as usize + 1;
    if need >= values.len() {
        return Err(PropagateError::InvalidInput(format!(
            "need {} values for the last checkpoint, have {}",
            need + 1,
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = Neumaier::default();
    let mut n = 0usize;
    for &l in checkpoints {
        let fl = l.floor() as usize;
        while n < fl {
            n += 1;
            acc.add(values[n] * values[n]);
        }
        let frac = l - l.floor();
        out.push((acc.sum() + frac * values[fl + 1] * values[fl + 1]).max(0.0).sqrt());
    }
    Ok(out)
}
