//! Closed-form and numeric quantities from the regret analysis.
//!
//! The finite-time bound is evaluated for Gaussian-prior TS-VHA with a
//! variance scaling factor `gamma` (`gamma = N` for the averaging combiner,
//! `1/N` for the variance-inflating one, `1` for plain Thompson sampling).
//! The analysis assumes rewards supported on `[0, 1]`, so all gaps are
//! restricted to `(0, 1]`, while the policy itself uses Gaussian
//! likelihoods. Simulations checked against the bound should therefore use
//! bounded (e.g. Bernoulli) rewards.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Standard normal upper tail `Q(z) = P(Z > z)`.
pub fn normal_q(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Decision-statistic model used by [`selection_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionVariant {
    Ts,
    /// Averaging combiner with `N` agents.
    C1(usize),
    /// Variance-inflating combiner with `N` agents.
    C2(usize),
}

impl SelectionVariant {
    pub fn agents(&self) -> usize {
        match *self {
            SelectionVariant::Ts => 1,
            SelectionVariant::C1(n) | SelectionVariant::C2(n) => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SelectionVariant::Ts => "ts",
            SelectionVariant::C1(_) => "c1",
            SelectionVariant::C2(_) => "c2",
        }
    }
}

/// Probability that a two-armed Gaussian-posterior policy plays arm 1, given
/// empirical means `mu1`, `mu2` and play counts `k1`, `k2`.
pub fn selection_probability(
    mu1: f64,
    mu2: f64,
    k1: u64,
    k2: u64,
    variant: SelectionVariant,
) -> Result<f64> {
    let n = variant.agents();
    if n == 0 {
        return Err(Error::domain("number of agents must be at least 1"));
    }
    let spread = (1.0 / (k1 as f64 + 1.0) + 1.0 / (k2 as f64 + 1.0)).sqrt();
    let z = (mu2 - mu1) / spread;
    let z = match variant {
        SelectionVariant::Ts => z,
        SelectionVariant::C1(_) => z * (n as f64).sqrt(),
        SelectionVariant::C2(_) => z / (n as f64).sqrt(),
    };
    Ok(normal_q(z))
}

const ZETA_TERMS: u64 = 1000;

/// Riemann zeta for real `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    riemann_zeta_with_terms(s, ZETA_TERMS)
}

/// `sum_{n < cutoff} n^-s` plus the Euler–Maclaurin tail from `cutoff`
/// (integral, half term and three Bernoulli corrections).
pub fn riemann_zeta_with_terms(s: f64, cutoff: u64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::domain(format!("zeta needs a finite argument > 1, got {s}")));
    }
    if cutoff < 10 {
        return Err(Error::domain("zeta cutoff must be at least 10"));
    }
    // Sum small terms first.
    let head: f64 = (1..cutoff).rev().map(|n| (n as f64).powf(-s)).sum();
    let n = cutoff as f64;
    let ns = n.powf(-s);
    let tail = n * ns / (s - 1.0) + 0.5 * ns + s * ns / n / 12.0
        - s * (s + 1.0) * (s + 2.0) * ns / n.powi(3) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ns / n.powi(5) / 30240.0;
    Ok(head + tail)
}

/// Upper limit on predicate evaluations in [`h_beta`].
pub const H_BETA_MAX_ITERATIONS: u64 = 1_000_000_000;
/// Consecutive integers past a candidate that must also satisfy the predicate.
pub const H_BETA_WINDOW: u64 = 1000;

/// `exp(-r^(1 - beta/2) / sqrt(2 beta pi ln r)) <= 1 / r^2`.
pub fn h_beta_condition(r: u64, beta: f64) -> bool {
    let rf = r as f64;
    let lhs = (-rf.powf(1.0 - beta / 2.0) / (2.0 * beta * PI * rf.ln()).sqrt()).exp();
    lhs <= 1.0 / (rf * rf)
}

/// Smallest integer `r >= 2` at which [`h_beta_condition`] holds and keeps
/// holding over the next [`H_BETA_WINDOW`] integers.
///
/// In `u = ln r` the log of the condition is `a*u - 1.5*ln u - const >= 0`
/// with `a = 1 - beta/2`: convex in `u` and false at `r = 2` for every
/// `beta` in `[1, 2)`, so the satisfying set is a ray `[h, inf)`. The search
/// doubles until the condition holds, bisects down to the boundary, and
/// resumes from any window failure.
pub fn h_beta(beta: f64) -> Result<u64> {
    if !(1.0..2.0).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [1, 2), got {beta}")));
    }
    let mut evals = 0u64;
    let mut check = |r: u64| -> Result<bool> {
        evals += 1;
        if evals > H_BETA_MAX_ITERATIONS {
            return Err(Error::Resource(format!(
                "h(beta) search exceeded {H_BETA_MAX_ITERATIONS} evaluations at beta = {beta}"
            )));
        }
        Ok(h_beta_condition(r, beta))
    };
    // Largest integer whose f64 conversion is exact.
    const LIMIT: u64 = 1 << 53;
    let mut lo = 1u64; // condition known false (or below range) at lo
    loop {
        let mut step = 1u64;
        let mut hi = lo + 1;
        while !check(hi)? {
            lo = hi;
            step = step.saturating_mul(2);
            hi = lo.checked_add(step).filter(|&h| h <= LIMIT).ok_or_else(|| {
                Error::Resource(format!(
                    "h(beta) exceeds 2^53 at beta = {beta}; beta is too close to 2"
                ))
            })?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if check(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut failed = None;
        for r in hi + 1..=hi + H_BETA_WINDOW {
            if !check(r)? {
                failed = Some(r);
            }
        }
        match failed {
            None => return Ok(hi.max(2)),
            Some(r) => lo = r,
        }
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_gap(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("gap must lie in (0, 1], got {delta}")))
    }
}

/// Threshold `exp(16 (1 - delta/3)^2 / (epsilon^2 gamma))` beyond which
/// `exp(4 sqrt(ln r / gamma) (1 - delta/3)) <= r^epsilon`.
pub fn g_epsilon(epsilon: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_positive("gamma", gamma)?;
    check_gap(delta)?;
    let a = 1.0 - delta / 3.0;
    Ok((16.0 * a * a / (epsilon * epsilon * gamma)).exp())
}

/// `exp(4 sqrt(ln r / gamma) (1 - delta/3)) <= r^epsilon`.
pub fn g_epsilon_condition(r: f64, epsilon: f64, gamma: f64, delta: f64) -> bool {
    let lhs = 4.0 * (r.ln() / gamma).sqrt() * (1.0 - delta / 3.0);
    lhs.exp() <= r.powf(epsilon)
}

/// `c' = exp(4 delta / 3) / (exp(2 delta^2 / 9) - 1)`.
pub fn c_prime(delta: f64) -> Result<f64> {
    check_gap(delta)?;
    Ok((4.0 * delta / 3.0).exp() / (2.0 * delta * delta / 9.0).exp_m1())
}

/// Inputs of the finite-time regret bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub gamma: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Gaps of the suboptimal arms, each in `(0, 1]`.
    pub gaps: Vec<f64>,
    pub horizon: u64,
}

impl BoundParams {
    pub fn arms(&self) -> usize {
        self.gaps.len() + 1
    }

    /// `2 beta / gamma - epsilon`.
    pub fn zeta_exponent(&self) -> f64 {
        2.0 * self.beta / self.gamma - self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_positive("epsilon", self.epsilon)?;
        if !(1.0..2.0).contains(&self.beta) {
            return Err(Error::domain(format!("beta must lie in [1, 2), got {}", self.beta)));
        }
        for &d in &self.gaps {
            check_gap(d)?;
        }
        if self.horizon < self.arms() as u64 {
            return Err(Error::domain(format!(
                "horizon T = {} must be at least the number of arms K = {}",
                self.horizon,
                self.arms()
            )));
        }
        let e = self.zeta_exponent();
        if self.gamma < 4.0 && !(e > 1.0) {
            return Err(Error::domain(format!(
                "constraint 2*beta/gamma - epsilon > 1 (required for gamma < 4) violated: \
                 2*{}/{} - {} = {e}",
                self.beta, self.gamma, self.epsilon
            )));
        }
        if self.gamma >= 4.0 && !(e > 0.0) {
            return Err(Error::domain(format!(
                "constraint 2*beta/gamma - epsilon > 0 (required for gamma >= 4) violated: \
                 2*{}/{} - {} = {e}",
                self.beta, self.gamma, self.epsilon
            )));
        }
        Ok(())
    }
}

/// Upper bound on expected cumulative regret after `horizon` periods.
///
/// Per suboptimal arm with gap `d`, `x - y = d/3` and
/// `c1 = 2 (H + 1) d / (gamma (d/3)^2)` with `H = 4 (h(beta) + zeta(2))`.
/// For `gamma < 4` the arm contributes
/// `c1 ln(T d^2) + (c' (g + zeta(2 beta/gamma - eps)) + 1) d + 9.5 / d`;
/// for `gamma >= 4` the zeta term becomes the partial p-series bound
/// `(T^p - 1) / p + g + 1` with `p = 1 + eps - 2 beta / gamma`.
/// `ln(T d^2)` is clamped at zero.
pub fn theorem1_bound(params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if params.gaps.is_empty() {
        return Ok(0.0);
    }
    let h = h_beta(params.beta)? as f64;
    let big_h = 4.0 * (h + riemann_zeta(2.0)?);
    let t = params.horizon as f64;
    let zeta_term = if params.gamma < 4.0 {
        Some(riemann_zeta(params.zeta_exponent())?)
    } else {
        None
    };
    let mut total = 0.0;
    for &d in &params.gaps {
        let spacing = d / 3.0;
        let c1 = 2.0 * (big_h + 1.0) * d / (params.gamma * spacing * spacing);
        let log_term = (t * d * d).ln().max(0.0);
        let cp = c_prime(d)?;
        let g = g_epsilon(params.epsilon, params.gamma, d)?;
        let middle = match zeta_term {
            Some(z) => (cp * (g + z) + 1.0) * d,
            None => {
                let p = 1.0 + params.epsilon - 2.0 * params.beta / params.gamma;
                cp * ((t.powf(p) - 1.0) / p + g + 1.0) * d
            }
        };
        total += c1 * log_term + middle + 9.5 / d;
    }
    Ok(total)
}

/// Lower bound `x / (sqrt(2 pi) (x^2 + 1)) exp(-x^2 / 2)` on `P(Z > m + x sigma)`.
pub fn gaussian_tail_lower_bound(x: f64) -> f64 {
    x / ((2.0 * PI).sqrt() * (x * x + 1.0)) * (-x * x / 2.0).exp()
}

/// Bounds `(exp(-7z^2/2) / (4 sqrt(pi)), exp(-z^2/2) / 2)` on
/// `P(|Z - m| > z sigma)`.
pub fn two_sided_tail_bounds(z: f64) -> (f64, f64) {
    (
        (-3.5 * z * z).exp() / (4.0 * PI.sqrt()),
        0.5 * (-z * z / 2.0).exp(),
    )
}

/// `1 + ((n + 1)^(1 - p) - 1) / (1 - p)`, an upper bound on `sum_{i<=n} i^-p`
/// for `0 < p < 1`.
pub fn p_series_upper_bound(n: u64, p: f64) -> f64 {
    1.0 + ((n as f64 + 1.0).powf(1.0 - p) - 1.0) / (1.0 - p)
}
