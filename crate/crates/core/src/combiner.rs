//! Combiners folding `N` posterior draws per arm into one decision statistic.

use rand::Rng;

use crate::error::{Error, Result};
use crate::posterior::GaussianArmState;

/// Default upper bound on the number of agents the dynamic combiner may use.
pub const DEFAULT_C3_AGENT_CAP: usize = 10_000;

/// Weights `c_1..c_N` of a linear combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn agents(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    /// `sum_n c_n * samples_n`.
    pub fn combine(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.0.len() {
            return Err(Error::domain(format!(
                "combiner has {} coefficients but got {} samples",
                self.0.len(),
                samples.len()
            )));
        }
        Ok(self.0.iter().zip(samples).map(|(c, x)| c * x).sum())
    }
}

/// Equal weights `1/N`: variance of the combination shrinks by `1/N`.
pub fn c1_coefficients(agents: usize) -> Result<CoefficientVector> {
    if agents == 0 {
        return Err(Error::domain("averaging combiner needs at least one agent"));
    }
    Ok(CoefficientVector(vec![1.0 / agents as f64; agents]))
}

/// Mean-preserving weights with `sum c_n^2 = N`, so the combination of
/// i.i.d. draws has `N` times the variance of a single draw.
///
/// Weights are `1/N` plus an alternating perturbation `+s, -s, +s, ...`.
/// With even `N` every weight is perturbed and `s = sqrt(N^2 - 1) / N`; with
/// odd `N` the last weight stays at `1/N` and `s = sqrt((N + 1) / N)`.
pub fn c2_coefficients(agents: usize) -> Result<CoefficientVector> {
    if agents < 2 {
        return Err(Error::domain(format!(
            "variance-inflating combiner needs at least two agents, got {agents}"
        )));
    }
    let n = agents as f64;
    let base = 1.0 / n;
    let (spread, perturbed) = if agents.is_multiple_of(2) {
        ((n * n - 1.0).sqrt() / n, agents)
    } else {
        (((n + 1.0) / n).sqrt(), agents - 1)
    };
    let coeffs = (0..agents)
        .map(|i| {
            if i >= perturbed {
                base
            } else if i % 2 == 0 {
                base + spread
            } else {
                base - spread
            }
        })
        .collect();
    Ok(CoefficientVector(coeffs))
}

pub fn linear_combine(coeffs: &CoefficientVector, samples: &[f64]) -> Result<f64> {
    coeffs.combine(samples)
}

/// Largest minus second-largest value. Needs at least two entries.
pub fn top_two_gap(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::domain(
            "the gap between the two best arms needs at least two arms",
        ));
    }
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &v in values {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    Ok(first - second)
}

/// Number of agents the dynamic combiner uses at period `t` (1-based):
/// `min(cap, floor(max(1, t * gap)))` where `gap` separates the two best
/// empirical means.
pub fn c3_agent_count(t: u64, empirical_means: &[f64], cap: usize) -> Result<usize> {
    if cap == 0 {
        return Err(Error::domain("agent cap must be positive"));
    }
    let gap = top_two_gap(empirical_means)?;
    let raw = (t as f64 * gap).max(1.0).floor();
    Ok(if raw >= cap as f64 { cap } else { raw as usize })
}

/// `max(mean(samples), min(empirical_means))`.
pub fn c3_combine(samples: &[f64], empirical_means: &[f64]) -> Result<f64> {
    if samples.is_empty() || empirical_means.is_empty() {
        return Err(Error::domain("dynamic combiner needs samples and means"));
    }
    let avg = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(avg.max(min_of(empirical_means)))
}

pub(crate) fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// One draw from `N(mean, 1 / (gamma * (k + 1)))` for a Gaussian arm.
pub fn scaled_gaussian_sample<R: Rng + ?Sized>(
    state: &GaussianArmState,
    gamma: f64,
    rng: &mut R,
) -> Result<f64> {
    state.scaled_sample(gamma, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerKind {
    Identity,
    C1,
    C2,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CombinerSpec {
    pub kind: CombinerKind,
    /// Total agents including the primary one. Ignored by `C3`.
    pub agents: usize,
    pub c3_agent_cap: usize,
}

impl CombinerSpec {
    pub fn identity() -> Self {
        Self {
            kind: CombinerKind::Identity,
            agents: 1,
            c3_agent_cap: DEFAULT_C3_AGENT_CAP,
        }
    }

    pub fn c1(agents: usize) -> Self {
        Self {
            kind: CombinerKind::C1,
            agents,
            c3_agent_cap: DEFAULT_C3_AGENT_CAP,
        }
    }

    pub fn c2(agents: usize) -> Self {
        Self {
            kind: CombinerKind::C2,
            agents,
            c3_agent_cap: DEFAULT_C3_AGENT_CAP,
        }
    }

    pub fn c3() -> Self {
        Self {
            kind: CombinerKind::C3,
            agents: 1,
            c3_agent_cap: DEFAULT_C3_AGENT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            CombinerKind::Identity if self.agents != 1 => Err(Error::domain(format!(
                "identity combiner requires exactly one agent, got {}",
                self.agents
            ))),
            CombinerKind::C1 if self.agents == 0 => {
                Err(Error::domain("averaging combiner needs at least one agent"))
            }
            CombinerKind::C2 if self.agents < 2 => Err(Error::domain(format!(
                "variance-inflating combiner needs at least two agents, got {}",
                self.agents
            ))),
            CombinerKind::C3 if self.c3_agent_cap == 0 => {
                Err(Error::domain("agent cap must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Coefficients for the linear kinds; `None` for `C3`.
    pub fn coefficients(&self) -> Result<Option<CoefficientVector>> {
        self.validate()?;
        match self.kind {
            CombinerKind::Identity => Ok(Some(CoefficientVector(vec![1.0]))),
            CombinerKind::C1 => c1_coefficients(self.agents).map(Some),
            CombinerKind::C2 => c2_coefficients(self.agents).map(Some),
            CombinerKind::C3 => Ok(None),
        }
    }

    /// Variance multiplier `gamma` of the equivalent single Gaussian draw.
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            CombinerKind::Identity => Some(1.0),
            CombinerKind::C1 => Some(self.agents as f64),
            CombinerKind::C2 => Some(1.0 / self.agents as f64),
            CombinerKind::C3 => None,
        }
    }
}
