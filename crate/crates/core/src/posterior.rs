//! Conjugate posteriors over an arm's mean reward.
//!
//! The Gaussian family is the single-parameter (unit-variance likelihood)
//! model: after `k` plays with reward sum `s` the posterior is
//! `N(s / (k + 1), 1 / (k + 1))`. Note the `k + 1` denominator in the
//! empirical mean; it is the prior pseudo-observation at zero, not a typo.
//!
//! The Beta family is the usual Beta–Bernoulli model starting from the
//! uniform prior `Beta(1, 1)`.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Which conjugate family a policy keeps per arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorFamily {
    Gaussian,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussianArmState {
    reward_sum: f64,
    plays: u64,
}

impl GaussianArmState {
    pub fn new() -> Self {
        Self::default()
    }

    /// State after `plays` observations summing to `reward_sum`.
    pub fn from_parts(reward_sum: f64, plays: u64) -> Self {
        Self { reward_sum, plays }
    }

    /// State whose empirical mean is `mean` after `plays` observations.
    pub fn with_mean(mean: f64, plays: u64) -> Self {
        Self {
            reward_sum: mean * (plays as f64 + 1.0),
            plays,
        }
    }

    pub fn reward_sum(&self) -> f64 {
        self.reward_sum
    }

    pub fn plays(&self) -> u64 {
        self.plays
    }

    /// `reward_sum / (plays + 1)`; zero before the first observation.
    pub fn empirical_mean(&self) -> f64 {
        self.reward_sum / (self.plays as f64 + 1.0)
    }

    pub fn variance(&self) -> f64 {
        1.0 / (self.plays as f64 + 1.0)
    }

    pub fn update(self, reward: f64) -> Self {
        Self {
            reward_sum: self.reward_sum + reward,
            plays: self.plays + 1,
        }
    }

    /// One draw from the posterior. Consumes exactly one standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.empirical_mean() + z * self.variance().sqrt()
    }

    /// One draw from `N(mean, variance / gamma)`.
    ///
    /// For `gamma = N` this has the same law as averaging `N` independent
    /// posterior draws, and for `gamma = 1/N` the same law as the
    /// variance-inflating combiner over `N` draws.
    pub fn scaled_sample<R: Rng + ?Sized>(&self, gamma: f64, rng: &mut R) -> Result<f64> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "variance scaling factor must be positive and finite, got {gamma}"
            )));
        }
        let z: f64 = StandardNormal.sample(rng);
        Ok(self.empirical_mean() + z * (self.variance() / gamma).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArmState {
    alpha: f64,
    beta: f64,
}

impl Default for BetaArmState {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl BetaArmState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 1.0 && beta >= 1.0) {
            return Err(Error::domain(format!(
                "beta posterior parameters must be >= 1, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of observed rewards.
    pub fn plays(&self) -> u64 {
        (self.alpha + self.beta - 2.0).round() as u64
    }

    pub fn successes(&self) -> f64 {
        self.alpha - 1.0
    }

    pub fn posterior_mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Same convention as the Gaussian family: successes over `plays + 1`.
    pub fn empirical_mean(&self) -> f64 {
        self.successes() / (self.plays() as f64 + 1.0)
    }

    pub fn update(self, reward: f64) -> Result<Self> {
        if reward == 1.0 {
            Ok(Self {
                alpha: self.alpha + 1.0,
                ..self
            })
        } else if reward == 0.0 {
            Ok(Self {
                beta: self.beta + 1.0,
                ..self
            })
        } else {
            Err(Error::domain(format!(
                "beta posterior accepts rewards in {{0, 1}} only, got {reward}"
            )))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // alpha, beta >= 1 by construction
        Beta::new(self.alpha, self.beta)
            .expect("valid beta parameters")
            .sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmPosterior {
    Gaussian(GaussianArmState),
    Beta(BetaArmState),
}

impl ArmPosterior {
    /// Fresh prior of the given family.
    pub fn prior(family: PosteriorFamily) -> Self {
        match family {
            PosteriorFamily::Gaussian => ArmPosterior::Gaussian(GaussianArmState::new()),
            PosteriorFamily::Beta => ArmPosterior::Beta(BetaArmState::new()),
        }
    }

    pub fn family(&self) -> PosteriorFamily {
        match self {
            ArmPosterior::Gaussian(_) => PosteriorFamily::Gaussian,
            ArmPosterior::Beta(_) => PosteriorFamily::Beta,
        }
    }

    pub fn plays(&self) -> u64 {
        match self {
            ArmPosterior::Gaussian(g) => g.plays(),
            ArmPosterior::Beta(b) => b.plays(),
        }
    }

    pub fn empirical_mean(&self) -> f64 {
        match self {
            ArmPosterior::Gaussian(g) => g.empirical_mean(),
            ArmPosterior::Beta(b) => b.empirical_mean(),
        }
    }

    pub fn update(self, reward: f64) -> Result<Self> {
        match self {
            ArmPosterior::Gaussian(g) => Ok(ArmPosterior::Gaussian(g.update(reward))),
            ArmPosterior::Beta(b) => b.update(reward).map(ArmPosterior::Beta),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArmPosterior::Gaussian(g) => g.sample(rng),
            ArmPosterior::Beta(b) => b.sample(rng),
        }
    }
}
