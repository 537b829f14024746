//! Reward-generating bandit environments.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// Mean plus a standard normal draw.
    GaussianUnit,
    /// Mean plus an `N(0, 2)` draw.
    GaussianVar2,
    /// `{0, 1}` with success probability equal to the mean.
    Bernoulli,
    /// The mean itself.
    None,
}

/// A fixed vector of arm means with a reward noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    noise: Noise,
    best: f64,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, noise: Noise) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::domain("a bandit needs at least one arm"));
        }
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::domain(format!("arm mean {m} is not finite")));
        }
        if noise == Noise::Bernoulli {
            if let Some((i, m)) = means.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m)) {
                return Err(Error::domain(format!(
                    "bernoulli arm {i} has mean {m} outside [0, 1]"
                )));
            }
        }
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { means, noise, best })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn optimal_mean(&self) -> f64 {
        self.best
    }

    /// Lowest index among the arms attaining the optimal mean.
    pub fn best_arm(&self) -> usize {
        self.means.iter().position(|&m| m == self.best).unwrap_or(0)
    }

    /// `mu* - mu_arm`, nonnegative.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best - self.means[arm]
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.means.iter().map(|m| self.best - m).collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        let mean = *self.means.get(arm).ok_or_else(|| {
            Error::domain(format!("arm index {arm} out of range for {} arms", self.arms()))
        })?;
        Ok(match self.noise {
            Noise::None => mean,
            Noise::GaussianUnit => {
                let z: f64 = StandardNormal.sample(rng);
                mean + z
            }
            Noise::GaussianVar2 => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std::f64::consts::SQRT_2 * z
            }
            Noise::Bernoulli => {
                // mean in [0, 1] is checked at construction
                let hit = Bernoulli::new(mean).expect("mean in [0, 1]").sample(rng);
                if hit {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvFamily {
    /// Means i.i.d. `U[0, 1]`.
    RandomUniform { arms: usize },
    /// Means i.i.d. standard normal.
    RandomNormal { arms: usize },
    /// Means `L * theta` with `theta ~ N(0, I)` and unit-norm random rows in `L`
    /// (dimension equals the number of arms).
    LinearGaussian { arms: usize },
    /// Means given verbatim.
    Fixed { means: Vec<f64> },
    /// Means loaded from an arm-means table.
    Tabular { means: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub family: EnvFamily,
    pub noise: Noise,
}

impl EnvConfig {
    pub fn new(family: EnvFamily, noise: Noise) -> Self {
        Self { family, noise }
    }

    pub fn arms(&self) -> usize {
        match &self.family {
            EnvFamily::RandomUniform { arms }
            | EnvFamily::RandomNormal { arms }
            | EnvFamily::LinearGaussian { arms } => *arms,
            EnvFamily::Fixed { means } | EnvFamily::Tabular { means } => means.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms() == 0 {
            return Err(Error::domain("a bandit needs at least one arm"));
        }
        match (&self.family, self.noise) {
            (EnvFamily::RandomNormal { .. } | EnvFamily::LinearGaussian { .. }, Noise::Bernoulli) => {
                Err(Error::domain(
                    "bernoulli rewards need means in [0, 1]; this family draws unbounded means",
                ))
            }
            (EnvFamily::Fixed { means } | EnvFamily::Tabular { means }, noise) => {
                BanditInstance::new(means.clone(), noise).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// True when every instance is the same regardless of the stream.
    pub fn is_deterministic(&self) -> bool {
        matches!(self.family, EnvFamily::Fixed { .. } | EnvFamily::Tabular { .. })
    }
}

pub fn make_instance<R: Rng + ?Sized>(config: &EnvConfig, rng: &mut R) -> Result<BanditInstance> {
    config.validate()?;
    let means = match &config.family {
        EnvFamily::RandomUniform { arms } => (0..*arms).map(|_| rng.random::<f64>()).collect(),
        EnvFamily::RandomNormal { arms } => (0..*arms).map(|_| StandardNormal.sample(rng)).collect(),
        EnvFamily::LinearGaussian { arms } => linear_gaussian_design(*arms, rng).means,
        EnvFamily::Fixed { means } | EnvFamily::Tabular { means } => means.clone(),
    };
    BanditInstance::new(means, config.noise)
}

/// The pieces of a linear-Gaussian instance.
#[derive(Debug, Clone)]
pub struct LinearDesign {
    /// Row-major `arms x arms`, each row of unit Euclidean norm.
    pub rows: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub means: Vec<f64>,
}

/// Draws `theta ~ N(0, I)` then each row of `L` uniformly from the unit
/// sphere (a normalized standard normal vector) and returns `L * theta`.
pub fn linear_gaussian_design<R: Rng + ?Sized>(arms: usize, rng: &mut R) -> LinearDesign {
    let theta: Vec<f64> = (0..arms).map(|_| StandardNormal.sample(rng)).collect();
    let mut rows = Vec::with_capacity(arms);
    for _ in 0..arms {
        let mut row: Vec<f64> = (0..arms).map(|_| StandardNormal.sample(rng)).collect();
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= norm);
        rows.push(row);
    }
    let means = rows
        .iter()
        .map(|row| row.iter().zip(&theta).map(|(a, b)| a * b).sum())
        .collect();
    LinearDesign { rows, theta, means }
}
