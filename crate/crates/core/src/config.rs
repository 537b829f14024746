//! TOML experiment configuration.
//!
//! ```toml
//! [experiment]
//! horizon = 10000              # periods per run
//! runs = 200
//! seed = 1
//! instance_mode = "resampled"  # or "fixed": one instance shared by all runs
//! posterior = "gaussian"       # default family for policies: gaussian | beta
//! metrics = ["cumulative_regret", "per_period_regret", "final_regret_distribution"]
//! record_every = 1             # optional trace stride
//!
//! [env]
//! family = "random_uniform"    # random_uniform | random_normal | linear_gaussian | fixed | tabular
//! arms = 20                    # random_* and linear_gaussian
//! # means = [0.5, 0.25]        # fixed
//! # table = "arms.csv"         # tabular, relative to the config file
//! noise = "gaussian_unit"      # gaussian_unit | gaussian_var2 | bernoulli | none
//!
//! [bai]                        # used by the `bai` subcommand
//! budgets = [100, 500, 2000]
//!
//! [[policy]]
//! kind = "ts"                  # ts | tsvha | greedy | sts
//!
//! [[policy]]
//! kind = "tsvha"
//! combiner = "c1"              # identity | c1 | c2 | c3
//! agents = 3                   # total agents including the primary one
//! # c3_agent_cap = 10000
//! # posterior = "beta"         # overrides [experiment].posterior
//!
//! [[policy]]
//! kind = "sts"
//! epsilon = 0.05
//!
//! [output]
//! dir = "results"              # optional; --out overrides
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::combiner::{CombinerKind, CombinerSpec, DEFAULT_C3_AGENT_CAP};
use crate::envs::{EnvConfig, EnvFamily, Noise};
use crate::error::{Error, Result};
use crate::harness::{ExperimentSpec, InstanceMode, Metric};
use crate::ingest;
use crate::policy::{PolicyKind, PolicySpec};
use crate::posterior::PosteriorFamily;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub env: EnvSection,
    #[serde(default, rename = "policy")]
    pub policies: Vec<PolicySection>,
    #[serde(default)]
    pub bai: Option<BaiSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    #[serde(default = "default_instance_mode")]
    pub instance_mode: InstanceMode,
    #[serde(default = "default_family")]
    pub posterior: PosteriorFamily,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
}

fn default_instance_mode() -> InstanceMode {
    InstanceMode::ResampledPerRun
}

fn default_family() -> PosteriorFamily {
    PosteriorFamily::Gaussian
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::CumulativeRegret]
}

fn default_record_every() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    RandomUniform,
    RandomNormal,
    LinearGaussian,
    Fixed,
    Tabular,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub family: FamilyName,
    pub noise: Noise,
    pub arms: Option<usize>,
    pub means: Option<Vec<f64>>,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Ts,
    Tsvha,
    Greedy,
    Sts,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: PolicyName,
    pub combiner: Option<CombinerKind>,
    pub agents: Option<usize>,
    pub c3_agent_cap: Option<usize>,
    pub epsilon: Option<f64>,
    pub posterior: Option<PosteriorFamily>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaiSection {
    pub budgets: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Builds the experiment. Relative table paths resolve against `base_dir`.
    pub fn to_spec(&self, base_dir: &Path) -> Result<ExperimentSpec> {
        let mut problems = Vec::new();
        let env = match self.env_config(base_dir) {
            Ok(env) => Some(env),
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        };
        let mut policies = Vec::new();
        for (i, p) in self.policies.iter().enumerate() {
            match p.to_spec(self.experiment.posterior) {
                Ok(spec) => policies.push(spec),
                Err(e) => problems.push(format!("policy #{}: {e}", i + 1)),
            }
        }
        if let Some(bai) = &self.bai {
            if bai.budgets.is_empty() || bai.budgets.contains(&0) {
                problems.push("bai.budgets must be a nonempty list of positive integers".into());
            }
        }
        let Some(env) = env.filter(|_| problems.is_empty()) else {
            return Err(Error::config(problems.join("; ")));
        };
        let e = &self.experiment;
        let spec = ExperimentSpec {
            env,
            policies,
            horizon: e.horizon,
            runs: e.runs,
            base_seed: e.seed,
            instance_mode: e.instance_mode,
            metrics: e.metrics.iter().copied().collect(),
            record_every: e.record_every,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn env_config(&self, base_dir: &Path) -> Result<EnvConfig> {
        let env = &self.env;
        let require_arms = || {
            env.arms
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::config("env.arms must be a positive integer for this family"))
        };
        let reject = |field: &str, present: bool| {
            if present {
                Err(Error::config(format!("env.{field} is not used by this family")))
            } else {
                Ok(())
            }
        };
        let family = match env.family {
            FamilyName::RandomUniform | FamilyName::RandomNormal | FamilyName::LinearGaussian => {
                reject("means", env.means.is_some())?;
                reject("table", env.table.is_some())?;
                let arms = require_arms()?;
                match env.family {
                    FamilyName::RandomUniform => EnvFamily::RandomUniform { arms },
                    FamilyName::RandomNormal => EnvFamily::RandomNormal { arms },
                    _ => EnvFamily::LinearGaussian { arms },
                }
            }
            FamilyName::Fixed => {
                reject("table", env.table.is_some())?;
                let means = env
                    .means
                    .clone()
                    .ok_or_else(|| Error::config("env.means is required for the fixed family"))?;
                if env.arms.is_some_and(|k| k != means.len()) {
                    return Err(Error::config("env.arms disagrees with the length of env.means"));
                }
                EnvFamily::Fixed { means }
            }
            FamilyName::Tabular => {
                reject("means", env.means.is_some())?;
                let table = env
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::config("env.table is required for the tabular family"))?;
                let path = base_dir.join(table);
                let loaded = ingest::load_arm_means_csv(&path).map_err(|e| match e {
                    Error::Io { path, source } => {
                        Error::config(format!("cannot read table {}: {source}", path.display()))
                    }
                    other => Error::config(other.to_string()),
                })?;
                EnvFamily::Tabular {
                    means: loaded.means(),
                }
            }
        };
        let cfg = EnvConfig::new(family, env.noise);
        cfg.validate().map_err(|e| Error::config(format!("env: {e}")))?;
        Ok(cfg)
    }
}

impl PolicySection {
    fn to_spec(&self, default_family: PosteriorFamily) -> Result<PolicySpec> {
        let family = self.posterior.unwrap_or(default_family);
        let unused = |field: &str, present: bool| {
            if present {
                Err(Error::config(format!("{field} is not used by {:?} policies", self.kind)))
            } else {
                Ok(())
            }
        };
        if self.kind != PolicyName::Tsvha {
            unused("combiner", self.combiner.is_some())?;
            unused("agents", self.agents.is_some())?;
            unused("c3_agent_cap", self.c3_agent_cap.is_some())?;
        }
        if self.kind != PolicyName::Sts {
            unused("epsilon", self.epsilon.is_some())?;
        }
        let kind = match self.kind {
            PolicyName::Ts => PolicyKind::Ts,
            PolicyName::Greedy => PolicyKind::Greedy,
            PolicyName::Sts => PolicyKind::Sts {
                epsilon: self
                    .epsilon
                    .ok_or_else(|| Error::config("sts policies need epsilon"))?,
            },
            PolicyName::Tsvha => {
                let kind = self
                    .combiner
                    .ok_or_else(|| Error::config("tsvha policies need a combiner"))?;
                let agents = match (kind, self.agents) {
                    (CombinerKind::C3, Some(_)) => {
                        return Err(Error::config("c3 chooses its agent count; drop agents"))
                    }
                    (CombinerKind::C3, None) | (CombinerKind::Identity, None) => 1,
                    (_, Some(n)) => n,
                    (_, None) => return Err(Error::config("c1/c2 combiners need agents")),
                };
                if kind != CombinerKind::C3 && self.c3_agent_cap.is_some() {
                    return Err(Error::config("c3_agent_cap only applies to the c3 combiner"));
                }
                PolicyKind::TsVha(CombinerSpec {
                    kind,
                    agents,
                    c3_agent_cap: self.c3_agent_cap.unwrap_or(DEFAULT_C3_AGENT_CAP),
                })
            }
        };
        let spec = PolicySpec::new(kind, family);
        spec.validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(spec)
    }
}
