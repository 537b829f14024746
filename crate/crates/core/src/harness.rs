//! Reproducible Monte Carlo experiment runner.
//!
//! Every run `r` owns the stream `derive_run_rng(seed, r)`. Within a run the
//! instance is drawn first (unless it is shared across runs), then one
//! 256-bit seed per policy is taken from the run stream, in policy order.
//! Each policy plays on its own stream, so a policy's trajectory depends only
//! on `(seed, run, position in the policy list)`. Runs execute in parallel and
//! are reduced sequentially in run order, so results do not depend on the
//! number of workers.

use std::collections::BTreeSet;

use rand::{Rng as _, SeedableRng};
use rayon::prelude::*;

use crate::envs::{make_instance, BanditInstance, EnvConfig};
use crate::error::{Error, Result};
use crate::policy::{Policy, PolicySpec};
use crate::Rng;

/// Stream index reserved for drawing an instance shared by all runs.
pub const SHARED_INSTANCE_STREAM: u64 = u64::MAX;

pub const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Independent stream for run `run_index` under `base_seed`.
pub fn derive_run_rng(base_seed: u64, run_index: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(base_seed);
    rng.set_stream(run_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// A fresh instance per run.
    #[serde(alias = "resampled")]
    ResampledPerRun,
    /// One instance drawn up front and shared by every run.
    #[serde(alias = "fixed")]
    FixedAcrossRuns,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Deserialize, serde::Serialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CumulativeRegret,
    PerPeriodRegret,
    FinalRegretDistribution,
    BaiError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub env: EnvConfig,
    pub policies: Vec<PolicySpec>,
    pub horizon: u64,
    pub runs: u64,
    pub base_seed: u64,
    pub instance_mode: InstanceMode,
    pub metrics: BTreeSet<Metric>,
    /// Trace rows are emitted at multiples of this stride and at the horizon.
    pub record_every: u64,
}

impl ExperimentSpec {
    pub fn new(env: EnvConfig, policies: Vec<PolicySpec>, horizon: u64, runs: u64, seed: u64) -> Self {
        Self {
            env,
            policies,
            horizon,
            runs,
            base_seed: seed,
            instance_mode: InstanceMode::ResampledPerRun,
            metrics: [Metric::CumulativeRegret].into_iter().collect(),
            record_every: 1,
        }
    }

    pub fn with_instance_mode(mut self, mode: InstanceMode) -> Self {
        self.instance_mode = mode;
        self
    }

    pub fn with_metrics(mut self, metrics: impl IntoIterator<Item = Metric>) -> Self {
        self.metrics = metrics.into_iter().collect();
        self
    }

    /// All violations, joined; nothing is simulated unless this passes.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.runs == 0 {
            problems.push("runs must be at least 1".to_string());
        }
        if self.horizon == 0 {
            problems.push("horizon must be at least 1".to_string());
        }
        if self.record_every == 0 {
            problems.push("record_every must be at least 1".to_string());
        }
        if self.policies.is_empty() {
            problems.push("at least one policy is required".to_string());
        }
        if let Err(e) = self.env.validate() {
            problems.push(format!("env: {e}"));
        }
        let mut labels = BTreeSet::new();
        for p in &self.policies {
            if let Err(e) = p.validate() {
                problems.push(format!("policy {}: {e}", p.label()));
            }
            if !labels.insert(p.label()) {
                problems.push(format!("duplicate policy {}", p.label()));
            }
            if p.family == crate::posterior::PosteriorFamily::Beta
                && self.env.noise != crate::envs::Noise::Bernoulli
            {
                problems.push(format!(
                    "policy {}: beta posteriors need bernoulli rewards",
                    p.label()
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(problems.join("; ")))
        }
    }

    fn record_points(&self) -> Vec<u64> {
        let mut pts: Vec<u64> = (1..=self.horizon / self.record_every)
            .map(|i| i * self.record_every)
            .collect();
        if pts.last() != Some(&self.horizon) {
            pts.push(self.horizon);
        }
        pts
    }

    fn shared_instance(&self) -> Result<Option<BanditInstance>> {
        match self.instance_mode {
            InstanceMode::FixedAcrossRuns => {
                let mut rng = derive_run_rng(self.base_seed, SHARED_INSTANCE_STREAM);
                make_instance(&self.env, &mut rng).map(Some)
            }
            InstanceMode::ResampledPerRun => Ok(None),
        }
    }

    /// Instance for `run` together with one stream per policy.
    fn run_setup(&self, run: u64, shared: Option<&BanditInstance>) -> Result<(BanditInstance, Vec<Rng>)> {
        let mut rng = derive_run_rng(self.base_seed, run);
        let instance = match shared {
            Some(inst) => inst.clone(),
            None => make_instance(&self.env, &mut rng)?,
        };
        let streams = self
            .policies
            .iter()
            .map(|_| Rng::from_seed(rng.random()))
            .collect();
        Ok((instance, streams))
    }
}

/// Mean, sample standard deviation and nearest-rank quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    /// At [`QUANTILE_LEVELS`].
    pub quantiles: [f64; 5],
    pub count: usize,
}

pub fn aggregate(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::domain("cannot summarize an empty sample"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantiles = QUANTILE_LEVELS.map(|p| nearest_rank(&sorted, p));
    Ok(Summary {
        mean,
        std,
        quantiles,
        count: n,
    })
}

/// Smallest value with at least a fraction `p` of the sample at or below it.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: u64,
    pub summary: Summary,
}

/// Aggregated results of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: String,
    pub runs: u64,
    /// Cumulative regret at each recorded period.
    pub cumulative: Vec<TracePoint>,
    /// Instantaneous regret at each recorded period; empty unless requested.
    pub per_period: Vec<TracePoint>,
    /// Final cumulative regret of every run, in run order.
    pub final_regret: Vec<f64>,
    /// Instantaneous regret at the horizon of every run, in run order;
    /// empty unless per-period regret is requested.
    pub final_per_period: Vec<f64>,
}

impl RegretTrace {
    pub fn final_summary(&self) -> Option<&Summary> {
        self.cumulative.last().map(|p| &p.summary)
    }
}

struct PolicyRun {
    cumulative: Vec<f64>,
    per_period: Vec<f64>,
}

/// Plays `policy` for `horizon` periods, recording at `points`.
fn play(
    policy: &Policy,
    instance: &BanditInstance,
    horizon: u64,
    points: &[u64],
    per_period: bool,
    rng: &mut Rng,
) -> Result<PolicyRun> {
    let mut state = policy.initial_state(instance.arms());
    let mut cum = 0.0;
    let mut out = PolicyRun {
        cumulative: Vec::with_capacity(points.len()),
        per_period: Vec::with_capacity(if per_period { points.len() } else { 0 }),
    };
    let mut next = points.iter().peekable();
    for t in 1..=horizon {
        let (arm, theta) = policy.select_arm(&state, rng)?;
        let reward = instance.pull(arm, rng)?;
        state = policy.step(state, arm, reward, theta)?;
        let regret = instance.gap(arm);
        cum += regret;
        if next.peek() == Some(&&t) {
            next.next();
            out.cumulative.push(cum);
            if per_period {
                out.per_period.push(regret);
            }
        }
    }
    Ok(out)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::config("workers must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every policy for `spec.runs` runs using rayon's global pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RegretTrace>> {
    run_experiment_with_workers(spec, None)
}

/// Like [`run_experiment`] with at most `workers` threads.
pub fn run_experiment_with_workers(
    spec: &ExperimentSpec,
    workers: Option<usize>,
) -> Result<Vec<RegretTrace>> {
    spec.validate()?;
    let policies = spec
        .policies
        .iter()
        .cloned()
        .map(Policy::new)
        .collect::<Result<Vec<_>>>()?;
    let points = spec.record_points();
    let per_period = spec.metrics.contains(&Metric::PerPeriodRegret);
    let shared = spec.shared_instance()?;

    let runs: Vec<Vec<PolicyRun>> = with_workers(workers, || {
        (0..spec.runs)
            .into_par_iter()
            .map(|run| {
                let (instance, mut streams) = spec.run_setup(run, shared.as_ref())?;
                policies
                    .iter()
                    .zip(streams.iter_mut())
                    .map(|(p, rng)| play(p, &instance, spec.horizon, &points, per_period, rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut traces = Vec::with_capacity(policies.len());
    for (j, policy) in policies.iter().enumerate() {
        let column = |i: usize, per: bool| -> Vec<f64> {
            runs.iter()
                .map(|r| if per { r[j].per_period[i] } else { r[j].cumulative[i] })
                .collect()
        };
        let mut cumulative = Vec::with_capacity(points.len());
        let mut per = Vec::new();
        for (i, &t) in points.iter().enumerate() {
            cumulative.push(TracePoint {
                t,
                summary: aggregate(&column(i, false))?,
            });
            if per_period {
                per.push(TracePoint {
                    t,
                    summary: aggregate(&column(i, true))?,
                });
            }
        }
        let final_regret = column(points.len() - 1, false);
        let final_per_period = if per_period {
            column(points.len() - 1, true)
        } else {
            Vec::new()
        };
        traces.push(RegretTrace {
            policy: policy.spec().label(),
            runs: spec.runs,
            cumulative,
            per_period: per,
            final_regret,
            final_per_period,
        });
    }
    Ok(traces)
}

/// Fixed-budget best-arm identification outcome of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct BaiResult {
    pub policy: String,
    pub budget: u64,
    pub runs: u64,
    /// Fraction of runs whose recommended arm is not optimal.
    pub error_rate: f64,
    /// Per-run miss indicators, in run order.
    pub misses: Vec<bool>,
}

impl BaiResult {
    pub fn standard_error(&self) -> f64 {
        let p = self.error_rate;
        (p * (1.0 - p) / self.runs as f64).sqrt()
    }
}

/// Plays each policy for `budget` periods, recommends the arm with the
/// highest empirical mean (lowest index on ties) and reports how often the
/// recommendation is suboptimal.
pub fn bai_experiment(spec: &ExperimentSpec, budget: u64) -> Result<Vec<BaiResult>> {
    bai_experiment_with_workers(spec, budget, None)
}

pub fn bai_experiment_with_workers(
    spec: &ExperimentSpec,
    budget: u64,
    workers: Option<usize>,
) -> Result<Vec<BaiResult>> {
    spec.validate()?;
    if budget == 0 {
        return Err(Error::config("budget must be at least 1"));
    }
    let policies = spec
        .policies
        .iter()
        .cloned()
        .map(Policy::new)
        .collect::<Result<Vec<_>>>()?;
    let shared = spec.shared_instance()?;

    let runs: Vec<Vec<bool>> = with_workers(workers, || {
        (0..spec.runs)
            .into_par_iter()
            .map(|run| {
                let (instance, mut streams) = spec.run_setup(run, shared.as_ref())?;
                policies
                    .iter()
                    .zip(streams.iter_mut())
                    .map(|(p, rng)| recommend_after(p, &instance, budget, rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;

    Ok(policies
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let misses: Vec<bool> = runs.iter().map(|r| r[j]).collect();
            let count = misses.iter().filter(|&&m| m).count();
            BaiResult {
                policy: p.spec().label(),
                budget,
                runs: spec.runs,
                error_rate: count as f64 / spec.runs as f64,
                misses,
            }
        })
        .collect())
}

/// True when the recommendation after `budget` pulls is suboptimal.
fn recommend_after(policy: &Policy, instance: &BanditInstance, budget: u64, rng: &mut Rng) -> Result<bool> {
    if instance.arms() < 2 {
        return Ok(false);
    }
    let mut state = policy.initial_state(instance.arms());
    for _ in 0..budget {
        let (arm, theta) = policy.select_arm(&state, rng)?;
        let reward = instance.pull(arm, rng)?;
        state = policy.step(state, arm, reward, theta)?;
    }
    let mut best = 0;
    for (i, p) in state.posteriors().iter().enumerate() {
        if p.empirical_mean() > state.posteriors()[best].empirical_mean() {
            best = i;
        }
    }
    Ok(instance.means()[best] < instance.optimal_mean())
}
