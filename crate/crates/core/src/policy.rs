//! Arm-selection policies.
//!
//! Draw order is fixed so a seeded stream reproduces a trajectory exactly:
//! arms are visited in ascending index and, within an arm, agents in
//! ascending index. Argmax ties go to the lowest arm index.

use std::fmt;

use rand::Rng;

use crate::combiner::{self, CoefficientVector, CombinerKind, CombinerSpec};
use crate::error::{Error, Result};
use crate::posterior::{ArmPosterior, PosteriorFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Plain Thompson sampling: one posterior draw per arm.
    Ts,
    /// Thompson sampling with virtual helping agents and a combiner.
    TsVha(CombinerSpec),
    /// Argmax of the empirical means.
    Greedy,
    /// Satisficing Thompson sampling with tolerance `epsilon`.
    Sts { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub family: PosteriorFamily,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, family: PosteriorFamily) -> Self {
        Self { kind, family }
    }

    pub fn ts(family: PosteriorFamily) -> Self {
        Self::new(PolicyKind::Ts, family)
    }

    pub fn tsvha(family: PosteriorFamily, combiner: CombinerSpec) -> Self {
        Self::new(PolicyKind::TsVha(combiner), family)
    }

    pub fn greedy(family: PosteriorFamily) -> Self {
        Self::new(PolicyKind::Greedy, family)
    }

    pub fn sts(family: PosteriorFamily, epsilon: f64) -> Self {
        Self::new(PolicyKind::Sts { epsilon }, family)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::TsVha(c) => c.validate(),
            PolicyKind::Sts { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => Err(
                Error::domain(format!("satisficing tolerance must be >= 0, got {epsilon}")),
            ),
            _ => Ok(()),
        }
    }

    /// Short identifier used in file names and CSV rows, e.g. `c1-n3`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            PolicyKind::Ts => "ts".to_string(),
            PolicyKind::Greedy => "greedy".to_string(),
            PolicyKind::Sts { epsilon } => format!("sts-eps{epsilon}"),
            PolicyKind::TsVha(c) => match c.kind {
                CombinerKind::Identity => "identity".to_string(),
                CombinerKind::C1 => format!("c1-n{}", c.agents),
                CombinerKind::C2 => format!("c2-n{}", c.agents),
                CombinerKind::C3 => "c3".to_string(),
            },
        };
        match self.family {
            PosteriorFamily::Gaussian => base,
            PosteriorFamily::Beta => format!("{base}-beta"),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One past decision, as remembered by satisficing Thompson sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub period: u64,
    pub arm: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    posteriors: Vec<ArmPosterior>,
    history: Vec<HistoryEntry>,
    /// Running maximum of `history[..=i].theta`, for the earliest-period lookup.
    history_max: Vec<f64>,
    track_history: bool,
    t: u64,
}

impl PolicyState {
    /// Fresh priors for `arms` arms at period 1.
    pub fn new(arms: usize, family: PosteriorFamily, track_history: bool) -> Self {
        Self::from_posteriors(vec![ArmPosterior::prior(family); arms], track_history)
    }

    /// Starts at period 1 with the given posteriors.
    pub fn from_posteriors(posteriors: Vec<ArmPosterior>, track_history: bool) -> Self {
        Self {
            posteriors,
            history: Vec::new(),
            history_max: Vec::new(),
            track_history,
            t: 1,
        }
    }

    /// A history-tracking state positioned right after `history`.
    pub fn with_history(posteriors: Vec<ArmPosterior>, history: Vec<HistoryEntry>) -> Self {
        let mut state = Self::from_posteriors(posteriors, true);
        for entry in history {
            state.push_history(entry);
        }
        state.t = state.history.len() as u64 + 1;
        state
    }

    pub fn arms(&self) -> usize {
        self.posteriors.len()
    }

    /// Current (1-based) period.
    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn posteriors(&self) -> &[ArmPosterior] {
        &self.posteriors
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn empirical_means(&self) -> Vec<f64> {
        self.posteriors.iter().map(|p| p.empirical_mean()).collect()
    }

    fn push_history(&mut self, entry: HistoryEntry) {
        let m = self.history_max.last().map_or(entry.theta, |&m| m.max(entry.theta));
        self.history.push(entry);
        self.history_max.push(m);
    }

    /// Earliest past decision whose recorded sample satisfies
    /// `theta_past + epsilon >= theta`.
    pub fn satisficing_period(&self, theta: f64, epsilon: f64) -> Option<HistoryEntry> {
        let idx = self.history_max.partition_point(|&m| m + epsilon < theta);
        self.history.get(idx).copied()
    }
}

/// A validated policy with its combiner coefficients precomputed.
#[derive(Debug, Clone)]
pub struct Policy {
    spec: PolicySpec,
    coeffs: Option<CoefficientVector>,
}

impl Policy {
    pub fn new(spec: PolicySpec) -> Result<Self> {
        spec.validate()?;
        let coeffs = match spec.kind {
            PolicyKind::TsVha(c) => c.coefficients()?,
            _ => None,
        };
        Ok(Self { spec, coeffs })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn initial_state(&self, arms: usize) -> PolicyState {
        PolicyState::new(
            arms,
            self.spec.family,
            matches!(self.spec.kind, PolicyKind::Sts { .. }),
        )
    }

    /// Chooses an arm for the current period and returns it with the
    /// decision statistic that won.
    pub fn select_arm<R: Rng + ?Sized>(
        &self,
        state: &PolicyState,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        if state.arms() == 0 {
            return Err(Error::domain("a bandit needs at least one arm"));
        }
        match self.spec.kind {
            PolicyKind::Ts => Ok(argmax(state.posteriors.iter().map(|p| p.sample(rng)))),
            PolicyKind::Greedy => Ok(argmax(state.posteriors.iter().map(|p| p.empirical_mean()))),
            PolicyKind::TsVha(c) => self.select_tsvha(c, state, rng),
            PolicyKind::Sts { epsilon } => Ok(sts_select(state, epsilon, rng)),
        }
    }

    fn select_tsvha<R: Rng + ?Sized>(
        &self,
        spec: CombinerSpec,
        state: &PolicyState,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        if let Some(coeffs) = &self.coeffs {
            let c = coeffs.as_slice();
            return Ok(argmax(
                state
                    .posteriors
                    .iter()
                    .map(|p| c.iter().map(|&w| w * p.sample(rng)).sum::<f64>()),
            ));
        }
        if state.arms() == 1 {
            return Ok((0, state.posteriors[0].sample(rng)));
        }
        let means = state.empirical_means();
        let agents = combiner::c3_agent_count(state.t, &means, spec.c3_agent_cap)?;
        let floor = combiner::min_of(&means);
        let mut draws = Vec::new();
        let mut combined = Vec::with_capacity(state.arms());
        for p in &state.posteriors {
            let avg = match p {
                // Averaging `agents` Gaussian draws is exactly one draw with
                // variance scaled by 1/agents.
                ArmPosterior::Gaussian(g) => g.scaled_sample(agents as f64, rng)?,
                ArmPosterior::Beta(b) => {
                    draws.clear();
                    draws.extend((0..agents).map(|_| b.sample(rng)));
                    draws.iter().sum::<f64>() / agents as f64
                }
            };
            combined.push(avg.max(floor));
        }
        Ok(argmax(combined.into_iter()))
    }

    /// Records the outcome of playing `arm` with decision statistic `theta`.
    pub fn step(
        &self,
        mut state: PolicyState,
        arm: usize,
        reward: f64,
        theta: f64,
    ) -> Result<PolicyState> {
        let k = state.arms();
        let post = state.posteriors.get_mut(arm).ok_or_else(|| {
            Error::domain(format!("arm index {arm} out of range for {k} arms"))
        })?;
        *post = post.update(reward)?;
        if state.track_history {
            let period = state.t;
            state.push_history(HistoryEntry { period, arm, theta });
        }
        state.t += 1;
        Ok(state)
    }
}

/// Selects an arm under `spec`. Convenience wrapper over [`Policy`].
pub fn select_arm<R: Rng + ?Sized>(
    state: &PolicyState,
    spec: &PolicySpec,
    rng: &mut R,
) -> Result<(usize, f64)> {
    Policy::new(spec.clone())?.select_arm(state, rng)
}

/// Updates the played arm. Convenience wrapper over [`Policy`].
pub fn step(
    state: PolicyState,
    spec: &PolicySpec,
    arm: usize,
    reward: f64,
    theta: f64,
) -> Result<PolicyState> {
    Policy::new(spec.clone())?.step(state, arm, reward, theta)
}

/// Satisficing selection: draw one sample per arm, then replay the arm of the
/// earliest past period whose recorded sample is within `epsilon` of the
/// current best draw, if any. Returns the arm and its sample this period.
pub fn sts_select<R: Rng + ?Sized>(
    state: &PolicyState,
    epsilon: f64,
    rng: &mut R,
) -> (usize, f64) {
    let draws: Vec<f64> = state.posteriors.iter().map(|p| p.sample(rng)).collect();
    let (candidate, best) = argmax(draws.iter().copied());
    match state.satisficing_period(best, epsilon) {
        Some(past) => (past.arm, draws[past.arm]),
        None => (candidate, best),
    }
}

/// Index and value of the maximum; the lowest index wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if i == 0 || v > best.1 {
            best = (i, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::GaussianArmState;
    use rand::SeedableRng;

    fn rng(seed: u64) -> crate::Rng {
        crate::Rng::seed_from_u64(seed)
    }

    fn gaussian(mean: f64, plays: u64) -> ArmPosterior {
        ArmPosterior::Gaussian(GaussianArmState::with_mean(mean, plays))
    }

    #[test]
    fn single_arm_always_zero() {
        let mut r = rng(1);
        for spec in [
            PolicySpec::ts(PosteriorFamily::Gaussian),
            PolicySpec::tsvha(PosteriorFamily::Gaussian, CombinerSpec::c3()),
            PolicySpec::tsvha(PosteriorFamily::Beta, CombinerSpec::c2(3)),
            PolicySpec::greedy(PosteriorFamily::Beta),
            PolicySpec::sts(PosteriorFamily::Gaussian, 0.05),
        ] {
            let p = Policy::new(spec).unwrap();
            let mut s = p.initial_state(1);
            for _ in 0..20 {
                let (arm, theta) = p.select_arm(&s, &mut r).unwrap();
                assert_eq!(arm, 0);
                s = p.step(s, arm, 1.0, theta).unwrap();
            }
        }
    }

    #[test]
    fn symmetric_arms_split_evenly() {
        let state = PolicyState::from_posteriors(vec![gaussian(0.3, 4); 2], false);
        let p = Policy::new(PolicySpec::ts(PosteriorFamily::Gaussian)).unwrap();
        let mut r = rng(2);
        let trials = 100_000;
        let first = (0..trials)
            .filter(|_| p.select_arm(&state, &mut r).unwrap().0 == 0)
            .count();
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt(), "{freq}");
    }

    #[test]
    fn averaging_combiner_selection_rate() {
        // theta_0 - theta_1 ~ N(0.2, 2 / (4 * 8)), so P(arm 0) = Phi(0.8).
        let phi_08 = 0.788_144_601_416_603_4;
        let state = PolicyState::from_posteriors(vec![gaussian(0.6, 7), gaussian(0.4, 7)], false);
        let p = Policy::new(PolicySpec::tsvha(PosteriorFamily::Gaussian, CombinerSpec::c1(4)))
            .unwrap();
        let mut r = rng(3);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| p.select_arm(&state, &mut r).unwrap().0 == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        let se = (phi_08 * (1.0 - phi_08) / trials as f64).sqrt();
        assert!((freq - phi_08).abs() < 3.0 * se, "{freq}");
    }

    #[test]
    fn greedy_ties_go_to_lowest_index() {
        let p = Policy::new(PolicySpec::greedy(PosteriorFamily::Gaussian)).unwrap();
        let s = p.initial_state(5);
        let (arm, theta) = p.select_arm(&s, &mut rng(0)).unwrap();
        assert_eq!((arm, theta), (0, 0.0));
        let s = PolicyState::from_posteriors(vec![gaussian(0.1, 2), gaussian(0.5, 3), gaussian(0.5, 1)], false);
        assert_eq!(p.select_arm(&s, &mut rng(0)).unwrap().0, 1);
    }

    #[test]
    fn satisficing_replays_earliest_period() {
        let history = vec![
            HistoryEntry { period: 1, arm: 3, theta: 0.70 },
            HistoryEntry { period: 2, arm: 5, theta: 0.60 },
        ];
        let s = PolicyState::with_history(vec![gaussian(0.0, 0); 6], history);
        assert_eq!(s.period(), 3);
        let hit = s.satisficing_period(0.72, 0.05).unwrap();
        assert_eq!((hit.period, hit.arm), (1, 3));
        assert!(s.satisficing_period(0.72, 0.01).is_none());
        assert_eq!(s.satisficing_period(0.64, 0.05).unwrap().period, 1);
    }

    #[test]
    fn satisficing_picks_first_qualifying_not_best() {
        let history = vec![
            HistoryEntry { period: 1, arm: 0, theta: 0.1 },
            HistoryEntry { period: 2, arm: 1, theta: 0.5 },
            HistoryEntry { period: 3, arm: 2, theta: 0.9 },
        ];
        let s = PolicyState::with_history(vec![gaussian(0.0, 0); 3], history);
        assert_eq!(s.satisficing_period(0.52, 0.05).unwrap().arm, 1);
        assert_eq!(s.satisficing_period(0.0, 0.05).unwrap().arm, 0);
    }

    #[test]
    fn sts_with_empty_history_plays_candidate() {
        let s = PolicyState::new(4, PosteriorFamily::Gaussian, true);
        let mut a = rng(9);
        let mut b = rng(9);
        let (arm, theta) = sts_select(&s, 0.05, &mut a);
        let ts = Policy::new(PolicySpec::ts(PosteriorFamily::Gaussian)).unwrap();
        assert_eq!(ts.select_arm(&s, &mut b).unwrap(), (arm, theta));
    }

    #[test]
    fn step_updates_only_played_arm() {
        let p = Policy::new(PolicySpec::ts(PosteriorFamily::Gaussian)).unwrap();
        let s = p.initial_state(3);
        let s = p.step(s, 1, 0.8, 0.0).unwrap();
        assert!((s.posteriors()[1].empirical_mean() - 0.4).abs() < 1e-15);
        assert_eq!(s.posteriors()[0], ArmPosterior::prior(PosteriorFamily::Gaussian));
        assert_eq!(s.posteriors()[2], ArmPosterior::prior(PosteriorFamily::Gaussian));
        assert_eq!(s.period(), 2);
        assert!(s.history().is_empty());
        assert!(p.step(s, 3, 0.0, 0.0).is_err());
    }

    #[test]
    fn sts_history_grows_by_one() {
        let p = Policy::new(PolicySpec::sts(PosteriorFamily::Gaussian, 0.05)).unwrap();
        let mut s = p.initial_state(3);
        let mut r = rng(4);
        for t in 0..10 {
            assert_eq!(s.history().len(), t);
            let (arm, theta) = p.select_arm(&s, &mut r).unwrap();
            s = p.step(s, arm, 0.5, theta).unwrap();
            let last = s.history().last().unwrap();
            assert_eq!((last.period, last.arm, last.theta), (t as u64 + 1, arm, theta));
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let p = Policy::new(PolicySpec::tsvha(PosteriorFamily::Beta, CombinerSpec::c3())).unwrap();
            let mut s = p.initial_state(4);
            let mut r = rng(11);
            for t in 0..200 {
                let (arm, theta) = p.select_arm(&s, &mut r).unwrap();
                s = p.step(s, arm, (t % 3 == 0) as u8 as f64, theta).unwrap();
            }
            s
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(Policy::new(PolicySpec::sts(PosteriorFamily::Gaussian, -0.1)).is_err());
        assert!(Policy::new(PolicySpec::tsvha(PosteriorFamily::Gaussian, CombinerSpec::c2(1))).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(PolicySpec::tsvha(PosteriorFamily::Gaussian, CombinerSpec::c1(3)).label(), "c1-n3");
        assert_eq!(PolicySpec::ts(PosteriorFamily::Beta).label(), "ts-beta");
        assert_eq!(PolicySpec::sts(PosteriorFamily::Gaussian, 0.05).label(), "sts-eps0.05");
    }
}
