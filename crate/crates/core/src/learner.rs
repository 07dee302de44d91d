//! Online temporal-difference learning on the product.
//!
//! Transition counts are kept per equivalence class (MDP state), so an
//! observation made at `(s, q)` informs every `(s, q')`. The lookahead maps
//! class-level successor estimates back to product states through the
//! automaton step.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mdp::{LabeledMdp, StationaryPolicy};
use crate::product::{reward_vector, ProductMdp, RewardScheme};
use crate::sim::sample_successor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    Uniform,
    /// Greedy with probability `1 - ε`; `ε` is multiplied by `decay` after
    /// every step and never drops below `min`.
    EpsilonGreedy { epsilon: f64, decay: f64, min: f64 },
    /// Greedy over values where `(class, action)` pairs seen fewer than
    /// `threshold` times are worth `optimistic_value`.
    Optimistic { threshold: u64, optimistic_value: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid exploration strategy {0:?}; expected uniform, eps:<e>[:<decay>] or opt:<n>[:<value>]")]
pub struct ExplorationParseError(String);

impl FromStr for Exploration {
    type Err = ExplorationParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ExplorationParseError(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<Option<f64>, ExplorationParseError> {
            parts.get(i).map(|x| x.parse::<f64>().map_err(|_| err())).transpose()
        };
        match parts[0] {
            "uniform" if parts.len() == 1 => Ok(Exploration::Uniform),
            "eps" if (2..=3).contains(&parts.len()) => {
                let epsilon = num(1)?.unwrap();
                let decay = num(2)?.unwrap_or(1.0);
                if !(0.0..=1.0).contains(&epsilon) || !(0.0..=1.0).contains(&decay) {
                    return Err(err());
                }
                Ok(Exploration::EpsilonGreedy { epsilon, decay, min: 0.0 })
            }
            "opt" if (2..=3).contains(&parts.len()) => {
                let threshold: u64 = parts[1].parse().map_err(|_| err())?;
                if threshold == 0 {
                    return Err(err());
                }
                Ok(Exploration::Optimistic {
                    threshold,
                    optimistic_value: num(2)?,
                })
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for Exploration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exploration::Uniform => write!(f, "uniform"),
            Exploration::EpsilonGreedy { epsilon, decay, .. } => write!(f, "eps:{epsilon}:{decay}"),
            Exploration::Optimistic { threshold, optimistic_value: None } => write!(f, "opt:{threshold}"),
            Exploration::Optimistic { threshold, optimistic_value: Some(v) } => {
                write!(f, "opt:{threshold}:{v}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Retain factor: `U ← α U + (1 - α) target`.
    pub alpha: f64,
    pub gamma: f64,
    pub reward: RewardScheme,
    /// Steps after which the automaton component is reset.
    pub reset_interval: usize,
    pub exploration: Exploration,
}

impl LearnerConfig {
    pub fn new(reward: RewardScheme) -> Self {
        Self {
            alpha: 0.9,
            gamma: 0.98,
            reward,
            reset_interval: 200,
            exploration: Exploration::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub config: LearnerConfig,
    num_actions: usize,
    /// `None` until the product state is first seen.
    pub utilities: Vec<Option<f64>>,
    /// Indexed by `class * |A| + action`.
    pub n_sa: Vec<u64>,
    pub n_next: Vec<BTreeMap<usize, u64>>,
    pub policy: Vec<usize>,
    pub previous: Option<(usize, usize)>,
    pub steps_since_reset: usize,
    pub total_steps: u64,
    pub epsilon: f64,
    rewards: Vec<f64>,
    /// Per DRA state: no good state of the pair is reachable from it.
    sink: Vec<bool>,
}

impl LearnerState {
    pub fn new(p: &ProductMdp, config: LearnerConfig) -> Self {
        let a = p.mdp().num_actions();
        let k = p.num_classes() * a;
        let epsilon = match config.exploration {
            Exploration::EpsilonGreedy { epsilon, .. } => epsilon,
            _ => 0.0,
        };
        let reach = p.dra().can_reach_good(config.reward.pair);
        Self {
            config,
            num_actions: a,
            utilities: vec![None; p.num_states()],
            n_sa: vec![0; k],
            n_next: vec![BTreeMap::new(); k],
            policy: (0..p.num_states())
                .map(|sp| p.choices(sp)[0].action)
                .collect(),
            previous: None,
            steps_since_reset: 0,
            total_steps: 0,
            epsilon,
            rewards: reward_vector(p, &config.reward),
            sink: reach.iter().map(|r| !r).collect(),
        }
    }

    /// Initializes utilities and policy from a solution of an approximate
    /// model. With `prior = Some((model, weight))`, each class row also gets
    /// `weight` pseudo-observations distributed by the model's probabilities.
    pub fn warm_start(
        &mut self,
        utilities: &[f64],
        policy: &StationaryPolicy,
        prior: Option<(&LabeledMdp, u64)>,
    ) {
        self.utilities = utilities.iter().map(|&u| Some(u)).collect();
        self.policy = policy.choices.clone();
        if let Some((model, weight)) = prior {
            for s in 0..model.num_states() {
                for c in &model.choices[s] {
                    let k = self.key(s, c.action);
                    for &(t, pr) in &c.successors {
                        let n = (pr * weight as f64).round() as u64;
                        if n > 0 {
                            *self.n_next[k].entry(t).or_default() += n;
                            self.n_sa[k] += n;
                        }
                    }
                }
            }
        }
    }

    fn key(&self, class: usize, action: usize) -> usize {
        class * self.num_actions + action
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn visits(&self, class: usize, action: usize) -> u64 {
        self.n_sa[self.key(class, action)]
    }

    /// Estimated class-level successor distribution; empty when unvisited.
    pub fn p_hat(&self, class: usize, action: usize) -> Vec<(usize, f64)> {
        let k = self.key(class, action);
        let n = self.n_sa[k];
        if n == 0 {
            return Vec::new();
        }
        self.n_next[k].iter().map(|(&t, &c)| (t, c as f64 / n as f64)).collect()
    }

    fn utility_or_reward(&self, sp: usize) -> f64 {
        self.utilities[sp].unwrap_or(self.rewards[sp])
    }

    /// Estimated `Σ P̂ U` for `action` at `sp`; `None` when never tried.
    pub fn lookahead(&self, p: &ProductMdp, sp: usize, action: usize) -> Option<f64> {
        let k = self.key(p.equivalence_class(sp), action);
        let n = self.n_sa[k];
        if n == 0 {
            return None;
        }
        let base = p.next_dra_state(sp) * p.num_mdp_states();
        Some(
            self.n_next[k]
                .iter()
                .map(|(&t, &c)| c as f64 / n as f64 * self.utility_or_reward(base + t))
                .sum(),
        )
    }

    fn touch(&mut self, sp: usize) {
        if self.utilities[sp].is_none() {
            self.utilities[sp] = Some(self.rewards[sp]);
        }
    }

    fn record(&mut self, p: &ProductMdp, from: usize, action: usize, to: usize) {
        let k = self.key(p.equivalence_class(from), action);
        self.n_sa[k] += 1;
        *self.n_next[k].entry(p.equivalence_class(to)).or_default() += 1;
        let mut best: Option<(usize, f64)> = None;
        for a in p.enabled(from) {
            if let Some(v) = self.lookahead(p, from, a) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((a, v));
                }
            }
        }
        let (a_best, v_best) = best.expect("the observed action has a count");
        let target = self.rewards[from] + self.config.gamma * v_best;
        let alpha = self.config.alpha;
        let u = self.utility_or_reward(from);
        self.utilities[from] = Some(alpha * u + (1.0 - alpha) * target);
        self.policy[from] = a_best;
    }

    /// Whether the automaton component of `sp` should be reset.
    pub fn reset_condition(&self, p: &ProductMdp, sp: usize) -> bool {
        self.sink[p.dra_state(sp)] || self.steps_since_reset >= self.config.reset_interval
    }

    /// The greedy policy learned so far.
    pub fn greedy_policy(&self) -> StationaryPolicy {
        StationaryPolicy::new(self.policy.clone())
    }

    /// Largest `|P̂ - P|` over `(class, action)` pairs with at least
    /// `min_visits` observations, against the true model `m`.
    pub fn estimate_error(&self, m: &LabeledMdp, min_visits: u64) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for s in 0..m.num_states() {
            for c in &m.choices[s] {
                if self.visits(s, c.action) < min_visits {
                    continue;
                }
                let est: BTreeMap<usize, f64> = self.p_hat(s, c.action).into_iter().collect();
                let mut truth: BTreeMap<usize, f64> = BTreeMap::new();
                for &(t, pr) in &c.successors {
                    *truth.entry(t).or_default() += pr;
                }
                let err = truth
                    .keys()
                    .chain(est.keys())
                    .map(|t| {
                        (truth.get(t).copied().unwrap_or(0.0) - est.get(t).copied().unwrap_or(0.0)).abs()
                    })
                    .fold(0.0, f64::max);
                worst = Some(worst.map_or(err, |w: f64| w.max(err)));
            }
        }
        worst
    }
}

/// Product state with the automaton component set to its initial state.
pub fn reset_rabin_state(p: &ProductMdp, sp: usize) -> usize {
    p.reset_rabin_state(sp)
}

/// Chooses an action at `sp` according to the configured strategy.
pub fn explore_action<R: Rng + ?Sized>(ls: &mut LearnerState, p: &ProductMdp, sp: usize, rng: &mut R) -> usize {
    let enabled: Vec<usize> = p.enabled(sp).collect();
    match ls.config.exploration {
        Exploration::Uniform => *enabled.choose(rng).unwrap(),
        Exploration::EpsilonGreedy { decay, min, .. } => {
            let explore = rng.random::<f64>() < ls.epsilon;
            ls.epsilon = (ls.epsilon * decay).max(min);
            if explore {
                *enabled.choose(rng).unwrap()
            } else {
                ls.policy[sp]
            }
        }
        Exploration::Optimistic { threshold, optimistic_value } => {
            let r_plus = optimistic_value.unwrap_or_else(|| {
                let w_max = ls.config.reward.w_g.abs().max(ls.config.reward.w_b.abs());
                w_max / (1.0 - ls.config.gamma)
            });
            let class = p.equivalence_class(sp);
            let mut best = (enabled[0], f64::NEG_INFINITY);
            for &a in &enabled {
                let v = if ls.visits(class, a) < threshold {
                    r_plus
                } else {
                    ls.lookahead(p, sp, a).unwrap_or(r_plus)
                };
                if v > best.1 {
                    best = (a, v);
                }
            }
            best.0
        }
    }
}

/// Outcome of one [`td_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub action: usize,
    /// The state the action applies to; differs from the observed state
    /// when the automaton component was reset.
    pub state: usize,
    pub reset: bool,
}

/// Processes the observed state `observed`, then picks the next action.
///
/// The counts and utility of the previous state are updated with the
/// observed transition before any reset, so entering a rejecting sink is
/// learned as such. `force_reset` resets the automaton component regardless
/// of the reset condition.
pub fn td_step<R: Rng + ?Sized>(
    ls: &mut LearnerState,
    p: &ProductMdp,
    observed: usize,
    force_reset: bool,
    rng: &mut R,
) -> StepOutcome {
    ls.touch(observed);
    if let Some((prev, action)) = ls.previous {
        ls.record(p, prev, action, observed);
    }
    let mut state = observed;
    let reset = force_reset || ls.reset_condition(p, observed);
    if reset {
        state = p.reset_rabin_state(observed);
        ls.touch(state);
        ls.steps_since_reset = 0;
    }
    let action = explore_action(ls, p, state, rng);
    ls.previous = Some((state, action));
    ls.steps_since_reset += 1;
    ls.total_steps += 1;
    StepOutcome { action, state, reset }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub steps: usize,
    pub g_visits: usize,
    pub b_visits: usize,
    /// Resets triggered inside the trial, excluding the one at its start.
    pub resets: usize,
}

pub fn trial_log_csv(log: &[TrialRecord]) -> String {
    let mut out = String::from("trial,steps,g_visits,b_visits,resets\n");
    for r in log {
        out.push_str(&format!("{},{},{},{},{}\n", r.trial, r.steps, r.g_visits, r.b_visits, r.resets));
    }
    out
}

/// Runs `trials` trials of `steps` steps on the true product `p`. The MDP
/// state carries over between trials; each trial after the first starts with
/// an automaton reset. The learner only sees sampled successors.
pub fn run_trials(
    ls: &mut LearnerState,
    p: &ProductMdp,
    trials: usize,
    steps: usize,
    seed: u64,
) -> Vec<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = ls.config.reward.pair;
    let mut sp = p.initial();
    let mut log = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rec = TrialRecord {
            trial,
            steps,
            g_visits: 0,
            b_visits: 0,
            resets: 0,
        };
        for k in 0..steps {
            let out = td_step(ls, p, sp, trial > 0 && k == 0, &mut rng);
            if out.reset && k > 0 {
                rec.resets += 1;
            }
            rec.g_visits += usize::from(p.in_good(pair, out.state));
            rec.b_visits += usize::from(p.in_bad(pair, out.state));
            let succ = p.successors_of(out.state, out.action);
            sp = sample_successor(&mut rng, &succ);
        }
        log.push(rec);
    }
    if trials > 0 && steps > 0 {
        // fold in the final observed transition
        ls.touch(sp);
        if let Some((prev, action)) = ls.previous.take() {
            ls.record(p, prev, action, sp);
        }
    }
    log
}
