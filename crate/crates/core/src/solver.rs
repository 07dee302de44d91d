//! Discounted value iteration on the product, and the parameter helper for
//! choosing the discount and bad-state weight.

use rayon::prelude::*;
use thiserror::Error;

use crate::mdp::StationaryPolicy;
use crate::product::{reward_vector, ProductMdp, RewardScheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub gamma: f64,
    /// Sup-norm change between sweeps at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Actions whose value is within this of the best count as tied; the
    /// lowest action index wins among tied actions.
    pub tie_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.98,
            tolerance: 1e-8,
            max_iterations: 1_000_000,
            tie_tolerance: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SolverError::Config(format!("gamma = {} outside (0, 1)", self.gamma)));
        }
        if !(self.tolerance > 0.0) {
            return Err(SolverError::Config("tolerance must be positive".into()));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(SolverError::Config("tie tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("policy chooses action {action} which is not enabled in product state {state}")]
    DisabledAction { state: usize, action: usize },
    #[error("infeasible parameter estimate: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub utilities: Vec<f64>,
    pub policy: StationaryPolicy,
    pub iterations: usize,
    /// Bellman residual of `utilities`.
    pub residual: f64,
}

fn expected(p: &ProductMdp, sp: usize, choice: &crate::mdp::Choice, u: &[f64]) -> f64 {
    p.successors(sp, choice).map(|(t, pr)| pr * u[t]).sum()
}

/// Best action value `max_a Σ P U` at `sp`.
fn best_value(p: &ProductMdp, sp: usize, u: &[f64]) -> f64 {
    p.choices(sp)
        .iter()
        .map(|c| expected(p, sp, c, u))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn bellman(p: &ProductMdp, w: &[f64], gamma: f64, u: &[f64]) -> Vec<f64> {
    (0..p.num_states())
        .into_par_iter()
        .with_min_len(256)
        .map(|sp| w[sp] + gamma * best_value(p, sp, u))
        .collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Greedy policy for `u`: lowest action index among those within
/// `tie_tolerance` of the best expected successor value.
pub fn greedy_policy(p: &ProductMdp, u: &[f64], tie_tolerance: f64) -> StationaryPolicy {
    let choices = (0..p.num_states())
        .into_par_iter()
        .with_min_len(256)
        .map(|sp| {
            let values: Vec<(usize, f64)> = p
                .choices(sp)
                .iter()
                .map(|c| (c.action, expected(p, sp, c, u)))
                .collect();
            let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            values
                .iter()
                .filter(|v| v.1 >= best - tie_tolerance)
                .map(|v| v.0)
                .min()
                .expect("enabled set is nonempty")
        })
        .collect();
    StationaryPolicy::new(choices)
}

/// Optimal discounted utilities `U = W + γ max_a P U` for an explicit reward
/// vector, by synchronous (Jacobi) sweeps.
pub fn value_iteration_with_rewards(
    p: &ProductMdp,
    w: &[f64],
    cfg: &SolverConfig,
) -> Result<Solution, SolverError> {
    cfg.validate()?;
    let mut u = w.to_vec();
    let mut change = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let next = bellman(p, w, cfg.gamma, &u);
        change = sup_distance(&next, &u);
        u = next;
        if change <= cfg.tolerance {
            let residual = sup_distance(&bellman(p, w, cfg.gamma, &u), &u);
            let guard = cfg.tolerance * (1.0 + cfg.gamma) / (1.0 - cfg.gamma);
            if residual > guard {
                return Err(SolverError::NotConverged {
                    iterations: it,
                    residual,
                });
            }
            let policy = greedy_policy(p, &u, cfg.tie_tolerance);
            return Ok(Solution {
                utilities: u,
                policy,
                iterations: it,
                residual,
            });
        }
    }
    Err(SolverError::NotConverged {
        iterations: cfg.max_iterations,
        residual: change,
    })
}

pub fn value_iteration(
    p: &ProductMdp,
    r: &RewardScheme,
    cfg: &SolverConfig,
) -> Result<Solution, SolverError> {
    r.validate(p).map_err(|e| SolverError::Config(e.to_string()))?;
    value_iteration_with_rewards(p, &reward_vector(p, r), cfg)
}

pub fn check_policy(p: &ProductMdp, pi: &StationaryPolicy) -> Result<(), SolverError> {
    if pi.len() != p.num_states() {
        return Err(SolverError::Config(format!(
            "policy covers {} states, product has {}",
            pi.len(),
            p.num_states()
        )));
    }
    for sp in 0..p.num_states() {
        if !p.is_enabled(sp, pi.action(sp)) {
            return Err(SolverError::DisabledAction {
                state: sp,
                action: pi.action(sp),
            });
        }
    }
    Ok(())
}

/// Utilities of a fixed policy, `U = W + γ P_π U`, by iteration.
/// Returns the utilities and their Bellman residual.
pub fn policy_evaluation_with_rewards(
    p: &ProductMdp,
    pi: &StationaryPolicy,
    w: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64), SolverError> {
    cfg.validate()?;
    check_policy(p, pi)?;
    let chosen: Vec<&crate::mdp::Choice> = (0..p.num_states())
        .map(|sp| {
            p.choices(sp)
                .iter()
                .find(|c| c.action == pi.action(sp))
                .expect("checked above")
        })
        .collect();
    let sweep = |u: &[f64]| -> Vec<f64> {
        (0..p.num_states())
            .into_par_iter()
            .with_min_len(256)
            .map(|sp| w[sp] + cfg.gamma * expected(p, sp, chosen[sp], u))
            .collect()
    };
    let mut u = w.to_vec();
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let next = sweep(&u);
        change = sup_distance(&next, &u);
        u = next;
        if change <= cfg.tolerance {
            let residual = sup_distance(&sweep(&u), &u);
            return Ok((u, residual));
        }
    }
    Err(SolverError::NotConverged {
        iterations: cfg.max_iterations,
        residual: change,
    })
}

pub fn policy_evaluation(
    p: &ProductMdp,
    pi: &StationaryPolicy,
    r: &RewardScheme,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64), SolverError> {
    r.validate(p).map_err(|e| SolverError::Config(e.to_string()))?;
    policy_evaluation_with_rewards(p, pi, &reward_vector(p, r), cfg)
}

/// Rough problem constants used to pick `(γ, w_B)` with `w_G = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBoundEstimate {
    /// Smallest return period with nonzero return probability.
    pub n_bar: u32,
    /// Lower bound on that return probability.
    pub p_bar: f64,
    /// Lower bound on the recurrent gain term.
    pub m_bar: f64,
    /// Upper bounds on expected transient visit counts.
    pub n1: f64,
    pub n2: f64,
    pub epsilon: f64,
}

impl ParameterBoundEstimate {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: &str| Err(SolverError::Infeasible(m.into()));
        if self.n_bar < 1 {
            return fail("return period must be at least 1");
        }
        if !(self.p_bar > 0.0 && self.p_bar <= 1.0) {
            return fail("return probability must lie in (0, 1]");
        }
        if !(self.n1 >= 1.0 && self.n2 >= 1.0) || !self.n1.is_finite() || !self.n2.is_finite() {
            return fail("visit-count bounds must be finite and at least 1");
        }
        if !(self.epsilon > 0.0) {
            return fail("slack must be positive");
        }
        if !(self.epsilon < self.m_bar) {
            return fail("slack must be smaller than the recurrent gain bound");
        }
        Ok(())
    }

    /// `1 + w_B p̄ < -ε`
    pub fn weight_condition(&self, w_b: f64) -> bool {
        1.0 + w_b * self.p_bar < -self.epsilon
    }

    /// `max{-N1 w_B (1 - γ^n̄), -N2 w_B (1 - γ)} < ε`
    pub fn discount_condition(&self, gamma: f64, w_b: f64) -> bool {
        let a = -self.n1 * w_b * (1.0 - gamma.powi(self.n_bar as i32));
        let b = -self.n2 * w_b * (1.0 - gamma);
        a.max(b) < self.epsilon
    }
}

/// Least-magnitude `w_B = -2^k` and smallest `γ = 1 - 2^-j` meeting both
/// conditions of `est`. Returns `(γ, w_B)`.
pub fn select_parameters(est: &ParameterBoundEstimate) -> Result<(f64, f64), SolverError> {
    est.validate()?;
    let w_b = (0..1024)
        .map(|k| -(2f64.powi(k)))
        .find(|&w| est.weight_condition(w))
        .ok_or_else(|| SolverError::Infeasible("no representable bad-state weight".into()))?;
    let gamma = (1..=52)
        .map(|j| 1.0 - 2f64.powi(-j))
        .find(|&g| est.discount_condition(g, w_b))
        .ok_or_else(|| SolverError::Infeasible("no representable discount factor".into()))?;
    if !(est.weight_condition(w_b) && est.discount_condition(gamma, w_b)) {
        return Err(SolverError::Infeasible("selected parameters fail re-check".into()));
    }
    Ok((gamma, w_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Dra;
    use crate::mdp::{Choice, LabeledMdp};
    use crate::product::build_product;

    fn chain(succ: Vec<Vec<Vec<(usize, f64)>>>) -> ProductMdp {
        let n = succ.len();
        let m = LabeledMdp {
            atoms: vec![],
            actions: vec!["a".into(), "b".into()],
            labels: vec![0; n],
            choices: succ
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .enumerate()
                        .map(|(action, successors)| Choice { action, successors })
                        .collect()
                })
                .collect(),
            initial: 0,
        };
        build_product(&m, &Dra::universal(vec![]).unwrap()).unwrap()
    }

    #[test]
    fn absorbing_state_geometric_series() {
        let p = chain(vec![vec![vec![(0, 1.0)]]]);
        let sol = value_iteration_with_rewards(&p, &[1.0], &SolverConfig::with_gamma(0.5)).unwrap();
        assert!((sol.utilities[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn one_step_to_absorbing() {
        let p = chain(vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]]);
        let sol =
            value_iteration_with_rewards(&p, &[0.0, 1.0], &SolverConfig::with_gamma(0.9)).unwrap();
        assert!((sol.utilities[1] - 10.0).abs() < 1e-6);
        assert!((sol.utilities[0] - 9.0).abs() < 1e-6);
        assert!(sol.residual <= 1e-6);
    }

    #[test]
    fn two_cycle_evaluation() {
        let p = chain(vec![vec![vec![(1, 1.0)]], vec![vec![(0, 1.0)]]]);
        let (u, _) = policy_evaluation_with_rewards(
            &p,
            &StationaryPolicy::new(vec![0, 0]),
            &[0.0, 1.0],
            &SolverConfig::with_gamma(0.5),
        )
        .unwrap();
        assert!((u[1] - 4.0 / 3.0).abs() < 1e-7);
        assert!((u[0] - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn greedy_prefers_lower_index_on_ties() {
        let p = chain(vec![vec![vec![(0, 1.0)], vec![(0, 1.0)]]]);
        let sol = value_iteration_with_rewards(&p, &[1.0], &SolverConfig::with_gamma(0.5)).unwrap();
        assert_eq!(sol.policy.choices, vec![0]);
    }

    #[test]
    fn picks_the_better_action() {
        // action b reaches the rewarding state
        let p = chain(vec![
            vec![vec![(0, 1.0)], vec![(1, 1.0)]],
            vec![vec![(1, 1.0)]],
        ]);
        let sol =
            value_iteration_with_rewards(&p, &[0.0, 1.0], &SolverConfig::with_gamma(0.9)).unwrap();
        assert_eq!(sol.policy.choices, vec![1, 0]);
    }

    #[test]
    fn disabled_action_is_rejected() {
        let p = chain(vec![vec![vec![(0, 1.0)]]]);
        let err = policy_evaluation_with_rewards(
            &p,
            &StationaryPolicy::new(vec![1]),
            &[1.0],
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, SolverError::DisabledAction { state: 0, action: 1 });
    }

    #[test]
    fn not_converged() {
        let p = chain(vec![vec![vec![(0, 1.0)]]]);
        let cfg = SolverConfig {
            max_iterations: 3,
            ..SolverConfig::with_gamma(0.99)
        };
        assert!(matches!(
            value_iteration_with_rewards(&p, &[1.0], &cfg),
            Err(SolverError::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn worked_parameter_example() {
        let est = ParameterBoundEstimate {
            n_bar: 2,
            p_bar: 0.1,
            m_bar: 1.0,
            n1: 10.0,
            n2: 10.0,
            epsilon: 0.5,
        };
        let (gamma, w_b) = select_parameters(&est).unwrap();
        assert_eq!(w_b, -16.0);
        assert_eq!(gamma, 1.0 - 2f64.powi(-10));
    }

    #[test]
    fn infeasible_estimate() {
        let est = ParameterBoundEstimate {
            n_bar: 2,
            p_bar: 0.1,
            m_bar: 1.0,
            n1: 10.0,
            n2: 10.0,
            epsilon: 1.0,
        };
        assert!(matches!(select_parameters(&est), Err(SolverError::Infeasible(_))));
    }
}
