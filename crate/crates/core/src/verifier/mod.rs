//! Probability-one checks for stationary product policies, a brute-force
//! optimal-policy oracle, and empirical satisfaction estimates.

mod chain;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use chain::{
    decompose, induced_chain, strongly_connected_components, ChainDecomposition, MarkovChain,
};

use crate::mdp::StationaryPolicy;
use crate::product::ProductMdp;
use crate::rng::derive_seed;
use crate::sim::{simulate_from, Controller};
use crate::solver::SolverError;

/// Why a pair fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationCase {
    /// Some recurrent class contains no good state.
    #[serde(rename = "1")]
    RecurrentAvoidsGood,
    /// Some bad state is recurrent.
    #[serde(rename = "2")]
    RecurrentBad,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub prob_one: bool,
    /// 0-based index of the first pair that is met with probability one.
    pub witness_pair: Option<usize>,
    /// Failure reason per pair; `None` for pairs that hold.
    pub pair_cases: Vec<Option<ViolationCase>>,
    pub decomposition: ChainDecomposition,
    pub reachable: usize,
}

impl Verdict {
    /// Case reported for a negative verdict: that of the first pair.
    pub fn case(&self) -> Option<ViolationCase> {
        if self.prob_one {
            None
        } else {
            self.pair_cases.first().copied().flatten()
        }
    }

    pub fn report(&self) -> VerificationReport {
        VerificationReport {
            prob_one: self.prob_one,
            witness_pair: self.witness_pair.map(|i| i + 1),
            case: self.case(),
            recurrent_classes: self.decomposition.recurrent.len(),
            transient: self.decomposition.transient.len(),
        }
    }
}

/// The on-disk verification report; pair numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub prob_one: bool,
    pub witness_pair: Option<usize>,
    pub case: Option<ViolationCase>,
    pub recurrent_classes: usize,
    pub transient: usize,
}

fn pair_case(p: &ProductMdp, chain: &MarkovChain, d: &ChainDecomposition, i: usize) -> Option<ViolationCase> {
    let avoids_good = d
        .recurrent
        .iter()
        .any(|class| !class.iter().any(|&v| p.in_good(i, chain.states[v])));
    if avoids_good {
        return Some(ViolationCase::RecurrentAvoidsGood);
    }
    let bad_recurrent = d
        .recurrent
        .iter()
        .flatten()
        .any(|&v| p.in_bad(i, chain.states[v]));
    bad_recurrent.then_some(ViolationCase::RecurrentBad)
}

/// Decides whether runs under `pi` meet some acceptance pair with
/// probability one: every recurrent class reached from the initial state
/// meets the pair's good set and no recurrent state is bad.
pub fn satisfies_prob_one(p: &ProductMdp, pi: &StationaryPolicy) -> Result<Verdict, SolverError> {
    let chain = induced_chain(p, pi)?;
    let d = decompose(&chain);
    let pair_cases: Vec<Option<ViolationCase>> =
        (0..p.num_pairs()).map(|i| pair_case(p, &chain, &d, i)).collect();
    let witness_pair = pair_cases.iter().position(Option::is_none);
    Ok(Verdict {
        prob_one: witness_pair.is_some(),
        witness_pair,
        pair_cases,
        reachable: chain.len(),
        decomposition: d,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{0} policies exceed the enumeration limit")]
    TooLarge(f64),
    #[error("policy evaluation matrix is singular")]
    Singular,
}

/// Upper bound on the number of policies [`brute_force_best`] enumerates.
pub const MAX_ENUMERATED_POLICIES: f64 = 1e6;

/// Exact utilities of `pi` by solving `(I - γ P_π) U = W`.
pub fn exact_policy_utilities(
    p: &ProductMdp,
    pi: &StationaryPolicy,
    w: &[f64],
    gamma: f64,
) -> Result<Vec<f64>, OracleError> {
    let n = p.num_states();
    let mut a = DMatrix::<f64>::identity(n, n);
    for sp in 0..n {
        for (t, pr) in p.successors_of(sp, pi.action(sp)) {
            a[(sp, t)] -= gamma * pr;
        }
    }
    let b = DVector::from_column_slice(w);
    a.lu()
        .solve(&b)
        .map(|u| u.iter().copied().collect())
        .ok_or(OracleError::Singular)
}

/// Optimal policy by enumerating every stationary policy and evaluating it
/// exactly. Returns the greedy policy for the pointwise best utilities, with
/// the lowest action index among actions within `tie_tolerance` of the best,
/// and those utilities.
pub fn brute_force_best(
    p: &ProductMdp,
    w: &[f64],
    gamma: f64,
    tie_tolerance: f64,
) -> Result<(StationaryPolicy, Vec<f64>), OracleError> {
    let n = p.num_states();
    let counts: Vec<usize> = (0..n).map(|sp| p.choices(sp).len()).collect();
    let total: f64 = counts.iter().map(|&c| c as f64).product();
    if total > MAX_ENUMERATED_POLICIES {
        return Err(OracleError::TooLarge(total));
    }
    let mut digits = vec![0usize; n];
    let mut best = vec![f64::NEG_INFINITY; n];
    loop {
        let pi = StationaryPolicy::new(
            (0..n).map(|sp| p.choices(sp)[digits[sp]].action).collect(),
        );
        let u = exact_policy_utilities(p, &pi, w, gamma)?;
        for (b, x) in best.iter_mut().zip(&u) {
            *b = b.max(*x);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == n {
                let policy = greedy_exact(p, w, gamma, &best, tie_tolerance);
                return Ok((policy, best));
            }
            digits[k] += 1;
            if digits[k] < counts[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn greedy_exact(p: &ProductMdp, w: &[f64], gamma: f64, u: &[f64], tie_tolerance: f64) -> StationaryPolicy {
    StationaryPolicy::new(
        (0..p.num_states())
            .map(|sp| {
                let values: Vec<(usize, f64)> = p
                    .choices(sp)
                    .iter()
                    .map(|c| (c.action, w[sp] + gamma * p.successors(sp, c).map(|(t, pr)| pr * u[t]).sum::<f64>()))
                    .collect();
                let top = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
                values
                    .iter()
                    .filter(|v| v.1 >= top - tie_tolerance)
                    .map(|v| v.0)
                    .min()
                    .unwrap()
            })
            .collect(),
    )
}

/// Settings for [`estimate_satisfaction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub pair: usize,
    pub traces: usize,
    pub horizon: usize,
    pub burn_in: usize,
    /// Each consecutive window of this many steps after the burn-in must
    /// contain a good state. Defaults to a quarter of the horizon.
    pub window: Option<usize>,
    pub seed: u64,
}

/// Fraction of simulated traces that, after `burn_in`, never visit a bad
/// state and see a good state in every full window. This is a finite-horizon
/// surrogate for the infinite-run acceptance condition.
pub fn estimate_satisfaction<C, F>(p: &ProductMdp, make_controller: F, cfg: &EstimateConfig) -> f64
where
    C: Controller,
    F: Fn() -> C + Sync,
{
    assert!(cfg.horizon > cfg.burn_in, "horizon must exceed burn-in");
    let window = cfg.window.unwrap_or(cfg.horizon / 4).max(1);
    let ok = (0..cfg.traces)
        .into_par_iter()
        .filter(|&k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[k as u64]));
            let mut c = make_controller();
            let trace = simulate_from(p, &mut c, p.initial(), cfg.horizon, &[], &mut rng);
            let tail = &trace.records[cfg.burn_in..];
            if tail.iter().any(|r| p.in_bad(cfg.pair, r.product_state)) {
                return false;
            }
            tail.chunks(window)
                .filter(|w| w.len() == window)
                .all(|w| w.iter().any(|r| p.in_good(cfg.pair, r.product_state)))
        })
        .count();
    ok as f64 / cfg.traces.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Dra, RabinPair};
    use crate::mdp::{Choice, LabeledMdp};
    use crate::product::build_product;
    use std::collections::BTreeSet;

    /// States 0 (start), 1 (labeled g), 2 (labeled bad); action 0 goes to g
    /// forever, action 1 to bad forever.
    fn fork() -> ProductMdp {
        let m = LabeledMdp {
            atoms: vec!["g".into(), "b".into()],
            actions: vec!["left".into(), "right".into()],
            labels: vec![0, 1, 2],
            choices: vec![
                vec![
                    Choice { action: 0, successors: vec![(1, 1.0)] },
                    Choice { action: 1, successors: vec![(2, 1.0)] },
                ],
                vec![Choice { action: 0, successors: vec![(1, 1.0)] }],
                vec![Choice { action: 0, successors: vec![(2, 1.0)] }],
            ],
            initial: 0,
        };
        // DRA mirrors the last letter: q1 after g, q2 after b
        let d = Dra::new(
            vec!["g".into(), "b".into()],
            3,
            0,
            vec![0, 1, 2, 0, 0, 1, 2, 0, 0, 1, 2, 0],
            vec![RabinPair {
                good: BTreeSet::from([1]),
                bad: BTreeSet::from([2]),
            }],
        )
        .unwrap();
        build_product(&m, &d).unwrap()
    }

    fn policy(p: &ProductMdp, first: usize) -> StationaryPolicy {
        let mut c = vec![0; p.num_states()];
        c[p.initial()] = first;
        StationaryPolicy::new(c)
    }

    #[test]
    fn good_recurrent_class() {
        let p = fork();
        let v = satisfies_prob_one(&p, &policy(&p, 0)).unwrap();
        assert!(v.prob_one);
        assert_eq!(v.witness_pair, Some(0));
        assert_eq!(v.report().witness_pair, Some(1));
    }

    #[test]
    fn bad_trap_is_case_two() {
        let p = fork();
        let v = satisfies_prob_one(&p, &policy(&p, 1)).unwrap();
        assert!(!v.prob_one);
        // the trap (s=2, q=2) is bad and recurrent; it also has no good state
        assert_eq!(v.case(), Some(ViolationCase::RecurrentAvoidsGood));
        let json = serde_json::to_string(&v.report()).unwrap();
        assert!(json.contains("\"case\":\"1\""), "{json}");
    }

    #[test]
    fn brute_force_avoids_the_trap() {
        let p = fork();
        let w: Vec<f64> = (0..p.num_states())
            .map(|sp| if p.in_bad(0, sp) { -10.0 } else if p.in_good(0, sp) { 1.0 } else { 0.0 })
            .collect();
        let (pi, _) = brute_force_best(&p, &w, 0.9, 1e-9).unwrap();
        assert_eq!(pi.action(p.initial()), 0);
        assert!(satisfies_prob_one(&p, &pi).unwrap().prob_one);
    }

    #[test]
    fn estimates() {
        let p = fork();
        let cfg = EstimateConfig {
            pair: 0,
            traces: 50,
            horizon: 40,
            burn_in: 5,
            window: None,
            seed: 1,
        };
        assert_eq!(estimate_satisfaction(&p, || policy(&p, 0), &cfg), 1.0);
        assert_eq!(estimate_satisfaction(&p, || policy(&p, 1), &cfg), 0.0);
    }
}
