#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rabin_synth::automata::{Dra, Letter, RabinPair};
use rabin_synth::ltl::{FragmentSpec, LtlFormula};
use rabin_synth::mdp::{Choice, LabeledMdp, StationaryPolicy};
use rabin_synth::product::ProductMdp;
use rabin_synth::verifier::satisfies_prob_one;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(atoms: &[&str]) -> Vec<String> {
    atoms.iter().map(|s| s.to_string()).collect()
}

/// Truth of `f` at position 0 of the lasso `prefix . cycle^omega`.
/// Letters are bitsets over `atoms`.
pub fn lasso_holds(f: &LtlFormula, atoms: &[String], prefix: &[u32], cycle: &[u32]) -> bool {
    assert!(!cycle.is_empty());
    let word: Vec<u32> = prefix.iter().chain(cycle).copied().collect();
    let n = word.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
    sat_positions(f, atoms, &word, &succ)[0]
}

fn sat_positions(f: &LtlFormula, atoms: &[String], word: &[u32], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    use LtlFormula::*;
    let n = word.len();
    let rec = |g: &LtlFormula| sat_positions(g, atoms, word, succ);
    match f {
        True => vec![true; n],
        False => vec![false; n],
        Atom(a) => {
            let i = atoms.iter().position(|b| b == a).expect("atom in alphabet");
            word.iter().map(|l| l >> i & 1 == 1).collect()
        }
        Not(g) => rec(g).into_iter().map(|b| !b).collect(),
        And(gs) => gs.iter().map(rec).fold(vec![true; n], |acc, v| {
            acc.iter().zip(v).map(|(a, b)| *a && b).collect()
        }),
        Or(gs) => gs.iter().map(rec).fold(vec![false; n], |acc, v| {
            acc.iter().zip(v).map(|(a, b)| *a || b).collect()
        }),
        Implies(a, b) => rec(a).into_iter().zip(rec(b)).map(|(x, y)| !x || y).collect(),
        Next(g) => {
            let v = rec(g);
            (0..n).map(|i| v[succ(i)]).collect()
        }
        Until(a, b) => until(&rec(a), &rec(b), succ),
        Eventually(g) => until(&vec![true; n], &rec(g), succ),
        Always(g) => {
            let neg: Vec<bool> = rec(g).into_iter().map(|b| !b).collect();
            until(&vec![true; n], &neg, succ).into_iter().map(|b| !b).collect()
        }
    }
}

// least fixpoint of Z = b | (a & X Z)
fn until(a: &[bool], b: &[bool], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let mut z = b.to_vec();
    loop {
        let next: Vec<bool> = (0..z.len()).map(|i| b[i] || (a[i] && z[succ(i)])).collect();
        if next == z {
            return z;
        }
        z = next;
    }
}

pub fn letters(v: &[u32]) -> Vec<Letter> {
    v.iter().map(|&l| Letter(l)).collect()
}

/// Every lasso over `k` atoms with prefix length `<= max_prefix` and cycle
/// length in `1..=max_cycle`.
pub fn all_lassos(k: usize, max_prefix: usize, max_cycle: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let alphabet = 1u32 << k;
    let words = |len: usize| -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..alphabet).map(move |l| {
                        let mut w = w.clone();
                        w.push(l);
                        w
                    })
                })
                .collect();
        }
        out
    };
    let mut out = Vec::new();
    for pl in 0..=max_prefix {
        let prefixes = words(pl);
        for cl in 1..=max_cycle {
            let cycles = words(cl);
            for p in &prefixes {
                for c in &cycles {
                    out.push((p.clone(), c.clone()));
                }
            }
        }
    }
    out
}

pub fn arb_atom(atoms: &'static [&'static str]) -> impl Strategy<Value = LtlFormula> {
    proptest::sample::select(atoms).prop_map(LtlFormula::atom)
}

/// Arbitrary LTL formulas over `atoms`.
pub fn arb_formula(atoms: &'static [&'static str]) -> impl Strategy<Value = LtlFormula> {
    let leaf = prop_oneof![
        Just(LtlFormula::True),
        Just(LtlFormula::False),
        arb_atom(atoms),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlFormula::not),
            inner.clone().prop_map(LtlFormula::next),
            inner.clone().prop_map(LtlFormula::eventually),
            inner.clone().prop_map(LtlFormula::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::until(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::implies(a, b)),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(LtlFormula::And),
            proptest::collection::vec(inner, 2..4).prop_map(LtlFormula::Or),
        ]
    })
}

/// Propositional formulas over `atoms`.
pub fn arb_prop(atoms: &'static [&'static str]) -> impl Strategy<Value = LtlFormula> {
    arb_atom(atoms).prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlFormula::not),
            proptest::collection::vec(inner.clone(), 2..3).prop_map(LtlFormula::And),
            proptest::collection::vec(inner, 2..3).prop_map(LtlFormula::Or),
        ]
    })
}

/// Propositional formulas over `X`-prefixed atoms, nesting depth at most 3.
pub fn arb_safety(atoms: &'static [&'static str]) -> impl Strategy<Value = LtlFormula> {
    let leaf = (arb_atom(atoms), 0..=3usize).prop_map(|(a, d)| {
        (0..d).fold(a, |f, _| LtlFormula::next(f))
    });
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::implies(a, b)),
            proptest::collection::vec(inner.clone(), 2..3).prop_map(LtlFormula::And),
            proptest::collection::vec(inner, 2..3).prop_map(LtlFormula::Or),
        ]
    })
}

pub fn arb_fragment(atoms: &'static [&'static str]) -> impl Strategy<Value = FragmentSpec> {
    (
        proptest::collection::vec(arb_prop(atoms), 0..3),
        proptest::collection::vec(arb_prop(atoms), 0..2),
        proptest::option::of(arb_safety(atoms)),
    )
        .prop_map(|(recurrence, stability, safety)| FragmentSpec {
            recurrence,
            stability,
            safety,
        })
        .prop_filter("nonempty", |s| !s.is_empty())
}

/// Shape limits for [`random_mdp`].
#[derive(Debug, Clone, Copy)]
pub struct MdpShape {
    pub max_states: usize,
    pub max_actions: usize,
    pub atoms: usize,
    pub max_successors: usize,
}

/// A random valid labeled MDP. Probabilities are ratios of small integers.
pub fn random_mdp(rng: &mut ChaCha8Rng, shape: MdpShape) -> LabeledMdp {
    let n = rng.random_range(1..=shape.max_states);
    let k = rng.random_range(1..=shape.max_actions);
    let atoms: Vec<String> = (0..shape.atoms).map(|i| format!("p{i}")).collect();
    let actions: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
    let labels = (0..n).map(|_| rng.random_range(0..1u64 << shape.atoms)).collect();
    let choices = (0..n)
        .map(|_| {
            let mut enabled: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.6)).collect();
            if enabled.is_empty() {
                enabled.push(rng.random_range(0..k));
            }
            enabled
                .into_iter()
                .map(|action| {
                    let m = rng.random_range(1..=shape.max_successors.min(n));
                    let mut targets: Vec<usize> = (0..n).collect();
                    targets.shuffle(rng);
                    targets.truncate(m);
                    targets.sort_unstable();
                    let weights: Vec<u32> = (0..m).map(|_| rng.random_range(1..=4)).collect();
                    let total: u32 = weights.iter().sum();
                    Choice {
                        action,
                        successors: targets
                            .into_iter()
                            .zip(weights)
                            .map(|(t, w)| (t, w as f64 / total as f64))
                            .collect(),
                    }
                })
                .collect()
        })
        .collect();
    LabeledMdp {
        atoms,
        actions,
        labels,
        choices,
        initial: rng.random_range(0..n),
    }
}

/// A random complete DRA over `atoms` with up to `max_pairs` pairs whose
/// good and bad sets are disjoint.
pub fn random_dra(rng: &mut ChaCha8Rng, atoms: &[String], max_states: usize, max_pairs: usize) -> Dra {
    let n = rng.random_range(1..=max_states);
    let letters = 1usize << atoms.len();
    let delta = (0..n * letters).map(|_| rng.random_range(0..n)).collect();
    let pairs = (0..rng.random_range(1..=max_pairs))
        .map(|_| {
            let mut good = BTreeSet::new();
            let mut bad = BTreeSet::new();
            for q in 0..n {
                match rng.random_range(0..4) {
                    0 => {
                        good.insert(q);
                    }
                    1 => {
                        bad.insert(q);
                    }
                    _ => {}
                }
            }
            RabinPair { good, bad }
        })
        .collect();
    Dra::new(atoms.to_vec(), n, 0, delta, pairs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of [`exists_prob_one_policy`].
#[derive(Debug, Clone, PartialEq)]
pub enum Existence {
    Found(StationaryPolicy),
    None,
    /// The search visited `limit` complete assignments without an answer.
    Unknown,
}

/// Searches stationary policies for one that meets some pair with
/// probability one. Only states reachable under the partial assignment get
/// a choice, so policies differing off the reachable set are not repeated.
pub fn exists_prob_one_policy(p: &ProductMdp, limit: usize) -> Existence {
    struct Search<'a> {
        p: &'a ProductMdp,
        assigned: Vec<Option<usize>>,
        leaves: usize,
        limit: usize,
    }
    impl Search<'_> {
        fn go(&mut self, frontier: &mut Vec<usize>) -> Option<Existence> {
            let Some(sp) = frontier.pop() else {
                self.leaves += 1;
                let pi = StationaryPolicy::new(
                    (0..self.p.num_states())
                        .map(|s| self.assigned[s].unwrap_or(self.p.choices(s)[0].action))
                        .collect(),
                );
                if satisfies_prob_one(self.p, &pi).unwrap().prob_one {
                    return Some(Existence::Found(pi));
                }
                return (self.leaves >= self.limit).then_some(Existence::Unknown);
            };
            if self.assigned[sp].is_some() {
                let r = self.go(frontier);
                frontier.push(sp);
                return r;
            }
            let actions: Vec<usize> = self.p.enabled(sp).collect();
            for a in actions {
                self.assigned[sp] = Some(a);
                let before = frontier.len();
                for (t, _) in self.p.successors_of(sp, a) {
                    if self.assigned[t].is_none() && !frontier.contains(&t) {
                        frontier.push(t);
                    }
                }
                let r = self.go(frontier);
                frontier.truncate(before);
                if r.is_some() {
                    self.assigned[sp] = None;
                    frontier.push(sp);
                    return r;
                }
            }
            self.assigned[sp] = None;
            frontier.push(sp);
            None
        }
    }
    let mut s = Search {
        p,
        assigned: vec![None; p.num_states()],
        leaves: 0,
        limit,
    };
    s.go(&mut vec![p.initial()]).unwrap_or(Existence::None)
}

/// Atom order of the traffic network.
pub const TRAFFIC_ATOM_ORDER: [&str; 5] = ["x1le30", "x2le30", "x3le10", "x4le10", "sv2"];

/// A 37-state DRA for the traffic objective, built as the product of three
/// monitors plus one shared rejecting sink (state 36):
///
/// * minimum green: `m` in 0..4 (free, last letter had `sv2`, two more
///   letters without `sv2` required, one more required);
/// * recurrence: `c` in 0..3, advanced by `x3le10` then `x4le10`, `c == 2`
///   marks a completed round;
/// * stability: `w` in 0..3 (start, last letter had `x1le30 & x2le30`, last
///   letter did not).
///
/// State `(m, c, w)` has index `9m + 3c + w`. One pair: good states have
/// `c == 2` and `w == 1`; bad states are the sink and every `w == 2`.
pub fn traffic_dra_37() -> Dra {
    const SINK: usize = 36;
    let atoms = names(&TRAFFIC_ATOM_ORDER);
    let idx = |m: usize, c: usize, w: usize| 9 * m + 3 * c + w;
    let mut delta = Vec::with_capacity(37 * 32);
    for q in 0..37 {
        for l in 0..32u32 {
            if q == SINK {
                delta.push(SINK);
                continue;
            }
            let (m, c) = (q / 9, q / 3 % 3);
            let bit = |i: u32| l >> i & 1 == 1;
            let s = bit(4);
            let m2 = match (m, s) {
                (0, s) | (1, s) => Some(if s { 1 } else if m == 1 { 2 } else { 0 }),
                (2, false) => Some(3),
                (3, false) => Some(0),
                _ => None,
            };
            let Some(m2) = m2 else {
                delta.push(SINK);
                continue;
            };
            let mut c2 = if c == 2 { 0 } else { c };
            if c2 == 0 && bit(2) {
                c2 = 1;
            }
            if c2 == 1 && bit(3) {
                c2 = 2;
            }
            let w2 = if bit(0) && bit(1) { 1 } else { 2 };
            delta.push(idx(m2, c2, w2));
        }
    }
    let good = (0..SINK).filter(|&q| q / 3 % 3 == 2 && q % 3 == 1).collect();
    let bad = (0..SINK).filter(|&q| q % 3 == 2).chain([SINK]).collect();
    Dra::new(atoms, 37, 0, delta, vec![RabinPair { good, bad }]).unwrap()
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Proptest settings for integration tests; failure files are not written
/// because integration tests have no source root for them.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
