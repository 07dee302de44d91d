//! Deterministic Rabin automata over letters `2^atoms`.
//!
//! A letter is a bitset over the automaton's ordered atom list: bit `i` is set
//! when `atoms[i]` holds. Acceptance is state based: a run is accepting when,
//! for some pair, it visits the good set infinitely often and the bad set only
//! finitely often.

mod hoa;
mod translate;

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

pub use hoa::{parse_hoa, to_hoa};
pub use translate::translate_fragment;

/// Upper bound on the atoms an automaton alphabet may range over.
pub const MAX_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("HOA syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported HOA feature: {0}")]
    Unsupported(String),
    #[error("acceptance condition is not a Rabin condition: {0}")]
    NotRabin(String),
    #[error("invalid automaton: {0}")]
    Validation(String),
    #[error("atom {0:?} is not part of the atom order")]
    UnknownAtom(String),
    #[error("alphabet over {0} atoms exceeds the limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("cannot translate an empty specification")]
    EmptySpec,
    #[error("formula is outside the supported fragment: {0}")]
    Fragment(String),
}

/// Bitset over an automaton's atom list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Letter(pub u32);

impl Letter {
    pub fn contains(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }
}

/// One Rabin pair: `good` must be visited infinitely often, `bad` finitely often.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RabinPair {
    pub good: BTreeSet<usize>,
    pub bad: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dra {
    atoms: Vec<String>,
    num_states: usize,
    initial: usize,
    /// Successor of `(q, letter)` at `q * 2^atoms + letter`.
    delta: Vec<usize>,
    pairs: Vec<RabinPair>,
}

impl Dra {
    pub fn new(
        atoms: Vec<String>,
        num_states: usize,
        initial: usize,
        delta: Vec<usize>,
        pairs: Vec<RabinPair>,
    ) -> Result<Self, AutomatonError> {
        if atoms.len() > MAX_ATOMS {
            return Err(AutomatonError::TooManyAtoms(atoms.len()));
        }
        let distinct: BTreeSet<_> = atoms.iter().collect();
        if distinct.len() != atoms.len() {
            return Err(AutomatonError::Validation("duplicate atom".into()));
        }
        if num_states == 0 || initial >= num_states {
            return Err(AutomatonError::Validation(format!(
                "initial state {initial} outside 0..{num_states}"
            )));
        }
        let letters = 1usize << atoms.len();
        if delta.len() != num_states * letters {
            return Err(AutomatonError::Validation(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                num_states * letters
            )));
        }
        if let Some(bad) = delta.iter().find(|&&q| q >= num_states) {
            return Err(AutomatonError::Validation(format!("successor {bad} out of range")));
        }
        if pairs.is_empty() {
            return Err(AutomatonError::Validation("no acceptance pair".into()));
        }
        for (i, p) in pairs.iter().enumerate() {
            if p.good.iter().chain(&p.bad).any(|&q| q >= num_states) {
                return Err(AutomatonError::Validation(format!(
                    "acceptance pair {i} references a state out of range"
                )));
            }
            if p.good.intersection(&p.bad).next().is_some() {
                log::warn!("acceptance pair {i} has states in both its good and bad set");
            }
        }
        Ok(Self {
            atoms,
            num_states,
            initial,
            delta,
            pairs,
        })
    }

    /// The automaton accepting every word: one state, good in its only pair.
    pub fn universal(atoms: Vec<String>) -> Result<Self, AutomatonError> {
        let letters = 1usize << atoms.len().min(MAX_ATOMS + 1);
        Dra::new(
            atoms,
            1,
            0,
            vec![0; letters],
            vec![RabinPair {
                good: BTreeSet::from([0]),
                bad: BTreeSet::new(),
            }],
        )
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_letters(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    pub fn step(&self, q: usize, letter: Letter) -> usize {
        self.delta[q * self.num_letters() + letter.0 as usize]
    }

    /// Builds a letter from atom names; unknown names are an error.
    pub fn letter<S: AsRef<str>>(&self, names: &[S]) -> Result<Letter, AutomatonError> {
        let index: HashMap<&str, usize> =
            self.atoms.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut bits = 0u32;
        for n in names {
            let i = index
                .get(n.as_ref())
                .ok_or_else(|| AutomatonError::UnknownAtom(n.as_ref().to_string()))?;
            bits |= 1 << i;
        }
        Ok(Letter(bits))
    }

    /// Decides acceptance of the ultimately periodic word `prefix . cycle^omega`.
    pub fn accepts_lasso(&self, prefix: &[Letter], cycle: &[Letter]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let mut q = self.initial;
        for &l in prefix {
            q = self.step(q, l);
        }
        // States occupied before reading each cycle position; the run is
        // periodic once a (state, position) pair repeats.
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut run = Vec::new();
        let mut pos = 0;
        loop {
            if let Some(&start) = seen.get(&(q, pos)) {
                let inf: BTreeSet<usize> = run[start..].iter().copied().collect();
                return self.pairs.iter().any(|p| {
                    inf.iter().any(|q| p.good.contains(q)) && !inf.iter().any(|q| p.bad.contains(q))
                });
            }
            seen.insert((q, pos), run.len());
            run.push(q);
            q = self.step(q, cycle[pos]);
            pos = (pos + 1) % cycle.len();
        }
    }

    /// For each state, whether some state of `pair`'s good set is reachable
    /// in the transition graph (over all letters).
    pub fn can_reach_good(&self, pair: usize) -> Vec<bool> {
        let good = &self.pairs[pair].good;
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.num_states];
        for q in 0..self.num_states {
            for l in 0..self.num_letters() {
                let t = self.step(q, Letter(l as u32));
                preds[t].push(q);
            }
        }
        let mut reach = vec![false; self.num_states];
        let mut stack: Vec<usize> = good.iter().copied().collect();
        for &g in good {
            reach[g] = true;
        }
        while let Some(t) = stack.pop() {
            for &p in &preds[t] {
                if !reach[p] {
                    reach[p] = true;
                    stack.push(p);
                }
            }
        }
        reach
    }

    /// Copy of this automaton reading letters over `atoms`, a superset of the
    /// current atom list. Extra atoms are ignored.
    pub fn with_atoms(&self, atoms: &[String]) -> Result<Dra, AutomatonError> {
        if atoms.len() > MAX_ATOMS {
            return Err(AutomatonError::TooManyAtoms(atoms.len()));
        }
        let positions: Vec<usize> = self
            .atoms
            .iter()
            .map(|a| {
                atoms
                    .iter()
                    .position(|b| b == a)
                    .ok_or_else(|| AutomatonError::UnknownAtom(a.clone()))
            })
            .collect::<Result<_, _>>()?;
        let letters = 1usize << atoms.len();
        let mut delta = Vec::with_capacity(self.num_states * letters);
        for q in 0..self.num_states {
            for l in 0..letters {
                let own = positions
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| l >> p & 1 == 1)
                    .fold(0u32, |acc, (i, _)| acc | 1 << i);
                delta.push(self.step(q, Letter(own)));
            }
        }
        Dra::new(atoms.to_vec(), self.num_states, self.initial, delta, self.pairs.clone())
    }
}
