//! Direct construction of a one-pair Rabin automaton for fragment formulas.
//!
//! The automaton is the synchronous product of three pieces:
//!
//! * a safety monitor for `G safe`. Its state is the obligation still owed by
//!   the next `d` letters (`d` = X-depth of `safe`), stored as a truth table
//!   over those letters' relevant atoms. An unsatisfiable obligation collapses
//!   into a single absorbing violation sink.
//! * a round-robin counter over the `GF p` goals with a distinguished
//!   round-complete value.
//! * a one-bit watcher recording whether the last letter satisfied every
//!   `FG q` goal.
//!
//! Good states are round-complete states whose watcher bit is set; bad states
//! are the sink and every state whose watcher bit is clear.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{AutomatonError, Dra, RabinPair, MAX_ATOMS};
use crate::ltl::{atoms, FragmentSpec, LtlFormula};

/// Bound on `depth * relevant atoms` for the monitor's truth tables.
const MAX_WINDOW_BITS: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Monitor {
    Obligation(Vec<bool>),
    Sink,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Combined {
    monitor: Monitor,
    counter: usize,
    stable: bool,
}

struct SafetyTables {
    atom_bits: Vec<usize>,
    depth: usize,
    /// `safe` evaluated on a window of `depth + 1` letters.
    table: Vec<bool>,
}

impl SafetyTables {
    fn new(safe: &LtlFormula, atom_index: &HashMap<&str, usize>) -> Result<Self, AutomatonError> {
        let depth = safe
            .next_depth()
            .ok_or_else(|| AutomatonError::Fragment("safety conjunct uses U, F or G".into()))?;
        let names: Vec<String> = atoms(safe).into_iter().collect();
        let local: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let m = names.len();
        if depth * m > MAX_WINDOW_BITS {
            return Err(AutomatonError::Fragment(format!(
                "safety window of {depth} steps over {m} atoms is too large"
            )));
        }
        let atom_bits = names.iter().map(|n| atom_index[n.as_str()]).collect();
        let width = (depth + 1) * m;
        let table = (0..1usize << width)
            .map(|w| eval_window(safe, 0, w, m, &local))
            .collect();
        Ok(Self {
            atom_bits,
            depth,
            table,
        })
    }

    fn relevant(&self) -> usize {
        self.atom_bits.len()
    }

    fn project(&self, letter: usize) -> usize {
        self.atom_bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| letter >> b & 1 == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    fn initial(&self) -> Monitor {
        Monitor::Obligation(vec![true; 1 << (self.depth * self.relevant())])
    }

    fn step(&self, current: &Monitor, projected: usize) -> Monitor {
        let Monitor::Obligation(owed) = current else {
            return Monitor::Sink;
        };
        let m = self.relevant();
        let owed_bits = self.depth * m;
        let owed_mask = (1usize << owed_bits) - 1;
        let next: Vec<bool> = (0..1usize << owed_bits)
            .map(|rest| {
                let window = projected | rest << m;
                self.table[window] && owed[window & owed_mask]
            })
            .collect();
        if next.iter().any(|&b| b) {
            Monitor::Obligation(next)
        } else {
            Monitor::Sink
        }
    }
}

fn eval_window(
    f: &LtlFormula,
    offset: usize,
    window: usize,
    m: usize,
    local: &HashMap<&str, usize>,
) -> bool {
    use LtlFormula::*;
    match f {
        True => true,
        False => false,
        Atom(a) => window >> (offset * m + local[a.as_str()]) & 1 == 1,
        Not(g) => !eval_window(g, offset, window, m, local),
        And(gs) => gs.iter().all(|g| eval_window(g, offset, window, m, local)),
        Or(gs) => gs.iter().any(|g| eval_window(g, offset, window, m, local)),
        Implies(a, b) => {
            !eval_window(a, offset, window, m, local) || eval_window(b, offset, window, m, local)
        }
        Next(g) => eval_window(g, offset + 1, window, m, local),
        Until(..) | Eventually(_) | Always(_) => unreachable!("checked by next_depth"),
    }
}

fn eval_letter(f: &LtlFormula, letter: usize, atom_index: &HashMap<&str, usize>) -> bool {
    f.eval_propositional(&|a| letter >> atom_index[a] & 1 == 1)
        .expect("fragment goals are propositional")
}

/// Builds a deterministic Rabin automaton with a single pair accepting exactly
/// the words satisfying `spec`, reading letters over `atom_order`.
pub fn translate_fragment(spec: &FragmentSpec, atom_order: &[String]) -> Result<Dra, AutomatonError> {
    if spec.is_empty() {
        return Err(AutomatonError::EmptySpec);
    }
    if atom_order.len() > MAX_ATOMS {
        return Err(AutomatonError::TooManyAtoms(atom_order.len()));
    }
    let atom_index: HashMap<&str, usize> =
        atom_order.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    for a in atoms(&spec.to_formula()) {
        if !atom_index.contains_key(a.as_str()) {
            return Err(AutomatonError::UnknownAtom(a));
        }
    }
    for p in spec.recurrence.iter().chain(&spec.stability) {
        if !p.is_propositional() {
            return Err(AutomatonError::Fragment(format!("goal {p} is not propositional")));
        }
    }
    let safety = spec
        .safety
        .as_ref()
        .map(|s| SafetyTables::new(s, &atom_index))
        .transpose()?;

    let letters = 1usize << atom_order.len();
    let goals = spec.recurrence.len();
    // Per-letter facts shared by every state.
    let recurrence: Vec<Vec<bool>> = (0..letters)
        .map(|l| spec.recurrence.iter().map(|p| eval_letter(p, l, &atom_index)).collect())
        .collect();
    let stable: Vec<bool> = (0..letters)
        .map(|l| spec.stability.iter().all(|q| eval_letter(q, l, &atom_index)))
        .collect();
    let projected: Vec<usize> = (0..letters)
        .map(|l| safety.as_ref().map_or(0, |s| s.project(l)))
        .collect();

    let initial = Combined {
        monitor: safety
            .as_ref()
            .map_or(Monitor::Obligation(vec![true]), SafetyTables::initial),
        counter: 0,
        stable: true,
    };
    let mut ids: HashMap<Combined, usize> = HashMap::new();
    let mut states: Vec<Combined> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(initial.clone(), 0);
    states.push(initial.clone());
    queue.push_back(initial);
    let mut delta = Vec::new();
    let mut sink_id = None;

    while let Some(cur) = queue.pop_front() {
        for l in 0..letters {
            let next = if cur.monitor == Monitor::Sink {
                cur.clone()
            } else {
                let monitor = match &safety {
                    Some(s) => s.step(&cur.monitor, projected[l]),
                    None => cur.monitor.clone(),
                };
                if monitor == Monitor::Sink {
                    Combined {
                        monitor,
                        counter: 0,
                        stable: true,
                    }
                } else {
                    let mut j = if cur.counter == goals { 0 } else { cur.counter };
                    while j < goals && recurrence[l][j] {
                        j += 1;
                    }
                    Combined {
                        monitor,
                        counter: j,
                        stable: stable[l],
                    }
                }
            };
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    ids.insert(next.clone(), id);
                    states.push(next.clone());
                    queue.push_back(next.clone());
                    id
                }
            };
            if next.monitor == Monitor::Sink {
                sink_id = Some(id);
            }
            delta.push(id);
        }
    }

    let good: BTreeSet<usize> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.monitor != Monitor::Sink && s.counter == goals && s.stable)
        .map(|(i, _)| i)
        .collect();
    let bad: BTreeSet<usize> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.monitor == Monitor::Sink || !s.stable)
        .map(|(i, _)| i)
        .collect();
    debug_assert!(sink_id.map_or(true, |s| bad.contains(&s)));
    Dra::new(
        atom_order.to_vec(),
        states.len(),
        0,
        delta,
        vec![RabinPair { good, bad }],
    )
}
