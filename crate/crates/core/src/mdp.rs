//! Labeled Markov decision processes and their JSON model format.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row sums must be within this distance of one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// The successor distribution of one enabled action.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub action: usize,
    /// Sparse `(successor, probability)` list; zero entries are omitted.
    pub successors: Vec<(usize, f64)>,
}

/// A labeled MDP over indexed states and a global action list.
///
/// Fields are public so models can be assembled freely; [`validate_mdp`]
/// checks the structural invariants and the rest of the crate assumes them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMdp {
    pub atoms: Vec<String>,
    pub actions: Vec<String>,
    /// Per state, a bitset over `atoms`.
    pub labels: Vec<u64>,
    /// Per state, the enabled actions sorted by action index.
    pub choices: Vec<Vec<Choice>>,
    pub initial: usize,
}

impl LabeledMdp {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn enabled(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    pub fn choice(&self, s: usize, action: usize) -> Option<&Choice> {
        self.choices[s].iter().find(|c| c.action == action)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn has_label(&self, s: usize, atom: usize) -> bool {
        self.labels[s] >> atom & 1 == 1
    }

    pub fn label_names(&self, s: usize) -> Vec<&str> {
        (0..self.atoms.len())
            .filter(|&i| self.has_label(s, i))
            .map(|i| self.atoms[i].as_str())
            .collect()
    }

    /// Transition probability `P(s, a, t)`, zero when absent.
    pub fn probability(&self, s: usize, action: usize, t: usize) -> f64 {
        self.choice(s, action)
            .map(|c| c.successors.iter().filter(|(u, _)| *u == t).map(|(_, p)| p).sum())
            .unwrap_or(0.0)
    }
}

/// A structural problem found by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpIssue {
    #[error("model has no states")]
    NoStates,
    #[error("initial state {0} out of range")]
    InitialOutOfRange(usize),
    #[error("state {state}: no enabled action")]
    NoEnabledAction { state: usize },
    #[error("state {state}: action {action} out of range")]
    UnknownAction { state: usize, action: usize },
    #[error("state {state}: enabled actions not strictly increasing")]
    UnsortedActions { state: usize },
    #[error("state {state}, action {action}: successor {to} out of range")]
    SuccessorOutOfRange { state: usize, action: usize, to: usize },
    #[error("state {state}, action {action}: probability {p} outside [0, 1]")]
    BadProbability { state: usize, action: usize, p: f64 },
    #[error("state {state}, action {action}: probabilities sum to {sum}")]
    NotStochastic { state: usize, action: usize, sum: f64 },
    #[error("state {state}: label references a missing atom")]
    LabelOutOfRange { state: usize },
    #[error("more than 64 atoms")]
    TooManyAtoms,
}

/// Checks every structural invariant; an empty list means the model is valid.
pub fn validate_mdp(m: &LabeledMdp) -> Vec<MdpIssue> {
    let mut issues = Vec::new();
    let n = m.num_states();
    if n == 0 {
        issues.push(MdpIssue::NoStates);
    }
    if m.atoms.len() > 64 {
        issues.push(MdpIssue::TooManyAtoms);
    }
    if m.initial >= n && n > 0 {
        issues.push(MdpIssue::InitialOutOfRange(m.initial));
    }
    if m.choices.len() != n {
        issues.push(MdpIssue::NoStates);
        return issues;
    }
    let label_mask = if m.atoms.len() >= 64 { u64::MAX } else { (1u64 << m.atoms.len()) - 1 };
    for s in 0..n {
        if m.labels[s] & !label_mask != 0 {
            issues.push(MdpIssue::LabelOutOfRange { state: s });
        }
        let choices = &m.choices[s];
        if choices.is_empty() {
            issues.push(MdpIssue::NoEnabledAction { state: s });
        }
        if choices.windows(2).any(|w| w[0].action >= w[1].action) {
            issues.push(MdpIssue::UnsortedActions { state: s });
        }
        for c in choices {
            let action = c.action;
            if action >= m.num_actions() {
                issues.push(MdpIssue::UnknownAction { state: s, action });
            }
            let mut sum = 0.0;
            for &(to, p) in &c.successors {
                if to >= n {
                    issues.push(MdpIssue::SuccessorOutOfRange { state: s, action, to });
                }
                if !(0.0..=1.0).contains(&p) {
                    issues.push(MdpIssue::BadProbability { state: s, action, p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROBABILITY_TOLERANCE || sum.is_nan() {
                issues.push(MdpIssue::NotStochastic { state: s, action, sum });
            }
        }
    }
    issues
}

/// A stationary policy: one global action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationaryPolicy {
    pub choices: Vec<usize>,
}

impl StationaryPolicy {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn action(&self, s: usize) -> usize {
        self.choices[s]
    }
}

// ---------------------------------------------------------------------------
// JSON model format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    atoms: Vec<String>,
    actions: Vec<String>,
    states: Vec<StateEntry>,
    initial: usize,
    transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    labels: Vec<String>,
    enabled: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: usize,
    action: String,
    to: usize,
    p: f64,
}

/// A model file that does not match the schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "schema error: {}", self.message)
        } else {
            write!(f, "schema error at {}: {}", self.path, self.message)
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses JSON text against `T`, reporting the failing field path.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

pub fn serialize_mdp(m: &LabeledMdp) -> String {
    let states = (0..m.num_states())
        .map(|s| StateEntry {
            labels: m.label_names(s).into_iter().map(str::to_string).collect(),
            enabled: m.enabled(s).map(|a| m.actions[a].clone()).collect(),
        })
        .collect();
    let transitions = m
        .choices
        .iter()
        .enumerate()
        .flat_map(|(s, cs)| {
            cs.iter().flat_map(move |c| {
                c.successors.iter().map(move |&(to, p)| TransitionEntry {
                    from: s,
                    action: m.actions[c.action].clone(),
                    to,
                    p,
                })
            })
        })
        .collect();
    let file = ModelFile {
        atoms: m.atoms.clone(),
        actions: m.actions.clone(),
        states,
        initial: m.initial,
        transitions,
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Reads a model file. Only the schema is checked here; run
/// [`validate_mdp`] for the stochastic invariants.
pub fn deserialize_mdp(text: &str) -> Result<LabeledMdp, SchemaError> {
    let file: ModelFile = from_json(text)?;
    if file.atoms.len() > 64 {
        return Err(schema("atoms", "at most 64 atoms are supported"));
    }
    let atom_ix: HashMap<&str, usize> =
        file.atoms.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let action_ix: HashMap<&str, usize> =
        file.actions.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    if atom_ix.len() != file.atoms.len() {
        return Err(schema("atoms", "duplicate atom"));
    }
    if action_ix.len() != file.actions.len() {
        return Err(schema("actions", "duplicate action"));
    }

    let n = file.states.len();
    let mut labels = Vec::with_capacity(n);
    let mut choices: Vec<Vec<Choice>> = Vec::with_capacity(n);
    for (s, st) in file.states.iter().enumerate() {
        let mut bits = 0u64;
        for (j, l) in st.labels.iter().enumerate() {
            let i = atom_ix
                .get(l.as_str())
                .ok_or_else(|| schema(format!("states[{s}].labels[{j}]"), format!("unknown atom {l:?}")))?;
            bits |= 1 << i;
        }
        labels.push(bits);
        let mut acts = Vec::with_capacity(st.enabled.len());
        for (j, a) in st.enabled.iter().enumerate() {
            let i = action_ix.get(a.as_str()).ok_or_else(|| {
                schema(format!("states[{s}].enabled[{j}]"), format!("unknown action {a:?}"))
            })?;
            acts.push(*i);
        }
        acts.sort_unstable();
        if acts.windows(2).any(|w| w[0] == w[1]) {
            return Err(schema(format!("states[{s}].enabled"), "duplicate action"));
        }
        choices.push(
            acts.into_iter()
                .map(|action| Choice {
                    action,
                    successors: Vec::new(),
                })
                .collect(),
        );
    }
    if file.initial >= n {
        return Err(schema("initial", format!("state {} out of range", file.initial)));
    }
    for (k, t) in file.transitions.iter().enumerate() {
        let path = |field: &str| format!("transitions[{k}].{field}");
        if t.from >= n {
            return Err(schema(path("from"), format!("state {} out of range", t.from)));
        }
        if t.to >= n {
            return Err(schema(path("to"), format!("state {} out of range", t.to)));
        }
        let a = *action_ix
            .get(t.action.as_str())
            .ok_or_else(|| schema(path("action"), format!("unknown action {:?}", t.action)))?;
        let choice = choices[t.from]
            .iter_mut()
            .find(|c| c.action == a)
            .ok_or_else(|| {
                schema(path("action"), format!("action {:?} not enabled at state {}", t.action, t.from))
            })?;
        if choice.successors.iter().any(|(to, _)| *to == t.to) {
            return Err(schema(path("to"), "duplicate transition"));
        }
        choice.successors.push((t.to, t.p));
    }
    Ok(LabeledMdp {
        atoms: file.atoms,
        actions: file.actions,
        labels,
        choices,
        initial: file.initial,
    })
}

// ---------------------------------------------------------------------------
// JSON policy format

/// Sizes of the product a policy file belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductMeta {
    pub mdp_states: usize,
    pub dra_states: usize,
}

/// On-disk policy: one action name per product state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub choices: Vec<String>,
    pub product_meta: ProductMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<f64>>,
}

impl PolicyFile {
    pub fn new(pi: &StationaryPolicy, actions: &[String], meta: ProductMeta, utilities: Option<Vec<f64>>) -> Self {
        Self {
            choices: pi.choices.iter().map(|&a| actions[a].clone()).collect(),
            product_meta: meta,
            utilities,
        }
    }

    /// Resolves action names against `actions`.
    pub fn to_policy(&self, actions: &[String]) -> Result<StationaryPolicy, SchemaError> {
        self.choices
            .iter()
            .enumerate()
            .map(|(i, name)| {
                actions
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| schema(format!("choices[{i}]"), format!("unknown action {name:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(StationaryPolicy::new)
    }
}

pub fn serialize_policy(f: &PolicyFile) -> String {
    serde_json::to_string_pretty(f).expect("policy serializes")
}

/// Reads a policy file and checks its length against `product_meta`.
pub fn deserialize_policy(text: &str) -> Result<PolicyFile, SchemaError> {
    let f: PolicyFile = from_json(text)?;
    let n = f
        .product_meta
        .mdp_states
        .checked_mul(f.product_meta.dra_states)
        .ok_or_else(|| schema("product_meta", "product size overflows"))?;
    if f.choices.len() != n {
        return Err(schema(
            "choices",
            format!("{} entries, expected {} product states", f.choices.len(), n),
        ));
    }
    if let Some(u) = &f.utilities {
        if u.len() != n {
            return Err(schema("utilities", format!("{} entries, expected {n}", u.len())));
        }
    }
    Ok(f)
}
