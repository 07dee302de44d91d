use std::collections::VecDeque;

use crate::mdp::StationaryPolicy;
use crate::product::ProductMdp;
use crate::solver::{check_policy, SolverError};

/// The Markov chain a stationary policy induces on the product, restricted
/// to states reachable from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    /// Product index of each chain state; chain state 0 is the initial state.
    pub states: Vec<usize>,
    /// Outgoing edges as `(chain state, probability)`, zero entries omitted.
    pub edges: Vec<Vec<(usize, f64)>>,
}

impl MarkovChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn induced_chain(p: &ProductMdp, pi: &StationaryPolicy) -> Result<MarkovChain, SolverError> {
    check_policy(p, pi)?;
    let mut local = vec![usize::MAX; p.num_states()];
    let mut states = vec![p.initial()];
    local[p.initial()] = 0;
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([p.initial()]);
    while let Some(sp) = queue.pop_front() {
        let mut out = Vec::new();
        for (t, pr) in p.successors_of(sp, pi.action(sp)) {
            if pr <= 0.0 {
                continue;
            }
            if local[t] == usize::MAX {
                local[t] = states.len();
                states.push(t);
                queue.push_back(t);
            }
            out.push((local[t], pr));
        }
        edges.push(out);
    }
    Ok(MarkovChain { states, edges })
}

/// Transient states and recurrent classes of a chain, as chain indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    pub transient: Vec<usize>,
    /// Closed strongly connected components, each sorted.
    pub recurrent: Vec<Vec<usize>>,
}

/// Strongly connected components in reverse topological order (iterative
/// Tarjan).
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

pub fn decompose(chain: &MarkovChain) -> ChainDecomposition {
    let adj: Vec<Vec<usize>> = chain
        .edges
        .iter()
        .map(|e| e.iter().map(|&(t, _)| t).collect())
        .collect();
    let comps = strongly_connected_components(&adj);
    let mut comp_of = vec![0; chain.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut transient = Vec::new();
    let mut recurrent = Vec::new();
    for (c, comp) in comps.into_iter().enumerate() {
        let closed = comp.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == c));
        if closed {
            recurrent.push(comp);
        } else {
            transient.extend(comp);
        }
    }
    transient.sort_unstable();
    recurrent.sort();
    ChainDecomposition {
        transient,
        recurrent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(edges: Vec<Vec<usize>>) -> MarkovChain {
        MarkovChain {
            states: (0..edges.len()).collect(),
            edges: edges
                .into_iter()
                .map(|e| {
                    let k = e.len() as f64;
                    e.into_iter().map(|t| (t, 1.0 / k)).collect()
                })
                .collect(),
        }
    }

    #[test]
    fn transient_then_absorbing() {
        let d = decompose(&chain(vec![vec![1], vec![1]]));
        assert_eq!(d.transient, vec![0]);
        assert_eq!(d.recurrent, vec![vec![1]]);
    }

    #[test]
    fn all_absorbing() {
        let d = decompose(&chain(vec![vec![0], vec![1], vec![2]]));
        assert!(d.transient.is_empty());
        assert_eq!(d.recurrent, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn cycle_with_exit() {
        // 0 <-> 1 -> 2 <-> 3
        let d = decompose(&chain(vec![vec![1], vec![0, 2], vec![3], vec![2]]));
        assert_eq!(d.transient, vec![0, 1]);
        assert_eq!(d.recurrent, vec![vec![2, 3]]);
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let edges = (0..n).map(|i| vec![(i + 1).min(n - 1)]).collect();
        let d = decompose(&chain(edges));
        assert_eq!(d.recurrent, vec![vec![n - 1]]);
        assert_eq!(d.transient.len(), n - 1);
    }
}
