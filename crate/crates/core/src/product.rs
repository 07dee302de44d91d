//! Rabin-weighted product of a labeled MDP and a DRA.
//!
//! Product state `(s, q)` has flat index `q * |S| + s`. From `(s, q)` the
//! automaton reads the label of the source state, so every successor of
//! `(s, q)` carries the DRA state `δ(q, L(s))`.

use serde::Serialize;
use thiserror::Error;

use crate::automata::{Dra, Letter};
use crate::mdp::{Choice, LabeledMdp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductError {
    #[error("automaton atom {0:?} is not an atom of the model")]
    AtomMismatch(String),
    #[error("invalid reward scheme: {0}")]
    Reward(String),
}

#[derive(Debug, Clone)]
pub struct ProductMdp {
    mdp: LabeledMdp,
    dra: Dra,
    /// DRA letter read in each MDP state.
    letters: Vec<Letter>,
    /// Per pair, membership of each DRA state in the good and bad sets.
    good: Vec<Vec<bool>>,
    bad: Vec<Vec<bool>>,
}

/// Reward weights for one acceptance pair (0-based index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardScheme {
    pub pair: usize,
    pub w_g: f64,
    pub w_b: f64,
}

impl RewardScheme {
    pub fn new(pair: usize, w_g: f64, w_b: f64) -> Self {
        Self { pair, w_g, w_b }
    }

    pub fn validate(&self, p: &ProductMdp) -> Result<(), ProductError> {
        if !(self.w_g > 0.0 && self.w_g.is_finite()) {
            return Err(ProductError::Reward(format!("w_G = {} must be positive", self.w_g)));
        }
        if !(self.w_b < 0.0 && self.w_b.is_finite()) {
            return Err(ProductError::Reward(format!("w_B = {} must be negative", self.w_b)));
        }
        if self.pair >= p.num_pairs() {
            return Err(ProductError::Reward(format!(
                "pair {} out of range, automaton has {}",
                self.pair + 1,
                p.num_pairs()
            )));
        }
        Ok(())
    }
}

pub fn build_product(mdp: &LabeledMdp, dra: &Dra) -> Result<ProductMdp, ProductError> {
    let positions: Vec<usize> = dra
        .atoms()
        .iter()
        .map(|a| mdp.atom_index(a).ok_or_else(|| ProductError::AtomMismatch(a.clone())))
        .collect::<Result<_, _>>()?;
    let letters = (0..mdp.num_states())
        .map(|s| {
            Letter(
                positions
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| mdp.has_label(s, p))
                    .fold(0, |acc, (i, _)| acc | 1 << i),
            )
        })
        .collect();
    let member = |set: &std::collections::BTreeSet<usize>| {
        (0..dra.num_states()).map(|q| set.contains(&q)).collect::<Vec<bool>>()
    };
    Ok(ProductMdp {
        mdp: mdp.clone(),
        dra: dra.clone(),
        letters,
        good: dra.pairs().iter().map(|p| member(&p.good)).collect(),
        bad: dra.pairs().iter().map(|p| member(&p.bad)).collect(),
    })
}

impl ProductMdp {
    pub fn mdp(&self) -> &LabeledMdp {
        &self.mdp
    }

    pub fn dra(&self) -> &Dra {
        &self.dra
    }

    pub fn num_states(&self) -> usize {
        self.mdp.num_states() * self.dra.num_states()
    }

    pub fn num_mdp_states(&self) -> usize {
        self.mdp.num_states()
    }

    pub fn num_dra_states(&self) -> usize {
        self.dra.num_states()
    }

    pub fn num_pairs(&self) -> usize {
        self.dra.pairs().len()
    }

    pub fn index(&self, s: usize, q: usize) -> usize {
        q * self.mdp.num_states() + s
    }

    pub fn mdp_state(&self, sp: usize) -> usize {
        sp % self.mdp.num_states()
    }

    pub fn dra_state(&self, sp: usize) -> usize {
        sp / self.mdp.num_states()
    }

    pub fn initial(&self) -> usize {
        self.index(self.mdp.initial, self.dra.initial())
    }

    /// The letter the automaton reads in MDP state `s`.
    pub fn letter(&self, s: usize) -> Letter {
        self.letters[s]
    }

    /// DRA component shared by every successor of `sp`.
    pub fn next_dra_state(&self, sp: usize) -> usize {
        self.dra.step(self.dra_state(sp), self.letters[self.mdp_state(sp)])
    }

    pub fn choices(&self, sp: usize) -> &[Choice] {
        &self.mdp.choices[self.mdp_state(sp)]
    }

    pub fn enabled(&self, sp: usize) -> impl Iterator<Item = usize> + '_ {
        self.mdp.enabled(self.mdp_state(sp))
    }

    pub fn is_enabled(&self, sp: usize, action: usize) -> bool {
        self.choices(sp).iter().any(|c| c.action == action)
    }

    /// Product successors of `sp` under `choice`, which must be one of
    /// [`Self::choices`]`(sp)`.
    pub fn successors<'a>(
        &'a self,
        sp: usize,
        choice: &'a Choice,
    ) -> impl Iterator<Item = (usize, f64)> + 'a {
        let base = self.next_dra_state(sp) * self.mdp.num_states();
        choice.successors.iter().map(move |&(t, p)| (base + t, p))
    }

    /// Product successors of `sp` under `action`; empty when not enabled.
    pub fn successors_of(&self, sp: usize, action: usize) -> Vec<(usize, f64)> {
        self.choices(sp)
            .iter()
            .find(|c| c.action == action)
            .map(|c| self.successors(sp, c).collect())
            .unwrap_or_default()
    }

    pub fn in_good(&self, pair: usize, sp: usize) -> bool {
        self.good[pair][self.dra_state(sp)]
    }

    pub fn in_bad(&self, pair: usize, sp: usize) -> bool {
        self.bad[pair][self.dra_state(sp)]
    }

    /// Product state with the DRA component replaced by its initial state.
    pub fn reset_rabin_state(&self, sp: usize) -> usize {
        self.index(self.mdp_state(sp), self.dra.initial())
    }

    /// Equivalence class of `sp`: product states sharing an MDP state.
    pub fn equivalence_class(&self, sp: usize) -> usize {
        self.mdp_state(sp)
    }

    pub fn num_classes(&self) -> usize {
        self.mdp.num_states()
    }
}

/// Per-state rewards: `w_g` on the pair's good states, `w_b` on its bad
/// states, zero elsewhere. Bad membership wins on overlap.
pub fn reward_vector(p: &ProductMdp, r: &RewardScheme) -> Vec<f64> {
    let i = r.pair;
    if p.good[i].iter().zip(&p.bad[i]).any(|(g, b)| *g && *b) {
        log::warn!(
            "pair {} has states that are both good and bad; they are rewarded as bad",
            i + 1
        );
    }
    (0..p.num_states())
        .map(|sp| {
            if p.in_bad(i, sp) {
                r.w_b
            } else if p.in_good(i, sp) {
                r.w_g
            } else {
                0.0
            }
        })
        .collect()
}

/// Lifted acceptance sets of the product as flat state indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AcceptanceSidecar {
    pub mdp_states: usize,
    pub dra_states: usize,
    pub pairs: Vec<LiftedPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftedPair {
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
}

impl ProductMdp {
    /// The product as a plain labeled MDP; states carry the labels of their
    /// MDP component.
    pub fn to_labeled_mdp(&self) -> LabeledMdp {
        let n = self.num_states();
        LabeledMdp {
            atoms: self.mdp.atoms.clone(),
            actions: self.mdp.actions.clone(),
            labels: (0..n).map(|sp| self.mdp.labels[self.mdp_state(sp)]).collect(),
            choices: (0..n)
                .map(|sp| {
                    self.choices(sp)
                        .iter()
                        .map(|c| Choice {
                            action: c.action,
                            successors: self.successors(sp, c).collect(),
                        })
                        .collect()
                })
                .collect(),
            initial: self.initial(),
        }
    }

    pub fn acceptance_sidecar(&self) -> AcceptanceSidecar {
        let n = self.num_states();
        AcceptanceSidecar {
            mdp_states: self.num_mdp_states(),
            dra_states: self.num_dra_states(),
            pairs: (0..self.num_pairs())
                .map(|i| LiftedPair {
                    good: (0..n).filter(|&sp| self.in_good(i, sp)).collect(),
                    bad: (0..n).filter(|&sp| self.in_bad(i, sp)).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::translate_fragment;
    use crate::env::{build_grid_world, GridConfig};
    use crate::ltl::{parse_ltl, to_fragment};
    use crate::mdp::validate_mdp;

    fn grid_product() -> ProductMdp {
        let m = build_grid_world(&GridConfig::default()).unwrap();
        let spec = to_fragment(&parse_ltl("G F a & G F b & G !c").unwrap()).unwrap();
        let d = translate_fragment(&spec, &m.atoms).unwrap();
        build_product(&m, &d).unwrap()
    }

    #[test]
    fn grid_product_size() {
        let p = grid_product();
        assert_eq!(p.num_states(), 25 * p.num_dra_states());
        assert!(validate_mdp(&p.to_labeled_mdp()).is_empty());
    }

    #[test]
    fn universal_product_is_the_mdp() {
        let m = build_grid_world(&GridConfig::default()).unwrap();
        let p = build_product(&m, &Dra::universal(vec![]).unwrap()).unwrap();
        assert_eq!(p.to_labeled_mdp(), m);
    }

    #[test]
    fn atom_mismatch() {
        let m = build_grid_world(&GridConfig::default()).unwrap();
        let d = Dra::universal(vec!["zz".into()]).unwrap();
        assert_eq!(
            build_product(&m, &d).unwrap_err(),
            ProductError::AtomMismatch("zz".into())
        );
    }

    #[test]
    fn rewards_and_classes() {
        let p = grid_product();
        let w = reward_vector(&p, &RewardScheme::new(0, 500.0, -500.0));
        let pair = &p.dra().pairs()[0];
        let pos = w.iter().filter(|&&x| x > 0.0).count();
        let neg = w.iter().filter(|&&x| x < 0.0).count();
        assert_eq!(pos, 25 * pair.good.len());
        assert_eq!(neg, 25 * pair.bad.len());
        assert_eq!(p.equivalence_class(p.index(3, 0)), p.equivalence_class(p.index(3, 2)));
        assert_ne!(p.equivalence_class(p.index(3, 0)), p.equivalence_class(p.index(4, 0)));
        assert_eq!(p.num_classes(), 25);
        assert_eq!(p.reset_rabin_state(p.index(7, 3)), p.index(7, p.dra().initial()));
    }

    #[test]
    fn reward_scheme_validation() {
        let p = grid_product();
        assert!(RewardScheme::new(0, 1.0, -1.0).validate(&p).is_ok());
        assert!(RewardScheme::new(1, 1.0, -1.0).validate(&p).is_err());
        assert!(RewardScheme::new(0, 0.0, -1.0).validate(&p).is_err());
        assert!(RewardScheme::new(0, 1.0, 0.0).validate(&p).is_err());
    }
}
