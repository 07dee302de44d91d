//! Simulation of controllers on the product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdp::StationaryPolicy;
use crate::product::ProductMdp;

/// Anything that picks an action in a product state. Stateful controllers
/// (such as fixed-cycle signal plans) keep their own memory.
pub trait Controller {
    fn action(&mut self, p: &ProductMdp, sp: usize) -> usize;
}

impl Controller for StationaryPolicy {
    fn action(&mut self, _p: &ProductMdp, sp: usize) -> usize {
        self.choices[sp]
    }
}

impl<C: Controller + ?Sized> Controller for &mut C {
    fn action(&mut self, p: &ProductMdp, sp: usize) -> usize {
        (**self).action(p, sp)
    }
}

/// Draws a successor from a sparse distribution.
pub fn sample_successor<R: Rng + ?Sized>(rng: &mut R, successors: &[(usize, f64)]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(t, p) in successors {
        acc += p;
        if u < acc {
            return t;
        }
    }
    successors.last().expect("nonempty distribution").0
}

/// One product transition from `sp` under `action`.
pub fn step<R: Rng + ?Sized>(p: &ProductMdp, sp: usize, action: usize, rng: &mut R) -> usize {
    let succ = p.successors_of(sp, action);
    assert!(!succ.is_empty(), "action {action} not enabled in product state {sp}");
    sample_successor(rng, &succ)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub product_state: usize,
    pub mdp_state: usize,
    pub dra_state: usize,
    pub action: usize,
    pub reward: f64,
    pub labels: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

/// Runs `controller` from the product's initial state for `steps`
/// transitions. The trace has `steps + 1` records; each holds the action the
/// controller chose in that state.
pub fn simulate<C: Controller>(
    p: &ProductMdp,
    controller: &mut C,
    steps: usize,
    rewards: &[f64],
    seed: u64,
) -> Trace {
    simulate_from(p, controller, p.initial(), steps, rewards, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn simulate_from<C: Controller, R: Rng + ?Sized>(
    p: &ProductMdp,
    controller: &mut C,
    start: usize,
    steps: usize,
    rewards: &[f64],
    rng: &mut R,
) -> Trace {
    let mut records = Vec::with_capacity(steps + 1);
    let mut sp = start;
    for k in 0..=steps {
        let action = controller.action(p, sp);
        let s = p.mdp_state(sp);
        records.push(TraceRecord {
            step: k,
            product_state: sp,
            mdp_state: s,
            dra_state: p.dra_state(sp),
            action,
            reward: rewards.get(sp).copied().unwrap_or(0.0),
            labels: p.mdp().labels[s],
        });
        if k < steps {
            sp = step(p, sp, action, rng);
        }
    }
    Trace { records }
}

impl Trace {
    /// CSV with header `step,mdp_state,dra_state,action,reward,labels`;
    /// labels are `;`-joined atom names. `extra` adds named columns per row.
    pub fn to_csv(&self, p: &ProductMdp, extra: &[(&str, &dyn Fn(&TraceRecord) -> String)]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["step", "mdp_state", "dra_state", "action", "reward", "labels"];
        header.extend(extra.iter().map(|(name, _)| *name));
        // writing into a Vec cannot fail
        w.write_record(&header).expect("in-memory write");
        let m = p.mdp();
        for r in &self.records {
            let mut row = vec![
                r.step.to_string(),
                r.mdp_state.to_string(),
                r.dra_state.to_string(),
                m.actions[r.action].clone(),
                r.reward.to_string(),
                m.label_names(r.mdp_state).join(";"),
            ];
            row.extend(extra.iter().map(|(_, f)| f(r)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of UTF-8 fields")
    }
}
