//! Two-intersection traffic network abstracted to a finite MDP.
//!
//! Signal `v1` serves link 1 or link 3, signal `v2` serves link 2 or link 4.
//! Traffic leaving links 1 and 3 partly turns into link 2; everything else
//! leaves the network. A discrete state is the subinterval of each queue plus
//! the last applied action. Transition probabilities are Monte-Carlo estimates
//! of one step of the continuous queue dynamics started uniformly inside the
//! current subintervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::mdp::{Choice, LabeledMdp};
use crate::product::ProductMdp;
use crate::rng::derive_seed;
use crate::sim::Controller;

pub const TRAFFIC_ATOMS: [&str; 5] = ["x1le30", "x2le30", "x3le10", "x4le10", "sv2"];
pub const TRAFFIC_ACTIONS: [&str; 4] = ["(1,2)", "(1,4)", "(3,2)", "(3,4)"];

/// The traffic objective over [`TRAFFIC_ATOMS`].
pub const TRAFFIC_FORMULA: &str = "F G (x1le30 & x2le30) & G F x3le10 & G F x4le10 \
     & G ((sv2 & X !sv2) -> (X X !sv2 & X X X !sv2))";

/// Seconds of real time per model step.
pub const STEP_SECONDS: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    /// Capacity of links 1 to 4, in vehicles.
    pub capacities: [f64; 4],
    /// Per link, strictly increasing boundaries from 0 to the capacity.
    pub boundaries: [Vec<f64>; 4],
    /// Vehicles an actuated link can discharge per step.
    pub saturation: [f64; 4],
    /// Fraction of the outflow of links 1 and 3 that enters link 2.
    pub turn_to_link2: [f64; 2],
    /// Mean Poisson arrivals per step from outside the network.
    pub arrival_means: [f64; 4],
    pub samples: usize,
    /// Estimated probabilities below this are dropped before renormalizing.
    pub prune_below: f64,
    pub seed: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            capacities: [40.0, 50.0, 30.0, 30.0],
            boundaries: [
                vec![0.0, 10.0, 20.0, 30.0, 40.0],
                vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
                vec![0.0, 10.0, 30.0],
                vec![0.0, 10.0, 30.0],
            ],
            saturation: [15.0, 12.0, 10.0, 10.0],
            turn_to_link2: [0.7, 0.5],
            arrival_means: [8.0, 0.0, 2.0, 2.0],
            samples: 20_000,
            prune_below: 1e-3,
            seed: 0x7261_6269_6e00,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("Monte-Carlo sample count must be positive")]
    NoSamples,
    #[error("link {0}: boundaries must increase strictly from 0 to the capacity")]
    Boundaries(usize),
    #[error("link {link}: threshold {threshold} is not a subinterval boundary")]
    ThresholdNotAligned { link: usize, threshold: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Thresholds behind the queue atoms, per link.
const THRESHOLDS: [f64; 4] = [30.0, 30.0, 10.0, 10.0];

/// Index arithmetic for the discrete traffic state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficLayout {
    boundaries: [Vec<f64>; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficState {
    pub intervals: [usize; 4],
    pub last_action: usize,
}

impl TrafficLayout {
    pub fn new(boundaries: [Vec<f64>; 4]) -> Self {
        Self { boundaries }
    }

    pub fn intervals(&self, link: usize) -> usize {
        self.boundaries[link].len() - 1
    }

    pub fn num_states(&self) -> usize {
        (0..4).map(|l| self.intervals(l)).product::<usize>() * TRAFFIC_ACTIONS.len()
    }

    pub fn encode(&self, st: TrafficState) -> usize {
        let mut idx = st.last_action;
        for l in (0..4).rev() {
            idx = idx * self.intervals(l) + st.intervals[l];
        }
        idx
    }

    pub fn decode(&self, mut idx: usize) -> TrafficState {
        let mut intervals = [0; 4];
        for (l, slot) in intervals.iter_mut().enumerate() {
            let n = self.intervals(l);
            *slot = idx % n;
            idx /= n;
        }
        TrafficState {
            intervals,
            last_action: idx,
        }
    }

    /// Subinterval holding `x`: `[b0, b1]`, then `(b_i, b_{i+1}]`.
    pub fn interval_of(&self, link: usize, x: f64) -> usize {
        let b = &self.boundaries[link];
        let n = b.len() - 1;
        (1..n).find(|&i| x <= b[i]).map_or(n - 1, |i| i - 1)
    }

    pub fn bounds(&self, link: usize, interval: usize) -> (f64, f64) {
        let b = &self.boundaries[link];
        (b[interval], b[interval + 1])
    }

    /// Representative queue lengths (subinterval midpoints) of state `idx`.
    pub fn midpoints(&self, idx: usize) -> [f64; 4] {
        let st = self.decode(idx);
        std::array::from_fn(|l| {
            let (lo, hi) = self.bounds(l, st.intervals[l]);
            (lo + hi) / 2.0
        })
    }
}

pub fn actuates(action: usize, link: usize) -> bool {
    match link {
        0 => action <= 1,
        2 => action >= 2,
        1 => action % 2 == 0,
        3 => action % 2 == 1,
        _ => false,
    }
}

impl TrafficConfig {
    /// A model of the same network built from nominal parameters that
    /// differ from the defaults: faster link-2 discharge and a lower
    /// link 1 to link 2 turn ratio.
    pub fn approximate() -> Self {
        Self {
            saturation: [15.0, 15.0, 10.0, 10.0],
            turn_to_link2: [0.5, 0.5],
            seed: 0x6170_7072_6f78,
            ..Self::default()
        }
    }

    pub fn layout(&self) -> TrafficLayout {
        TrafficLayout::new(self.boundaries.clone())
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.samples == 0 {
            return Err(TrafficError::NoSamples);
        }
        for l in 0..4 {
            let b = &self.boundaries[l];
            let ok = b.len() >= 2
                && b[0] == 0.0
                && b.windows(2).all(|w| w[0] < w[1])
                && *b.last().unwrap() == self.capacities[l];
            if !ok {
                return Err(TrafficError::Boundaries(l + 1));
            }
            if !b.contains(&THRESHOLDS[l]) {
                return Err(TrafficError::ThresholdNotAligned {
                    link: l + 1,
                    threshold: THRESHOLDS[l],
                });
            }
            if !(self.saturation[l] > 0.0) {
                return Err(TrafficError::Parameter(format!("saturation of link {}", l + 1)));
            }
            if !(self.arrival_means[l] >= 0.0) || !self.arrival_means[l].is_finite() {
                return Err(TrafficError::Parameter(format!("arrival mean of link {}", l + 1)));
            }
        }
        if self.turn_to_link2.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(TrafficError::Parameter("turn ratio outside [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.prune_below) {
            return Err(TrafficError::Parameter("prune threshold".into()));
        }
        Ok(())
    }

    /// One step of the continuous queue dynamics.
    pub fn step_queues(&self, x: [f64; 4], action: usize, arrivals: [f64; 4]) -> [f64; 4] {
        let cap = self.capacities;
        let out2 = if actuates(action, 1) { x[1].min(self.saturation[1]) } else { 0.0 };
        let out4 = if actuates(action, 3) { x[3].min(self.saturation[3]) } else { 0.0 };
        let (feeder, ratio) = if actuates(action, 0) {
            (0, self.turn_to_link2[0])
        } else {
            (2, self.turn_to_link2[1])
        };
        let mut out_feeder = x[feeder].min(self.saturation[feeder]);
        let space2 = cap[1] - (x[1] - out2);
        if ratio > 0.0 && ratio * out_feeder > space2 {
            out_feeder = space2 / ratio;
        }
        let mut next = x;
        next[feeder] -= out_feeder;
        next[1] += ratio * out_feeder - out2;
        next[3] -= out4;
        for l in 0..4 {
            next[l] = (next[l] + arrivals[l]).clamp(0.0, cap[l]);
        }
        next
    }

    pub fn sample_arrivals<R: Rng>(&self, rng: &mut R) -> [f64; 4] {
        std::array::from_fn(|l| {
            let mean = self.arrival_means[l];
            if mean > 0.0 {
                Poisson::new(mean).expect("validated mean").sample(rng)
            } else {
                0.0
            }
        })
    }

    fn estimate_row(&self, layout: &TrafficLayout, s: usize, action: usize) -> Vec<(usize, f64)> {
        let st = layout.decode(s);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[s as u64, action as u64]));
        let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
        for _ in 0..self.samples {
            let x: [f64; 4] = std::array::from_fn(|l| {
                let (lo, hi) = layout.bounds(l, st.intervals[l]);
                rng.random_range(lo..=hi)
            });
            let arrivals = self.sample_arrivals(&mut rng);
            let next = self.step_queues(x, action, arrivals);
            let t = layout.encode(TrafficState {
                intervals: std::array::from_fn(|l| layout.interval_of(l, next[l])),
                last_action: action,
            });
            *counts.entry(t).or_default() += 1;
        }
        let total = self.samples as f64;
        let mut row: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(t, c)| (t, c as f64 / total))
            .filter(|&(_, p)| p >= self.prune_below)
            .collect();
        if row.is_empty() {
            // every successor was rare; keep the uniform-sample mode instead
            row.push((s, 1.0));
        }
        let kept: f64 = row.iter().map(|(_, p)| p).sum();
        for (_, p) in &mut row {
            *p /= kept;
        }
        row
    }
}

/// Labels of a discrete traffic state, as a bitset over [`TRAFFIC_ATOMS`].
pub fn traffic_label(layout: &TrafficLayout, idx: usize) -> u64 {
    let st = layout.decode(idx);
    let mut bits = 0u64;
    for l in 0..4 {
        if layout.bounds(l, st.intervals[l]).1 <= THRESHOLDS[l] {
            bits |= 1 << l;
        }
    }
    if actuates(st.last_action, 1) {
        bits |= 1 << 4;
    }
    bits
}

/// Builds the traffic MDP. The initial state has empty queues and last
/// action `(3,4)`.
pub fn build_traffic_network(cfg: &TrafficConfig) -> Result<LabeledMdp, TrafficError> {
    cfg.validate()?;
    let layout = cfg.layout();
    let n = layout.num_states();
    let choices: Vec<Vec<Choice>> = (0..n)
        .into_par_iter()
        .map(|s| {
            (0..TRAFFIC_ACTIONS.len())
                .map(|action| Choice {
                    action,
                    successors: cfg.estimate_row(&layout, s, action),
                })
                .collect()
        })
        .collect();
    let labels = (0..n).map(|s| traffic_label(&layout, s)).collect();
    Ok(LabeledMdp {
        atoms: TRAFFIC_ATOMS.iter().map(|s| s.to_string()).collect(),
        actions: TRAFFIC_ACTIONS.iter().map(|s| s.to_string()).collect(),
        labels,
        choices,
        initial: layout.encode(TrafficState {
            intervals: [0; 4],
            last_action: 3,
        }),
    })
}

/// Action of the fixed-cycle controller at `phase`: three steps of `(1,2)`
/// followed by three steps of `(3,4)`.
pub fn naive_action(phase: usize) -> usize {
    if phase % 6 < 3 {
        0
    } else {
        3
    }
}

/// Fixed-cycle signal plan driven by its own phase counter; it ignores the
/// product state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NaiveController {
    pub phase: usize,
}

impl Controller for NaiveController {
    fn action(&mut self, _p: &ProductMdp, _sp: usize) -> usize {
        let a = naive_action(self.phase);
        self.phase = (self.phase + 1) % 6;
        a
    }
}
